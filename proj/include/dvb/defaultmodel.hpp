#pragma once

#include <functional>
#include <memory>
#include <string>

namespace dvb {

/// Declared firm value dynamics dV = (mu - b) V dt + s_V V dW1.
struct FirmModel {
    double V0 = 1.0;
    double mu = 0.0;
    double b = 0.0;
    double s_V = 0.2;

    double drift() const { return mu - b; }
    /// mu - b - s_V^2 / 2, the drift of log V.
    double log_drift() const { return mu - b - 0.5 * s_V * s_V; }

    void validate() const;

    friend bool operator==(const FirmModel&, const FirmModel&) = default;
};

/// Unexpected-default intensity as a function of the last declared firm value.
class IntensityFunction {
   public:
    enum class Family { LogReciprocal, Constant, Custom };

    /// lambda(V) = ln(1 + 1/V).
    static IntensityFunction log_reciprocal();
    static IntensityFunction constant(double lambda0);
    /// `fn` is sampled on a log grid of V at construction and rejected if it is
    /// negative or non-finite anywhere on it. `label` identifies it in output.
    static IntensityFunction custom(std::function<double(double)> fn, std::string label = "custom");

    Family family() const { return family_; }
    double lambda0() const { return lambda0_; }
    const std::string& label() const { return label_; }

    /// Throws DomainError for V <= 0.
    double operator()(double V) const;

    /// Custom functions compare by identity of the wrapped callable.
    friend bool operator==(const IntensityFunction& a, const IntensityFunction& b) {
        return a.family_ == b.family_ && a.lambda0_ == b.lambda0_ && a.label_ == b.label_ &&
               a.custom_ == b.custom_;
    }

   private:
    IntensityFunction(Family family, double lambda0, std::string label,
                      std::shared_ptr<const std::function<double(double)>> custom);

    Family family_;
    double lambda0_ = 0.0;
    std::string label_;
    std::shared_ptr<const std::function<double(double)>> custom_;
};

/// Announcement dates, barriers, and recoveries for the two-date bond.
struct DefaultSpec {
    double t1 = 0.5;
    double t2 = 1.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double R_u = 0.0;
    double R_e = 0.0;
    IntensityFunction intensity = IntensityFunction::log_reciprocal();

    double gap() const { return t2 - t1; }

    void validate() const;

    friend bool operator==(const DefaultSpec&, const DefaultSpec&) = default;
};

double intensity_at(const IntensityFunction& f, double V);

/// V_s * exp((mu - b - s_V^2/2) dt + s_V sqrt(dt) z).
double firm_value_step(const FirmModel& fm, double V_s, double dt, double z);

/// (ln(x/K) + (mu - b - s_V^2/2) tau) / (s_V sqrt(tau)).
double d_minus(double x_over_K, const FirmModel& fm, double tau);

/// Prob{V(s + tau) > K | V(s) = V_now} = N(d_minus(V_now/K, tau)); exactly 1 for K = 0.
double survival_prob(const FirmModel& fm, double V_now, double K, double tau);

}  // namespace dvb
