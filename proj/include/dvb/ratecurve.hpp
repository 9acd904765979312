#pragma once

#include <span>
#include <vector>

namespace dvb {

/// Right-continuous step function of time.
///
/// `breaks` are the interior jump times (strictly increasing); `values` has one
/// more entry than `breaks`, so values[i] holds on [breaks[i-1], breaks[i]).
class PiecewiseConstant {
   public:
    PiecewiseConstant(double value = 0.0);  // NOLINT(google-explicit-constructor)
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    double operator()(double t) const;

    std::span<const double> breaks() const { return breaks_; }
    std::span<const double> values() const { return values_; }
    bool is_constant() const { return breaks_.empty(); }

    friend bool operator==(const PiecewiseConstant&, const PiecewiseConstant&) = default;

   private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

/// Which drift term enters the A(t) integrand.
///
/// Standard integrates a1(u) B(u); PaperLiteral integrates a2(u) B(u) instead.
/// PaperLiteral violates the bond PDE and exists
/// only to make that discrepancy observable.
enum class AIntegrand { Standard, PaperLiteral };

/// Affine short rate dr = (a1(t) - a2(t) r) dt + s_r(t) dW on [0, T].
class ShortRateModel {
   public:
    ShortRateModel(PiecewiseConstant a1, PiecewiseConstant a2, PiecewiseConstant s_r,
                   double maturity);

    static ShortRateModel vasicek(double a1, double a2, double s_r, double maturity);

    const PiecewiseConstant& a1() const { return a1_; }
    const PiecewiseConstant& a2() const { return a2_; }
    const PiecewiseConstant& s_r() const { return s_r_; }
    double maturity() const { return maturity_; }

    double drift(double r, double t) const { return a1_(t) - a2_(t) * r; }

    /// Union of all coefficient breakpoints lying strictly inside (0, T).
    std::span<const double> breakpoints() const { return breakpoints_; }
    bool has_constant_coefficients() const { return breakpoints_.empty(); }

    friend bool operator==(const ShortRateModel& a, const ShortRateModel& b) {
        return a.a1_ == b.a1_ && a.a2_ == b.a2_ && a.s_r_ == b.s_r_ && a.maturity_ == b.maturity_;
    }

   private:
    PiecewiseConstant a1_;
    PiecewiseConstant a2_;
    PiecewiseConstant s_r_;
    double maturity_;
    std::vector<double> breakpoints_;
};

/// Z(r, t) = exp(A(t) - B(t) r).
struct ZcbCoefficients {
    double A = 0.0;
    double B = 0.0;
};

/// A and B at time t, integrated backward from Z(r, T) = 1 segment by segment.
/// Throws DomainError unless 0 <= t <= T.
ZcbCoefficients zcb_coefficients(const ShortRateModel& model, double t,
                                 AIntegrand integrand = AIntegrand::Standard);

double coeff_B(const ShortRateModel& model, double t);
double coeff_A(const ShortRateModel& model, double t,
               AIntegrand integrand = AIntegrand::Standard);

/// Default-free zero-coupon bond price paying 1 at the model maturity.
double zcb_price(const ShortRateModel& model, double r, double t,
                 AIntegrand integrand = AIntegrand::Standard);

}  // namespace dvb
