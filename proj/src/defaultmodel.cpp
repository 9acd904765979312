#include "dvb/defaultmodel.hpp"

#include <cmath>

#include <fmt/core.h>

#include "dvb/errors.hpp"
#include "dvb/mathkit.hpp"

namespace dvb {

void FirmModel::validate() const {
    if (!(V0 > 0.0) || !std::isfinite(V0)) throw DomainError("firm value V0 must be positive");
    if (!(s_V > 0.0) || !std::isfinite(s_V)) throw DomainError("firm volatility s_V must be positive");
    if (!std::isfinite(mu) || !std::isfinite(b)) throw DomainError("mu and b must be finite");
}

IntensityFunction::IntensityFunction(Family family, double lambda0, std::string label,
                                     std::shared_ptr<const std::function<double(double)>> custom)
    : family_(family), lambda0_(lambda0), label_(std::move(label)), custom_(std::move(custom)) {}

IntensityFunction IntensityFunction::log_reciprocal() {
    return IntensityFunction(Family::LogReciprocal, 0.0, "log-reciprocal", nullptr);
}

IntensityFunction IntensityFunction::constant(double lambda0) {
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) {
        throw DomainError(fmt::format("constant intensity must be finite and >= 0, got {}", lambda0));
    }
    return IntensityFunction(Family::Constant, lambda0, "constant", nullptr);
}

IntensityFunction IntensityFunction::custom(std::function<double(double)> fn, std::string label) {
    if (!fn) throw DomainError("custom intensity function is empty");
    // V from 1e-8 to 1e8, 16 points per decade.
    for (int i = 0; i <= 256; ++i) {
        const double V = std::pow(10.0, -8.0 + i / 16.0);
        const double lam = fn(V);
        if (!std::isfinite(lam) || lam < 0.0) {
            throw DomainError(fmt::format("custom intensity '{}' is {} at V = {:.6g}; it must be finite and >= 0",
                                          label, lam, V));
        }
    }
    return IntensityFunction(Family::Custom, 0.0, std::move(label),
                             std::make_shared<const std::function<double(double)>>(std::move(fn)));
}

double IntensityFunction::operator()(double V) const {
    if (!(V > 0.0)) throw DomainError(fmt::format("intensity requires V > 0, got {}", V));
    switch (family_) {
        case Family::LogReciprocal:
            return std::log1p(1.0 / V);
        case Family::Constant:
            return lambda0_;
        case Family::Custom:
            break;
    }
    const double lam = (*custom_)(V);
    if (!std::isfinite(lam) || lam < 0.0) {
        throw DomainError(fmt::format("custom intensity '{}' returned {} at V = {}", label_, lam, V));
    }
    return lam;
}

void DefaultSpec::validate() const {
    if (!(t1 > 0.0 && t2 > t1) || !std::isfinite(t2)) {
        throw DomainError(fmt::format("announcement dates need 0 < t1 < t2, got t1={} t2={}", t1, t2));
    }
    if (!(K1 >= 0.0) || !(K2 >= 0.0) || !std::isfinite(K1) || !std::isfinite(K2)) {
        throw DomainError("barriers K1, K2 must be finite and >= 0");
    }
    if (!(R_u >= 0.0 && R_u <= 1.0)) throw DomainError(fmt::format("R_u must lie in [0, 1], got {}", R_u));
    if (!(R_e >= 0.0 && R_e <= 1.0)) throw DomainError(fmt::format("R_e must lie in [0, 1], got {}", R_e));
}

double intensity_at(const IntensityFunction& f, double V) { return f(V); }

double firm_value_step(const FirmModel& fm, double V_s, double dt, double z) {
    if (!(V_s > 0.0)) throw DomainError("firm_value_step requires V_s > 0");
    if (!(dt > 0.0)) throw DomainError("firm_value_step requires dt > 0");
    return V_s * std::exp(fm.log_drift() * dt + fm.s_V * std::sqrt(dt) * z);
}

double d_minus(double x_over_K, const FirmModel& fm, double tau) {
    if (!(x_over_K > 0.0)) throw DomainError("d_minus requires x/K > 0");
    if (!(tau > 0.0)) throw DomainError("d_minus requires tau > 0");
    if (x_over_K == kInf) return kInf;
    return (std::log(x_over_K) + fm.log_drift() * tau) / (fm.s_V * std::sqrt(tau));
}

double survival_prob(const FirmModel& fm, double V_now, double K, double tau) {
    if (!(V_now > 0.0)) throw DomainError("survival_prob requires V_now > 0");
    if (!(tau > 0.0)) throw DomainError("survival_prob requires tau > 0");
    if (!(K >= 0.0)) throw DomainError("survival_prob requires K >= 0");
    if (K == 0.0) return 1.0;
    return normal_cdf(d_minus(V_now / K, fm, tau));
}

}  // namespace dvb
