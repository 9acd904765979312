#include "dvb/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace dvb {

namespace {

// V1 as a function of a standardized normal draw u over [0, t1], with the
// orientation of the survival integral folded in: Corrected integrates
// u = -W1(t1)/sqrt(t1) over (-inf, alpha1], PaperLiteral u = +W1(t1)/sqrt(t1).
double declared_value_at(const FirmModel& firm, double t1, double u, PricingMode mode) {
    const double sign = (mode == PricingMode::Corrected) ? -1.0 : 1.0;
    const double v = firm.V0 * std::exp(firm.log_drift() * t1 + sign * firm.s_V * std::sqrt(t1) * u);
    return std::max(v, std::numeric_limits<double>::min());
}

double terminal_distance(const FirmModel& firm, const DefaultSpec& spec, double V1) {
    return spec.K2 > 0.0 ? d_minus(V1 / spec.K2, firm, spec.gap()) : kInf;
}

// Value factor on [t1, t2] at time t given V1, before multiplying by Z(r, t).
double last_interval_factor(const FirmModel& firm, const DefaultSpec& spec, double V1, double t,
                            PricingMode mode) {
    const double lam = spec.intensity(V1);
    const double d = terminal_distance(firm, spec, V1);
    const double survive = interval_factor_u1(spec, lam, t, true);
    if (mode == PricingMode::PaperLiteral) {
        return survive * (normal_cdf(d) + spec.R_e * normal_cdf(-d));
    }
    return survive * normal_cdf(d) + interval_factor_u1(spec, lam, t, false) * normal_cdf(-d);
}

double coupling(const DefaultSpec& spec) { return std::sqrt(spec.t1 / spec.gap()); }

}  // namespace

std::string_view to_string(PricingMode mode) {
    return mode == PricingMode::Corrected ? "corrected" : "paper-literal";
}

std::optional<PricingMode> parse_pricing_mode(std::string_view text) {
    if (text == "corrected") return PricingMode::Corrected;
    if (text == "paper-literal") return PricingMode::PaperLiteral;
    return std::nullopt;
}

void PricingInputs::validate() const {
    firm.validate();
    spec.validate();
    if (std::abs(rate_model.maturity() - spec.t2) > 1e-12) {
        throw DomainError(fmt::format("rate model maturity {} differs from bond maturity t2 = {}",
                                      rate_model.maturity(), spec.t2));
    }
    if (!std::isfinite(r)) throw DomainError("short rate r must be finite");
    if (!(t >= 0.0 && t < spec.t2)) {
        throw DomainError(fmt::format("valuation time t = {} outside [0, t2 = {})", t, spec.t2));
    }
    if (t >= spec.t1) {
        if (!V1) throw DomainError("valuation at or after t1 requires the declared value V1");
        if (!(*V1 > 0.0) || !std::isfinite(*V1)) throw DomainError("declared value V1 must be positive");
    }
}

double interval_factor_u1(const DefaultSpec& spec, double lam, double t, bool survived_terminal) {
    const double decay = std::exp(-lam * (spec.t2 - t));
    const double terminal = survived_terminal ? 1.0 : spec.R_e;
    return spec.R_u + (terminal - spec.R_u) * decay;
}

double price_last_interval(const PricingInputs& inputs, double V1, PricingMode mode) {
    const auto& spec = inputs.spec;
    if (!(inputs.t >= spec.t1 && inputs.t < spec.t2)) {
        throw DomainError(fmt::format("price_last_interval needs t1 <= t < t2, got t = {}", inputs.t));
    }
    if (!(V1 > 0.0)) throw DomainError("price_last_interval requires V1 > 0");
    const double z = zcb_price(inputs.rate_model, inputs.r, inputs.t, inputs.a_integrand);
    return z * last_interval_factor(inputs.firm, spec, V1, inputs.t, mode);
}

double f_factor(const FirmModel& firm, const DefaultSpec& spec, double V1, PricingMode mode) {
    if (!(V1 > 0.0)) throw DomainError("f_factor requires V1 > 0");
    return last_interval_factor(firm, spec, V1, spec.t1, mode);
}

GComponents g_components(const FirmModel& firm, const DefaultSpec& spec, double x, PricingMode mode) {
    if (!std::isfinite(x)) throw DomainError("g_components requires a finite draw");
    const double V1 = std::max(firm.V0 * std::exp(firm.log_drift() * spec.t1 + firm.s_V * x),
                               std::numeric_limits<double>::min());
    const double d = spec.K2 > 0.0 ? compute_alphas(firm, spec).alpha2 + x / std::sqrt(spec.gap()) : kInf;
    const double e = std::exp(-spec.gap() * spec.intensity(V1));
    const double up = normal_cdf(d);
    const double down = normal_cdf(-d);
    GComponents g;
    g.g21 = spec.R_u * up;
    g.g22 = (1.0 - spec.R_u) * e * up;
    if (mode == PricingMode::Corrected) {
        g.g23 = spec.R_u * down;
        g.g24 = (spec.R_e - spec.R_u) * e * down;
    } else {
        g.g23 = spec.R_u * spec.R_e * down;
        g.g24 = spec.R_e * (1.0 - spec.R_u) * e * down;
    }
    return g;
}

Alpha compute_alphas(const FirmModel& firm, const DefaultSpec& spec) {
    if (!(firm.V0 > 0.0)) throw DomainError("compute_alphas requires V0 > 0");
    if (spec.K1 < 0.0 || spec.K2 < 0.0) throw DomainError("compute_alphas requires K1, K2 >= 0");
    Alpha a;
    if (spec.K1 > 0.0) a.alpha1 = d_minus(firm.V0 / spec.K1, firm, spec.t1);
    if (spec.K2 > 0.0) {
        a.alpha2 = (std::log(firm.V0 / spec.K2) + firm.log_drift() * spec.t2) /
                   (firm.s_V * std::sqrt(spec.gap()));
    }
    return a;
}

TermPair term_I21_I23(const Alpha& alphas, const DefaultSpec& spec, PricingMode mode) {
    if (spec.R_u == 0.0) return {};
    const QuadFormMatrix a = announcement_form(spec.t1, spec.t2, Coupling::Positive);
    const QuadFormMatrix a_tilde = announcement_form(spec.t1, spec.t2, Coupling::Negative);
    if (mode == PricingMode::Corrected) {
        return {spec.R_u * bivariate_cdf_quadform(alphas.alpha1, alphas.alpha2, a_tilde),
                spec.R_u * bivariate_cdf_quadform(alphas.alpha1, -alphas.alpha2, a)};
    }
    return {spec.R_u * bivariate_cdf_quadform(alphas.alpha1, alphas.alpha2, a),
            spec.R_u * spec.R_e * bivariate_cdf_quadform(alphas.alpha1, -alphas.alpha2, a_tilde)};
}

TermPair term_I22_I24(const Alpha& alphas, const FirmModel& firm, const DefaultSpec& spec,
                      PricingMode mode, const QuadratureSpec& quad) {
    const double c = coupling(spec);
    const double sign = (mode == PricingMode::Corrected) ? -1.0 : 1.0;
    const double gap = spec.gap();
    auto kernel_F = [&](double u) {
        return std::exp(-gap * spec.intensity(declared_value_at(firm, spec.t1, u, mode)));
    };

    const double pre22 = 1.0 - spec.R_u;
    const double pre24 =
        (mode == PricingMode::Corrected) ? spec.R_e - spec.R_u : spec.R_e * (1.0 - spec.R_u);

    TermPair out;
    if (pre22 != 0.0) {
        out.first = pre22 * integrate_left_tail(
                                [&](double u) { return kernel_F(u) * normal_cdf(alphas.alpha2 + sign * c * u); },
                                alphas.alpha1, quad);
    }
    if (pre24 != 0.0 && alphas.alpha2 != kInf) {
        out.second = pre24 * integrate_left_tail(
                                 [&](double u) { return kernel_F(u) * normal_cdf(-alphas.alpha2 - sign * c * u); },
                                 alphas.alpha1, quad);
    }
    return out;
}

double expected_default_leg(const PricingInputs& inputs, PricingMode mode) {
    const auto& spec = inputs.spec;
    if (!(inputs.t >= 0.0 && inputs.t < spec.t1)) {
        throw DomainError(fmt::format("expected_default_leg needs 0 <= t < t1, got t = {}", inputs.t));
    }
    const Alpha alphas = compute_alphas(inputs.firm, spec);
    const double z = zcb_price(inputs.rate_model, inputs.r, inputs.t, inputs.a_integrand);
    const double e0 = std::exp(-spec.intensity(inputs.firm.V0) * (spec.t1 - inputs.t));
    const double breach = normal_cdf(-alphas.alpha1);
    if (mode == PricingMode::Corrected) {
        return z * (spec.R_u + (spec.R_e - spec.R_u) * e0) * breach;
    }
    return spec.R_e * z * (spec.R_u + (1.0 - spec.R_u) * e0) * breach;
}

double price_given_declared_value(const PricingInputs& inputs, double V1, PricingMode mode) {
    const auto& spec = inputs.spec;
    if (!(inputs.t >= 0.0 && inputs.t < spec.t1)) {
        throw DomainError("price_given_declared_value needs 0 <= t < t1");
    }
    if (!(V1 > 0.0)) throw DomainError("price_given_declared_value requires V1 > 0");
    const double z = zcb_price(inputs.rate_model, inputs.r, inputs.t, inputs.a_integrand);
    const double e0 = std::exp(-spec.intensity(inputs.firm.V0) * (spec.t1 - inputs.t));
    const double at_t1 = (V1 <= spec.K1) ? spec.R_e : f_factor(inputs.firm, spec, V1, mode);
    return z * (spec.R_u + (at_t1 - spec.R_u) * e0);
}

double survival_region_expectation(const FirmModel& firm, const DefaultSpec& spec, PricingMode mode,
                                   const QuadratureSpec& quad) {
    const Alpha alphas = compute_alphas(firm, spec);
    return integrate_left_tail(
        [&](double u) { return f_factor(firm, spec, declared_value_at(firm, spec.t1, u, mode), mode); },
        alphas.alpha1, quad);
}

PriceResult price_full(const PricingInputs& inputs, PricingMode mode, const QuadratureSpec& quad) {
    inputs.validate();
    const auto& spec = inputs.spec;
    PriceResult result;
    result.mode = mode;
    result.zcb = zcb_price(inputs.rate_model, inputs.r, inputs.t, inputs.a_integrand);

    if (inputs.t >= spec.t1) {
        result.regime = Regime::AfterFirstAnnouncement;
        result.price = price_last_interval(inputs, *inputs.V1, mode);
        return result;
    }

    const double e0 = std::exp(-spec.intensity(inputs.firm.V0) * (spec.t1 - inputs.t));
    result.survival_discount = e0;
    const Alpha alphas = compute_alphas(inputs.firm, spec);
    PriceTerms& terms = result.terms;
    terms.expected_default = expected_default_leg(inputs, mode);
    terms.I1 = spec.R_u * result.zcb * (1.0 - e0) * normal_cdf(alphas.alpha1);
    const TermPair bivariate = term_I21_I23(alphas, spec, mode);
    terms.I21 = bivariate.first;
    terms.I23 = bivariate.second;
    try {
        const TermPair weighted = term_I22_I24(alphas, inputs.firm, spec, mode, quad);
        terms.I22 = weighted.first;
        terms.I24 = weighted.second;
    } catch (const ConvergenceError& e) {
        throw PricingConvergenceError(e, terms);
    }
    result.price = terms.expected_default + terms.I1 + result.zcb * e0 * terms.I2();
    return result;
}

double credit_spread(const PriceResult& result, double t, double t2) {
    if (!(t2 > t)) throw DomainError("credit_spread requires t < t2");
    return -std::log(result.price / result.zcb) / (t2 - t);
}

double credit_spread(const PricingInputs& inputs, PricingMode mode) {
    return credit_spread(price_full(inputs, mode), inputs.t, inputs.spec.t2);
}

}  // namespace dvb
