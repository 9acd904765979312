#pragma once

#include <optional>
#include <string_view>

#include "dvb/defaultmodel.hpp"
#include "dvb/errors.hpp"
#include "dvb/mathkit.hpp"
#include "dvb/ratecurve.hpp"

namespace dvb {

/// Corrected prices the model as specified by its assumptions: survival-region
/// integrals over {V1 > K1} and the expectation of the last-interval payoff.
/// PaperLiteral keeps the literal closed form term by term, including the
/// reflected survival integrals, the recovery product in f(V1), and the
/// R_e [R_u + (1 - R_u) e] factor on the first-date default leg.
enum class PricingMode { Corrected, PaperLiteral };

std::string_view to_string(PricingMode mode);
/// Accepts "corrected" and "paper-literal".
std::optional<PricingMode> parse_pricing_mode(std::string_view text);

struct PricingInputs {
    ShortRateModel rate_model = ShortRateModel::vasicek(0.0, 0.1, 0.0, 1.0);
    FirmModel firm;
    DefaultSpec spec;
    double r = 0.0;  ///< short rate at the valuation time
    double t = 0.0;  ///< valuation time, in [0, t2)
    /// Declared value at t1; required once t >= t1.
    std::optional<double> V1;
    AIntegrand a_integrand = AIntegrand::Standard;

    /// Checks every component plus t < t2, maturity == t2, and V1 presence.
    void validate() const;
};

/// Standardized distances of V0 to the two barriers; +inf for a zero barrier.
struct Alpha {
    double alpha1 = kInf;
    double alpha2 = kInf;
};

struct PriceTerms {
    double I1 = 0.0;
    double I21 = 0.0;
    double I22 = 0.0;
    double I23 = 0.0;
    double I24 = 0.0;
    double expected_default = 0.0;

    double I2() const { return I21 + I22 + I23 + I24; }
};

enum class Regime { BeforeFirstAnnouncement, AfterFirstAnnouncement };

struct PriceResult {
    double price = 0.0;
    PricingMode mode = PricingMode::Corrected;
    Regime regime = Regime::BeforeFirstAnnouncement;
    /// Zero for the post-announcement regime, where the price is Z * f-style directly.
    PriceTerms terms;
    double zcb = 0.0;
    /// exp(-lambda(V0) (t1 - t)); 1 in the post-announcement regime.
    double survival_discount = 1.0;
};

/// Quadrature failure while assembling a price; carries the terms computed so far.
class PricingConvergenceError : public ConvergenceError {
   public:
    PricingConvergenceError(const ConvergenceError& cause, PriceTerms partial)
        : ConvergenceError(cause.what(), cause.estimate(), cause.error_bound()), partial_(partial) {}

    const PriceTerms& partial_terms() const noexcept { return partial_; }

   private:
    PriceTerms partial_;
};

/// u1(t) on [t1, t2]: R_u + (1 - R_u) e^{-lam (t2 - t)} when the terminal
/// barrier is survived, R_u + (R_e - R_u) e^{-lam (t2 - t)} otherwise.
double interval_factor_u1(const DefaultSpec& spec, double lam, double t, bool survived_terminal);

/// Price for t1 <= t < t2 once V1 has been declared.
double price_last_interval(const PricingInputs& inputs, double V1,
                           PricingMode mode = PricingMode::Corrected);

/// f(V1) with C(r, t1; V1) = Z(r, t1) f(V1).
double f_factor(const FirmModel& firm, const DefaultSpec& spec, double V1,
                PricingMode mode = PricingMode::Corrected);

struct GComponents {
    double g21 = 0.0;
    double g22 = 0.0;
    double g23 = 0.0;
    double g24 = 0.0;

    double sum() const { return g21 + g22 + g23 + g24; }
};

/// Decomposition of f(V1) evaluated at W1(t1) = x, i.e. V1 = V0 exp(log_drift t1 + s_V x).
///
/// Corrected: g21 = R_u N(d), g22 = (1-R_u) e N(d), g23 = R_u N(-d), g24 = (R_e-R_u) e N(-d).
/// PaperLiteral: g23 = R_u R_e N(-d), g24 = R_e (1-R_u) e N(-d).
/// Here d = alpha2 + x / sqrt(t2 - t1) and e = exp(-(t2 - t1) lambda(V1)).
GComponents g_components(const FirmModel& firm, const DefaultSpec& spec, double x,
                         PricingMode mode = PricingMode::Corrected);

/// alpha1 = d_-(V0/K1, t1); alpha2 = (ln(V0/K2) + log_drift t2) / (s_V sqrt(t2 - t1)).
Alpha compute_alphas(const FirmModel& firm, const DefaultSpec& spec);

struct TermPair {
    double first = 0.0;
    double second = 0.0;
};

/// (I21, I23), the bivariate-normal terms of the survival-region expectation.
TermPair term_I21_I23(const Alpha& alphas, const DefaultSpec& spec,
                      PricingMode mode = PricingMode::Corrected);

/// (I22, I24), the intensity-weighted terms, by adaptive Gaussian quadrature.
TermPair term_I22_I24(const Alpha& alphas, const FirmModel& firm, const DefaultSpec& spec,
                      PricingMode mode = PricingMode::Corrected, const QuadratureSpec& quad = {});

/// E[C0 ; V1 <= K1], the leg settled by the first-date barrier (including
/// unexpected default before t1 on that event).
double expected_default_leg(const PricingInputs& inputs, PricingMode mode = PricingMode::Corrected);

/// First-interval price for a fixed declared V1: Z [R_u + (R_e - R_u) e0] when
/// V1 <= K1, Z [R_u + (f(V1) - R_u) e0] otherwise. Requires t < t1.
double price_given_declared_value(const PricingInputs& inputs, double V1,
                                  PricingMode mode = PricingMode::Corrected);

/// I2 computed as one quadrature of f over the survival region, without the
/// four-way split. Used to check the I21..I24 decomposition.
double survival_region_expectation(const FirmModel& firm, const DefaultSpec& spec,
                                   PricingMode mode = PricingMode::Corrected,
                                   const QuadratureSpec& quad = {});

/// Full price with its decomposition. For t >= t1 routes to price_last_interval.
PriceResult price_full(const PricingInputs& inputs, PricingMode mode = PricingMode::Corrected,
                       const QuadratureSpec& quad = {});

/// -ln(C / Z) / (t2 - t).
double credit_spread(const PricingInputs& inputs, PricingMode mode = PricingMode::Corrected);
double credit_spread(const PriceResult& result, double t, double t2);

}  // namespace dvb
