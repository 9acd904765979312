#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dvb/errors.hpp"
#include "dvb/mcoracle.hpp"
#include "dvb/pricer.hpp"
#include "oracles.hpp"

namespace dvb {
namespace {

using testing::benchmark_inputs;
using testing::distressed_inputs;
using testing::random_inputs;

constexpr PricingMode kBoth[] = {PricingMode::Corrected, PricingMode::PaperLiteral};

double Z(const PricingInputs& in) { return zcb_price(in.rate_model, in.r, in.t); }

PricingInputs at_t1(PricingInputs in, double V1) {
    in.t = in.spec.t1;
    in.V1 = V1;
    return in;
}

TEST(IntervalFactor, Examples) {
    DefaultSpec spec;
    spec.t2 = 1.0;
    spec.R_u = 0.4;
    spec.R_e = 0.3;
    EXPECT_EQ(interval_factor_u1(spec, 0.0, 0.2, true), 1.0);
    EXPECT_NEAR(interval_factor_u1(spec, 0.1, 0.0, true), 0.4 + 0.6 * std::exp(-0.1), 1e-15);
    EXPECT_NEAR(interval_factor_u1(spec, 0.1, 0.0, true), 0.9429024, 1e-7);
    EXPECT_EQ(interval_factor_u1(spec, 0.7, 1.0, true), 1.0);
    EXPECT_NEAR(interval_factor_u1(spec, 0.7, 1.0, false), 0.3, 1e-16);
}

TEST(IntervalFactor, SolvesIntervalOde) {
    // du/dt = lam (u - R_u), u(t2) = terminal; backward Euler-free RK4 check.
    DefaultSpec spec;
    spec.t1 = 0.5;
    spec.t2 = 2.0;
    spec.R_u = 0.35;
    spec.R_e = 0.6;
    const double lam = 0.8;
    for (bool survived : {true, false}) {
        double u = survived ? 1.0 : spec.R_e;
        const int n = 2000;
        const double h = (spec.t2 - spec.t1) / n;
        auto f = [&](double v) { return lam * (v - spec.R_u); };
        for (int i = 0; i < n; ++i) {
            const double k1 = f(u), k2 = f(u - 0.5 * h * k1), k3 = f(u - 0.5 * h * k2), k4 = f(u - h * k3);
            u -= h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        EXPECT_NEAR(interval_factor_u1(spec, lam, spec.t1, survived), u, 1e-12);
    }
}

TEST(LastInterval, Examples) {
    auto in = at_t1(benchmark_inputs(), 100.0);
    in.spec.R_u = in.spec.R_e = 1.0;
    for (auto m : kBoth) EXPECT_NEAR(price_last_interval(in, 100.0, m), Z(in), 1e-15);
    in = at_t1(benchmark_inputs(), 100.0);
    in.spec.K2 = 0.0;
    in.spec.intensity = IntensityFunction::constant(0.0);
    EXPECT_NEAR(price_last_interval(in, 100.0), Z(in), 1e-15);
}

TEST(LastInterval, MatchesMonteCarlo) {
    const auto in = at_t1(benchmark_inputs(), 100.0);
    McConfig cfg;
    cfg.n_paths = 400'000;
    const auto mc = simulate_price(in, cfg);
    EXPECT_LT(std::abs(z_score(price_last_interval(in, 100.0), mc)), 3.0);
}

TEST(LastInterval, RejectsTimesBeforeAnnouncement) {
    auto in = benchmark_inputs();
    EXPECT_THROW(price_last_interval(in, 100.0), DomainError);
    in = at_t1(in, 100.0);
    EXPECT_THROW(price_last_interval(in, -1.0), DomainError);
}

TEST(FFactor, Examples) {
    auto in = benchmark_inputs();
    in.spec.R_u = in.spec.R_e = 1.0;
    for (auto m : kBoth) EXPECT_NEAR(f_factor(in.firm, in.spec, 90.0, m), 1.0, 1e-15);
    in = benchmark_inputs();
    in.spec.K2 = 0.0;
    in.spec.intensity = IntensityFunction::constant(0.2);
    for (auto m : kBoth)
        EXPECT_NEAR(f_factor(in.firm, in.spec, 90.0, m), 0.4 + 0.6 * std::exp(-0.2 * 0.5), 1e-15);
}

TEST(FFactor, IsExpectationOverTerminalBarrier) {
    // f(V1) = E[u1 at t1 | V1] with V2 drawn from the lognormal transition.
    // The breach threshold in z is located by bisection on the transition map.
    const auto in = benchmark_inputs();
    const double V1 = 84.0;
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (firm_value_step(in.firm, V1, 0.5, mid) > in.spec.K2 ? hi : lo) = mid;
    }
    const double p_surv = 1.0 - testing::Phi(hi);
    const double lam = in.spec.intensity(V1);
    const double ref = p_surv * interval_factor_u1(in.spec, lam, 0.5, true) +
                       (1 - p_surv) * interval_factor_u1(in.spec, lam, 0.5, false);
    EXPECT_NEAR(f_factor(in.firm, in.spec, V1), ref, 1e-13);
}

TEST(GComponents, SumToFactor) {
    const auto in = benchmark_inputs();
    for (auto m : kBoth) {
        for (double x : {-1.2, -0.3, 0.0, 0.5, 1.4}) {
            const double V1 = in.firm.V0 * std::exp(in.firm.log_drift() * in.spec.t1 + in.firm.s_V * x);
            EXPECT_NEAR(g_components(in.firm, in.spec, x, m).sum(), f_factor(in.firm, in.spec, V1, m), 1e-14);
        }
    }
}

TEST(GComponents, RecoveryZeros) {
    auto in = benchmark_inputs();
    in.spec.R_u = 1.0;
    auto g = g_components(in.firm, in.spec, 0.3, PricingMode::PaperLiteral);
    EXPECT_EQ(g.g22, 0.0);
    EXPECT_EQ(g.g24, 0.0);
    // Corrected: the breach branch still loses (1 - R_e) e to the barrier.
    g = g_components(in.firm, in.spec, 0.3, PricingMode::Corrected);
    EXPECT_EQ(g.g22, 0.0);
    EXPECT_LT(g.g24, 0.0);
    in = benchmark_inputs();
    in.spec.R_e = 0.0;
    g = g_components(in.firm, in.spec, 0.3, PricingMode::PaperLiteral);
    EXPECT_EQ(g.g23, 0.0);
    EXPECT_EQ(g.g24, 0.0);
}

TEST(Alphas, Examples) {
    auto in = benchmark_inputs();
    const auto a = compute_alphas(in.firm, in.spec);
    EXPECT_NEAR(a.alpha1, std::log(100.0 / 70.0) / (0.2 * std::sqrt(0.5)), 1e-14);
    EXPECT_NEAR(a.alpha1, 2.522073, 1e-6);
    EXPECT_NEAR(a.alpha2, 1.5778, 1e-4);
    // d_-(V1 / K2) at the median path equals alpha2.
    const double V1 = in.firm.V0 * std::exp(in.firm.log_drift() * 0.5);
    EXPECT_NEAR(d_minus(V1 / in.spec.K2, in.firm, 0.5), a.alpha2, 1e-14);

    in.spec.K1 = 100.0;
    in.spec.K2 = 100.0;
    EXPECT_NEAR(compute_alphas(in.firm, in.spec).alpha1, 0.0, 1e-15);
    EXPECT_NEAR(compute_alphas(in.firm, in.spec).alpha2, 0.0, 1e-15);
    in.spec.K1 = in.spec.K2 = 0.0;
    EXPECT_EQ(compute_alphas(in.firm, in.spec).alpha1, kInf);
    EXPECT_EQ(compute_alphas(in.firm, in.spec).alpha2, kInf);
    in.firm.V0 = 0.0;
    EXPECT_THROW(compute_alphas(in.firm, in.spec), DomainError);
}

TEST(BivariateTerms, Examples) {
    auto in = benchmark_inputs();
    in.spec.R_u = 0.0;
    const auto a = compute_alphas(in.firm, in.spec);
    for (auto m : kBoth) {
        const auto p = term_I21_I23(a, in.spec, m);
        EXPECT_EQ(p.first, 0.0);
        EXPECT_EQ(p.second, 0.0);
    }
    in.spec.R_u = 0.4;
    const Alpha far{kInf, kInf};
    for (auto m : kBoth) EXPECT_NEAR(term_I21_I23(far, in.spec, m).first, 0.4, 1e-14);
}

TEST(WeightedTerms, FullUnexpectedRecovery) {
    auto in = benchmark_inputs();
    in.spec.R_u = 1.0;
    const auto a = compute_alphas(in.firm, in.spec);
    const auto lit = term_I22_I24(a, in.firm, in.spec, PricingMode::PaperLiteral);
    EXPECT_EQ(lit.first, 0.0);
    EXPECT_EQ(lit.second, 0.0);
    EXPECT_EQ(term_I22_I24(a, in.firm, in.spec, PricingMode::Corrected).first, 0.0);
}

TEST(WeightedTerms, MatchSimulatedExpectation) {
    const auto in = benchmark_inputs();
    const auto& f = in.firm;
    const auto& s = in.spec;
    const auto a = compute_alphas(f, s);
    const auto t = term_I22_I24(a, f, s);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    const int n = 1'000'000;
    double m22 = 0, q22 = 0, m24 = 0, q24 = 0;
    for (int i = 0; i < n; ++i) {
        const double V1 = firm_value_step(f, f.V0, s.t1, z(rng));
        double x22 = 0, x24 = 0;
        if (V1 > s.K1) {
            const double e = std::exp(-s.gap() * s.intensity(V1));
            const double p = survival_prob(f, V1, s.K2, s.gap());
            x22 = (1 - s.R_u) * e * p;
            x24 = (s.R_e - s.R_u) * e * (1 - p);
        }
        m22 += x22;
        q22 += x22 * x22;
        m24 += x24;
        q24 += x24 * x24;
    }
    m22 /= n;
    m24 /= n;
    const double se22 = std::sqrt((q22 / n - m22 * m22) / n), se24 = std::sqrt((q24 / n - m24 * m24) / n);
    EXPECT_LT(std::abs(t.first - m22), 3 * se22);
    EXPECT_LT(std::abs(t.second - m24), 3 * se24);
}

TEST(WeightedTerms, ConstantIntensityFactorsOut) {
    auto in = benchmark_inputs();
    in.spec.intensity = IntensityFunction::constant(0.3);
    const auto a = compute_alphas(in.firm, in.spec);
    const auto t = term_I22_I24(a, in.firm, in.spec);
    const double e = std::exp(-0.3 * 0.5);
    const auto At = announcement_form(0.5, 1.0, Coupling::Negative);
    const auto A = announcement_form(0.5, 1.0, Coupling::Positive);
    EXPECT_NEAR(t.first, 0.6 * e * bivariate_cdf_quadform(a.alpha1, a.alpha2, At), 1e-10);
    EXPECT_NEAR(t.second, -0.1 * e * bivariate_cdf_quadform(a.alpha1, -a.alpha2, A), 1e-10);
}

TEST(ExpectedLeg, Examples) {
    auto in = benchmark_inputs();
    in.spec.K1 = 0.0;
    for (auto m : kBoth) EXPECT_EQ(expected_default_leg(in, m), 0.0);
    in = benchmark_inputs();
    in.spec.R_e = 1.0;
    in.spec.intensity = IntensityFunction::constant(0.0);
    const double breach = normal_cdf(-compute_alphas(in.firm, in.spec).alpha1);
    EXPECT_NEAR(expected_default_leg(in), Z(in) * breach, 1e-16);
}

TEST(ExpectedLeg, ModesAgreeOnlyWhenProductVanishes) {
    auto in = distressed_inputs();
    const double gap = expected_default_leg(in) - expected_default_leg(in, PricingMode::PaperLiteral);
    EXPECT_GT(gap, 0.05);
    in.spec.R_e = 1.0;
    EXPECT_NEAR(expected_default_leg(in), expected_default_leg(in, PricingMode::PaperLiteral), 1e-15);
}

TEST(PriceFull, FullRecoveryIsDefaultFree) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 25; ++i) {
        auto in = random_inputs(rng);
        in.spec.R_u = in.spec.R_e = 1.0;
        const auto res = price_full(in);
        EXPECT_NEAR(res.price, Z(in), 1e-12 * Z(in));
    }
}

TEST(PriceFull, NoDefaultMechanismIsDefaultFree) {
    auto in = benchmark_inputs();
    in.spec.K1 = in.spec.K2 = 0.0;
    in.spec.intensity = IntensityFunction::constant(0.0);
    for (auto m : kBoth) EXPECT_NEAR(price_full(in, m).price, Z(in), 1e-12);
}

TEST(PriceFull, BenchmarkDecomposition) {
    const auto res = price_full(benchmark_inputs());
    EXPECT_EQ(res.regime, Regime::BeforeFirstAnnouncement);
    EXPECT_NEAR(res.zcb, 0.9512431073396288, 1e-12);
    EXPECT_NEAR(res.price, res.terms.expected_default + res.terms.I1 + res.zcb * res.survival_discount * res.terms.I2(),
                1e-15);
    EXPECT_GT(res.price, 0.85);
    EXPECT_LT(res.price, res.zcb);
}

TEST(PriceFull, SplitMatchesUnsplitSurvivalIntegral) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 30; ++i) {
        const auto in = random_inputs(rng);
        for (auto m : kBoth) {
            const auto res = price_full(in, m);
            EXPECT_NEAR(res.terms.I2(), survival_region_expectation(in.firm, in.spec, m), 1e-8);
        }
    }
}

TEST(PriceFull, IntegratesDeclaredValuePrice) {
    // E over V1 of the first-interval price for known V1, by an independent
    // quadrature split where V1 crosses K1.
    for (const auto& in : {benchmark_inputs(), distressed_inputs()}) {
        const auto& f = in.firm;
        const double z_star = (std::log(in.spec.K1 / f.V0) - f.log_drift() * in.spec.t1) / (f.s_V * std::sqrt(in.spec.t1));
        auto integrand = [&](double z) {
            return testing::phi(z) * price_given_declared_value(in, firm_value_step(f, f.V0, in.spec.t1, z));
        };
        const double ref = testing::boost_integrate(integrand, -12.0, z_star, 1e-13) +
                           testing::boost_integrate(integrand, z_star, 12.0, 1e-13);
        EXPECT_NEAR(price_full(in).price, ref, 1e-9);
    }
}

TEST(PriceFull, ContinuousAtFirstAnnouncement) {
    for (double V1 : {60.0, 75.0, 100.0, 140.0}) {
        auto before = benchmark_inputs();
        before.t = before.spec.t1 - 1e-10;
        const double left = price_given_declared_value(before, V1);
        const double right = price_full(at_t1(benchmark_inputs(), V1)).price;
        if (V1 > before.spec.K1) {
            EXPECT_NEAR(left, right, 1e-9) << V1;
        } else {
            EXPECT_NEAR(left, Z(before) * before.spec.R_e, 1e-9) << V1;
        }
    }
}

TEST(PriceFull, PostAnnouncementRouting) {
    auto in = at_t1(benchmark_inputs(), 100.0);
    in.t = 0.75;
    const auto res = price_full(in);
    EXPECT_EQ(res.regime, Regime::AfterFirstAnnouncement);
    EXPECT_EQ(res.price, price_last_interval(in, 100.0));
    in.V1.reset();
    EXPECT_THROW(price_full(in), DomainError);
}

TEST(PriceFull, ReducedFormLimit) {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 20; ++i) {
        auto in = random_inputs(rng);
        in.spec.K1 = in.spec.K2 = 0.0;
        const auto& f = in.firm;
        const auto& s = in.spec;
        const double e0 = std::exp(-s.intensity(f.V0) * (s.t1 - in.t));
        // V1 is declared at t1 with V0 known at time 0.
        const double tail = testing::boost_integrate(
            [&](double z) { return testing::phi(z) * std::exp(-s.gap() * s.intensity(firm_value_step(f, f.V0, s.t1, z))); },
            -12.0, 12.0, 1e-14);
        const double ref = Z(in) * (s.R_u + (1 - s.R_u) * e0 * tail);
        EXPECT_NEAR(price_full(in).price / ref, 1.0, 1e-8);
    }
}

TEST(PriceFull, Bounds) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        const auto in = random_inputs(rng);
        const double z = Z(in);
        const double p = price_full(in).price;
        EXPECT_GE(p, std::min(in.spec.R_u, in.spec.R_e) * z - 1e-12);
        EXPECT_LE(p, z + 1e-12);
    }
}

template <class Setter>
double price_delta(const PricingInputs& base, Setter set, double h) {
    PricingInputs up = base;
    set(up, h);
    return price_full(up).price - price_full(base).price;
}

TEST(PriceFull, MonotoneInRecoveriesAndTerminalBarrier) {
    std::mt19937_64 rng(37);
    for (int i = 0; i < 60; ++i) {
        auto in = random_inputs(rng);
        in.spec.R_u = std::min(in.spec.R_u, 0.99);
        in.spec.R_e = std::min(in.spec.R_e, 0.99);
        EXPECT_GE(price_delta(in, [](auto& p, double h) { p.spec.R_u += h; }, 1e-3), -1e-9);
        EXPECT_GE(price_delta(in, [](auto& p, double h) { p.spec.R_e += h; }, 1e-3), -1e-9);
        EXPECT_LE(price_delta(in, [](auto& p, double h) { p.spec.K2 += h; }, 1e-3), 1e-9);
    }
}

TEST(PriceFull, NonincreasingInFirstBarrierWhenUnexpectedRecoveryDominates) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 60; ++i) {
        auto in = random_inputs(rng);
        if (in.spec.R_u < in.spec.R_e) std::swap(in.spec.R_u, in.spec.R_e);
        EXPECT_LE(price_delta(in, [](auto& p, double h) { p.spec.K1 += h; }, 1e-3), 1e-9);
    }
}

TEST(PriceFull, NondecreasingInFirmValueWithoutIntensityFeedback) {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 40; ++i) {
        auto in = random_inputs(rng);
        in.spec.intensity = IntensityFunction::constant(0.0);
        EXPECT_GE(price_delta(in, [](auto& p, double h) { p.firm.V0 += h; }, 1e-3), -1e-9);
        // No barriers and a decreasing intensity: only the jump risk moves.
        in = random_inputs(rng);
        in.spec.K1 = in.spec.K2 = 0.0;
        in.spec.intensity = IntensityFunction::log_reciprocal();
        EXPECT_GE(price_delta(in, [](auto& p, double h) { p.firm.V0 += h; }, 1e-3), -1e-9);
    }
}

// Raising K1 moves paths from survival into the first-date default. When a
// barrier default pays more than survival is worth (R_e = 1, R_u = 0, heavy
// jump risk after t1), the price rises with K1.
TEST(PriceFull, FirstBarrierCounterexampleConfirmedBySimulation) {
    auto in = benchmark_inputs();
    in.spec.R_u = 0.0;
    in.spec.R_e = 1.0;
    in.spec.intensity = IntensityFunction::constant(2.0);
    auto high = in;
    high.spec.K1 = 110.0;
    const double lo_cf = price_full(in).price, hi_cf = price_full(high).price;
    EXPECT_GT(hi_cf - lo_cf, 0.05);
    McConfig cfg;
    cfg.n_paths = 200'000;
    const auto lo_mc = simulate_price(in, cfg), hi_mc = simulate_price(high, cfg);
    EXPECT_GT(hi_mc.price - lo_mc.price, 10 * std::hypot(hi_mc.std_error, lo_mc.std_error));
    EXPECT_LT(std::abs(z_score(lo_cf, lo_mc)), 3.0);
    EXPECT_LT(std::abs(z_score(hi_cf, hi_mc)), 3.0);
}

// Raising V0 lowers lambda(V0). If unexpected default pays par (R_u = 1) and
// a terminal breach pays nothing, less jump risk means a lower price.
TEST(PriceFull, FirmValueCounterexampleConfirmedBySimulation) {
    auto in = benchmark_inputs();
    in.firm.V0 = 0.5;
    in.spec.R_u = 1.0;
    in.spec.R_e = 0.0;
    in.spec.K1 = 0.0;
    in.spec.K2 = 1000.0;
    auto high = in;
    high.firm.V0 = 2.0;
    const double lo_cf = price_full(in).price, hi_cf = price_full(high).price;
    EXPECT_LT(hi_cf - lo_cf, -0.05);
    McConfig cfg;
    cfg.n_paths = 200'000;
    const auto lo_mc = simulate_price(in, cfg), hi_mc = simulate_price(high, cfg);
    EXPECT_LT(hi_mc.price - lo_mc.price, -10 * std::hypot(hi_mc.std_error, lo_mc.std_error));
    EXPECT_LT(std::abs(z_score(lo_cf, lo_mc)), 3.0);
    EXPECT_LT(std::abs(z_score(hi_cf, hi_mc)), 3.0);
}

TEST(CreditSpread, Examples) {
    auto in = benchmark_inputs();
    in.spec.R_u = in.spec.R_e = 1.0;
    EXPECT_NEAR(credit_spread(in), 0.0, 1e-14);
    PriceResult r;
    r.zcb = 0.9;
    r.price = 0.9 * std::exp(-0.01 * 0.8);
    EXPECT_NEAR(credit_spread(r, 0.2, 1.0), 0.01, 1e-15);
}

TEST(CreditSpread, DecreasingInFirmValueOnBenchmark) {
    auto in = benchmark_inputs();
    double prev = kInf;
    for (double V0 : {80.0, 100.0, 120.0, 150.0}) {
        in.firm.V0 = V0;
        const double s = credit_spread(in);
        EXPECT_GT(s, 0.0);
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(PricingModes, ParseAndPrint) {
    EXPECT_EQ(parse_pricing_mode("corrected"), PricingMode::Corrected);
    EXPECT_EQ(parse_pricing_mode("paper-literal"), PricingMode::PaperLiteral);
    EXPECT_FALSE(parse_pricing_mode("literal"));
    EXPECT_EQ(to_string(PricingMode::PaperLiteral), "paper-literal");
}

TEST(PricingInputs, Validation) {
    auto in = benchmark_inputs();
    in.t = 1.0;
    EXPECT_THROW(in.validate(), DomainError);
    in = benchmark_inputs();
    in.rate_model = ShortRateModel::vasicek(0.01, 0.2, 0.01, 2.0);
    EXPECT_THROW(in.validate(), DomainError);
}

TEST(PriceFull, QuadratureFailureReportsPartialTerms) {
    QuadratureSpec tight;
    tight.abs_tol = 1e-300;
    tight.max_nodes = 32;
    try {
        price_full(benchmark_inputs(), PricingMode::Corrected, tight);
        FAIL() << "expected PricingConvergenceError";
    } catch (const PricingConvergenceError& e) {
        EXPECT_GT(e.partial_terms().I21, 0.0);
        EXPECT_GT(e.partial_terms().expected_default, 0.0);
    }
}

}  // namespace
}  // namespace dvb
