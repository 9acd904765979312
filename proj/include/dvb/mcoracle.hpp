#pragma once

#include <cstdint>

#include "dvb/pricer.hpp"

namespace dvb {

/// Paths per RNG chunk. Each chunk draws from its own Philox streams (one for
/// firm and jump draws, one for rate normals) and chunk results are merged in
/// index order, so results do not depend on threads.
inline constexpr std::uint64_t kChunkPaths = std::uint64_t{1} << 16;

struct McConfig {
    std::uint64_t n_paths = 1'000'000;
    int rate_steps_per_year = 64;  ///< Euler steps per year for the short rate
    std::uint64_t seed = 20130215;
    bool antithetic = false;
    unsigned threads = 0;  ///< 0 = std::thread::hardware_concurrency()

    void validate() const;
};

/// Mean discounted payoff by settlement event. Every path lands in exactly one:
///  - expected_t1: V1 <= K1 (includes unexpected default before t1 on that event)
///  - unexpected_leg1: V1 > K1, unexpected default in [t, t1)
///  - unexpected_leg2: unexpected default in [t1, t2)
///  - expected_t2: barrier breach at t2
///  - survive_both: par paid at t2
struct LegBreakdown {
    double survive_both = 0.0;
    double unexpected_leg1 = 0.0;
    double unexpected_leg2 = 0.0;
    double expected_t1 = 0.0;
    double expected_t2 = 0.0;

    double sum() const {
        return survive_both + unexpected_leg1 + unexpected_leg2 + expected_t1 + expected_t2;
    }

    friend bool operator==(const LegBreakdown&, const LegBreakdown&) = default;
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;  ///< paths actually simulated (rounded up to even with antithetics)
    std::uint64_t seed = 0;
    LegBreakdown leg_breakdown;
    LegBreakdown leg_std_error;

    friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

/// Joint simulation of short rate (Euler), declared firm values (exact
/// lognormal), unexpected-default jumps (exponential times at the segment's
/// constant intensity), and barrier checks at t1 and t2.
McEstimate simulate_price(const PricingInputs& inputs, const McConfig& cfg);

/// Same simulation; the per-leg means and standard errors are the point.
McEstimate leg_decompose(const PricingInputs& inputs, const McConfig& cfg);

/// E[exp(-int_t^T r du)] under Euler paths; the default-free bond oracle.
McEstimate simulate_discount_factor(const ShortRateModel& model, double r, double t,
                                    const McConfig& cfg);

/// (closed_form - mc.price) / mc.std_error; 0 when both agree exactly.
double z_score(double closed_form, const McEstimate& mc);
double z_score(double closed_form, double mc_mean, double mc_std_error);

}  // namespace dvb
