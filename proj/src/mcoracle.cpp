#include "dvb/mcoracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "dvb/philox.hpp"

namespace dvb {

namespace {

enum Leg : int { kSurviveBoth, kUnexpected1, kUnexpected2, kExpected1, kExpected2, kLegCount };

// Welford accumulator; merge() is Chan's pairwise update.
struct Moments {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(other.n);
        const double total = na + nb;
        const double delta = other.mean - mean;
        mean += delta * nb / total;
        m2 += other.m2 + delta * delta * na * nb / total;
        n += other.n;
    }

    double std_error() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        return std::sqrt(std::max(m2, 0.0) / (nn - 1.0) / nn);
    }
};

struct ChunkStats {
    Moments price;
    std::array<Moments, kLegCount> legs;

    void merge(const ChunkStats& other) {
        price.merge(other.price);
        for (int i = 0; i < kLegCount; ++i) legs[static_cast<std::size_t>(i)].merge(other.legs[static_cast<std::size_t>(i)]);
    }
};

struct Step {
    double start;
    double dt;
    double sqrt_dt;
    double a1;
    double a2;
    double vol;
};

// Euler grid on [start, end] with the given dates as forced nodes.
struct RateGrid {
    std::vector<double> nodes;
    std::vector<Step> steps;

    RateGrid(const ShortRateModel& model, double start, double end, std::vector<double> forced,
             int steps_per_year) {
        for (double b : model.breakpoints()) forced.push_back(b);
        forced.push_back(start);
        forced.push_back(end);
        std::erase_if(forced, [&](double x) { return x < start || x > end; });
        std::sort(forced.begin(), forced.end());
        forced.erase(std::unique(forced.begin(), forced.end()), forced.end());

        nodes.push_back(forced.front());
        for (std::size_t i = 1; i < forced.size(); ++i) {
            const double lo = forced[i - 1];
            const double hi = forced[i];
            const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) * steps_per_year - 1e-9)));
            for (int k = 1; k <= n; ++k) nodes.push_back(k == n ? hi : lo + (hi - lo) * k / n);
        }
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            const double s = nodes[k];
            const double dt = nodes[k + 1] - s;
            steps.push_back({s, dt, std::sqrt(dt), model.a1()(s), model.a2()(s), model.s_r()(s)});
        }
    }

    std::size_t node_index(double time) const {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), time);
        return static_cast<std::size_t>(it - nodes.begin());
    }
};

// One simulated short-rate path with its running integral.
struct RatePath {
    std::vector<double> r;
    std::vector<double> integral;

    void simulate(const RateGrid& grid, double r0, const double* normals, double sign) {
        const std::size_t n = grid.steps.size();
        r.resize(n + 1);
        integral.resize(n + 1);
        r[0] = r0;
        integral[0] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const Step& s = grid.steps[k];
            r[k + 1] = r[k] + (s.a1 - s.a2 * r[k]) * s.dt + s.vol * s.sqrt_dt * sign * normals[k];
            integral[k + 1] = integral[k] + 0.5 * (r[k] + r[k + 1]) * s.dt;
        }
    }

    // Short rate and accumulated integral at an arbitrary time, linear between nodes.
    std::pair<double, double> at(const RateGrid& grid, double time) const {
        auto it = std::upper_bound(grid.nodes.begin(), grid.nodes.end(), time);
        std::size_t k = static_cast<std::size_t>(it - grid.nodes.begin());
        k = std::clamp<std::size_t>(k, 1, grid.steps.size()) - 1;
        const Step& s = grid.steps[k];
        const double h = std::clamp(time - s.start, 0.0, s.dt);
        const double r_at = r[k] + (r[k + 1] - r[k]) * (h / s.dt);
        return {r_at, integral[k] + 0.5 * (r[k] + r_at) * h};
    }
};

template <typename ChunkFn>
ChunkStats run_chunks(std::uint64_t units, std::uint64_t units_per_chunk, unsigned threads,
                      ChunkFn&& chunk_fn) {
    const std::uint64_t n_chunks = (units + units_per_chunk - 1) / units_per_chunk;
    std::vector<ChunkStats> results(n_chunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        try {
            for (std::uint64_t c = next++; c < n_chunks; c = next++) {
                const std::uint64_t begin = c * units_per_chunk;
                const std::uint64_t end = std::min(units, begin + units_per_chunk);
                results[c] = chunk_fn(c, end - begin);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_chunks;
        }
    };

    unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(n_chunks, 1)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    ChunkStats total;
    for (const ChunkStats& s : results) total.merge(s);
    return total;
}

McEstimate to_estimate(const ChunkStats& stats, std::uint64_t paths, std::uint64_t seed) {
    McEstimate est;
    est.price = stats.price.mean;
    est.std_error = stats.price.std_error();
    est.n_paths = paths;
    est.seed = seed;
    auto fill = [&](LegBreakdown& out, auto get) {
        out.survive_both = get(stats.legs[kSurviveBoth]);
        out.unexpected_leg1 = get(stats.legs[kUnexpected1]);
        out.unexpected_leg2 = get(stats.legs[kUnexpected2]);
        out.expected_t1 = get(stats.legs[kExpected1]);
        out.expected_t2 = get(stats.legs[kExpected2]);
    };
    fill(est.leg_breakdown, [](const Moments& m) { return m.mean; });
    fill(est.leg_std_error, [](const Moments& m) { return m.std_error(); });
    return est;
}

// Firm and jump draws come from their own stream at a fixed four draws per
// path, so changing the rate grid leaves them untouched (common random numbers
// for step-size comparisons).
struct Draws {
    std::vector<double> rate;
    double z1 = 0.0;
    double z2 = 0.0;
    double u1 = 0.5;
    double u2 = 0.5;

    void fill(Philox4x32& firm_rng, Philox4x32& rate_rng) {
        z1 = firm_rng.normal();
        z2 = firm_rng.normal();
        u1 = firm_rng.uniform();
        u2 = firm_rng.uniform();
        for (double& z : rate) z = rate_rng.normal();
    }
};

struct Outcome {
    double payoff = 0.0;
    Leg leg = kSurviveBoth;
};

class BondPathSimulator {
   public:
    BondPathSimulator(const PricingInputs& inputs, int steps_per_year)
        : in_(inputs),
          post_(inputs.t >= inputs.spec.t1),
          grid_(inputs.rate_model, inputs.t, inputs.spec.t2, {inputs.spec.t1}, steps_per_year),
          t1_node_(grid_.node_index(inputs.spec.t1)),
          lambda0_(post_ ? 0.0 : inputs.spec.intensity(inputs.firm.V0)),
          p_jump1_(post_ ? 0.0 : -std::expm1(-lambda0_ * (inputs.spec.t1 - inputs.t))) {}

    std::size_t rate_draws() const { return grid_.steps.size(); }

    Outcome run(const Draws& d, bool mirror, RatePath& path) const {
        const double sign = mirror ? -1.0 : 1.0;
        const auto& spec = in_.spec;
        const auto& firm = in_.firm;
        path.simulate(grid_, in_.r, d.rate.data(), sign);
        const double u1 = mirror ? 1.0 - d.u1 : d.u1;
        const double u2 = mirror ? 1.0 - d.u2 : d.u2;

        double V1 = 0.0;
        if (post_) {
            V1 = *in_.V1;
        } else {
            V1 = firm_value_step(firm, firm.V0, spec.t1, sign * d.z1);
            const bool breach1 = V1 <= spec.K1;
            if (u1 < p_jump1_) {
                const double tau = std::min(in_.t - std::log1p(-u1) / lambda0_, spec.t1);
                return {unexpected_payoff(path, tau), breach1 ? kExpected1 : kUnexpected1};
            }
            if (breach1) {
                const double r_t1 = path.r[t1_node_];
                const double df = std::exp(-path.integral[t1_node_]);
                return {spec.R_e * zcb_price(in_.rate_model, r_t1, spec.t1, in_.a_integrand) * df, kExpected1};
            }
        }

        const double start = std::max(in_.t, spec.t1);
        const double lambda1 = spec.intensity(V1);
        const double p_jump2 = -std::expm1(-lambda1 * (spec.t2 - start));
        if (u2 < p_jump2) {
            const double tau = std::min(start - std::log1p(-u2) / lambda1, spec.t2);
            return {unexpected_payoff(path, tau), kUnexpected2};
        }
        const double V2 = firm_value_step(firm, V1, spec.gap(), sign * d.z2);
        const double df = std::exp(-path.integral.back());
        if (V2 <= spec.K2) return {spec.R_e * df, kExpected2};
        return {df, kSurviveBoth};
    }

   private:
    double unexpected_payoff(const RatePath& path, double tau) const {
        const auto [r_tau, integral] = path.at(grid_, tau);
        return in_.spec.R_u * zcb_price(in_.rate_model, r_tau, tau, in_.a_integrand) * std::exp(-integral);
    }

    const PricingInputs& in_;
    bool post_;
    RateGrid grid_;
    std::size_t t1_node_;
    double lambda0_;
    double p_jump1_;
};

std::uint64_t units_for(const McConfig& cfg) {
    return cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
}

}  // namespace

void McConfig::validate() const {
    if (n_paths < 1) throw DomainError("n_paths must be at least 1");
    if (rate_steps_per_year < 1) throw DomainError("rate_steps_per_year must be at least 1");
}

McEstimate simulate_price(const PricingInputs& inputs, const McConfig& cfg) {
    inputs.validate();
    cfg.validate();
    const BondPathSimulator sim(inputs, cfg.rate_steps_per_year);
    const std::uint64_t units = units_for(cfg);
    const std::uint64_t per_chunk = cfg.antithetic ? kChunkPaths / 2 : kChunkPaths;

    const ChunkStats stats = run_chunks(units, per_chunk, cfg.threads, [&](std::uint64_t chunk, std::uint64_t count) {
        Philox4x32 firm_rng(cfg.seed, 2 * chunk);
        Philox4x32 rate_rng(cfg.seed, 2 * chunk + 1);
        Draws draws;
        draws.rate.resize(sim.rate_draws());
        RatePath path;
        ChunkStats s;
        std::array<double, kLegCount> legs{};
        for (std::uint64_t i = 0; i < count; ++i) {
            draws.fill(firm_rng, rate_rng);
            legs.fill(0.0);
            const Outcome a = sim.run(draws, false, path);
            double value = a.payoff;
            legs[a.leg] += a.payoff;
            if (cfg.antithetic) {
                const Outcome b = sim.run(draws, true, path);
                value = 0.5 * (a.payoff + b.payoff);
                legs[a.leg] *= 0.5;
                legs[b.leg] += 0.5 * b.payoff;
            }
            s.price.add(value);
            for (std::size_t k = 0; k < legs.size(); ++k) s.legs[k].add(legs[k]);
        }
        return s;
    });
    return to_estimate(stats, cfg.antithetic ? 2 * units : units, cfg.seed);
}

McEstimate leg_decompose(const PricingInputs& inputs, const McConfig& cfg) {
    return simulate_price(inputs, cfg);
}

McEstimate simulate_discount_factor(const ShortRateModel& model, double r, double t, const McConfig& cfg) {
    cfg.validate();
    if (!(t >= 0.0 && t < model.maturity())) {
        throw DomainError(fmt::format("simulate_discount_factor needs 0 <= t < T, got {}", t));
    }
    const RateGrid grid(model, t, model.maturity(), {}, cfg.rate_steps_per_year);
    const std::uint64_t units = units_for(cfg);
    const std::uint64_t per_chunk = cfg.antithetic ? kChunkPaths / 2 : kChunkPaths;

    const ChunkStats stats = run_chunks(units, per_chunk, cfg.threads, [&](std::uint64_t chunk, std::uint64_t count) {
        Philox4x32 rng(cfg.seed, chunk);
        std::vector<double> normals(grid.steps.size());
        RatePath path;
        ChunkStats s;
        for (std::uint64_t i = 0; i < count; ++i) {
            for (double& z : normals) z = rng.normal();
            path.simulate(grid, r, normals.data(), 1.0);
            double value = std::exp(-path.integral.back());
            if (cfg.antithetic) {
                path.simulate(grid, r, normals.data(), -1.0);
                value = 0.5 * (value + std::exp(-path.integral.back()));
            }
            s.price.add(value);
            s.legs[kSurviveBoth].add(value);
        }
        return s;
    });
    return to_estimate(stats, cfg.antithetic ? 2 * units : units, cfg.seed);
}

double z_score(double closed_form, double mc_mean, double mc_std_error) {
    const double diff = closed_form - mc_mean;
    if (mc_std_error > 0.0) return diff / mc_std_error;
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? kInf : -kInf;
}

double z_score(double closed_form, const McEstimate& mc) {
    return z_score(closed_form, mc.price, mc.std_error);
}

}  // namespace dvb
