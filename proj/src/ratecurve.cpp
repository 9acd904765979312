#include "dvb/ratecurve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "dvb/errors.hpp"

namespace dvb {

namespace {

// Below this x = a2 * length the exponential kernels switch to their Taylor
// series; above it the closed forms lose at most ~2 digits to cancellation.
constexpr double kSeriesThreshold = 0.5;
constexpr int kSeriesTerms = 28;

// q(x) = (1 - e^-x) / x
double kernel_q(double x) {
    if (x >= kSeriesThreshold) return -std::expm1(-x) / x;
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < kSeriesTerms; ++k) {
        sum += term;
        term *= -x / static_cast<double>(k + 2);
    }
    return sum;
}

// p1(x) = (x - (1 - e^-x)) / x^2 = sum (-x)^k / (k+2)!
double kernel_p1(double x) {
    if (x >= kSeriesThreshold) return (1.0 - kernel_q(x)) / x;
    double term = 0.5, sum = 0.0;
    for (int k = 0; k < kSeriesTerms; ++k) {
        sum += term;
        term *= -x / static_cast<double>(k + 3);
    }
    return sum;
}

// p2(x) = (1 - 2 q(x) + q(2x)) / x^2 = sum_{k>=3} (-1)^{k+1} (2^{k-1} - 2) x^{k-3} / k!
double kernel_p2(double x) {
    if (x >= kSeriesThreshold) return (1.0 - 2.0 * kernel_q(x) + kernel_q(2.0 * x)) / (x * x);
    double sum = 0.0, power = 1.0, factorial = 6.0, pow2 = 4.0;
    for (int k = 3; k < 3 + kSeriesTerms; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        sum += sign * (pow2 - 2.0) * power / factorial;
        power *= x;
        factorial *= static_cast<double>(k + 1);
        pow2 *= 2.0;
    }
    return sum;
}

// p3(x) = (q(x) - q(2x)) / x = sum_{k>=1} (-1)^{k+1} (2^k - 1) x^{k-1} / (k+1)!
double kernel_p3(double x) {
    if (x >= kSeriesThreshold) return (kernel_q(x) - kernel_q(2.0 * x)) / x;
    double sum = 0.0, power = 1.0, factorial = 2.0, pow2 = 2.0;
    for (int k = 1; k < 1 + kSeriesTerms; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        sum += sign * (pow2 - 1.0) * power / factorial;
        power *= x;
        factorial *= static_cast<double>(k + 2);
        pow2 *= 2.0;
    }
    return sum;
}

void check_breaks(const std::vector<double>& breaks, const std::vector<double>& values) {
    if (values.size() != breaks.size() + 1) {
        throw DomainError(fmt::format("piecewise-constant function needs {} values for {} breaks, got {}",
                                      breaks.size() + 1, breaks.size(), values.size()));
    }
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (!std::isfinite(breaks[i])) throw DomainError("breakpoints must be finite");
        if (i > 0 && !(breaks[i] > breaks[i - 1])) {
            throw DomainError("breakpoints must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("piecewise-constant values must be finite");
    }
}

void check_time(const ShortRateModel& model, double t) {
    if (!(t >= 0.0 && t <= model.maturity())) {
        throw DomainError(fmt::format("time {} outside [0, {}]", t, model.maturity()));
    }
}

}  // namespace

PiecewiseConstant::PiecewiseConstant(double value) : values_{value} {
    check_breaks(breaks_, values_);
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    check_breaks(breaks_, values_);
}

double PiecewiseConstant::operator()(double t) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

ShortRateModel::ShortRateModel(PiecewiseConstant a1, PiecewiseConstant a2, PiecewiseConstant s_r,
                               double maturity)
    : a1_(std::move(a1)), a2_(std::move(a2)), s_r_(std::move(s_r)), maturity_(maturity) {
    if (!(maturity_ > 0.0) || !std::isfinite(maturity_)) {
        throw DomainError("short rate model maturity must be positive and finite");
    }
    for (const PiecewiseConstant* f : {&a1_, &a2_, &s_r_}) {
        for (double b : f->breaks()) {
            if (b < 0.0 || b > maturity_) {
                throw DomainError(fmt::format("breakpoint {} outside [0, {}]", b, maturity_));
            }
            if (b > 0.0 && b < maturity_) breakpoints_.push_back(b);
        }
    }
    for (double v : a2_.values()) {
        if (!(v > 0.0)) throw DomainError("mean reversion a2 must be positive");
    }
    for (double v : s_r_.values()) {
        if (!(v >= 0.0)) throw DomainError("rate volatility s_r must be nonnegative");
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

ShortRateModel ShortRateModel::vasicek(double a1, double a2, double s_r, double maturity) {
    return ShortRateModel(a1, a2, s_r, maturity);
}

ZcbCoefficients zcb_coefficients(const ShortRateModel& model, double t, AIntegrand integrand) {
    check_time(model, t);
    ZcbCoefficients c;
    double hi = model.maturity();
    const auto bps = model.breakpoints();
    auto it = std::upper_bound(bps.begin(), bps.end(), t);
    std::size_t idx = static_cast<std::size_t>(bps.end() - bps.begin());
    const std::size_t first_after_t = static_cast<std::size_t>(it - bps.begin());

    // Walk segments from T back to t.
    while (hi > t) {
        const double lo = (idx > first_after_t) ? bps[idx - 1] : t;
        const double mid = 0.5 * (lo + hi);
        const double a2 = model.a2()(mid);
        const double drift = (integrand == AIntegrand::Standard) ? model.a1()(mid) : a2;
        const double vol = model.s_r()(mid);
        const double len = hi - lo;
        const double x = a2 * len;

        const double int_b = c.B * len * kernel_q(x) + len * len * kernel_p1(x);
        const double int_b2 = c.B * c.B * len * kernel_q(2.0 * x) +
                              2.0 * c.B * len * len * kernel_p3(x) + len * len * len * kernel_p2(x);
        c.A -= drift * int_b - 0.5 * vol * vol * int_b2;
        c.B = c.B * std::exp(-x) + len * kernel_q(x);

        hi = lo;
        if (idx > first_after_t) --idx;
    }
    return c;
}

double coeff_B(const ShortRateModel& model, double t) { return zcb_coefficients(model, t).B; }

double coeff_A(const ShortRateModel& model, double t, AIntegrand integrand) {
    return zcb_coefficients(model, t, integrand).A;
}

double zcb_price(const ShortRateModel& model, double r, double t, AIntegrand integrand) {
    const ZcbCoefficients c = zcb_coefficients(model, t, integrand);
    return std::exp(c.A - c.B * r);
}

}  // namespace dvb
