#include "dvb/mathkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include <fmt/core.h>

#include "dvb/errors.hpp"

namespace dvb {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss weights
// belong to the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lower;
    double upper;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_15(const Integrand& f, double lower, double upper) {
    const double centre = 0.5 * (lower + upper);
    const double half = 0.5 * (upper - lower);
    const double fc = f(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += kWgk[static_cast<std::size_t>(j)] * sum;
        if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * sum;
    }
    return {lower, upper, kronrod * half, std::abs((kronrod - gauss) * half)};
}

double clip_gaussian_bound(double x) {
    return std::clamp(x, -kGaussianTruncation, kGaussianTruncation);
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double a) {
    if (std::isnan(a)) throw DomainError("normal_cdf: NaN argument");
    return 0.5 * std::erfc(-a / std::numbers::sqrt2);
}

void QuadFormMatrix::validate() const {
    if (!std::isfinite(m11) || !std::isfinite(m12) || !std::isfinite(m22)) {
        throw DomainError("quadratic form entries must be finite");
    }
    if (!(m11 > 0.0) || !(det() > 0.0)) {
        throw DomainError(fmt::format("quadratic form [[{}, {}], [{}, {}]] is not positive definite",
                                      m11, m12, m12, m22));
    }
}

QuadFormMatrix announcement_form(double t1, double t2, Coupling coupling) {
    if (!(t1 > 0.0 && t2 > t1)) {
        throw DomainError(fmt::format("announcement dates need 0 < t1 < t2, got {} and {}", t1, t2));
    }
    const double gap = t2 - t1;
    const double off = std::sqrt(t1 / gap);
    return {t2 / gap, coupling == Coupling::Positive ? off : -off, 1.0};
}

double bivariate_cdf_quadform(double a, double b, const QuadFormMatrix& m, double abs_tol) {
    m.validate();
    if (std::isnan(a) || std::isnan(b)) throw DomainError("bivariate_cdf_quadform: NaN argument");
    if (a == -kInf || b == -kInf) return 0.0;
    const double det = m.det();
    const double root_m22 = std::sqrt(m.m22);
    const double root_det = std::sqrt(det);
    const double shift = root_m22 * b;
    const double slope = m.m12 / root_det;
    const double upper = a * std::sqrt(det / m.m22);

    QuadratureSpec spec;
    spec.abs_tol = abs_tol;
    const double value = integrate_left_tail(
        [shift, slope](double s) { return normal_cdf(shift + slope * s); }, upper, spec);
    return std::clamp(value, 0.0, 1.0);
}

double bivariate_cdf_quadform_2d(double a, double b, const QuadFormMatrix& m, double abs_tol) {
    m.validate();
    if (a == -kInf || b == -kInf) return 0.0;
    const double det = m.det();
    const double sd_x = std::sqrt(m.m22 / det);
    const double sd_y = std::sqrt(m.m11 / det);
    const double x_lo = -kGaussianTruncation * sd_x;
    const double x_hi = std::min(a, kGaussianTruncation * sd_x);
    const double y_lo = -kGaussianTruncation * sd_y;
    const double y_hi = std::min(b, kGaussianTruncation * sd_y);
    if (x_hi <= x_lo || y_hi <= y_lo) return 0.0;

    const double norm = std::sqrt(det) / (2.0 * std::numbers::pi);
    const double inner_tol = abs_tol / (x_hi - x_lo);
    auto inner = [&](double x) {
        auto kernel = [&](double y) {
            return norm * std::exp(-0.5 * (m.m11 * x * x + 2.0 * m.m12 * x * y + m.m22 * y * y));
        };
        return integrate(kernel, y_lo, y_hi, inner_tol, 200000, 8).value;
    };
    return integrate(inner, x_lo, x_hi, abs_tol, 200000, 8).value;
}

QuadratureResult integrate(const Integrand& f, double lower, double upper, double abs_tol,
                           int max_evaluations, int initial_panels) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) {
        throw DomainError("integrate: bounds must be finite");
    }
    if (!(abs_tol > 0.0)) throw DomainError("integrate: abs_tol must be positive");
    if (upper == lower) return {};
    const double sign = upper > lower ? 1.0 : -1.0;
    if (sign < 0.0) std::swap(lower, upper);

    std::priority_queue<Panel> panels;
    int evaluations = 0;
    const int n0 = std::max(1, initial_panels);
    const double width = (upper - lower) / n0;
    for (int i = 0; i < n0; ++i) {
        const double lo = lower + width * i;
        const double hi = (i + 1 == n0) ? upper : lo + width;
        panels.push(gauss_kronrod_15(f, lo, hi));
        evaluations += 15;
    }

    auto totals = [&panels]() {
        auto copy = panels;
        double value = 0.0, error = 0.0;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
        return std::pair{value, error};
    };

    double value = 0.0, error = 0.0;
    double running_error = 0.0;
    {
        auto [v, e] = totals();
        value = v;
        error = e;
        running_error = e;
    }
    while (running_error > abs_tol) {
        if (evaluations + 30 > max_evaluations) {
            auto [v, e] = totals();
            throw ConvergenceError(
                fmt::format("quadrature did not converge within {} evaluations (error {:.3e} > {:.3e})",
                            max_evaluations, e, abs_tol),
                sign * v, e);
        }
        const Panel worst = panels.top();
        const double mid = 0.5 * (worst.lower + worst.upper);
        if (!(mid > worst.lower && mid < worst.upper)) {
            auto [v, e] = totals();
            throw ConvergenceError("quadrature panel reached floating-point resolution", sign * v, e);
        }
        panels.pop();
        const Panel left = gauss_kronrod_15(f, worst.lower, mid);
        const Panel right = gauss_kronrod_15(f, mid, worst.upper);
        evaluations += 30;
        panels.push(left);
        panels.push(right);
        running_error += left.error + right.error - worst.error;
        if (running_error <= abs_tol) {
            // Re-sum to shed accumulated rounding in the running total.
            auto [v, e] = totals();
            running_error = e;
        }
    }
    std::tie(value, error) = totals();
    return {sign * value, error, evaluations};
}

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0)) throw DomainError("quadrature abs_tol must be positive");
    if (max_nodes < 32) throw DomainError("quadrature max_nodes must be at least 32");
    if (std::isnan(lower) || std::isnan(upper)) throw DomainError("quadrature bounds must not be NaN");
}

QuadratureResult integrate_gaussian(const Integrand& f, const QuadratureSpec& spec) {
    spec.validate();
    const double lo = clip_gaussian_bound(spec.lower);
    const double hi = clip_gaussian_bound(spec.upper);
    if (hi <= lo) return {};
    // One panel per two standard deviations so the initial sweep sees the bulk.
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / 2.0)));
    return integrate([&f](double x) { return f(x) * normal_pdf(x); }, lo, hi, spec.abs_tol,
                     spec.max_nodes, panels);
}

double integrate_left_tail(const Integrand& f, double upper, const QuadratureSpec& spec) {
    QuadratureSpec s = spec;
    s.lower = -kInf;
    s.upper = upper;
    return integrate_gaussian(f, s).value;
}

}  // namespace dvb
