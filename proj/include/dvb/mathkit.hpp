#pragma once

#include <functional>
#include <limits>

namespace dvb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function N(a). Accepts +-inf; NaN throws DomainError.
double normal_cdf(double a);

/// Symmetric 2x2 inverse-scale matrix of the quadratic form
/// xi' M xi = m11 x^2 + 2 m12 x y + m22 y^2.
struct QuadFormMatrix {
    double m11 = 1.0;
    double m12 = 0.0;
    double m22 = 1.0;

    double det() const { return m11 * m22 - m12 * m12; }

    /// Throws DomainError unless M is symmetric positive definite.
    void validate() const;
};

enum class Coupling { Positive, Negative };

/// The form pairing two announcement dates t1 < t2:
/// [[t2/(t2-t1), +-sqrt(t1/(t2-t1))], [+-sqrt(t1/(t2-t1)), 1]], determinant 1.
/// Positive coupling is the matrix A, Negative is A-tilde.
QuadFormMatrix announcement_form(double t1, double t2, Coupling coupling);

/// N2(a, b : M) = sqrt(det M) / (2 pi) * int_{-inf}^a int_{-inf}^b exp(-xi' M xi / 2) dy dx.
///
/// Completing the square in y reduces the double integral to
/// int_{-inf}^{a sqrt(det/m22)} phi(s) N(sqrt(m22) b + m12 s / sqrt(det)) ds,
/// evaluated by adaptive quadrature to `abs_tol`.
double bivariate_cdf_quadform(double a, double b, const QuadFormMatrix& m, double abs_tol = 1e-12);

/// Brute-force nested 2-D quadrature of the raw Gaussian kernel. Slow; used as an
/// independent cross-check of bivariate_cdf_quadform.
double bivariate_cdf_quadform_2d(double a, double b, const QuadFormMatrix& m,
                                 double abs_tol = 1e-11);

/// Integrands must be free of side effects; they may be called concurrently.
using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite [lower, upper].
/// Bisects the panel with the largest error estimate until the summed estimate
/// falls below abs_tol; throws ConvergenceError past max_evaluations.
QuadratureResult integrate(const Integrand& f, double lower, double upper, double abs_tol,
                           int max_evaluations, int initial_panels = 1);

/// Semi-infinite bounds are truncated at this many standard deviations.
inline constexpr double kGaussianTruncation = 12.0;

struct QuadratureSpec {
    double lower = -kInf;
    double upper = kInf;
    double abs_tol = 1e-10;
    int max_nodes = 30000;

    void validate() const;
};

/// int_{lower}^{upper} f(x) phi(x) dx with infinite bounds clipped to +-12.
QuadratureResult integrate_gaussian(const Integrand& f, const QuadratureSpec& spec);

/// int_{-inf}^{upper} f(x) phi(x) dx. `spec.upper` is ignored in favour of `upper`.
double integrate_left_tail(const Integrand& f, double upper, const QuadratureSpec& spec = {});

}  // namespace dvb
