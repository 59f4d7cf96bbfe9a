#include "chemolab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace chemolab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(int dim) {
    if (dim < 1 || dim > 3) throw InvalidParameter("dimension must be 1, 2 or 3");
}

void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidParameter(std::string(name) + " must be positive");
}

double sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * kPi;
        default: return 4.0 * kPi;
    }
}

}  // namespace

CalibrationConstants CalibrationConstants::defaults(double a, int dim, double c_grad, std::string c_grad_source) {
    require_dim(dim);
    CalibrationConstants cal;
    cal.c_grad = c_grad;
    cal.c_div = dim / std::sqrt(kPi);
    cal.c2 = a;
    cal.c_generic = 1.0;
    cal.c_grad_source = std::move(c_grad_source);
    cal.c2_source = "lower branch a of the max";
    return cal;
}

void CalibrationConstants::validate() const {
    require_positive(c_grad, "c_grad");
    require_positive(c_div, "c_div");
    require_positive(c2, "c2");
    require_positive(c_generic, "c_generic");
    if (!(gamma > 1.0 && gamma < 1.5)) throw InvalidParameter("gamma must lie in (1, 3/2)");
    if (!(beta > gamma - 1.0 && beta < 0.5)) throw InvalidParameter("beta must lie in (gamma-1, 1/2)");
}

double structured_c2(double a, double lambda, int dim, const CalibrationConstants& cal) {
    const double C = cal.c_generic;
    const double n = dim;
    const double first = C * std::pow(lambda, cal.gamma - cal.beta - 1.5) * std::pow(a, cal.beta + 1.5) *
                             std::sqrt(kPi) / (n * n) +
                         C * std::pow(lambda, cal.gamma - cal.beta - 1.0) * std::pow(a, cal.beta + 1.0) / n;
    return std::max(first, a);
}

TheoryConstants compute_constants(const Params& p, const CalibrationConstants& cal, std::optional<double> L0) {
    p.validate();
    TheoryConstants c;
    const double n = p.dim;
    c.theta = n * p.mu * p.chi / (4.0 * p.b);
    const double gap = 4.0 * p.b - n * p.mu * p.chi;
    if (gap > 0.0) {
        const double s = 2.0 * p.lambda + p.a;
        c.bound_general = s * s / (2.0 * p.lambda * gap);
        c.bound_refined = 4.0 * p.a / gap;
        c.lyapunov_bound = s * s / (2.0 * p.lambda * p.chi * gap);
    }
    c.steady_u = p.steady_u();
    c.steady_v = p.steady_v();
    const auto k = convergence_K(p.a, p.lambda, p.dim, cal);
    c.theta0 = k.theta0;
    c.K = k.K;
    c.L0_min = minimal_ball_radius(p.a, p.dim);
    c.L0 = L0.value_or(c.L0_min);
    c.lambda0 = principal_eigenvalue(p.a, c.L0, p.dim);
    return c;
}

ConvergenceThreshold convergence_K(double a, double lambda, int dim, const CalibrationConstants& cal) {
    require_positive(a, "a");
    require_positive(lambda, "lambda");
    require_dim(dim);
    require_positive(cal.c2, "c2");
    require_positive(cal.c_generic, "c_generic");

    // Both constraints are increasing in θ and unbounded as θ → 1.
    auto first = [&](double th) { return 2.0 * cal.c2 * th / ((1.0 - th) * (1.0 - th) * a) * 6.0; };
    auto second = [&](double th) {
        return 8.0 * cal.c_generic * std::sqrt(a / lambda) * kPi * th / (dim * (1.0 - th)) * 12.0;
    };
    auto feasible = [&](double th) { return first(th) <= 1.0 && second(th) <= 1.0; };

    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    ConvergenceThreshold r;
    r.theta0 = lo;
    r.K = dim / (4.0 * lo);
    r.first_ratio = first(lo);
    r.second_ratio = second(lo);
    return r;
}

double bessel_zero(int dim) {
    require_dim(dim);
    switch (dim) {
        case 1: return kPi / 2.0;          // j_{-1/2,1}
        case 2: return 2.404825557695773;  // j_{0,1}
        default: return kPi;               // j_{1/2,1}
    }
}

double principal_eigenvalue(double a, double L0, int dim) {
    require_positive(L0, "L0");
    const double j = bessel_zero(dim);
    return a / 2.0 - (j / L0) * (j / L0);
}

double principal_eigenvalue_fd(double a, double L0, int dim, int nodes) {
    require_positive(L0, "L0");
    require_dim(dim);
    if (nodes < 8) throw InvalidParameter("need at least 8 radial cells");

    // Cell-centred finite volumes for −r^{1−N}(r^{N−1}φ')' on (0, L0) with zero
    // flux at the origin and φ(L0) = 0 through a mirrored ghost cell. The
    // symmetrized matrix W^{-1/2} A W^{-1/2} is tridiagonal.
    const auto n = static_cast<std::size_t>(nodes);
    const double h = L0 / nodes;
    const double p = dim - 1;
    std::vector<double> w(n), diag(n), off(n > 0 ? n - 1 : 0);
    auto face = [&](double r) { return std::pow(r, p); };
    for (std::size_t i = 0; i < n; ++i) w[i] = face((static_cast<double>(i) + 0.5) * h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? 0.0 : face(static_cast<double>(i) * h);
        const double right = face(static_cast<double>(i + 1) * h);
        double d = left + right;
        if (i + 1 == n) d += right;  // ghost φ_n = −φ_{n−1}
        diag[i] = d / (h * h * w[i]);
        if (i + 1 < n) off[i] = -right / (h * h * std::sqrt(w[i] * w[i + 1]));
    }

    // Inverse iteration (shift 0) with a Thomas solve; operator is SPD.
    std::vector<double> x(n, 1.0), y(n), c(n), dprime(n);
    double kappa = 0.0;
    for (int it = 0; it < 500; ++it) {
        // solve T y = x
        c[0] = n > 1 ? off[0] / diag[0] : 0.0;
        dprime[0] = x[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = diag[i] - off[i - 1] * c[i - 1];
            c[i] = (i + 1 < n) ? off[i] / m : 0.0;
            dprime[i] = (x[i] - off[i - 1] * dprime[i - 1]) / m;
        }
        y[n - 1] = dprime[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) y[i] = dprime[i] - c[i] * y[i + 1];

        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;

        // Rayleigh quotient x·Tx
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double tx = diag[i] * x[i];
            if (i > 0) tx += off[i - 1] * x[i - 1];
            if (i + 1 < n) tx += off[i] * x[i + 1];
            rq += x[i] * tx;
        }
        if (it > 0 && std::abs(rq - kappa) <= 1e-15 * std::abs(rq)) {
            kappa = rq;
            break;
        }
        kappa = rq;
    }
    return a / 2.0 - kappa;
}

double minimal_ball_radius(double a, int dim) {
    require_positive(a, "a");
    return std::max(1.0, bessel_zero(dim) * std::sqrt(2.0 / a) * (1.0 + 1e-9));
}

double persistence_T(double epsilon, double M, double lambda) {
    require_positive(epsilon, "epsilon");
    require_positive(M, "M");
    require_positive(lambda, "lambda");
    return std::max(1.0, std::log(M / epsilon) / lambda);
}

double upper_incomplete_gamma(double s, double x) {
    if (!(x >= 0.0)) throw InvalidParameter("incomplete gamma needs x >= 0");
    // Γ(s+1, x) = sΓ(s, x) + x^s e^{−x}, seeded by Γ(1/2, x) = √π erfc(√x) and Γ(1, x) = e^{−x}.
    const double twice = 2.0 * s;
    if (twice != std::round(twice) || twice < 1.0 || twice > 4.0) {
        throw InvalidParameter("upper_incomplete_gamma supports s in {1/2, 1, 3/2, 2}");
    }
    const bool half = static_cast<int>(twice) % 2 == 1;
    double g = half ? std::sqrt(kPi) * std::erfc(std::sqrt(x)) : std::exp(-x);
    double order = half ? 0.5 : 1.0;
    while (order < s) {
        g = order * g + std::pow(x, order) * std::exp(-x);
        order += 1.0;
    }
    return g;
}

double gaussian_tail(double R, int dim, int moment) {
    require_dim(dim);
    if (!(R >= 0.0)) throw InvalidParameter("tail radius must be >= 0");
    if (moment != 0 && moment != 1) throw InvalidParameter("moment must be 0 or 1");
    return sphere_area(dim) * 0.5 * upper_incomplete_gamma((dim + moment) / 2.0, R * R);
}

double persistence_L(double epsilon, double T, int dim, double L0_min) {
    require_positive(epsilon, "epsilon");
    if (!(T >= 1.0)) throw InvalidParameter("T must be >= 1");
    require_positive(L0_min, "L0_min");
    const double scale = 2.0 * std::sqrt(2.0 * T);
    auto tail = [&](double R) { return std::max(gaussian_tail(R, dim, 0), gaussian_tail(R, dim, 1)); };
    if (tail(L0_min / scale) <= epsilon) return L0_min;

    double lo = L0_min / scale;
    double hi = std::max(1.0, 2.0 * lo);
    while (tail(hi) > epsilon) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > epsilon ? lo : hi) = mid;
    }
    return hi * scale;
}

double step1_Mtilde(double lambda, double mu, double M, int dim) {
    require_positive(lambda, "lambda");
    require_positive(mu, "mu");
    require_positive(M, "M");
    require_dim(dim);
    const double pin = std::pow(kPi, dim / 2.0);
    const double gamma_half = std::sqrt(kPi);
    const double first = 1.0 + mu * M / (lambda * pin) + mu / lambda;
    const double second = 1.0 + mu / pin / std::sqrt(lambda) * gamma_half * M + mu / pin / std::sqrt(lambda) * gamma_half;
    return std::max(first, second);
}

}  // namespace chemolab
