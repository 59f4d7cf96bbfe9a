#pragma once

#include <optional>
#include <string>

#include "chemolab/core_types.hpp"

namespace chemolab {

/// The generic constants of the smoothing estimates, made explicit. Each value
/// carries a short provenance string that ends up in the constants report.
struct CalibrationConstants {
    double c_grad = 0.0;     // sup-norm envelope of ∇e^{t(Δ−σI)}
    double c_div = 0.0;      // N/√π, the divergence-extension bound
    double c2 = 0.0;         // stand-in for the convergence proof's C₂
    double c_generic = 1.0;  // stand-in for the generic C next to C₂
    double beta = 0.4;       // admissible pair with γ ∈ (1, 3/2), γ−1 < β < 1/2
    double gamma = 1.3;
    std::string c_grad_source;
    std::string c2_source;

    /// c_div = N/√π, c2 = a, c_generic = 1. `c_grad` comes from a gradient
    /// envelope sweep; pass the measured value.
    static CalibrationConstants defaults(double a, int dim, double c_grad,
                                         std::string c_grad_source = "measured");

    void validate() const;
};

/// C₂ with its full structure max{Cλ^{γ−β−3/2}a^{β+3/2}√π N⁻² + Cλ^{γ−β−1}a^{β+1}N⁻¹, a}.
double structured_c2(double a, double lambda, int dim, const CalibrationConstants& cal);

struct TheoryConstants {
    double theta = 0.0;                  // Nμχ/(4b)
    std::optional<double> bound_general;  // (2λ+a)²/(2λ(4b−Nμχ)), defined iff b > Nμχ/4
    std::optional<double> bound_refined;  // 4a/(4b−Nμχ)
    std::optional<double> lyapunov_bound; // (2λ+a)²/(2λχ(4b−Nμχ))
    double steady_u = 0.0;
    double steady_v = 0.0;
    double theta0 = 0.0;
    double K = 0.0;
    double L0_min = 0.0;
    double L0 = 0.0;       // radius at which lambda0 is evaluated
    double lambda0 = 0.0;
};

TheoryConstants compute_constants(const Params& p, const CalibrationConstants& cal,
                                  std::optional<double> L0 = std::nullopt);

struct ConvergenceThreshold {
    double theta0 = 0.0;
    double K = 0.0;
    // Left-hand sides of the two defining inequalities at theta0, each
    // normalized by its right-hand side (1/6 and 1/12).
    double first_ratio = 0.0;
    double second_ratio = 0.0;
};

ConvergenceThreshold convergence_K(double a, double lambda, int dim, const CalibrationConstants& cal);

/// First positive zero of J_{N/2−1}.
double bessel_zero(int dim);

/// Principal eigenvalue of Δφ + (a/2)φ = λφ on the ball of radius L0, Dirichlet data.
double principal_eigenvalue(double a, double L0, int dim);

/// Same quantity from a radial finite-volume discretization with `nodes` cells,
/// solved by shifted inverse iteration.
double principal_eigenvalue_fd(double a, double L0, int dim, int nodes = 2048);

double minimal_ball_radius(double a, int dim);

/// max(1, ln(M/ε)/λ)
double persistence_T(double epsilon, double M, double lambda);

/// Upper incomplete gamma Γ(s, x) for s ∈ {1/2, 1, 3/2, 2}.
double upper_incomplete_gamma(double s, double x);

/// ∫_{|z|>R} |z|^m e^{−|z|²} dz over ℝ^N, m ∈ {0, 1}.
double gaussian_tail(double R, int dim, int moment);

/// Smallest L ≥ L0_min with both tails at radius L/(2√(2T)) below ε.
double persistence_L(double epsilon, double T, int dim, double L0_min);

double step1_Mtilde(double lambda, double mu, double M, int dim);

}  // namespace chemolab
