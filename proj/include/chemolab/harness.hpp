#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemolab/core_types.hpp"
#include "chemolab/spectral.hpp"

namespace chemolab {

struct SeriesError : Error {
    using Error::Error;
};

/// Norms of one state. Gradient and Laplacian are spectral.
struct DiagnosticsRecord {
    double t = 0.0;
    double sup_u = 0.0;
    double inf_u = 0.0;
    double sup_v = 0.0;
    double sup_grad_v = 0.0;   // max_x |∇v|
    double sup_lap_v = 0.0;    // max_x |Δv|
    double lyapunov_sup = 0.0; // max_x [u/χ + |∇v|²/(2μ)]
    double err_u = 0.0;        // max_x |u − a/b|
    double err_v = 0.0;        // max_x |v − μa/(λb)|

    bool operator==(const DiagnosticsRecord&) const = default;
};

using Series = std::vector<DiagnosticsRecord>;

DiagnosticsRecord diagnostics(const SemigroupPlan& plan, const SimState& s);
DiagnosticsRecord diagnostics(const SimState& s);

enum class Quantity { sup_u, inf_u, sup_v, sup_grad_v, sup_lap_v, lyapunov_sup, err_u, err_v, err_sum };

double value_of(const DiagnosticsRecord& r, Quantity q);
const char* name_of(Quantity q);

struct Verdict {
    std::string check;
    bool pass = false;
    double measured = 0.0;
    double target = 0.0;
    double slack = 0.0;
    double transient = 0.0;  // records before this time were discarded
    std::string detail;

    bool operator==(const Verdict&) const = default;
};

/// max of `q` over the last (1 − transient_fraction) of the run against
/// target·(1 + slack). `min_span` is the shortest admissible run length.
Verdict check_eventual_bound(std::span<const DiagnosticsRecord> series, Quantity q, double target,
                             double transient_fraction = 0.5, double slack = 0.05, double min_span = 0.0);

/// Context for the informational trend value a/b − C₂θ/(b(1−θ)²).
struct PersistenceContext {
    Params params;
    double c2 = 0.0;
};

struct PersistenceVerdict {
    Verdict verdict;
    double floor = 0.0;                // m, min of inf_u over the tail half
    std::optional<double> trend_value; // informational only
};

PersistenceVerdict check_persistence(std::span<const DiagnosticsRecord> series,
                                     std::optional<double> floor_guess = std::nullopt,
                                     std::optional<PersistenceContext> context = std::nullopt);

struct Window {
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct DecayFit {
    double alpha = 0.0;
    double r_squared = 0.0;
    double intercept = 0.0;  // log-value at t = 0
    std::size_t points = 0;
    Window window;
};

/// Least-squares slope of log(q) against t over the closed window.
DecayFit fit_decay_rate(std::span<const DiagnosticsRecord> series, Quantity q, Window window);

struct ConvergenceCheckConfig {
    double tol_final = 1e-6;
    double min_r2 = 0.99;
    /// Start of the fit window as a fraction of the run.
    double transient_fraction = 0.1;
    /// Records whose err_u + err_v sits below noise_floor·(a/b + μa/(λb)) are
    /// round-off and excluded from the fit.
    double noise_floor = 1e-11;
    std::optional<Window> window;
};

struct ConvergenceVerdict {
    Verdict verdict;
    DecayFit fit;
};

ConvergenceVerdict check_convergence(std::span<const DiagnosticsRecord> series, const Params& p,
                                     const ConvergenceCheckConfig& cfg = {},
                                     const ValidationReport* advisory = nullptr);

}  // namespace chemolab
