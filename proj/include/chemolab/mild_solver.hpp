#pragma once

#include <vector>

#include "chemolab/constants.hpp"
#include "chemolab/core_types.hpp"
#include "chemolab/spectral.hpp"

namespace chemolab {

struct ContractionFailure : Error {
    using Error::Error;
};

struct PicardConfig {
    int max_iter = 100;
    double tol = 1e-12;
    int quad_nodes = 201;  // time nodes on [0, T], endpoints included

    void validate() const;
};

/// Largest T with 4Rχc_div√T + (λ+a+2Rb)T + μT + 2μc_grad√T ≤ 1 − margin.
double local_horizon(double R, const Params& p, double c_div, double c_grad, double margin = 0.1);

/// max(‖u₀‖∞, ‖v₀‖∞ + ‖∇v₀‖∞), the radius entering local_horizon.
double data_radius(const SemigroupPlan& plan, const SimState& s0);

struct PicardResult {
    std::vector<SimState> trajectory;  // one state per quadrature node
    int iterations = 0;
    std::vector<double> increments;    // sup-in-time distance between successive iterates
    double residual = 0.0;             // distance from the returned trajectory to its image
    double max_ratio = 0.0;            // max ratio of successive increments
    double max_chemotaxis = 0.0;       // sup of χ∇·(u∇v) over the returned trajectory
};

/// Fixed point of the Duhamel map on [0, T]. The integrand is frozen at the
/// right end of each subinterval and the semigroup kernel (with its
/// (t−s)^{−1/2} gradient singularity) is integrated exactly per Fourier mode.
/// Distances use sup‖u‖ and sup‖v‖ + sup|∇v|.
/// If `cal` is given, T is checked against local_horizon first.
PicardResult picard_solve(const SimState& s0, double T, const PicardConfig& cfg,
                          const CalibrationConstants* cal = nullptr);

}  // namespace chemolab
