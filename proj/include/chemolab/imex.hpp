#pragma once

#include <functional>
#include <memory>

#include "chemolab/core_types.hpp"
#include "chemolab/harness.hpp"
#include "chemolab/spectral.hpp"

namespace chemolab {

struct PositivityViolation : Error {
    PositivityViolation(const std::string& what, double time) : Error(what), time(time) {}
    double time;
};

struct Divergence : Error {
    Divergence(const std::string& what, double time) : Error(what), time(time) {}
    double time;
};

struct StepControl {
    double dt_max = 1e-2;
    double cfl_safety = 0.5;
    double neg_tol = 1e-8;
    double t_end = 1.0;
    double record_every = 0.1;
    double eps_floor = 1e-12;  // guards the advective limit when ∇v ≡ 0

    void validate() const;
};

using DiagnosticsSink = std::function<void(const DiagnosticsRecord&)>;

/// Exponential Euler for the chemotaxis system. The linear part Δ − λI is
/// propagated exactly; chemotaxis flux and reaction are frozen over the step:
///   û⁺ = e^{−c dt} û + (1 − e^{−c dt})/c · N̂_u,   c = |k|² + λ,
///   N_u = −χ∇·(u∇v) + u(a + λ − bu),   N_v = μu.
/// Quadratic products are dealiased with the 2/3 rule.
class ImexStepper {
public:
    explicit ImexStepper(const Grid& grid);
    explicit ImexStepper(std::shared_ptr<const SemigroupPlan> plan);

    const SemigroupPlan& plan() const { return *plan_; }

    double cfl_dt(const SimState& s, const StepControl& ctl) const;

    /// One step. Throws PositivityViolation when min u < −neg_tol and
    /// Divergence on non-finite values.
    SimState step(const SimState& s, double dt, double neg_tol = 1e-8) const;

    /// Advances to ctl.t_end, recording at t = 0, every record_every, and at t_end.
    SimState integrate(const SimState& s0, const StepControl& ctl, const DiagnosticsSink& sink) const;

private:
    std::shared_ptr<const SemigroupPlan> plan_;
};

}  // namespace chemolab
