#include "chemolab/imex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemolab {

void StepControl::validate() const {
    if (!(dt_max > 0.0)) throw InvalidParameter("dt_max must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw InvalidParameter("cfl_safety must lie in (0, 1]");
    if (!(neg_tol >= 0.0)) throw InvalidParameter("neg_tol must be >= 0");
    if (!(t_end >= 0.0)) throw InvalidParameter("t_end must be >= 0");
    if (!(record_every > 0.0)) throw InvalidParameter("record_every must be positive");
    if (!(eps_floor > 0.0)) throw InvalidParameter("eps_floor must be positive");
}

ImexStepper::ImexStepper(const Grid& grid) : plan_(std::make_shared<const SemigroupPlan>(grid)) {}

ImexStepper::ImexStepper(std::shared_ptr<const SemigroupPlan> plan) : plan_(std::move(plan)) {
    if (!plan_) throw InvalidParameter("null semigroup plan");
}

double ImexStepper::cfl_dt(const SimState& s, const StepControl& ctl) const {
    const Params& p = s.params();
    const double grad = plan_->gradient(s.v()).sup_magnitude();
    const double advective = s.grid().spacing() / std::max(p.chi * grad, ctl.eps_floor);
    const double reactive = 1.0 / (p.a + 2.0 * p.b * s.u().sup_norm());
    return ctl.cfl_safety * std::min({ctl.dt_max, advective, reactive});
}

SimState ImexStepper::step(const SimState& s, double dt, double neg_tol) const {
    if (!(dt > 0.0)) throw InvalidParameter("step size must be positive");
    const SemigroupPlan& plan = *plan_;
    require_same_grid(plan.grid(), s.grid(), "ImexStepper::step");
    const Params& p = s.params();
    const Grid& grid = s.grid();
    const std::size_t n = grid.size();
    const std::size_t m = plan.spectral_size();

    const Spectrum uh = plan.forward(s.u().values());
    const Spectrum vh = plan.forward(s.v().values());

    // χ∇·(u∇v): ∇v spectrally, product on the grid, divergence spectrally.
    Spectrum div(m);
    std::vector<double> flux(n);
    for (int d = 0; d < grid.dim(); ++d) {
        Spectrum dv(m);
        for (std::size_t j = 0; j < m; ++j) dv[j] = std::complex<double>(0.0, plan.k_deriv(d, j)) * vh[j];
        plan.inverse(std::move(dv), flux);
        for (std::size_t i = 0; i < n; ++i) flux[i] *= s.u()[i];
        Spectrum fh = plan.forward(flux);
        plan.dealias(fh);
        for (std::size_t j = 0; j < m; ++j) div[j] += std::complex<double>(0.0, plan.k_deriv(d, j)) * fh[j];
    }

    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = s.u()[i] * s.u()[i];
    Spectrum sqh = plan.forward(sq);
    plan.dealias(sqh);

    Spectrum un(m), vn(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double c = plan.k2(j) + p.lambda;
        const double decay = SemigroupPlan::heat_multiplier(plan.k2(j), dt, p.lambda);
        const double phi = -std::expm1(-c * dt) / c;
        const auto nu = -p.chi * div[j] + (p.a + p.lambda) * uh[j] - p.b * sqh[j];
        un[j] = decay * uh[j] + phi * nu;
        vn[j] = decay * vh[j] + phi * p.mu * uh[j];
    }

    const double t1 = s.t() + dt;
    Field u1(grid, plan.inverse(std::move(un)));
    Field v1(grid, plan.inverse(std::move(vn)));
    if (!u1.all_finite() || !v1.all_finite()) {
        std::ostringstream os;
        os << "non-finite values at t=" << t1;
        throw Divergence(os.str(), t1);
    }
    if (u1.min() < -neg_tol) {
        std::ostringstream os;
        os << "u undershoots to " << u1.min() << " at t=" << t1 << " (tolerance " << neg_tol << ")";
        throw PositivityViolation(os.str(), t1);
    }
    return SimState(t1, std::move(u1), std::move(v1), p);
}

SimState ImexStepper::integrate(const SimState& s0, const StepControl& ctl, const DiagnosticsSink& sink) const {
    ctl.validate();
    SimState s = s0;
    const auto emit = [&](const SimState& st) {
        if (sink) sink(diagnostics(*plan_, st));
    };
    emit(s);

    const double t_start = s0.t();
    long next_index = 1;
    auto next_record = [&] {
        return std::min(ctl.t_end, t_start + static_cast<double>(next_index) * ctl.record_every);
    };
    // Times closer than this to a target snap onto it.
    const double snap = 1e-12 * std::max(1.0, ctl.t_end);

    while (s.t() < ctl.t_end - snap) {
        const double target = next_record();
        double dt = cfl_dt(s, ctl);
        const bool hits = s.t() + dt >= target - snap;
        if (hits) dt = target - s.t();
        s = step(s, dt, ctl.neg_tol);
        if (hits) {
            s = SimState(target, s.u(), s.v(), s.params());
            emit(s);
            ++next_index;
        }
    }
    return s;
}

}  // namespace chemolab
