#include "chemolab/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemolab {

void PicardConfig::validate() const {
    if (max_iter < 1) throw InvalidParameter("max_iter must be >= 1");
    if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
    if (quad_nodes < 2) throw InvalidParameter("quad_nodes must be >= 2");
}

double local_horizon(double R, const Params& p, double c_div, double c_grad, double margin) {
    p.validate();
    if (!(R > 0.0)) throw InvalidParameter("data radius must be positive");
    if (!(margin >= 0.0 && margin < 1.0)) throw InvalidParameter("margin must lie in [0, 1)");
    // A s + B s² = 1 − margin with s = √T; take the positive root in the cancellation-free form.
    const double A = 4.0 * R * c_div * p.chi + 2.0 * p.mu * c_grad;
    const double B = p.lambda + p.a + 2.0 * R * p.b + p.mu;
    const double rhs = 1.0 - margin;
    const double s = 2.0 * rhs / (A + std::sqrt(A * A + 4.0 * B * rhs));
    return s * s;
}

double data_radius(const SemigroupPlan& plan, const SimState& s0) {
    return std::max(s0.u().sup_norm(), s0.v().sup_norm() + plan.gradient(s0.v()).sup_magnitude());
}

namespace {

struct Node {
    std::vector<double> u, v;
    Spectrum uh, vh;
};

using Trajectory = std::vector<Node>;

class DuhamelMap {
public:
    DuhamelMap(const SemigroupPlan& plan, const Params& p, double h) : plan_(plan), p_(p) {
        const std::size_t m = plan.spectral_size();
        decay_.resize(m);
        weight_.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double c = plan.k2(j) + p.lambda;
            decay_[j] = SemigroupPlan::heat_multiplier(plan.k2(j), h, p.lambda);
            weight_[j] = -std::expm1(-c * h) / c;  // ∫₀ʰ e^{−c s} ds
        }
    }

    /// χ∇·(u∇v) in Fourier space.
    Spectrum chemotaxis(const Node& n) const {
        const std::size_t m = plan_.spectral_size();
        const std::size_t size = n.u.size();
        Spectrum div(m);
        std::vector<double> flux(size);
        for (int d = 0; d < plan_.grid().dim(); ++d) {
            Spectrum dv(m);
            for (std::size_t j = 0; j < m; ++j) dv[j] = std::complex<double>(0.0, plan_.k_deriv(d, j)) * n.vh[j];
            plan_.inverse(std::move(dv), flux);
            for (std::size_t i = 0; i < size; ++i) flux[i] *= n.u[i];
            const Spectrum fh = plan_.forward(flux);
            for (std::size_t j = 0; j < m; ++j) div[j] += std::complex<double>(0.0, plan_.k_deriv(d, j)) * fh[j];
        }
        for (auto& x : div) x *= p_.chi;
        return div;
    }

    Trajectory apply(const Trajectory& in, double* max_chemotaxis) const {
        const std::size_t m = plan_.spectral_size();
        const std::size_t size = in.front().u.size();
        Trajectory out(in.size());
        out[0] = in[0];
        Spectrum su = in[0].uh;
        Spectrum sv = in[0].vh;
        std::vector<double> logistic(size);
        for (std::size_t q = 1; q < in.size(); ++q) {
            const Node& n = in[q];
            const Spectrum chem = chemotaxis(n);
            if (max_chemotaxis) {
                *max_chemotaxis =
                    std::max(*max_chemotaxis, Field(plan_.grid(), plan_.inverse(chem)).sup_norm());
            }
            for (std::size_t i = 0; i < size; ++i) logistic[i] = n.u[i] * (p_.lambda + p_.a - p_.b * n.u[i]);
            const Spectrum lh = plan_.forward(logistic);
            for (std::size_t j = 0; j < m; ++j) {
                su[j] = decay_[j] * su[j] + weight_[j] * (lh[j] - chem[j]);
                sv[j] = decay_[j] * sv[j] + weight_[j] * p_.mu * n.uh[j];
            }
            out[q].uh = su;
            out[q].vh = sv;
            out[q].u = plan_.inverse(su);
            out[q].v = plan_.inverse(sv);
        }
        return out;
    }

    double distance(const Trajectory& a, const Trajectory& b) const {
        const std::size_t m = plan_.spectral_size();
        double dist = 0.0;
        for (std::size_t q = 0; q < a.size(); ++q) {
            double du = 0.0, dv = 0.0;
            for (std::size_t i = 0; i < a[q].u.size(); ++i) {
                du = std::max(du, std::abs(a[q].u[i] - b[q].u[i]));
                dv = std::max(dv, std::abs(a[q].v[i] - b[q].v[i]));
            }
            VectorField grad(plan_.grid());
            for (int d = 0; d < plan_.grid().dim(); ++d) {
                Spectrum g(m);
                for (std::size_t j = 0; j < m; ++j) {
                    g[j] = std::complex<double>(0.0, plan_.k_deriv(d, j)) * (a[q].vh[j] - b[q].vh[j]);
                }
                plan_.inverse(std::move(g), grad.component(d));
            }
            dist = std::max({dist, du, dv + grad.sup_magnitude()});
        }
        return dist;
    }

private:
    const SemigroupPlan& plan_;
    Params p_;
    std::vector<double> decay_;
    std::vector<double> weight_;
};

}  // namespace

PicardResult picard_solve(const SimState& s0, double T, const PicardConfig& cfg, const CalibrationConstants* cal) {
    cfg.validate();
    if (!(T > 0.0)) throw InvalidParameter("horizon must be positive");
    const Params& p = s0.params();
    const SemigroupPlan plan(s0.grid());
    if (cal) {
        const double R = data_radius(plan, s0);
        if (R > 0.0) {
            const double limit = local_horizon(R, p, cal->c_div, cal->c_grad);
            if (T > limit) {
                std::ostringstream os;
                os << "horizon " << T << " exceeds the contraction horizon " << limit << " for R=" << R;
                throw InvalidParameter(os.str());
            }
        }
    }

    const auto nodes = static_cast<std::size_t>(cfg.quad_nodes);
    const double h = T / static_cast<double>(nodes - 1);
    const DuhamelMap map(plan, p, h);

    Node start;
    start.u.assign(s0.u().values().begin(), s0.u().values().end());
    start.v.assign(s0.v().values().begin(), s0.v().values().end());
    start.uh = plan.forward(start.u);
    start.vh = plan.forward(start.v);
    Trajectory current(nodes, start);

    PicardResult result;
    bool converged = false;
    for (int it = 0; it < cfg.max_iter; ++it) {
        Trajectory next = map.apply(current, nullptr);
        const double d = map.distance(next, current);
        if (!std::isfinite(d)) throw ContractionFailure("Picard iterates became non-finite");
        if (!result.increments.empty() && result.increments.back() > 0.0) {
            result.max_ratio = std::max(result.max_ratio, d / result.increments.back());
        }
        result.increments.push_back(d);
        current = std::move(next);
        result.iterations = it + 1;
        if (d <= cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "Picard iteration did not reach tol " << cfg.tol << " in " << cfg.max_iter
           << " iterations (last increment " << result.increments.back() << ")";
        throw ContractionFailure(os.str());
    }

    const Trajectory image = map.apply(current, &result.max_chemotaxis);
    result.residual = map.distance(image, current);

    result.trajectory.reserve(nodes);
    for (std::size_t q = 0; q < nodes; ++q) {
        const double t = s0.t() + h * static_cast<double>(q);
        result.trajectory.emplace_back(t, Field(s0.grid(), current[q].u), Field(s0.grid(), current[q].v), p);
    }
    return result;
}

}  // namespace chemolab
