#include "chemolab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chemolab {

DiagnosticsRecord diagnostics(const SemigroupPlan& plan, const SimState& s) {
    require_same_grid(plan.grid(), s.grid(), "diagnostics");
    const Params& p = s.params();
    const auto grad = plan.gradient(s.v());
    const auto lap = plan.laplacian(s.v());
    const double us = p.steady_u();
    const double vs = p.steady_v();

    DiagnosticsRecord r;
    r.t = s.t();
    r.sup_u = s.u().max();
    r.inf_u = s.u().min();
    r.sup_v = s.v().max();
    r.sup_lap_v = lap.sup_norm();
    r.lyapunov_sup = -std::numeric_limits<double>::infinity();
    double grad2_max = 0.0;
    for (std::size_t i = 0; i < s.grid().size(); ++i) {
        double g2 = 0.0;
        for (int d = 0; d < grad.dim(); ++d) g2 += grad.component(d)[i] * grad.component(d)[i];
        grad2_max = std::max(grad2_max, g2);
        r.lyapunov_sup = std::max(r.lyapunov_sup, s.u()[i] / p.chi + g2 / (2.0 * p.mu));
        r.err_u = std::max(r.err_u, std::abs(s.u()[i] - us));
        r.err_v = std::max(r.err_v, std::abs(s.v()[i] - vs));
    }
    r.sup_grad_v = std::sqrt(grad2_max);
    return r;
}

DiagnosticsRecord diagnostics(const SimState& s) { return diagnostics(SemigroupPlan(s.grid()), s); }

double value_of(const DiagnosticsRecord& r, Quantity q) {
    switch (q) {
        case Quantity::sup_u: return r.sup_u;
        case Quantity::inf_u: return r.inf_u;
        case Quantity::sup_v: return r.sup_v;
        case Quantity::sup_grad_v: return r.sup_grad_v;
        case Quantity::sup_lap_v: return r.sup_lap_v;
        case Quantity::lyapunov_sup: return r.lyapunov_sup;
        case Quantity::err_u: return r.err_u;
        case Quantity::err_v: return r.err_v;
        case Quantity::err_sum: return r.err_u + r.err_v;
    }
    return 0.0;
}

const char* name_of(Quantity q) {
    switch (q) {
        case Quantity::sup_u: return "sup_u";
        case Quantity::inf_u: return "inf_u";
        case Quantity::sup_v: return "sup_v";
        case Quantity::sup_grad_v: return "sup_grad_v";
        case Quantity::sup_lap_v: return "sup_lap_v";
        case Quantity::lyapunov_sup: return "lyapunov_sup";
        case Quantity::err_u: return "err_u";
        case Quantity::err_v: return "err_v";
        case Quantity::err_sum: return "err_sum";
    }
    return "?";
}

namespace {

void require_series(std::span<const DiagnosticsRecord> series, double min_span) {
    if (series.size() < 2) throw SeriesError("series needs at least two records");
    const double span = series.back().t - series.front().t;
    if (span < min_span) {
        std::ostringstream os;
        os << "series spans " << span << " time units, needs at least " << min_span;
        throw SeriesError(os.str());
    }
}

double tail_start(std::span<const DiagnosticsRecord> series, double fraction) {
    return series.front().t + fraction * (series.back().t - series.front().t);
}

}  // namespace

Verdict check_eventual_bound(std::span<const DiagnosticsRecord> series, Quantity q, double target,
                             double transient_fraction, double slack, double min_span) {
    require_series(series, min_span);
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) {
        throw InvalidParameter("transient_fraction must lie in [0, 1)");
    }
    const double t0 = tail_start(series, transient_fraction);
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : series)
        if (r.t >= t0) m = std::max(m, value_of(r, q));

    Verdict v;
    v.check = std::string("eventual_bound(") + name_of(q) + ")";
    v.measured = m;
    v.target = target;
    v.slack = slack;
    v.transient = t0;
    v.pass = m <= target * (1.0 + slack);
    std::ostringstream os;
    os << "tail max " << m << " vs ceiling " << target * (1.0 + slack);
    v.detail = os.str();
    return v;
}

PersistenceVerdict check_persistence(std::span<const DiagnosticsRecord> series, std::optional<double> floor_guess,
                                     std::optional<PersistenceContext> context) {
    require_series(series, 0.0);
    if (!(series.front().inf_u > 0.0)) throw SeriesError("persistence needs a positive initial inf_u");
    const double t0 = tail_start(series, 0.5);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : series)
        if (r.t >= t0) m = std::min(m, r.inf_u);

    PersistenceVerdict out;
    out.floor = m;
    Verdict& v = out.verdict;
    v.check = "persistence(inf_u)";
    v.measured = m;
    v.target = floor_guess.value_or(0.0);
    v.transient = t0;
    v.pass = m > 0.0 && (!floor_guess || m >= *floor_guess);
    if (context) {
        const Params& p = context->params;
        const double theta = p.dim * p.mu * p.chi / (4.0 * p.b);
        if (theta < 1.0) {
            out.trend_value = p.a / p.b - context->c2 * theta / (p.b * (1.0 - theta) * (1.0 - theta));
        }
    }
    std::ostringstream os;
    os << "tail min inf_u " << m;
    if (floor_guess) os << " vs floor " << *floor_guess;
    if (out.trend_value) os << "; trend value " << *out.trend_value;
    v.detail = os.str();
    return out;
}

DecayFit fit_decay_rate(std::span<const DiagnosticsRecord> series, Quantity q, Window window) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : series) {
        if (r.t < window.t_begin || r.t > window.t_end) continue;
        const double y = value_of(r, q);
        if (!(y > 0.0)) {
            std::ostringstream os;
            os << name_of(q) << " is nonpositive at t=" << r.t << "; shrink the fit window";
            throw SeriesError(os.str());
        }
        pts.emplace_back(r.t, std::log(y));
    }
    n = pts.size();
    if (n < 2) throw SeriesError("fit window holds fewer than two records");
    for (const auto& [t, y] : pts) {
        st += t;
        sy += y;
    }
    const double tm = st / static_cast<double>(n);
    const double ym = sy / static_cast<double>(n);
    double syy = 0.0;
    for (const auto& [t, y] : pts) {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if (!(stt > 0.0)) throw SeriesError("fit window has no time spread");
    const double slope = sty / stt;
    double ss_res = 0.0;
    for (const auto& [t, y] : pts) {
        const double e = y - (ym + slope * (t - tm));
        ss_res += e * e;
    }
    DecayFit fit;
    fit.alpha = -slope;
    fit.intercept = ym - slope * tm;
    fit.points = n;
    fit.window = window;
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

ConvergenceVerdict check_convergence(std::span<const DiagnosticsRecord> series, const Params& p,
                                     const ConvergenceCheckConfig& cfg, const ValidationReport* advisory) {
    require_series(series, 0.0);
    Window w;
    if (cfg.window) {
        w = *cfg.window;
    } else {
        const double floor = cfg.noise_floor * (p.steady_u() + p.steady_v());
        w.t_begin = tail_start(series, cfg.transient_fraction);
        w.t_end = w.t_begin;
        for (const auto& r : series)
            if (r.t >= w.t_begin && value_of(r, Quantity::err_sum) >= floor) w.t_end = r.t;
    }

    ConvergenceVerdict out;
    Verdict& v = out.verdict;
    v.check = "convergence(err_u+err_v)";
    v.measured = value_of(series.back(), Quantity::err_sum);
    v.target = cfg.tol_final;
    v.transient = w.t_begin;
    const bool final_ok = v.measured <= cfg.tol_final;

    std::ostringstream os;
    os << "final " << v.measured << " vs " << cfg.tol_final;
    try {
        out.fit = fit_decay_rate(series, Quantity::err_sum, w);
        os << "; alpha " << out.fit.alpha << " r2 " << out.fit.r_squared << " on [" << w.t_begin << ", "
           << w.t_end << "] (" << out.fit.points << " pts)";
        v.pass = final_ok && out.fit.alpha > 0.0 && out.fit.r_squared >= cfg.min_r2;
    } catch (const SeriesError& e) {
        if (cfg.window) throw;
        os << "; fit unavailable: " << e.what();
        v.pass = false;
    }
    if (advisory) os << "; advisory: " << advisory->summary();
    v.detail = os.str();
    return out;
}

}  // namespace chemolab
