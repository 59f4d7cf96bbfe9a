#include "chemolab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

namespace chemolab {

namespace {

// FFTW's planner is not reentrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kFlushExponent = -690.7755278982137;  // ln(1e-300)

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct SemigroupPlan::FftwPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~FftwPlans() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

SemigroupPlan::SemigroupPlan(const Grid& grid) : grid_(grid), plans_(std::make_unique<FftwPlans>()) {
    const std::size_t n = grid.points();
    const int dim = grid.dim();
    const std::size_t half = n / 2 + 1;

    k_axis_.resize(n);
    const double base = 2.0 * std::numbers::pi / grid.extent();
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = static_cast<long>(i) - (i >= n / 2 ? static_cast<long>(n) : 0L);
        k_axis_[i] = base * static_cast<double>(m);
    }

    std::size_t spec = half;
    for (int d = 1; d < dim; ++d) spec *= n;
    k2_.assign(spec, 0.0);
    kd_.assign(static_cast<std::size_t>(dim), std::vector<double>(spec, 0.0));
    keep_.assign(spec, 1);

    const long cutoff = static_cast<long>(n / 3);
    for (std::size_t j = 0; j < spec; ++j) {
        std::size_t rest = j;
        for (int d = dim - 1; d >= 0; --d) {
            const std::size_t extent_d = (d == dim - 1) ? half : n;
            const std::size_t i = rest % extent_d;
            rest /= extent_d;
            const double k = k_axis_[i];
            k2_[j] += k * k;
            kd_[static_cast<std::size_t>(d)][j] = (i == n / 2) ? 0.0 : k;
            const auto m = static_cast<long>(i) - (i >= n / 2 ? static_cast<long>(n) : 0L);
            if (std::labs(m) > cutoff) keep_[j] = 0;
        }
    }

    std::vector<int> shape(static_cast<std::size_t>(dim), static_cast<int>(n));
    std::vector<double> real(grid.size());
    Spectrum cplx(spec);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->forward = fftw_plan_dft_r2c(dim, shape.data(), real.data(), as_fftw(cplx.data()), flags);
    plans_->backward = fftw_plan_dft_c2r(dim, shape.data(), as_fftw(cplx.data()), real.data(), flags);
    if (!plans_->forward || !plans_->backward) throw Error("FFTW planning failed");
}

SemigroupPlan::~SemigroupPlan() = default;

Spectrum SemigroupPlan::forward(std::span<const double> values) const {
    if (values.size() != grid_.size()) throw GridMismatch("forward transform size mismatch");
    std::vector<double> in(values.begin(), values.end());
    Spectrum out(spectral_size());
    fftw_execute_dft_r2c(plans_->forward, in.data(), as_fftw(out.data()));
    return out;
}

void SemigroupPlan::inverse(Spectrum spectrum, std::span<double> out) const {
    if (spectrum.size() != spectral_size() || out.size() != grid_.size()) {
        throw GridMismatch("inverse transform size mismatch");
    }
    fftw_execute_dft_c2r(plans_->backward, as_fftw(spectrum.data()), out.data());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (double& x : out) x *= scale;
}

std::vector<double> SemigroupPlan::inverse(Spectrum spectrum) const {
    std::vector<double> out(grid_.size());
    inverse(std::move(spectrum), out);
    return out;
}

double SemigroupPlan::heat_multiplier(double k2, double t, double sigma) {
    const double e = -(k2 + sigma) * t;
    return e < kFlushExponent ? 0.0 : std::exp(e);
}

namespace {

void check_time(double t, double sigma, bool strict) {
    if (strict ? !(t > 0.0) : !(t >= 0.0)) {
        throw InvalidParameter(strict ? "semigroup derivative needs t > 0" : "semigroup time must be >= 0");
    }
    if (!(sigma >= 0.0)) throw InvalidParameter("decay shift sigma must be >= 0");
}

}  // namespace

Field SemigroupPlan::apply_semigroup(const Field& f, double t, double sigma) const {
    require_same_grid(grid_, f.grid(), "apply_semigroup");
    check_time(t, sigma, false);
    if (t == 0.0) return f;
    Spectrum s = forward(f.values());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] *= heat_multiplier(k2_[j], t, sigma);
    return Field(grid_, inverse(std::move(s)));
}

VectorField SemigroupPlan::apply_semigroup_grad(const Field& f, double t, double sigma) const {
    require_same_grid(grid_, f.grid(), "apply_semigroup_grad");
    check_time(t, sigma, true);
    const Spectrum s = forward(f.values());
    VectorField out(grid_);
    for (int d = 0; d < grid_.dim(); ++d) {
        Spectrum c(s.size());
        const auto& kd = kd_[static_cast<std::size_t>(d)];
        for (std::size_t j = 0; j < s.size(); ++j) {
            c[j] = std::complex<double>(0.0, kd[j] * heat_multiplier(k2_[j], t, sigma)) * s[j];
        }
        inverse(std::move(c), out.component(d));
    }
    return out;
}

Field SemigroupPlan::apply_semigroup_div(const VectorField& w, double t, double sigma) const {
    require_same_grid(grid_, w.grid(), "apply_semigroup_div");
    check_time(t, sigma, true);
    Spectrum acc(spectral_size());
    for (int d = 0; d < grid_.dim(); ++d) {
        const Spectrum s = forward(w.component(d));
        const auto& kd = kd_[static_cast<std::size_t>(d)];
        for (std::size_t j = 0; j < s.size(); ++j) acc[j] += std::complex<double>(0.0, kd[j]) * s[j];
    }
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] *= heat_multiplier(k2_[j], t, sigma);
    return Field(grid_, inverse(std::move(acc)));
}

VectorField SemigroupPlan::gradient(const Field& f) const {
    require_same_grid(grid_, f.grid(), "gradient");
    const Spectrum s = forward(f.values());
    VectorField out(grid_);
    for (int d = 0; d < grid_.dim(); ++d) {
        Spectrum c(s.size());
        const auto& kd = kd_[static_cast<std::size_t>(d)];
        for (std::size_t j = 0; j < s.size(); ++j) c[j] = std::complex<double>(0.0, kd[j]) * s[j];
        inverse(std::move(c), out.component(d));
    }
    return out;
}

Field SemigroupPlan::laplacian(const Field& f) const {
    require_same_grid(grid_, f.grid(), "laplacian");
    Spectrum s = forward(f.values());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] *= -k2_[j];
    return Field(grid_, inverse(std::move(s)));
}

void SemigroupPlan::dealias(Spectrum& spectrum) const {
    for (std::size_t j = 0; j < spectrum.size(); ++j)
        if (!keep_[j]) spectrum[j] = 0.0;
}

VectorField gradient(const Field& f) { return SemigroupPlan(f.grid()).gradient(f); }
Field laplacian(const Field& f) { return SemigroupPlan(f.grid()).laplacian(f); }

GradientEnvelope measure_gradient_envelope(const SemigroupPlan& plan, std::span<const double> times,
                                           double sigma, int fields, std::uint64_t seed) {
    GradientEnvelope env;
    env.fields = fields;
    env.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < fields; ++i) {
        Field f(plan.grid());
        for (double& x : f.values()) x = unit(rng);
        const double norm = f.sup_norm();
        for (double& x : f.values()) x /= norm;
        for (double t : times) {
            const double c = plan.apply_semigroup_grad(f, t, sigma).sup_norm() * std::sqrt(t) * std::exp(sigma * t);
            if (c > env.constant) {
                env.constant = c;
                env.worst_t = t;
            }
        }
    }
    return env;
}

}  // namespace chemolab
