#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "chemolab/core_types.hpp"

namespace chemolab {

using Spectrum = std::vector<std::complex<double>>;

/// Fourier-multiplier machinery for the analytic semigroup e^{t(Δ−σI)} on the
/// periodic grid. Immutable after construction; every call allocates its own
/// scratch, so one plan may be shared by concurrent callers.
class SemigroupPlan {
public:
    explicit SemigroupPlan(const Grid& grid);
    ~SemigroupPlan();
    SemigroupPlan(const SemigroupPlan&) = delete;
    SemigroupPlan& operator=(const SemigroupPlan&) = delete;

    const Grid& grid() const { return grid_; }

    /// Number of stored (half-complex) modes.
    std::size_t spectral_size() const { return k2_.size(); }

    /// |k|² of stored mode j.
    double k2(std::size_t j) const { return k2_[j]; }
    /// Wavenumber along `axis` used for first derivatives (Nyquist entry zeroed).
    double k_deriv(int axis, std::size_t j) const { return kd_[static_cast<std::size_t>(axis)][j]; }
    /// Whether mode j survives the 2/3 dealiasing truncation.
    bool dealias_keep(std::size_t j) const { return keep_[j] != 0; }
    /// Per-axis wavenumbers 2πm/L for m in FFT order.
    std::span<const double> wavenumbers() const { return k_axis_; }

    Spectrum forward(std::span<const double> values) const;
    /// Inverse transform including the 1/size normalization.
    void inverse(Spectrum spectrum, std::span<double> out) const;
    std::vector<double> inverse(Spectrum spectrum) const;

    /// exp(−(|k|²+σ)t) with values under 1e−300 flushed to zero.
    static double heat_multiplier(double k2, double t, double sigma);

    Field apply_semigroup(const Field& f, double t, double sigma) const;
    /// ∇ e^{t(Δ−σI)} f, t > 0.
    VectorField apply_semigroup_grad(const Field& f, double t, double sigma) const;
    /// e^{t(Δ−σI)} ∇·w, t > 0.
    Field apply_semigroup_div(const VectorField& w, double t, double sigma) const;

    VectorField gradient(const Field& f) const;
    Field laplacian(const Field& f) const;

    /// Zeroes every mode outside the 2/3 band in place.
    void dealias(Spectrum& spectrum) const;

private:
    struct FftwPlans;

    Grid grid_;
    std::vector<double> k_axis_;
    std::vector<double> k2_;
    std::vector<std::vector<double>> kd_;
    std::vector<std::uint8_t> keep_;
    std::unique_ptr<FftwPlans> plans_;
};

/// Spectral derivatives on the grid of `f` (builds a throwaway plan).
VectorField gradient(const Field& f);
Field laplacian(const Field& f);

/// Result of an empirical sweep for the smoothing constant of ∇e^{t(Δ−σI)}.
struct GradientEnvelope {
    double constant = 0.0;  // max over fields and t of ‖∇e^{t(Δ−σI)}f‖∞ √t e^{σt} / ‖f‖∞
    double worst_t = 0.0;
    int fields = 0;
    std::uint64_t seed = 0;
};

/// Sweeps random unit-sup-norm fields (values uniform in [−1, 1]) across `times`.
GradientEnvelope measure_gradient_envelope(const SemigroupPlan& plan, std::span<const double> times,
                                           double sigma, int fields, std::uint64_t seed);

}  // namespace chemolab
