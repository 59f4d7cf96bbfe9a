#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemolab {

// Error taxonomy. Everything the library throws derives from Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidParameter : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};

/// Coefficients of the chemotaxis system
///   u_t = Δu − χ∇·(u∇v) + u(a − bu),   v_t = Δv − λv + μu   on ℝ^N.
struct Params {
    double chi = 1.0;
    double a = 1.0;
    double b = 1.0;
    double lambda = 1.0;
    double mu = 1.0;
    int dim = 1;

    /// Throws InvalidParameter on a nonpositive coefficient or dim outside {1,2,3}.
    void validate() const;

    double steady_u() const { return a / b; }
    double steady_v() const { return mu * a / (lambda * b); }

    bool operator==(const Params&) const = default;
};

enum class ValidationMode { existence, convergence };

/// Classification of the standing hypotheses; never rejects valid coefficients.
struct ValidationReport {
    ValidationMode mode = ValidationMode::existence;
    double existence_threshold = 0.0;  // Nμχ/4
    bool existence_ok = false;         // b > Nμχ/4
    // convergence mode only
    bool lambda_ok = false;            // λ ≥ a/2
    double convergence_threshold = 0.0;  // Kχμ
    bool convergence_ok = false;       // b > Kχμ
    double K = 0.0;

    std::string summary() const;
};

/// `K` is only consulted in convergence mode (supplied by constants_lab).
ValidationReport validate_params(const Params& p, ValidationMode mode, double K = 0.0);

/// Periodic torus [0, extent)^dim sampled at points^dim nodes.
class Grid {
public:
    Grid(int dim, double extent, std::size_t points);

    int dim() const { return dim_; }
    double extent() const { return extent_; }
    std::size_t points() const { return points_; }
    double spacing() const { return extent_ / static_cast<double>(points_); }
    std::size_t size() const { return size_; }

    /// Coordinate of node index i along one axis.
    double coord(std::size_t i) const { return spacing() * static_cast<double>(i); }

    /// Row-major multi-index of a flat node index (last axis fastest).
    std::vector<std::size_t> unflatten(std::size_t flat) const;

    bool operator==(const Grid&) const = default;

private:
    int dim_;
    double extent_;
    std::size_t points_;
    std::size_t size_;
};

void require_same_grid(const Grid& lhs, const Grid& rhs, const char* what);

class Field {
public:
    explicit Field(Grid grid, double fill = 0.0);
    Field(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double sup_norm() const;
    double max() const;
    double min() const;
    double mean() const;
    bool all_finite() const;

    /// Throws InvalidParameter if any value is non-finite or, when
    /// `nonnegative`, below −neg_tol.
    void check(bool nonnegative, double neg_tol) const;

private:
    Grid grid_;
    std::vector<double> values_;
};

class VectorField {
public:
    explicit VectorField(Grid grid);

    const Grid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    std::vector<double>& component(int axis) { return components_.at(static_cast<std::size_t>(axis)); }
    const std::vector<double>& component(int axis) const {
        return components_.at(static_cast<std::size_t>(axis));
    }

    /// max_x max_i |w_i(x)|
    double sup_norm() const;
    /// max_x |w(x)| (Euclidean)
    double sup_magnitude() const;
    bool all_finite() const;

private:
    Grid grid_;
    std::vector<std::vector<double>> components_;
};

/// The pair (u, v) at time t.
class SimState {
public:
    SimState(double t, Field u, Field v, Params params);

    double t() const { return t_; }
    const Field& u() const { return u_; }
    const Field& v() const { return v_; }
    const Params& params() const { return params_; }
    const Grid& grid() const { return u_.grid(); }

private:
    double t_;
    Field u_;
    Field v_;
    Params params_;
};

}  // namespace chemolab
