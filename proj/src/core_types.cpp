#include "chemolab/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemolab {

void Params::validate() const {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw InvalidParameter(std::string("coefficient ") + name + " must be positive and finite");
        }
    };
    positive(chi, "chi");
    positive(a, "a");
    positive(b, "b");
    positive(lambda, "lambda");
    positive(mu, "mu");
    if (dim < 1 || dim > 3) throw InvalidParameter("dim must be 1, 2 or 3");
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "existence: b > N*mu*chi/4 = " << existence_threshold << " -> " << (existence_ok ? "yes" : "no");
    if (mode == ValidationMode::convergence) {
        os << "; lambda >= a/2 -> " << (lambda_ok ? "yes" : "no") << "; b > K*chi*mu = "
           << convergence_threshold << " (K=" << K << ") -> " << (convergence_ok ? "yes" : "no");
    }
    return os.str();
}

ValidationReport validate_params(const Params& p, ValidationMode mode, double K) {
    p.validate();
    ValidationReport r;
    r.mode = mode;
    r.existence_threshold = p.dim * p.mu * p.chi / 4.0;
    r.existence_ok = p.b > r.existence_threshold;
    if (mode == ValidationMode::convergence) {
        if (!(K > 0.0)) throw InvalidParameter("convergence validation needs K > 0");
        r.K = K;
        r.lambda_ok = p.lambda >= p.a / 2.0;
        r.convergence_threshold = K * p.chi * p.mu;
        r.convergence_ok = p.b > r.convergence_threshold;
    }
    return r;
}

Grid::Grid(int dim, double extent, std::size_t points) : dim_(dim), extent_(extent), points_(points) {
    if (dim < 1 || dim > 3) throw InvalidParameter("grid dim must be 1, 2 or 3");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw InvalidParameter("grid extent must be positive");
    if (points < 8 || (points & (points - 1)) != 0) {
        throw InvalidParameter("grid points must be a power of two >= 8");
    }
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= points;
}

std::vector<std::size_t> Grid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim_));
    for (int d = dim_ - 1; d >= 0; --d) {
        idx[static_cast<std::size_t>(d)] = flat % points_;
        flat /= points_;
    }
    return idx;
}

void require_same_grid(const Grid& lhs, const Grid& rhs, const char* what) {
    if (!(lhs == rhs)) throw GridMismatch(std::string("grid mismatch in ") + what);
}

Field::Field(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GridMismatch("field value count does not match grid");
}

double Field::sup_norm() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::mean() const {
    double s = 0.0;
    for (double x : values_) s += x;
    return s / static_cast<double>(values_.size());
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void Field::check(bool nonnegative, double neg_tol) const {
    if (!all_finite()) throw InvalidParameter("field has non-finite values");
    if (nonnegative && min() < -neg_tol) throw InvalidParameter("field has negative values below tolerance");
}

VectorField::VectorField(Grid grid)
    : grid_(grid),
      components_(static_cast<std::size_t>(grid.dim()), std::vector<double>(grid.size(), 0.0)) {}

double VectorField::sup_norm() const {
    double m = 0.0;
    for (const auto& c : components_)
        for (double x : c) m = std::max(m, std::abs(x));
    return m;
}

double VectorField::sup_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double s = 0.0;
        for (const auto& c : components_) s += c[i] * c[i];
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

bool VectorField::all_finite() const {
    for (const auto& c : components_)
        for (double x : c)
            if (!std::isfinite(x)) return false;
    return true;
}

SimState::SimState(double t, Field u, Field v, Params params)
    : t_(t), u_(std::move(u)), v_(std::move(v)), params_(params) {
    if (!(t >= 0.0)) throw InvalidParameter("state time must be nonnegative");
    require_same_grid(u_.grid(), v_.grid(), "SimState(u, v)");
    if (u_.grid().dim() != params_.dim) throw GridMismatch("grid dimension differs from params.dim");
    params_.validate();
}

}  // namespace chemolab
