#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemolab/constants.hpp"
#include "chemolab/core_types.hpp"
#include "chemolab/harness.hpp"
#include "chemolab/imex.hpp"
#include "chemolab/initial_conditions.hpp"

namespace chemolab {

struct ConfigError : Error {
    using Error::Error;
};

struct GridSpec {
    double extent = 6.283185307179586;
    std::size_t points = 256;
    bool operator==(const GridSpec&) const = default;
};

/// A bound target: "refined" (4a/(4b−Nμχ)), "general" ((2λ+a)²/(2λ(4b−Nμχ)))
/// or an explicit number.
struct BoundTarget {
    enum class Kind { refined, general, value } kind = Kind::refined;
    double value = 0.0;
    bool operator==(const BoundTarget&) const = default;
};

struct CheckSpec {
    bool eventual_bound = false;
    Quantity bound_quantity = Quantity::sup_u;
    BoundTarget bound_target;
    double bound_slack = 0.05;
    double bound_transient_fraction = 0.5;

    bool lyapunov = false;
    double lyapunov_slack = 0.05;

    bool persistence = false;
    std::optional<double> persistence_floor;

    bool convergence = false;
    double convergence_tol_final = 1e-6;
    double convergence_min_r2 = 0.99;

    bool any() const { return eventual_bound || lyapunov || persistence || convergence; }
    bool operator==(const CheckSpec&) const = default;
};

struct CalibrationSpec {
    std::optional<double> c_grad;  // nullopt = measure on the run grid
    std::optional<double> c2;      // nullopt = a
    double c_generic = 1.0;
    double beta = 0.4;
    double gamma = 1.3;
    bool operator==(const CalibrationSpec&) const = default;
};

struct ExperimentConfig {
    Params params;
    GridSpec grid;
    Profile u0;
    Profile v0;
    StepControl step;
    CheckSpec checks;
    CalibrationSpec calibration;
    std::string output_dir = "out";

    Grid make_grid() const { return Grid(params.dim, grid.extent, grid.points); }
    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
    /// Applies a seed override to every stochastic generator (u: seed, v: seed + 1).
    void override_seed(std::uint64_t seed);

    bool operator==(const ExperimentConfig&) const;
};

ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment(const std::filesystem::path& path);
/// Canonical text form; parse_experiment(to_text(c)) == c.
std::string to_text(const ExperimentConfig& c);

/// A sweep: a template experiment and axes whose Cartesian product gives the points.
struct SweepAxis {
    std::string key;  // "section.key" of the experiment format, e.g. "params.b"
    std::vector<std::string> values;
};

struct SweepConfig {
    std::filesystem::path template_path;
    std::string template_text;
    std::vector<SweepAxis> axes;
    std::string output_dir = "sweep_out";
    int workers = 0;  // 0 = hardware concurrency

    std::size_t point_count() const;
    /// Axis values of point `index` (last axis fastest).
    std::vector<std::pair<std::string, std::string>> point_values(std::size_t index) const;
    ExperimentConfig point_config(std::size_t index) const;
};

SweepConfig load_sweep(const std::filesystem::path& path);

}  // namespace chemolab
