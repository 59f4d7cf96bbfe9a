#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemolab/config.hpp"
#include "chemolab/constants.hpp"
#include "chemolab/harness.hpp"

namespace chemolab {

/// Process exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 2, kExitDiverged = 3, kExitConfigError = 4 };

inline constexpr const char* kDiagnosticsHeader =
    "t,sup_u,inf_u,sup_v,sup_grad_v,sup_lap_v,lyapunov_sup,err_u,err_v";

struct RunResult {
    ExperimentConfig config;
    Series series;
    CalibrationConstants calibration;
    TheoryConstants constants;
    ValidationReport existence;
    ValidationReport convergence;
    std::vector<Verdict> verdicts;
    std::optional<DecayFit> fit;  // err_u + err_v decay, when the series admits one
    bool diverged = false;
    double divergence_time = 0.0;
    std::string divergence_message;

    bool all_pass() const;
    int exit_code() const;
};

/// Calibration for a run: explicit values from the config, otherwise a
/// gradient-envelope sweep on the run grid and c2 = a.
CalibrationConstants resolve_calibration(const ExperimentConfig& c);

/// Runs the experiment in memory; solver failures are reported in the result.
RunResult execute(const ExperimentConfig& config);

std::string diagnostics_csv(const Series& series);
Series parse_diagnostics_csv(const std::string& text);
std::string constants_json(const RunResult& r);
std::string verdicts_json(const RunResult& r);

/// Writes diagnostics.csv, constants.json, verdicts.json and config.ini.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

struct CommandOptions {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

int run_command(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& log);
int sweep_command(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& log);
int report_command(const std::filesystem::path& dir, const CommandOptions& opts, std::ostream& out,
                   std::ostream& log);

}  // namespace chemolab
