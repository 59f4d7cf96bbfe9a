#include "chemolab/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "chemolab/imex.hpp"
#include "chemolab/initial_conditions.hpp"
#include "chemolab/spectral.hpp"

namespace chemolab {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

constexpr std::array<double, 4> kEnvelopeTimes = {1e-3, 1e-2, 1e-1, 1.0};
constexpr int kEnvelopeFields = 16;
constexpr std::uint64_t kEnvelopeSeed = 20240607;

}  // namespace

bool RunResult::all_pass() const {
    return !diverged && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

int RunResult::exit_code() const {
    if (diverged) return kExitDiverged;
    return all_pass() ? kExitOk : kExitCheckFailed;
}

CalibrationConstants resolve_calibration(const ExperimentConfig& c) {
    double c_grad = 0.0;
    std::string source;
    if (c.calibration.c_grad) {
        c_grad = *c.calibration.c_grad;
        source = "config";
    } else {
        const SemigroupPlan plan(c.make_grid());
        const auto env = measure_gradient_envelope(plan, kEnvelopeTimes, 0.0, kEnvelopeFields, kEnvelopeSeed);
        c_grad = env.constant;
        std::ostringstream os;
        os << "measured: max over " << env.fields << " random unit fields (seed " << env.seed
           << ") and t in {1e-3,1e-2,1e-1,1} of |grad e^{t Laplacian} f| sqrt(t)";
        source = os.str();
    }
    auto cal = CalibrationConstants::defaults(c.params.a, c.params.dim, c_grad, source);
    if (c.calibration.c2) {
        cal.c2 = *c.calibration.c2;
        cal.c2_source = "config";
    }
    cal.c_generic = c.calibration.c_generic;
    cal.beta = c.calibration.beta;
    cal.gamma = c.calibration.gamma;
    cal.validate();
    return cal;
}

RunResult execute(const ExperimentConfig& config) {
    config.validate();
    RunResult r;
    r.config = config;
    const Params& p = config.params;
    r.calibration = resolve_calibration(config);
    r.constants = compute_constants(p, r.calibration);
    r.existence = validate_params(p, ValidationMode::existence);
    r.convergence = validate_params(p, ValidationMode::convergence, r.constants.K);

    const Grid grid = config.make_grid();
    const SimState s0(0.0, make_field(grid, config.u0), make_field(grid, config.v0), p);
    const ImexStepper stepper(grid);
    try {
        stepper.integrate(s0, config.step, [&](const DiagnosticsRecord& rec) { r.series.push_back(rec); });
    } catch (const PositivityViolation& e) {
        r.diverged = true;
        r.divergence_time = e.time;
        r.divergence_message = e.what();
    } catch (const Divergence& e) {
        r.diverged = true;
        r.divergence_time = e.time;
        r.divergence_message = e.what();
    }
    if (r.diverged) return r;

    const CheckSpec& ck = config.checks;
    const double min_span = 2.0 / std::min(p.a, p.lambda);
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            r.verdicts.push_back(body());
        } catch (const Error& e) {
            Verdict v;
            v.check = name;
            v.pass = false;
            v.detail = e.what();
            r.verdicts.push_back(v);
        }
    };

    if (ck.eventual_bound) {
        guarded("eventual_bound", [&] {
            std::optional<double> target;
            switch (ck.bound_target.kind) {
                case BoundTarget::Kind::refined: target = r.constants.bound_refined; break;
                case BoundTarget::Kind::general: target = r.constants.bound_general; break;
                case BoundTarget::Kind::value: target = ck.bound_target.value; break;
            }
            if (!target) throw Error("bound undefined: b <= N*mu*chi/4");
            return check_eventual_bound(r.series, ck.bound_quantity, *target, ck.bound_transient_fraction,
                                        ck.bound_slack, min_span);
        });
    }
    if (ck.lyapunov) {
        guarded("lyapunov", [&] {
            if (!r.constants.lyapunov_bound) throw Error("comparison bound undefined: b <= N*mu*chi/4");
            const double initial = r.series.front().lyapunov_sup;
            const double ceiling_base = std::max(initial, *r.constants.lyapunov_bound);
            Verdict v;
            v.check = "lyapunov(lyapunov_sup)";
            v.target = ceiling_base;
            v.slack = ck.lyapunov_slack;
            v.measured = 0.0;
            double worst_t = 0.0;
            for (const auto& rec : r.series) {
                if (rec.lyapunov_sup > v.measured) {
                    v.measured = rec.lyapunov_sup;
                    worst_t = rec.t;
                }
            }
            v.pass = v.measured <= ceiling_base * (1.0 + v.slack);
            std::ostringstream os;
            os << "max over all records " << v.measured << " at t=" << worst_t << " vs ceiling "
               << ceiling_base * (1.0 + v.slack);
            v.detail = os.str();
            return v;
        });
    }
    if (ck.persistence) {
        guarded("persistence", [&] {
            return check_persistence(r.series, ck.persistence_floor, PersistenceContext{p, r.calibration.c2})
                .verdict;
        });
    }
    ConvergenceCheckConfig cc;
    cc.tol_final = ck.convergence_tol_final;
    cc.min_r2 = ck.convergence_min_r2;
    try {
        auto cv = check_convergence(r.series, p, cc, &r.convergence);
        if (cv.fit.points >= 2) r.fit = cv.fit;
        if (ck.convergence) r.verdicts.push_back(cv.verdict);
    } catch (const Error& e) {
        if (ck.convergence) {
            Verdict v;
            v.check = "convergence";
            v.detail = e.what();
            r.verdicts.push_back(v);
        }
    }
    return r;
}

std::string diagnostics_csv(const Series& series) {
    std::string out = kDiagnosticsHeader;
    out += '\n';
    for (const auto& r : series) {
        const double row[] = {r.t, r.sup_u, r.inf_u, r.sup_v, r.sup_grad_v, r.sup_lap_v, r.lyapunov_sup, r.err_u, r.err_v};
        for (std::size_t i = 0; i < std::size(row); ++i) {
            if (i) out += ',';
            out += fmt(row[i]);
        }
        out += '\n';
    }
    return out;
}

Series parse_diagnostics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kDiagnosticsHeader) throw ConfigError("diagnostics CSV has a bad header");
    Series s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) throw ConfigError("diagnostics CSV row has " + std::to_string(cells.size()) + " cells");
        double v[9];
        for (std::size_t i = 0; i < 9; ++i) {
            try {
                std::size_t used = 0;
                v[i] = std::stod(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("diagnostics CSV has a non-numeric cell '" + cells[i] + "'");
            }
        }
        s.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
    }
    return s;
}

std::string constants_json(const RunResult& r) {
    const auto& p = r.config.params;
    const auto& c = r.constants;
    const auto& cal = r.calibration;
    json j;
    j["params"] = {{"chi", p.chi}, {"a", p.a}, {"b", p.b}, {"lambda", p.lambda}, {"mu", p.mu}, {"dim", p.dim}};
    j["domain"] = {{"extent", r.config.grid.extent},
                   {"points", r.config.grid.points},
                   {"spacing", r.config.grid.extent / static_cast<double>(r.config.grid.points)}};
    j["theta"] = c.theta;
    j["bound_general"] = optional_number(c.bound_general);
    j["bound_refined"] = optional_number(c.bound_refined);
    j["lyapunov_bound"] = optional_number(c.lyapunov_bound);
    j["steady_u"] = c.steady_u;
    j["steady_v"] = c.steady_v;
    j["theta0"] = c.theta0;
    j["K"] = c.K;
    j["L0_min"] = c.L0_min;
    j["L0"] = c.L0;
    j["lambda0"] = c.lambda0;
    j["calibration"] = {
        {"c_grad", {{"value", cal.c_grad}, {"source", cal.c_grad_source}}},
        {"c_div", {{"value", cal.c_div}, {"source", "N/sqrt(pi)"}}},
        {"c2", {{"value", cal.c2}, {"source", cal.c2_source}}},
        {"c_generic", {{"value", cal.c_generic}, {"source", "config"}}},
        {"beta", cal.beta},
        {"gamma", cal.gamma},
    };
    j["validation"] = {
        {"existence_threshold", r.existence.existence_threshold},
        {"existence_ok", r.existence.existence_ok},
        {"lambda_ok", r.convergence.lambda_ok},
        {"convergence_threshold", r.convergence.convergence_threshold},
        {"convergence_ok", r.convergence.convergence_ok},
    };
    return j.dump(2) + "\n";
}

std::string verdicts_json(const RunResult& r) {
    json j;
    j["status"] = r.diverged ? "diverged" : "completed";
    j["divergence_time"] = r.diverged ? json(r.divergence_time) : json(nullptr);
    j["divergence_message"] = r.diverged ? json(r.divergence_message) : json(nullptr);
    j["existence_advisory"] = r.existence.summary();
    j["convergence_advisory"] = r.convergence.summary();
    json list = json::array();
    for (const auto& v : r.verdicts) {
        list.push_back({{"check", v.check},
                        {"pass", v.pass},
                        {"measured", v.measured},
                        {"target", v.target},
                        {"slack", v.slack},
                        {"transient", v.transient},
                        {"detail", v.detail}});
    }
    j["verdicts"] = list;
    if (r.fit) {
        j["decay_fit"] = {{"alpha", r.fit->alpha},
                          {"r_squared", r.fit->r_squared},
                          {"t_begin", r.fit->window.t_begin},
                          {"t_end", r.fit->window.t_end},
                          {"points", r.fit->points}};
    } else {
        j["decay_fit"] = nullptr;
    }
    j["all_pass"] = r.all_pass();
    j["exit_code"] = r.exit_code();
    return j.dump(2) + "\n";
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "diagnostics.csv", diagnostics_csv(r.series));
    write_file(dir / "constants.json", constants_json(r));
    write_file(dir / "verdicts.json", verdicts_json(r));
    write_file(dir / "config.ini", to_text(r.config));
}

int run_command(const std::filesystem::path& config_path, const CommandOptions& opts, std::ostream& log) {
    ExperimentConfig config;
    try {
        config = load_experiment(config_path);
        if (opts.seed) config.override_seed(*opts.seed);
        if (opts.out) config.output_dir = opts.out->string();
        config.validate();
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    const RunResult r = execute(config);
    write_outputs(r, config.output_dir);
    if (r.diverged) {
        log << "solver diverged at t=" << r.divergence_time << ": " << r.divergence_message << "\n";
    }
    for (const auto& v : r.verdicts) {
        if (!v.pass) log << "check failed: " << v.check << " (" << v.detail << ")\n";
    }
    return r.exit_code();
}

namespace {

const char* kSummaryFixedHeader =
    "chi,a,b,lambda,mu,dim,theta,existence_threshold,K,convergence_threshold,status,divergence_time,final_t,"
    "final_sup_u,final_inf_u,final_err_u,final_err_v,alpha,r_squared,all_pass,verdicts";

std::string point_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "point_%04zu", i);
    return buf;
}

std::string summary_row(std::size_t index, const std::vector<std::pair<std::string, std::string>>& axes,
                        const RunResult* r, const std::string& failure) {
    std::string row = point_name(index);
    for (const auto& [k, v] : axes) row += "," + v;
    if (!r) {
        row += ",,,,,,,,,,,error,,,,,,,,,false," + failure;
        return row;
    }
    const auto& p = r->config.params;
    row += "," + fmt(p.chi) + "," + fmt(p.a) + "," + fmt(p.b) + "," + fmt(p.lambda) + "," + fmt(p.mu) + "," +
           std::to_string(p.dim);
    row += "," + fmt(r->constants.theta) + "," + fmt(r->existence.existence_threshold) + "," + fmt(r->constants.K) +
           "," + fmt(r->convergence.convergence_threshold);
    row += std::string(",") + (r->diverged ? "diverged" : "completed");
    row += "," + (r->diverged ? fmt(r->divergence_time) : std::string());
    if (!r->series.empty()) {
        const auto& last = r->series.back();
        row += "," + fmt(last.t) + "," + fmt(last.sup_u) + "," + fmt(last.inf_u) + "," + fmt(last.err_u) + "," +
               fmt(last.err_v);
    } else {
        row += ",,,,,";
    }
    if (r->fit) {
        row += "," + fmt(r->fit->alpha) + "," + fmt(r->fit->r_squared);
    } else {
        row += ",,";
    }
    row += std::string(",") + (r->all_pass() ? "true" : "false") + ",";
    for (std::size_t i = 0; i < r->verdicts.size(); ++i) {
        if (i) row += ';';
        auto name = r->verdicts[i].check;
        std::replace(name.begin(), name.end(), ',', '+');
        row += name + ":" + (r->verdicts[i].pass ? "PASS" : "FAIL");
    }
    return row;
}

}  // namespace

int sweep_command(const std::filesystem::path& config_path, const CommandOptions& opts, std::ostream& log) {
    SweepConfig sweep;
    try {
        sweep = load_sweep(config_path);
        if (opts.out) sweep.output_dir = opts.out->string();
        if (opts.workers) {
            if (*opts.workers < 0) throw ConfigError("--workers must be >= 0");
            sweep.workers = *opts.workers;
        }
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const std::size_t n = sweep.point_count();
    const std::filesystem::path root = sweep.output_dir;
    std::filesystem::create_directories(root);
    write_file(root / "sweep.ini", read_file(config_path));

    std::vector<std::string> rows(n);
    std::vector<int> codes(n, kExitOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto axes = sweep.point_values(i);
            try {
                ExperimentConfig c = sweep.point_config(i);
                if (opts.seed) c.override_seed(*opts.seed);
                c.output_dir = (root / point_name(i)).string();
                const RunResult r = execute(c);
                write_outputs(r, c.output_dir);
                rows[i] = summary_row(i, axes, &r, {});
                codes[i] = r.exit_code();
            } catch (const std::exception& e) {
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), ',', ';');
                std::replace(msg.begin(), msg.end(), '\n', ' ');
                rows[i] = summary_row(i, axes, nullptr, msg);
                codes[i] = kExitCheckFailed;
            }
        }
    };
    unsigned workers = sweep.workers > 0 ? static_cast<unsigned>(sweep.workers) : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::string summary = "point";
    for (const auto& a : sweep.axes) summary += "," + a.key;
    summary += ",";
    summary += kSummaryFixedHeader;
    summary += "\n";
    for (const auto& row : rows) summary += row + "\n";
    write_file(root / "sweep_summary.csv", summary);

    int code = kExitOk;
    for (int c : codes) {
        if (c == kExitDiverged) code = kExitDiverged;
        else if (c != kExitOk && code == kExitOk) code = kExitCheckFailed;
    }
    log << "sweep: " << n << " points, " << workers << " workers, summary in " << (root / "sweep_summary.csv").string()
        << "\n";
    return code;
}

namespace {

struct RunDigest {
    std::string status;  // PASS, FAIL or DIVERGED(t=…)
    std::vector<std::string> failed;
};

RunDigest digest_run(const std::filesystem::path& dir) {
    json j;
    try {
        j = json::parse(read_file(dir / "verdicts.json"));
    } catch (const json::exception& e) {
        throw ConfigError("corrupt verdicts.json in '" + dir.string() + "': " + e.what());
    }
    RunDigest d;
    try {
        if (j.at("status").get<std::string>() == "diverged") {
            std::ostringstream os;
            os << "DIVERGED(t=" << j.at("divergence_time").get<double>() << ")";
            d.status = os.str();
            return d;
        }
        for (const auto& v : j.at("verdicts")) {
            if (!v.at("pass").get<bool>()) d.failed.push_back(v.at("check").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError("verdicts.json in '" + dir.string() + "' does not match the schema: " + e.what());
    }
    d.status = d.failed.empty() ? "PASS" : "FAIL";
    return d;
}

void append_long(std::string& out, const std::string& prefix, const Series& s) {
    static const std::array<Quantity, 8> qs = {Quantity::sup_u,     Quantity::inf_u,        Quantity::sup_v,
                                               Quantity::sup_grad_v, Quantity::sup_lap_v,    Quantity::lyapunov_sup,
                                               Quantity::err_u,     Quantity::err_v};
    for (Quantity q : qs) {
        for (const auto& r : s) out += prefix + name_of(q) + "," + fmt(r.t) + "," + fmt(value_of(r, q)) + "\n";
    }
}

std::string aligned(const std::vector<std::vector<std::string>>& table) {
    std::vector<std::size_t> width;
    for (const auto& row : table) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream os;
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i + 1 == row.size()) {
                os << row[i];
            } else {
                os << std::left << std::setw(static_cast<int>(width[i] + 2)) << row[i];
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace

int report_command(const std::filesystem::path& dir, const CommandOptions& opts, std::ostream& out, std::ostream& log) {
    try {
        if (!std::filesystem::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
        std::string long_csv = "series,t,value\n";
        std::vector<std::vector<std::string>> table;

        if (std::filesystem::exists(dir / "sweep_summary.csv")) {
            std::istringstream in(read_file(dir / "sweep_summary.csv"));
            std::string line;
            if (!std::getline(in, line)) throw ConfigError("empty sweep_summary.csv");
            const auto header = split_csv_line(line);
            const auto fixed = split_csv_line(kSummaryFixedHeader);
            if (header.size() < fixed.size() + 1 || header.front() != "point") {
                throw ConfigError("sweep_summary.csv has a bad header");
            }
            const std::size_t n_axes = header.size() - fixed.size() - 1;
            std::vector<std::string> head{"point"};
            for (std::size_t k = 0; k < n_axes; ++k) head.push_back(header[1 + k]);
            head.insert(head.end(), {"theta", "alpha", "status"});
            table.push_back(head);
            std::size_t rows = 0;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto cells = split_csv_line(line);
                if (cells.size() != header.size()) throw ConfigError("sweep_summary.csv row has the wrong width");
                const std::string& name = cells[0];
                std::vector<std::string> row{name};
                for (std::size_t k = 0; k < n_axes; ++k) row.push_back(cells[1 + k]);
                const std::size_t base = 1 + n_axes;
                row.push_back(cells[base + 6]);
                row.push_back(cells[base + 17].empty() ? "-" : cells[base + 17]);
                const auto point_dir = dir / name;
                if (cells[base + 10] == "error") {
                    row.push_back("ERROR");
                } else {
                    const auto d = digest_run(point_dir);
                    row.push_back(d.status);
                    append_long(long_csv, name + "/", parse_diagnostics_csv(read_file(point_dir / "diagnostics.csv")));
                }
                table.push_back(row);
                ++rows;
            }
            if (rows == 0) throw ConfigError("sweep_summary.csv has no rows");
        } else if (std::filesystem::exists(dir / "diagnostics.csv")) {
            const auto series = parse_diagnostics_csv(read_file(dir / "diagnostics.csv"));
            append_long(long_csv, "", series);
            json j;
            try {
                j = json::parse(read_file(dir / "verdicts.json"));
            } catch (const json::exception& e) {
                throw ConfigError(std::string("corrupt verdicts.json: ") + e.what());
            }
            const auto d = digest_run(dir);
            table.push_back({"check", "result", "measured", "target", "slack"});
            for (const auto& v : j.at("verdicts")) {
                table.push_back({v.at("check").get<std::string>(), v.at("pass").get<bool>() ? "PASS" : "FAIL",
                                 fmt(v.at("measured").get<double>()), fmt(v.at("target").get<double>()),
                                 fmt(v.at("slack").get<double>())});
            }
            table.push_back({"run", d.status, "", "", ""});
        } else {
            throw ConfigError("'" + dir.string() + "' holds no run or sweep outputs");
        }

        const std::filesystem::path target = opts.out.value_or(dir);
        std::filesystem::create_directories(target);
        const std::string summary = aligned(table);
        write_file(target / "plot_data.csv", long_csv);
        write_file(target / "summary.txt", summary);
        out << summary;
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "report error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const json::exception& e) {
        log << "report error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace chemolab
