#include "chemolab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chemolab {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Quantity quantity_from_string(const std::string& s) {
    for (Quantity q : {Quantity::sup_u, Quantity::inf_u, Quantity::sup_v, Quantity::sup_grad_v, Quantity::sup_lap_v,
                       Quantity::lyapunov_sup, Quantity::err_u, Quantity::err_v, Quantity::err_sum}) {
        if (s == name_of(q)) return q;
    }
    throw ConfigError("unknown quantity '" + s + "'");
}

/// Typed view over one INI section; remembers which keys were consumed so
/// leftovers can be rejected.
class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        const auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return trim(it->second.data());
    }
    double number(const std::string& key, double fallback) {
        const auto r = raw(key);
        return r ? parse_double(name_ + "." + key, *r) : fallback;
    }
    std::optional<double> optional_number(const std::string& key) {
        const auto r = raw(key);
        if (!r || *r == "auto" || *r == "none") return std::nullopt;
        return parse_double(name_ + "." + key, *r);
    }
    long long integer(const std::string& key, long long fallback) {
        const auto r = raw(key);
        return r ? parse_int(name_ + "." + key, *r) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const auto r = raw(key);
        return r ? *r : fallback;
    }
    void finish() const {
        if (!tree_) return;
        for (const auto& [key, child] : *tree_) {
            if (!child.empty()) throw ConfigError("section [" + name_ + "] has a nested entry '" + key + "'");
            if (!used_.count(key)) throw ConfigError("unknown key '" + key + "' in section [" + name_ + "]");
        }
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

const std::set<std::string> kSections = {"params", "grid", "u0", "v0", "step", "checks", "calibration", "output"};

Profile read_profile(Section& s) {
    Profile p;
    p.kind = profile_kind_from_string(s.text("kind", "constant"));
    p.base = s.number("base", 0.0);
    p.amplitude = s.number("amplitude", 0.0);
    p.mode = static_cast<int>(s.integer("mode", 1));
    p.low = s.number("low", 0.0);
    p.high = s.number("high", 1.0);
    p.modes = static_cast<int>(s.integer("modes", 8));
    p.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
    return p;
}

ExperimentConfig from_tree(const pt::ptree& root) {
    for (const auto& [name, child] : root) {
        if (!kSections.count(name)) throw ConfigError("unknown section [" + name + "]");
        if (child.empty() && !child.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    }
    auto section = [&](const char* name) {
        const auto it = root.find(name);
        return Section(it == root.not_found() ? nullptr : &it->second, name);
    };

    ExperimentConfig c;
    {
        auto s = section("params");
        c.params.chi = s.number("chi", 1.0);
        c.params.a = s.number("a", 1.0);
        c.params.b = s.number("b", 1.0);
        c.params.lambda = s.number("lambda", 1.0);
        c.params.mu = s.number("mu", 1.0);
        c.params.dim = static_cast<int>(s.integer("dim", 1));
        s.finish();
    }
    {
        auto s = section("grid");
        c.grid.extent = s.number("extent", c.grid.extent);
        const auto pts = s.integer("points", 256);
        if (pts <= 0) throw ConfigError("grid.points must be positive");
        c.grid.points = static_cast<std::size_t>(pts);
        s.finish();
    }
    {
        auto s = section("u0");
        c.u0 = read_profile(s);
        s.finish();
    }
    {
        auto s = section("v0");
        c.v0 = read_profile(s);
        s.finish();
    }
    {
        auto s = section("step");
        c.step.dt_max = s.number("dt_max", c.step.dt_max);
        c.step.cfl_safety = s.number("cfl_safety", c.step.cfl_safety);
        c.step.neg_tol = s.number("neg_tol", c.step.neg_tol);
        c.step.t_end = s.number("t_end", c.step.t_end);
        c.step.record_every = s.number("record_every", c.step.record_every);
        s.finish();
    }
    {
        auto s = section("checks");
        for (const auto& name : split_list(s.text("run", ""))) {
            if (name == "eventual_bound") c.checks.eventual_bound = true;
            else if (name == "lyapunov") c.checks.lyapunov = true;
            else if (name == "persistence") c.checks.persistence = true;
            else if (name == "convergence") c.checks.convergence = true;
            else throw ConfigError("unknown check '" + name + "'");
        }
        c.checks.bound_quantity = quantity_from_string(s.text("bound_quantity", "sup_u"));
        const std::string target = s.text("bound_target", "refined");
        if (target == "refined") {
            c.checks.bound_target.kind = BoundTarget::Kind::refined;
        } else if (target == "general") {
            c.checks.bound_target.kind = BoundTarget::Kind::general;
        } else {
            c.checks.bound_target.kind = BoundTarget::Kind::value;
            c.checks.bound_target.value = parse_double("checks.bound_target", target);
        }
        c.checks.bound_slack = s.number("bound_slack", c.checks.bound_slack);
        c.checks.bound_transient_fraction = s.number("bound_transient_fraction", c.checks.bound_transient_fraction);
        c.checks.lyapunov_slack = s.number("lyapunov_slack", c.checks.lyapunov_slack);
        c.checks.persistence_floor = s.optional_number("persistence_floor");
        c.checks.convergence_tol_final = s.number("convergence_tol_final", c.checks.convergence_tol_final);
        c.checks.convergence_min_r2 = s.number("convergence_min_r2", c.checks.convergence_min_r2);
        s.finish();
    }
    {
        auto s = section("calibration");
        c.calibration.c_grad = s.optional_number("c_grad");
        c.calibration.c2 = s.optional_number("c2");
        c.calibration.c_generic = s.number("c_generic", c.calibration.c_generic);
        c.calibration.beta = s.number("beta", c.calibration.beta);
        c.calibration.gamma = s.number("gamma", c.calibration.gamma);
        s.finish();
    }
    {
        auto s = section("output");
        c.output_dir = s.text("dir", c.output_dir);
        s.finish();
    }
    c.validate();
    return c;
}

pt::ptree parse_tree(const std::string& text) {
    std::istringstream in(text);
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return tree;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_profile(std::ostream& os, const char* name, const Profile& p) {
    os << "[" << name << "]\n";
    os << "kind = " << to_string(p.kind) << "\n";
    os << "base = " << fmt(p.base) << "\n";
    os << "amplitude = " << fmt(p.amplitude) << "\n";
    os << "mode = " << p.mode << "\n";
    os << "low = " << fmt(p.low) << "\n";
    os << "high = " << fmt(p.high) << "\n";
    os << "modes = " << p.modes << "\n";
    os << "seed = " << p.seed << "\n\n";
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        params.validate();
        (void)make_grid();
        u0.validate();
        v0.validate();
        step.validate();
        if (!(checks.bound_slack >= 0.0) || !(checks.lyapunov_slack >= 0.0)) {
            throw ConfigError("slacks must be >= 0");
        }
        if (!(checks.bound_transient_fraction >= 0.0 && checks.bound_transient_fraction < 1.0)) {
            throw ConfigError("bound_transient_fraction must lie in [0, 1)");
        }
        if (!(checks.convergence_tol_final > 0.0)) throw ConfigError("convergence_tol_final must be positive");
        if (calibration.c_grad && !(*calibration.c_grad > 0.0)) throw ConfigError("c_grad must be positive");
        if (calibration.c2 && !(*calibration.c2 > 0.0)) throw ConfigError("c2 must be positive");
        if (!(calibration.c_generic > 0.0)) throw ConfigError("c_generic must be positive");
        if (output_dir.empty()) throw ConfigError("output dir must not be empty");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    u0.seed = seed;
    v0.seed = seed + 1;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    auto same_step = [](const StepControl& x, const StepControl& y) {
        return x.dt_max == y.dt_max && x.cfl_safety == y.cfl_safety && x.neg_tol == y.neg_tol &&
               x.t_end == y.t_end && x.record_every == y.record_every && x.eps_floor == y.eps_floor;
    };
    return params == o.params && grid == o.grid && u0 == o.u0 && v0 == o.v0 && same_step(step, o.step) &&
           checks == o.checks && calibration == o.calibration && output_dir == o.output_dir;
}

ExperimentConfig parse_experiment(const std::string& text) { return from_tree(parse_tree(text)); }

ExperimentConfig load_experiment(const std::filesystem::path& path) { return parse_experiment(read_file(path)); }

std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[params]\n";
    os << "chi = " << fmt(c.params.chi) << "\n";
    os << "a = " << fmt(c.params.a) << "\n";
    os << "b = " << fmt(c.params.b) << "\n";
    os << "lambda = " << fmt(c.params.lambda) << "\n";
    os << "mu = " << fmt(c.params.mu) << "\n";
    os << "dim = " << c.params.dim << "\n\n";
    os << "[grid]\n";
    os << "extent = " << fmt(c.grid.extent) << "\n";
    os << "points = " << c.grid.points << "\n\n";
    write_profile(os, "u0", c.u0);
    write_profile(os, "v0", c.v0);
    os << "[step]\n";
    os << "dt_max = " << fmt(c.step.dt_max) << "\n";
    os << "cfl_safety = " << fmt(c.step.cfl_safety) << "\n";
    os << "neg_tol = " << fmt(c.step.neg_tol) << "\n";
    os << "t_end = " << fmt(c.step.t_end) << "\n";
    os << "record_every = " << fmt(c.step.record_every) << "\n\n";

    os << "[checks]\n";
    std::vector<std::string> run;
    if (c.checks.eventual_bound) run.emplace_back("eventual_bound");
    if (c.checks.lyapunov) run.emplace_back("lyapunov");
    if (c.checks.persistence) run.emplace_back("persistence");
    if (c.checks.convergence) run.emplace_back("convergence");
    os << "run = ";
    for (std::size_t i = 0; i < run.size(); ++i) os << (i ? ", " : "") << run[i];
    os << "\n";
    os << "bound_quantity = " << name_of(c.checks.bound_quantity) << "\n";
    switch (c.checks.bound_target.kind) {
        case BoundTarget::Kind::refined: os << "bound_target = refined\n"; break;
        case BoundTarget::Kind::general: os << "bound_target = general\n"; break;
        case BoundTarget::Kind::value: os << "bound_target = " << fmt(c.checks.bound_target.value) << "\n"; break;
    }
    os << "bound_slack = " << fmt(c.checks.bound_slack) << "\n";
    os << "bound_transient_fraction = " << fmt(c.checks.bound_transient_fraction) << "\n";
    os << "lyapunov_slack = " << fmt(c.checks.lyapunov_slack) << "\n";
    os << "persistence_floor = " << (c.checks.persistence_floor ? fmt(*c.checks.persistence_floor) : "none") << "\n";
    os << "convergence_tol_final = " << fmt(c.checks.convergence_tol_final) << "\n";
    os << "convergence_min_r2 = " << fmt(c.checks.convergence_min_r2) << "\n\n";

    os << "[calibration]\n";
    os << "c_grad = " << (c.calibration.c_grad ? fmt(*c.calibration.c_grad) : "auto") << "\n";
    os << "c2 = " << (c.calibration.c2 ? fmt(*c.calibration.c2) : "auto") << "\n";
    os << "c_generic = " << fmt(c.calibration.c_generic) << "\n";
    os << "beta = " << fmt(c.calibration.beta) << "\n";
    os << "gamma = " << fmt(c.calibration.gamma) << "\n\n";
    os << "[output]\n";
    os << "dir = " << c.output_dir << "\n";
    return os.str();
}

std::size_t SweepConfig::point_count() const {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<std::pair<std::string, std::string>> SweepConfig::point_values(std::size_t index) const {
    std::vector<std::pair<std::string, std::string>> out(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const auto& a = axes[k];
        out[k] = {a.key, a.values[index % a.values.size()]};
        index /= a.values.size();
    }
    return out;
}

ExperimentConfig SweepConfig::point_config(std::size_t index) const {
    pt::ptree tree = parse_tree(template_text);
    for (const auto& [key, value] : point_values(index)) {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        const std::string name = key.substr(dot + 1);
        auto found = tree.find(section);
        pt::ptree& sec = found == tree.not_found() ? tree.push_back({section, pt::ptree()})->second : found->second;
        sec.put(pt::ptree::path_type(name, '/'), value);
    }
    return from_tree(tree);
}

SweepConfig load_sweep(const std::filesystem::path& path) {
    const pt::ptree tree = parse_tree(read_file(path));
    SweepConfig s;
    for (const auto& [name, child] : tree) {
        if (name != "sweep" && name != "axes") throw ConfigError("unknown sweep section [" + name + "]");
        (void)child;
    }
    const auto sweep_it = tree.find("sweep");
    Section sec(sweep_it == tree.not_found() ? nullptr : &sweep_it->second, "sweep");
    const auto tmpl = sec.raw("template");
    if (!tmpl || tmpl->empty()) throw ConfigError("sweep.template is required");
    s.template_path = path.parent_path() / *tmpl;
    s.output_dir = sec.text("output_dir", s.output_dir);
    s.workers = static_cast<int>(sec.integer("workers", 0));
    if (s.workers < 0) throw ConfigError("sweep.workers must be >= 0");
    sec.finish();
    s.template_text = read_file(s.template_path);

    const auto axes_it = tree.find("axes");
    if (axes_it != tree.not_found()) {
        for (const auto& [key, child] : axes_it->second) {
            const auto dot = key.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
                throw ConfigError("axis key '" + key + "' must look like section.key");
            }
            SweepAxis axis{key, split_list(child.data())};
            if (axis.values.empty()) throw ConfigError("axis '" + key + "' has no values");
            s.axes.push_back(std::move(axis));
        }
    }
    if (s.point_count() == 0) throw ConfigError("sweep grid is empty");
    // A point with bad values becomes an error row of the sweep; a grid in
    // which no point is valid is a configuration error.
    (void)parse_experiment(s.template_text);
    std::string first_error;
    for (std::size_t i = 0; i < s.point_count(); ++i) {
        try {
            (void)s.point_config(i);
            return s;
        } catch (const ConfigError& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    throw ConfigError("no valid sweep point: " + first_error);
}

}  // namespace chemolab
