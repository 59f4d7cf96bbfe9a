#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chemolab/constants.hpp"
#include "chemolab/imex.hpp"
#include "chemolab/mild_solver.hpp"
#include "chemolab/runner.hpp"

namespace py = pybind11;
using namespace chemolab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid grid_of(const Array& a, double extent) {
    if (a.ndim() < 1 || a.ndim() > 3) throw InvalidParameter("arrays must have 1 to 3 dimensions");
    const auto n = static_cast<std::size_t>(a.shape(0));
    for (py::ssize_t d = 1; d < a.ndim(); ++d)
        if (static_cast<std::size_t>(a.shape(d)) != n) throw GridMismatch("arrays must have equal extents on every axis");
    return Grid(static_cast<int>(a.ndim()), extent, n);
}

Field to_field(const Array& a, const Grid& g) {
    if (static_cast<std::size_t>(a.size()) != g.size()) throw GridMismatch("array does not match the grid");
    return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Field& f) {
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(f.grid().dim()),
                                   static_cast<py::ssize_t>(f.grid().points()));
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

py::dict series_dict(const Series& s) {
    const char* names[] = {"t", "sup_u", "inf_u", "sup_v", "sup_grad_v", "sup_lap_v", "lyapunov_sup", "err_u", "err_v"};
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(s.size())};
    std::vector<Array> cols;
    for (std::size_t c = 0; c < 9; ++c) cols.emplace_back(shape);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& r = s[i];
        const double row[] = {r.t, r.sup_u, r.inf_u, r.sup_v, r.sup_grad_v, r.sup_lap_v, r.lyapunov_sup, r.err_u, r.err_v};
        for (std::size_t c = 0; c < 9; ++c) cols[c].mutable_unchecked<1>()(static_cast<py::ssize_t>(i)) = row[c];
    }
    py::dict d;
    for (std::size_t c = 0; c < 9; ++c) d[names[c]] = cols[c];
    return d;
}

py::dict verdict_dict(const Verdict& v) {
    py::dict d;
    d["check"] = v.check;
    d["pass"] = v.pass;
    d["measured"] = v.measured;
    d["target"] = v.target;
    d["slack"] = v.slack;
    d["transient"] = v.transient;
    d["detail"] = v.detail;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral solvers and theorem checks for the chemotaxis system with logistic source";

    static py::exception<Error> base(m, "ChemolabError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ContractionFailure>(m, "ContractionFailure", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidParameter& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const GridMismatch& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<Params>(m, "Params")
        .def(py::init([](double chi, double a, double b, double lambda, double mu, int dim) {
                 Params p{chi, a, b, lambda, mu, dim};
                 p.validate();
                 return p;
             }),
             py::kw_only(), py::arg("chi") = 1.0, py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("lam") = 1.0,
             py::arg("mu") = 1.0, py::arg("dim") = 1)
        .def_readwrite("chi", &Params::chi)
        .def_readwrite("a", &Params::a)
        .def_readwrite("b", &Params::b)
        .def_readwrite("lam", &Params::lambda)
        .def_readwrite("mu", &Params::mu)
        .def_readwrite("dim", &Params::dim)
        .def_property_readonly("steady_u", &Params::steady_u)
        .def_property_readonly("steady_v", &Params::steady_v)
        .def("__repr__", [](const Params& p) {
            return py::str("Params(chi={}, a={}, b={}, lam={}, mu={}, dim={})")
                .format(p.chi, p.a, p.b, p.lambda, p.mu, p.dim);
        });

    py::class_<TheoryConstants>(m, "TheoryConstants")
        .def_readonly("theta", &TheoryConstants::theta)
        .def_readonly("bound_general", &TheoryConstants::bound_general)
        .def_readonly("bound_refined", &TheoryConstants::bound_refined)
        .def_readonly("lyapunov_bound", &TheoryConstants::lyapunov_bound)
        .def_readonly("steady_u", &TheoryConstants::steady_u)
        .def_readonly("steady_v", &TheoryConstants::steady_v)
        .def_readonly("theta0", &TheoryConstants::theta0)
        .def_readonly("K", &TheoryConstants::K)
        .def_readonly("L0_min", &TheoryConstants::L0_min)
        .def_readonly("L0", &TheoryConstants::L0)
        .def_readonly("lambda0", &TheoryConstants::lambda0);

    m.def(
        "compute_constants",
        [](const Params& p, double c_grad, std::optional<double> c2, std::optional<double> L0) {
            auto cal = CalibrationConstants::defaults(p.a, p.dim, c_grad, "python");
            if (c2) cal.c2 = *c2;
            return compute_constants(p, cal, L0);
        },
        py::arg("params"), py::kw_only(), py::arg("c_grad") = 0.5641895835477563, py::arg("c2") = py::none(),
        py::arg("L0") = py::none());

    m.def(
        "convergence_K",
        [](double a, double lam, int dim, std::optional<double> c2, double c_generic) {
            auto cal = CalibrationConstants::defaults(a, dim, 0.5641895835477563, "python");
            if (c2) cal.c2 = *c2;
            cal.c_generic = c_generic;
            const auto r = convergence_K(a, lam, dim, cal);
            return py::make_tuple(r.theta0, r.K);
        },
        py::arg("a"), py::arg("lam"), py::arg("dim"), py::kw_only(), py::arg("c2") = py::none(),
        py::arg("c_generic") = 1.0, "Returns (theta0, K).");

    m.def("principal_eigenvalue", &principal_eigenvalue, py::arg("a"), py::arg("L0"), py::arg("dim"));
    m.def("principal_eigenvalue_fd", &principal_eigenvalue_fd, py::arg("a"), py::arg("L0"), py::arg("dim"),
          py::arg("nodes") = 2048);
    m.def("minimal_ball_radius", &minimal_ball_radius, py::arg("a"), py::arg("dim"));
    m.def("gaussian_tail", &gaussian_tail, py::arg("R"), py::arg("dim"), py::arg("moment"));
    m.def("persistence_T", &persistence_T, py::arg("epsilon"), py::arg("M"), py::arg("lam"));
    m.def("persistence_L", &persistence_L, py::arg("epsilon"), py::arg("T"), py::arg("dim"), py::arg("L0_min"));
    m.def("step1_Mtilde", &step1_Mtilde, py::arg("lam"), py::arg("mu"), py::arg("M"), py::arg("dim"));

    m.def(
        "local_horizon",
        [](double R, const Params& p, double c_div, double c_grad, double margin) {
            return local_horizon(R, p, c_div, c_grad, margin);
        },
        py::arg("R"), py::arg("params"), py::arg("c_div"), py::arg("c_grad"), py::arg("margin") = 0.1);

    m.def(
        "apply_semigroup",
        [](const Array& f, double extent, double t, double sigma) {
            const Grid g = grid_of(f, extent);
            return to_array(SemigroupPlan(g).apply_semigroup(to_field(f, g), t, sigma));
        },
        py::arg("f"), py::arg("extent"), py::arg("t"), py::arg("sigma") = 0.0,
        "e^{t(Δ−σ)} f on the periodic grid [0, extent)^N sampled by `f`.");

    m.def(
        "simulate",
        [](const Params& p, const Array& u0, const Array& v0, double extent, double t_end, double dt_max,
           double record_every) {
            const Grid g = grid_of(u0, extent);
            const SimState s0(0.0, to_field(u0, g), to_field(v0, g), p);
            StepControl ctl;
            ctl.t_end = t_end;
            ctl.dt_max = dt_max;
            ctl.record_every = record_every;
            Series series;
            SimState end = [&] {
                py::gil_scoped_release release;
                return ImexStepper(g).integrate(s0, ctl, [&](const DiagnosticsRecord& r) { series.push_back(r); });
            }();
            return py::make_tuple(to_array(end.u()), to_array(end.v()), series_dict(series));
        },
        py::arg("params"), py::arg("u0"), py::arg("v0"), py::kw_only(), py::arg("extent"), py::arg("t_end"),
        py::arg("dt_max") = 1e-2, py::arg("record_every") = 0.1,
        "Integrates with the exponential Euler stepper. Returns (u, v, diagnostics).");

    m.def(
        "picard_solve",
        [](const Params& p, const Array& u0, const Array& v0, double extent, double T, int quad_nodes) {
            const Grid g = grid_of(u0, extent);
            const SimState s0(0.0, to_field(u0, g), to_field(v0, g), p);
            PicardConfig cfg;
            cfg.quad_nodes = quad_nodes;
            const auto r = picard_solve(s0, T, cfg);
            return py::make_tuple(to_array(r.trajectory.back().u()), to_array(r.trajectory.back().v()), r.iterations);
        },
        py::arg("params"), py::arg("u0"), py::arg("v0"), py::kw_only(), py::arg("extent"), py::arg("T"),
        py::arg("quad_nodes") = 201, "Fixed point of the Duhamel map. Returns (u(T), v(T), iterations).");

    m.def(
        "run_experiment",
        [](const std::string& text) {
            const auto cfg = parse_experiment(text);
            const RunResult r = [&] {
                py::gil_scoped_release release;
                return execute(cfg);
            }();
            py::dict d;
            d["diagnostics"] = series_dict(r.series);
            py::list verdicts;
            for (const auto& v : r.verdicts) verdicts.append(verdict_dict(v));
            d["verdicts"] = verdicts;
            d["diverged"] = r.diverged;
            d["divergence_time"] = r.diverged ? py::object(py::float_(r.divergence_time)) : py::object(py::none());
            d["all_pass"] = r.all_pass();
            d["exit_code"] = r.exit_code();
            d["constants"] = r.constants;
            return d;
        },
        py::arg("config_text"), "Runs an experiment given in the INI format used by the command line tool.");
}
