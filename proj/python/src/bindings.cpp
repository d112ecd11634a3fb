#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qlimit/analysis.hpp"
#include "qlimit/errors.hpp"
#include "qlimit/limit_theory.hpp"
#include "qlimit/master_equation.hpp"
#include "qlimit/scenario.hpp"
#include "qlimit/slh.hpp"

namespace py = pybind11;
using namespace qlimit;

namespace {

IntegratorConfig make_config(double t_end, double output_dt, const std::string& method, double dt, double rtol,
                             double atol, std::size_t checkpoint_stride)
{
    IntegratorConfig c;
    if (method == "rk45") {
        c.method = Method::RK45;
    } else if (method == "rk4") {
        c.method = Method::RK4;
    } else {
        throw InvalidArgument("method must be 'rk4' or 'rk45'");
    }
    c.t_end = t_end;
    c.output_dt = output_dt;
    c.dt = dt;
    c.rtol = rtol;
    c.atol = atol;
    c.checkpoint_stride = checkpoint_stride;
    c.validate();
    return c;
}

DensityMatrix initial_state(const SLHModel& m, const std::optional<Matrix>& rho0)
{
    return rho0 ? DensityMatrix(m.sig, *rho0) : vacuum(m.sig);
}

py::dict trajectory_dict(const Trajectory& t)
{
    py::dict cols;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        cols[py::str(t.columns[c])] = t.values[c];
    }
    py::dict d;
    d["times"] = t.times;
    d["columns"] = cols;
    d["mode_populations"] = t.mode_populations;
    d["final_state"] = t.final_state;
    d["max_trace_error"] = t.max_trace_error;
    d["min_eigenvalue"] = t.min_eigenvalue;
    d["accepted_steps"] = t.accepted_steps;
    d["rejected_steps"] = t.rejected_steps;
    return d;
}

// Keyword arguments shared by every integrating entry point.
#define QLIMIT_INTEGRATOR_ARGS                                                                              \
    py::arg("t_end") = 2.0, py::arg("output_dt") = 0.005, py::arg("method") = "rk45", py::arg("dt") = 1e-3, \
        py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10, py::arg("checkpoint_stride") = 10

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Driven nonlinear-cavity master equations (C++ core)";
    m.attr("__version__") = QLIMIT_VERSION;

    // Translators run newest first, so subclasses are registered after the base.
    const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
    py::register_exception<NumericalError>(m, "NumericalError", base);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);

    py::class_<SLHModel>(m, "Model")
        .def_readonly("name", &SLHModel::name)
        .def_property_readonly("dims", [](const SLHModel& s) { return s.sig.dims(); })
        .def_property_readonly("channels", &SLHModel::channels)
        .def_property_readonly("H", [](const SLHModel& s) { return s.H.matrix(); })
        .def_property_readonly("L",
                               [](const SLHModel& s) {
                                   std::vector<Matrix> out;
                                   for (const auto& l : s.L) {
                                       out.push_back(l.matrix());
                                   }
                                   return out;
                               })
        .def("__repr__", [](const SLHModel& s) { return "<Model " + s.name + " " + s.sig.to_string() + ">"; });

    m.def(
        "build_kerr",
        [](double chi, double kappa_a1, complex alpha, double delta, double kappa_a2, Index dim) {
            return build_kerr({delta, chi, kappa_a1, kappa_a2, alpha, dim});
        },
        py::arg("chi"), py::arg("kappa_a1"), py::arg("alpha"), py::arg("delta") = 0.0, py::arg("kappa_a2") = 0.0,
        py::arg("dim") = 15);
    m.def(
        "build_chi2",
        [](double g, double kappa_b, double kappa_a1, complex alpha, double delta, double kappa_a2, Index dim_a,
           Index dim_b) { return build_chi2({delta, g, kappa_a1, kappa_a2, kappa_b, alpha, dim_a, dim_b}); },
        py::arg("g"), py::arg("kappa_b"), py::arg("kappa_a1"), py::arg("alpha"), py::arg("delta") = 0.0,
        py::arg("kappa_a2") = 0.0, py::arg("dim_a") = 10, py::arg("dim_b") = 5);
    m.def(
        "build_tpa",
        [](double gamma, double kappa_a1, complex alpha, double delta, double kappa_a2, Index dim) {
            return build_tpa({delta, kappa_a1, kappa_a2, gamma, alpha, dim});
        },
        py::arg("gamma"), py::arg("kappa_a1"), py::arg("alpha"), py::arg("delta") = 0.0, py::arg("kappa_a2") = 0.0,
        py::arg("dim") = 30);
    m.def(
        "build_qubit_limit",
        [](double kappa_a1, complex alpha, double delta, double kappa_a2) {
            return build_qubit_limit({delta, kappa_a1, kappa_a2, alpha});
        },
        py::arg("kappa_a1"), py::arg("alpha"), py::arg("delta") = 0.0, py::arg("kappa_a2") = 0.0);

    m.def(
        "liouvillian_apply", [](const SLHModel& model, const Matrix& rho) { return liouvillian_apply(model, rho); },
        py::arg("model"), py::arg("rho"));
    m.def(
        "integrate",
        [](const SLHModel& model, std::optional<Matrix> rho0, double t_end, double output_dt,
           const std::string& method, double dt, double rtol, double atol, std::size_t stride) {
            const IntegratorConfig c = make_config(t_end, output_dt, method, dt, rtol, atol, stride);
            const DensityMatrix r0 = initial_state(model, rho0);
            Trajectory t;
            {
                py::gil_scoped_release release;
                t = integrate(model, r0, c);
            }
            return trajectory_dict(t);
        },
        py::arg("model"), py::arg("rho0") = py::none(), QLIMIT_INTEGRATOR_ARGS);
    m.def(
        "steady_state", [](const SLHModel& model) { return steady_state(model).matrix(); }, py::arg("model"));
    m.def(
        "vacuum", [](const SLHModel& model) { return vacuum(model.sig).matrix(); }, py::arg("model"));

    m.def(
        "wigner",
        [](const Matrix& rho, double x_min, double x_max, double p_min, double p_max, Index nx, Index np) {
            const WignerGrid w = wigner(rho, {x_min, x_max, p_min, p_max, nx, np});
            return py::make_tuple(w.xs, w.ps, w.values);
        },
        py::arg("rho"), py::arg("x_min") = -4.0, py::arg("x_max") = 4.0, py::arg("p_min") = -4.0,
        py::arg("p_max") = 4.0, py::arg("nx") = 101, py::arg("np") = 101);
    m.def(
        "delta_B", [](const Matrix& rho) { return delta_B(rho); }, py::arg("rho"));
    m.def(
        "nongauss_trace",
        [](const SLHModel& model, double t_end, double output_dt, const std::string& method, double dt, double rtol,
           double atol, std::size_t stride) {
            const NonGaussTrace s = nongauss_trace(model, make_config(t_end, output_dt, method, dt, rtol, atol, stride));
            py::dict d;
            d["times"] = s.times;
            d["delta_b"] = s.delta_b;
            d["entropy"] = s.entropy;
            d["gaussian_entropy"] = s.gaussian_entropy;
            d["n_expect"] = s.n_expect;
            d["pop0"] = s.pop0;
            d["pop1"] = s.pop1;
            d["pop2"] = s.pop2;
            const Peak pk = peak_find(s.times, s.delta_b);
            d["peak"] = py::dict(py::arg("t") = pk.t, py::arg("value") = pk.value, py::arg("index") = pk.index,
                                 py::arg("at_endpoint") = pk.at_endpoint);
            d["peak_state"] = s.states[pk.index];
            return d;
        },
        py::arg("model"), QLIMIT_INTEGRATOR_ARGS);

    m.def(
        "compare",
        [](const SLHModel& pre, const SLHModel& limit, const std::string& observable, double t_end,
           double output_dt, const std::string& method, double dt, double rtol, double atol, std::size_t stride) {
            const Comparison c = compare_prelimit_limit(pre, limit, parse_observable(observable),
                                                        make_config(t_end, output_dt, method, dt, rtol, atol, stride));
            py::dict d;
            d["deviation"] = c.deviation;
            d["max_leakage"] = c.max_leakage_pre;
            d["times"] = c.times;
            d["pre"] = c.pre;
            d["limit"] = c.limit;
            return d;
        },
        py::arg("pre"), py::arg("limit"), py::arg("observable") = "pop1", QLIMIT_INTEGRATOR_ARGS);
    m.def(
        "verify_structural",
        [](const std::string& family) {
            ScalingSetup s;
            if (family == "kerr") {
                s = kerr_setup(-100.0, 15);
            } else if (family == "chi2") {
                s = chi2_setup(5000.0, -3000.0, 10, 5);
            } else if (family == "tpa") {
                s = tpa_setup(200.0, 30);
            } else {
                throw InvalidArgument("family must be 'kerr', 'chi2' or 'tpa'");
            }
            return verify_structural(s).max_residual();
        },
        py::arg("family"), "Largest structural residual of the family's scaling setup at default dims.");

    m.def(
        "run_scenario",
        [](const std::filesystem::path& config, const std::string& action, const std::filesystem::path& out_dir) {
            const ScenarioConfig cfg = parse_config_file(config);
            const Action a = action.empty() ? default_action(cfg.kind) : parse_action(action);
            return run(cfg, a, {out_dir, false}).to_json().dump();
        },
        py::arg("config"), py::arg("action") = "", py::arg("out_dir") = ".",
        "Runs a scenario file and returns its manifest as a JSON string.");
    m.def("selftest", [] {
        py::list out;
        for (const auto& c : selftest()) {
            out.append(py::make_tuple(c.name, c.passed, c.value, c.bound));
        }
        return out;
    });
}
