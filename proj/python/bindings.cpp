// Python bindings for the sgdlab core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sgdlab/experiments.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace sgdlab;

namespace {

py::dict trace_dict(const Trace& t) {
    return py::dict("k"_a = t.k, "x"_a = t.x, "f"_a = t.f, "grad_norm"_a = t.grad_norm, "dim"_a = t.dim);
}

py::dict classification_dict(const LimitClassification& c) {
    return py::dict("label"_a = std::string(to_string(c.label)), "component"_a = c.component,
                    "distance"_a = c.distance, "above_limit"_a = std::string(to_string(c.above_limit)),
                    "f_inf"_a = c.f_inf, "window_diameter"_a = c.window_diameter, "grad_norm"_a = c.grad_norm);
}

py::dict channel_dict(const ChannelCheck& c) {
    py::dict d("channel"_a = std::string(to_string(c.channel)), "passed"_a = c.passed(),
               "summability"_a = c.summability.passed(), "partial_sum"_a = c.summability.partial_sum,
               "inf_condition"_a = c.inf.passed, "inf_value"_a = c.inf.min_value);
    if (c.ratio) {
        d["ratio"] = c.ratio->passed;
        d["ratio_max"] = c.ratio->worst;
        d["ratio_max_k"] = c.ratio->worst_k;
    } else {
        d["ratio"] = false;
        d["ratio_error"] = c.ratio_error;
    }
    return d;
}

SampleSide parse_side(const std::string& s) {
    if (s == "both") return SampleSide::both;
    if (s == "lower") return SampleSide::lower;
    if (s == "upper") return SampleSide::upper;
    throw py::value_error("side must be 'both', 'lower' or 'upper'");
}

}  // namespace

PYBIND11_MODULE(_sgdlab, m) {
    m.doc() = "SGD laboratory core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ExperimentConfig>(m, "Config")
        .def_property_readonly("kind", [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); })
        .def_readwrite("b", &ExperimentConfig::b)
        .def_readwrite("sigma", &ExperimentConfig::sigma)
        .def_readwrite("eps_exp", &ExperimentConfig::eps_exp)
        .def_readwrite("levels", &ExperimentConfig::levels)
        .def_readwrite("alpha", &ExperimentConfig::alpha)
        .def_readwrite("x0", &ExperimentConfig::x0)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("k_max", &ExperimentConfig::k_max)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("out", &ExperimentConfig::out)
        .def("level_values", &ExperimentConfig::level_values)
        .def("to_toml", [](const ExperimentConfig& c) { return to_toml(c); })
        .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });

    m.def("parse_config", [](const std::string& text) { return parse_config(text); }, "text"_a);
    m.def("load_config", &load_config, "path"_a);

    m.def("value", &piecewise_value, "x"_a, "Piecewise test function F(x).");
    m.def("derivative", &piecewise_derivative, "x"_a, "F'(x).");
    m.def("catalog", [] {
        const Objective f = make_piecewise_function();
        py::list out;
        for (const auto& c : f.catalog())
            out.append(py::dict("lo"_a = c.lo, "hi"_a = c.hi, "kind"_a = std::string(to_string(c.kind)),
                                "value"_a = c.value));
        return out;
    });

    m.def(
        "sample_gradient",
        [](const ExperimentConfig& cfg, double level, std::vector<double> x, std::uint64_t k, std::uint64_t seed,
           std::uint32_t stream) {
            const Objective f = make_objective(cfg);
            const NoiseOracle o = make_oracle(cfg, level, f.beta());
            NoiseStream rng(seed, stream, k);
            return o.sample(f.gradient(x), f.evaluate(x) - f.f_min(), rng, k);
        },
        "config"_a, "level"_a, "x"_a, "k"_a, "seed"_a = 1, "stream"_a = 0);

    m.def(
        "moment_bounds",
        [](const ExperimentConfig& cfg, double level, std::uint64_t k) {
            const NoiseOracle o = make_oracle(cfg, level, 2.0);
            const MomentBounds mb = o.moment_bounds(k, cfg.dim);
            return py::make_tuple(mb.a, mb.b, mb.c);
        },
        "config"_a, "level"_a, "k"_a);

    m.def(
        "verify_oracle",
        [](const ExperimentConfig& cfg, double level, std::vector<double> x, std::uint64_t k, std::size_t n_draws,
           double confidence, std::uint64_t seed) {
            const Objective f = make_objective(cfg);
            const NoiseOracle o = make_oracle(cfg, level, f.beta());
            const auto u = verify_unbiasedness(o, f, x, k, n_draws, confidence, seed);
            const auto s = verify_second_moment(o, f, x, k, n_draws, std::nullopt, seed);
            return py::dict("mean"_a = u.mean, "target"_a = u.target, "max_abs_z"_a = u.max_abs_z,
                            "unbiased"_a = u.passed, "second_moment"_a = s.empirical, "bound"_a = s.bound,
                            "moment_ok"_a = s.passed);
        },
        "config"_a, "level"_a, "x"_a, "k"_a, "n_draws"_a = 100000, "confidence"_a = 0.9973, "seed"_a = 1);

    m.def(
        "check_assumptions",
        [](const ExperimentConfig& cfg, std::uint64_t horizon) {
            py::list out;
            for (const auto& lc : check_assumptions(cfg, horizon))
                out.append(py::dict("level"_a = lc.level, "alpha"_a = lc.alpha, "derived"_a = channel_dict(lc.derived),
                                    "paper"_a = channel_dict(lc.paper)));
            return out;
        },
        "config"_a, "horizon"_a = kDefaultCheckHorizon);

    m.def(
        "run",
        [](const ExperimentConfig& cfg, std::vector<double> x0, double level, std::uint64_t seed,
           std::optional<std::uint64_t> k_max, bool force, const std::string& channel) {
            const Objective f = make_objective(cfg);
            const NoiseOracle o = make_oracle(cfg, level, f.beta());
            const auto ch = parse_bounds_channel(channel);
            if (!ch) throw py::value_error("channel must be 'derived' or 'paper'");
            const StepSchedule s = make_schedule(cfg, o, f.beta(), *ch);
            RunConfig rc = make_run_config(cfg, x0, seed);
            if (k_max) rc.k_max = *k_max;
            rc.force = force;
            TrajectoryRecord rec;
            {
                py::gil_scoped_release release;
                rec = run_trajectory(rc, f, o, s);
            }
            return py::dict("trace"_a = trace_dict(rec.merged()), "final_x"_a = rec.final_x, "final_k"_a = rec.final_k,
                            "min_f"_a = rec.min_f, "min_grad_norm"_a = rec.min_grad_norm,
                            "numeric_failure"_a = rec.numeric_failure,
                            "classification"_a = classification_dict(classify_limit(rec, f)));
        },
        "config"_a, "x0"_a, "level"_a, "seed"_a = 1, "k_max"_a = py::none(), "force"_a = false,
        "channel"_a = "derived");

    m.def(
        "conditional_value",
        [](const ExperimentConfig& cfg, double level, std::vector<double> x, std::uint64_t k, std::size_t n_draws,
           std::uint64_t seed) {
            const Objective f = make_objective(cfg);
            const NoiseOracle o = make_oracle(cfg, level, f.beta());
            const StepSchedule s = make_schedule(cfg, o, f.beta(), cfg.channel);
            const auto cv = estimate_conditional_value(x, k, f, o, s, n_draws, seed);
            return py::make_tuple(cv.mean + f.f_min(), cv.std_error);
        },
        "config"_a, "level"_a, "x"_a, "k"_a, "n_draws"_a = 100000, "seed"_a = 1,
        "Monte-Carlo E_k[F(x_{k+1})] and its standard error.");

    m.def(
        "lojasiewicz",
        [](const std::string& component, double radius, std::size_t samples, std::uint64_t seed,
           const std::string& side) {
            const Objective f = make_piecewise_function();
            const auto& comp = f.catalog().at(resolve_component(f, component));
            const auto fit = estimate_lojasiewicz_exponent(f, comp, radius, samples, seed, parse_side(side));
            return py::make_tuple(fit.theta, fit.r2);
        },
        "component"_a, "radius"_a = 0.3, "samples"_a = 2000, "seed"_a = 1, "side"_a = "both");

    m.def(
        "table_json",
        [](const ExperimentConfig& cfg, bool force, unsigned workers) {
            TableResult res;
            {
                py::gil_scoped_release release;
                res = run_table(cfg, force, workers);
            }
            return table_json(res.table, {to_toml(cfg), cfg.seed});
        },
        "config"_a, "force"_a = false, "workers"_a = 0);
}
