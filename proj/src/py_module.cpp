#include <optional>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "contactkit/classify.hpp"
#include "contactkit/continuation.hpp"
#include "contactkit/geometry.hpp"
#include "contactkit/integrate.hpp"
#include "contactkit/model.hpp"
#include "contactkit/serialize.hpp"

namespace py = pybind11;
using namespace contactkit;

namespace {

py::object json_to_py(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict trajectory_to_py(const Trajectory& tr) {
    py::dict d;
    d["t"] = tr.times;
    d["states"] = tr.states;
    py::list events;
    for (const Event& e : tr.events) {
        py::dict ed;
        ed["t"] = e.t;
        ed["kind"] = e.kind;
        ed["z"] = e.z;
        events.append(ed);
    }
    d["events"] = events;
    py::dict stats;
    stats["steps_accepted"] = tr.stats.steps_accepted;
    stats["steps_rejected"] = tr.stats.steps_rejected;
    stats["rhs_evaluations"] = tr.stats.rhs_evaluations;
    d["stats"] = stats;
    return d;
}

py::dict verdict_to_py(const Classification& c) {
    py::dict v;
    v["kind"] = verdict_name(c.kind);
    v["order"] = c.order;
    v["slow_generic"] = c.slow_generic;
    return v;
}

py::dict branch_to_py(const Branch& br) {
    py::list points, arclengths, fold_coefficients, verdicts, tangents;
    for (const BranchPoint& p : br.points) {
        points.append(p.z);
        arclengths.append(p.arclength);
        fold_coefficients.append(p.fold_coefficient);
        verdicts.append(verdict_to_py(p.classification));
        tangents.append(p.tangent);
    }
    py::list specials;
    for (const BranchEvent& e : br.special_points) {
        py::dict s;
        s["z"] = e.z;
        s["arclength"] = e.arclength;
        s["verdict"] = verdict_to_py(e.classification);
        specials.append(s);
    }
    py::dict d;
    d["points"] = points;
    d["arclengths"] = arclengths;
    d["fold_coefficients"] = fold_coefficients;
    d["verdicts"] = verdicts;
    d["tangents"] = tangents;
    d["special_points"] = specials;
    d["termination"] = termination_name(br.termination);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contact-order classification and continuation for factorized slow-fast systems "
              "z' = N(z) f(z) + eps G(z, eps)";

    py::register_exception<Error>(m, "Error");

    py::class_<FactorizedModel>(m, "Model", "A slow-fast system in factorized form")
        .def_readonly("name", &FactorizedModel::name)
        .def_readonly("n", &FactorizedModel::n, "phase dimension")
        .def_readonly("m", &FactorizedModel::m, "fast codimension")
        .def_property_readonly("k", &FactorizedModel::k, "slow dimension n - m")
        .def_readonly("eps", &FactorizedModel::eps)
        .def_readonly("face", &FactorizedModel::face)
        .def_readonly("coordinates", &FactorizedModel::coordinate_names)
        .def_readonly("domain", &FactorizedModel::domain_hint)
        .def_property_readonly("parameters",
                               [](const FactorizedModel& md) {
                                   py::dict d;
                                   for (const ParameterSpec& p : md.parameters)
                                       d[py::str(p.name)] = p.value;
                                   return d;
                               })
        .def("__repr__", [](const FactorizedModel& md) {
            return "<Model '" + md.name + "' n=" + std::to_string(md.n) +
                   " k=" + std::to_string(md.k()) + ">";
        });

    m.def("model_names", &model_names, "All built-in model names, including face variants");

    m.def(
        "load_model",
        [](const std::string& name, const std::map<std::string, double>& params) {
            return load_model(name, params);
        },
        py::arg("name"), py::arg("params") = std::map<std::string, double>{},
        "Load a built-in model by name with optional parameter overrides");

    m.def(
        "load_model_from_file",
        [](const std::string& path, const std::map<std::string, double>& params) {
            return load_model_from_file(path, params);
        },
        py::arg("path"), py::arg("params") = std::map<std::string, double>{},
        "Load a model from a structured text definition file");

    m.def(
        "classify",
        [](const FactorizedModel& model, const Vec& point, bool project, int max_order) {
            Tolerances tol;
            tol.max_order = max_order;
            const ContactDiagnostics d = project ? classify_projected(model, point, tol)
                                                 : contactkit::classify(model, point, tol);
            return json_to_py(diagnostics_json(model, d, tol));
        },
        py::arg("model"), py::arg("point"), py::arg("project") = false, py::arg("max_order") = 4,
        "Classify a point of the critical manifold; returns the full diagnostic record");

    m.def(
        "spectrum",
        [](const FactorizedModel& model, const Vec& point) {
            return nontrivial_spectrum(model, point).eigenvalues;
        },
        py::arg("model"), py::arg("point"),
        "Nontrivial eigenvalues of the layer linearization, eig(Df N)");

    m.def(
        "contact_determinant",
        [](const FactorizedModel& model, const Vec& point) {
            return contact_determinant(model, point);
        },
        py::arg("model"), py::arg("point"), "det(Df N) at a point");

    m.def(
        "project_to_manifold",
        [](const FactorizedModel& model, const Vec& seed) { return project_to_S(model, seed); },
        py::arg("model"), py::arg("seed"),
        "Minimal-norm Gauss-Newton projection onto the critical manifold f = 0");

    m.def(
        "find_contact_point",
        [](const FactorizedModel& model, const Vec& seed) {
            return find_contact_point(model, seed);
        },
        py::arg("model"), py::arg("seed"),
        "Gauss-Newton search for a point with f = 0 and det(Df N) = 0");

    m.def(
        "find_equilibrium",
        [](const FactorizedModel& model, const Vec& seed) {
            const EquilibriumResult eq = desingularized_equilibria(model, seed);
            py::dict d;
            d["z"] = eq.z;
            d["eigenvalues"] = eq.spectrum.eigenvalues;
            d["residual"] = eq.residual;
            d["iterations"] = eq.iterations;
            return d;
        },
        py::arg("model"), py::arg("seed"),
        "Equilibrium of the desingularized layer field z' = N(z), with its spectrum");

    m.def(
        "continue_contact_curve",
        [](const FactorizedModel& model, const Vec& seed, int max_points, int direction) {
            ContinuationConfig cfg;
            cfg.max_points = max_points;
            cfg.direction = direction >= 0 ? +1 : -1;
            return branch_to_py(continue_contact_curve(model, seed, cfg));
        },
        py::arg("model"), py::arg("seed"), py::arg("max_points") = 2000,
        py::arg("direction") = +1,
        "Pseudo-arclength continuation of the contact curve from a seed (k = 2)");

    m.def(
        "simulate",
        [](FactorizedModel model, const Vec& z0, double t0, double t1,
           std::optional<double> eps, double abs_tol, double rel_tol, double max_step) {
            if (eps) model.eps = *eps;
            IntegratorConfig cfg;
            cfg.abs_tol = abs_tol;
            cfg.rel_tol = rel_tol;
            cfg.max_step = max_step;
            return trajectory_to_py(integrate_full(model, z0, t0, t1, cfg));
        },
        py::arg("model"), py::arg("z0"), py::arg("t0"), py::arg("t1"),
        py::arg("eps") = std::nullopt, py::arg("abs_tol") = 1e-10, py::arg("rel_tol") = 1e-8,
        py::arg("max_step") = 0.0,
        "Integrate the full system z' = N f + eps G, recording f and det(Df N) crossings");

    m.def(
        "fibers",
        [](const FactorizedModel& model, const std::vector<Vec>& seeds, double t_back,
           double t_forward, double abs_tol, double rel_tol) {
            IntegratorConfig cfg;
            cfg.abs_tol = abs_tol;
            cfg.rel_tol = rel_tol;
            py::list out;
            for (const Trajectory& tr : fiber_family(model, seeds, t_back, t_forward, cfg))
                out.append(trajectory_to_py(tr));
            return out;
        },
        py::arg("model"), py::arg("seeds"), py::arg("t_back") = -5.0,
        py::arg("t_forward") = 5.0, py::arg("abs_tol") = 1e-10, py::arg("rel_tol") = 1e-8,
        "Fast fibers of the desingularized layer field z' = N(z), one per seed");

    m.def(
        "validate_provider",
        [](const FactorizedModel& model, const std::vector<Vec>& points) {
            const ProviderReport r = validate_provider(model.provider, points);
            py::dict d;
            d["passed"] = r.passed;
            py::list checks;
            for (const TensorCheck& c : r.checks) {
                py::dict cd;
                cd["tensor"] = c.tensor;
                cd["order"] = c.order;
                cd["max_rel_discrepancy"] = c.max_rel_discrepancy;
                cd["flagged"] = c.flagged;
                checks.append(cd);
            }
            d["checks"] = checks;
            return d;
        },
        py::arg("model"), py::arg("points"),
        "Cross-check analytic derivative tensors against finite differences");
}
