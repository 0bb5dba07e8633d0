#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scatteropt/assembly.hpp"
#include "scatteropt/catalog.hpp"
#include "scatteropt/errors.hpp"
#include "scatteropt/executor.hpp"
#include "scatteropt/oracle.hpp"
#include "scatteropt/problem_io.hpp"
#include "scatteropt/recovery.hpp"
#include "scatteropt/scattering.hpp"

#include <optional>
#include <string>

namespace py = pybind11;
using namespace scatteropt;

namespace {

Schedule make_schedule(const std::string& mode, double p, std::uint64_t seed, double tol,
                       long max_iters) {
    if (mode != "sync" && mode != "async")
        throw BadParamsError("mode must be 'sync' or 'async'");
    Schedule s;
    s.mode = mode == "async" ? Schedule::Mode::Asynchronous : Schedule::Mode::Synchronous;
    s.update_prob = p;
    s.rng_seed = seed;
    s.fixed_point_tol = tol;
    s.max_iters = max_iters;
    return s;
}

CrKind kind_of(const std::string& name) {
    for (CrKind k : {CrKind::Quadratic, CrKind::LinearCost, CrKind::ConstSource,
                     CrKind::AbsValue, CrKind::NonNeg, CrKind::Box, CrKind::ZeroVar,
                     CrKind::Equal})
        if (name == to_string(k))
            return k;
    throw BadParamsError("unknown element kind '" + name + "'");
}

py::dict solve_impl(const Problem& problem, const std::string& mode, double p,
                    std::uint64_t seed, double tol, long max_iters) {
    SystemGraph sg = reduce_sources(assemble(problem));
    const RunResult result = run(sg, make_schedule(mode, p, seed, tol, max_iters));
    const Solution sol = recover(sg, result.state);
    py::dict out;
    out["status"] = std::string(to_string(result.trace.status));
    out["iterations"] = result.trace.iterations;
    out["a"] = sol.a_star;
    out["b"] = sol.b_star;
    out["c"] = result.state.c;
    out["d"] = result.state.d;
    if (sol.y_star)
        out["y"] = *sol.y_star;
    if (sol.costs_valid) {
        out["primal_cost"] = sol.primal_cost;
        out["dual_cost"] = sol.dual_cost;
        out["duality_gap"] = sol.gap;
    }
    out["transformed_residual"] = sol.residuals.max_transformed;
    out["untransformed_residual"] = sol.residuals.max_untransformed;
    if (!result.trace.rows.empty()) {
        py::list residuals;
        for (const TraceRow& row : result.trace.rows)
            residuals.append(row.residual);
        out["trace_residuals"] = residuals;
    }
    return out;
}

py::dict verify_impl(const Problem& problem, const Eigen::VectorXd& c,
                     const Eigen::VectorXd& d) {
    SystemGraph sg = reduce_sources(assemble(problem));
    StateVector st;
    st.c = c;
    st.d = d;
    const FixedPointReport rep = verify_fixed_point(sg, st);
    py::dict out;
    out["li_transformed"] = rep.li_transformed;
    out["cr_transformed"] = rep.cr_transformed;
    out["li_primal"] = rep.li_primal;
    out["li_dual"] = rep.li_dual;
    out["cr_primal"] = rep.cr_primal;
    out["cr_dual"] = rep.cr_dual;
    out["max_transformed"] = rep.max_transformed;
    out["max_untransformed"] = rep.max_untransformed;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fixed-point solver assembling optimization problems into orthonormal "
              "scattering interconnections with nonlinear constitutive maps";

    // translators run newest-first: keep the base registered before the
    // derived class so parse errors surface as ValueError
    py::register_exception<Error>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ProblemParseError", PyExc_ValueError);

    py::class_<Problem>(m, "Problem")
        .def_static("from_file", &parse_problem_file, py::arg("path"))
        .def_static("from_string", &parse_problem, py::arg("text"))
        .def_property_readonly("n",
                               [](const Problem& p) { return p.partition.n_total; })
        .def_property_readonly("num_cr_blocks",
                               [](const Problem& p) { return p.crs.size(); })
        .def_property_readonly("num_li_blocks",
                               [](const Problem& p) { return p.lis.size(); })
        .def("validate", [](const Problem& p) { validate_problem(p); })
        .def("emit", &emit_problem);

    m.def("solve", &solve_impl, py::arg("problem"), py::arg("mode") = "sync",
          py::arg("p") = 1.0, py::arg("seed") = 0, py::arg("tol") = 1e-9,
          py::arg("max_iters") = 1000000,
          "Assemble, reduce sources, and iterate to a fixed point; returns a dict with "
          "the recovered solution and residuals.");

    m.def("verify", &verify_impl, py::arg("problem"), py::arg("c"), py::arg("d"),
          "Residuals of the transformed and original stationarity conditions at a state.");

    m.def(
        "scattering_matrix",
        [](const Eigen::MatrixXd& a) {
            LIBlock li;
            li.a = a;
            return build_scattering(li).g;
        },
        py::arg("a"),
        "Orthonormal interconnection matrix realizing a_out = A a_in, b_in = -A^T b_out.");

    m.def(
        "element_map",
        [](const std::string& kind, int dim, double q, double slope, double weight,
           double lo, double hi, std::optional<Eigen::VectorXd> values) {
            CrParams params;
            params.q = q;
            params.slope = slope;
            params.weight = weight;
            params.lo = lo;
            params.hi = hi;
            if (values)
                params.values = *values;
            const CatalogElement el = catalog_cr(kind_of(kind), params, dim);
            py::dict out;
            out["classification"] = std::string(to_string(el.map.classification));
            out["knees"] = el.map.knees;
            out["apply"] = py::cpp_function(
                [map = el.map](const Eigen::VectorXd& d) { return map.apply(d); });
            return out;
        },
        py::arg("kind"), py::arg("dim") = 1, py::arg("q") = 0.0, py::arg("slope") = 0.0,
        py::arg("weight") = 0.0, py::arg("lo") = -kInf, py::arg("hi") = kInf,
        py::arg("values") = std::nullopt,
        "Catalog element's transformed map: classification, knees, and apply(d).");

    m.def(
        "kkt_solve",
        [](const Problem& p) {
            const KktSolution sol = kkt_solve(p);
            return py::make_tuple(sol.a, sol.b);
        },
        py::arg("problem"), "Dense first-order reference solve; returns (a, b).");

    m.def(
        "grid_solve",
        [](const Problem& p, double lo, double hi, double resolution) {
            const GridSolution sol = grid_solve(p, lo, hi, resolution);
            return py::make_tuple(sol.a, sol.value);
        },
        py::arg("problem"), py::arg("lo") = -5.0, py::arg("hi") = 5.0,
        py::arg("resolution") = 1e-3,
        "Exhaustive reference search over the interconnection inputs; returns (a, value).");

    m.def(
        "transform",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            const StateVector s =
                forward_transform(a, b, TransformConvention(static_cast<int>(a.size())));
            return py::make_tuple(s.c, s.d);
        },
        py::arg("a"), py::arg("b"),
        "Pairwise coordinate change (a, b) -> (c, d) under the default convention.");

    m.def(
        "inverse_transform",
        [](const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
            StateVector s;
            s.c = c;
            s.d = d;
            auto [a, b] =
                inverse_transform(s, TransformConvention(static_cast<int>(c.size())));
            return py::make_tuple(a, b);
        },
        py::arg("c"), py::arg("d"), "Inverse of transform().");
}
