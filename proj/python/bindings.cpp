#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heterokink/analysis.hpp"
#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/io.hpp"
#include "heterokink/shoot.hpp"
#include "heterokink/systems.hpp"

namespace py = pybind11;
using namespace heterokink;

namespace {

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& rows) {
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return m;
}

py::dict solution_dict(const BvpSolution& s, int k) {
    const MeshFunction full = reflect(s);
    py::dict d;
    d["kind"] = to_string(s.kind);
    d["k"] = k;
    d["formulation"] = to_string(s.formulation);
    d["A"] = s.A;
    d["sigma"] = s.sigma;
    d["delta"] = s.delta;
    d["L"] = s.L;
    d["x"] = full.x;
    d["U"] = stack(full.U);
    d["newton_iters"] = s.newton_iters;
    d["max_residual"] = s.max_residual;
    d["zeros"] = zero_crossings(full);
    return d;
}

BranchTable table_of(ModelKind kind, int k, const std::vector<double>& delta, const std::vector<double>& A,
                     const std::vector<double>& first_gap) {
    if (delta.size() != A.size()) throw ContractViolation("delta and A differ in length");
    if (!first_gap.empty() && first_gap.size() != delta.size())
        throw ContractViolation("first_gap and delta differ in length");
    BranchTable t(kind, k, Source::Bvp);
    for (std::size_t i = 0; i < delta.size(); ++i) {
        BranchRow r{delta[i], A[i], k, 0.0, {}};
        if (!first_gap.empty()) r.gaps.push_back(first_gap[i]);
        t.add(r);
    }
    return t;
}

py::dict fit_dict(const FitResult& f) {
    py::dict d;
    d["model"] = to_string(f.model);
    d["parameters"] = f.parameters;
    d["rms_residual"] = f.rms_residual;
    d["n_points"] = f.n_points;
    return d;
}

}  // namespace

PYBIND11_MODULE(_heterokink, m) {
    m.doc() = "Heteroclinic antikinks of the stationary CCH and HCCH equations";
    m.attr("__version__") = tool_version();

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
    py::register_exception<MismatchedFamilies>(m, "MismatchedFamilies", PyExc_ValueError);

    m.def("dimension", [](const std::string& kind) { return dimension(parse_model_kind(kind)); });

    m.def(
        "rhs",
        [](const std::string& kind, double A, double delta, const Eigen::VectorXd& U) {
            return Eigen::VectorXd(rhs(parse_model_kind(kind), {A, delta}, PhaseVector(U)));
        },
        py::arg("kind"), py::arg("A"), py::arg("delta"), py::arg("U"));

    m.def(
        "eigenvalues",
        [](const std::string& kind, double A, double delta, const std::string& sign) {
            if (sign != "+" && sign != "-") throw ContractViolation("sign must be '+' or '-'");
            const auto s = sign == "+" ? EquilibriumSign::Plus : EquilibriumSign::Minus;
            const EquilibriumInfo info = equilibrium_analysis(parse_model_kind(kind), {A, delta}, s);
            py::dict d;
            d["eigenvalues"] = info.eigenvalues;
            d["n_unstable"] = info.n_unstable;
            d["n_stable"] = info.n_stable;
            d["n_center"] = info.n_center;
            return d;
        },
        py::arg("kind"), py::arg("A"), py::arg("delta"), py::arg("sign") = "+");

    m.def("lambert_w", &lambert_w, py::arg("x"));

    m.def(
        "predict",
        [](const std::string& kind, int k, double delta) {
            const AsymptoticPrediction p = predict(parse_model_kind(kind), k, delta);
            py::dict d;
            d["A_pred"] = p.A_pred;
            d["width_pred"] = p.width_pred;
            d["valid"] = p.valid;
            d["A_provenance"] = to_string(p.A_provenance);
            return d;
        },
        py::arg("kind"), py::arg("k"), py::arg("delta"));

    m.def(
        "distance",
        [](const std::string& kind, double A, double delta) {
            return distance_function(parse_model_kind(kind), {A, delta}, ShootConfig{}).d;
        },
        py::arg("kind"), py::arg("A"), py::arg("delta"));

    m.def(
        "scan",
        [](const std::string& kind, double delta, double a_min, double a_max, double a_step) {
            ShootConfig c;
            c.a_min = a_min;
            c.a_max = a_max;
            c.a_step = a_step;
            py::list out;
            for (const auto& p : scan_and_refine(parse_model_kind(kind), delta, c)) {
                py::dict d;
                d["k"] = p.k;
                d["A"] = p.A;
                d["d_min"] = p.d_min;
                d["gaps"] = p.root_distances;
                out.append(d);
            }
            return out;
        },
        py::arg("kind"), py::arg("delta"), py::arg("a_min") = 0.55, py::arg("a_max") = 0.9999,
        py::arg("a_step") = 1e-3);

    m.def(
        "solve_het",
        [](const std::string& kind, int k, double delta, double mesh_tol) {
            BvpConfig c;
            c.mesh_tol = mesh_tol;
            BvpSolution s;
            {
                py::gil_scoped_release release;
                s = solve_het(parse_model_kind(kind), k, delta, c);
            }
            return solution_dict(s, k);
        },
        py::arg("kind"), py::arg("k"), py::arg("delta"), py::arg("mesh_tol") = 1e-9);

    m.def(
        "fit_linear_A",
        [](const std::vector<double>& delta, const std::vector<double>& A) {
            return fit_dict(fit_linear_A(table_of(ModelKind::CCH, 0, delta, A, {})));
        },
        py::arg("delta"), py::arg("A"));
    m.def(
        "fit_cube_root_A",
        [](const std::vector<double>& delta, const std::vector<double>& A) {
            return fit_dict(fit_cube_root_A(table_of(ModelKind::HCCH, 0, delta, A, {})));
        },
        py::arg("delta"), py::arg("A"));
    m.def(
        "fit_log_width",
        [](const std::vector<double>& delta, const std::vector<double>& width) {
            std::vector<double> A(delta.size(), 1.0);
            return fit_dict(fit_log_width(table_of(ModelKind::CCH, 1, delta, A, width)));
        },
        py::arg("delta"), py::arg("width"));
}
