#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qsim/cohomology.hpp"
#include "qsim/conjugator.hpp"
#include "qsim/filiform.hpp"
#include "qsim/instances.hpp"
#include "qsim/scenario.hpp"

namespace py = pybind11;
using namespace qsim;

namespace {

Rat rat_from_py(const py::handle& v) {
    if (py::isinstance<py::str>(v)) return rat_parse(v.cast<std::string>());
    if (py::isinstance<py::int_>(v)) return Rat(v.cast<long>());
    throw py::type_error("rational coordinates must be int or 'num/den' strings");
}

FilPoint point_from_py(int step, const py::sequence& coords) {
    std::vector<Rat> c;
    for (const auto& v : coords) c.push_back(rat_from_py(v));
    return FilPoint(step, std::move(c));
}

py::list point_to_py(const FilPoint& p) {
    py::list out;
    for (const auto& q : p.c) out.append(rat_str(q));
    return out;
}

PiecewisePoly poly_from_py(const py::dict& spec) {
    std::string kind = spec["kind"].cast<std::string>();
    if (kind == "zero") return PiecewisePoly::zero();
    if (kind == "linear") return PiecewisePoly::linear(rat_from_py(spec["slope"]));
    if (kind == "const") return PiecewisePoly::constant(rat_from_py(spec["value"]));
    if (kind == "hat")
        return PiecewisePoly::hat(rat_from_py(spec["center"]), rat_from_py(spec["halfwidth"]),
                                  rat_from_py(spec["height"]));
    throw py::value_error("unknown piecewise-poly kind: " + kind);
}

VectorXd vec_from_py(const std::vector<double>& v) {
    VectorXd x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
    return x;
}

std::shared_ptr<SampledSpace> space_from_json(const std::string& text) {
    return std::make_shared<SampledSpace>(load_space(json::parse(text)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "quasisimilarity conjugation toolkit: parabolic metrics, filiform arithmetic, "
              "cocycle checks and Folner averaging";

    // ---- spaces -----------------------------------------------------------
    py::class_<SampledSpace, std::shared_ptr<SampledSpace>>(m, "Space")
        .def(py::init(&space_from_json), py::arg("space_json"),
             "build a sampled space from the scenario JSON for a space")
        .def_property_readonly("size", &SampledSpace::size)
        .def_property_readonly("basepoint", &SampledSpace::basepoint)
        .def("dist", py::overload_cast<int, int>(&SampledSpace::dist, py::const_))
        .def("__repr__", [](const SampledSpace& s) {
            return "<Space kind=" + s.spec().kind + " points=" + std::to_string(s.size()) + ">";
        });

    m.def("power_dist",
          [](double beta, const std::vector<double>& x, const std::vector<double>& y) {
              PowerEuclidean space(static_cast<int>(x.size()), beta);
              return power_dist(space, vec_from_py(x), vec_from_py(y));
          },
          py::arg("beta"), py::arg("x"), py::arg("y"),
          "|x - y|^beta with the Euclidean norm, 0 < beta <= 1");

    m.def("parabolic_dist",
          [](const std::vector<double>& alphas, const std::vector<int>& dims,
             const std::vector<double>& x, const std::vector<double>& y) {
              ParabolicSpec spec(alphas, dims);
              return parabolic_dist(spec, vec_from_py(x), vec_from_py(y));
          },
          py::arg("alphas"), py::arg("block_dims"), py::arg("x"), py::arg("y"),
          "max_i |x_i - y_i|^{alpha_1/alpha_i} over the diagonal blocks");

    m.def("madic_dist",
          [](int mbase, const std::vector<int>& a, const std::vector<int>& b) {
              return madic_dist(MadicNumber(mbase, 0, a), MadicNumber(mbase, 0, b));
          },
          py::arg("m"), py::arg("a"), py::arg("b"),
          "m^{-(k+1)} at the first differing digit index k (digits from index 0)");

    m.def("verify_metric_axioms",
          [](const std::shared_ptr<SampledSpace>& Y, double tol, long max_triples,
             unsigned long seed) {
              AxiomReport rep = verify_metric_axioms(*Y, tol, max_triples, seed);
              py::dict out;
              out["passed"] = rep.passed();
              out["pairs_checked"] = rep.pairs_checked;
              out["triples_checked"] = rep.triples_checked;
              out["ultrametric_checked"] = rep.ultrametric_checked;
              out["violations"] = rep.violations.size();
              return out;
          },
          py::arg("space"), py::arg("tol") = 1e-12, py::arg("max_triples") = 200000,
          py::arg("seed") = 0);

    // ---- Lipschitz function space ------------------------------------------
    m.def("lip_norm",
          [](const std::shared_ptr<SampledSpace>& Y, double beta,
             const std::vector<std::vector<double>>& values) {
              MatrixXd vals(Y->size(), values.empty() ? 0 : values.front().size());
              if (static_cast<int>(values.size()) != Y->size())
                  throw py::value_error("one value row per sample point");
              for (int i = 0; i < Y->size(); ++i)
                  for (std::size_t k = 0; k < values[i].size(); ++k) vals(i, k) = values[i][k];
              return lip_norm(LipschitzSample(*Y, beta, std::move(vals)));
          },
          py::arg("space"), py::arg("beta"), py::arg("values"),
          "sup over sampled pairs of |h(y1) - h(y2)| / d(y1, y2)^{1/beta}");

    m.def("mcshane_extend",
          [](const std::shared_ptr<SampledSpace>& Y, double beta,
             const std::vector<std::vector<double>>& values, const std::vector<double>& point) {
              MatrixXd vals(Y->size(), values.empty() ? 0 : values.front().size());
              if (static_cast<int>(values.size()) != Y->size())
                  throw py::value_error("one value row per sample point");
              for (int i = 0; i < Y->size(); ++i)
                  for (std::size_t k = 0; k < values[i].size(); ++k) vals(i, k) = values[i][k];
              LipschitzSample h(*Y, beta, std::move(vals));
              SamplePoint p;
              p.x = vec_from_py(point);
              if (Y->spec().has_madic())
                  throw py::value_error("mcshane_extend here takes real coordinates only");
              VectorXd out = mcshane_extend(h, p);
              return std::vector<double>(out.data(), out.data() + out.size());
          },
          py::arg("space"), py::arg("beta"), py::arg("values"), py::arg("point"),
          "per-coordinate McShane extension at an off-sample point");

    // ---- filiform ---------------------------------------------------------
    m.def("fil_mul",
          [](int step, const py::sequence& p, const py::sequence& q) {
              return point_to_py(fil_mul(point_from_py(step, p), point_from_py(step, q)));
          },
          py::arg("step"), py::arg("p"), py::arg("q"),
          "exact group product in exponential coordinates; rationals as 'num/den' strings");

    m.def("fil_bracket",
          [](int step, const py::sequence& p, const py::sequence& q) {
              return point_to_py(fil_bracket(point_from_py(step, p), point_from_py(step, q)));
          },
          py::arg("step"), py::arg("p"), py::arg("q"));

    m.def("fil_dilate",
          [](int step, const std::string& t, const py::sequence& p) {
              return point_to_py(fil_dilate(rat_parse(t), point_from_py(step, p)));
          },
          py::arg("step"), py::arg("t"), py::arg("p"));

    m.def("graded_auto",
          [](int step, const std::string& a1, const std::string& a2, const py::sequence& p) {
              return point_to_py(graded_auto(rat_parse(a1), rat_parse(a2), point_from_py(step, p)));
          },
          py::arg("step"), py::arg("a1"), py::arg("a2"), py::arg("p"));

    m.def("homogeneous_norm",
          [](int step, const py::sequence& p) { return homogeneous_norm(point_from_py(step, p)); },
          py::arg("step"), py::arg("p"));

    m.def("fil_dist",
          [](int step, const py::sequence& p, const py::sequence& q) {
              return fil_dist(point_from_py(step, p), point_from_py(step, q));
          },
          py::arg("step"), py::arg("p"), py::arg("q"),
          "left-invariant quasi-distance ||(-p) * q|| from the homogeneous quasi-norm");

    py::class_<NormalForm>(m, "NormalForm")
        .def(py::init([](int step, const std::string& a1, const std::string& a2,
                         const py::sequence& p, const py::dict& h) {
                 return NormalForm(step, rat_parse(a1), rat_parse(a2), point_from_py(step, p),
                                   poly_from_py(h));
             }),
             py::arg("step"), py::arg("a1"), py::arg("a2"), py::arg("p"), py::arg("h"),
             "h_{a1,a2} o L_p o F_h with h a piecewise polynomial spec "
             "({'kind': 'zero'|'linear'|'const'|'hat', ...})")
        .def_static("identity", &NormalForm::identity)
        .def("apply",
             [](const NormalForm& F, const py::sequence& x) {
                 return point_to_py(F.apply(point_from_py(F.step(), x)));
             })
        .def("compose", &NormalForm::compose)
        .def("inverse", &NormalForm::inverse)
        .def("equals", &NormalForm::equals)
        .def_property_readonly("a1", [](const NormalForm& F) { return rat_str(F.a1()); })
        .def_property_readonly("a2", [](const NormalForm& F) { return rat_str(F.a2()); })
        .def_property_readonly("translation",
                               [](const NormalForm& F) { return point_to_py(F.translation()); });

    m.def("boundary_trace",
          [](const NormalForm& F) {
              PlanarMap f = boundary_trace(F);
              py::dict out;
              out["a1"] = rat_str(f.a1);
              out["a2"] = rat_str(f.a2);
              out["a"] = rat_str(f.a);
              out["b"] = rat_str(f.b);
              return out;
          },
          "the induced map of the first layer: (x2, x1) -> (a2(x2 + b + h(x1)), a1(x1 + a))");

    m.def("solvability_witness",
          [](const std::vector<NormalForm>& maps) {
              SolvabilityReport rep = solvability_witness(maps);
              py::dict out;
              out["passed"] = rep.passed();
              out["pi1_homomorphism"] = rep.pi1_homomorphism;
              out["pi2_homomorphism"] = rep.pi2_homomorphism;
              out["kernel_abelian"] = rep.kernel_abelian;
              out["max_pointwise_defect"] = rep.max_pointwise_defect;
              return out;
          });

    // ---- scenario runner ----------------------------------------------------
    m.def("run_scenario",
          [](const std::string& path, const std::string& out_dir, double tol, long max_words,
             long seed, int threads) {
              RunOverrides ov;
              if (tol >= 0) ov.tol = tol;
              if (max_words >= 0) ov.max_words = max_words;
              if (seed >= 0) ov.seed = static_cast<unsigned long>(seed);
              if (threads > 0) ov.threads = threads;
              RunResult r = run_scenario_file(path, ov);
              if (!out_dir.empty()) write_outputs(r, out_dir);
              py::dict out;
              out["exit_code"] = r.exit_code;
              out["summary"] = r.summary;
              out["report"] = r.report.dump(2);
              return out;
          },
          py::arg("path"), py::arg("out_dir") = "", py::arg("tol") = -1.0,
          py::arg("max_words") = -1, py::arg("seed") = -1, py::arg("threads") = -1,
          "run a scenario file; exit_code 0 = certified, 1 = uncertified, 2 = input error");

    m.def("run_scenario_text",
          [](const std::string& config_text) {
              RunResult r = run_scenario_json(json::parse(config_text));
              py::dict out;
              out["exit_code"] = r.exit_code;
              out["summary"] = r.summary;
              out["report"] = r.report.dump(2);
              return out;
          },
          py::arg("config_json"));

    m.def("verify",
          [](const std::string& suite, unsigned long seed, int threads) {
              std::ostringstream os;
              int code = verify_suite(suite, seed, os, threads);
              return py::make_tuple(code, os.str());
          },
          py::arg("suite"), py::arg("seed") = 1, py::arg("threads") = 1,
          "run a built-in verification suite; returns (exit_code, table_text)");
}
