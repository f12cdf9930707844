#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "qsim/filiform.hpp"
#include "qsim/scenario.hpp"

using namespace qsim;

namespace {

json minimal_conjugate_config() {
    return json::parse(R"({
      "pipeline": "conjugate",
      "seed": 1,
      "beta": 1.0,
      "active_dim": 1,
      "tolerances": {"residual": 1e-6, "defect": 1e-5},
      "space": {"kind": "power", "dim": 1, "beta": 1.0, "basepoint": 0,
                "points": [[0.0],[0.5],[-0.5],[1.0],[-1.0],[1.5],[-1.5],[2.0],[-2.0]]},
      "group": {
        "kind": "finite",
        "generators": {
          "s": {"a": 1.0, "A": [[1.0]],
                 "h": {"kind": "linear", "matrix": [[1.0]]},
                 "sigma": {"kind": "affine", "scale": 1.0, "orthogonal": [[-1.0]], "offset": [0.0]}}
        },
        "folner": [{"words": [[], [["s", 1]]]}]
      }
    })");
}

}  // namespace

TEST_CASE("space and group round-trip from JSON") {
    json cfg = minimal_conjugate_config();
    SampledSpace Y = load_space(cfg.at("space"));
    CHECK(Y.size() == 9);
    CHECK(Y.basepoint() == 0);
    CHECK(Y.dist(1, 2) == doctest::Approx(1.0));
    GroupSpec spec = load_group(cfg.at("group"), Y, 1);
    CHECK(spec.names == std::vector<std::string>{"s"});
    CHECK(spec.folner.size() == 1);
    CHECK(spec.folner[0].size() == 2);
}

TEST_CASE("the order-two scenario certifies with exit code 0") {
    RunResult r = run_scenario_json(minimal_conjugate_config());
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("certified").get<bool>());
    CHECK(r.report.at("folner").at("final_residual").get<double>() <= 1e-10);
    // trace has the fixed column header
    CHECK(r.trace_csv.rfind("stage,folner_size,residual,max_defect,wall_ms", 0) == 0);
}

TEST_CASE("missing generators is an input error (exit 2)") {
    json cfg = minimal_conjugate_config();
    cfg["group"].erase("generators");
    RunResult r = run_scenario_json(cfg);
    CHECK(r.exit_code == 2);
    CHECK(r.summary.find("generators") != std::string::npos);
}

TEST_CASE("unknown pipeline and malformed json are input errors") {
    json cfg = minimal_conjugate_config();
    cfg["pipeline"] = "nonsense";
    CHECK(run_scenario_json(cfg).exit_code == 2);

    auto tmp = std::filesystem::temp_directory_path() / "qsim_bad.json";
    std::ofstream(tmp) << "{ not json";
    RunResult r = run_scenario_file(tmp);
    CHECK(r.exit_code == 2);
    std::filesystem::remove(tmp);
}

TEST_CASE("reports are byte-identical across worker counts") {
    json cfg = minimal_conjugate_config();
    RunOverrides ov1, ov4;
    ov1.threads = 1;
    ov4.threads = 4;
    std::string a = run_scenario_json(cfg, ov1).report.dump(2);
    std::string b = run_scenario_json(cfg, ov4).report.dump(2);
    CHECK(a == b);
}

TEST_CASE("verify-cocycle and verify-metrics pipelines") {
    json cfg = minimal_conjugate_config();
    cfg["pipeline"] = "verify-cocycle";
    cfg["word_length"] = 2;
    RunResult r = run_scenario_json(cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("residual").get<double>() <= 1e-10);

    json mcfg = {{"pipeline", "verify-metrics"},
                 {"space", cfg.at("space")}};
    RunResult m = run_scenario_json(mcfg);
    CHECK(m.exit_code == 0);
    CHECK(m.report.at("axioms").at("passed").get<bool>());
}

TEST_CASE("max-words override truncates the schedule") {
    json cfg = minimal_conjugate_config();
    RunOverrides ov;
    ov.max_words = 1;  // only the identity word remains: h0 = 0, residual = ||h_s||
    RunResult r = run_scenario_json(cfg, ov);
    CHECK(r.report.at("folner").at("stage_sizes")[0].get<int>() == 1);
    CHECK(r.exit_code == 1);  // no longer certified
}

TEST_CASE("abelian box schedules") {
    json cfg = minimal_conjugate_config();
    // a second generator so the box has rank 2
    cfg["group"]["generators"]["t"] = {{"a", 1.0}, {"A", {{1.0}}}, {"x_off", {0.25}}};
    cfg["group"]["kind"] = "free-abelian";
    cfg["group"]["folner"] = {{{"box", 1}}};
    SampledSpace Y = load_space(cfg.at("space"));
    GroupSpec spec = load_group(cfg.at("group"), Y, 1);
    REQUIRE(spec.folner.size() == 1);
    CHECK(spec.folner[0].size() == 9);  // {-1,0,1}^2
    // words have exponents realized as repeated letters with signs
    int with_inverse = 0;
    for (const auto& w : spec.folner[0])
        for (const auto& [g, e] : w.letters)
            if (e < 0) ++with_inverse;
    CHECK(with_inverse > 0);
}

TEST_CASE("normal-form JSON round trip") {
    NormalForm F(3, Rat(2), Rat(-3), FilPoint(3, {Rat(1, 2), Rat(0), Rat(1), Rat(-1, 3)}),
                 PiecewisePoly::hat(Rat(1), Rat(1), Rat(1, 2)));
    json j = normal_form_to_json(F);
    CHECK(j.at("a1").get<std::string>() == "2");
    CHECK(j.at("p")[0].get<std::string>() == "1/2");
    CHECK(j.at("h").at("breaks").size() == 3);
    NormalForm G = normal_form_from_json(j);
    CHECK(G.equals(F));
    // rationals as num/den strings parse back exactly
    CHECK(normal_form_from_json(normal_form_to_json(G.inverse())).equals(F.inverse()));
}

TEST_CASE("tukia pipeline validates the madic factor action") {
    json cfg = json::parse(R"({
      "pipeline": "tukia-induction",
      "tolerances": {"residual": 1e-3},
      "space": {"kind": "parabolic_madic", "alphas": [1.0], "block_dims": [1], "m": 2,
                "window": 1, "basepoint": 0,
                "points": [[0.0, 0], [1.0, 0], [0.0, 1], [1.0, 1]]},
      "group_kind": "finite",
      "triangular_generators": {
        "g": {"a": 1.0, "blocks": [[[1.0]]], "h": [{"kind": "zero"}],
              "madic_sigma": {"kind": "affine", "scale": 1.0, "orthogonal": [[1.0]], "offset": [0.0]}}
      },
      "folner": [{"words": [[]]}]
    })");
    RunResult r = run_scenario_json(cfg);
    CHECK(r.exit_code == 2);
    CHECK(r.summary.find("madic_sigma") != std::string::npos);
}

TEST_CASE("verify suite dispatch") {
    std::ostringstream sink;
    CHECK(verify_suite("nonsense", 1, sink) == 2);
}
