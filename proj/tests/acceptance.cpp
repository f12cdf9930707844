// Acceptance battery: one pass/fail line per criterion, exit 1 on any failure.
// Usage: qsim_acceptance <scenarios_dir> <out_dir>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fil_matrix_oracle.hpp"
#include "qsim/cohomology.hpp"
#include "qsim/conjugator.hpp"
#include "qsim/filiform.hpp"
#include "qsim/instances.hpp"
#include "qsim/scenario.hpp"

using namespace qsim;

namespace {

bool all_ok = true;

void criterion(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s criterion-%d: %s (%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
}

std::vector<Word> words_up_to(const GroupSpec& spec, int len) {
    std::vector<Word> words = {Word::identity()};
    std::set<std::vector<std::pair<int, int>>> seen = {{}};
    std::size_t lo = 0;
    for (int l = 0; l < len; ++l) {
        std::size_t hi = words.size();
        for (std::size_t i = lo; i < hi; ++i)
            for (int g = 0; g < static_cast<int>(spec.gens.size()); ++g)
                for (int e : {1, -1}) {
                    Word w = words[i].then(g, e);
                    if (w.length() == l + 1 && seen.insert(w.letters).second) words.push_back(w);
                }
        lo = hi;
    }
    return words;
}

RunResult run_bundled(const std::filesystem::path& dir, const std::string& name, int threads,
                      const std::filesystem::path& out_dir) {
    RunOverrides ov;
    ov.threads = threads;
    RunResult r = run_scenario_file(dir / (name + ".json"), ov);
    write_outputs(r, out_dir / (name + "_t" + std::to_string(threads)));
    return r;
}

FilPoint rand_point(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(-6, 6);
    std::uniform_int_distribution<long> den(1, 4);
    FilPoint p(n);
    for (int j = 0; j <= n; ++j) p.c[j] = rat_from_long(num(rng), den(rng));
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: qsim_acceptance <scenarios_dir> <out_dir>\n");
        return 2;
    }
    std::filesystem::path scenarios = argv[1];
    std::filesystem::path out_dir = argv[2];
    std::filesystem::create_directories(out_dir);

    // ----- criteria 1 and 2: random structured actions ----------------------
    {
        double worst_residual = 0;
        double worst_sigma_dev = 0, worst_lip_excess = 0;
        bool sandwich_ok = true;
        long pair_count = 0;
        for (unsigned long seed = 1; seed <= 50; ++seed) {
            ActionInstance inst = random_structured_action(seed);
            WordAction action(*inst.Y, inst.spec, inst.beta);
            Cocycle b = cocycle_of_action(action);
            std::vector<Word> words = words_up_to(inst.spec, 4);
            std::vector<std::pair<Word, Word>> pairs;
            for (const auto& u : words)
                for (const auto& v : words)
                    if (u.length() + v.length() <= 4) pairs.push_back({u, v});
            pair_count += static_cast<long>(pairs.size());
            worst_residual = std::max(worst_residual, b.check(pairs));

            UniformityReport uni = uniformity_check(action, 2, 32, seed);
            HislipReport hl = hislip_check(action, uni, 1e-9);
            for (const auto& e : hl.entries) {
                worst_sigma_dev = std::max(worst_sigma_dev, std::abs(e.c_sigma - e.a_beta));
                worst_lip_excess = std::max(
                    worst_lip_excess, std::pow(e.lip_h, inst.beta) - e.bound);
                sandwich_ok = sandwich_ok && e.sandwich;
            }
        }
        std::ostringstream d1;
        d1 << "max residual " << worst_residual << " over " << pair_count << " word pairs";
        criterion(1, "cocycle identity on 50 random structured actions", worst_residual <= 1e-10,
                  d1.str());
        std::ostringstream d2;
        d2 << "max |c_sigma - a^beta| = " << worst_sigma_dev << ", max lip_h^beta - M^2 = "
           << worst_lip_excess;
        criterion(2, "hislip bounds on the same corpus",
                  worst_sigma_dev <= 1e-9 && worst_lip_excess <= 1e-9 && sandwich_ok, d2.str());
    }

    // ----- criterion 3: finite-group scenarios are exact --------------------
    {
        RunResult intro = run_bundled(scenarios, "intro2d", 1, out_dir);
        double r_intro = intro.exit_code == 0
                             ? intro.report.at("folner").at("final_residual").get<double>()
                             : 1.0;
        double d_intro = 0;
        if (intro.exit_code == 0)
            for (const auto& [name, g] : intro.report.at("generators").items())
                d_intro = std::max(d_intro, g.at("defect_after").get<double>());

        RunResult madic = run_bundled(scenarios, "tukia_madic", 1, out_dir);
        double r_madic = 1.0, d_madic = 1.0;
        if (madic.exit_code == 0) {
            r_madic = 0;
            d_madic = 0;
            for (const auto& st : madic.report.at("stages")) {
                r_madic = std::max(r_madic, st.at("final_residual").get<double>());
                for (const auto& [name, v] : st.at("defect_after").items())
                    d_madic = std::max(d_madic, v.get<double>());
            }
        }
        std::ostringstream d;
        d << "intro2d residual " << r_intro << " defect " << d_intro << "; m-adic residual "
          << r_madic << " defect " << d_madic;
        criterion(3, "finite-group averaging is an exact invariant mean",
                  intro.exit_code == 0 && madic.exit_code == 0 && r_intro <= 1e-10 &&
                      d_intro <= 1e-10 && r_madic <= 1e-10 && d_madic <= 1e-10,
                  d.str());
    }

    // ----- criterion 4: Cesaro convergence against the telescoping oracle ---
    {
        ActionInstance inst = shift_hat_action(1.5, 0.75, 0.02, 3.0, 0.25, 500);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        LipschitzSample oracle = telescoping_fixed_point(action, 40);
        // the oracle really solves h0 - pi h0 = h_gamma on the covered subset
        auto [img, cov] = action.affine_image(Word::gen(0), oracle);
        double oracle_resid = lip_norm_subset(img - oracle, cov);
        FolnerOutcome avg = folner_average(action, 1e-3);
        double dist = lip_norm(avg.h0 - oracle);
        RunResult cesaro = run_bundled(scenarios, "cesaro_shift", 1, out_dir);
        std::ostringstream d;
        d << "|F| = " << avg.stage_sizes.back() << ", ||h0 - h*|| = " << dist << ", residual = "
          << avg.final_residual << ", oracle residual = " << oracle_resid;
        criterion(4, "Cesaro averaging within 1e-3 of the telescoping fixed point",
                  oracle_resid <= 1e-12 && dist <= 1e-3 && avg.final_residual <= 1e-3 &&
                      cesaro.exit_code == 0,
                  d.str());
    }

    // ----- criterion 5: two-block induction ---------------------------------
    json r2_report_t1;
    {
        RunResult r2 = run_bundled(scenarios, "tukia_r2", 1, out_dir);
        r2_report_t1 = r2.report;
        bool ok = r2.exit_code == 0;
        double worst_scale = 1, worst_defect = 1;
        if (ok) {
            worst_scale = 0;
            worst_defect = 0;
            for (const auto& [name, v] : r2.report.at("scale_consistency").items())
                worst_scale = std::max(worst_scale, v.get<double>());
            for (const auto& [name, v] : r2.report.at("final_defect").items())
                worst_defect = std::max(worst_defect, v.get<double>());
        }
        std::ostringstream d;
        d << "block scales (a, a^2) deviation " << worst_scale << ", final defect " << worst_defect;
        criterion(5, "two-block diagonal scenario certifies similarities",
                  ok && worst_scale <= 1e-9 && worst_defect <= 2e-3, d.str());
    }

    // ----- criterion 6: R x Q_2 induction ------------------------------------
    {
        RunResult rm = run_bundled(scenarios, "tukia_madic", 1, out_dir);
        bool ok = rm.exit_code == 0;
        double worst_scale = 1, worst_defect = 1;
        if (ok) {
            worst_scale = 0;
            worst_defect = 0;
            for (const auto& [name, v] : rm.report.at("scale_consistency").items())
                worst_scale = std::max(worst_scale, v.get<double>());
            for (const auto& [name, v] : rm.report.at("final_defect").items())
                worst_defect = std::max(worst_defect, v.get<double>());
        }
        std::ostringstream d;
        d << "final defect " << worst_defect << ", scale deviation " << worst_scale;
        criterion(6, "R x Q_2 scenario certifies similarities with exact m-adic isometries",
                  ok && worst_defect <= 2e-3 && worst_scale <= 1e-9, d.str());
    }

    // ----- criterion 7: filiform algebra exactness ---------------------------
    {
        std::mt19937_64 rng(2024);
        bool assoc = true;
        for (int n : {3, 4})
            for (int t = 0; t < 1000 && assoc; ++t) {
                FilPoint p = rand_point(n, rng), q = rand_point(n, rng), r = rand_point(n, rng);
                assoc = fil_mul(fil_mul(p, q), r) == fil_mul(p, fil_mul(q, r));
            }
        FilPoint e1 = FilPoint::basis(3, 1), e2 = FilPoint::basis(3, 2);
        bool known = fil_mul(e1, e2) == FilPoint(3, {Rat(1), Rat(1), Rat(1, 2), Rat(1, 12)}) &&
                     fil_mul(e1, e2) == qsim_test::oracle_mul(e1, e2);
        bool oracle_match = true;
        for (int t = 0; t < 100 && oracle_match; ++t) {
            FilPoint p = rand_point(4, rng), q = rand_point(4, rng);
            oracle_match = fil_mul(p, q) == qsim_test::oracle_mul(p, q);
        }
        PiecewisePoly g = PiecewisePoly::hat(Rat(1), Rat(1), Rat(1, 3));
        PiecewisePoly h = PiecewisePoly::linear(Rat(1, 7));
        bool shears = NormalForm::from_shear(4, g)
                          .compose(NormalForm::from_shear(4, h))
                          .equals(NormalForm::from_shear(4, g + h));
        double worst_norm = 0;
        for (int t = 0; t < 200; ++t) {
            FilPoint p = rand_point(5, rng);
            double tt = 0.3 + 0.4 * (t % 9);
            double lhs = homogeneous_norm(fil_dilate(Rat(tt), p));
            double rhs = tt * homogeneous_norm(p);
            worst_norm = std::max(worst_norm, std::abs(lhs - rhs) / std::max(1.0, rhs));
        }
        std::ostringstream d;
        d << "1000 exact triples per step; norm homogeneity error " << worst_norm;
        criterion(7, "filiform group law exact, oracle-matched, dilations homogeneous",
                  assoc && known && oracle_match && shears && worst_norm <= 1e-12, d.str());
    }

    // ----- criterion 8: solvability projections ------------------------------
    {
        std::mt19937_64 rng(4096);
        std::uniform_int_distribution<long> num(1, 3);
        std::vector<NormalForm> maps;
        for (int t = 0; t < 20; ++t) {
            int kind = t % 4;
            PiecewisePoly h = PiecewisePoly::hat(rat_from_long(num(rng) + 1), Rat(1),
                                                 rat_from_long(num(rng), 4));
            if (kind == 0) {
                Rat a1 = rat_from_long((t % 2 ? 1 : -1) * num(rng), num(rng));
                Rat a2 = rat_from_long(num(rng), 1);
                maps.push_back(NormalForm(3, a1, a2, rand_point(3, rng), h));
            } else if (kind == 1) {
                maps.push_back(NormalForm::from_translation(rand_point(3, rng)));
            } else if (kind == 2) {
                FilPoint z(3);
                z.c[1] = rat_from_long(num(rng), 2);
                z.c[2] = rat_from_long(num(rng), 3);
                maps.push_back(NormalForm(3, Rat(1), Rat(1), z, h));  // kernel of pi2
            } else {
                maps.push_back(NormalForm::from_shear(3, h));  // kernel of pi2
            }
        }
        SolvabilityReport rep = solvability_witness(maps);
        std::ostringstream d;
        d << "pi1 " << (rep.pi1_homomorphism ? "mult" : "BROKEN") << ", pi2 "
          << (rep.pi2_homomorphism ? "add" : "BROKEN") << ", commutator defect "
          << rep.max_pointwise_defect;
        criterion(8, "pi1/pi2 homomorphisms and abelian kernel on 20 normal forms",
                  rep.passed() && rep.max_pointwise_defect <= 1e-12, d.str());
    }

    // ----- criterion 9: metric axioms ----------------------------------------
    {
        auto P = random_space("parabolic", 120, 99);
        AxiomReport par = verify_metric_axioms(*P, 1e-12, 100000, 99);
        auto Q8 = madic_residue_space(2, 3);
        AxiomReport ultra2 = verify_metric_axioms(*Q8);
        auto Q9 = madic_residue_space(3, 2);
        AxiomReport ultra3 = verify_metric_axioms(*Q9);
        bool rejected = false;
        try {
            PowerEuclidean bad(1, 1.5);
            (void)bad;
        } catch (const std::invalid_argument&) {
            rejected = true;
        }
        std::ostringstream d;
        d << par.triples_checked << " d_A triples, "
          << ultra2.triples_checked + ultra3.triples_checked << " exhaustive ultrametric triples";
        criterion(9, "triangle inequality, exact ultrametric, beta > 1 rejected",
                  par.passed() && ultra2.passed() && ultra3.passed() &&
                      ultra2.ultrametric_checked && ultra3.ultrametric_checked && rejected &&
                      par.triples_checked >= 100000,
                  d.str());
    }

    // ----- criterion 10: determinism across worker counts --------------------
    {
        RunResult intro1 = run_bundled(scenarios, "intro2d", 1, out_dir);
        RunResult intro4 = run_bundled(scenarios, "intro2d", 4, out_dir);
        RunResult intro8 = run_bundled(scenarios, "intro2d", 8, out_dir);
        std::string i1 = intro1.report.dump(2), i4 = intro4.report.dump(2),
                    i8 = intro8.report.dump(2);
        RunResult r2_4 = run_bundled(scenarios, "tukia_r2", 4, out_dir);
        RunResult r2_8 = run_bundled(scenarios, "tukia_r2", 8, out_dir);
        std::string a = r2_report_t1.dump(2), b4 = r2_4.report.dump(2), b8 = r2_8.report.dump(2);
        bool ok = i1 == i4 && i4 == i8 && a == b4 && b4 == b8;
        criterion(10, "byte-identical reports across 1, 4 and 8 workers", ok,
                  ok ? "reports identical" : "reports differ");
    }

    std::printf("%s\n", all_ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
    return all_ok ? 0 : 1;
}
