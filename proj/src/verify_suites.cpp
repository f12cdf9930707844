#include <iomanip>
#include <iostream>
#include <random>
#include <set>

#include "qsim/cohomology.hpp"
#include "qsim/conjugator.hpp"
#include "qsim/filiform.hpp"
#include "qsim/instances.hpp"
#include "qsim/scenario.hpp"

namespace qsim {

namespace {

struct Table {
    std::ostream& out;
    bool all_ok = true;

    void row(const std::string& name, bool ok, const std::string& detail = "") {
        out << (ok ? "PASS  " : "FAIL  ") << std::left << std::setw(56) << name;
        if (!detail.empty()) out << "  " << detail;
        out << "\n";
        all_ok = all_ok && ok;
    }
};

std::vector<std::pair<Word, Word>> word_pairs(const GroupSpec& spec, int max_len) {
    std::vector<Word> words = {Word::identity()};
    std::set<std::vector<std::pair<int, int>>> seen = {{}};
    std::size_t lo = 0;
    for (int l = 0; l < max_len; ++l) {
        std::size_t hi = words.size();
        for (std::size_t i = lo; i < hi; ++i)
            for (int g = 0; g < static_cast<int>(spec.gens.size()); ++g)
                for (int e : {1, -1}) {
                    Word w = words[i].then(g, e);
                    if (w.length() == l + 1 && seen.insert(w.letters).second) words.push_back(w);
                }
        lo = hi;
    }
    std::vector<std::pair<Word, Word>> pairs;
    for (const auto& u : words)
        for (const auto& v : words) pairs.push_back({u, v});
    return pairs;
}

int suite_metrics(unsigned long seed, std::ostream& out) {
    Table t{out};
    const char* kinds[] = {"power", "parabolic", "madic", "power_madic", "parabolic_madic"};
    for (int k = 0; k < 5; ++k) {
        auto Y = random_space(kinds[k], 24, seed + k);
        AxiomReport rep = verify_metric_axioms(*Y, 1e-12, 200000, seed);
        t.row(std::string("axioms on ") + kinds[k], rep.passed(),
              std::to_string(rep.triples_checked) + " triples" +
                  (rep.ultrametric_checked ? ", ultrametric" : ""));
    }
    bool rejected = false;
    try {
        PowerEuclidean bad(1, 1.5);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    t.row("beta > 1 rejected at construction", rejected);
    // Document why: |0-2|^1.5 = 2.83 > |0-1|^1.5 + |1-2|^1.5 = 2.
    MatrixXd D(3, 3);
    D << 0, 1, std::pow(2.0, 1.5), 1, 0, 1, std::pow(2.0, 1.5), 1, 0;
    AxiomReport bad_rep = verify_metric_axioms(D, 1e-12, false);
    t.row("triangle violation detected for beta = 1.5", !bad_rep.passed());
    return t.all_ok ? 0 : 1;
}

int suite_filiform(unsigned long seed, std::ostream& out) {
    Table t{out};
    json cfg = {{"pipeline", "verify-filiform"}, {"step", 3}, {"triples", 300}, {"seed", seed}};
    RunResult r3 = run_scenario_json(cfg);
    for (const auto& c : r3.report.at("checks"))
        t.row("[f3] " + c.at("check").get<std::string>(), c.at("passed").get<bool>());
    cfg["step"] = 4;
    RunResult r4 = run_scenario_json(cfg);
    for (const auto& c : r4.report.at("checks"))
        t.row("[f4] " + c.at("check").get<std::string>(), c.at("passed").get<bool>());
    return t.all_ok ? 0 : 1;
}

int suite_cocycle(unsigned long seed, std::ostream& out, int threads) {
    Table t{out};
    double worst = 0;
    for (int k = 0; k < 8; ++k) {
        ActionInstance inst = random_structured_action(seed + k);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        Cocycle b = cocycle_of_action(action);
        double r = b.check(word_pairs(inst.spec, 2), CocycleOrientation::GammaStar, threads);
        worst = std::max(worst, r);
    }
    t.row("cocycle identity on 8 random structured actions", worst <= 1e-10,
          "max residual " + std::to_string(worst));

    // A perturbed generator value must be detected at its own scale.
    ActionInstance inst = random_structured_action(seed * 2);  // even: permutation sigmas
    WordAction action(*inst.Y, inst.spec, inst.beta);
    std::vector<LipschitzSample> vals;
    for (std::size_t g = 0; g < inst.spec.gens.size(); ++g)
        vals.push_back(action.cocycle_sample(Word::gen(static_cast<int>(g))));
    MatrixXd bump = MatrixXd::Zero(inst.Y->size(), action.active_dim());
    bump(1, 0) = 0.5;
    LipschitzSample delta(*inst.Y, inst.beta, bump);
    double delta_norm = lip_norm(delta);
    vals[0] += delta;
    Cocycle perturbed = Cocycle::with_values(action, vals);
    // push the perturbed letter through the other generator's isometric part
    std::vector<std::pair<Word, Word>> pairs = {{Word::gen(0), Word::gen(1)}};
    double r = perturbed.check(pairs, CocycleOrientation::GammaStar, threads);
    t.row("perturbation detected (residual >= perturbation size - tol)", r >= delta_norm - 1e-9,
          "residual " + std::to_string(r) + " vs " + std::to_string(delta_norm));

    // Trivial action: zero cocycle.
    ActionInstance triv = order_two_action(4);
    triv.spec.gens[0] =
        StructuredMap(1.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1), HField::zero(1),
                      triv.spec.gens[0].sigma);
    WordAction ta(*triv.Y, triv.spec, 1.0);
    Cocycle tb = cocycle_of_action(ta);
    double tr = tb.check(word_pairs(triv.spec, 2), CocycleOrientation::GammaStar, threads);
    t.row("trivial action has zero residual", tr == 0.0);
    return t.all_ok ? 0 : 1;
}

int suite_hislip(unsigned long seed, std::ostream& out) {
    Table t{out};
    {
        ActionInstance inst = scaled_shear_action(4.0, 0.5);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        UniformityReport uni = uniformity_check(action, 2, 48, seed);
        HislipReport rep = hislip_check(action, uni, 1e-9);
        for (const auto& e : rep.entries) {
            t.row("c_sigma = a^beta for " + e.generator, e.sigma_matches,
                  "c_sigma " + std::to_string(e.c_sigma) + ", a^beta " + std::to_string(e.a_beta));
            t.row("lip(h)^beta <= M^2 for " + e.generator, e.lip_bounded);
            t.row("C/M <= a^beta <= MC for " + e.generator, e.sandwich);
        }
    }
    {
        ActionInstance inst = order_two_action(6);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        UniformityReport uni = uniformity_check(action, 2, 48, seed);
        HislipReport rep = hislip_check(action, uni, 1e-9);
        t.row("order-two example: c_sigma = 1 = a^beta", rep.entries.front().sigma_matches);
    }
    {
        ActionInstance inst = order_two_action(6);
        inst.spec.gens[0] = StructuredMap(1.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1),
                                          HField::zero(1), SampleMap::identity());
        WordAction action(*inst.Y, inst.spec, inst.beta);
        UniformityReport uni = uniformity_check(action, 1, 48, seed);
        bool id_ok = std::abs(uni.M - 1.0) <= 1e-9;
        double C = uni.C.count("s") ? uni.C.at("s") : 0.0;
        t.row("identity map has (M, C) = (1, 1)", id_ok && std::abs(C - 1.0) <= 1e-9);
    }
    return t.all_ok ? 0 : 1;
}

int suite_conjugation(unsigned long seed, std::ostream& out, int threads) {
    Table t{out};
    {
        ActionInstance inst = order_two_action(8);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        FolnerOutcome avg = folner_average(action, 1e-10, threads);
        t.row("order-two fixed point residual = 0", avg.final_residual <= 1e-15,
              "residual " + std::to_string(avg.final_residual));
        ConjugatedMap cm = conjugate(action, 0, avg.h0);
        t.row("conjugated h-part vanishes", cm.h_part_norm <= 1e-15);
        DefectSample d = structured_defect(action, cm.map, cm.covered, 200, seed);
        t.row("conjugated generator is a similarity", d.defect <= 1e-12,
              "defect " + std::to_string(d.defect));
        // h0(y) = y/2 from the two-element average.
        bool h0_ok = true;
        for (int i = 0; i < inst.Y->size(); ++i)
            h0_ok = h0_ok &&
                    std::abs(avg.h0.values(i, 0) - 0.5 * inst.Y->point(i).x[0]) <= 1e-14;
        t.row("averaged h0 equals y/2", h0_ok);
    }
    {
        // Idempotence: similarity inputs conjugate to themselves.
        ActionInstance inst = order_two_action(8);
        inst.spec.gens[0] = StructuredMap(2.0, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 1.0),
                                          HField::zero(1), inst.spec.gens[0].sigma);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        FolnerOutcome avg = folner_average(action, 1e-10, threads);
        bool zero = lip_norm(avg.h0) <= 1e-15;
        ConjugatedMap cm = conjugate(action, 0, avg.h0);
        t.row("similarity inputs are fixed (h0 = 0, map unchanged)",
              zero && cm.h_part_norm <= 1e-15 &&
                  (cm.map.x_off - inst.spec.gens[0].x_off).cwiseAbs().maxCoeff() <= 1e-15);
    }
    {
        // Monotone certificate on a Cesaro run.
        ActionInstance inst = shift_hat_action(1.5, 1.0, 0.02, 4.0, 0.25, 200);
        WordAction action(*inst.Y, inst.spec, inst.beta);
        FolnerOutcome avg = folner_average(action, 1e-2, threads);
        std::vector<int> all_idx(inst.Y->size());
        for (int i = 0; i < inst.Y->size(); ++i) all_idx[i] = i;
        DefectSample before = structured_defect(action, inst.spec.gens[0], all_idx, 200, seed);
        ConjugatedMap cm = conjugate(action, 0, avg.h0);
        DefectSample after = structured_defect(action, cm.map, cm.covered, 200, seed);
        double bound = before.defect + 2.0 * avg.final_residual / before.inf_ratio;
        t.row("monotone certificate: defect_after <= defect_before + 2 residual / C_min",
              after.defect <= bound + 1e-12,
              "after " + std::to_string(after.defect) + " bound " + std::to_string(bound));
    }
    return t.all_ok ? 0 : 1;
}

}  // namespace

int verify_suite(const std::string& name, unsigned long seed, std::ostream& out, int threads) {
    if (name == "metrics") return suite_metrics(seed, out);
    if (name == "filiform") return suite_filiform(seed, out);
    if (name == "cocycle") return suite_cocycle(seed, out, threads);
    if (name == "hislip") return suite_hislip(seed, out);
    if (name == "conjugation") return suite_conjugation(seed, out, threads);
    out << "unknown suite \"" << name
        << "\" (expected: metrics, filiform, cocycle, hislip, conjugation)\n";
    return 2;
}

}  // namespace qsim
