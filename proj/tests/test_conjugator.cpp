#include <doctest.h>

#include "qsim/conjugator.hpp"
#include "qsim/instances.hpp"

using namespace qsim;

TEST_CASE("uniformity measurements") {
    // an exact similarity of scale 3 has (M, C) = (1, 3)
    ActionInstance inst = order_two_action(6);
    inst.spec.gens[0] = StructuredMap(3.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1),
                                      HField::zero(1),
                                      SampleMap::real_affine(3.0, MatrixXd::Identity(1, 1),
                                                             VectorXd::Zero(1)));
    WordAction action(*inst.Y, inst.spec, inst.beta);
    UniformityReport uni = uniformity_check(action, 1, 64, 3);
    CHECK(uni.M == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(uni.C.at("s") == doctest::Approx(3.0).epsilon(1e-9));

    // a shear with a bounded h keeps M finite and above 1
    ActionInstance sh = shift_hat_action(1.5, 1.0, 0.5, 4.0, 0.5, 4);
    WordAction action2(*sh.Y, sh.spec, sh.beta);
    UniformityReport uni2 = uniformity_check(action2, 1, 64, 3);
    CHECK(uni2.M >= 1.0);
    CHECK(uni2.M < 10.0);
    CHECK_THROWS_AS(
        uniformity_check(WordAction(*order_two_action(0).Y, sh.spec, 1.0), 1, 4, 3),
        std::invalid_argument);
}

TEST_CASE("hislip forced similarity constants") {
    // active factor scales by 4 on a beta = 1/2 product: sigma must scale
    // distances by 4^{1/2} = 2, which the affine scale-4 map on (R, |.|^{1/2}) does
    ActionInstance inst = scaled_shear_action(4.0, 0.5);
    WordAction action(*inst.Y, inst.spec, inst.beta);
    UniformityReport uni = uniformity_check(action, 2, 64, 5);
    HislipReport rep = hislip_check(action, uni, 1e-9);
    CHECK(rep.passed());
    CHECK(rep.entries[0].a_beta == doctest::Approx(2.0));
    CHECK(rep.entries[0].c_sigma == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("finite averaging is an exact invariant mean") {
    ActionInstance inst = order_two_action(8);
    WordAction action(*inst.Y, inst.spec, inst.beta);
    FolnerOutcome avg = folner_average(action, 1e-10);
    CHECK(avg.certified);
    CHECK(avg.final_residual == 0.0);
    for (int i = 0; i < inst.Y->size(); ++i)
        CHECK(avg.h0.values(i, 0) == doctest::Approx(0.5 * inst.Y->point(i).x[0]).epsilon(1e-15));

    SUBCASE("H0 shears and inverts") {
        ShearH0 H0 = build_H0(avg.h0);
        VectorXd x = VectorXd::Constant(1, 2.0);
        const SamplePoint& y = inst.Y->point(3);
        auto [fx, fy] = H0.apply(x, y);
        CHECK(fx[0] == doctest::Approx(2.0 + 0.5 * y.x[0]));
        auto [bx, by] = H0.apply_inverse(fx, fy);
        CHECK(bx[0] == doctest::Approx(2.0));
        // h0 = 0 gives the identity
        LipschitzSample zero = LipschitzSample::zero(*inst.Y, 1.0, 1);
        ShearH0 I = build_H0(zero);
        auto [ix, iy] = I.apply(x, y);
        CHECK(ix[0] == 2.0);
    }

    SUBCASE("conjugation produces the isometry (x, -y)") {
        ConjugatedMap cm = conjugate(action, 0, avg.h0);
        CHECK(cm.h_part_norm <= 1e-15);
        CHECK(cm.map.a == 1.0);
        CHECK(cm.map.x_off.cwiseAbs().maxCoeff() <= 1e-15);
        DefectSample d = structured_defect(action, cm.map, cm.covered, 128, 3);
        CHECK(d.defect <= 1e-12);
        // pointwise: H0 gamma H0^{-1} (x, y) = (x, -y)
        for (int i = 0; i < inst.Y->size(); ++i) {
            auto [fx, fy] = cm.map.apply(*inst.Y, VectorXd::Constant(1, 1.25), inst.Y->point(i));
            CHECK(fx[0] == doctest::Approx(1.25).epsilon(1e-15));
            CHECK(fy.x[0] == doctest::Approx(-inst.Y->point(i).x[0]).epsilon(1e-15));
        }
    }

    SUBCASE("already-similar generators are unchanged") {
        ActionInstance sim = order_two_action(8);
        sim.spec.gens[0] = StructuredMap(2.0, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 0.5),
                                         HField::zero(1), sim.spec.gens[0].sigma);
        WordAction a2(*sim.Y, sim.spec, sim.beta);
        FolnerOutcome avg2 = folner_average(a2, 1e-10);
        CHECK(lip_norm(avg2.h0) == 0.0);
        ConjugatedMap cm = conjugate(a2, 0, avg2.h0);
        CHECK(cm.h_part_norm == 0.0);
        CHECK((cm.map.x_off - sim.spec.gens[0].x_off).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("Cesaro averaging approaches the telescoping fixed point") {
    ActionInstance inst = shift_hat_action(1.5, 0.75, 0.02, 3.0, 0.25, 150);
    WordAction action(*inst.Y, inst.spec, inst.beta);
    LipschitzSample target = telescoping_fixed_point(action, 40);

    // the oracle solves h - pi h = h_gamma on the covered subset
    auto [img, cov] = action.affine_image(Word::gen(0), target);
    CHECK(cov.size() >= 10);
    CHECK(lip_norm_subset(img - target, cov) <= 1e-12);

    FolnerOutcome avg = folner_average(action, 5e-3);
    CHECK(avg.certified);
    CHECK(lip_norm(avg.h0 - target) <= 5e-3);
    // the average never leaves the orbit ball
    CHECK(lip_norm(avg.h0) <= avg.orbit_bound + 1e-12);
    // residual shrinks when the boxes grow
    ActionInstance big = shift_hat_action(1.5, 0.75, 0.02, 3.0, 0.25, 500);
    WordAction action_big(*big.Y, big.spec, big.beta);
    FolnerOutcome avg_big = folner_average(action_big, 1e-3);
    CHECK(avg_big.final_residual < avg.final_residual);
}

TEST_CASE("conjugation preserves the group pointwise") {
    ActionInstance inst = order_two_action(8);
    WordAction action(*inst.Y, inst.spec, inst.beta);
    FolnerOutcome avg = folner_average(action, 1e-10);
    ConjugatedMap cm = conjugate(action, 0, avg.h0);
    // (H0 s H0^{-1}) o (H0 s H0^{-1}) = H0 s^2 H0^{-1} = identity here
    for (int i = 0; i < inst.Y->size(); ++i) {
        VectorXd x = VectorXd::Constant(1, 0.75);
        auto [fx, fy] = cm.map.apply(*inst.Y, x, inst.Y->point(i));
        auto [gx, gy] = cm.map.apply(*inst.Y, fx, fy);
        CHECK(gx[0] == doctest::Approx(x[0]).epsilon(1e-12));
        CHECK(gy.x[0] == doctest::Approx(inst.Y->point(i).x[0]).epsilon(1e-12));
    }
}

TEST_CASE("similarity defect") {
    ActionInstance inst = order_two_action(8);
    WordAction action(*inst.Y, inst.spec, inst.beta);
    std::vector<int> all_idx(inst.Y->size());
    for (int i = 0; i < inst.Y->size(); ++i) all_idx[i] = i;
    // an exact similarity has defect 0
    StructuredMap sim(2.0, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 1.0), HField::zero(1),
                      SampleMap::real_affine(2.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1)));
    DefectSample d = structured_defect(action, sim, all_idx, 128, 7);
    CHECK(d.defect <= 1e-12);
    // an (M, C)-quasisimilarity has defect <= 2 log M against the pair-scan oracle
    DefectSample d2 = structured_defect(action, inst.spec.gens[0], all_idx, 256, 7);
    UniformityReport uni = uniformity_check(action, 1, 64, 7);
    CHECK(d2.defect <= 2.0 * std::log(uni.M) + 1e-9);
    CHECK(d2.defect > 0.0);
}

TEST_CASE("block induction base cases") {
    // r = 1, no m-adic factor: a no-op certifying the inputs as similarities
    TukiaScenario sc{ParabolicSpec({1.0}, {1}), std::nullopt, nullptr, {"t"}, {},
                     GroupKind::Finite, {{Word::identity()}}, 1e-6, 2e-6, 1, 1, 64};
    std::vector<SamplePoint> pts;
    for (int i = -3; i <= 3; ++i) {
        SamplePoint p;
        p.x = VectorXd::Constant(1, static_cast<double>(i));
        pts.push_back(p);
    }
    sc.full_space = std::make_shared<SampledSpace>(SpaceSpec::parabolic(ParabolicSpec({1.0}, {1})),
                                                   pts, 3);
    TriangularGen t;
    t.a = 2.0;
    t.blocks = {MatrixXd::Identity(1, 1)};
    t.h = {HField::constant(VectorXd::Constant(1, 0.5))};
    sc.gens = {t};
    ConjugationReport rep = tukia_induction(sc);
    CHECK(rep.certified);
    CHECK(rep.final_defect.at("t") <= 1e-12);
    CHECK(rep.scale_consistency.at("t") <= 1e-9);
    CHECK(rep.stages.empty());
}

namespace {

// Three diagonal blocks with a genuine shear at the middle stage: the first
// stage's fixed point is g0 = hat/2 on x3, and the block-1 field compensates
// the induced coordinate change so the second stage is an exact coboundary.
TukiaScenario three_block_scenario() {
    ParabolicSpec par({1.0, 2.0, 3.0}, {1, 1, 1});
    TukiaScenario sc{par, std::nullopt, nullptr, {"f", "t"}, {},
                     GroupKind::Finite, {{Word::identity(), Word::gen(0)}}, 1e-8, 2e-8, 1, 5, 200};
    std::vector<SamplePoint> pts;
    int base = -1;
    for (double x1 : {-1.0, 0.0, 1.0})
        for (double x2 : {-1.0, -0.5, 0.0, 0.5, 1.0})
            for (double x3 : {-1.0, 0.0, 1.0}) {
                if (x1 == 0 && x2 == 0 && x3 == 0) base = static_cast<int>(pts.size());
                SamplePoint p;
                p.x = VectorXd(3);
                p.x << x1, x2, x3;
                pts.push_back(std::move(p));
            }
    sc.full_space = std::make_shared<SampledSpace>(SpaceSpec::parabolic(par), pts, base);

    MatrixXd flip = -MatrixXd::Identity(1, 1);
    TriangularGen f;
    f.a = 1.0;
    f.blocks = {MatrixXd::Identity(1, 1), flip, MatrixXd::Identity(1, 1)};
    // h1 reads (x2, x3); the 0.15*hat(x3) term equals 0.3 * g0(x3)
    MatrixXd lin(1, 2);
    lin << 0.3, 0.0;
    f.h = {HField::sum({HField::linear(lin),
                        HField::hat(1, 1, 0.5, 0.5, VectorXd::Constant(1, 0.15))}),
           HField::hat(1, 0, 0.5, 0.5, VectorXd::Constant(1, 0.2)),
           HField::zero(1)};
    TriangularGen t;
    t.a = 1.0;
    t.blocks = {MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)};
    t.h = {HField::constant(VectorXd::Constant(1, 1.0)), HField::zero(1), HField::zero(1)};
    sc.gens = {f, t};
    return sc;
}

}  // namespace

TEST_CASE("two-stage induction with a nonzero shear stack") {
    TukiaScenario sc = three_block_scenario();
    ConjugationReport rep = tukia_induction(sc);
    REQUIRE(rep.stages.size() == 2);
    CHECK(rep.stages[0].block == 1);  // middle block averaged first
    CHECK(rep.stages[1].block == 0);
    CHECK(rep.stages[0].final_residual <= 1e-14);
    CHECK(rep.stages[1].final_residual <= 1e-14);
    CHECK(rep.certified);
    CHECK(rep.final_defect.at("f") <= 1e-10);
    CHECK(rep.final_defect.at("t") <= 1e-10);
    CHECK(rep.scale_consistency.at("f") <= 1e-9);
    // second-stage conjugation kills the shear exactly
    CHECK(max_element(rep.stages[1].defect_after.begin(), rep.stages[1].defect_after.end(),
                      [](auto& a, auto& b) { return a.second < b.second; })
              ->second <= 1e-12);
}

TEST_CASE("unclosed tail samples are rejected with an input error") {
    TukiaScenario sc = three_block_scenario();
    // a dilation on the last block cannot permute the finite grid
    sc.gens[0].a = 2.0;
    // tables force the permutation path at the first stage
    MatrixXd tbl = MatrixXd::Zero(3, 1);
    sc.gens[0].h[1] = HField::table(tbl);
    CHECK_THROWS_AS(tukia_induction(sc), std::invalid_argument);
}
