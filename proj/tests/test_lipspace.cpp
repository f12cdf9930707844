#include <doctest.h>

#include <random>

#include "qsim/instances.hpp"
#include "qsim/lipschitz_space.hpp"

using namespace qsim;

namespace {

SampledSpace two_point_space() {
    SamplePoint a, b;
    a.x = VectorXd::Zero(1);
    b.x = VectorXd::Constant(1, 1.0);
    return SampledSpace(SpaceSpec::power(1, 1.0), {a, b}, 0);
}

}  // namespace

TEST_CASE("lip_norm basics") {
    SampledSpace Y = two_point_space();
    CHECK(lip_norm(LipschitzSample::zero(Y, 1.0, 2)) == 0.0);

    MatrixXd vals(2, 2);
    vals << 0, 0, 3, 4;
    LipschitzSample h(Y, 1.0, vals);
    CHECK(lip_norm(h) == doctest::Approx(5.0));
    CHECK(lip_norm(7.0 * h) == doctest::Approx(35.0));

    // basepoint normalization enforced
    MatrixXd bad(2, 2);
    bad << 1, 0, 0, 0;
    CHECK_THROWS_AS(LipschitzSample(Y, 1.0, bad), std::invalid_argument);
}

TEST_CASE("mcshane extension") {
    // samples h(0) = 0, h(2) = 2 with constant 1: the midpoint gets 1
    SamplePoint a, b;
    a.x = VectorXd::Zero(1);
    b.x = VectorXd::Constant(1, 2.0);
    SampledSpace Y(SpaceSpec::power(1, 1.0), {a, b}, 0);
    MatrixXd vals(2, 1);
    vals << 0, 2;
    LipschitzSample h(Y, 1.0, vals);
    SamplePoint mid;
    mid.x = VectorXd::Constant(1, 1.0);
    CHECK(mcshane_extend(h, mid)[0] == doctest::Approx(1.0));
    // agrees with stored values on the sample
    CHECK(mcshane_extend(h, b)[0] == doctest::Approx(2.0));
    // zero extends as zero
    CHECK(mcshane_extend(LipschitzSample::zero(Y, 1.0, 1), mid)[0] == doctest::Approx(0.0));

    // the per-coordinate constant does not increase when a point is added
    std::mt19937_64 rng(5);
    auto Yr = random_space("power", 12, 9);
    std::uniform_real_distribution<double> val(-1, 1), coord(-2, 2);
    MatrixXd v = MatrixXd::Zero(Yr->size(), 2);
    for (int i = 1; i < Yr->size(); ++i) v.row(i) << val(rng), val(rng);
    LipschitzSample g(*Yr, 0.5, v);
    SamplePoint fresh;
    fresh.x = VectorXd(2);
    fresh.x << coord(rng), coord(rng);
    VectorXd ext = mcshane_extend(g, fresh);
    for (int k = 0; k < 2; ++k) {
        double before = 0, after = 0;
        for (int i = 0; i < Yr->size(); ++i)
            for (int j = i + 1; j < Yr->size(); ++j) {
                double d = Yr->dist(i, j);
                if (d <= 0) continue;
                before = std::max(before, std::abs(v(i, k) - v(j, k)) / std::pow(d, 2.0));
            }
        after = before;
        for (int i = 0; i < Yr->size(); ++i) {
            double d = Yr->dist(Yr->point(i), fresh);
            if (d <= 0) continue;
            after = std::max(after, std::abs(v(i, k) - ext[k]) / std::pow(d, 2.0));
        }
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("module action: formula, linearity, isometry") {
    // isometric permutation sigma on an n-gon: the action is a linear isometry
    auto Y = ngon_space(8, 1.0);
    std::vector<int> rot(8);
    for (int i = 0; i < 8; ++i) rot[i] = (i + 3) % 8;
    MatrixXd A(1, 1);
    A << -1.0;
    ModuleActionElement g(1.0, A, rot, *Y);
    CHECK(g.c_sigma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.c_sigma_dev <= 1e-12);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> val(-1, 1);
    MatrixXd v1 = MatrixXd::Zero(8, 1), v2 = MatrixXd::Zero(8, 1);
    for (int i = 1; i < 8; ++i) {
        v1(i, 0) = val(rng);
        v2(i, 0) = val(rng);
    }
    LipschitzSample h1(*Y, 1.0, v1), h2(*Y, 1.0, v2);

    LipschitzSample img = module_action(g, h1);
    CHECK(img.values.row(Y->basepoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(lip_norm(img) == doctest::Approx(lip_norm(h1)).epsilon(1e-10));

    // linearity pointwise
    LipschitzSample lhs = module_action(g, 2.5 * h1 + h2);
    LipschitzSample rhs = 2.5 * module_action(g, h1) + module_action(g, h2);
    CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() <= 1e-12);

    // convexity: averages stay inside the max-norm ball
    LipschitzSample avg = 0.25 * h1 + 0.75 * h2;
    CHECK(lip_norm(avg) <= std::max(lip_norm(h1), lip_norm(h2)) + 1e-12);

    // a non-bijective sigma is rejected with the closure hint
    std::vector<int> badperm(8, 0);
    bool threw = false;
    try {
        ModuleActionElement bad(1.0, A, badperm, *Y);
    } catch (const std::invalid_argument& e) {
        threw = std::string(e.what()).find("close the sample") != std::string::npos;
    }
    CHECK(threw);
}

TEST_CASE("singleton samples have zero norm") {
    SamplePoint only;
    only.x = VectorXd::Zero(1);
    SampledSpace Y(SpaceSpec::power(1, 1.0), {only}, 0);
    CHECK(lip_norm(LipschitzSample::zero(Y, 1.0, 3)) == 0.0);
}
