#include "qsim/instances.hpp"

#include <cmath>
#include <random>

namespace qsim {

std::shared_ptr<SampledSpace> ngon_space(int N, double beta) {
    std::vector<SamplePoint> pts;
    for (int i = 0; i < N; ++i) {
        SamplePoint p;
        p.x = VectorXd(2);
        p.x << std::cos(2 * M_PI * i / N), std::sin(2 * M_PI * i / N);
        pts.push_back(std::move(p));
    }
    return std::make_shared<SampledSpace>(SpaceSpec::power(2, beta), std::move(pts), 0);
}

std::shared_ptr<SampledSpace> madic_residue_space(int m, int window) {
    long count = 1;
    for (int i = 0; i < window; ++i) count *= m;
    std::vector<SamplePoint> pts;
    for (long v = 0; v < count; ++v) {
        SamplePoint p;
        p.x = VectorXd(0);
        p.u = MadicNumber::from_integer(m, v);
        // pad to the window so digit windows compare cleanly
        std::vector<int> digits(window, 0);
        for (int k = 0; k < window; ++k) digits[k] = p.u->digit(k);
        p.u = MadicNumber(m, 0, digits);
        pts.push_back(std::move(p));
    }
    return std::make_shared<SampledSpace>(SpaceSpec::madic(m), std::move(pts), 0);
}

std::shared_ptr<SampledSpace> random_space(const std::string& kind, int points, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    auto fill = [&](SpaceSpec spec, int madic_window) {
        std::vector<SamplePoint> pts;
        SamplePoint origin;
        origin.x = VectorXd::Zero(spec.real_dim());
        if (spec.has_madic()) origin.u = MadicNumber::zero(*spec.madic_base);
        pts.push_back(origin);
        std::uniform_int_distribution<int> digit(0, spec.has_madic() ? *spec.madic_base - 1 : 0);
        while (static_cast<int>(pts.size()) < points) {
            SamplePoint p;
            p.x = VectorXd(spec.real_dim());
            for (int k = 0; k < spec.real_dim(); ++k) p.x[k] = coord(rng);
            if (spec.has_madic()) {
                std::vector<int> ds(madic_window);
                for (int k = 0; k < madic_window; ++k) ds[k] = digit(rng);
                p.u = MadicNumber(*spec.madic_base, 0, ds);
            }
            bool dup = false;
            for (const auto& q : pts) dup = dup || q.approx_equal(p, 1e-9);
            if (!dup) pts.push_back(std::move(p));
        }
        return std::make_shared<SampledSpace>(spec, std::move(pts), 0);
    };
    if (kind == "power") return fill(SpaceSpec::power(2, 0.5), 0);
    if (kind == "parabolic") return fill(SpaceSpec::parabolic(ParabolicSpec({1, 2}, {1, 1})), 0);
    if (kind == "madic") return madic_residue_space(2, 3 + static_cast<int>(seed % 2));
    if (kind == "power_madic") return fill(SpaceSpec::power_madic(1, 1.0, 2), 3);
    if (kind == "parabolic_madic")
        return fill(SpaceSpec::parabolic_madic(ParabolicSpec({1, 2}, {1, 1}), 3), 2);
    throw std::invalid_argument("random_space: unknown kind " + kind);
}

namespace {

MatrixXd random_rotation(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    if (n == 1) {
        MatrixXd A(1, 1);
        A << (rng() % 2 == 0 ? 1.0 : -1.0);
        return A;
    }
    MatrixXd A = MatrixXd::Identity(n, n);
    double t = angle(rng);
    A(0, 0) = std::cos(t);
    A(0, 1) = -std::sin(t);
    A(1, 0) = std::sin(t);
    A(1, 1) = std::cos(t);
    return A;
}

}  // namespace

ActionInstance random_structured_action(unsigned long seed, int generators) {
    std::mt19937_64 rng(seed);
    ActionInstance inst;
    inst.active_dim = 1 + static_cast<int>(rng() % 2);

    if (seed % 2 == 0) {
        // Isometric permutation sigmas with table h's (a = 1).
        bool use_madic = rng() % 2 == 0;
        inst.beta = use_madic ? 1.0 : 0.5;
        if (use_madic)
            inst.Y = madic_residue_space(2, 3);
        else
            inst.Y = ngon_space(8 + static_cast<int>(rng() % 5), inst.beta);
        const int N = inst.Y->size();
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        for (int g = 0; g < generators; ++g) {
            std::vector<int> perm(N);
            if (use_madic) {
                long shift = 1 + static_cast<long>(rng() % (N - 1));
                MadicNumber w = MadicNumber::from_integer(2, shift);
                for (int i = 0; i < N; ++i) {
                    MadicNumber img = madic_mod_add(*inst.Y->point(i).u, w, 3);
                    perm[i] = *inst.Y->locate(SamplePoint{VectorXd(0), img}, 0);
                }
            } else {
                int k = 1 + static_cast<int>(rng() % (N - 1));
                for (int i = 0; i < N; ++i) perm[i] = (i + k) % N;
            }
            MatrixXd table(N, inst.active_dim);
            for (int i = 0; i < N; ++i)
                for (int c = 0; c < inst.active_dim; ++c) table(i, c) = val(rng);
            table.row(0).setZero();
            VectorXd x_off(inst.active_dim);
            for (int c = 0; c < inst.active_dim; ++c) x_off[c] = val(rng);
            inst.spec.names.push_back("g" + std::to_string(g));
            inst.spec.gens.push_back(StructuredMap(1.0, random_rotation(inst.active_dim, rng), x_off,
                                                   HField::table(table),
                                                   SampleMap::permutation(perm)));
        }
    } else {
        // Affine similarity sigmas with genuine scales and hat h's.
        inst.beta = rng() % 2 == 0 ? 1.0 : 0.5;
        std::vector<SamplePoint> pts;
        std::uniform_real_distribution<double> coord(-3.0, 3.0);
        SamplePoint origin;
        origin.x = VectorXd::Zero(1);
        pts.push_back(origin);
        for (int i = 1; i < 24; ++i) {
            SamplePoint p;
            p.x = VectorXd(1);
            p.x << coord(rng);
            pts.push_back(std::move(p));
        }
        inst.Y = std::make_shared<SampledSpace>(SpaceSpec::power(1, inst.beta), std::move(pts), 0);
        std::uniform_real_distribution<double> scale(0.6, 1.6), off(-1.0, 1.0), height(-0.5, 0.5);
        for (int g = 0; g < generators; ++g) {
            double a = scale(rng);
            MatrixXd O(1, 1);
            O << (rng() % 2 == 0 ? 1.0 : -1.0);
            SampleMap sigma = SampleMap::real_affine(a, O, VectorXd::Constant(1, off(rng)));
            VectorXd hvec(inst.active_dim);
            for (int c = 0; c < inst.active_dim; ++c) hvec[c] = height(rng);
            // support [center-1, center+1] with center >= 2 keeps h(y0) = 0
            HField h = HField::hat(inst.active_dim, 0, 2.0 + std::abs(off(rng)), 1.0, hvec);
            VectorXd x_off(inst.active_dim);
            for (int c = 0; c < inst.active_dim; ++c) x_off[c] = off(rng);
            inst.spec.names.push_back("g" + std::to_string(g));
            inst.spec.gens.push_back(
                StructuredMap(a, random_rotation(inst.active_dim, rng), x_off, h, sigma));
        }
    }
    inst.spec.kind = GroupKind::UserWords;
    return inst;
}

ActionInstance order_two_action(int half_points) {
    ActionInstance inst;
    std::vector<SamplePoint> pts;
    SamplePoint origin;
    origin.x = VectorXd::Zero(1);
    pts.push_back(origin);
    for (int i = 1; i <= half_points; ++i) {
        SamplePoint p, q;
        p.x = VectorXd::Constant(1, 0.5 * i);
        q.x = VectorXd::Constant(1, -0.5 * i);
        pts.push_back(p);
        pts.push_back(q);
    }
    inst.Y = std::make_shared<SampledSpace>(SpaceSpec::power(1, 1.0), std::move(pts), 0);
    inst.beta = 1.0;
    inst.active_dim = 1;
    MatrixXd O(1, 1);
    O << -1.0;
    inst.spec.names = {"s"};
    inst.spec.gens.push_back(StructuredMap(1.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1),
                                           HField::linear(MatrixXd::Identity(1, 1)),
                                           SampleMap::real_affine(1.0, O, VectorXd::Zero(1))));
    inst.spec.kind = GroupKind::Finite;
    inst.spec.folner = {{Word::identity(), Word::gen(0)}};
    return inst;
}

ActionInstance shift_hat_action(double hat_center, double hat_halfwidth, double hat_height,
                                double window, double step, int folner_halfwidth) {
    ActionInstance inst;
    std::vector<SamplePoint> pts;
    int basepoint = -1;
    int idx = 0;
    for (double y = -window; y <= window + 1e-12; y += step) {
        SamplePoint p;
        p.x = VectorXd::Constant(1, y);
        if (std::abs(y) < step / 4) basepoint = idx;
        pts.push_back(std::move(p));
        ++idx;
    }
    if (basepoint < 0) throw std::invalid_argument("shift_hat_action: 0 must be on the grid");
    inst.Y = std::make_shared<SampledSpace>(SpaceSpec::power(1, 1.0), std::move(pts), basepoint);
    inst.beta = 1.0;
    inst.active_dim = 1;
    inst.spec.names = {"t"};
    inst.spec.gens.push_back(StructuredMap(
        1.0, MatrixXd::Identity(1, 1), VectorXd::Zero(1),
        HField::hat(1, 0, hat_center, hat_halfwidth, VectorXd::Constant(1, hat_height)),
        SampleMap::real_affine(1.0, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 1.0))));
    inst.spec.kind = GroupKind::UserWords;
    inst.spec.folner = {GroupSpec::power_chain(Word::gen(0), -folner_halfwidth, folner_halfwidth)};
    return inst;
}

LipschitzSample telescoping_fixed_point(const WordAction& action, int terms) {
    const SampledSpace& Y = action.space();
    const StructuredMap& g = action.group().gens.front();
    const SamplePoint& y0 = Y.point(Y.basepoint());
    MatrixXd vals = MatrixXd::Zero(Y.size(), action.active_dim());
    const MatrixXd T_fwd = g.A.transpose() / g.a;  // pi coefficient
    const MatrixXd T_bwd = g.a * g.A;              // pi^{-1} coefficient
    SampleMap sigma_inv = g.sigma.inverse(Y);

    for (int i = 0; i < Y.size(); ++i) {
        VectorXd acc = VectorXd::Zero(action.active_dim());
        // + 1/2 sum_{k>=0} pi^k h
        SamplePoint z = Y.point(i), z0 = y0;
        MatrixXd M = MatrixXd::Identity(action.active_dim(), action.active_dim());
        for (int k = 0; k <= terms; ++k) {
            acc += 0.5 * (M * (g.h.eval(Y, z) - g.h.eval(Y, z0)));
            M = T_fwd * M;
            z = g.sigma.apply(Y, z);
            z0 = g.sigma.apply(Y, z0);
        }
        // - 1/2 sum_{k>=1} pi^{-k} h
        z = sigma_inv.apply(Y, Y.point(i));
        z0 = sigma_inv.apply(Y, y0);
        M = T_bwd;
        for (int k = 1; k <= terms; ++k) {
            acc -= 0.5 * (M * (g.h.eval(Y, z) - g.h.eval(Y, z0)));
            M = T_bwd * M;
            z = sigma_inv.apply(Y, z);
            z0 = sigma_inv.apply(Y, z0);
        }
        vals.row(i) = acc.transpose();
    }
    return LipschitzSample(Y, action.beta(), std::move(vals));
}

ActionInstance scaled_shear_action(double scale, double beta) {
    ActionInstance inst;
    std::vector<SamplePoint> pts;
    SamplePoint origin;
    origin.x = VectorXd::Zero(1);
    pts.push_back(origin);
    for (int p = -3; p <= 3; ++p) {
        for (int s : {-1, 1}) {
            SamplePoint q;
            q.x = VectorXd::Constant(1, s * std::pow(scale, p));
            pts.push_back(std::move(q));
        }
    }
    inst.Y = std::make_shared<SampledSpace>(SpaceSpec::power(1, beta), std::move(pts), 0);
    inst.beta = beta;
    inst.active_dim = 1;
    inst.spec.names = {"d", "t"};
    inst.spec.gens.push_back(StructuredMap(
        scale, MatrixXd::Identity(1, 1), VectorXd::Zero(1),
        HField::hat(1, 0, 1.0 + std::pow(scale, 2), 1.0, VectorXd::Constant(1, 0.25)),
        SampleMap::real_affine(scale, MatrixXd::Identity(1, 1), VectorXd::Zero(1))));
    inst.spec.gens.push_back(StructuredMap(1.0, MatrixXd::Identity(1, 1), VectorXd::Constant(1, 1.0),
                                           HField::zero(1), SampleMap::identity()));
    inst.spec.kind = GroupKind::UserWords;
    inst.spec.folner = {GroupSpec::power_chain(Word::gen(0), 0, 64),
                        GroupSpec::power_chain(Word::gen(0), 0, 256)};
    return inst;
}

}  // namespace qsim
