#include "qsim/lipschitz_space.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsim/parallel.hpp"

namespace qsim {

LipschitzSample::LipschitzSample(const SampledSpace& Y, double beta_, MatrixXd vals)
    : space(&Y), beta(beta_), values(std::move(vals)) {
    if (!(beta > 0) || beta > 1) throw std::invalid_argument("lipschitz sample: beta must lie in (0,1]");
    if (values.rows() != Y.size()) throw std::invalid_argument("lipschitz sample: one value per sample point");
    if (values.row(Y.basepoint()).cwiseAbs().maxCoeff() > 0)
        throw std::invalid_argument("lipschitz sample: value at the basepoint must be zero");
}

LipschitzSample LipschitzSample::zero(const SampledSpace& Y, double beta_, int target_dim) {
    return LipschitzSample(Y, beta_, MatrixXd::Zero(Y.size(), target_dim));
}

LipschitzSample& LipschitzSample::operator+=(const LipschitzSample& other) {
    if (space != other.space || values.cols() != other.values.cols())
        throw std::invalid_argument("lipschitz sample: mismatched spaces");
    values += other.values;
    return *this;
}

LipschitzSample& LipschitzSample::operator-=(const LipschitzSample& other) {
    if (space != other.space || values.cols() != other.values.cols())
        throw std::invalid_argument("lipschitz sample: mismatched spaces");
    values -= other.values;
    return *this;
}

LipschitzSample& LipschitzSample::operator*=(double s) {
    values *= s;
    return *this;
}

double lip_norm(const LipschitzSample& h, int threads) {
    const SampledSpace& Y = *h.space;
    const int n = Y.size();
    if (n < 2) return 0.0;
    const double inv_beta = 1.0 / h.beta;
    return parallel_max(static_cast<std::size_t>(n), threads, 0.0, [&](std::size_t i) {
        double best = 0;
        for (int j = static_cast<int>(i) + 1; j < n; ++j) {
            double d = Y.dist(static_cast<int>(i), j);
            if (d <= 0) continue;
            double num = (h.values.row(static_cast<int>(i)) - h.values.row(j)).norm();
            best = std::max(best, num / std::pow(d, inv_beta));
        }
        return best;
    });
}

double lip_norm_subset(const LipschitzSample& h, const std::vector<int>& indices, int threads) {
    const SampledSpace& Y = *h.space;
    if (indices.size() < 2) return 0.0;
    const double inv_beta = 1.0 / h.beta;
    return parallel_max(indices.size(), threads, 0.0, [&](std::size_t t) {
        int i = indices[t];
        double best = 0;
        for (std::size_t s = t + 1; s < indices.size(); ++s) {
            int j = indices[s];
            double d = Y.dist(i, j);
            if (d <= 0) continue;
            best = std::max(best, (h.values.row(i) - h.values.row(j)).norm() / std::pow(d, inv_beta));
        }
        return best;
    });
}

VectorXd mcshane_extend(const LipschitzSample& h, const SamplePoint& y) {
    const SampledSpace& Y = *h.space;
    if (Y.size() == 0) throw std::invalid_argument("mcshane: empty sample");
    const double inv_beta = 1.0 / h.beta;
    const int dim = h.target_dim();

    // Per-coordinate sampled Lipschitz constants.
    VectorXd lambda = VectorXd::Zero(dim);
    for (int i = 0; i < Y.size(); ++i)
        for (int j = i + 1; j < Y.size(); ++j) {
            double d = Y.dist(i, j);
            if (d <= 0) continue;
            double denom = std::pow(d, inv_beta);
            for (int k = 0; k < dim; ++k)
                lambda[k] = std::max(lambda[k], std::abs(h.values(i, k) - h.values(j, k)) / denom);
        }

    VectorXd out(dim);
    for (int k = 0; k < dim; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < Y.size(); ++i)
            best = std::min(best, h.values(i, k) + lambda[k] * std::pow(Y.dist(Y.point(i), y), inv_beta));
        out[k] = best;
    }
    return out;
}

ModuleActionElement::ModuleActionElement(double a_, MatrixXd A_, std::vector<int> sigma_,
                                         const SampledSpace& Y, double orth_tol)
    : a(a_), A(std::move(A_)), sigma(std::move(sigma_)), c_sigma(1.0), c_sigma_dev(0.0) {
    if (!(a > 0)) throw std::invalid_argument("module action: scale must be positive");
    MatrixXd err = A.transpose() * A - MatrixXd::Identity(A.rows(), A.cols());
    if (err.cwiseAbs().maxCoeff() > orth_tol)
        throw std::invalid_argument("module action: block is not orthogonal");
    if (static_cast<int>(sigma.size()) != Y.size())
        throw std::invalid_argument(
            "module action: sigma must map the sample into itself; close the sample under the "
            "generators first");
    std::vector<bool> seen(sigma.size(), false);
    for (int i : sigma) {
        if (i < 0 || i >= Y.size() || seen[i])
            throw std::invalid_argument(
                "module action: sigma must map the sample into itself; close the sample under the "
                "generators first");
        seen[i] = true;
    }
    // Measure the similarity constant over sampled pairs.
    bool first = true;
    double lo = 0, hi = 0;
    for (int i = 0; i < Y.size(); ++i)
        for (int j = i + 1; j < Y.size(); ++j) {
            double d = Y.dist(i, j);
            if (d <= 0) continue;
            double r = Y.dist(sigma[i], sigma[j]) / d;
            if (first) {
                lo = hi = r;
                first = false;
            } else {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
    if (!first) {
        c_sigma = std::sqrt(lo * hi);
        c_sigma_dev = hi - lo;
    }
}

LipschitzSample module_action(const ModuleActionElement& g, const LipschitzSample& h) {
    const SampledSpace& Y = *h.space;
    MatrixXd Ainv = g.A.transpose();  // orthogonal
    Eigen::RowVectorXd base = (Ainv * h.values.row(g.sigma[Y.basepoint()]).transpose()).transpose() / g.a;
    MatrixXd out(h.values.rows(), h.values.cols());
    for (int i = 0; i < Y.size(); ++i)
        out.row(i) = (Ainv * h.values.row(g.sigma[i]).transpose()).transpose() / g.a - base;
    return LipschitzSample(Y, h.beta, std::move(out));
}

}  // namespace qsim
