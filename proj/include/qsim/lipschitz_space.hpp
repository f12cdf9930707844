#pragma once

#include "qsim/spaces.hpp"

namespace qsim {

// Element of E: a Lipschitz map from a sampled space into (R^n, |.|^beta),
// normalized to vanish at the basepoint. Values are stored per sample point.
struct LipschitzSample {
    const SampledSpace* space = nullptr;
    double beta = 1.0;
    MatrixXd values;  // N x target_dim

    LipschitzSample() = default;
    LipschitzSample(const SampledSpace& Y, double beta_, MatrixXd vals);
    static LipschitzSample zero(const SampledSpace& Y, double beta_, int target_dim);

    int target_dim() const { return static_cast<int>(values.cols()); }
    VectorXd at(int i) const { return values.row(i).transpose(); }

    LipschitzSample& operator+=(const LipschitzSample& other);
    LipschitzSample& operator-=(const LipschitzSample& other);
    LipschitzSample& operator*=(double s);
    friend LipschitzSample operator+(LipschitzSample a, const LipschitzSample& b) { return a += b; }
    friend LipschitzSample operator-(LipschitzSample a, const LipschitzSample& b) { return a -= b; }
    friend LipschitzSample operator*(double s, LipschitzSample h) { return h *= s; }
};

// sup over sampled pairs of |h(y1)-h(y2)| / d(y1,y2)^{1/beta}; 0 for < 2 points.
double lip_norm(const LipschitzSample& h, int threads = 1);

// Same sup restricted to pairs drawn from the given sample indices.
double lip_norm_subset(const LipschitzSample& h, const std::vector<int>& indices, int threads = 1);

// Per-coordinate McShane extension evaluated at y (agrees with stored values
// at sample points; per-coordinate Lipschitz constants do not increase).
VectorXd mcshane_extend(const LipschitzSample& h, const SamplePoint& y);

// Linear isometry data of Eq-style module actions: (pi_g h)(y) =
// a^{-1} A^{-1} h(sigma(y)) - a^{-1} A^{-1} h(sigma(y0)).
struct ModuleActionElement {
    double a;
    MatrixXd A;              // orthogonal on the active factor
    std::vector<int> sigma;  // sample index permutation
    double c_sigma;          // measured similarity constant of sigma
    double c_sigma_dev;      // worst deviation of pair ratios from c_sigma

    ModuleActionElement(double a_, MatrixXd A_, std::vector<int> sigma_, const SampledSpace& Y,
                        double orth_tol = 1e-10);
};

LipschitzSample module_action(const ModuleActionElement& g, const LipschitzSample& h);

}  // namespace qsim
