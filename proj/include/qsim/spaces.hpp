#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qsim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// R^dim with the metric |p - q|^beta, 0 < beta <= 1.
struct PowerEuclidean {
    int dim;
    double beta;

    PowerEuclidean(int dim_, double beta_);
};

double power_dist(const PowerEuclidean& space, const VectorXd& x, const VectorXd& y);

// Diagonal parabolic boundary metric: blocks V_1..V_r with strictly increasing
// positive exponents alpha_i, d(x,y) = max_i |x_i - y_i|^{alpha_1/alpha_i}.
struct ParabolicSpec {
    std::vector<double> alphas;
    std::vector<int> block_dims;
    double scale = 1.0;  // lambda in d_{lambda*A}; exponent ratios are scale-free

    ParabolicSpec(std::vector<double> alphas_, std::vector<int> block_dims_, double scale_ = 1.0);
    int total_dim() const;
    int blocks() const { return static_cast<int>(alphas.size()); }
    double exponent(int i) const { return alphas.front() / alphas[i]; }
    // Rows [offset, offset+dim) of block i.
    std::pair<int, int> block_range(int i) const;
};

double parabolic_dist(const ParabolicSpec& spec, const VectorXd& x, const VectorXd& y);

// Finite digit window of an m-adic number; digits outside the window are zero.
struct MadicNumber {
    int m;
    int k_lo;                 // index of digits[0]
    std::vector<int> digits;  // each in [0, m)

    MadicNumber(int m_, int k_lo_, std::vector<int> digits_);
    static MadicNumber zero(int m) { return MadicNumber(m, 0, {}); }
    static MadicNumber from_integer(int m, long value);  // value >= 0

    int digit(int k) const;
    int k_hi() const { return k_lo + static_cast<int>(digits.size()) - 1; }
    bool operator==(const MadicNumber& other) const;
};

// Smallest index with differing digits, or nullopt when equal.
std::optional<int> madic_first_diff(const MadicNumber& a, const MadicNumber& b);
// m^{-(k+1)} at the first differing index k; 0 when equal.
double madic_dist(const MadicNumber& a, const MadicNumber& b);
// Exact digit-wise addition with carries (window grows as needed).
MadicNumber madic_add(const MadicNumber& a, const MadicNumber& b);
// Multiply by m^j (shift the digit window).
MadicNumber madic_shift(const MadicNumber& a, int j);
// Additive inverse modulo m^{modulus_exp} (digits at indices [0, modulus_exp)).
MadicNumber madic_mod_neg(const MadicNumber& a, int modulus_exp);
MadicNumber madic_mod_add(const MadicNumber& a, const MadicNumber& b, int modulus_exp);

// max of factor distances on a product; factors described by SpaceSpec below.
struct SpaceSpec {
    // Real part: list of (dim, exponent) blocks; empty for a pure m-adic space.
    std::vector<std::pair<int, double>> real_blocks;
    std::optional<int> madic_base;
    std::string kind;  // "power" | "parabolic" | "madic" | "power_madic" | "parabolic_madic"

    static SpaceSpec power(int dim, double beta);
    static SpaceSpec parabolic(const ParabolicSpec& spec);
    static SpaceSpec madic(int m);
    static SpaceSpec power_madic(int dim, double beta, int m);
    static SpaceSpec parabolic_madic(const ParabolicSpec& spec, int m);

    int real_dim() const;
    bool has_madic() const { return madic_base.has_value(); }
};

struct SamplePoint {
    VectorXd x;  // real coordinates (possibly empty)
    std::optional<MadicNumber> u;

    bool approx_equal(const SamplePoint& other, double tol) const;
};

double point_dist(const SpaceSpec& spec, const SamplePoint& p, const SamplePoint& q);

// Finite sampled metric space with a distinguished basepoint.
class SampledSpace {
  public:
    SampledSpace(SpaceSpec spec, std::vector<SamplePoint> pts, int basepoint);

    const SpaceSpec& spec() const { return spec_; }
    const std::vector<SamplePoint>& points() const { return pts_; }
    const SamplePoint& point(int i) const { return pts_[i]; }
    int size() const { return static_cast<int>(pts_.size()); }
    int basepoint() const { return basepoint_; }

    double dist(int i, int j) const { return point_dist(spec_, pts_[i], pts_[j]); }
    double dist(const SamplePoint& p, const SamplePoint& q) const { return point_dist(spec_, p, q); }

    // Index of a point matching within tol (max metric on raw coordinates and
    // exact digits), or nullopt.
    std::optional<int> locate(const SamplePoint& p, double tol = 1e-9) const;

  private:
    SpaceSpec spec_;
    std::vector<SamplePoint> pts_;
    int basepoint_;
    std::unordered_map<std::string, int> exact_index_;

    static std::string exact_key(const SamplePoint& p);
};

struct AxiomViolation {
    std::string axiom;  // "symmetry" | "identity" | "triangle" | "ultrametric"
    int i, j, k;        // k = -1 for pair axioms
    double amount;
};

struct AxiomReport {
    long pairs_checked = 0;
    long triples_checked = 0;
    bool ultrametric_checked = false;
    std::vector<AxiomViolation> violations;
    bool passed() const { return violations.empty(); }
};

// Checks symmetry, identity of indiscernibles, the triangle inequality on
// sampled triples (all if within budget, else seeded sampling) and, for pure
// m-adic spaces, the ultrametric inequality exactly.
AxiomReport verify_metric_axioms(const SampledSpace& space, double tol = 1e-12,
                                 long max_triples = 200000, unsigned long seed = 0);

// Same checks against an explicit distance matrix (test hook for documenting
// why illegal parameters are rejected at construction).
AxiomReport verify_metric_axioms(const MatrixXd& dist, double tol = 1e-12, bool ultrametric = false);

}  // namespace qsim
