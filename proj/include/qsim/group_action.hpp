#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsim/lipschitz_space.hpp"
#include "qsim/spaces.hpp"

namespace qsim {

// Self-map of the base space Y, in one of the closed forms the engine can
// compose and invert exactly.
class SampleMap {
  public:
    enum class Kind { Identity, Permutation, RealAffine, MadicTranslate, Callback };
    using Fn = std::function<SamplePoint(const SamplePoint&)>;

    static SampleMap identity();
    static SampleMap permutation(std::vector<int> indices);
    // y -> scale * O * y + offset on the real coordinates.
    static SampleMap real_affine(double scale, MatrixXd O, VectorXd offset);
    // u -> u + w modulo m^{modulus_exp}; an exact isometry of the residue sample.
    static SampleMap madic_translate(MadicNumber w, int modulus_exp);
    // Arbitrary evaluable bijection with an explicit inverse.
    static SampleMap callback(Fn forward, Fn backward);

    Kind kind() const { return kind_; }
    SamplePoint apply(const SampledSpace& Y, const SamplePoint& y) const;
    SamplePoint apply_inverse(const SampledSpace& Y, const SamplePoint& y) const;
    std::optional<int> apply_index(const SampledSpace& Y, int i) const;
    SampleMap inverse(const SampledSpace& Y) const;
    const std::vector<int>& perm() const { return perm_; }

  private:
    Kind kind_ = Kind::Identity;
    std::vector<int> perm_, perm_inv_;
    double scale_ = 1.0;
    MatrixXd O_;
    VectorXd offset_;
    MadicNumber w_ = MadicNumber::zero(2);
    int modulus_exp_ = 0;
    Fn fwd_, bwd_;
};

// Evaluable Lipschitz field h: Y -> R^n with h(y0) = 0 enforced at use sites.
// Tables are exact on the sample; closed forms are exact everywhere.
class HField {
  public:
    enum class Kind { Zero, Const, Table, Hat, Linear, Composed, Sum };

    static HField zero(int target_dim);
    static HField constant(VectorXd value);
    static HField table(MatrixXd values);  // one row per sample point
    // Tent on real coordinate `coord`: heights * max(0, 1 - |y_c - center|/halfwidth).
    static HField hat(int target_dim, int coord, double center, double halfwidth, VectorXd heights);
    // y -> M * y_real (exact linear scenarios).
    static HField linear(MatrixXd M);
    // y -> post * inner(pre(y)) + bias.
    static HField composed(MatrixXd post, HField inner, SampleMap pre, VectorXd bias);
    // pointwise sum of fields with equal target dimensions.
    static HField sum(std::vector<HField> terms);
    // Same field plus a constant.
    HField biased(VectorXd bias) const;

    Kind kind() const { return kind_; }
    int target_dim() const { return target_dim_; }

    // nullopt when a table lookup misses the sample.
    std::optional<VectorXd> try_eval(const SampledSpace& Y, const SamplePoint& y) const;
    // Throwing variant (input error directing the user to close the sample).
    VectorXd eval(const SampledSpace& Y, const SamplePoint& y) const;
    VectorXd eval_index(const SampledSpace& Y, int i) const;

    const MatrixXd& table_values() const { return table_; }

  private:
    Kind kind_ = Kind::Zero;
    int target_dim_ = 0;
    MatrixXd table_;
    int coord_ = 0;
    double center_ = 0, halfwidth_ = 1;
    VectorXd heights_;
    MatrixXd linear_;
    MatrixXd post_;
    std::shared_ptr<HField> inner_;
    std::shared_ptr<SampleMap> pre_;
    VectorXd bias_;
    std::vector<std::shared_ptr<HField>> terms_;

    bool has_bias() const { return bias_.size() > 0; }
};

// One group element gamma acting on R^n x Y:
//   gamma(x, y) = (a * A * (x + x_off + h(y)), sigma(y)),   h(y0) = 0.
struct StructuredMap {
    double a = 1.0;
    MatrixXd A;
    VectorXd x_off;
    HField h;
    SampleMap sigma;

    StructuredMap() = default;
    StructuredMap(double a_, MatrixXd A_, VectorXd x_off_, HField h_, SampleMap sigma_);

    int active_dim() const { return static_cast<int>(A.rows()); }
    StructuredMap inverse(const SampledSpace& Y) const;

    // Full-map application; x is the active factor, y a point of Y.
    std::pair<VectorXd, SamplePoint> apply(const SampledSpace& Y, const VectorXd& x,
                                           const SamplePoint& y) const;
};

// Word over named generators; exponent is +1 or -1 per letter.
struct Word {
    std::vector<std::pair<int, int>> letters;

    static Word identity() { return {}; }
    static Word gen(int g, int e = 1) { return Word{{{g, e}}}; }
    Word then(int g, int e = 1) const {
        Word w = *this;
        w.letters.push_back({g, e});
        w.reduce();
        return w;
    }
    void reduce();  // free reduction
    int length() const { return static_cast<int>(letters.size()); }
    friend Word operator*(const Word& u, const Word& v) {
        Word w = u;
        for (auto& l : v.letters) w.letters.push_back(l);
        w.reduce();
        return w;
    }
    Word inverse() const {
        Word w;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it)
            w.letters.push_back({it->first, -it->second});
        return w;
    }
};

enum class GroupKind { Finite, FreeAbelian, UserWords };

// Finitely generated proxy for the acting group, with a Folner schedule of
// nested finite word sets.
struct GroupSpec {
    std::vector<std::string> names;
    std::vector<StructuredMap> gens;
    GroupKind kind = GroupKind::Finite;
    std::vector<std::vector<Word>> folner;

    int find(const std::string& name) const;
    // Boxes {-s..s}^rank over the generators, one set per size entry.
    static std::vector<std::vector<Word>> abelian_boxes(int rank, const std::vector<int>& sizes);
    // Chains w^lo, ..., w^hi of powers of a single word.
    static std::vector<Word> power_chain(const Word& w, int lo, int hi);
};

// Evaluation engine for cocycle values of words. b_w = h_w of the composed
// structured map, computed lazily through generator data:
//   h_{u.g}(y) = h_g(y) + a_g^{-1} A_g^{-1} [ h_u(sigma_g(y)) - h_u(sigma_g(y0)) ].
class WordAction {
  public:
    WordAction(const SampledSpace& Y, const GroupSpec& spec, double beta);

    const SampledSpace& space() const { return *Y_; }
    const GroupSpec& group() const { return *spec_; }
    double beta() const { return beta_; }
    int active_dim() const;

    const StructuredMap& generator(int g, int exp) const;

    // Composed numeric parts of a word (scale and orthogonal block).
    double word_scale(const Word& w) const;
    MatrixXd word_block(const Word& w) const;
    SamplePoint word_sigma(const Word& w, const SamplePoint& y) const;

    // Cocycle value b_w at a raw point (exact recursion; needs closed-form h
    // or sample-closed sigmas along the orbit).
    VectorXd cocycle_eval(const Word& w, const SamplePoint& y) const;
    VectorXd cocycle_eval(const Word& w, int sample_index) const;
    // Cocycle value on the whole sample as an element of E.
    LipschitzSample cocycle_sample(const Word& w, int threads = 1) const;

    // (pi_w h)(y) for h stored on the sample; off-sample sigma images fall back
    // to McShane extension when allow_extend, else nullopt.
    std::optional<VectorXd> pi_apply(const Word& w, const LipschitzSample& h, int sample_index,
                                     bool allow_extend = false) const;

    // phi(w)(h) = pi_w h + b_w on the subset of points where sigma_w stays in
    // the sample; returns the affine image and the indices actually covered.
    std::pair<LipschitzSample, std::vector<int>> affine_image(const Word& w,
                                                              const LipschitzSample& h,
                                                              bool allow_extend = false) const;

  private:
    const SampledSpace* Y_;
    const GroupSpec* spec_;
    double beta_;
    std::vector<StructuredMap> inverses_;

    VectorXd cocycle_eval_cursor(const Word& w, struct OrbitCursor& z) const;
};

// Uniformity measurements over sampled pairs (sup and inf of distance ratios).
struct UniformityReport {
    double M = 1.0;                   // max over words of sqrt(sup/inf)
    std::map<std::string, double> C;  // per-word sqrt(sup*inf), keyed by word label
    std::map<std::string, std::pair<double, double>> ratio_range;
    long pairs = 0;
};

std::string word_label(const GroupSpec& spec, const Word& w);

// Measures (M, C_w) over words of length <= radius using paired probes:
// same-x pairs, same-y pairs and mixed pairs from a seeded sampler.
UniformityReport uniformity_check(const WordAction& action, int radius, int pairs_per_word = 64,
                                  unsigned long seed = 1);

struct HislipEntry {
    std::string generator;
    double c_sigma;      // measured similarity constant of sigma on the sample
    double a_beta;       // a^beta
    double lip_h;        // lip_norm of the generator's h
    double bound;        // M^2 bound on lip_h^beta
    double C;            // quasisimilarity scale of the generator
    bool sigma_matches;  // |c_sigma - a^beta| <= tol
    bool lip_bounded;    // lip_h^beta <= M^2 + tol
    bool sandwich;       // C/M <= a^beta <= M*C
};

struct HislipReport {
    double M = 1.0;
    std::vector<HislipEntry> entries;
    bool passed() const {
        for (const auto& e : entries)
            if (!(e.sigma_matches && e.lip_bounded && e.sandwich)) return false;
        return true;
    }
};

HislipReport hislip_check(const WordAction& action, const UniformityReport& uni, double tol = 1e-9);

}  // namespace qsim
