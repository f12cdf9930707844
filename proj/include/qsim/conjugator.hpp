#pragma once

#include <memory>

#include "qsim/cohomology.hpp"
#include "qsim/group_action.hpp"

namespace qsim {

// Folner/Cesaro averaging of the affine orbit of 0: h0_k = |F_k|^{-1} sum_{w in F_k} b_w,
// with the a-posteriori fixed-point residual as the certificate.
struct FolnerOutcome {
    LipschitzSample h0;
    std::vector<std::size_t> stage_sizes;
    std::vector<double> residuals;
    double final_residual = 0;
    double orbit_bound = 0;  // max ||b_w|| over (a stride of) enumerated words
    bool certified = false;
    bool warned_nonmonotone = false;
    std::string message;
};

FolnerOutcome folner_average(const WordAction& action, double tol, int threads = 1);

// The shear H0(x, y) = (x + h0(y), y); inverse subtracts. Off-sample y fall
// back to McShane extension when allow_extend is set.
class ShearH0 {
  public:
    explicit ShearH0(const LipschitzSample& h0) : h0_(&h0) {}
    std::pair<VectorXd, SamplePoint> apply(const VectorXd& x, const SamplePoint& y,
                                           bool allow_extend = false) const;
    std::pair<VectorXd, SamplePoint> apply_inverse(const VectorXd& x, const SamplePoint& y,
                                                   bool allow_extend = false) const;
    const LipschitzSample& h0() const { return *h0_; }

  private:
    const LipschitzSample* h0_;
};

inline ShearH0 build_H0(const LipschitzSample& h0) { return ShearH0(h0); }

// H0 gamma H0^{-1} in structured form. The conjugated h-part is
// h_g + pi_g h0 - h0 (zeroexactly when h0 is an exact fixed point); its table
// is valid on the returned covered indices.
struct ConjugatedMap {
    StructuredMap map;
    std::vector<int> covered;
    double h_part_norm = 0;  // lip_norm of the conjugated h over covered pairs
};

ConjugatedMap conjugate(const WordAction& action, int generator, const LipschitzSample& h0);

// log(sup ratio / inf ratio) of d(Fp, Fq)/d(p, q) over sampled pairs; the map
// may decline a pair (off-sample data), such pairs are skipped.
using ProductMapFn =
    std::function<std::optional<std::pair<VectorXd, SamplePoint>>(const VectorXd&, int y_index)>;

struct DefectSample {
    double defect = 0;        // log(sup/inf); 0 iff similarity on the sample
    double inf_ratio = 0;     // C_min of the certificate
    double sup_ratio = 0;
    long pairs_used = 0;
};

DefectSample similarity_defect(const ProductMapFn& F, const SampledSpace& Y, double beta,
                               int active_dim, int pairs, unsigned long seed);

DefectSample structured_defect(const WordAction& action, const StructuredMap& g,
                               const std::vector<int>& valid_y, int pairs, unsigned long seed);

// ---------------------------------------------------------------------------
// Block induction on (R^n, d_A) and (R^n x Q_m, d_{A,m})
// ---------------------------------------------------------------------------

// Triangular almost-similarity: block j maps x_j -> a^{alpha_j} A_j (x_j + h_j(tail)),
// where tail = (x_{j+1}, ..., x_r, u); the m-adic factor (when present) moves
// by an exact sampled isometry.
struct TriangularGen {
    double a = 1.0;
    std::vector<MatrixXd> blocks;
    std::vector<HField> h;  // h[j] over the tail space of block j
    SampleMap madic_sigma = SampleMap::identity();
};

struct TukiaScenario {
    ParabolicSpec parabolic;
    std::optional<int> madic_base;
    std::shared_ptr<SampledSpace> full_space;  // sampled points of R^n (x Q_m)
    std::vector<std::string> names;
    std::vector<TriangularGen> gens;
    GroupKind kind = GroupKind::Finite;
    std::vector<std::vector<Word>> folner;
    double residual_tol = 1e-3;
    double defect_tol = 2e-3;
    int threads = 1;
    unsigned long seed = 1;
    int defect_pairs = 256;
};

struct StageRecord {
    int block = 0;
    std::vector<std::size_t> folner_sizes;
    std::vector<double> residuals;
    double final_residual = 0;
    double orbit_bound = 0;
    bool certified = false;
    std::map<std::string, double> defect_before;
    std::map<std::string, double> defect_after;
    double wall_ms = 0;
};

struct ConjugationReport {
    bool certified = false;
    std::vector<StageRecord> stages;
    std::map<std::string, double> final_defect;       // per generator, target metric
    std::map<std::string, double> scale_consistency;  // max_j |measured_j - a^{alpha_j}|
    std::map<std::string, double> generator_scale;    // the single a per generator
    std::vector<std::string> notes;
    std::string failure;
};

// Runs the block induction: from the last block down, average the block's
// shear cocycle, conjugate, and certify that every generator acts as a
// similarity of the diagonal target metric within tolerance.
ConjugationReport tukia_induction(const TukiaScenario& scenario);

}  // namespace qsim
