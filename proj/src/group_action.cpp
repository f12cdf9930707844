#include "qsim/group_action.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qsim/parallel.hpp"

namespace qsim {

// ---------------------------------------------------------------------------
// SampleMap
// ---------------------------------------------------------------------------

SampleMap SampleMap::identity() { return SampleMap(); }

SampleMap SampleMap::permutation(std::vector<int> indices) {
    SampleMap m;
    m.kind_ = Kind::Permutation;
    m.perm_ = std::move(indices);
    m.perm_inv_.assign(m.perm_.size(), -1);
    for (std::size_t i = 0; i < m.perm_.size(); ++i) {
        int t = m.perm_[i];
        if (t < 0 || t >= static_cast<int>(m.perm_.size()) || m.perm_inv_[t] != -1)
            throw std::invalid_argument("sample map: permutation must be a bijection of the sample");
        m.perm_inv_[t] = static_cast<int>(i);
    }
    return m;
}

SampleMap SampleMap::real_affine(double scale, MatrixXd O, VectorXd offset) {
    if (!(scale > 0)) throw std::invalid_argument("sample map: scale must be positive");
    MatrixXd err = O.transpose() * O - MatrixXd::Identity(O.rows(), O.cols());
    if (err.cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("sample map: affine part must be orthogonal");
    SampleMap m;
    m.kind_ = Kind::RealAffine;
    m.scale_ = scale;
    m.O_ = std::move(O);
    m.offset_ = std::move(offset);
    return m;
}

SampleMap SampleMap::madic_translate(MadicNumber w, int modulus_exp) {
    if (modulus_exp <= 0) throw std::invalid_argument("sample map: modulus exponent must be positive");
    SampleMap m;
    m.kind_ = Kind::MadicTranslate;
    m.w_ = std::move(w);
    m.modulus_exp_ = modulus_exp;
    return m;
}

SampleMap SampleMap::callback(Fn forward, Fn backward) {
    if (!forward || !backward) throw std::invalid_argument("sample map: callback needs both directions");
    SampleMap m;
    m.kind_ = Kind::Callback;
    m.fwd_ = std::move(forward);
    m.bwd_ = std::move(backward);
    return m;
}

SamplePoint SampleMap::apply(const SampledSpace& Y, const SamplePoint& y) const {
    switch (kind_) {
        case Kind::Identity:
            return y;
        case Kind::Permutation: {
            auto idx = Y.locate(y, 1e-12);
            if (!idx)
                throw std::invalid_argument(
                    "sample map: point not in the sample; close the sample under the generators");
            return Y.point(perm_[*idx]);
        }
        case Kind::RealAffine: {
            SamplePoint out = y;
            out.x = scale_ * (O_ * y.x) + offset_;
            return out;
        }
        case Kind::MadicTranslate: {
            SamplePoint out = y;
            out.u = madic_mod_add(*y.u, w_, modulus_exp_);
            return out;
        }
        case Kind::Callback:
            return fwd_(y);
    }
    return y;
}

SamplePoint SampleMap::apply_inverse(const SampledSpace& Y, const SamplePoint& y) const {
    return inverse(Y).apply(Y, y);
}

std::optional<int> SampleMap::apply_index(const SampledSpace& Y, int i) const {
    if (kind_ == Kind::Permutation) return perm_[i];
    return Y.locate(apply(Y, Y.point(i)), 1e-9);
}

SampleMap SampleMap::inverse(const SampledSpace& Y) const {
    (void)Y;
    SampleMap m = *this;
    switch (kind_) {
        case Kind::Identity:
            return m;
        case Kind::Permutation:
            std::swap(m.perm_, m.perm_inv_);
            return m;
        case Kind::RealAffine:
            m.scale_ = 1.0 / scale_;
            m.O_ = O_.transpose();
            m.offset_ = -(m.O_ * offset_) / scale_;
            return m;
        case Kind::MadicTranslate:
            m.w_ = madic_mod_neg(w_, modulus_exp_);
            return m;
        case Kind::Callback:
            std::swap(m.fwd_, m.bwd_);
            return m;
    }
    return m;
}

// ---------------------------------------------------------------------------
// HField
// ---------------------------------------------------------------------------

HField HField::zero(int target_dim) {
    HField h;
    h.kind_ = Kind::Zero;
    h.target_dim_ = target_dim;
    return h;
}

HField HField::constant(VectorXd value) {
    HField h;
    h.kind_ = Kind::Const;
    h.target_dim_ = static_cast<int>(value.size());
    h.heights_ = std::move(value);
    return h;
}

HField HField::table(MatrixXd values) {
    HField h;
    h.kind_ = Kind::Table;
    h.target_dim_ = static_cast<int>(values.cols());
    h.table_ = std::move(values);
    return h;
}

HField HField::hat(int target_dim, int coord, double center, double halfwidth, VectorXd heights) {
    if (!(halfwidth > 0)) throw std::invalid_argument("hat field: halfwidth must be positive");
    if (heights.size() != target_dim) throw std::invalid_argument("hat field: height dimension mismatch");
    HField h;
    h.kind_ = Kind::Hat;
    h.target_dim_ = target_dim;
    h.coord_ = coord;
    h.center_ = center;
    h.halfwidth_ = halfwidth;
    h.heights_ = std::move(heights);
    return h;
}

HField HField::linear(MatrixXd M) {
    HField h;
    h.kind_ = Kind::Linear;
    h.target_dim_ = static_cast<int>(M.rows());
    h.linear_ = std::move(M);
    return h;
}

HField HField::composed(MatrixXd post, HField inner, SampleMap pre, VectorXd bias) {
    HField h;
    h.kind_ = Kind::Composed;
    h.target_dim_ = static_cast<int>(post.rows());
    h.post_ = std::move(post);
    h.inner_ = std::make_shared<HField>(std::move(inner));
    h.pre_ = std::make_shared<SampleMap>(std::move(pre));
    h.bias_ = std::move(bias);
    return h;
}

HField HField::sum(std::vector<HField> terms) {
    if (terms.empty()) throw std::invalid_argument("h field: sum needs at least one term");
    HField h;
    h.kind_ = Kind::Sum;
    h.target_dim_ = terms.front().target_dim();
    for (auto& t : terms) {
        if (t.target_dim() != h.target_dim_)
            throw std::invalid_argument("h field: sum terms must share the target dimension");
        h.terms_.push_back(std::make_shared<HField>(std::move(t)));
    }
    return h;
}

HField HField::biased(VectorXd bias) const {
    return composed(MatrixXd::Identity(target_dim_, target_dim_), *this, SampleMap::identity(),
                    std::move(bias));
}

std::optional<VectorXd> HField::try_eval(const SampledSpace& Y, const SamplePoint& y) const {
    switch (kind_) {
        case Kind::Zero:
            return VectorXd::Zero(target_dim_);
        case Kind::Const:
            return heights_;
        case Kind::Table: {
            auto idx = Y.locate(y, 1e-12);
            if (!idx) return std::nullopt;
            return table_.row(*idx).transpose();
        }
        case Kind::Hat: {
            double t = 1.0 - std::abs(y.x[coord_] - center_) / halfwidth_;
            return std::max(0.0, t) * heights_;
        }
        case Kind::Linear:
            return linear_ * y.x;
        case Kind::Composed: {
            auto v = inner_->try_eval(Y, pre_->apply(Y, y));
            if (!v) return std::nullopt;
            VectorXd out = post_ * *v;
            if (has_bias()) out += bias_;
            return out;
        }
        case Kind::Sum: {
            VectorXd out = VectorXd::Zero(target_dim_);
            for (const auto& t : terms_) {
                auto v = t->try_eval(Y, y);
                if (!v) return std::nullopt;
                out += *v;
            }
            return out;
        }
    }
    return VectorXd::Zero(target_dim_);
}

VectorXd HField::eval(const SampledSpace& Y, const SamplePoint& y) const {
    auto v = try_eval(Y, y);
    if (!v)
        throw std::invalid_argument(
            "h field: point not in the sample; close the sample under the generators");
    return *v;
}

VectorXd HField::eval_index(const SampledSpace& Y, int i) const {
    if (kind_ == Kind::Table) return table_.row(i).transpose();
    return eval(Y, Y.point(i));
}

// ---------------------------------------------------------------------------
// StructuredMap
// ---------------------------------------------------------------------------

StructuredMap::StructuredMap(double a_, MatrixXd A_, VectorXd x_off_, HField h_, SampleMap sigma_)
    : a(a_), A(std::move(A_)), x_off(std::move(x_off_)), h(std::move(h_)), sigma(std::move(sigma_)) {
    if (!(a > 0)) throw std::invalid_argument("structured map: scale must be positive");
    MatrixXd err = A.transpose() * A - MatrixXd::Identity(A.rows(), A.cols());
    if (err.cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("structured map: block must be orthogonal");
    if (x_off.size() != A.rows()) throw std::invalid_argument("structured map: offset dimension mismatch");
    if (h.target_dim() != A.rows()) throw std::invalid_argument("structured map: h dimension mismatch");
}

std::pair<VectorXd, SamplePoint> StructuredMap::apply(const SampledSpace& Y, const VectorXd& x,
                                                      const SamplePoint& y) const {
    VectorXd hx = h.eval(Y, y);
    return {a * (A * (x + x_off + hx)), sigma.apply(Y, y)};
}

StructuredMap StructuredMap::inverse(const SampledSpace& Y) const {
    // gamma^{-1}(x,y) = (a^{-1}A^{-1}(x + x' + h'(y)), sigma^{-1}(y)) with
    // h'(y) = -aA [ h(sigma^{-1} y) - h(sigma^{-1} y0) ] and
    // x' = -aA (x_off + h(sigma^{-1} y0)).
    SampleMap sigma_inv = sigma.inverse(Y);
    StructuredMap g;
    g.a = 1.0 / a;
    g.A = A.transpose();
    g.sigma = sigma_inv;
    SamplePoint y0_pre = sigma_inv.apply(Y, Y.point(Y.basepoint()));
    VectorXd h_at = h.eval(Y, y0_pre);
    g.x_off = -a * (A * (x_off + h_at));
    if (h.kind() == HField::Kind::Zero)
        g.h = HField::zero(h.target_dim());
    else
        g.h = HField::composed(-a * A, h, sigma_inv, a * (A * h_at));
    return g;
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

void Word::reduce() {
    std::vector<std::pair<int, int>> out;
    for (const auto& l : letters) {
        if (!out.empty() && out.back().first == l.first && out.back().second == -l.second)
            out.pop_back();
        else
            out.push_back(l);
    }
    letters = std::move(out);
}

int GroupSpec::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown generator: " + name);
}

std::vector<std::vector<Word>> GroupSpec::abelian_boxes(int rank, const std::vector<int>& sizes) {
    std::vector<std::vector<Word>> schedule;
    for (int s : sizes) {
        std::vector<Word> box;
        std::vector<int> exps(rank, -s);
        while (true) {
            Word w;
            for (int g = 0; g < rank; ++g) {
                int e = exps[g];
                for (int k = 0; k < std::abs(e); ++k) w.letters.push_back({g, e > 0 ? 1 : -1});
            }
            box.push_back(w);
            int g = 0;
            while (g < rank && ++exps[g] > s) exps[g++] = -s;
            if (g == rank) break;
        }
        schedule.push_back(std::move(box));
    }
    return schedule;
}

std::vector<Word> GroupSpec::power_chain(const Word& w, int lo, int hi) {
    std::vector<Word> out;
    for (int k = lo; k <= hi; ++k) {
        Word p;
        const Word& base = k >= 0 ? w : w.inverse();
        for (int i = 0; i < std::abs(k); ++i)
            for (const auto& l : base.letters) p.letters.push_back(l);
        p.reduce();
        out.push_back(p);
    }
    return out;
}

std::string word_label(const GroupSpec& spec, const Word& w) {
    if (w.letters.empty()) return "e";
    std::ostringstream os;
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (i) os << ".";
        os << spec.names[w.letters[i].first];
        if (w.letters[i].second < 0) os << "^-1";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// WordAction
// ---------------------------------------------------------------------------

WordAction::WordAction(const SampledSpace& Y, const GroupSpec& spec, double beta)
    : Y_(&Y), spec_(&spec), beta_(beta) {
    inverses_.reserve(spec.gens.size());
    for (const auto& g : spec.gens) inverses_.push_back(g.inverse(Y));
}

int WordAction::active_dim() const {
    return spec_->gens.empty() ? 0 : spec_->gens.front().active_dim();
}

const StructuredMap& WordAction::generator(int g, int exp) const {
    return exp >= 0 ? spec_->gens[g] : inverses_[g];
}

double WordAction::word_scale(const Word& w) const {
    double a = 1.0;
    for (const auto& [g, e] : w.letters) a *= generator(g, e).a;
    return a;
}

MatrixXd WordAction::word_block(const Word& w) const {
    MatrixXd A = MatrixXd::Identity(active_dim(), active_dim());
    for (const auto& [g, e] : w.letters) A = A * generator(g, e).A;
    return A;
}

SamplePoint WordAction::word_sigma(const Word& w, const SamplePoint& y) const {
    SamplePoint p = y;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
        p = generator(it->first, it->second).sigma.apply(*Y_, p);
    return p;
}

// Orbit cursor: keeps the sample index alongside the raw point while sigmas
// preserve the sample, so permutation actions avoid point lookups entirely.
struct OrbitCursor {
    SamplePoint p;
    std::optional<int> idx;

    void advance(const SampledSpace& Y, const SampleMap& sigma) {
        if (idx && sigma.kind() == SampleMap::Kind::Permutation) {
            idx = sigma.perm()[*idx];
            p = Y.point(*idx);
            return;
        }
        p = sigma.apply(Y, p);
        idx.reset();
    }
    VectorXd h_value(const SampledSpace& Y, const HField& h) const {
        if (idx) return h.eval_index(Y, *idx);
        return h.eval(Y, p);
    }
};

VectorXd WordAction::cocycle_eval(const Word& w, const SamplePoint& y) const {
    auto idx = Y_->locate(y, 0.0);
    OrbitCursor z{y, idx};
    return cocycle_eval_cursor(w, z);
}

VectorXd WordAction::cocycle_eval(const Word& w, int sample_index) const {
    OrbitCursor z{Y_->point(sample_index), sample_index};
    return cocycle_eval_cursor(w, z);
}

VectorXd WordAction::cocycle_eval_cursor(const Word& w, OrbitCursor& z) const {
    // Unrolled recursion over letters of w = g_1 ... g_L:
    //   b_w(y) = sum_k (T_{g_L} ... T_{g_{k+1}}) [ h_{g_k}(z_k(y)) - h_{g_k}(z_k(y0)) ]
    // with T_g = a_g^{-1} A_g^{-1} and z_k(y) = sigma_{g_{k+1}} ... sigma_{g_L}(y),
    // accumulated right-to-left. The basepoint corrections telescope into the
    // paired orbit of y0.
    VectorXd acc = VectorXd::Zero(active_dim());
    MatrixXd M = MatrixXd::Identity(active_dim(), active_dim());
    OrbitCursor z0{Y_->point(Y_->basepoint()), Y_->basepoint()};
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
        const StructuredMap& g = generator(it->first, it->second);
        acc += M * (z.h_value(*Y_, g.h) - z0.h_value(*Y_, g.h));
        M = (M * g.A.transpose()) / g.a;
        z.advance(*Y_, g.sigma);
        z0.advance(*Y_, g.sigma);
    }
    return acc;
}

LipschitzSample WordAction::cocycle_sample(const Word& w, int threads) const {
    MatrixXd vals(Y_->size(), active_dim());
    parallel_for(static_cast<std::size_t>(Y_->size()), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            vals.row(static_cast<Eigen::Index>(i)) =
                cocycle_eval(w, static_cast<int>(i)).transpose();
    });
    return LipschitzSample(*Y_, beta_, std::move(vals));
}

std::optional<VectorXd> WordAction::pi_apply(const Word& w, const LipschitzSample& h,
                                             int sample_index, bool allow_extend) const {
    const double a = word_scale(w);
    const MatrixXd Ainv = word_block(w).transpose();
    SamplePoint sy = word_sigma(w, Y_->point(sample_index));
    SamplePoint sy0 = word_sigma(w, Y_->point(Y_->basepoint()));
    auto value_at = [&](const SamplePoint& p) -> std::optional<VectorXd> {
        auto idx = Y_->locate(p, 1e-9);
        if (idx) return h.at(*idx);
        if (allow_extend) return mcshane_extend(h, p);
        return std::nullopt;
    };
    auto vy = value_at(sy);
    auto vy0 = value_at(sy0);
    if (!vy || !vy0) return std::nullopt;
    return (Ainv * (*vy - *vy0)) / a;
}

std::pair<LipschitzSample, std::vector<int>> WordAction::affine_image(const Word& w,
                                                                      const LipschitzSample& h,
                                                                      bool allow_extend) const {
    MatrixXd vals = MatrixXd::Zero(Y_->size(), active_dim());
    std::vector<int> covered;
    LipschitzSample b = cocycle_sample(w);
    for (int i = 0; i < Y_->size(); ++i) {
        auto pi = pi_apply(w, h, i, allow_extend);
        if (!pi) continue;
        vals.row(i) = (*pi + b.at(i)).transpose();
        covered.push_back(i);
    }
    return {LipschitzSample(*Y_, beta_, std::move(vals)), covered};
}

// ---------------------------------------------------------------------------
// Uniformity and the hislip checks
// ---------------------------------------------------------------------------

namespace {

std::vector<Word> ball(const GroupSpec& spec, int radius) {
    std::vector<Word> out = {Word::identity()};
    std::set<std::string> seen = {""};
    auto key = [&](const Word& w) { return word_label(spec, w); };
    std::size_t lo = 0;
    for (int r = 0; r < radius; ++r) {
        std::size_t hi = out.size();
        for (std::size_t i = lo; i < hi; ++i) {
            for (int g = 0; g < static_cast<int>(spec.gens.size()); ++g) {
                for (int e : {1, -1}) {
                    Word w = out[i].then(g, e);
                    if (seen.insert(key(w)).second) out.push_back(w);
                }
            }
        }
        lo = hi;
    }
    return out;
}

}  // namespace

UniformityReport uniformity_check(const WordAction& action, int radius, int pairs_per_word,
                                  unsigned long seed) {
    const SampledSpace& Y = action.space();
    const GroupSpec& spec = action.group();
    if (Y.size() < 2) throw std::invalid_argument("uniformity check: sample too small");

    // Probe pairs: same-x across sampled y-pairs, same-y across x-pairs, mixed.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, Y.size() - 1);
    const int n = action.active_dim();
    struct Pair {
        VectorXd x1, x2;
        int y1, y2;
    };
    std::vector<Pair> probes;
    for (int t = 0; t < pairs_per_word; ++t) {
        VectorXd x1(n), x2(n);
        for (int k = 0; k < n; ++k) {
            x1[k] = coord(rng);
            x2[k] = coord(rng);
        }
        int y1 = pick(rng), y2 = pick(rng);
        probes.push_back({x1, x1, y1, y2});          // same-x, y-pair
        probes.push_back({x1, x2, y1, y1});          // same-y, x-pair
        probes.push_back({x1, x2, y1, y2});          // mixed
    }

    UniformityReport rep;
    auto eval_word = [&](const Word& w, const VectorXd& x, int yi) {
        VectorXd xx = x;
        SamplePoint yy = Y.point(yi);
        for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
            const StructuredMap& g = action.generator(it->first, it->second);
            auto [nx, ny] = g.apply(Y, xx, yy);
            xx = nx;
            yy = ny;
        }
        return std::make_pair(xx, yy);
    };

    auto dist_full = [&](const VectorXd& x1, const SamplePoint& y1, const VectorXd& x2,
                         const SamplePoint& y2) {
        double dx = std::pow((x1 - x2).norm(), action.beta());
        return std::max(dx, Y.dist(y1, y2));
    };

    for (const Word& w : ball(spec, radius)) {
        if (w.letters.empty()) continue;
        double sup = 0, inf = std::numeric_limits<double>::infinity();
        for (const auto& pr : probes) {
            double d0 = dist_full(pr.x1, Y.point(pr.y1), pr.x2, Y.point(pr.y2));
            if (d0 <= 0) continue;
            auto [fx1, fy1] = eval_word(w, pr.x1, pr.y1);
            auto [fx2, fy2] = eval_word(w, pr.x2, pr.y2);
            double d1 = dist_full(fx1, fy1, fx2, fy2);
            double r = d1 / d0;
            sup = std::max(sup, r);
            inf = std::min(inf, r);
            ++rep.pairs;
        }
        if (!(inf > 0) || sup <= 0) continue;
        std::string label = word_label(spec, w);
        rep.ratio_range[label] = {inf, sup};
        rep.C[label] = std::sqrt(sup * inf);
        rep.M = std::max(rep.M, std::sqrt(sup / inf));
    }
    return rep;
}

HislipReport hislip_check(const WordAction& action, const UniformityReport& uni, double tol) {
    const SampledSpace& Y = action.space();
    const GroupSpec& spec = action.group();
    HislipReport rep;
    rep.M = uni.M;
    for (std::size_t g = 0; g < spec.gens.size(); ++g) {
        const StructuredMap& gamma = spec.gens[g];
        HislipEntry e;
        e.generator = spec.names[g];
        // Measured similarity constant of sigma over sampled pairs.
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (int i = 0; i < Y.size(); ++i)
            for (int j = i + 1; j < Y.size(); ++j) {
                double d = Y.dist(i, j);
                if (d <= 0) continue;
                double r = Y.dist(gamma.sigma.apply(Y, Y.point(i)), gamma.sigma.apply(Y, Y.point(j))) / d;
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        e.c_sigma = hi > 0 ? std::sqrt(lo * hi) : 1.0;
        e.a_beta = std::pow(gamma.a, action.beta());
        MatrixXd vals(Y.size(), gamma.h.target_dim());
        for (int i = 0; i < Y.size(); ++i) vals.row(i) = gamma.h.eval_index(Y, i).transpose();
        VectorXd base = vals.row(Y.basepoint()).transpose();
        for (int i = 0; i < Y.size(); ++i) vals.row(i) -= base.transpose();
        LipschitzSample hs(Y, action.beta(), std::move(vals));
        e.lip_h = lip_norm(hs);
        e.bound = uni.M * uni.M;
        auto it = uni.C.find(spec.names[g]);
        e.C = it != uni.C.end() ? it->second : 1.0;
        e.sigma_matches = std::abs(e.c_sigma - e.a_beta) <= tol + 1e-12;
        e.lip_bounded = std::pow(e.lip_h, action.beta()) <= e.bound + tol;
        e.sandwich = e.C / uni.M <= e.a_beta + tol && e.a_beta <= uni.M * e.C + tol;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace qsim
