#include "qsim/filiform.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>

namespace qsim {

FilPoint fil_bracket(const FilPoint& x, const FilPoint& y) {
    x.check_step(y);
    const int n = x.step;
    FilPoint r(n);
    // [x, y] = sum_{j=2}^{n} (x_1 y_j - x_j y_1) e_{j+1}
    for (int j = 2; j <= n; ++j)
        r.c[j] = x.c[0] * y.c[j - 1] - x.c[j - 1] * y.c[0];
    return r;
}

namespace {

struct DynkinTerm {
    Rat coeff;
    std::vector<unsigned char> word;  // 0 = X, 1 = Y
};

Rat factorial(int k) {
    Rat r(1);
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

// All Dynkin terms for words of length <= n, merged by word.
std::vector<DynkinTerm> build_dynkin_terms(int n) {
    std::map<std::vector<unsigned char>, Rat> acc;
    // Enumerate block tuples ((p_1,q_1),...,(p_k,q_k)), p_i+q_i >= 1, total <= n.
    struct Block {
        int p, q;
    };
    std::vector<Block> blocks;
    std::function<void(int)> rec = [&](int total) {
        if (!blocks.empty()) {
            int k = static_cast<int>(blocks.size());
            Rat denom = Rat(k) * Rat(total);
            for (const auto& b : blocks) denom *= factorial(b.p) * factorial(b.q);
            Rat coeff = Rat((k - 1) % 2 == 0 ? 1 : -1) / denom;
            std::vector<unsigned char> word;
            word.reserve(total);
            for (const auto& b : blocks) {
                for (int i = 0; i < b.p; ++i) word.push_back(0);
                for (int i = 0; i < b.q; ++i) word.push_back(1);
            }
            // Right-nested bracket dies if the two innermost letters coincide.
            if (word.size() < 2 || word[word.size() - 1] != word[word.size() - 2])
                acc[word] += coeff;
        }
        if (total == n) return;
        for (int m = 1; m + total <= n; ++m)
            for (int p = 0; p <= m; ++p) {
                blocks.push_back({p, m - p});
                rec(total + m);
                blocks.pop_back();
            }
    };
    rec(0);
    std::vector<DynkinTerm> out;
    for (auto& [word, coeff] : acc)
        if (coeff != 0) out.push_back({coeff, word});
    return out;
}

const std::vector<DynkinTerm>& dynkin_terms(int n) {
    static std::map<int, std::vector<DynkinTerm>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_dynkin_terms(n)).first;
    return it->second;
}

}  // namespace

FilPoint fil_mul(const FilPoint& p, const FilPoint& q) {
    p.check_step(q);
    const int n = p.step;
    FilPoint r(n);
    for (const auto& term : dynkin_terms(n)) {
        const auto& w = term.word;
        FilPoint val = w.back() == 0 ? p : q;
        for (std::size_t i = w.size() - 1; i-- > 0;)
            val = fil_bracket(w[i] == 0 ? p : q, val);
        if (val.is_zero()) continue;
        r = r + term.coeff * val;
    }
    return r;
}

FilPoint fil_dilate(const Rat& t, const FilPoint& p) {
    if (t <= 0) throw std::invalid_argument("dilation parameter must be positive");
    FilPoint r = p;
    for (int j = 1; j <= p.step + 1; ++j) r.c[j - 1] *= rat_pow(t, FilPoint::layer(j));
    return r;
}

FilPoint fil_dilate(double t, const FilPoint& p) { return fil_dilate(Rat(t), p); }

FilPoint graded_auto(const Rat& a1, const Rat& a2, const FilPoint& p) {
    if (a1 == 0 || a2 == 0) throw std::invalid_argument("graded automorphism parameters must be nonzero");
    FilPoint r = p;
    r.c[0] *= a1;
    for (int j = 2; j <= p.step + 1; ++j) r.c[j - 1] *= rat_pow(a1, j - 2) * a2;
    return r;
}

double homogeneous_norm(const FilPoint& p) {
    double best = 0;
    for (int j = 1; j <= p.step + 1; ++j) {
        double v = std::abs(rat_double(p.c[j - 1]));
        best = std::max(best, std::pow(v, 1.0 / FilPoint::layer(j)));
    }
    return best;
}

double fil_dist(const FilPoint& p, const FilPoint& q) { return homogeneous_norm(fil_mul(-p, q)); }

// ---------------------------------------------------------------------------
// Normal forms
// ---------------------------------------------------------------------------

namespace {

// Map x -> p * x * w(x_1) with w taking values in the abelian ideal
// span(e_2..e_{n+1}); the closed composition form behind NormalForm.
struct ShearForm {
    int n;
    FilPoint p;
    std::vector<PiecewisePoly> w;  // w[j-2] is the e_j component, j = 2..n+1
};

FilPoint ideal_value(int n, const std::vector<PiecewisePoly>& w, const Rat& s) {
    FilPoint u(n);
    for (int j = 2; j <= n + 1; ++j) u.c[j - 1] = w[j - 2].eval(s);
    return u;
}

FilPoint apply_shear(const ShearForm& S, const FilPoint& x) {
    return fil_mul(S.p, fil_mul(x, ideal_value(S.n, S.w, x.c[0])));
}

// Scale ideal components by the graded automorphism h_{a1,a2}^{-1}.
std::vector<PiecewisePoly> graded_inverse_scale(int n, const Rat& a1, const Rat& a2,
                                                const std::vector<PiecewisePoly>& w) {
    std::vector<PiecewisePoly> out;
    out.reserve(w.size());
    for (int j = 2; j <= n + 1; ++j)
        out.push_back(Rat(1) / (rat_pow(a1, j - 2) * a2) * w[j - 2]);
    return out;
}

FilPoint graded_inverse_point(int n, const Rat& a1, const Rat& a2, const FilPoint& p) {
    return graded_auto(Rat(1) / a1, Rat(1) / a2, p);
}

// Split p * x * w(x_1) into canonical data: translation with w(0) folded in and
// an exact antiderivative chain. The gauge move uses z * x = x * (e^{-x_1 N} z)
// for z in the abelian ideal, N the raising map e_j -> e_{j+1}.
std::pair<FilPoint, PiecewisePoly> canonicalize_shear(const ShearForm& S) {
    const int n = S.n;
    std::vector<Rat> zeta(n + 2, Rat(0));  // zeta[j] for j = 2..n+1
    for (int j = 2; j <= n + 1; ++j) zeta[j] = S.w[j - 2].eval(Rat(0));

    std::vector<PiecewisePoly> wp;
    wp.reserve(n);
    for (int j = 2; j <= n + 1; ++j) {
        std::vector<Rat> corr(j - 1, Rat(0));  // coefficients of (e^{-sN} zeta)_j
        Rat mfact(1);
        for (int m = 0; m <= j - 2; ++m) {
            if (m > 0) mfact *= m;
            int src = j - m;
            if (src >= 2) corr[m] = Rat(m % 2 == 0 ? 1 : -1) / mfact * zeta[src];
        }
        PiecewisePoly correction(std::vector<Rat>{}, {Poly(corr)});
        wp.push_back(S.w[j - 2] - correction);
    }
    // Exact chain requirement: d/ds wp_j = -wp_{j-1}.
    for (int j = 3; j <= n + 1; ++j) {
        if (!(wp[j - 2].derivative() == Rat(-1) * wp[j - 3]))
            throw std::logic_error("normal form composition left the representable class");
    }
    FilPoint z(n);
    for (int j = 2; j <= n + 1; ++j) z.c[j - 1] = zeta[j];
    return {fil_mul(S.p, z), wp[0]};
}

}  // namespace

NormalForm::NormalForm(int n, Rat a1, Rat a2, FilPoint p, PiecewisePoly h)
    : n_(n), a1_(std::move(a1)), a2_(std::move(a2)), p_(std::move(p)), h_(std::move(h)) {
    if (a1_ == 0 || a2_ == 0) throw std::invalid_argument("normal form: a1, a2 must be nonzero");
    if (p_.step != n_) throw std::invalid_argument("normal form: translation step mismatch");
}

NormalForm NormalForm::identity(int n) {
    return NormalForm(n, Rat(1), Rat(1), FilPoint(n), PiecewisePoly::zero());
}

NormalForm NormalForm::from_shear(int n, PiecewisePoly h) {
    return NormalForm(n, Rat(1), Rat(1), FilPoint(n), std::move(h));
}

NormalForm NormalForm::from_graded(int n, const Rat& a1, const Rat& a2) {
    return NormalForm(n, a1, a2, FilPoint(n), PiecewisePoly::zero());
}

NormalForm NormalForm::from_translation(const FilPoint& p) {
    return NormalForm(p.step, Rat(1), Rat(1), p, PiecewisePoly::zero());
}

NormalForm NormalForm::from_dilation(int n, const Rat& t) {
    if (t <= 0) throw std::invalid_argument("dilation parameter must be positive");
    return from_graded(n, t, t);
}

std::vector<PiecewisePoly> NormalForm::chain() const {
    std::vector<PiecewisePoly> c;
    c.reserve(n_);
    c.push_back(h_);
    for (int j = 3; j <= n_ + 1; ++j) c.push_back(Rat(-1) * c.back().antiderivative());
    return c;
}

FilPoint NormalForm::apply(const FilPoint& x) const {
    if (x.step != n_) throw std::invalid_argument("normal form application: step mismatch");
    ShearForm S{n_, p_, chain()};
    return graded_auto(a1_, a2_, apply_shear(S, x));
}

NormalForm NormalForm::compose(const NormalForm& other) const {
    if (n_ != other.n_) throw std::invalid_argument("normal form composition: step mismatch");
    // this = h_a o S_{p,w}, other = h_b o S_{q,v};
    // composite = h_{ab} o S_{h_b^{-1}(p) * q, v(s) + (h_b^{-1} w)(b1 (q1 + s))}.
    ShearForm mine{n_, p_, chain()};
    ShearForm theirs{n_, other.p_, other.chain()};
    const Rat& b1 = other.a1_;
    const Rat& b2 = other.a2_;
    std::vector<PiecewisePoly> scaled = graded_inverse_scale(n_, b1, b2, mine.w);
    const Rat q1 = theirs.p.c[0];
    ShearForm out;
    out.n = n_;
    out.p = fil_mul(graded_inverse_point(n_, b1, b2, mine.p), theirs.p);
    out.w.reserve(n_);
    for (int j = 2; j <= n_ + 1; ++j)
        out.w.push_back(theirs.w[j - 2] + scaled[j - 2].compose_affine(b1, b1 * q1));
    auto [pc, hc] = canonicalize_shear(out);
    return NormalForm(n_, a1_ * b1, a2_ * b2, pc, hc);
}

NormalForm NormalForm::inverse() const {
    // (h_a o S_{p,w})^{-1} = h_{1/a} o S_{h_a(-p), h_a((-w)(s/a1 - p1))}.
    ShearForm S{n_, p_, chain()};
    const Rat p1 = p_.c[0];
    ShearForm inv;
    inv.n = n_;
    inv.p = graded_auto(a1_, a2_, -p_);
    inv.w.reserve(n_);
    for (int j = 2; j <= n_ + 1; ++j) {
        PiecewisePoly flipped = (Rat(-1) * S.w[j - 2]).compose_affine(Rat(1) / a1_, -p1);
        inv.w.push_back(rat_pow(a1_, j - 2) * a2_ * flipped);
    }
    auto [pc, hc] = canonicalize_shear(inv);
    return NormalForm(n_, Rat(1) / a1_, Rat(1) / a2_, pc, hc);
}

NormalForm NormalForm::canonical() const {
    ShearForm S{n_, p_, chain()};
    auto [pc, hc] = canonicalize_shear(S);
    return NormalForm(n_, a1_, a2_, pc, hc);
}

bool NormalForm::equals(const NormalForm& other) const {
    if (n_ != other.n_) return false;
    NormalForm a = canonical();
    NormalForm b = other.canonical();
    return a.a1_ == b.a1_ && a.a2_ == b.a2_ && a.p_ == b.p_ && a.h_ == b.h_;
}

std::pair<Rat, Rat> PlanarMap::apply(const Rat& x2, const Rat& x1) const {
    return {a2 * (x2 + b + h.eval(x1)), a1 * (x1 + a)};
}

PlanarMap PlanarMap::compose(const PlanarMap& g) const {
    PlanarMap r;
    r.a1 = a1 * g.a1;
    r.a2 = a2 * g.a2;
    r.a = g.a + a / g.a1;
    PiecewisePoly raw = g.h + Rat(1) / g.a2 * h.compose_affine(g.a1, g.a1 * g.a);
    Rat r0 = raw.eval(Rat(0));
    r.h = raw - PiecewisePoly::constant(r0);
    r.b = g.b + b / g.a2 + r0;
    return r;
}

bool PlanarMap::equals(const PlanarMap& g) const {
    return a1 == g.a1 && a2 == g.a2 && a == g.a && b == g.b && h == g.h;
}

PlanarMap boundary_trace(const NormalForm& F) {
    NormalForm c = F.canonical();
    PlanarMap f;
    f.a1 = c.a1();
    f.a2 = c.a2();
    f.a = c.translation().coord(1);
    Rat h0 = c.h().eval(Rat(0));
    f.h = c.h() - PiecewisePoly::constant(h0);
    f.b = c.translation().coord(2) + h0;
    return f;
}

SolvabilityReport solvability_witness(const std::vector<NormalForm>& maps) {
    SolvabilityReport rep;
    if (maps.empty()) return rep;
    const int n = maps.front().step();

    std::vector<FilPoint> probes;
    const long nums[] = {0, 1, -1, 2, -3};
    for (int t = 0; t < 5; ++t) {
        FilPoint x(n);
        for (int j = 1; j <= n + 1; ++j)
            x.c[j - 1] = rat_from_long(nums[(t + j) % 5], 1 + ((t + 2 * j) % 3));
        probes.push_back(x);
    }

    auto note = [&](const std::string& msg) { rep.violations.push_back(msg); };

    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (std::size_t j = 0; j < maps.size(); ++j) {
            NormalForm c = maps[i].compose(maps[j]);
            if (c.a1() != maps[i].a1() * maps[j].a1() || c.a2() != maps[i].a2() * maps[j].a2()) {
                rep.pi1_homomorphism = false;
                note("pi1 not multiplicative on composite " + std::to_string(i) + "," + std::to_string(j));
            }
        }
    }

    std::vector<const NormalForm*> h1;
    for (const auto& m : maps)
        if (m.a1() == 1 && m.a2() == 1) h1.push_back(&m);
    for (std::size_t i = 0; i < h1.size(); ++i) {
        for (std::size_t j = 0; j < h1.size(); ++j) {
            NormalForm c = h1[i]->compose(*h1[j]);
            Rat expect = h1[i]->canonical().translation().coord(1) +
                         h1[j]->canonical().translation().coord(1);
            if (c.canonical().translation().coord(1) != expect) {
                rep.pi2_homomorphism = false;
                note("pi2 not additive on kernel composite");
            }
        }
    }

    std::vector<const NormalForm*> h2;
    for (const auto* m : h1)
        if (m->canonical().translation().coord(1) == 0) h2.push_back(m);
    for (std::size_t i = 0; i < h2.size(); ++i) {
        for (std::size_t j = i + 1; j < h2.size(); ++j) {
            NormalForm comm =
                h2[i]->compose(*h2[j]).compose(h2[i]->inverse()).compose(h2[j]->inverse());
            if (!comm.equals(NormalForm::identity(n))) {
                rep.kernel_abelian = false;
                note("kernel-of-pi2 commutator is not the identity");
            }
            for (const auto& x : probes) {
                FilPoint y = comm.apply(x);
                double defect = fil_dist(x, y);
                rep.max_pointwise_defect = std::max(rep.max_pointwise_defect, defect);
            }
        }
    }
    return rep;
}

}  // namespace qsim
