#include "qsim/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>

namespace qsim {

PowerEuclidean::PowerEuclidean(int dim_, double beta_) : dim(dim_), beta(beta_) {
    if (dim < 1) throw std::invalid_argument("power space: dim must be >= 1");
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("power space: beta must lie in (0, 1]");
}

double power_dist(const PowerEuclidean& space, const VectorXd& x, const VectorXd& y) {
    if (x.size() != space.dim || y.size() != space.dim)
        throw std::invalid_argument("power_dist: dimension mismatch");
    return std::pow((x - y).norm(), space.beta);
}

ParabolicSpec::ParabolicSpec(std::vector<double> alphas_, std::vector<int> block_dims_, double scale_)
    : alphas(std::move(alphas_)), block_dims(std::move(block_dims_)), scale(scale_) {
    if (alphas.empty() || alphas.size() != block_dims.size())
        throw std::invalid_argument("parabolic spec: need one block dimension per exponent");
    if (!(scale > 0)) throw std::invalid_argument("parabolic spec: scale must be positive");
    double prev = 0;
    for (double a : alphas) {
        if (!(a > prev)) throw std::invalid_argument("parabolic spec: alphas must be positive and strictly increasing");
        prev = a;
    }
    for (int d : block_dims)
        if (d < 1) throw std::invalid_argument("parabolic spec: block dims must be positive");
}

int ParabolicSpec::total_dim() const {
    int n = 0;
    for (int d : block_dims) n += d;
    return n;
}

std::pair<int, int> ParabolicSpec::block_range(int i) const {
    int off = 0;
    for (int b = 0; b < i; ++b) off += block_dims[b];
    return {off, block_dims[i]};
}

double parabolic_dist(const ParabolicSpec& spec, const VectorXd& x, const VectorXd& y) {
    if (x.size() != spec.total_dim() || y.size() != spec.total_dim())
        throw std::invalid_argument("parabolic_dist: block structure mismatch");
    double best = 0;
    int off = 0;
    for (int i = 0; i < spec.blocks(); ++i) {
        int d = spec.block_dims[i];
        double e = spec.exponent(i);
        best = std::max(best, std::pow((x.segment(off, d) - y.segment(off, d)).norm(), e));
        off += d;
    }
    return best;
}

MadicNumber::MadicNumber(int m_, int k_lo_, std::vector<int> digits_)
    : m(m_), k_lo(k_lo_), digits(std::move(digits_)) {
    if (m < 2) throw std::invalid_argument("madic: base must be >= 2");
    for (int d : digits)
        if (d < 0 || d >= m) throw std::invalid_argument("madic: digit out of range");
}

MadicNumber MadicNumber::from_integer(int m, long value) {
    if (value < 0) throw std::invalid_argument("madic: from_integer needs a nonnegative value");
    std::vector<int> ds;
    while (value > 0) {
        ds.push_back(static_cast<int>(value % m));
        value /= m;
    }
    return MadicNumber(m, 0, std::move(ds));
}

int MadicNumber::digit(int k) const {
    int idx = k - k_lo;
    if (idx < 0 || idx >= static_cast<int>(digits.size())) return 0;
    return digits[idx];
}

bool MadicNumber::operator==(const MadicNumber& other) const {
    return m == other.m && !madic_first_diff(*this, other).has_value();
}

std::optional<int> madic_first_diff(const MadicNumber& a, const MadicNumber& b) {
    if (a.m != b.m) throw std::invalid_argument("madic: base mismatch");
    int lo = std::min(a.k_lo, b.k_lo);
    int hi = std::max(a.k_hi(), b.k_hi());
    for (int k = lo; k <= hi; ++k)
        if (a.digit(k) != b.digit(k)) return k;
    return std::nullopt;
}

double madic_dist(const MadicNumber& a, const MadicNumber& b) {
    auto k = madic_first_diff(a, b);
    if (!k) return 0.0;
    return std::pow(static_cast<double>(a.m), -static_cast<double>(*k + 1));
}

MadicNumber madic_add(const MadicNumber& a, const MadicNumber& b) {
    if (a.m != b.m) throw std::invalid_argument("madic: base mismatch");
    int lo = std::min(a.k_lo, b.k_lo);
    int hi = std::max(a.k_hi(), b.k_hi()) + 1;
    std::vector<int> ds;
    int carry = 0;
    for (int k = lo; k <= hi || carry; ++k) {
        int s = a.digit(k) + b.digit(k) + carry;
        ds.push_back(s % a.m);
        carry = s / a.m;
    }
    return MadicNumber(a.m, lo, std::move(ds));
}

MadicNumber madic_shift(const MadicNumber& a, int j) {
    return MadicNumber(a.m, a.k_lo + j, a.digits);
}

MadicNumber madic_mod_neg(const MadicNumber& a, int modulus_exp) {
    // m^K - a over digits [0, K); requires a supported there.
    if (a.k_lo < 0 || a.k_hi() >= modulus_exp) {
        for (int k = a.k_lo; k < 0; ++k)
            if (a.digit(k) != 0) throw std::invalid_argument("madic: point outside the modular window");
        for (int k = modulus_exp; k <= a.k_hi(); ++k)
            if (a.digit(k) != 0) throw std::invalid_argument("madic: point outside the modular window");
    }
    bool zero = true;
    for (int k = 0; k < modulus_exp; ++k) zero = zero && a.digit(k) == 0;
    if (zero) return MadicNumber::zero(a.m);
    std::vector<int> ds(modulus_exp, 0);
    int borrow = 0;
    for (int k = 0; k < modulus_exp; ++k) {
        int v = -a.digit(k) - borrow;
        borrow = 0;
        while (v < 0) {
            v += a.m;
            borrow = 1;
        }
        ds[k] = v;
    }
    return MadicNumber(a.m, 0, std::move(ds));
}

MadicNumber madic_mod_add(const MadicNumber& a, const MadicNumber& b, int modulus_exp) {
    MadicNumber s = madic_add(a, b);
    std::vector<int> ds(modulus_exp, 0);
    for (int k = 0; k < modulus_exp; ++k) ds[k] = s.digit(k);
    return MadicNumber(s.m, 0, std::move(ds));
}

SpaceSpec SpaceSpec::power(int dim, double beta) {
    (void)PowerEuclidean(dim, beta);
    SpaceSpec s;
    s.real_blocks = {{dim, beta}};
    s.kind = "power";
    return s;
}

SpaceSpec SpaceSpec::parabolic(const ParabolicSpec& spec) {
    SpaceSpec s;
    for (int i = 0; i < spec.blocks(); ++i) s.real_blocks.push_back({spec.block_dims[i], spec.exponent(i)});
    s.kind = "parabolic";
    return s;
}

SpaceSpec SpaceSpec::madic(int m) {
    (void)MadicNumber(m, 0, {});
    SpaceSpec s;
    s.madic_base = m;
    s.kind = "madic";
    return s;
}

SpaceSpec SpaceSpec::power_madic(int dim, double beta, int m) {
    SpaceSpec s = power(dim, beta);
    (void)MadicNumber(m, 0, {});
    s.madic_base = m;
    s.kind = "power_madic";
    return s;
}

SpaceSpec SpaceSpec::parabolic_madic(const ParabolicSpec& spec, int m) {
    SpaceSpec s = parabolic(spec);
    (void)MadicNumber(m, 0, {});
    s.madic_base = m;
    s.kind = "parabolic_madic";
    return s;
}

int SpaceSpec::real_dim() const {
    int n = 0;
    for (const auto& [d, e] : real_blocks) n += d;
    return n;
}

bool SamplePoint::approx_equal(const SamplePoint& other, double tol) const {
    if (x.size() != other.x.size()) return false;
    if (u.has_value() != other.u.has_value()) return false;
    if (x.size() > 0 && (x - other.x).cwiseAbs().maxCoeff() > tol) return false;
    if (u && !(*u == *other.u)) return false;
    return true;
}

double point_dist(const SpaceSpec& spec, const SamplePoint& p, const SamplePoint& q) {
    if (p.x.size() != spec.real_dim() || q.x.size() != spec.real_dim())
        throw std::invalid_argument("point_dist: space mismatch");
    if (spec.has_madic() && (!p.u || !q.u))
        throw std::invalid_argument("point_dist: missing m-adic part");
    double best = 0;
    int off = 0;
    for (const auto& [d, e] : spec.real_blocks) {
        best = std::max(best, std::pow((p.x.segment(off, d) - q.x.segment(off, d)).norm(), e));
        off += d;
    }
    if (spec.has_madic()) best = std::max(best, madic_dist(*p.u, *q.u));
    return best;
}

std::string SampledSpace::exact_key(const SamplePoint& p) {
    std::string key;
    key.reserve(p.x.size() * sizeof(double) + 16);
    for (Eigen::Index i = 0; i < p.x.size(); ++i) {
        double v = p.x[i] == 0.0 ? 0.0 : p.x[i];  // normalize -0
        key.append(reinterpret_cast<const char*>(&v), sizeof(double));
    }
    if (p.u) {
        int lo = p.u->k_lo, hi = p.u->k_hi();
        while (lo <= hi && p.u->digit(lo) == 0) ++lo;     // trim leading zeros
        while (hi >= lo && p.u->digit(hi) == 0) --hi;
        key.push_back('|');
        for (int k = lo; k <= hi; ++k) {
            char buf[8];
            int len = std::snprintf(buf, sizeof buf, "%d,", p.u->digit(k));
            key.append(buf, len);
        }
        key += ":" + std::to_string(lo);
    }
    return key;
}

SampledSpace::SampledSpace(SpaceSpec spec, std::vector<SamplePoint> pts, int basepoint)
    : spec_(std::move(spec)), pts_(std::move(pts)), basepoint_(basepoint) {
    if (pts_.empty()) throw std::invalid_argument("sampled space: need at least one point");
    if (basepoint_ < 0 || basepoint_ >= static_cast<int>(pts_.size()))
        throw std::invalid_argument("sampled space: basepoint index out of range");
    for (const auto& p : pts_) {
        if (p.x.size() != spec_.real_dim())
            throw std::invalid_argument("sampled space: point dimension mismatch");
        if (spec_.has_madic() && !p.u)
            throw std::invalid_argument("sampled space: point lacks m-adic part");
        if (spec_.has_madic() && p.u->m != *spec_.madic_base)
            throw std::invalid_argument("sampled space: m-adic base mismatch");
    }
    for (int i = 0; i < size(); ++i) exact_index_.emplace(exact_key(pts_[i]), i);
}

std::optional<int> SampledSpace::locate(const SamplePoint& p, double tol) const {
    auto it = exact_index_.find(exact_key(p));
    if (it != exact_index_.end()) return it->second;
    if (tol <= 0) return std::nullopt;
    for (int i = 0; i < size(); ++i)
        if (pts_[i].approx_equal(p, tol)) return i;
    return std::nullopt;
}

namespace {

void check_triangle(const std::function<double(int, int)>& d, int i, int j, int k, double tol,
                    bool ultra, AxiomReport& rep) {
    double dij = d(i, j), dik = d(i, k), dkj = d(k, j);
    if (dij > dik + dkj + tol)
        rep.violations.push_back({"triangle", i, j, k, dij - dik - dkj});
    if (ultra && dij > std::max(dik, dkj))
        rep.violations.push_back({"ultrametric", i, j, k, dij - std::max(dik, dkj)});
}

AxiomReport run_axioms(int n, const std::function<double(int, int)>& d,
                       const std::function<bool(int, int)>& same_point, double tol, bool ultra,
                       long max_triples, unsigned long seed) {
    AxiomReport rep;
    rep.ultrametric_checked = ultra;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            ++rep.pairs_checked;
            double dij = d(i, j), dji = d(j, i);
            if (std::abs(dij - dji) > tol)
                rep.violations.push_back({"symmetry", i, j, -1, std::abs(dij - dji)});
            bool zero = dij <= tol;
            if (zero != same_point(i, j))
                rep.violations.push_back({"identity", i, j, -1, dij});
        }
    }
    long total = static_cast<long>(n) * n * n;
    if (total <= max_triples) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    ++rep.triples_checked;
                    check_triangle(d, i, j, k, tol, ultra, rep);
                }
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (long t = 0; t < max_triples; ++t) {
            ++rep.triples_checked;
            check_triangle(d, pick(rng), pick(rng), pick(rng), tol, ultra, rep);
        }
    }
    return rep;
}

}  // namespace

AxiomReport verify_metric_axioms(const SampledSpace& space, double tol, long max_triples,
                                 unsigned long seed) {
    bool ultra = space.spec().kind == "madic";
    auto d = [&](int i, int j) { return space.dist(i, j); };
    auto same = [&](int i, int j) {
        return i == j || space.point(i).approx_equal(space.point(j), 0.0);
    };
    return run_axioms(space.size(), d, same, tol, ultra, max_triples, seed);
}

AxiomReport verify_metric_axioms(const MatrixXd& dist, double tol, bool ultrametric) {
    auto d = [&](int i, int j) { return dist(i, j); };
    auto same = [&](int i, int j) { return i == j; };
    return run_axioms(static_cast<int>(dist.rows()), d, same, tol, ultrametric,
                      static_cast<long>(dist.rows()) * dist.rows() * dist.rows(), 0);
}

}  // namespace qsim
