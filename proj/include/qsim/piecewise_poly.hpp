#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qsim/rationals.hpp"

namespace qsim {

// Dense polynomial with exact rational coefficients, ascending order.
struct Poly {
    std::vector<Rat> c;

    Poly() = default;
    explicit Poly(std::vector<Rat> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly constant(const Rat& v) { return Poly({v}); }
    static Poly zero() { return Poly(); }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    int degree() const { return static_cast<int>(c.size()) - 1; }

    Rat eval(const Rat& x) const {
        Rat acc(0);
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    double eval(double x) const {
        double acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + rat_double(*it);
        return acc;
    }

    Poly derivative() const {
        Poly d;
        for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(c[k] * Rat(static_cast<long>(k)));
        d.trim();
        return d;
    }
    // Antiderivative with constant term 0.
    Poly antiderivative() const {
        Poly a;
        a.c.assign(c.size() + 1, Rat(0));
        for (std::size_t k = 0; k < c.size(); ++k) a.c[k + 1] = c[k] / Rat(static_cast<long>(k + 1));
        a.trim();
        return a;
    }
    // p(alpha*x + beta), alpha != 0.
    Poly compose_affine(const Rat& alpha, const Rat& beta) const {
        Poly acc;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            // acc = acc*(alpha x + beta) + coeff
            Poly next;
            next.c.assign(acc.c.size() + 1, Rat(0));
            for (std::size_t k = 0; k < acc.c.size(); ++k) {
                next.c[k + 1] += acc.c[k] * alpha;
                next.c[k] += acc.c[k] * beta;
            }
            if (next.c.empty()) next.c.push_back(Rat(0));
            next.c[0] += *it;
            next.trim();
            acc = next;
        }
        return acc;
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        Poly r;
        r.c.assign(std::max(a.c.size(), b.c.size()), Rat(0));
        for (std::size_t k = 0; k < a.c.size(); ++k) r.c[k] += a.c[k];
        for (std::size_t k = 0; k < b.c.size(); ++k) r.c[k] += b.c[k];
        r.trim();
        return r;
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        Poly r;
        r.c.assign(std::max(a.c.size(), b.c.size()), Rat(0));
        for (std::size_t k = 0; k < a.c.size(); ++k) r.c[k] += a.c[k];
        for (std::size_t k = 0; k < b.c.size(); ++k) r.c[k] -= b.c[k];
        r.trim();
        return r;
    }
    friend Poly operator*(const Rat& s, const Poly& p) {
        Poly r = p;
        for (auto& x : r.c) x *= s;
        r.trim();
        return r;
    }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }
};

// Continuous piecewise polynomial over breakpoints b_1 < ... < b_k.
// pieces[i] is valid on [b_{i-1}, b_i] (first piece on (-inf, b_1], last on [b_k, inf)).
class PiecewisePoly {
  public:
    PiecewisePoly() : pieces_(1) {}
    PiecewisePoly(std::vector<Rat> breaks, std::vector<Poly> pieces)
        : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
        if (pieces_.size() != breaks_.size() + 1)
            throw std::invalid_argument("piecewise poly: need breaks+1 pieces");
        for (std::size_t i = 1; i < breaks_.size(); ++i)
            if (!(breaks_[i - 1] < breaks_[i]))
                throw std::invalid_argument("piecewise poly: breakpoints must increase strictly");
        check_continuity();
    }

    static PiecewisePoly zero() { return PiecewisePoly(); }
    static PiecewisePoly constant(const Rat& v) {
        PiecewisePoly p;
        p.pieces_[0] = Poly::constant(v);
        return p;
    }
    static PiecewisePoly linear(const Rat& slope, const Rat& intercept = Rat(0)) {
        PiecewisePoly p;
        p.pieces_[0] = Poly({intercept, slope});
        return p;
    }
    // Tent of the given height over [center-halfwidth, center+halfwidth], 0 outside.
    static PiecewisePoly hat(const Rat& center, const Rat& halfwidth, const Rat& height) {
        if (halfwidth <= 0) throw std::invalid_argument("hat: halfwidth must be positive");
        Rat slope = height / halfwidth;
        std::vector<Rat> breaks = {center - halfwidth, center, center + halfwidth};
        std::vector<Poly> pieces = {
            Poly::zero(),
            Poly({slope * (halfwidth - center), slope}),
            Poly({slope * (halfwidth + center), -slope}),
            Poly::zero()};
        return PiecewisePoly(std::move(breaks), std::move(pieces));
    }

    const std::vector<Rat>& breaks() const { return breaks_; }
    const std::vector<Poly>& pieces() const { return pieces_; }

    Rat eval(const Rat& x) const { return pieces_[piece_index(x)].eval(x); }
    double eval(double x) const {
        std::size_t i = 0;
        while (i < breaks_.size() && rat_double(breaks_[i]) < x) ++i;
        return pieces_[i].eval(x);
    }

    bool is_zero() const {
        for (const auto& p : pieces_)
            if (!p.is_zero()) return false;
        return true;
    }

    // Derivative; may jump at breakpoints, evaluation uses one-sided pieces.
    PiecewisePoly derivative() const {
        std::vector<Poly> d;
        d.reserve(pieces_.size());
        for (const auto& p : pieces_) d.push_back(p.derivative());
        PiecewisePoly r;
        r.breaks_ = breaks_;
        r.pieces_ = std::move(d);
        r.normalize();
        return r;
    }

    // F(x) = integral from 0 to x; continuous with F(0) = 0.
    PiecewisePoly antiderivative() const {
        std::vector<Poly> raw;
        raw.reserve(pieces_.size());
        for (const auto& p : pieces_) raw.push_back(p.antiderivative());
        std::size_t i0 = piece_index(Rat(0));
        std::vector<Rat> shift(pieces_.size(), Rat(0));
        shift[i0] = -raw[i0].eval(Rat(0));
        for (std::size_t i = i0; i + 1 < pieces_.size(); ++i) {
            const Rat& b = breaks_[i];
            shift[i + 1] = shift[i] + raw[i].eval(b) - raw[i + 1].eval(b);
        }
        for (std::size_t i = i0; i-- > 0;) {
            const Rat& b = breaks_[i];
            shift[i] = shift[i + 1] + raw[i + 1].eval(b) - raw[i].eval(b);
        }
        std::vector<Poly> out;
        out.reserve(pieces_.size());
        for (std::size_t i = 0; i < pieces_.size(); ++i) out.push_back(raw[i] + Poly::constant(shift[i]));
        PiecewisePoly r;
        r.breaks_ = breaks_;
        r.pieces_ = std::move(out);
        r.normalize();
        return r;
    }

    // x -> p(alpha*x + beta), alpha != 0.
    PiecewisePoly compose_affine(const Rat& alpha, const Rat& beta) const {
        if (alpha == 0) throw std::invalid_argument("compose_affine: alpha must be nonzero");
        PiecewisePoly r;
        r.breaks_.clear();
        std::vector<Poly> pieces;
        if (alpha > 0) {
            for (const auto& b : breaks_) r.breaks_.push_back((b - beta) / alpha);
            pieces = pieces_;
        } else {
            for (auto it = breaks_.rbegin(); it != breaks_.rend(); ++it)
                r.breaks_.push_back((*it - beta) / alpha);
            pieces.assign(pieces_.rbegin(), pieces_.rend());
        }
        r.pieces_.clear();
        for (const auto& p : pieces) r.pieces_.push_back(p.compose_affine(alpha, beta));
        r.normalize();
        return r;
    }

    friend PiecewisePoly operator+(const PiecewisePoly& a, const PiecewisePoly& b) {
        return combine(a, b, +1);
    }
    friend PiecewisePoly operator-(const PiecewisePoly& a, const PiecewisePoly& b) {
        return combine(a, b, -1);
    }
    friend PiecewisePoly operator*(const Rat& s, const PiecewisePoly& p) {
        PiecewisePoly r = p;
        for (auto& q : r.pieces_) q = s * q;
        r.normalize();
        return r;
    }
    friend bool operator==(const PiecewisePoly& a, const PiecewisePoly& b) {
        return (a - b).is_zero();
    }

    // Largest |slope| over pieces restricted to [lo, hi]; the pieces are polynomials,
    // so this samples the derivative at interval endpoints plus the polynomial's own
    // critical resolution via dense rational sampling. Exact for degree <= 2.
    double slope_bound(double lo, double hi, int samples_per_piece = 8) const {
        PiecewisePoly d = derivative();
        double best = 0;
        auto consider = [&](double x) {
            if (x < lo || x > hi) return;
            best = std::max(best, std::abs(d.eval(x)));
        };
        consider(lo);
        consider(hi);
        for (const auto& b : breaks_) {
            double bb = rat_double(b);
            consider(std::nextafter(bb, lo));
            consider(bb);
            consider(std::nextafter(bb, hi));
        }
        double prev = lo;
        for (std::size_t i = 0; i <= breaks_.size(); ++i) {
            double right = i < breaks_.size() ? std::min(hi, rat_double(breaks_[i])) : hi;
            if (right > prev)
                for (int k = 1; k < samples_per_piece; ++k)
                    consider(prev + (right - prev) * k / samples_per_piece);
            prev = right;
            if (prev >= hi) break;
        }
        return best;
    }

  private:
    std::vector<Rat> breaks_;
    std::vector<Poly> pieces_;

    std::size_t piece_index(const Rat& x) const {
        std::size_t i = 0;
        while (i < breaks_.size() && breaks_[i] < x) ++i;
        return i;
    }

    void check_continuity() const {
        for (std::size_t i = 0; i < breaks_.size(); ++i)
            if (pieces_[i].eval(breaks_[i]) != pieces_[i + 1].eval(breaks_[i]))
                throw std::invalid_argument("piecewise poly: discontinuous at breakpoint");
    }

    void normalize() {
        // Merge adjacent identical pieces so equality checks are canonical.
        std::vector<Rat> nb;
        std::vector<Poly> np;
        np.push_back(pieces_[0]);
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            if (pieces_[i + 1] == np.back()) continue;
            nb.push_back(breaks_[i]);
            np.push_back(pieces_[i + 1]);
        }
        breaks_ = std::move(nb);
        pieces_ = std::move(np);
    }

    static PiecewisePoly combine(const PiecewisePoly& a, const PiecewisePoly& b, int sign) {
        std::vector<Rat> breaks;
        std::merge(a.breaks_.begin(), a.breaks_.end(), b.breaks_.begin(), b.breaks_.end(),
                   std::back_inserter(breaks));
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        std::vector<Poly> pieces;
        pieces.reserve(breaks.size() + 1);
        for (std::size_t i = 0; i <= breaks.size(); ++i) {
            Rat probe = i < breaks.size() ? breaks[i] : (breaks.empty() ? Rat(0) : breaks.back() + 1);
            std::size_t ia = a.piece_index(probe);
            std::size_t ib = b.piece_index(probe);
            pieces.push_back(sign > 0 ? a.pieces_[ia] + b.pieces_[ib] : a.pieces_[ia] - b.pieces_[ib]);
        }
        PiecewisePoly r;
        r.breaks_ = std::move(breaks);
        r.pieces_ = std::move(pieces);
        r.normalize();
        return r;
    }
};

}  // namespace qsim
