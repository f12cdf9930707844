#pragma once

#include <string>
#include <vector>

#include "qsim/piecewise_poly.hpp"
#include "qsim/rationals.hpp"

namespace qsim {

// Point of the step-n filiform group in exponential coordinates: n+1 exact
// rational coefficients of e_1..e_{n+1}. The grading is V_1 = span(e_1,e_2),
// V_j = span(e_{j+1}) for 2 <= j <= n; the only nonzero basis brackets are
// [e_1, e_j] = e_{j+1} for 2 <= j <= n.
struct FilPoint {
    int step = 2;
    std::vector<Rat> c;  // size step+1

    FilPoint() : c(3, Rat(0)) {}
    explicit FilPoint(int n) : step(n), c(n + 1, Rat(0)) { validate(); }
    FilPoint(int n, std::vector<Rat> coords) : step(n), c(std::move(coords)) {
        validate();
        if (static_cast<int>(c.size()) != n + 1)
            throw std::invalid_argument("filiform point: need n+1 coordinates");
    }

    static FilPoint basis(int n, int j) {
        FilPoint p(n);
        if (j < 1 || j > n + 1) throw std::invalid_argument("basis index out of range");
        p.c[j - 1] = 1;
        return p;
    }

    const Rat& coord(int j) const { return c[j - 1]; }  // 1-based
    bool is_zero() const {
        for (const auto& x : c)
            if (x != 0) return false;
        return true;
    }
    // Layer weight of e_j: e_1, e_2 sit in V_1; e_{j+1} sits in V_j.
    static int layer(int j) { return j <= 2 ? 1 : j - 1; }

    FilPoint operator-() const {
        FilPoint p = *this;
        for (auto& x : p.c) x = -x;
        return p;
    }
    friend FilPoint operator+(const FilPoint& a, const FilPoint& b) {
        a.check_step(b);
        FilPoint r = a;
        for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
        return r;
    }
    friend FilPoint operator-(const FilPoint& a, const FilPoint& b) { return a + (-b); }
    friend FilPoint operator*(const Rat& s, const FilPoint& p) {
        FilPoint r = p;
        for (auto& x : r.c) x *= s;
        return r;
    }
    friend bool operator==(const FilPoint& a, const FilPoint& b) {
        return a.step == b.step && a.c == b.c;
    }

    void check_step(const FilPoint& other) const {
        if (step != other.step) throw std::invalid_argument("filiform step mismatch");
    }

  private:
    void validate() const {
        if (step < 2) throw std::invalid_argument("filiform step must be >= 2");
    }
};

// [x, y]: bilinear extension of [e_1, e_j] = e_{j+1}, 2 <= j <= n.
FilPoint fil_bracket(const FilPoint& x, const FilPoint& y);

// Exact group product in exponential coordinates (truncated BCH, Dynkin terms).
FilPoint fil_mul(const FilPoint& p, const FilPoint& q);

inline FilPoint fil_inverse(const FilPoint& p) { return -p; }

// delta_t: scales V_j by t^j, t > 0.
FilPoint fil_dilate(const Rat& t, const FilPoint& p);
FilPoint fil_dilate(double t, const FilPoint& p);

// Graded automorphism: e_1 -> a1 e_1, e_j -> a1^{j-2} a2 e_j for j >= 2.
FilPoint graded_auto(const Rat& a1, const Rat& a2, const FilPoint& p);

// max(|x_1|, |x_2|, |x_3|^{1/2}, ..., |x_{n+1}|^{1/n}); homogeneous of degree 1
// under fil_dilate and invariant under graded_auto with unit parameters.
double homogeneous_norm(const FilPoint& p);

// Left-invariant quasi-distance ||(-p)*q||.
double fil_dist(const FilPoint& p, const FilPoint& q);

// Map F = h_{a1,a2} o L_p o F_h. The antiderivative chain of h is recomputed
// from h on demand and never stored. Canonical representatives keep h(0) = 0.
class NormalForm {
  public:
    NormalForm(int n, Rat a1, Rat a2, FilPoint p, PiecewisePoly h);
    static NormalForm identity(int n);
    // build_Fh: packages F_h with a1 = a2 = 1, p = 0.
    static NormalForm from_shear(int n, PiecewisePoly h);
    static NormalForm from_graded(int n, const Rat& a1, const Rat& a2);
    static NormalForm from_translation(const FilPoint& p);
    static NormalForm from_dilation(int n, const Rat& t);  // delta_t = h_{t,t}

    int step() const { return n_; }
    const Rat& a1() const { return a1_; }
    const Rat& a2() const { return a2_; }
    const FilPoint& translation() const { return p_; }
    const PiecewisePoly& h() const { return h_; }

    // The chain h_2 = h, h_j = -integral of h_{j-1}; entry [j-2] holds h_j.
    std::vector<PiecewisePoly> chain() const;

    FilPoint apply(const FilPoint& x) const;
    NormalForm compose(const NormalForm& other) const;  // this after other
    NormalForm inverse() const;
    NormalForm canonical() const;  // h(0) = 0, constant pushed into p
    bool equals(const NormalForm& other) const;

  private:
    int n_;
    Rat a1_, a2_;
    FilPoint p_;
    PiecewisePoly h_;
};

// Boundary map induced on V_1: f(x2 e2 + x1 e1) = a2(x2 + b + h(x1)) e2 + a1(x1 + a) e1,
// normalized so h(0) = 0.
struct PlanarMap {
    Rat a1, a2, a, b;
    PiecewisePoly h;

    std::pair<Rat, Rat> apply(const Rat& x2, const Rat& x1) const;
    PlanarMap compose(const PlanarMap& other) const;  // this after other
    bool equals(const PlanarMap& other) const;
};

PlanarMap boundary_trace(const NormalForm& F);

// Derived-series diagnostics: pi1 = (a1, a2); pi2 = first coordinate of p on
// ker(pi1); commutators of ker(pi2) elements must be the identity.
struct SolvabilityReport {
    bool pi1_homomorphism = true;
    bool pi2_homomorphism = true;
    bool kernel_abelian = true;
    double max_pointwise_defect = 0;  // over sampled points, commutators vs identity
    std::vector<std::string> violations;
    bool passed() const { return pi1_homomorphism && pi2_homomorphism && kernel_abelian; }
};

SolvabilityReport solvability_witness(const std::vector<NormalForm>& maps);

}  // namespace qsim
