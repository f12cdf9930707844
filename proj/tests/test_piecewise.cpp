#include <doctest.h>

#include "qsim/piecewise_poly.hpp"

using namespace qsim;

TEST_CASE("polynomial arithmetic is exact") {
    Poly p({Rat(1), Rat(2), Rat(3)});  // 1 + 2x + 3x^2
    CHECK(p.eval(Rat(2)) == Rat(17));
    CHECK(p.derivative().eval(Rat(2)) == Rat(14));
    Poly a = p.antiderivative();
    CHECK(a.eval(Rat(0)) == Rat(0));
    CHECK(a.eval(Rat(1)) == Rat(3));  // 1 + 1 + 1
    Poly shifted = p.compose_affine(Rat(2), Rat(-1));
    CHECK(shifted.eval(Rat(1)) == p.eval(Rat(1)));  // 2*1 - 1 = 1
    CHECK(shifted.eval(Rat(3)) == p.eval(Rat(5)));
}

TEST_CASE("hat is continuous and exact") {
    PiecewisePoly h = PiecewisePoly::hat(Rat(0), Rat(1), Rat(1, 2));
    CHECK(h.eval(Rat(-2)) == Rat(0));
    CHECK(h.eval(Rat(0)) == Rat(1, 2));
    CHECK(h.eval(Rat(1, 2)) == Rat(1, 4));
    CHECK(h.eval(Rat(1)) == Rat(0));
    CHECK((h + h).eval(Rat(0)) == Rat(1));
    CHECK((h - h).is_zero());
}

TEST_CASE("antiderivative is continuous with F(0) = 0") {
    PiecewisePoly h = PiecewisePoly::hat(Rat(1), Rat(1), Rat(1));
    PiecewisePoly F = h.antiderivative();
    CHECK(F.eval(Rat(0)) == Rat(0));
    CHECK(F.eval(Rat(2)) == Rat(1));   // full hat mass
    CHECK(F.eval(Rat(5)) == Rat(1));   // constant after the support
    CHECK(F.eval(Rat(-3)) == Rat(0));  // constant before
    // derivative of the antiderivative gives h back (piecewise)
    CHECK(F.derivative() == h);
}

TEST_CASE("affine substitution transforms breakpoints") {
    PiecewisePoly h = PiecewisePoly::hat(Rat(0), Rat(1), Rat(1));
    PiecewisePoly g = h.compose_affine(Rat(1, 2), Rat(0));  // g(x) = h(x/2): twice as wide
    CHECK(g.eval(Rat(1)) == Rat(1, 2));
    CHECK(g.eval(Rat(2)) == Rat(0));
    PiecewisePoly r = h.compose_affine(Rat(-1), Rat(0));  // mirror
    CHECK(r.eval(Rat(1, 2)) == h.eval(Rat(-1, 2)));
}

TEST_CASE("antiderivative of antiderivative matches the polynomial chain") {
    // h(s) = s: first -integral is -x^2/2, second is x^3/6
    PiecewisePoly h = PiecewisePoly::linear(Rat(1));
    PiecewisePoly h3 = Rat(-1) * h.antiderivative();
    PiecewisePoly h4 = Rat(-1) * h3.antiderivative();
    CHECK(h3.eval(Rat(2)) == Rat(-2));
    CHECK(h4.eval(Rat(2)) == Rat(4, 3));
    CHECK(h3.eval(Rat(1)) == Rat(-1, 2));
    CHECK(h4.eval(Rat(1)) == Rat(1, 6));
}
