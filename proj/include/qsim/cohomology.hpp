#pragma once

#include <optional>

#include "qsim/group_action.hpp"

namespace qsim {

// Orientation of the cocycle identity being checked:
//   Gamma:     b_{uv} = b_u + pi_u b_v
//   GammaStar: b_{uv} = b_v + pi_v b_u  (the opposite-group form produced by
//              composing structured maps)
enum class CocycleOrientation { Gamma, GammaStar };

// Word-indexed cocycle generated from per-generator values; extended to words
// lazily through the identity. The structured-action case (b_g = h_g) plugs in
// a WordAction directly.
class Cocycle {
  public:
    // b from a structured action: b_g = h_g, pi from the action data.
    static Cocycle of_action(const WordAction& action);
    // b with explicit values on the generator letters; longer words still
    // evaluate through the action, so check() measures how far the assignment
    // is from extending to a cocycle (perturbation detection).
    static Cocycle with_values(const WordAction& action, std::vector<LipschitzSample> generator_values);

    const WordAction& action() const { return *action_; }

    // b_w as an element of E.
    LipschitzSample value(const Word& w) const;
    // b_w at a raw point (closed-form path when the cocycle comes from the
    // action; sample lookup for override values).
    VectorXd value_at(const Word& w, const SamplePoint& y) const;

    // max over word pairs of || b_{uv} - (b_u + pi_u b_v) || (Gamma) or the
    // GammaStar mirror; pairs with sigma-images off the sample raise input
    // errors for table-backed data.
    double check(const std::vector<std::pair<Word, Word>>& pairs,
                 CocycleOrientation orientation = CocycleOrientation::GammaStar,
                 int threads = 1) const;

  private:
    const WordAction* action_;
    std::optional<std::vector<LipschitzSample>> override_values_;

    LipschitzSample pi_of(const Word& w, const LipschitzSample& h) const;
};

// Affine action phi(w)(v) = pi_w v + b_w with the GammaStar composition law
// phi(u.v) = phi(v) o phi(u) on words of the structured action.
class AffineAction {
  public:
    explicit AffineAction(const Cocycle& b);

    // phi(w)(v); off-sample sigma images use McShane extension when allowed,
    // otherwise only the covered subset is meaningful (indices returned).
    std::pair<LipschitzSample, std::vector<int>> apply(const Word& w, const LipschitzSample& v,
                                                       bool allow_extend = false) const;
    LipschitzSample orbit_of_zero(const Word& w) const;  // phi(w)(0) = b_w
    const Cocycle& cocycle() const { return *b_; }

  private:
    const Cocycle* b_;
};

// The two directions of the cocycle / affine-action correspondence.
Cocycle cocycle_of_action(const WordAction& action);
AffineAction action_of_cocycle(const Cocycle& b, const std::vector<std::pair<Word, Word>>& check_pairs,
                               double tol);

struct CoboundaryResult {
    bool certified = false;
    LipschitzSample v0;
    double residual = 0;                   // max_g || b_g - v0 + pi_g v0 ||
    std::vector<double> residual_history;  // per averaging stage
    double orbit_bound = 0;                // max || b_w || over enumerated words
    std::string message;  // on failure: "not certified", never "not a coboundary"
};

// Constructive coboundary solve: full-group average for finite kinds,
// Folner/Cesaro averaging otherwise. Never claims non-coboundedness.
CoboundaryResult solve_coboundary(const Cocycle& b, double tol, int threads = 1);

}  // namespace qsim
