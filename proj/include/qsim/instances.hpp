#pragma once

#include <memory>

#include "qsim/group_action.hpp"

namespace qsim {

// Deterministic sample spaces and actions used by the verify suites and the
// acceptance battery.

// Regular N-gon in the plane with the power metric |.|^beta; rotations and
// reflections act as exact isometric permutations.
std::shared_ptr<SampledSpace> ngon_space(int N, double beta);

// All residues of Z/m^window as m-adic digit windows.
std::shared_ptr<SampledSpace> madic_residue_space(int m, int window);

// A seeded sampled space of the given kind ("power", "parabolic", "madic",
// "power_madic", "parabolic_madic").
std::shared_ptr<SampledSpace> random_space(const std::string& kind, int points, unsigned long seed);

// Owning bundle: a sampled base space plus a structured action on R^n x Y.
struct ActionInstance {
    std::shared_ptr<SampledSpace> Y;
    GroupSpec spec;
    double beta = 1.0;
    int active_dim = 1;
};

// Random structured action. Even seeds: isometric permutation sigmas over an
// N-gon or m-adic residue sample with table h's (a = 1). Odd seeds: affine
// similarity sigmas with genuine scales (c_sigma = a^beta by construction) and
// hat h's, evaluable along unbounded orbits.
ActionInstance random_structured_action(unsigned long seed, int generators = 2);

// The two-element example: gamma(x, y) = (x + y, -y) on R x R, h0 = y/2.
ActionInstance order_two_action(int half_points = 8);

// Z-action gamma(x, y) = (x + hat(y), y + 1) with a compactly supported hat;
// its fixed point is computed exactly by telescoping sums (see
// telescoping_fixed_point).
ActionInstance shift_hat_action(double hat_center, double hat_halfwidth, double hat_height,
                                double window, double step, int folner_halfwidth);

// Exact solution h* of h0 - pi_gamma h0 = h_gamma for a single-generator
// action whose pointwise orbit sums terminate on the sample: the symmetrized
// telescoping series 1/2 (sum_{i>=0} pi^i h + (-sum_{i>=1} pi^{-i} h)).
LipschitzSample telescoping_fixed_point(const WordAction& action, int terms);

// Uniform quasisimilarity action with a genuine scale: a = scale, sigma affine
// with similarity constant a^beta; used by the hislip battery.
ActionInstance scaled_shear_action(double scale, double beta);

}  // namespace qsim
