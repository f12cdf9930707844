"""Quasisimilarity conjugation toolkit.

Boundary metrics (power-Euclidean, diagonal parabolic, m-adic and their
max-products), exact filiform group arithmetic, cocycle verification and
Folner averaging of affine isometric actions, exposed from the C++ core.
"""

from qsim._core import (
    NormalForm,
    Space,
    boundary_trace,
    fil_bracket,
    fil_dilate,
    fil_dist,
    fil_mul,
    graded_auto,
    homogeneous_norm,
    lip_norm,
    madic_dist,
    mcshane_extend,
    parabolic_dist,
    power_dist,
    run_scenario,
    run_scenario_text,
    solvability_witness,
    verify,
    verify_metric_axioms,
)

__all__ = [
    "NormalForm",
    "Space",
    "boundary_trace",
    "fil_bracket",
    "fil_dilate",
    "fil_dist",
    "fil_mul",
    "graded_auto",
    "homogeneous_norm",
    "lip_norm",
    "madic_dist",
    "mcshane_extend",
    "parabolic_dist",
    "power_dist",
    "run_scenario",
    "run_scenario_text",
    "solvability_witness",
    "verify",
    "verify_metric_axioms",
]
