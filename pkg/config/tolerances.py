"""Default tolerances and sampling constants for every named check.

A global ``--tol`` / ``TWOBODY_TOL`` replaces every value in ``TOLERANCES``.
"""

DEFAULT_SEED = 0x5EED
DEFAULT_POINTS = 50

COMPONENT_RANGE = 3.0
TIME_RANGE = 5.0
R_MIN = 1e-3
MATRIX_ATOL = 1e-12
UNITARITY_ATOL = 1e-10

TOLERANCES = {
    # clifford
    'clifford.anticommutator8': 1e-13,
    'clifford.anticommutator16': 1e-12,
    'clifford.hermiticity': 1e-15,
    'clifford.s_tau_commute': 1e-15,
    'clifford.casimir_spectrum': 1e-10,
    'clifford.spin_families_commute': 1e-13,
    'clifford.structure_constants': 1e-12,
    'clifford.particle_casimir': 1e-12,
    # poincare
    'poincare.closure': 1e-9,
    'poincare.closure_second_order': 1e-10,
    'poincare.foldy_unitarity': 1e-12,
    'poincare.foldy_identity': 1e-14,
    'poincare.foldy_diagonalises': 1e-10,
    'poincare.foldy_relative_stage': 1e-10,
    'poincare.equivalence': 1e-9,
    'poincare.structure_fit': 1e-9,
    'poincare.unequal_square': 1e-12,
    'poincare.t_independence': 1e-12,
    'poincare.jacobi': 1e-9,
    'poincare.hermiticity': 1e-12,
    'poincare.printed_unitarity': 1e-12,
    # positions
    'positions.canonical_pair': 1e-9,
    'positions.dual_construction': 1e-8,
    'positions.projector': 1e-13,
    'positions.covariant_condition': 1e-12,
    # velocity
    'velocity.group_velocity': 1e-8,
    'velocity.hermiticity': 1e-10,
    'velocity.eigen_residue': 1e-10,
    'velocity.gradient_cross_check': 1e-7,
    # strict upper bound on the eigenvalues of V^2
    'velocity.subluminal': 1.0,
    # kinematics
    'kinematics.round_trip': 1e-14,
    'kinematics.dispersion': 1e-14,
    'kinematics.equal_mass': 1e-14,
    'kinematics.nonnegative': 0.0,
    'kinematics.monotonic': 0.0,
    'kinematics.symmetry': 1e-14,
    # interaction
    'interaction.square_V': 1e-12,
    'interaction.square_coulomb16': 1e-12,
    'interaction.spectrum_coulomb16': 1e-10,
    'interaction.gauge_shift': 1e-10,
    'interaction.free_reduction': 1e-13,
    'interaction.linearity': 1e-12,
    # evolve
    'evolve.norm_drift': 1e-10,
    'evolve.energy_drift': 1e-10,
    'evolve.positive_fraction': 1e-10,
    'evolve.group_velocity': 1e-3,
    'evolve.centroid_stationary': 1e-6,
    'evolve.unitarity': 1e-12,
    'evolve.fourier_round_trip': 1e-13,
    'evolve.subluminal': 1.0,
    'evolve.aliasing': 3.141592653589793,
}

# measured ratio window for the Strang convergence check
STRANG_RATIO_WINDOW = (3.5, 4.5)


def tolerance_for(check_id: str, override=None) -> float:
    if override is not None:
        return float(override)
    return TOLERANCES[check_id]
