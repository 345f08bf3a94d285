"""Single-qubit resource protocols built on the J-measurement."""
from .entangle import BellKind, GhzResource, Prepared, make_bell, make_ghz
from .preparation import (
    PreparationResult,
    hull_facets,
    inscribed_radius,
    mixture_weights,
    prepare_pure,
    six_vertices,
    spin_flip,
    spin_flip_branch,
)
from .programmable import (
    PHI,
    PHI_PERP,
    ExactProgrammable,
    ProgrammableResult,
    TournamentState,
    hamming_one_superposition,
    program_schedule,
    programmable_measurement,
    programmable_measurement_exact,
)
from .purification import (
    PurificationSchedule,
    PurifyResult,
    SupplySpec,
    bound_length,
    exact_lengths,
    purification_schedule,
    purify,
    purify_step,
    step_bound,
)
