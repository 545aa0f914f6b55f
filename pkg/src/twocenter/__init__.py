"""Numerical laboratory for the planar two-fixed-center problem with
harmonic-like interactions: flow, Poincare sections, Lyapunov exponents,
averaging-theory periodic orbits and Floquet multipliers."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateParameter,
    DomainError,
    EmptyRegion,
    InsufficientEvidence,
    InvalidBranch,
    NoConvergence,
    RejectionStall,
    ResonantParameter,
    SingularCenter,
    SingularShooting,
    StepSizeUnderflow,
    TwoCenterError,
)
from .model import (  # noqa: E402
    EquilibriumPoint,
    ModelParams,
    PhaseState,
    Trajectory,
    apply_symmetry,
    equilibria,
    hamiltonian,
    jacobian_vf,
    potential,
    vector_field,
)
from .integrator import (  # noqa: E402
    EventSpec,
    IntegratorConfig,
    flow_map,
    integrate,
    integrate_events,
    integrate_variational,
)
from .sections import SectionPoint, SectionRun, poincare_section, sample_ics  # noqa: E402
from .chaos import LyapunovSeries, mle  # noqa: E402
from .averaging import (  # noqa: E402
    AveragingQuery,
    AveragingResult,
    a_for_ratio,
    averaged_f,
    candidate_zero,
    det_jacobian,
    frequency_ratio,
    initial_conditions,
    reduced_rhs,
    solve_zeros_sqrt5,
    symmetry_family,
)
from .floquet import (  # noqa: E402
    MonodromyReport,
    OrbitCandidate,
    integrability_probe,
    monodromy,
    refine_orbit,
)
