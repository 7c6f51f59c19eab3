"""finslerkit: jet-based verification engine for Randers metrics,
S-curvature quantities and projective vector fields."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    EquivalenceViolation,
    FinslerKitError,
    InvalidSpec,
    IsotropyUnknown,
    NotPositiveDefinite,
    NotProjective,
    RankDeficientSampling,
    SchemaError,
)
from .fields import PolyVectorField
from .geometry import as_context, berwald, fundamental_tensor, get_frame, riemann, spray
from .jets import Jet, JetContext
from .jobs import JobSpec, RunReport, canonical_json, run_job, validate_job
from .library import (
    FunkSpec,
    SpaceFormSpec,
    euclidean,
    flat_projective_basis,
    funk,
    killing_basis,
    klein,
    minkowski_randers,
    perturbed_randers,
    polynomial_randers,
    random_quadratic_field,
)
from .projective import (
    classify,
    invariance_suite,
    invariant_tensors,
    projective_factor,
    special_conditions,
)
from .randers import bh_volume, s_curvature, s_curvature_randers

__all__ = [
    "__version__",
    "DomainError",
    "EquivalenceViolation",
    "FinslerKitError",
    "InvalidSpec",
    "IsotropyUnknown",
    "NotPositiveDefinite",
    "NotProjective",
    "RankDeficientSampling",
    "SchemaError",
    "PolyVectorField",
    "as_context",
    "berwald",
    "fundamental_tensor",
    "get_frame",
    "riemann",
    "spray",
    "Jet",
    "JetContext",
    "JobSpec",
    "RunReport",
    "canonical_json",
    "run_job",
    "validate_job",
    "FunkSpec",
    "SpaceFormSpec",
    "euclidean",
    "flat_projective_basis",
    "funk",
    "killing_basis",
    "klein",
    "minkowski_randers",
    "perturbed_randers",
    "polynomial_randers",
    "random_quadratic_field",
    "classify",
    "invariance_suite",
    "invariant_tensors",
    "projective_factor",
    "special_conditions",
    "bh_volume",
    "s_curvature",
    "s_curvature_randers",
]
