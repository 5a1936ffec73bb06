"""Alternating bilinear forms from invariant quasimorphisms on free groups."""

__version__ = "0.1.0"

from .altform import AltForm
from .errors import (
    NotInCommutatorSubgroupError,
    QmFormsError,
    RankMismatchError,
    ResourceLimitError,
    ValidationError,
    WordSyntaxError,
)
from .extract import (
    KSchedule,
    check_extendable,
    estimate_pair,
    extract_matrix,
    form_space_dim,
    property_harness,
)
from .qm import BrooksTerm, QmSpec, eval_brooks, eval_core, eval_qm, estimate_defect, homogenize_estimate
from .sympl import (
    Ic1Model,
    ManifoldSpec,
    SurfaceSpec,
    commuting_obstruction,
    predicted_form,
    reznikov_trivial,
    surface_intersection_form,
    symplectic_pairing_product,
)
from .words import Word, abelianize, commutator, inverse, multiply, parse_word, power, prefix_path

__all__ = [
    "AltForm",
    "BrooksTerm",
    "Ic1Model",
    "KSchedule",
    "ManifoldSpec",
    "NotInCommutatorSubgroupError",
    "QmFormsError",
    "QmSpec",
    "RankMismatchError",
    "ResourceLimitError",
    "SurfaceSpec",
    "ValidationError",
    "Word",
    "WordSyntaxError",
    "abelianize",
    "check_extendable",
    "commutator",
    "commuting_obstruction",
    "estimate_defect",
    "estimate_pair",
    "eval_brooks",
    "eval_core",
    "eval_qm",
    "extract_matrix",
    "form_space_dim",
    "homogenize_estimate",
    "inverse",
    "multiply",
    "parse_word",
    "power",
    "predicted_form",
    "prefix_path",
    "property_harness",
    "reznikov_trivial",
    "surface_intersection_form",
    "symplectic_pairing_product",
]
