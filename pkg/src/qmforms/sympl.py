"""Closed-form symplectic targets and the decision procedures built on them.

H^1 bases are ordered factor by factor; a genus-l surface contributes
``(alpha_1*, beta_1*, ..., alpha_l*, beta_l*)`` with intersection form
``J + ... + J``, ``J = [[0, 1], [-1, 0]]``.  Volumes follow
``Vol(X, w) = integral of w^(dim/2)``, so a product of n surfaces has volume
``n! * prod(areas)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .altform import AltForm, format_fraction, standard_symplectic, to_fraction
from .errors import ValidationError
from .extract import check_extendable

PRODUCT = "product_of_surfaces"
SURFACE_TIMES = "surface_times_manifold"
BLOWUP = "torus_blowup"
KINDS = (PRODUCT, SURFACE_TIMES, BLOWUP)


class HypothesisWarning(UserWarning):
    """A genus-1 factor where one version of the product formula's hypothesis asks for genus >= 2."""


@dataclass(frozen=True)
class SurfaceSpec:
    genus: int
    area: Fraction

    def __post_init__(self):
        if not isinstance(self.genus, int) or isinstance(self.genus, bool) or self.genus < 0:
            raise ValidationError(f"genus must be a nonnegative integer, got {self.genus!r}")
        area = to_fraction(self.area)
        if area <= 0:
            raise ValidationError("area must be positive")
        object.__setattr__(self, "area", area)


@dataclass(frozen=True)
class BlowupSpec:
    radii: tuple[Fraction, ...]
    rho: Fraction
    r: Fraction
    curvature_A: Fraction | None = None

    def __post_init__(self):
        radii = tuple(to_fraction(x) for x in self.radii)
        rho, r = to_fraction(self.rho), to_fraction(self.r)
        if len(radii) < 2:
            raise ValidationError("torus blow-up needs n >= 2 radii")
        chain = (Fraction(0), rho, r) + radii
        if any(b <= a for a, b in zip(chain, chain[1:])):
            raise ValidationError("blow-up parameters must satisfy 0 < rho < r < r_1 < ... < r_n")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "r", r)
        if self.curvature_A is not None:
            object.__setattr__(self, "curvature_A", to_fraction(self.curvature_A))


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    surfaces: tuple[SurfaceSpec, ...] = ()
    extra_volume: Fraction | None = None
    extra_curvature: Fraction = Fraction(0)
    extra_dimension: int | None = None
    extra_betti1: int = 0
    blowup: BlowupSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown manifold kind {self.kind!r}")
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        object.__setattr__(self, "extra_curvature", to_fraction(self.extra_curvature))
        if self.kind == PRODUCT:
            if not self.surfaces:
                raise ValidationError("product_of_surfaces needs at least one surface")
            if any(s.genus < 1 for s in self.surfaces):
                raise ValidationError("product_of_surfaces requires every genus >= 1")
        elif self.kind == SURFACE_TIMES:
            if len(self.surfaces) != 1:
                raise ValidationError("surface_times_manifold needs exactly one surface")
            if self.surfaces[0].genus < 1:
                raise ValidationError("surface_times_manifold requires genus >= 1")
            if self.extra_volume is None or to_fraction(self.extra_volume) <= 0:
                raise ValidationError("surface_times_manifold needs a positive extra_volume")
            object.__setattr__(self, "extra_volume", to_fraction(self.extra_volume))
            d = self.extra_dimension
            if not isinstance(d, int) or isinstance(d, bool) or d < 0 or d % 2:
                raise ValidationError("extra_dimension must be an even integer >= 0")
            if not isinstance(self.extra_betti1, int) or self.extra_betti1 < 0:
                raise ValidationError("extra_betti1 must be an integer >= 0")
        else:
            if self.blowup is None:
                raise ValidationError("torus_blowup needs blowup parameters")

    @property
    def half_dimension(self) -> int:
        if self.kind == PRODUCT:
            return len(self.surfaces)
        if self.kind == SURFACE_TIMES:
            return 1 + self.extra_dimension // 2
        return len(self.blowup.radii)

    @property
    def betti1(self) -> int:
        if self.kind == PRODUCT:
            return sum(2 * s.genus for s in self.surfaces)
        if self.kind == SURFACE_TIMES:
            return 2 * self.surfaces[0].genus + self.extra_betti1
        return 2 * len(self.blowup.radii)

    @classmethod
    def from_json(cls, doc) -> "ManifoldSpec":
        if not isinstance(doc, dict):
            raise ValidationError("ManifoldSpec document must be a JSON object")
        allowed = {"kind", "surfaces", "extra_volume", "extra_curvature", "extra_dimension", "extra_betti1", "blowup"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValidationError(f"unknown ManifoldSpec fields: {sorted(unknown)}")
        surfaces = []
        for s in doc.get("surfaces", []):
            if not isinstance(s, dict) or "genus" not in s or "area" not in s:
                raise ValidationError("each surface needs 'genus' and 'area'")
            surfaces.append(SurfaceSpec(s["genus"], to_fraction(s["area"])))
        blowup = None
        if doc.get("blowup") is not None:
            b = doc["blowup"]
            if not isinstance(b, dict) or not {"radii", "rho", "r"} <= set(b):
                raise ValidationError("blowup needs 'radii', 'rho' and 'r'")
            blowup = BlowupSpec(
                tuple(to_fraction(x) for x in b["radii"]),
                to_fraction(b["rho"]),
                to_fraction(b["r"]),
                None if b.get("curvature_A") is None else to_fraction(b["curvature_A"]),
            )
        return cls(
            kind=doc.get("kind"),
            surfaces=tuple(surfaces),
            extra_volume=None if doc.get("extra_volume") is None else to_fraction(doc["extra_volume"]),
            extra_curvature=to_fraction(doc.get("extra_curvature", "0")),
            extra_dimension=doc.get("extra_dimension"),
            extra_betti1=doc.get("extra_betti1", 0),
            blowup=blowup,
        )

    @classmethod
    def loads(cls, text: str) -> "ManifoldSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}") from exc
        return cls.from_json(doc)


@dataclass(frozen=True)
class Ic1Model:
    """Image of I_c1 on pi_1(Ham): zero, a cyclic group, or not known."""

    kind: str = "zero"
    generator: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "cyclic", "dense_unknown"):
            raise ValidationError(f"unknown I_c1 model {self.kind!r}")
        if self.kind == "cyclic":
            if self.generator is None or to_fraction(self.generator) == 0:
                raise ValidationError("cyclic I_c1 model needs a nonzero generator")
            object.__setattr__(self, "generator", to_fraction(self.generator))

    def contains(self, x: Fraction) -> bool | None:
        """Membership of ``x`` in the image; None when undecidable."""
        if x == 0:
            return True
        if self.kind == "zero":
            return False
        if self.kind == "cyclic":
            return (x / self.generator).denominator == 1
        return None

    @classmethod
    def parse(cls, text: str) -> "Ic1Model":
        """``zero``, ``dense`` / ``dense_unknown`` or ``cyclic:p/q``."""
        text = text.strip()
        if text == "zero":
            return cls("zero")
        if text in ("dense", "dense_unknown"):
            return cls("dense_unknown")
        if text.startswith("cyclic:"):
            return cls("cyclic", to_fraction(text.split(":", 1)[1]))
        raise ValidationError(f"cannot parse I_c1 model {text!r}")


# --- forms -----------------------------------------------------------------

def surface_intersection_form(l: int) -> AltForm:
    if l < 0:
        raise ValidationError("genus must be >= 0")
    return standard_symplectic(l)


def symplectic_pairing_product(surfaces: Sequence[SurfaceSpec]) -> AltForm:
    """Gram matrix of ``(a, b) -> integral a ^ b ^ w^(n-1)`` on a product of surfaces."""
    n = len(surfaces)
    if n < 1:
        raise ValidationError("need at least one surface")
    blocks = []
    for i, s in enumerate(surfaces):
        others = math.prod((t.area for j, t in enumerate(surfaces) if j != i), start=Fraction(1))
        blocks.append(math.factorial(n - 1) * others * surface_intersection_form(s.genus))
    return AltForm.block_diagonal(blocks)


def scalar_curvature_surface(s: SurfaceSpec) -> Fraction:
    """Average Hermitian scalar curvature ``(2 - 2l) / area``."""
    return Fraction(2 - 2 * s.genus) / s.area


def scalar_curvature_product(spec: ManifoldSpec) -> Fraction:
    if spec.kind == BLOWUP:
        raise ValidationError("blow-up curvature is an input (curvature_A), not derived")
    total = sum((scalar_curvature_surface(s) for s in spec.surfaces), Fraction(0))
    if spec.kind == SURFACE_TIMES:
        total += spec.extra_curvature
    return total


def volume(spec: ManifoldSpec) -> Fraction:
    if spec.kind == PRODUCT:
        n = len(spec.surfaces)
        return math.factorial(n) * math.prod((s.area for s in spec.surfaces), start=Fraction(1))
    if spec.kind == SURFACE_TIMES:
        return spec.half_dimension * spec.extra_volume * spec.surfaces[0].area
    radii = spec.blowup.radii
    return math.factorial(len(radii)) * math.prod(((2 * r) ** 2 for r in radii), start=Fraction(1))


def _genus_one_warning(spec: ManifoldSpec) -> None:
    if spec.kind == SURFACE_TIMES and spec.surfaces[0].genus == 1:
        warnings.warn(
            "genus-1 surface factor: the product statement is also given with genus >= 2; "
            "the predicted block is zero either way",
            HypothesisWarning,
            stacklevel=3,
        )


def predicted_form(spec: ManifoldSpec) -> AltForm:
    """Closed-form b_{mu_Sh} on the part of H^1 where it is determined.

    For ``surface_times_manifold`` this is only the H^1(S) block; see
    :func:`predicted_report` for the full matrix with undetermined entries.
    """
    vol = volume(spec)
    if spec.kind == BLOWUP:
        A = spec.blowup.curvature_A
        if A is None:
            raise ValidationError("torus_blowup prediction needs curvature_A")
        blocks = [vol * A / (2 * r) ** 2 * surface_intersection_form(1) for r in spec.blowup.radii]
        return AltForm.block_diagonal(blocks)
    _genus_one_warning(spec)
    blocks = [
        vol * Fraction(2 - 2 * s.genus) / s.area**2 * surface_intersection_form(s.genus)
        for s in spec.surfaces
    ]
    return AltForm.block_diagonal(blocks)


def predicted_report(spec: ManifoldSpec) -> dict:
    form = predicted_form(spec)
    m = spec.betti1
    rows = [["UNKNOWN"] * m for _ in range(m)]
    for i in range(form.rank):
        for j in range(form.rank):
            rows[i][j] = format_fraction(form.entries[i][j])
    determined = form.rank == m
    doc = {
        "kind": spec.kind,
        "betti1": m,
        "volume": format_fraction(volume(spec)),
        "form": rows,
        "determined_block": list(range(form.rank)),
        "fully_determined": determined,
    }
    if spec.kind != BLOWUP:
        doc["scalar_curvature"] = format_fraction(scalar_curvature_product(spec))
    else:
        doc["scalar_curvature"] = format_fraction(spec.blowup.curvature_A)
    return doc


# --- decisions ---------------------------------------------------------------

@dataclass
class CommutingVerdict:
    value: Fraction
    obstructed_universal_cover: bool
    base: str  # OBSTRUCTED_BASE, NOT_OBSTRUCTED or UNDECIDED

    def to_json(self) -> dict:
        return {
            "verdict": "commute",
            "value": format_fraction(self.value),
            "obstructed_universal_cover": self.obstructed_universal_cover,
            "base": self.base,
        }


def commuting_obstruction(form: AltForm, v: Sequence, w: Sequence, ic1: Ic1Model) -> CommutingVerdict:
    """Flux obstruction to commuting lifts (value nonzero) and to commuting maps downstairs
    (value outside the image of I_c1)."""
    v = [to_fraction(x) for x in v]
    w = [to_fraction(x) for x in w]
    if len(v) != form.rank or len(w) != form.rank:
        raise ValidationError(f"flux vectors must have length {form.rank}")
    x = form(v, w)
    member = ic1.contains(x)
    base = "UNDECIDED" if member is None else ("NOT_OBSTRUCTED" if member else "OBSTRUCTED_BASE")
    return CommutingVerdict(x, x != 0, base)


@dataclass
class ReznikovVerdict:
    trivial: bool
    failing_conditions: list[int] = field(default_factory=list)
    witness: tuple | None = None
    value: Fraction | None = None

    def to_json(self) -> dict:
        doc = {
            "verdict": "TRIVIAL" if self.trivial else "NONTRIVIAL",
            "failing_conditions": self.failing_conditions,
        }
        if self.witness is not None:
            doc["witness"] = [[format_fraction(x) for x in v] for v in self.witness]
            doc["value"] = format_fraction(self.value)
        return doc


def reznikov_trivial(ic1_is_zero: bool, form: AltForm, subspace_basis: Sequence[Sequence]) -> ReznikovVerdict:
    """Trivial iff I_c1 vanishes (condition 1) and the form vanishes on the span (condition 2)."""
    ext = check_extendable(form, subspace_basis)
    failing = []
    if not ic1_is_zero:
        failing.append(1)
    if not ext.extendable:
        failing.append(2)
    return ReznikovVerdict(not failing, failing, ext.witness, ext.value if ext.witness else None)
