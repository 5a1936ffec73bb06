"""Recover the alternating form b_mu from a quasimorphism oracle.

``b_mu(p(g1), p(g2)) = lim_k mu([g1^k, g2]) / k``, and for every k the
estimate is within ``D(mu)/k`` of the limit.  Nothing here extrapolates: the
whole estimate sequence is reported together with its envelope.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .altform import AltForm, format_fraction, to_fraction
from .errors import RankMismatchError, ResourceLimitError, ValidationError
from .qm import QmSpec, eval_brooks, eval_core
from .words import (
    Word,
    abelianize,
    commutator,
    conjugate,
    inverse,
    power,
    random_commutator_element,
    random_word,
)

DEFAULT_MAX_LETTERS = 10_000_000
WORKERS_ENV = "QMFORMS_WORKERS"


@dataclass(frozen=True)
class KSchedule:
    values: tuple[int, ...] = tuple(2**i for i in range(11))

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise ValidationError("k-schedule must be nonempty")
        if any(not isinstance(k, int) or k < 1 for k in vals):
            raise ValidationError("k-schedule entries must be positive integers")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("k-schedule must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def up_to(cls, kmax: int) -> "KSchedule":
        """Powers of two up to ``kmax``, plus ``kmax`` itself."""
        if kmax < 1:
            raise ValidationError("kmax must be >= 1")
        vals = []
        k = 1
        while k < kmax:
            vals.append(k)
            k *= 2
        vals.append(kmax)
        return cls(tuple(vals))


@dataclass
class ConvergenceReport:
    gamma1: tuple[int, ...]
    gamma2: tuple[int, ...]
    estimates: list[tuple[int, Fraction]]
    envelope: list[Fraction]

    @property
    def final_estimate(self) -> Fraction:
        return self.estimates[-1][1]

    @property
    def certified_radius(self) -> Fraction:
        return self.envelope[-1]

    def to_json(self) -> dict:
        return {
            "gamma1": list(self.gamma1),
            "gamma2": list(self.gamma2),
            "k": [k for k, _ in self.estimates],
            "estimates": [format_fraction(v) for _, v in self.estimates],
            "envelope": [format_fraction(v) for v in self.envelope],
            "final_estimate": format_fraction(self.final_estimate),
            "certified_radius": format_fraction(self.certified_radius),
        }


@dataclass
class ExtendabilityVerdict:
    extendable: bool
    witness: tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None = None
    value: Fraction = Fraction(0)

    def to_json(self) -> dict:
        doc = {"verdict": "EXTENDABLE" if self.extendable else "NOT_EXTENDABLE", "extendable": self.extendable}
        if self.witness is not None:
            doc["witness"] = [[format_fraction(x) for x in v] for v in self.witness]
            doc["value"] = format_fraction(self.value)
        return doc


def estimate_pair(
    spec,
    g1: Word,
    g2: Word,
    schedule: KSchedule | None = None,
    max_letters: int = DEFAULT_MAX_LETTERS,
) -> ConvergenceReport:
    """Estimates ``mu([g1^k, g2]) / k`` over the schedule with the ``D/k`` envelope.

    ``spec`` is a :class:`QmSpec` or anything exposing ``rank``,
    ``evaluate(word)`` and ``envelope_constant()``.
    """
    schedule = schedule or KSchedule()
    if g1.rank != spec.rank or g2.rank != spec.rank:
        raise RankMismatchError(f"words must have rank {spec.rank}")
    kmax = schedule.values[-1]
    # [g1^k, g2] never exceeds this many letters
    if 2 * kmax * len(g1) + 2 * len(g2) > max_letters:
        raise ResourceLimitError(
            f"[g1^{kmax}, g2] may reach {2 * kmax * len(g1) + 2 * len(g2)} letters (cap {max_letters})"
        )
    c = spec.envelope_constant()
    estimates = []
    envelope = []
    for k in schedule.values:
        w = commutator(power(g1, k), g2)
        value = spec.evaluate(w)
        estimates.append((k, value / k if k > 1 else value))
        envelope.append(c / k)
    return ConvergenceReport(abelianize(g1), abelianize(g2), estimates, envelope)


def default_representatives(m: int) -> list[Word]:
    return [Word.generator(i, m) for i in range(1, m + 1)]


def _pair_job(args):
    spec, g1, g2, schedule, max_letters = args
    return estimate_pair(spec, g1, g2, schedule, max_letters)


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer") from None


def extract_matrix(
    spec,
    representatives: Sequence[Word] | None = None,
    schedule: KSchedule | None = None,
    max_letters: int = DEFAULT_MAX_LETTERS,
    workers: int | None = None,
) -> tuple[AltForm, dict[tuple[int, int], ConvergenceReport]]:
    """Assemble b_mu on the standard basis of Z^m.

    ``representatives[i]`` must abelianize to the i-th basis vector.  Only
    pairs ``i < j`` are estimated; the lower triangle is filled by
    antisymmetry.
    """
    m = spec.rank
    reps = list(representatives) if representatives is not None else default_representatives(m)
    if len(reps) != m:
        raise ValidationError(f"need {m} representatives, got {len(reps)}")
    for i, g in enumerate(reps):
        expected = tuple(1 if t == i else 0 for t in range(m))
        if g.rank != m or abelianize(g) != expected:
            raise ValidationError(f"representative {i + 1} ({g}) does not abelianize to e_{i + 1}")
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    jobs = [(spec, reps[i], reps[j], schedule, max_letters) for i, j in pairs]
    n = _worker_count(workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_pair_job, jobs))
    else:
        results = [_pair_job(job) for job in jobs]
    reports = dict(zip(pairs, results))
    form = AltForm.from_upper(m, {p: r.final_estimate for p, r in reports.items()})
    return form, reports


def check_extendable(form: AltForm, subspace_basis: Sequence[Sequence]) -> ExtendabilityVerdict:
    """Decide whether ``form`` vanishes on the rational span of ``subspace_basis``.

    By bilinearity it suffices to test every pair of basis vectors.
    """
    basis = [tuple(to_fraction(x) for x in v) for v in subspace_basis]
    for v in basis:
        if len(v) != form.rank:
            raise ValidationError(f"basis vector of length {len(v)} for a rank-{form.rank} form")
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            value = form(basis[a], basis[b])
            if value != 0:
                return ExtendabilityVerdict(False, (basis[a], basis[b]), value)
    return ExtendabilityVerdict(True)


def form_space_dim(m: int) -> int:
    if m < 1:
        raise ValidationError("m must be >= 1")
    return m * (m - 1) // 2


# --- property harness --------------------------------------------------------

@dataclass
class LawResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, ok: bool, detail) -> None:
        self.checked += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(detail() if callable(detail) else str(detail))
        elif not ok:
            self.failures.append("...")


@dataclass
class HarnessReport:
    laws: dict[str, LawResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.laws.values())

    def to_json(self) -> dict:
        return {
            name: {"passed": r.passed, "checked": r.checked, "failures": r.failures[:5]}
            for name, r in self.laws.items()
        }


def property_harness(spec: QmSpec, trials: int, seed: int = 0, max_len: int = 4) -> HarnessReport:
    """Run the invariant suite on random words; exact for defect-free specs."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = random.Random(seed)
    m = spec.rank
    B = spec.core
    D = spec.envelope_constant()
    schedule = KSchedule((1, 2, 4)) if spec.is_homomorphism else KSchedule((64,))
    kf = schedule.values[-1]
    env = D / kf
    names = [
        "core_homomorphism",
        "core_conjugation_invariance",
        "core_commutator_value",
        "core_homogeneity",
        "brooks_antisymmetry",
        "quasimorphism_law",
        "commutator_bound",
        "bilinearity",
        "alternation",
        "vanishing_on_N",
    ]
    laws = {n: LawResult(n) for n in names}

    def final(g1, g2):
        return estimate_pair(spec, g1, g2, schedule).final_estimate

    for _ in range(trials):
        u = random_commutator_element(m, max_len, rng)
        v = random_commutator_element(m, max_len, rng)
        f = random_word(m, max_len, rng)
        f1, f2 = random_word(m, max_len, rng), random_word(m, max_len, rng)
        k = rng.randint(-5, 5)

        hu, hv = eval_core(B, u), eval_core(B, v)
        huv = eval_core(B, u * v)
        laws["core_homomorphism"].record(huv == hu + hv, lambda: f"u={u} v={v}")
        laws["core_conjugation_invariance"].record(
            eval_core(B, conjugate(u, f)) == hu, lambda: f"w={u} f={f}"
        )
        laws["core_commutator_value"].record(
            eval_core(B, commutator(f1, f2)) == B(abelianize(f1), abelianize(f2)),
            lambda: f"f1={f1} f2={f2}",
        )
        laws["core_homogeneity"].record(eval_core(B, power(u, k)) == k * hu, lambda: f"w={u} k={k}")
        for t in spec.brooks:
            laws["brooks_antisymmetry"].record(
                eval_brooks(t.pattern, inverse(f1)) == -eval_brooks(t.pattern, f1),
                lambda: f"pattern={t.pattern} g={f1}",
            )
        mu_u, mu_v = spec.evaluate(u), spec.evaluate(v)
        laws["quasimorphism_law"].record(
            abs(spec.evaluate(u * v) - mu_u - mu_v) <= D, lambda: f"x={u} y={v}"
        )
        laws["commutator_bound"].record(
            abs(spec.evaluate(commutator(u, v))) <= D, lambda: f"x={u} y={v}"
        )

        g1, g1p, g2 = (random_word(m, max_len, rng, min_len=1) for _ in range(3))
        lhs = final(g1 * g1p, g2)
        rhs = final(g1, g2) + final(g1p, g2)
        laws["bilinearity"].record(abs(lhs - rhs) <= 3 * env, lambda: f"g1={g1} g1'={g1p} g2={g2}")
        a, b = final(g1, g2), final(g2, g1)
        laws["alternation"].record(abs(a + b) <= 2 * env, lambda: f"g1={g1} g2={g2}")
        laws["vanishing_on_N"].record(abs(final(u, g2)) <= env, lambda: f"g1={u} g2={g2}")
    return HarnessReport(laws)
