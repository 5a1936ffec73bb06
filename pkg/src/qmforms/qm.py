"""Invariant quasimorphisms on the commutator subgroup [F_m, F_m].

The model is ``mu = h_B + sum_i weight_i * Brooks(pattern_i)_h``: an exact
core homomorphism given by a signed lattice area, plus homogenized Brooks
counting quasimorphisms truncated at a finite homogenization depth K.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .altform import AltForm, format_fraction, to_fraction
from .errors import (
    NotInCommutatorSubgroupError,
    RankMismatchError,
    ResourceLimitError,
    ValidationError,
)
from .words import (
    Word,
    _concat,
    abelianize,
    cyclic_split,
    inverse,
    parse_word,
    power,
    random_commutator_element,
    substitute,
)

DEFAULT_HOMOG_DEPTH = 64
DEFAULT_DEFECT_RADIUS = 8
DEFECT_SAFETY_FACTOR = 2
MAX_DEFECT_PAIRS = 20_000_000

# below this length the pure-Python loops beat numpy's call overhead
_NUMPY_THRESHOLD = 256


def _require_in_n(w: Word) -> None:
    if any(abelianize(w)):
        raise NotInCommutatorSubgroupError(
            f"word {w} has abelianization {abelianize(w)}; quasimorphisms here live on [F,F]"
        )


# --- core homomorphism -------------------------------------------------------

def lattice_areas(w: Word, pairs: Sequence[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Signed areas ``A_ij = sum_t p_t[i] * (p_{t+1}[j] - p_t[j])`` (0-based i < j)."""
    out = {pair: 0 for pair in pairs}
    if not w.letters or not pairs:
        return out
    if len(w) < _NUMPY_THRESHOLD:
        by_j: dict[int, list[int]] = {}
        for i, j in pairs:
            by_j.setdefault(j, []).append(i)
        p = [0] * w.rank
        for x in w.letters:
            g, s = (x - 1, 1) if x > 0 else (-x - 1, -1)
            for i in by_j.get(g, ()):
                out[(i, g)] += s * p[i]
            p[g] += s
        return out
    arr = np.fromiter(w.letters, dtype=np.int64, count=len(w))
    gen = np.abs(arr) - 1
    sgn = np.sign(arr)
    steps = {}
    for g in {k for pair in pairs for k in pair}:
        steps[g] = np.where(gen == g, sgn, 0)
    for i, j in pairs:
        before = np.cumsum(steps[i]) - steps[i]
        out[(i, j)] = int(np.dot(before, steps[j]))
    return out


def eval_core(B: AltForm, w: Word) -> Fraction:
    """The core homomorphism ``h_B(w) = sum_{i<j} B[i][j] A_ij(w)`` on [F,F]."""
    if B.rank != w.rank:
        raise RankMismatchError(f"form rank {B.rank} vs word rank {w.rank}")
    _require_in_n(w)
    pairs = [(i, j) for i, j, v in B.upper() if v]
    areas = lattice_areas(w, pairs)
    return sum((B.entries[i][j] * a for (i, j), a in areas.items() if a), Fraction(0))


# --- Brooks counting -----------------------------------------------------------

def count_occurrences(seq: Sequence[int], pattern: Sequence[int]) -> int:
    """Number of (possibly overlapping) occurrences of ``pattern`` in ``seq``."""
    n, L = len(seq), len(pattern)
    if L == 0 or L > n:
        return 0
    if n < _NUMPY_THRESHOLD:
        first = pattern[0]
        pat = tuple(pattern)
        seq = tuple(seq)
        return sum(1 for t in range(n - L + 1) if seq[t] == first and seq[t : t + L] == pat)
    arr = np.asarray(seq, dtype=np.int64)
    hits = arr[: n - L + 1] == pattern[0]
    for t in range(1, L):
        hits &= arr[t : n - L + 1 + t] == pattern[t]
    return int(np.count_nonzero(hits))


def _check_pattern(pattern: Word) -> None:
    if not pattern.letters:
        raise ValidationError("Brooks pattern must be nonempty")


def eval_brooks(pattern: Word, g: Word) -> int:
    """Occurrences of ``pattern`` in ``g`` minus occurrences of its inverse."""
    _check_pattern(pattern)
    if pattern.rank != g.rank:
        raise RankMismatchError(f"pattern rank {pattern.rank} vs word rank {g.rank}")
    return count_occurrences(g.letters, pattern.letters) - count_occurrences(
        g.letters, inverse(pattern).letters
    )


def _cyclic_count(pattern: tuple[int, ...], r: tuple[int, ...]) -> int:
    L, n = len(pattern), len(r)
    ext = r * (-(-(n + L - 1) // n))
    return count_occurrences(ext[: n + L - 1], pattern)


def brooks_on_power(pattern: Word, w: Word, K: int) -> int:
    """``eval_brooks(pattern, power(w, K))`` for ``K >= 1`` without building the power.

    Writing ``w = c r c^-1`` with ``r`` cyclically reduced, the count in
    ``c r^K c^-1`` is affine in K once ``K |r| >= |pattern| - 1``; the slope
    is the number of cyclic occurrences in ``r``.
    """
    _check_pattern(pattern)
    if not w.letters:
        return 0
    _, r = cyclic_split(w)
    L = len(pattern)
    k0 = max(1, -(-(L - 1) // len(r)))
    if K <= k0:
        return eval_brooks(pattern, power(w, K))
    base = eval_brooks(pattern, power(w, k0))
    slope = _cyclic_count(pattern.letters, r) - _cyclic_count(inverse(pattern).letters, r)
    return base + (K - k0) * slope


# --- specs -----------------------------------------------------------------

@dataclass(frozen=True)
class BrooksTerm:
    pattern: Word
    weight: Fraction

    def __post_init__(self):
        _check_pattern(self.pattern)
        object.__setattr__(self, "weight", to_fraction(self.weight))


@dataclass(frozen=True)
class QmSpec:
    """``mu = h_core + sum weight * Brooks(pattern)`` homogenized at depth ``homog_depth``.

    ``defect_bound`` may be left as None, in which case ``bound`` falls back
    to twice the exhaustive defect search at radius 8.
    """

    rank: int
    core: AltForm
    brooks: tuple[BrooksTerm, ...] = ()
    homog_depth: int = DEFAULT_HOMOG_DEPTH
    defect_bound: Fraction | None = None

    def __post_init__(self):
        if self.core.rank != self.rank:
            raise ValidationError(f"core is {self.core.rank}x{self.core.rank}, rank is {self.rank}")
        object.__setattr__(self, "brooks", tuple(self.brooks))
        for t in self.brooks:
            if t.pattern.rank != self.rank:
                raise ValidationError(f"pattern {t.pattern} has rank {t.pattern.rank}")
        if not isinstance(self.homog_depth, int) or self.homog_depth < 1:
            raise ValidationError("homog_depth must be an integer >= 1")
        if self.defect_bound is not None:
            d = to_fraction(self.defect_bound)
            if d < 0:
                raise ValidationError("defect_bound must be >= 0")
            object.__setattr__(self, "defect_bound", d)

    @classmethod
    def pure_core(cls, core: AltForm) -> "QmSpec":
        return cls(core.rank, core, (), DEFAULT_HOMOG_DEPTH, Fraction(0))

    @classmethod
    def zero(cls, rank: int) -> "QmSpec":
        return cls.pure_core(AltForm.zero(rank))

    @property
    def is_homomorphism(self) -> bool:
        return all(t.weight == 0 for t in self.brooks)

    @cached_property
    def bound(self) -> Fraction:
        if self.defect_bound is not None:
            return self.defect_bound
        if self.is_homomorphism:
            return Fraction(0)
        return default_defect_bound(self)

    def envelope_constant(self) -> Fraction:
        """``defect_bound * (1 + 2/K)``: the numerator of the D/k error envelope."""
        return self.bound * (1 + Fraction(2, self.homog_depth))

    def evaluate(self, w: Word) -> Fraction:
        return eval_qm(self, w)

    def without_core(self) -> "QmSpec":
        return QmSpec(self.rank, AltForm.zero(self.rank), self.brooks, self.homog_depth, self.defect_bound)

    def to_json(self) -> dict:
        doc = {
            "rank": self.rank,
            "core": self.core.to_json(),
            "brooks": [
                {"pattern": str(t.pattern), "weight": format_fraction(t.weight)} for t in self.brooks
            ],
            "homog_depth": self.homog_depth,
        }
        if self.defect_bound is not None:
            doc["defect_bound"] = format_fraction(self.defect_bound)
        return doc

    @classmethod
    def from_json(cls, doc) -> "QmSpec":
        if not isinstance(doc, dict):
            raise ValidationError("QmSpec document must be a JSON object")
        unknown = set(doc) - {"rank", "core", "brooks", "homog_depth", "defect_bound"}
        if unknown:
            raise ValidationError(f"unknown QmSpec fields: {sorted(unknown)}")
        try:
            rank = doc["rank"]
        except KeyError:
            raise ValidationError("QmSpec needs 'rank'") from None
        if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
            raise ValidationError("rank must be a positive integer")
        core = AltForm.from_json(doc["core"]) if "core" in doc else AltForm.zero(rank)
        terms = []
        for item in doc.get("brooks", []):
            if not isinstance(item, dict) or "pattern" not in item:
                raise ValidationError("each Brooks term needs a 'pattern'")
            terms.append(BrooksTerm(parse_word(item["pattern"], rank), to_fraction(item.get("weight", "1"))))
        depth = doc.get("homog_depth", DEFAULT_HOMOG_DEPTH)
        if not isinstance(depth, int) or isinstance(depth, bool):
            raise ValidationError("homog_depth must be an integer")
        bound = doc.get("defect_bound")
        return cls(rank, core, tuple(terms), depth, None if bound is None else to_fraction(bound))

    @classmethod
    def loads(cls, text: str) -> "QmSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}") from exc
        return cls.from_json(doc)


def eval_qm(spec: QmSpec, w: Word) -> Fraction:
    if spec.rank != w.rank:
        raise RankMismatchError(f"spec rank {spec.rank} vs word rank {w.rank}")
    total = eval_core(spec.core, w)
    K = spec.homog_depth
    for t in spec.brooks:
        if t.weight:
            total += t.weight * Fraction(brooks_on_power(t.pattern, w, K), K)
    return total


def homogenize_estimate(spec: QmSpec, w: Word, K: int) -> Fraction:
    """Raw (depth-1) evaluation at ``w^K`` divided by K."""
    if K < 1:
        raise ValidationError("K must be >= 1")
    _require_in_n(w)
    raw = QmSpec(spec.rank, spec.core, spec.brooks, 1, spec.defect_bound)
    return eval_qm(raw, power(w, K)) / K


@lru_cache(maxsize=128)
def default_defect_bound(spec: QmSpec, radius: int = DEFAULT_DEFECT_RADIUS) -> Fraction:
    """Twice the exhaustive defect lower bound, shrinking the radius until the ball fits the cap."""
    for r in range(radius, 1, -1):
        try:
            est = estimate_defect(spec, r)
        except ResourceLimitError:
            continue
        if r < radius:
            warnings.warn(f"defect bound seeded at radius {r} instead of {radius} (pair cap)")
        return DEFECT_SAFETY_FACTOR * est.lower_bound
    raise ResourceLimitError("no exhaustive defect ball fits the pair cap; supply defect_bound")


class PulledBack:
    """``mu o theta`` for an endomorphism theta of F given by generator images."""

    def __init__(self, spec: QmSpec, images: Sequence[Word]):
        if len(images) != spec.rank:
            raise RankMismatchError("need one image per generator")
        self.spec = spec
        self.images = tuple(images)
        self.rank = spec.rank
        self.homog_depth = spec.homog_depth

    @property
    def bound(self) -> Fraction:
        return self.spec.bound

    def envelope_constant(self) -> Fraction:
        return self.spec.envelope_constant()

    @property
    def is_homomorphism(self) -> bool:
        return self.spec.is_homomorphism

    def evaluate(self, w: Word) -> Fraction:
        return eval_qm(self.spec, substitute(w, self.images))


# --- defect search -------------------------------------------------------------

@dataclass
class DefectEstimate:
    lower_bound: Fraction
    witness_pair: tuple[Word, Word] | None
    search_radius: int
    exhaustive: bool
    pairs_examined: int = 0


class _ScaledBrooks:
    """Integer-valued ``den * K * (Brooks part of mu)`` on raw letter tuples.

    The defect search evaluates hundreds of thousands of short words; this
    skips Word and Fraction construction but follows ``brooks_on_power``.
    """

    def __init__(self, spec: QmSpec):
        den = math.lcm(*(t.weight.denominator for t in spec.brooks))
        self.K = spec.homog_depth
        self.scale = den * self.K
        # window -> signed integer weight, grouped by window length
        self.tables: dict[int, dict[tuple[int, ...], int]] = {}
        for t in spec.brooks:
            if t.weight:
                w = int(t.weight * den)
                table = self.tables.setdefault(len(t.pattern), {})
                for key, sign in ((t.pattern.letters, 1), (inverse(t.pattern).letters, -1)):
                    table[key] = table.get(key, 0) + sign * w

    def __call__(self, s: tuple[int, ...]) -> int:
        if not s:
            return 0
        n = len(s)
        t = 0
        while 2 * t + 1 < n and s[t] == -s[n - 1 - t]:
            t += 1
        c, r = s[:t], s[t : n - t]
        cinv = tuple(-x for x in reversed(c))
        K, nr = self.K, len(r)
        total = 0
        for L, table in self.tables.items():
            k0 = min(K, max(1, -(-(L - 1) // nr)))
            word = c + r * k0 + cinv
            get = table.get
            total += sum(get(word[i : i + L], 0) for i in range(len(word) - L + 1))
            if K > k0:
                ext = r * (-(-(nr + L - 1) // nr))
                total += (K - k0) * sum(get(ext[i : i + L], 0) for i in range(nr))
        return total


def commutator_subgroup_ball(rank: int, max_len: int) -> list[Word]:
    """All reduced words of length <= max_len with zero abelianization."""
    out = [Word.identity(rank)]
    letters = [s * i for i in range(1, rank + 1) for s in (1, -1)]
    stack: list[tuple[tuple[int, ...], tuple[int, ...]]] = [((), (0,) * rank)]
    while stack:
        word, ab = stack.pop()
        if len(word) == max_len:
            continue
        for x in letters:
            if word and word[-1] == -x:
                continue
            g = abs(x) - 1
            nab = ab[:g] + (ab[g] + (1 if x > 0 else -1),) + ab[g + 1 :]
            # prune: the remaining letters must be able to return to the origin
            if sum(abs(c) for c in nab) > max_len - len(word) - 1:
                continue
            nw = word + (x,)
            if not any(nab):
                out.append(Word._trusted(nw, rank))
            stack.append((nw, nab))
    out.sort(key=lambda w: (len(w), w.letters))
    return out


def estimate_defect(
    spec: QmSpec,
    max_len: int,
    mode: str = "exhaustive",
    samples: int = 10_000,
    seed: int = 0,
    max_pairs: int = MAX_DEFECT_PAIRS,
) -> DefectEstimate:
    """Certified lower bound on the defect of ``spec`` over elements of [F,F].

    The core is a homomorphism and contributes nothing to
    ``mu(xy) - mu(x) - mu(y)``, so only the Brooks part is evaluated.
    """
    if max_len < 1:
        raise ValidationError("max_len must be >= 1")
    if spec.is_homomorphism:
        return DefectEstimate(Fraction(0), None, max_len, mode == "exhaustive")
    kernel = _ScaledBrooks(spec)
    best = -1
    witness = None
    cache: dict[tuple[int, ...], int] = {}

    def mu(s: tuple[int, ...]) -> int:
        v = cache.get(s)
        if v is None:
            v = cache[s] = kernel(s)
        return v

    count = 0
    if mode == "exhaustive":
        ball = commutator_subgroup_ball(spec.rank, max_len)
        if len(ball) ** 2 > max_pairs:
            raise ResourceLimitError(
                f"exhaustive defect ball has {len(ball) ** 2} pairs (cap {max_pairs})"
            )
        letters = [w.letters for w in ball]
        values = [mu(s) for s in letters]
        for a, ma in zip(letters, values):
            for b, mb in zip(letters, values):
                d = abs(mu(_concat(a, b)) - ma - mb)
                if d > best:
                    best, witness = d, (a, b)
            count += len(letters)
        exhaustive = True
    elif mode == "random":
        rng = random.Random(seed)
        side = max(1, max_len // 4)
        radius = 0
        for _ in range(samples):
            x = random_commutator_element(spec.rank, side, rng)
            y = random_commutator_element(spec.rank, side, rng)
            radius = max(radius, len(x), len(y))
            d = abs(mu(_concat(x.letters, y.letters)) - mu(x.letters) - mu(y.letters))
            count += 1
            if d > best:
                best, witness = d, (x.letters, y.letters)
        max_len = radius
        exhaustive = False
    else:
        raise ValidationError(f"unknown defect search mode {mode!r}")
    pair = tuple(Word._trusted(s, spec.rank) for s in witness)
    return DefectEstimate(Fraction(best, kernel.scale), pair, max_len, exhaustive, count)
