"""Slow brute-force oracles.

Nothing here calls into ``qm`` or ``extract`` or the word algebra; the only
shared piece is the :class:`~qmforms.words.Word` container.  Reduction,
powers, areas and counts are recomputed from scratch on plain lists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotInCommutatorSubgroupError, QmFormsError, ResourceLimitError, ValidationError
from .words import Word


@dataclass(frozen=True)
class OracleConfig:
    max_word_length: int = 2_000_000
    max_enumeration: int = 1_000_000

    def __post_init__(self):
        if self.max_word_length < 1 or self.max_enumeration < 1:
            raise ValidationError("oracle caps must be positive")


DEFAULT_CONFIG = OracleConfig()


class OracleDisagreement(QmFormsError):
    """Two independent conventions disagreed; this is a bug, not bad input."""


def _reduce(letters):
    out = []
    for x in letters:
        if out and out[-1] + x == 0:
            out.pop()
        else:
            out.append(x)
    return out


def _inv(letters):
    return [-x for x in letters[::-1]]


def _mul(*parts):
    return _reduce([x for p in parts for x in p])


def _naive_power(letters, k, config):
    if k < 0:
        letters, k = _inv(letters), -k
    out = []
    for _ in range(k):
        out = _mul(out, letters)
        if len(out) > config.max_word_length:
            raise ResourceLimitError(f"power exceeds {config.max_word_length} letters")
    return out


def _path(letters, rank):
    p = [0] * rank
    pts = [tuple(p)]
    for x in letters:
        p[abs(x) - 1] += 1 if x > 0 else -1
        pts.append(tuple(p))
    return pts


def _shoelace(letters, rank, i, j):
    pts = _path(letters, rank)
    if any(pts[-1]):
        raise NotInCommutatorSubgroupError("word is not a closed lattice loop")
    left = 0
    trap = Fraction(0)
    for p, q in zip(pts, pts[1:]):
        d = q[j] - p[j]
        left += p[i] * d
        trap += Fraction(p[i] + q[i], 2) * d
    if trap != left:
        raise OracleDisagreement(f"shoelace conventions disagree: {left} vs {trap}")
    return left


def shoelace_area(w: Word, i: int, j: int) -> int:
    """Signed area A_ij of the prefix loop of ``w`` (1-based ``i < j``), by two conventions."""
    if not 1 <= i < j <= w.rank:
        raise ValidationError(f"need 1 <= i < j <= {w.rank}")
    return _shoelace(list(w.letters), w.rank, i - 1, j - 1)


def _count(pattern, g):
    L = len(pattern)
    n = 0
    for t in range(len(g) - L + 1):
        ok = True
        for s in range(L):
            if g[t + s] != pattern[s]:
                ok = False
                break
        if ok:
            n += 1
    return n


def naive_count(pattern: Word, g: Word) -> int:
    p = list(pattern.letters)
    if not p:
        raise ValidationError("pattern must be nonempty")
    h = list(g.letters)
    return _count(p, h) - _count(_inv(p), h)


def _naive_mu(spec, letters, config):
    rank = spec.rank
    total = Fraction(0)
    for i in range(rank):
        for j in range(i + 1, rank):
            b = spec.core.entries[i][j]
            if b:
                total += b * _shoelace(letters, rank, i, j)
    K = spec.homog_depth
    if any(t.weight for t in spec.brooks):
        big = _naive_power(letters, K, config)
        for t in spec.brooks:
            p = list(t.pattern.letters)
            total += t.weight * Fraction(_count(p, big) - _count(_inv(p), big), K)
    return total


def bruteforce_pair(spec, g1: Word, g2: Word, k: int, config: OracleConfig = DEFAULT_CONFIG) -> Fraction:
    """``mu([g1^k, g2]) / k`` recomputed with naive reduction, powers, areas and counts."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    a = _naive_power(list(g1.letters), k, config)
    b = list(g2.letters)
    w = _mul(a, b, _inv(a), _inv(b))
    return _naive_mu(spec, w, config) / k


def naive_mu(spec, w: Word, config: OracleConfig = DEFAULT_CONFIG) -> Fraction:
    return _naive_mu(spec, _reduce(list(w.letters)), config)


def _ball(rank, max_len):
    letters = [s * i for i in range(1, rank + 1) for s in (1, -1)]
    out = []
    for n in range(0, max_len + 1, 2):
        for cand in itertools.product(letters, repeat=n):
            if any(cand[t] == -cand[t + 1] for t in range(n - 1)):
                continue
            if any(_path(cand, rank)[-1]):
                continue
            out.append(list(cand))
    return out


def exhaustive_defect(spec, max_len: int, config: OracleConfig = DEFAULT_CONFIG) -> Fraction:
    """Exact max of ``|mu(xy) - mu(x) - mu(y)|`` over reduced x, y in [F,F] with length <= max_len."""
    ball = _ball(spec.rank, max_len)
    if len(ball) ** 2 > config.max_enumeration:
        raise ResourceLimitError(f"{len(ball) ** 2} pairs exceed cap {config.max_enumeration}")
    values = [_naive_mu(spec, x, config) for x in ball]
    best = Fraction(0)
    for x, mx in zip(ball, values):
        for y, my in zip(ball, values):
            d = abs(_naive_mu(spec, _mul(x, y), config) - mx - my)
            if d > best:
                best = d
    return best
