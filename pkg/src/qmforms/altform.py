"""Exact antisymmetric rational matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError


def to_fraction(value) -> Fraction:
    """Parse ``"p/q"``, integer strings, ints or Fractions.  Floats are rejected."""
    if type(value) is Fraction:
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"not a rational (use 'p/q' strings): {value!r}")


def format_fraction(x: Fraction) -> str:
    return str(x)


def vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(v) for v in values)


class AltForm:
    """An alternating bilinear form on Q^m, stored as its Gram matrix."""

    __slots__ = ("rank", "entries")

    def __init__(self, entries: Sequence[Sequence], rank: int | None = None):
        rows = tuple(tuple(to_fraction(x) for x in row) for row in entries)
        m = len(rows) if rank is None else rank
        if len(rows) != m or any(len(r) != m for r in rows):
            raise ValidationError(f"form must be a {m}x{m} matrix")
        for i in range(m):
            if rows[i][i] != 0:
                raise ValidationError(f"diagonal entry ({i},{i}) is nonzero")
            for j in range(i + 1, m):
                if rows[i][j] != -rows[j][i]:
                    raise ValidationError(f"entries ({i},{j}) and ({j},{i}) are not antisymmetric")
        self.rank = m
        self.entries = rows

    @classmethod
    def zero(cls, m: int) -> "AltForm":
        return cls([[0] * m for _ in range(m)])

    @classmethod
    def from_upper(cls, m: int, upper: dict) -> "AltForm":
        """Build from ``{(i, j): value}`` with 0-based ``i < j``."""
        rows = [[Fraction(0)] * m for _ in range(m)]
        for (i, j), v in upper.items():
            v = to_fraction(v)
            rows[i][j] = v
            rows[j][i] = -v
        return cls(rows)

    @classmethod
    def block_diagonal(cls, blocks: Sequence["AltForm"]) -> "AltForm":
        m = sum(b.rank for b in blocks)
        rows = [[Fraction(0)] * m for _ in range(m)]
        off = 0
        for b in blocks:
            for i in range(b.rank):
                for j in range(b.rank):
                    rows[off + i][off + j] = b.entries[i][j]
            off += b.rank
        return cls(rows)

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AltForm):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __add__(self, other: "AltForm") -> "AltForm":
        self._check(other)
        return AltForm([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other: "AltForm") -> "AltForm":
        self._check(other)
        return AltForm([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self) -> "AltForm":
        return AltForm([[-a for a in r] for r in self.entries])

    def __mul__(self, c) -> "AltForm":
        c = to_fraction(c)
        return AltForm([[c * a for a in r] for r in self.entries])

    __rmul__ = __mul__

    def _check(self, other: "AltForm") -> None:
        if self.rank != other.rank:
            raise ValidationError(f"form sizes differ: {self.rank} vs {other.rank}")

    def __call__(self, v: Sequence, w: Sequence) -> Fraction:
        """Evaluate ``v^T B w``."""
        if len(v) != self.rank or len(w) != self.rank:
            raise ValidationError(f"vectors must have length {self.rank}")
        total = Fraction(0)
        for i, vi in enumerate(v):
            if vi:
                row = self.entries[i]
                total += vi * sum((row[j] * wj for j, wj in enumerate(w) if wj), Fraction(0))
        return total

    def pullback(self, columns: Sequence[Sequence[int]]) -> "AltForm":
        """``P^T B P`` where column i of P is ``columns[i]``."""
        return AltForm([[self(ci, cj) for cj in columns] for ci in columns])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def upper(self) -> Iterable[tuple[int, int, Fraction]]:
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                yield i, j, self.entries[i][j]

    def to_json(self) -> list[list[str]]:
        return [[format_fraction(x) for x in r] for r in self.entries]

    @classmethod
    def from_json(cls, rows) -> "AltForm":
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            raise ValidationError("form must be a list of rows")
        return cls(rows)

    def __repr__(self) -> str:
        return f"AltForm({self.to_json()})"


def standard_symplectic(l: int) -> AltForm:
    """Block diagonal with ``l`` copies of [[0, 1], [-1, 0]]."""
    return AltForm.from_upper(2 * l, {(2 * i, 2 * i + 1): 1 for i in range(l)})
