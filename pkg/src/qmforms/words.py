"""Freely reduced words in the free group F_m.

A letter is a nonzero signed integer: ``+i`` is the i-th generator and ``-i``
its inverse (generators are numbered from 1).  Every :class:`Word` is kept
freely reduced and carries its ambient rank, which is checked whenever two
words meet.

Text syntax::

    word   := item*
    item   := atom ('^' integer)?
    atom   := 'a'..'z' | 'A'..'Z' | 'x'<n> | 'X'<n> | '(' word ')'

Lowercase letters are generators 1-26, uppercase their inverses.
"""

from __future__ import annotations

import random
import re
from collections import namedtuple
from typing import Iterable, Iterator, Sequence

from .errors import (
    GeneratorRangeError,
    RankMismatchError,
    WordSyntaxError,
)

Generator = namedtuple("Generator", ["index", "sign"])


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


class Word:
    """An immutable freely reduced word of a given rank."""

    __slots__ = ("letters", "rank", "_hash")

    def __init__(self, letters: Sequence[int] = (), rank: int = 2, *, reduced: bool = False):
        if rank < 1:
            raise GeneratorRangeError(f"rank must be positive, got {rank}")
        letters = tuple(letters)
        for x in letters:
            if x == 0 or abs(x) > rank:
                raise GeneratorRangeError(f"letter {x} out of range for rank {rank}")
        self.letters = letters if reduced else _reduce(letters)
        self.rank = rank
        self._hash = None

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls((), rank, reduced=True)

    @classmethod
    def generator(cls, index: int, rank: int, sign: int = 1) -> "Word":
        return cls((sign * index,), rank)

    @classmethod
    def _trusted(cls, letters: tuple[int, ...], rank: int) -> "Word":
        w = cls.__new__(cls)
        w.letters = letters
        w.rank = rank
        w._hash = None
        return w

    def generators(self) -> Iterator[Generator]:
        for x in self.letters:
            yield Generator(abs(x), 1 if x > 0 else -1)

    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.rank == other.rank and self.letters == other.letters

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rank, self.letters))
        return self._hash

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return inverse(self)

    def __pow__(self, k: int) -> "Word":
        return power(self, k)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r}, rank={self.rank})"


def _check_ranks(u: Word, v: Word) -> None:
    if u.rank != v.rank:
        raise RankMismatchError(f"rank mismatch: {u.rank} vs {v.rank}")


def _concat(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    # Both inputs are reduced, so cancellation only happens at the junction.
    n, m = len(a), len(b)
    t = 0
    while t < n and t < m and a[n - 1 - t] == -b[t]:
        t += 1
    if t == 0:
        return a + b
    return a[: n - t] + b[t:]


def multiply(u: Word, v: Word) -> Word:
    _check_ranks(u, v)
    return Word._trusted(_concat(u.letters, v.letters), u.rank)


def inverse(w: Word) -> Word:
    return Word._trusted(tuple(-x for x in reversed(w.letters)), w.rank)


def cyclic_split(w: Word) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(c, r)`` with ``w = c r c^-1`` and ``r`` cyclically reduced."""
    s = w.letters
    n = len(s)
    t = 0
    while 2 * t + 1 < n and s[t] == -s[n - 1 - t]:
        t += 1
    return s[:t], s[t : n - t]


def power(w: Word, k: int) -> Word:
    if k == 0 or not w.letters:
        return Word.identity(w.rank)
    if k < 0:
        w, k = inverse(w), -k
    c, r = cyclic_split(w)
    cinv = tuple(-x for x in reversed(c))
    return Word._trusted(c + r * k + cinv, w.rank)


def commutator(g1: Word, g2: Word) -> Word:
    """``[g1, g2] = g1 g2 g1^-1 g2^-1``."""
    _check_ranks(g1, g2)
    out = _concat(g1.letters, g2.letters)
    out = _concat(out, inverse(g1).letters)
    out = _concat(out, inverse(g2).letters)
    return Word._trusted(out, g1.rank)


def conjugate(w: Word, f: Word) -> Word:
    """``f w f^-1``."""
    return multiply(multiply(f, w), inverse(f))


def abelianize(w: Word) -> tuple[int, ...]:
    counts = [0] * w.rank
    for x in w.letters:
        if x > 0:
            counts[x - 1] += 1
        else:
            counts[-x - 1] -= 1
    return tuple(counts)


def is_in_commutator_subgroup(w: Word) -> bool:
    return not any(abelianize(w))


def prefix_path(w: Word) -> list[tuple[int, ...]]:
    p = [0] * w.rank
    points = [tuple(p)]
    for x in w.letters:
        if x > 0:
            p[x - 1] += 1
        else:
            p[-x - 1] -= 1
        points.append(tuple(p))
    return points


def substitute(w: Word, images: Sequence[Word]) -> Word:
    """Apply the endomorphism sending generator i to ``images[i-1]``."""
    if not images:
        raise RankMismatchError("substitution needs one image per generator")
    rank = images[0].rank
    if len(images) != w.rank or any(im.rank != rank for im in images):
        raise RankMismatchError("substitution images do not match the word's rank")
    inv = [inverse(im) for im in images]
    out: tuple[int, ...] = ()
    for x in w.letters:
        piece = images[x - 1] if x > 0 else inv[-x - 1]
        out = _concat(out, piece.letters)
    return Word._trusted(out, rank)


# --- text form -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([xX])(\d+)|([a-zA-Z])|(\()|(\))|(\^)|(\S))")
_INT = re.compile(r"\s*([+-]?\d+)")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def parse_word(text: str, rank: int) -> Word:
    """Parse ``text`` into a reduced word of the given rank.

    >>> str(parse_word("(a b)^2 B", 2))
    'a b a'
    """
    pos = 0
    stack: list[list[int]] = [[]]
    # last[depth] holds the letters of the most recent atom so '^' can replace it
    last: list[tuple[int, list[int]] | None] = [None]
    open_at: list[int] = []
    n = len(text)
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(1) if m.group(1) else m.start(m.lastindex)
        pos = m.end()
        if m.group(1):
            index = int(m.group(2))
            if index < 1:
                raise WordSyntaxError("generator index must be >= 1", _byte_offset(text, start))
            atom = [index if m.group(1) == "x" else -index]
        elif m.group(3):
            ch = m.group(3)
            atom = [ord(ch) - 96] if ch.islower() else [-(ord(ch) - 64)]
        elif m.group(4):
            open_at.append(start)
            stack.append([])
            last.append(None)
            continue
        elif m.group(5):
            if len(stack) == 1:
                raise WordSyntaxError("unbalanced ')'", _byte_offset(text, start))
            open_at.pop()
            atom = stack.pop()
            last.pop()
        elif m.group(6):
            if last[-1] is None:
                raise WordSyntaxError("'^' without a preceding atom", _byte_offset(text, start))
            im = _INT.match(text, pos)
            if im is None:
                raise WordSyntaxError("expected integer exponent", _byte_offset(text, pos))
            pos = im.end()
            k = int(im.group(1))
            at, base = last[-1]
            del stack[-1][at:]
            if k < 0:
                base, k = [-x for x in reversed(base)], -k
            stack[-1].extend(base * k)
            last[-1] = None
            continue
        else:
            raise WordSyntaxError(f"unexpected character {m.group(7)!r}", _byte_offset(text, start))
        for x in atom:
            if abs(x) > rank:
                raise GeneratorRangeError(
                    f"generator {abs(x)} exceeds rank {rank} (near byte offset {_byte_offset(text, start)})"
                )
        last[-1] = (len(stack[-1]), atom)
        stack[-1].extend(atom)
    if pos < n and text[pos:].strip():
        raise WordSyntaxError("trailing input", _byte_offset(text, pos))
    if len(stack) != 1:
        raise WordSyntaxError("unbalanced '('", _byte_offset(text, open_at[-1]))
    return Word(stack[0], rank)


def format_letter(x: int, rank: int) -> str:
    i = abs(x)
    if rank <= 26:
        return chr(96 + i) if x > 0 else chr(64 + i)
    return f"x{i}" if x > 0 else f"X{i}"


def format_word(w: Word) -> str:
    return " ".join(format_letter(x, w.rank) for x in w.letters)


def parse_words(text: str, rank: int, sep: str = ";") -> list[Word]:
    return [parse_word(part, rank) for part in text.split(sep)]


# --- random sampling (tests, harness, defect search) ------------------------

def random_word(rank: int, max_len: int, rng: random.Random, min_len: int = 0) -> Word:
    n = rng.randint(min_len, max_len)
    letters: list[int] = []
    while len(letters) < n:
        x = rng.randint(1, rank) * rng.choice((1, -1))
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word._trusted(tuple(letters), rank)


def random_commutator_element(rank: int, max_len: int, rng: random.Random) -> Word:
    """A random element of [F, F]: a conjugated product of one to three commutators."""
    w = Word.identity(rank)
    for _ in range(rng.randint(1, 3)):
        w = w * commutator(random_word(rank, max_len, rng), random_word(rank, max_len, rng))
    return conjugate(w, random_word(rank, max_len, rng))
