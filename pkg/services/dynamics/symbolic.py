"""
Exact 0/1 sequence rules for points of one-sided binary shifts.

Each rule computes symbol(n) for any n ≥ 0 in polylog time and a vectorized
block(start, length). Rules that are eventually periodic report it through
eventual_period(), which orbit tails rely on.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

# Periods above this are treated as not eventually periodic.
MAX_EXACT_PERIOD = 4096


def multiplicative_order(base: int, modulus: int, limit: int = MAX_EXACT_PERIOD) -> Optional[int]:
    """Order of base mod modulus, or None if it exceeds limit (modulus must be coprime to base)."""
    if modulus == 1:
        return 1
    value = base % modulus
    for k in range(1, limit + 1):
        if value == 1:
            return k
        value = value * base % modulus
    return None


def split_two_power(q: int) -> Tuple[int, int]:
    """q = 2^k · m with m odd; returns (k, m)."""
    k = (q & -q).bit_length() - 1
    return k, q >> k


class SequenceRule(ABC):
    """A one-sided 0/1 sequence computable at any index."""

    @abstractmethod
    def symbol(self, n: int) -> int:
        ...

    def block(self, start: int, length: int) -> np.ndarray:
        return np.fromiter((self.symbol(start + i) for i in range(length)), dtype=np.uint8, count=length)

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        """(s, word) with symbol(n) = word[n % len(word)] for n ≥ s, when known."""
        return None

    def text(self, start: int, length: int) -> str:
        return ''.join('1' if b else '0' for b in self.block(start, length))


def _absolute_word(rule: SequenceRule, start: int, period: int) -> str:
    """Word w with rule.symbol(m) = w[m % period] for m ≥ start."""
    return ''.join(str(rule.symbol(start + ((r - start) % period))) for r in range(period))


@dataclass(frozen=True)
class Periodic(SequenceRule):
    word: str

    def __post_init__(self):
        if not self.word or set(self.word) - {'0', '1'}:
            raise ValueError(f"periodic word must be a non-empty 0/1 string, got {self.word!r}")

    def symbol(self, n: int) -> int:
        return int(self.word[n % len(self.word)])

    def block(self, start: int, length: int) -> np.ndarray:
        pattern = np.frombuffer(self.word.encode(), dtype=np.uint8) - ord('0')
        return pattern[(np.arange(length) + start) % pattern.size].astype(np.uint8)

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        return 0, self.word


@dataclass(frozen=True)
class Sturmian(SequenceRule):
    """
    Mechanical word x_n = ⌊(n+1)α+β⌋ − ⌊nα+β⌋ with α = A/D, β = B/D.

    D is a large power of two so that the coding is exact integer arithmetic.
    """

    A: int
    B: int
    D: int

    def symbol(self, n: int) -> int:
        return ((n + 1) * self.A + self.B) // self.D - (n * self.A + self.B) // self.D

    def block(self, start: int, length: int) -> np.ndarray:
        floors = [(n * self.A + self.B) // self.D for n in range(start, start + length + 1)]
        return np.fromiter((floors[i + 1] - floors[i] for i in range(length)),
                           dtype=np.uint8, count=length)


@dataclass(frozen=True)
class ThueMorse(SequenceRule):
    def symbol(self, n: int) -> int:
        return bin(n).count('1') & 1

    def block(self, start: int, length: int) -> np.ndarray:
        x = np.arange(start, start + length, dtype=np.uint64)
        for s in (32, 16, 8, 4, 2, 1):
            x ^= x >> np.uint64(s)
        return (x & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True)
class DyadicOfAngle(SequenceRule):
    """Binary digits of an angle θ ∈ [0, 1): symbol(n) = ⌊2^(n+1)·θ⌋ mod 2."""

    angle: Fraction

    def __post_init__(self):
        if not 0 <= self.angle < 1:
            raise ValueError(f"angle must lie in [0, 1), got {self.angle}")

    def symbol(self, n: int) -> int:
        p, q = self.angle.numerator, self.angle.denominator
        return (pow(2, n + 1, 2 * q) * p % (2 * q)) // q

    def block(self, start: int, length: int) -> np.ndarray:
        p, q = self.angle.numerator, self.angle.denominator
        r = pow(2, start, q) * p % q
        out = np.empty(length, dtype=np.uint8)
        for i in range(length):
            r *= 2
            if r >= q:
                out[i] = 1
                r -= q
            else:
                out[i] = 0
        return out

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        k, m = split_two_power(self.angle.denominator)
        period = multiplicative_order(2, m)
        if period is None:
            return None
        return k, _absolute_word(self, k, period)


@dataclass(frozen=True)
class Complemented(SequenceRule):
    inner: SequenceRule

    def symbol(self, n: int) -> int:
        return 1 - self.inner.symbol(n)

    def block(self, start: int, length: int) -> np.ndarray:
        return (1 - self.inner.block(start, length)).astype(np.uint8)

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        tail = self.inner.eventual_period()
        if tail is None:
            return None
        s, word = tail
        return s, word.translate(str.maketrans('01', '10'))


@dataclass(frozen=True)
class Spliced(SequenceRule):
    """prefix[n] for n < len(prefix), then tail.symbol(n)."""

    prefix: str
    tail: SequenceRule

    def symbol(self, n: int) -> int:
        if n < len(self.prefix):
            return int(self.prefix[n])
        return self.tail.symbol(n)

    def block(self, start: int, length: int) -> np.ndarray:
        out = self.tail.block(start, length)
        head = len(self.prefix) - start
        if head > 0:
            pre = np.frombuffer(self.prefix[start:start + min(head, length)].encode(), dtype=np.uint8) - ord('0')
            out[:pre.size] = pre
        return out

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        tail = self.tail.eventual_period()
        if tail is None:
            return None
        s, word = tail
        start = max(s, len(self.prefix))
        return start, _absolute_word(self, start, len(word))


@dataclass(frozen=True)
class SlidingBlock(SequenceRule):
    """
    Image of `inner` under a block code of radius r.

    symbol(n) = table[x_n x_{n+1} … x_{n+2r} read as a binary number, x_n most significant].
    """

    table: str
    radius: int
    inner: SequenceRule

    def __post_init__(self):
        width = 2 * self.radius + 1
        if self.radius < 0 or len(self.table) != 2 ** width or set(self.table) - {'0', '1'}:
            raise ValueError(
                f"a radius-{self.radius} code needs a 0/1 table of length {2 ** max(width, 0)}, "
                f"got {self.table!r}"
            )

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    def symbol(self, n: int) -> int:
        index = 0
        for j in range(self.width):
            index = (index << 1) | self.inner.symbol(n + j)
        return int(self.table[index])

    def block(self, start: int, length: int) -> np.ndarray:
        bits = self.inner.block(start, length + self.width - 1).astype(np.int64)
        index = np.zeros(length, dtype=np.int64)
        for j in range(self.width):
            index = (index << 1) | bits[j:j + length]
        lookup = np.frombuffer(self.table.encode(), dtype=np.uint8) - ord('0')
        return lookup[index].astype(np.uint8)

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        tail = self.inner.eventual_period()
        if tail is None:
            return None
        s, word = tail
        return s, _absolute_word(self, s, len(word))


def sturmian_rule(alpha: Fraction, beta: Fraction = Fraction(0)) -> Sturmian:
    """Sturmian rule over the common denominator of α and β (a power of two for the zoo)."""
    d = math.lcm(alpha.denominator, beta.denominator)
    return Sturmian(alpha.numerator * (d // alpha.denominator), beta.numerator * (d // beta.denominator), d)


@dataclass(frozen=True)
class ShiftPoint:
    """A point of a one-sided binary shift: the sequence rule read from `offset` on."""

    rule: SequenceRule
    offset: int = 0

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError(f"shift offset must be non-negative, got {self.offset}")
        if isinstance(self.rule, Spliced) and self.offset >= len(self.rule.prefix):
            object.__setattr__(self, 'rule', self.rule.tail)

    def symbol(self, i: int) -> int:
        return self.rule.symbol(self.offset + i)

    def block(self, start: int, length: int) -> np.ndarray:
        return self.rule.block(self.offset + start, length)

    def advanced(self, n: int) -> 'ShiftPoint':
        return ShiftPoint(self.rule, self.offset + n)

    def eventual_period(self) -> Optional[Tuple[int, str]]:
        """(s, word) with symbol(i) = word[(offset + i) % len(word)] for i ≥ s."""
        tail = self.rule.eventual_period()
        if tail is None:
            return None
        s, word = tail
        return max(s - self.offset, 0), word


def first_mismatch(x: ShiftPoint, y: ShiftPoint, depth: int, chunk: int = 64) -> Optional[int]:
    """Smallest i < depth with x_i ≠ y_i, or None."""
    for start in range(0, depth, chunk):
        length = min(chunk, depth - start)
        diff = np.flatnonzero(x.block(start, length) != y.block(start, length))
        if diff.size:
            return start + int(diff[0])
    return None
