"""Young-diagram combinatorics for bounded-row partitions.

Partitions are plain tuples of weakly decreasing positive integers with no
trailing zeros; the empty tuple is the unique partition of 0. A row bound
``d`` is always passed as a separate argument, never stored, so the same
tuple can be reused under any bound.

Everything here is a pure function of its arguments. Results are memoised
with ``lru_cache``, so a scan over many (d, N) pairs hits read-only tables
after the first pass; concurrent readers are safe.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Partition = tuple[int, ...]


def is_valid_partition(parts: Sequence[int]) -> bool:
    """True if ``parts`` is weakly decreasing with strictly positive entries."""
    return all(p > 0 for p in parts) and all(
        parts[i] >= parts[i + 1] for i in range(len(parts) - 1)
    )


def check_partition(parts: Iterable[int]) -> Partition:
    """Normalise to a tuple and reject anything that is not a partition."""
    mu = tuple(int(p) for p in parts)
    if not is_valid_partition(mu):
        raise ValueError(f"not a valid partition: {parts!r}")
    return mu


def conjugate(mu: Partition) -> Partition:
    """Transpose of the diagram: columns become rows."""
    if not mu:
        return ()
    out = [0] * mu[0]
    for row in mu:
        for j in range(row):
            out[j] += 1
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_partitions(n: int, max_rows: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` into at most ``max_rows`` parts.

    The order is descending lexicographic, which is the canonical order used
    by every summation in this package; iterating in a fixed order keeps
    floating-point results bit-reproducible. ``n = 0`` yields the single
    empty partition.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if max_rows < 1:
        raise ValueError("max_rows must be positive")
    return tuple(_descending_partitions(n, max_rows, n))


def _descending_partitions(n, rows_left, max_part):
    if n == 0:
        yield ()
        return
    if rows_left == 0 or max_part == 0:
        return
    # the leading part must cover at least n / rows_left, so every loop
    # iteration below is productive and the recursion is output linear
    smallest = -(-n // rows_left)
    for first in range(min(n, max_part), smallest - 1, -1):
        for rest in _descending_partitions(n - first, rows_left - 1, first):
            yield (first, *rest)


@dataclass(frozen=True)
class BoxRelation:
    """A covering pair alpha < mu in Young's lattice.

    ``row`` is the 0-based index of the row that differs: mu equals alpha
    with one extra box in that row.
    """

    alpha: Partition
    mu: Partition
    row: int


@lru_cache(maxsize=None)
def add_box_successors(alpha: Partition, d: int) -> tuple[BoxRelation, ...]:
    """All diagrams mu = alpha + one box with at most ``d`` rows.

    Candidates that would not be weakly decreasing are dropped, so only
    valid diagrams are emitted. Ordered by the grown row, which coincides
    with descending lexicographic order of mu.
    """
    alpha = check_partition(alpha)
    if d < 1:
        raise ValueError("row bound d must be positive")
    if len(alpha) > d:
        raise ValueError(f"partition {alpha} already exceeds {d} rows")
    out = []
    for i in range(min(len(alpha) + 1, d)):
        if i < len(alpha):
            if i > 0 and alpha[i] + 1 > alpha[i - 1]:
                continue
            mu = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]
        else:
            mu = alpha + (1,)
        out.append(BoxRelation(alpha=alpha, mu=mu, row=i))
    return tuple(out)


@lru_cache(maxsize=None)
def remove_box_predecessors(mu: Partition) -> tuple[BoxRelation, ...]:
    """All diagrams alpha = mu minus one box, i.e. rows i with mu_i > mu_{i+1}."""
    mu = check_partition(mu)
    if not mu:
        raise ValueError("the empty partition has no box to remove")
    out = []
    for i in range(len(mu)):
        below = mu[i + 1] if i + 1 < len(mu) else 0
        if mu[i] > below:
            shrunk = mu[i] - 1
            alpha = mu[:i] + ((shrunk,) if shrunk else ()) + mu[i + 1 :]
            out.append(BoxRelation(alpha=alpha, mu=mu, row=i))
    return tuple(out)


def _hook_product(mu: Partition) -> int:
    conj = conjugate(mu)
    prod = 1
    for i, row in enumerate(mu):
        for j in range(row):
            prod *= row - j + conj[j] - i - 1
    return prod


@lru_cache(maxsize=None)
def specht_dim(mu: Partition) -> int:
    """Exact dimension of the symmetric-group irrep labelled by ``mu``.

    Hook length formula: n! divided by the product of all hook lengths.
    """
    mu = check_partition(mu)
    return math.factorial(sum(mu)) // _hook_product(mu)


@lru_cache(maxsize=None)
def weyl_dim(mu: Partition, d: int) -> int:
    """Exact dimension of the U(d) irrep labelled by ``mu``.

    Hook-content formula: product over cells of (d + column - row) divided
    by the hook length. Rejects diagrams with more than ``d`` rows.
    """
    mu = check_partition(mu)
    if d < 1:
        raise ValueError("d must be positive")
    if len(mu) > d:
        raise ValueError(f"partition {mu} has more than d={d} rows")
    num = 1
    for i, row in enumerate(mu):
        for j in range(row):
            num *= d + j - i
    q, r = divmod(num, _hook_product(mu))
    assert r == 0, "hook-content product must be an integer"
    return q


@lru_cache(maxsize=None)
def log_specht_dim(mu: Partition) -> float:
    """ln of the Specht dimension, without big-integer arithmetic.

    Uses the factorial-quotient form with shifted row lengths
    l_i = mu_i + k - i, which costs O(k^2) instead of O(n) per diagram and
    keeps full scans to N ~ 10^3 cheap.
    """
    mu = check_partition(mu)
    n, k = sum(mu), len(mu)
    if n == 0:
        return 0.0
    ell = [mu[i] + k - 1 - i for i in range(k)]
    val = math.lgamma(n + 1)
    for i in range(k):
        for j in range(i + 1, k):
            val += math.log(ell[i] - ell[j])
        val -= math.lgamma(ell[i] + 1)
    return val


@lru_cache(maxsize=None)
def log_weyl_dim(mu: Partition, d: int) -> float:
    """ln of the Weyl dimension via the pairwise product over d padded rows."""
    mu = check_partition(mu)
    if d < 1:
        raise ValueError("d must be positive")
    if len(mu) > d:
        raise ValueError(f"partition {mu} has more than d={d} rows")
    rows = mu + (0,) * (d - len(mu))
    val = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            val += math.log(rows[i] - rows[j] + j - i) - math.log(j - i)
    return val


@dataclass(frozen=True)
class DimensionRecord:
    """Exact Specht/Weyl dimensions of one diagram plus their logarithms."""

    partition: Partition
    specht_dim: int
    weyl_dim: int
    log_specht: float
    log_weyl: float


@lru_cache(maxsize=None)
def dimension_record(mu: Partition, d: int) -> DimensionRecord:
    """Full dimension data for ``mu`` under the row bound ``d``.

    The logarithms are taken of the exact integers (math.log accepts
    arbitrary-size ints), so exp(log) matches the exact value to a few ulp.
    """
    ds = specht_dim(mu)
    mw = weyl_dim(mu, d)
    return DimensionRecord(mu, ds, mw, math.log(ds), math.log(mw))


# ---------------------------------------------------------------------------
# Symmetric-group characters (Murnaghan-Nakayama recursion)
# ---------------------------------------------------------------------------


def sn_character(mu: Partition, cycle_type: Partition) -> int:
    """Irreducible S_n character of ``mu`` on the class with the given cycle type."""
    mu = check_partition(mu)
    lam = tuple(sorted(check_partition(cycle_type), reverse=True))
    if sum(mu) != sum(lam):
        raise ValueError(
            f"size mismatch: |mu| = {sum(mu)} but |cycle_type| = {sum(lam)}"
        )
    return _mn_character(mu, lam)


@lru_cache(maxsize=None)
def _mn_character(mu: Partition, lam: Partition) -> int:
    if not lam:
        return 1
    strip, rest = lam[0], lam[1:]
    k = len(mu)
    beta = [mu[i] + k - 1 - i for i in range(k)]
    occupied = set(beta)
    total = 0
    for b in beta:
        nb = b - strip
        if nb < 0 or nb in occupied:
            continue
        height = sum(1 for c in beta if nb < c < b)
        new_beta = sorted((c for c in beta if c != b), reverse=True)
        new_beta.append(nb)
        new_beta.sort(reverse=True)
        rows = [new_beta[i] - (k - 1 - i) for i in range(k)]
        nu = tuple(v for v in rows if v)
        total += (-1) ** height * _mn_character(nu, rest)
    return total


def permutation_cycle_type(perm: Sequence[int]) -> Partition:
    """Cycle type of a permutation in one-line form (perm[k] is the image of k)."""
    n = len(perm)
    seen = [False] * n
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def conjugacy_class_size(cycle_type: Partition) -> int:
    """Number of permutations in S_n with the given cycle type."""
    lam = check_partition(cycle_type)
    n = sum(lam)
    centraliser = 1
    for length, mult in Counter(lam).items():
        centraliser *= length**mult * math.factorial(mult)
    return math.factorial(n) // centraliser
