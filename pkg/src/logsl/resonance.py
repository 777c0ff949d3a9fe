"""Small divisors of the frequencies ``Omega_n = sqrt(n^2 + 2 lambda n)``.

A divisor is ``Omega_{m_1} + ... + Omega_{m_p} - Omega_{n_1} - ... - Omega_{n_q}``
for index multisets ``m`` and ``n``.  Combinations with ``m == n`` (as multisets)
vanish for every ``lambda`` and are excluded; everything else is expected to
stay away from zero like ``gamma / mu3^alpha``, where ``mu3`` is the third-largest
index of the combined tuple.

The scan enumerates sorted multisets only.  Sums are accumulated left to right
over the sorted indices, so :func:`divisor` and :func:`scan` produce bitwise
identical values for the same combination.
"""
from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, InvalidParam
from .linear import frequency

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10**7
DEFAULT_GUARD = 1e-13


@dataclass(frozen=True)
class DivisorRecord:
    m_indices: tuple[int, ...]
    n_indices: tuple[int, ...]
    value: float
    mu3: int
    cancels: bool


@dataclass
class ScanResult:
    lam: float
    r: int
    n_max: int
    records: list[DivisorRecord]  # smallest |divisor| for each mu3
    gamma_fit: float
    alpha_fit: float
    counts: dict[int, int] = field(default_factory=dict)
    n_cancelling: int = 0
    cancel_max_abs: float = 0.0
    n_exact_zero: int = 0
    n_below_guard: int = 0
    guard: float = DEFAULT_GUARD

    @property
    def minimum(self) -> float:
        return min(abs(rec.value) for rec in self.records)

    @property
    def anomalies(self) -> int:
        """Non-cancelling combinations at or below the guard (including exact zeros)."""
        return self.n_below_guard


def _check_indices(idx: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(int(i) for i in idx))
    if any(i < 1 for i in out):
        raise InvalidParam(f"frequency indices must be >= 1, got {out}")
    return out


def _omega_sum(idx: tuple[int, ...], omega: np.ndarray) -> float:
    total = 0.0
    for i in idx:
        total += omega[i]
    return total


def divisor(m: Iterable[int], n: Iterable[int], lam: float) -> float:
    """Signed divisor ``sum Omega_m - sum Omega_n`` (index order is irrelevant)."""
    m, n = _check_indices(m), _check_indices(n)
    top = max(m + n, default=1)
    omega = np.empty(top + 1)
    omega[0] = 0.0
    omega[1:] = frequency(np.arange(1, top + 1), lam)
    return _omega_sum(m, omega) - _omega_sum(n, omega)


def cancels_pairwise(m: Iterable[int], n: Iterable[int]) -> bool:
    """True iff ``m`` and ``n`` agree as multisets."""
    return sorted(m) == sorted(n)


def third_largest(indices: Iterable[int]) -> int:
    """Third-largest entry of a tuple of indices; 1 when it has fewer than three."""
    s = sorted(indices, reverse=True)
    return s[2] if len(s) >= 3 else 1


def mu3(m: Iterable[int], n: Iterable[int]) -> int:
    return third_largest(list(m) + list(n))


def combination_count(r: int, n_max: int) -> int:
    """Number of ordered (m, n) pairs of sorted multisets with ``1 <= p + q <= r``."""
    sizes = [math.comb(n_max + p - 1, p) for p in range(r + 1)]
    return sum(sizes[p] * sizes[q] for p in range(r + 1) for q in range(r + 1 - p) if p + q)


def multiset_table(lam: float, r: int, n_max: int):
    """All sorted multisets of ``1..n_max`` with sizes ``0..r``, grouped by size.

    Returns ``(rows, sums, top3, offsets)`` where ``rows[k]`` is the index tuple,
    ``sums[k]`` its frequency sum and ``top3[k]`` its three largest indices.
    """
    omega = np.empty(n_max + 1)
    omega[0] = 0.0
    omega[1:] = frequency(np.arange(1, n_max + 1), lam)
    rows: list[tuple[int, ...]] = []
    offsets = [0]
    for p in range(r + 1):
        rows.extend(itertools.combinations_with_replacement(range(1, n_max + 1), p))
        offsets.append(len(rows))
    sums = np.array([_omega_sum(row, omega) for row in rows])
    top3 = np.zeros((len(rows), 3), dtype=np.int64)
    for k, row in enumerate(rows):
        tail = row[::-1][:3]
        top3[k, : len(tail)] = tail
    return rows, sums, top3, np.array(offsets, dtype=np.int64)


def fit_lower_bound(mu3_values, minima) -> tuple[float, float]:
    """Least-squares fit of ``log(min) = log(gamma) - alpha log(mu3)`` over ``mu3 >= 2``."""
    x = np.asarray(mu3_values, dtype=np.float64)
    y = np.asarray(minima, dtype=np.float64)
    keep = (x >= 2) & (y > 0) & np.isfinite(y)
    if keep.sum() < 2:
        return math.nan, math.nan
    A = np.column_stack([np.ones(keep.sum()), np.log(x[keep])])
    (c0, c1), *_ = np.linalg.lstsq(A, np.log(y[keep]), rcond=None)
    return float(math.exp(c0)), float(-c1)


def scan(
    lam: float,
    r: int,
    n_max: int,
    *,
    cap: int = DEFAULT_CAP,
    guard: float = DEFAULT_GUARD,
) -> ScanResult:
    """Enumerate every non-cancelling divisor with ``p + q <= r`` and indices ``<= n_max``."""
    if not lam > -0.5:
        raise InvalidParam(f"lambda must exceed -1/2, got {lam}")
    if int(r) != r or r < 3:
        raise InvalidParam(f"r must be an integer >= 3 (r = 2 only admits pairwise cases), got {r}")
    if int(n_max) != n_max or n_max < 3:
        raise InvalidParam(f"n_max must be an integer >= 3, got {n_max}")
    r, n_max = int(r), int(n_max)
    total = combination_count(r, n_max)
    if total > cap:
        raise BudgetExceeded(
            f"scan would enumerate {total} combinations, above the cap {cap}; "
            "lower r or n_max, or raise the cap"
        )

    rows, sums, top3, offsets = multiset_table(lam, r, n_max)
    min_abs, arg_a, arg_b, count, n_cancel, cancel_max, n_zero, n_guard = _kernels.divisor_scan(
        sums, top3, offsets, r, n_max, guard
    )

    records = []
    counts = {}
    for k in range(1, n_max + 1):
        if count[k] == 0:
            continue
        counts[k] = int(count[k])
        a, b = int(arg_a[k]), int(arg_b[k])
        records.append(DivisorRecord(rows[a], rows[b], float(sums[a] - sums[b]), k, False))
    if n_guard:
        logger.warning("%d non-cancelling divisors at or below %g for lambda = %g", n_guard, guard, lam)
    gamma, alpha = fit_lower_bound([rec.mu3 for rec in records], [abs(rec.value) for rec in records])
    return ScanResult(
        lam=float(lam),
        r=r,
        n_max=n_max,
        records=records,
        gamma_fit=gamma,
        alpha_fit=alpha,
        counts=counts,
        n_cancelling=int(n_cancel),
        cancel_max_abs=float(cancel_max),
        n_exact_zero=int(n_zero),
        n_below_guard=int(n_guard),
        guard=guard,
    )


def write_scan_csv(result: ScanResult, path) -> None:
    """CSV with columns ``mu3,min_divisor,count``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu3", "min_divisor", "count"])
        for rec in result.records:
            w.writerow([rec.mu3, "%.17g" % abs(rec.value), result.counts[rec.mu3]])
