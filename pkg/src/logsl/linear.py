"""Per-mode 2x2 linear algebra around constant states.

Linearizing the zero-mean remainder ``w`` around a constant state couples the
coefficient ``w_j`` with ``conj(w_{-j})``.  For ``n = |j|^2`` the pair obeys
``i d/dt (xi, eta) = A_n (xi, eta)`` with::

    A_n = [[ n + z,  conj(z)     ],      z = lambda + mu/(2i)
           [ -z,     -n - conj(z)]]

Everything in this module is closed-form: block construction, the regime of the
block (sign of ``4n^2 + 8 lambda n - mu^2``), explicit diagonalizing matrices,
the Jordan form at the regime boundary, predicted damping rates, and the real
symplectic diagonalization of the undamped (``mu = 0``) blocks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam

JORDAN_TOL = 1e-9


def _check_params(n, lam, mu=0.0, exploratory=False):
    if int(n) != n or n < 1:
        raise InvalidParam(f"mode index n must be a positive integer, got {n!r}")
    if not (math.isfinite(lam) and math.isfinite(mu)):
        raise InvalidParam("lambda and mu must be finite")
    if mu < 0:
        raise InvalidParam(f"mu must be non-negative, got {mu}")
    if lam <= -0.5 and not exploratory:
        raise InvalidParam(f"lambda must exceed -1/2, got {lam}")


@dataclass(frozen=True, eq=False)
class ModeBlock:
    n: int
    lam: float
    mu: float
    entries: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))


class RegimeTag(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    OVERDAMPED = "Overdamped"
    JORDAN = "Jordan"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    discriminant: float


@dataclass(frozen=True, eq=False)
class BlockDiagonalization:
    """``P_inv @ A @ P == D``; ``D`` is diagonal or a 2x2 Jordan block."""

    regime: Regime
    P: np.ndarray
    P_inv: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class RatePrediction:
    """Predicted decay ``|psi_j(t)| <~ exp(-alpha t)(1 + beta t)`` for one mode and globally."""

    alpha_j: float
    beta_j: int
    global_alpha: float
    global_beta: int


@dataclass(frozen=True, eq=False)
class HamiltonianBlock:
    n: int
    lam: float
    S: np.ndarray
    S_inv: np.ndarray
    omega: float


def block_matrix(n: int, lam: float, mu: float, *, exploratory: bool = False) -> ModeBlock:
    _check_params(n, lam, mu, exploratory)
    z = complex(lam, -mu / 2.0)  # lambda + mu/(2i)
    entries = np.array(
        [[n + z, z.conjugate()], [-z, -n - z.conjugate()]],
        dtype=np.complex128,
    )
    return ModeBlock(int(n), float(lam), float(mu), entries)


def discriminant(n, lam, mu):
    """``4n^2 + 8 lambda n - mu^2``; positive means oscillatory."""
    return 4.0 * n * n + 8.0 * lam * n - mu * mu


def classify(n: int, lam: float, mu: float, tol: float = JORDAN_TOL) -> Regime:
    disc = discriminant(n, lam, mu)
    if disc > tol:
        tag = RegimeTag.OSCILLATORY
    elif disc < -tol:
        tag = RegimeTag.OVERDAMPED
    else:
        tag = RegimeTag.JORDAN
    return Regime(tag, float(disc))


def closed_form_eigenvalues(n, lam, mu) -> tuple[complex, complex]:
    """``mu/(2i) +- sqrt(n^2 + 2 lambda n - mu^2/4)``."""
    centre = complex(0.0, -mu / 2.0)
    root = np.sqrt(complex(n * n + 2.0 * lam * n - mu * mu / 4.0))
    return centre + root, centre - root


def diagonalize(block: ModeBlock, tol: float = JORDAN_TOL) -> BlockDiagonalization:
    n, lam, mu = block.n, block.lam, block.mu
    regime = classify(n, lam, mu, tol)
    half = complex(0.0, -mu / 2.0)  # mu/(2i)
    lam_m = lam - half  # lambda - mu/(2i)
    lam_p = lam + half  # lambda + mu/(2i)
    s = n + lam

    if regime.tag is RegimeTag.JORDAN:
        P_inv = np.array([[2 * s, lam_m], [lam_p, s]], dtype=np.complex128) / s
        P = np.array([[s, -lam_m], [-lam_p, 2 * s]], dtype=np.complex128) / s
        D = np.array([[half, lam_m], [0.0, half]], dtype=np.complex128)
        return BlockDiagonalization(regime, P, P_inv, D)

    # imaginary in the overdamped regime; the same formulas apply
    delta = np.sqrt(complex(n * n + 2.0 * lam * n - mu * mu / 4.0))
    c = 1.0 / np.sqrt(2.0 * delta * (delta + s))
    P_inv = c * np.array([[s + delta, lam_m], [lam_p, s + delta]], dtype=np.complex128)
    P = c * np.array([[s + delta, -lam_m], [-lam_p, s + delta]], dtype=np.complex128)
    # with these P, P_inv the eigenvalue mu/(2i) + delta comes first
    D = np.diag([half + delta, half - delta]).astype(np.complex128)
    return BlockDiagonalization(regime, P, P_inv, D)


def _alpha(n, lam, mu):
    excess = mu * mu / 4.0 - n * n - 2.0 * lam * n
    return mu / 2.0 - math.sqrt(max(0.0, excess))


def global_rate(lam: float, mu: float, tol: float = JORDAN_TOL) -> tuple[float, int]:
    """Global decay rate ``(alpha, beta)`` of the distance to the limiting constant."""
    if lam <= -0.5:
        raise InvalidParam(f"lambda must exceed -1/2, got {lam}")
    if not mu > 0:
        raise InvalidParam(f"mu must be positive, got {mu}")
    first = classify(1, lam, mu, tol).tag
    if first is RegimeTag.OSCILLATORY:
        return mu / 2.0, 0
    if first is RegimeTag.JORDAN:
        return mu / 2.0, 1
    alpha = mu / 2.0 - math.sqrt(mu * mu / 4.0 - 1.0 - 2.0 * lam)
    # Jordan blocks further up the spectrum still set beta = 1
    beta = 0
    n = 2
    while discriminant(n, lam, mu) <= tol:
        if classify(n, lam, mu, tol).tag is RegimeTag.JORDAN:
            beta = 1
            break
        n += 1
    return alpha, beta


def mode_rate(j_norm_sq: int, lam: float, mu: float, tol: float = JORDAN_TOL) -> RatePrediction:
    """Predicted rate for the modes with ``|j|^2 = j_norm_sq``."""
    _check_params(j_norm_sq, lam, mu)
    if not mu > 0:
        raise InvalidParam(f"mu must be positive, got {mu}")
    alpha_j = _alpha(j_norm_sq, lam, mu)
    beta_j = int(classify(j_norm_sq, lam, mu, tol).tag is RegimeTag.JORDAN)
    if beta_j:
        alpha_j = mu / 2.0
    g_alpha, g_beta = global_rate(lam, mu, tol)
    return RatePrediction(alpha_j, beta_j, g_alpha, g_beta)


def frequency(n, lam: float):
    """``Omega_n = sqrt(n^2 + 2 lambda n)``; accepts scalars or arrays of ``n``."""
    if lam <= -0.5:
        raise InvalidParam(f"lambda must exceed -1/2, got {lam}")
    n_arr = np.asarray(n, dtype=np.float64)
    if np.any(n_arr < 1):
        raise InvalidParam("frequency indices must be >= 1")
    out = np.sqrt(n_arr * n_arr + 2.0 * lam * n_arr)
    return float(out) if out.ndim == 0 else out


def hamiltonian_block(n: int, lam: float) -> HamiltonianBlock:
    """Real symplectic ``S`` with ``S_inv A S = diag(Omega, -Omega)`` for ``mu = 0``."""
    _check_params(n, lam)
    omega = frequency(n, lam)
    s = n + lam + omega
    c = 1.0 / math.sqrt((n + omega) * (n + 2.0 * lam + omega))
    S = c * np.array([[s, -lam], [-lam, s]])
    S_inv = c * np.array([[s, lam], [lam, s]])
    return HamiltonianBlock(int(n), float(lam), S, S_inv, omega)


SYMPLECTIC_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
