"""Closed-form entanglement predictions and bond-dimension bounds.

All logarithms are natural, so entropies are in nats.  The helpers at the
end compute Schatten norms used to check the purification distance
inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class CftParams:
    """Central charge and the nonuniversal entropy offset ``C'_alpha``."""

    c: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError("central charge must be positive")


def d_scaling_exponent(c: float, alpha: float) -> float:
    """Exponent ``(c/6)(1 + 1/alpha)`` of entropy and bond-dimension growth."""
    if c <= 0 or alpha <= 0:
        raise DomainError("need c > 0 and alpha > 0")
    return c / 6.0 * (1.0 + 1.0 / alpha)


def cft_entropy_prediction(c: float, alpha: float, beta: float, offset: float = 0.0) -> float:
    """Renyi entropy of a critical chain's thermofield double at large ``ell``.

    ``S_alpha = (c/6)(1 + 1/alpha) log(beta/pi) + offset``.
    """
    if beta <= 0:
        raise DomainError("beta must be positive")
    return d_scaling_exponent(c, alpha) * math.log(beta / math.pi) + offset


def gapped_entropy_prediction(c: float, alpha: float, xi: float, offset: float = 0.0) -> float:
    """Saturated entropy ``(c/6)(1 + 1/alpha) log(xi) + 2 offset`` of a gapped chain."""
    if xi <= 0:
        raise DomainError("correlation length must be positive")
    return d_scaling_exponent(c, alpha) * math.log(xi) + 2.0 * offset


def thermal_correlation_length(scaling_dimension: float, beta: float) -> float:
    """``xi_beta = beta / (pi * Delta)``."""
    if scaling_dimension <= 0:
        raise DomainError("scaling dimension must be positive")
    return beta / (math.pi * scaling_dimension)


def mps_error_bound(eps_per_bond: Sequence[float]) -> float:
    """Upper bound ``sqrt(2 sum eps_l)`` on the two-norm error of a truncated MPS."""
    eps = np.asarray(eps_per_bond, dtype=float)
    if np.any(eps < 0) or np.any(eps > 1):
        raise DomainError("truncation errors must lie in [0, 1]")
    return float(np.sqrt(2.0 * eps.sum()))


def _check_open_unit(name, x):
    if not 0.0 < x < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {x}")


def bond_dimension_bound(s_alpha: float, alpha: float, eps: float) -> float:
    """Bond dimension guaranteeing truncation error ``eps``.

    Returns ``1 + exp(S_alpha + alpha/(1-alpha) log(1/eps))``.  Only Renyi
    indices below one give a bound.
    """
    if alpha >= 1:
        raise DomainError("the bound needs alpha < 1; it diverges as alpha -> 1")
    _check_open_unit("alpha", alpha)
    _check_open_unit("eps", eps)
    return 1.0 + math.exp(s_alpha + alpha / (1.0 - alpha) * math.log(1.0 / eps))


def log_bond_dimension_bound(s_alpha: float, alpha: float, eps: float) -> float:
    """``log(D - 1)`` of :func:`bond_dimension_bound`, safe against overflow."""
    _check_open_unit("alpha", alpha)
    _check_open_unit("eps", eps)
    return s_alpha + alpha / (1.0 - alpha) * math.log(1.0 / eps)


def _alpha_ratio(c, eps, y):
    if c <= 0:
        raise DomainError("central charge must be positive")
    _check_open_unit("eps", eps)
    if y <= 1:
        raise DomainError("y must exceed 1")
    return 6.0 / c * math.log(1.0 / eps) / math.log(y)


def optimal_alpha(c: float, eps: float, y: float) -> float:
    """Renyi index minimizing the CFT bond-dimension bound.

    With ``S_alpha = (c/6)(1 + 1/alpha) log y`` inserted into the bound, the
    minimum sits at ``alpha* = (1 - sqrt(r)) / (1 - r)`` where
    ``r = (6/c) log(1/eps) / log y``.  Evaluated as ``1 / (1 + sqrt(r))``,
    which is the same number without the removable singularity at ``r = 1``.

    Raises
    ------
    DomainError
        If ``r <= 1``.  The closed form stays in (0, 1) for every ``r > 0``
        but values ``r <= 1`` are rejected as outside the intended regime.
    """
    r = _alpha_ratio(c, eps, y)
    if r <= 1.0:
        raise DomainError(
            f"(6/c) log(1/eps) / log(y) = {r:.6g} must exceed 1 "
            f"(c={c}, eps={eps}, y={y})")
    return 1.0 / (1.0 + math.sqrt(r))


def optimal_exponent(c: float, eps: float, y: float) -> float:
    """Predicted bond-dimension exponent ``lambda*`` at the optimal Renyi index."""
    return d_scaling_exponent(c, optimal_alpha(c, eps, y))


def _check_bound_window(eps, D, alpha):
    if not eps > 0:
        raise DomainError("eps must be positive")
    if D < 2 or int(D) != D:
        raise DomainError("D must be an integer >= 2")
    if D - 1 - eps <= 0:
        raise DomainError("eps too large for this D")
    lower = eps * D / (D - 1 - eps)
    if not (lower <= alpha < 1.0):
        raise DomainError(f"alpha={alpha} outside the valid window [{lower:.6g}, 1)")


def entropy_lower_bound_from_truncation(eps: float, D: int, alpha: float,
                                        sharp: bool = False) -> tuple[float, bool]:
    """Smallest Renyi entropy compatible with truncation error ``eps`` at rank ``D``.

    The default is ``(1/(1-alpha)) log[(D-1)^(1-alpha) eps^alpha]``.  With
    ``sharp=True`` the tighter value
    ``(1/(1-alpha)) log[(D-1)^(1-alpha) eps^alpha / (alpha^alpha (1-alpha)^(1-alpha))]``
    is returned.

    Returns
    -------
    value : float
    vacuous : bool
        True when the bound is negative and therefore says nothing.
    """
    _check_bound_window(eps, D, alpha)
    value = math.log(D - 1) + alpha / (1.0 - alpha) * math.log(eps)
    if sharp:
        value -= (alpha * math.log(alpha) + (1 - alpha) * math.log(1 - alpha)) / (1 - alpha)
    return value, value < 0


def optimal_plateau_height(eps: float, D: int, alpha: float) -> float:
    """``h* = ((1-alpha)/alpha) eps / (D-1)`` minimizing the lower-bound family."""
    return (1.0 - alpha) / alpha * eps / (D - 1)


def majorizing_distribution(eps: float, D: int, h: float) -> np.ndarray:
    """Distribution with truncation error ``eps`` and ``w_D = h`` that majorizes all others.

    The largest weight is ``1 - eps - (D-1) h``, followed by ``D + K - 1``
    weights equal to ``h`` with ``K = floor(eps/h)`` and a final weight
    ``gamma h`` with ``gamma = eps/h - K`` when nonzero.
    """
    if not h > 0:
        raise ParameterError("h must be positive")
    if D < 1 or int(D) != D:
        raise ParameterError("D must be a positive integer")
    if not 0 <= eps < 1:
        raise ParameterError("eps must lie in [0, 1)")
    top = 1.0 - eps - (D - 1) * h
    if top < h * (1 - 1e-12):
        raise ParameterError("need 1 - eps - (D-1) h >= h")
    ratio = eps / h
    K = math.floor(ratio)
    gamma = ratio - K
    # absorb rounding so that e.g. eps=0.2, h=0.1 gives K=2, gamma=0
    if gamma > 1 - 1e-12:
        K, gamma = K + 1, 0.0
    elif gamma < 1e-12:
        gamma = 0.0
    w = [top] + [h] * (D + K - 1)
    if gamma > 0:
        w.append(gamma * h)
    return np.array(w)


def partial_sums_dominate(a, b, tol: float = 1e-12) -> bool:
    """Whether sorted ``a`` majorizes sorted ``b`` (partial sums ``>=`` up to ``tol``)."""
    a = np.sort(np.asarray(a, dtype=float))[::-1]
    b = np.sort(np.asarray(b, dtype=float))[::-1]
    n = max(a.size, b.size)
    ca = np.cumsum(np.pad(a, (0, n - a.size)))
    cb = np.cumsum(np.pad(b, (0, n - b.size)))
    return bool(np.all(ca >= cb - tol))


# -- norms -----------------------------------------------------------------

def trace_norm(x) -> float:
    """Schatten 1-norm (sum of singular values)."""
    return float(np.sum(np.linalg.svd(np.asarray(x), compute_uv=False)))


def frobenius_norm(x) -> float:
    """Schatten 2-norm."""
    return float(np.linalg.norm(np.asarray(x)))


def purification_density(vector, dim: int) -> np.ndarray:
    """Reduced density matrix of the first factor of a vector on ``C^dim ⊗ C^k``."""
    m = np.asarray(vector).reshape(dim, -1)
    return m @ m.conj().T
