"""Soft-margin SVM trained in the dual by pairwise (SMO-style) updates.

The working pair is chosen with second-order information (maximal violating
``i``, then the ``j`` giving the largest guaranteed objective decrease), which
is deterministic for a fixed training order. Training stops once the maximal
KKT violation ``m(alpha) - M(alpha)`` drops below ``eps``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

TAU = 1e-12


@dataclass(frozen=True)
class Kernel:
    """Kernel spec. ``poly`` is (x.y + lower)^exponent, optionally normalized."""

    name: str = "linear"
    exponent: float = 1.0
    lower_order: bool = False
    normalized: bool = False
    sigma: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if self.name not in ("linear", "poly", "puk"):
            raise ValueError(f"unknown kernel {self.name!r}")

    @property
    def is_linear(self) -> bool:
        return self.name == "linear" and not self.normalized

    def to_dict(self) -> dict:
        return {"name": self.name, "exponent": self.exponent, "lower_order": self.lower_order,
                "normalized": self.normalized, "sigma": self.sigma, "omega": self.omega}

    def _base(self, dots: np.ndarray, sq_a: np.ndarray, sq_b: np.ndarray) -> np.ndarray:
        if self.name == "linear":
            return dots
        if self.name == "poly":
            return (dots + (1.0 if self.lower_order else 0.0)) ** self.exponent
        # Pearson VII universal kernel
        d2 = np.maximum(sq_a[:, None] + sq_b[None, :] - 2.0 * dots, 0.0)
        scale = 2.0 * np.sqrt(2.0 ** (1.0 / self.omega) - 1.0) / self.sigma
        return 1.0 / (1.0 + scale * scale * d2) ** self.omega

    def self_values(self, sq: np.ndarray) -> np.ndarray:
        """K(x, x) given squared norms."""
        if self.name == "linear":
            return sq
        if self.name == "poly":
            return (sq + (1.0 if self.lower_order else 0.0)) ** self.exponent
        return np.ones_like(sq)

    def matrix(self, a: sp.csr_matrix, b: sp.csr_matrix) -> np.ndarray:
        dots = np.asarray((a @ b.T).todense(), dtype=np.float64)
        sq_a = np.asarray(a.multiply(a).sum(axis=1)).ravel()
        sq_b = np.asarray(b.multiply(b).sum(axis=1)).ravel()
        k = self._base(dots, sq_a, sq_b)
        if self.normalized:
            da, db = self.self_values(sq_a), self.self_values(sq_b)
            denom = np.sqrt(np.outer(da, db))
            with np.errstate(divide="ignore", invalid="ignore"):
                k = np.where(denom > 0, k / np.where(denom > 0, denom, 1.0), 0.0)
        return k


@dataclass
class SMOResult:
    alpha: np.ndarray
    bias: float
    iterations: int
    violation: float
    gradient: np.ndarray = field(repr=False)


def kkt_violation(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> float:
    """m(alpha) - M(alpha); non-positive up to rounding at an exact optimum."""
    minus_yg = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return 0.0
    return float(minus_yg[up].max() - minus_yg[low].min())


def smo(K: np.ndarray, y: np.ndarray, C: float = 1.0, eps: float = 1e-3,
        max_iter: int | None = None) -> SMOResult:
    """Solve min 1/2 a'Qa - e'a s.t. 0 <= a <= C, y'a = 0 with Q = yy'*K."""
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K).copy()
    max_iter = max_iter if max_iter is not None else max(10_000_000, 100 * n)
    it = 0
    while it < max_iter:
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        up_idx = np.flatnonzero(up)
        i = int(up_idx[np.argmax(minus_yg[up_idx])])
        g_max = minus_yg[i]
        low_idx = np.flatnonzero(low)
        if g_max - minus_yg[low_idx].min() < eps:
            break
        b = g_max - minus_yg[low_idx]
        cand = low_idx[b > 0]
        b = b[b > 0]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, TAU)
        j = int(cand[np.argmin(-(b * b) / a)])

        yi, yj = y[i], y[j]
        Qi_j = yi * yj * K[i, j]
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            quad = diag[i] + diag[j] + 2.0 * Qi_j
            quad = quad if quad > 0 else TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Qi_j
            quad = quad if quad > 0 else TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        d_i, d_j = ai - ai_old, aj - aj_old
        # Q[:, i] = y * y_i * K[:, i]
        grad += y * (yi * d_i * K[:, i] + yj * d_j * K[:, j])
        it += 1
    else:
        log.warning("SMO stopped at max_iter=%d before reaching eps=%g", max_iter, eps)

    return SMOResult(alpha, _bias(alpha, grad, y, C), it, kkt_violation(alpha, grad, y, C), grad)


def _bias(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yg[free].mean())
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (~at_upper & (y < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    return -rho
