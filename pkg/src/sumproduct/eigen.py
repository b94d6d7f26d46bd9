"""Cyclic Jacobi diagonalization of dense symmetric matrices.

Rotations are scheduled in round-robin (tournament) order: every round pairs
each index with exactly one partner, so the ``n/2`` plane rotations of a round
touch disjoint rows and columns and are applied together as array operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns, aligned with values
    sweeps: int
    off_norm: float

    def residual(self, matrix: np.ndarray) -> float:
        """``max_i ||A v_i - theta_i v_i||_inf``."""
        a = np.asarray(matrix, dtype=np.float64)
        return float(np.abs(a @ self.vectors - self.vectors * self.values).max(initial=0.0))


def _rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    out = []
    for _ in range(m - 1):
        left = players[: m // 2]
        right = players[m // 2 :][::-1]
        pairs = [(a, b) for a, b in zip(left, right) if a < n and b < n]
        if pairs:
            p = np.array([min(a, b) for a, b in pairs])
            q = np.array([max(a, b) for a, b in pairs])
            out.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return out


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt((off * off).sum()))


def _sweep_rounds(a: np.ndarray, v: np.ndarray, rounds, skip: float) -> None:
    for p, q in rounds:
        apq = a[p, q]
        live = np.abs(apq) > skip
        if not live.any():
            continue
        p, q, apq = p[live], q[live], apq[live]
        theta = (a[q, q] - a[p, p]) / (2.0 * apq)
        t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        t[theta == 0] = 1.0
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        cp, cq = a[:, p], a[:, q]
        a[:, p], a[:, q] = cp * c - cq * s, cp * s + cq * c
        rp, rq = a[p, :], a[q, :]
        a[p, :], a[q, :] = c[:, None] * rp - s[:, None] * rq, s[:, None] * rp + c[:, None] * rq
        a[p, q] = 0.0
        a[q, p] = 0.0
        vp, vq = v[:, p], v[:, q]
        v[:, p], v[:, q] = vp * c - vq * s, vp * s + vq * c


if njit is not None:

    @njit(cache=True)
    def _sweep_cyclic(a, vt, skip):  # pragma: no cover - compiled
        # vt holds eigenvectors as rows so both updates stream contiguous memory
        n = a.shape[0]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                for k in range(n):
                    g = a[p, k]
                    h = a[q, k]
                    a[p, k] = c * g - s * h
                    a[q, k] = s * g + c * h
                for k in range(n):
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    g = vt[p, k]
                    h = vt[q, k]
                    vt[p, k] = c * g - s * h
                    vt[q, k] = s * g + c * h

else:  # pragma: no cover
    _sweep_cyclic = None


def jacobi_eigh(matrix, tol: float | None = None, max_sweeps: int = 50, parallel_order: bool | None = None) -> EigenResult:
    """All eigenpairs of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below ``tol``
    (default ``1e-10 * n``).  The row-cyclic sweep is compiled with numba when
    available; ``parallel_order=True`` forces the vectorized round-robin sweep.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if tol is None:
        tol = 1e-10 * max(n, 1)
    if parallel_order is None:
        parallel_order = _sweep_cyclic is None
    v = np.eye(n)
    rounds = _rounds(n) if parallel_order else None
    sweeps = 0
    off = _off_norm(a)
    while off > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"off-diagonal norm {off:.3e} after {sweeps} sweeps")
        # entries already negligible relative to the target are skipped
        skip = tol / (4 * n)
        if parallel_order:
            _sweep_rounds(a, v, rounds, skip)
        else:
            vt = np.ascontiguousarray(v.T)
            _sweep_cyclic(a, vt, skip)
            v = vt.T
        sweeps += 1
        a = 0.5 * (a + a.T)
        off = _off_norm(a)
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenResult(values[order], v[:, order], sweeps, off)


def power_iteration(matrix, iters: int = 500, seed: int = 0) -> float:
    """Largest-magnitude eigenvalue estimate (Rayleigh quotient)."""
    a = np.asarray(matrix, dtype=np.float64)
    x = np.random.default_rng(seed).random(a.shape[0]) + 1.0
    for _ in range(iters):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
    return float(x @ a @ x)
