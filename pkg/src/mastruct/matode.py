"""Integration of the zero-curvature system ``d_i G G^-1 = C_i`` on a cube.

The cascade has three stages. ``X`` solves ``d_1 X = C_1 X`` along every
x1-line with ``X = Id`` on the plane ``x1 = 0``. ``Y`` solves ``d_2 Y = C2' Y``
on that plane with ``Y = Id`` on the x3-axis. ``Z`` solves ``d_3 Z = C3'' Z``
on the x3-axis with ``Z(0) = Id``. Then ``G = X Y Z``.

Zero curvature makes ``C2' = X^-1 (C_2 X - d_2 X)`` independent of x1, so it
equals its value on ``x1 = 0`` where ``X = Id``: ``C2'(x2, x3) = C_2(0, x2, x3)``.
Likewise ``C3''(x3) = C_3(0, 0, x3)``. The stages use these base-plane values;
the finite-difference versions of ``C2'`` and ``C3''`` built from the stage
grids are reported as diagnostics of that independence.

Each ``C_i`` is a batched callable mapping an ``(N, 3)`` array of points to
``(N, m, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

COND_LIMIT = 1e12


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatrixField:
    """Three batched callables ``C_i(points (N, 3)) -> (N, m, m)``."""
    parts: tuple
    m: int
    h: float = 1e-5

    def component(self, i: int, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.parts[i](pts), dtype=float)

    def at(self, pts) -> np.ndarray:
        return np.stack([self.component(i, pts) for i in range(3)], axis=1)

    @classmethod
    def zero(cls, m: int) -> "MatrixField":
        z = lambda p: np.zeros((len(p), m, m))  # noqa: E731
        return cls((z, z, z), m)

    @classmethod
    def constant(cls, Ms) -> "MatrixField":
        Ms = np.asarray(Ms, dtype=float)
        parts = tuple((lambda p, M=M: np.broadcast_to(M, (len(p),) + M.shape).copy()) for M in Ms)
        return cls(parts, Ms.shape[-1])

    @classmethod
    def from_pointwise(cls, fns, m: int) -> "MatrixField":
        """Three unbatched callables ``x -> (m, m)``."""
        parts = tuple((lambda p, f=f: np.array([np.asarray(f(x), dtype=float) for x in p]))
                      for f in fns)
        return cls(parts, m)


def random_generators(seed: int, m: int = 3, count: int = 3) -> np.ndarray:
    """Random matrices with spectral norm 1."""
    rng = np.random.default_rng(seed)
    Ms = rng.normal(size=(count, m, m))
    return Ms / np.linalg.norm(Ms, ord=2, axis=(1, 2))[:, None, None]


class _Exp:
    """Batched ``exp(t M)`` through an eigendecomposition (falls back to scipy
    when ``M`` is badly conditioned for it)."""

    def __init__(self, M):
        self.M = M
        w, V = np.linalg.eig(M)
        self.ok = np.linalg.cond(V) < 1e6
        self.w, self.V, self.Vi = w, V, (np.linalg.inv(V) if self.ok else None)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if not self.ok:
            return expm(t[:, None, None] * self.M)
        D = np.exp(t[:, None] * self.w[None, :])
        return np.real(np.einsum("ij,nj,jk->nik", self.V, D, self.Vi))


def manufactured(Ms: np.ndarray):
    """``H = exp(x1 M1) exp(x2 M2) exp(x3 M3)``: returns ``(MatrixField, H)``
    with ``C_i = d_i H H^-1``, i.e. ``C_1 = M1``, ``C_2 = E1 M2 E1^-1``,
    ``C_3 = E1 E2 M3 E2^-1 E1^-1``."""
    M1, M2, M3 = (np.asarray(M, dtype=float) for M in Ms)
    m = M1.shape[0]
    E1, E2, E3 = _Exp(M1), _Exp(M2), _Exp(M3)

    def C1(p):
        return np.broadcast_to(M1, (len(p), m, m)).copy()

    def C2(p):
        return E1(p[:, 0]) @ M2 @ E1(-p[:, 0])

    def C3(p):
        A = E1(p[:, 0]) @ E2(p[:, 1])
        B = E2(-p[:, 1]) @ E1(-p[:, 0])
        return A @ M3 @ B

    def H(p):
        p = np.atleast_2d(p)
        return E1(p[:, 0]) @ E2(p[:, 1]) @ E3(p[:, 2])

    return MatrixField((C1, C2, C3), m), H


@dataclass
class CheckReport:
    max_defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol


def curvature_defect(C: MatrixField, pts) -> np.ndarray:
    """Frobenius norm of ``d_j C_i - d_i C_j + [C_i, C_j]`` (max over pairs) per point."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    h = C.h
    D = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        D.append((C.at(pts + e) - C.at(pts - e)) / (2 * h))  # D[j][:, i] = d_j C_i
    Cs = C.at(pts)
    worst = np.zeros(len(pts))
    for i in range(3):
        for j in range(i + 1, 3):
            F = D[j][:, i] - D[i][:, j] + Cs[:, i] @ Cs[:, j] - Cs[:, j] @ Cs[:, i]
            worst = np.maximum(worst, np.linalg.norm(F, axis=(1, 2)))
    return worst


def zero_curvature_check(C: MatrixField, samples, tol: float = 1e-6) -> CheckReport:
    return CheckReport(float(np.max(curvature_defect(C, samples))), tol)


# ---------------------------------------------------------------------------
# integration


def _rk4_lines(A: Callable[[np.ndarray], np.ndarray], t_grid: np.ndarray, Y0: np.ndarray
               ) -> np.ndarray:
    """Solve ``dY/dt = A(t) Y`` on many lines at once.

    ``A(t)`` returns ``(L, m, m)``; ``t_grid`` starts at 0 and is monotone.
    """
    out = np.empty((len(t_grid),) + Y0.shape)
    out[0] = Y = Y0
    for k in range(len(t_grid) - 1):
        t, dt = t_grid[k], t_grid[k + 1] - t_grid[k]
        a0, am, a1 = A(t), A(t + dt / 2), A(t + dt)
        k1 = a0 @ Y
        k2 = am @ (Y + dt / 2 * k1)
        k3 = am @ (Y + dt / 2 * k2)
        k4 = a1 @ (Y + dt * k3)
        Y = Y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = Y
    return out


def _both_ways(A, axis_vals: np.ndarray, Y0: np.ndarray) -> np.ndarray:
    """Integrate from the centre node (value 0) to both ends of ``axis_vals``."""
    c = int(np.argmin(np.abs(axis_vals)))
    fwd = _rk4_lines(A, axis_vals[c:], Y0)
    bwd = _rk4_lines(A, axis_vals[c::-1], Y0)
    return np.concatenate([bwd[::-1], fwd[1:]], axis=0)


@dataclass
class Solution:
    axis: np.ndarray  # node coordinates (same on all three axes)
    G: np.ndarray  # (n, n, n, m, m) indexed [i1, i2, i3]
    X: np.ndarray
    Y: np.ndarray  # (n, n, m, m) on the plane x1 = 0, indexed [i2, i3]
    Z: np.ndarray  # (n, m, m) on the x3-axis
    diagnostics: dict

    @property
    def step(self) -> float:
        return float(self.axis[1] - self.axis[0])


def make_axis(half_width: float, step: float) -> np.ndarray:
    k = half_width / step
    if abs(k - round(k)) > 1e-9 or round(k) < 2:
        raise ValueError("half width must be an integer multiple (>= 2) of the step")
    k = int(round(k))
    return step * np.arange(-k, k + 1)


def integrate(C: MatrixField, half_width: float = 0.5, step: float = 1 / 64) -> Solution:
    a = make_axis(half_width, step)
    n, m = len(a), C.m
    I = np.eye(m)
    P2, P3 = np.meshgrid(a, a, indexing="ij")
    plane = np.column_stack([P2.ravel(), P3.ravel()])  # (n*n, 2) over (x2, x3)

    def A1(t):
        pts = np.column_stack([np.full(len(plane), t), plane])
        return C.component(0, pts)

    X = _both_ways(A1, a, np.broadcast_to(I, (len(plane), m, m)).copy())
    X = X.reshape(n, n, n, m, m)  # [i1, i2, i3]

    def A2(t):
        pts = np.column_stack([np.zeros(n), np.full(n, t), a])
        return C.component(1, pts)

    Y = _both_ways(A2, a, np.broadcast_to(I, (n, m, m)).copy())  # [i2, i3]

    def A3(t):
        return C.component(2, np.array([[0.0, 0.0, t]]))

    Z = _both_ways(A3, a, I[None].copy())[:, 0]  # [i3]
    G = np.einsum("abcij,bcjk,ckl->abcil", X, Y, Z)
    cond = np.linalg.cond(G.reshape(-1, m, m))
    bad = int(np.argmax(cond))
    if not np.all(np.isfinite(cond)) or cond[bad] > COND_LIMIT:
        loc = np.unravel_index(bad, (n, n, n))
        raise IntegrationError(
            f"G lost invertibility (condition {cond[bad]:.3g}) at x = {[float(a[i]) for i in loc]}")
    diag = _stage_diagnostics(C, a, X, Y)
    diag["maxCondition"] = float(np.max(cond))
    return Solution(a, G, X, Y, Z, diag)


def _central(F: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order central difference along ``axis`` on interior nodes (edges dropped)."""
    n = F.shape[axis]
    hi = np.take(F, range(2, n), axis=axis)
    lo = np.take(F, range(0, n - 2), axis=axis)
    return (hi - lo) / (2 * h)


def _stage_diagnostics(C: MatrixField, a, X, Y) -> dict:
    """``C2'`` from differences across x2-lines and ``C3''`` across x3, compared
    with their base-plane values."""
    n = len(a)
    h = a[1] - a[0]
    inner = a[1:-1]
    A1, A2, A3 = np.meshgrid(a, inner, a, indexing="ij")
    pts = np.column_stack([A1.ravel(), A2.ravel(), A3.ravel()])
    Xs = X[:, 1:-1].reshape(-1, C.m, C.m)
    dX2 = _central(X, 1, h).reshape(-1, C.m, C.m)
    C2p = np.linalg.solve(Xs, C.component(1, pts) @ Xs - dX2)
    base = C.component(1, np.column_stack([np.zeros(len(pts)), pts[:, 1], pts[:, 2]]))
    d2 = float(np.max(np.linalg.norm(C2p - base, axis=(1, 2))))

    # C3' on x1 = 0 (X = Id there) then C3'' on the x3-axis
    c0 = int(np.argmin(np.abs(a)))
    B2, B3 = np.meshgrid(a, inner, indexing="ij")
    plane = np.column_stack([np.zeros(B2.size), B2.ravel(), B3.ravel()])
    dX3 = _central(X[c0], 1, h).reshape(-1, C.m, C.m)
    C3p = C.component(2, plane) - dX3
    Ys = Y[:, 1:-1].reshape(-1, C.m, C.m)
    dY3 = _central(Y, 1, h).reshape(-1, C.m, C.m)
    C3pp = np.linalg.solve(Ys, C3p @ Ys - dY3).reshape(n, n - 2, C.m, C.m)
    base3 = C.component(2, np.column_stack([np.zeros(n - 2), np.zeros(n - 2), inner]))
    d3 = float(np.max(np.linalg.norm(C3pp - base3[None], axis=(2, 3))))
    return {"stage2_C2prime_x1_dependence": d2, "stage3_C3second_x2_dependence": d3}


def _fd4(F: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order central difference on nodes at least 2 from each end."""
    n = F.shape[axis]

    def s(lo):
        return np.take(F, range(lo, lo + n - 4), axis=axis)

    return (s(0) - 8 * s(1) + 8 * s(3) - s(4)) / (12 * h)


def residual(sol: Solution, C: MatrixField) -> float:
    """``max_i || d_i G G^-1 - C_i ||`` (Frobenius) over interior nodes."""
    return float(max(residual_per_axis(sol, C)))


def residual_per_axis(sol: Solution, C: MatrixField) -> list[float]:
    a, G, h = sol.axis, sol.G, sol.step
    core = G[2:-2, 2:-2, 2:-2]
    m = G.shape[-1]
    Ginv = np.linalg.inv(core.reshape(-1, m, m))
    inner = a[2:-2]
    P = np.stack(np.meshgrid(inner, inner, inner, indexing="ij"), axis=-1).reshape(-1, 3)
    Cs = C.at(P)
    out = []
    for i in range(3):
        sl = [slice(2, -2)] * 3
        sl[i] = slice(None)
        dG = _fd4(G[tuple(sl)], i, h).reshape(-1, m, m)
        out.append(float(np.max(np.linalg.norm(dG @ Ginv - Cs[:, i], axis=(1, 2)))))
    return out


def convergence(C: MatrixField, half_width: float, steps) -> dict:
    """Residuals at successive steps and the observed orders ``log2(r_k / r_{k+1})``."""
    res = [residual(integrate(C, half_width, s), C) for s in steps]
    orders = [float(np.log(res[k] / res[k + 1]) / np.log(steps[k] / steps[k + 1]))
              for k in range(len(res) - 1)]
    return {"steps": list(map(float, steps)), "residuals": res, "orders": orders}
