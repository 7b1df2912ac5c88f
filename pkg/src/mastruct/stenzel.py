"""The Stenzel Calabi-Yau structure on the quadric ``z1^2 + ... + z4^2 = 1``.

The Kaehler potential is ``phi = f(tau)`` with ``tau = |z1|^2 + ... + |z4|^2``
and ``g = f'`` solving ``x g^3 + g' g^2 (x^2 - 1) = c``. Substituting
``u = g^3`` makes the equation linear, ``(x^2 - 1) u' + 3 x u = 3 c``, which
gives a closed form used as an independent oracle in the tests.

Chart coordinates are ``(x1, x2, x3, y1, y2, y3)`` with ``z_j = x_j + i y_j``
and ``z4`` the principal square root of ``1 - z1^2 - z2^2 - z3^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BPoly

from . import fields, hitchin
from .exterior import FLOAT, Form, basis, monomials, wedge

FULL = tuple(range(6))
DEFAULT_DELTA = 0.1


class StenzelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the ODE


def closed_form_g(x, c: float = 1.0):
    """Exact ``g`` from the linearized equation (``x > 1``)."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(x * x - 1)
    u = 1.5 * c * (x * s - np.arccosh(x)) / s**3
    return np.cbrt(u)


def _rhs(x, g, c):
    return (c - x * g**3) / (g * g * (x * x - 1))


def _second(x, g, gp, c):
    """``g''`` from differentiating the linear form of the equation."""
    u1 = 3 * g * g * gp
    u = g**3
    u2 = -(5 * x * u1 + 3 * u) / (x * x - 1)
    return (u2 - 6 * g * gp * gp) / (3 * g * g)


@dataclass(frozen=True)
class StenzelODE:
    c: float
    x: np.ndarray
    g: np.ndarray
    gp: np.ndarray
    gpp: np.ndarray
    step: float
    _poly: BPoly = field(repr=False, compare=False, default=None)
    _prim: BPoly = field(repr=False, compare=False, default=None)

    @property
    def tau_max(self) -> float:
        return float(self.x[-1])

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 1 - 1e-12) or np.any(t > self.tau_max + 1e-12):
            raise StenzelError(f"tau outside [1, {self.tau_max}]")
        return t

    def f(self, t):
        """Potential with ``f(1) = 0``."""
        return self._prim(self._check(t))

    def fp(self, t):
        return self._poly(self._check(t))

    def fpp(self, t):
        return self._poly.derivative(1)(self._check(t))

    def residual(self) -> np.ndarray:
        """``x g^3 + g' g^2 (x^2 - 1) - c`` with ``g'`` from fourth-order
        differences of the grid values (one-sided stencils at the ends)."""
        gd = fd4(self.g, self.step)
        return self.x * self.g**3 + gd * self.g**2 * (self.x**2 - 1) - self.c


def fd4(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid."""
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / 12
    d[0] = -25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]
    d[1] = -3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]
    d[-2] = 3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]
    d[-1] = 25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]
    d[[0, 1, -2, -1]] /= 12
    return d / h


def solve_ode(c: float = 1.0, tau_max: float = 3.0, step: float = 1e-3) -> StenzelODE:
    """RK4 from ``x = 1`` with a second-order series for the first step.

    At ``x = 1`` the equation reduces to ``g^3 = c``; differentiating the
    linear form there gives ``g'(1) = -g/5`` and ``g''(1) = 26 g / 175``.
    """
    if c <= 0:
        raise StenzelError("c must be positive")
    if tau_max <= 1:
        raise StenzelError("tau_max must exceed 1")
    n = int(round((tau_max - 1) / step))
    if n < 4 or abs(1 + n * step - tau_max) > 1e-9 * tau_max:
        raise StenzelError("step must divide tau_max - 1 into at least 4 pieces")
    x = 1 + step * np.arange(n + 1)
    g = np.empty(n + 1)
    g0 = c ** (1 / 3)
    g[0] = g0
    e = step
    g[1] = g0 * (1 - e / 5 + 13 * e * e / 175)
    for i in range(1, n):
        xi, gi = x[i], g[i]
        k1 = _rhs(xi, gi, c)
        k2 = _rhs(xi + e / 2, gi + e / 2 * k1, c)
        k3 = _rhs(xi + e / 2, gi + e / 2 * k2, c)
        k4 = _rhs(xi + e, gi + e * k3, c)
        g[i + 1] = gi + e / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(g[i + 1]) or g[i + 1] <= 0:
            raise StenzelError(f"g lost positivity at x = {x[i + 1]:.6g}")
    gp = np.empty_like(g)
    gpp = np.empty_like(g)
    gp[0], gpp[0] = -g0 / 5, 26 * g0 / 175
    gp[1:] = _rhs(x[1:], g[1:], c)
    gpp[1:] = _second(x[1:], g[1:], gp[1:], c)
    poly = BPoly.from_derivatives(x, np.column_stack([g, gp, gpp]))
    return StenzelODE(c, x, g, gp, gpp, step, poly, poly.antiderivative())


# ---------------------------------------------------------------------------
# chart geometry


@dataclass(frozen=True)
class ChartPoint:
    z: np.ndarray  # complex (3,)
    delta: float = DEFAULT_DELTA

    @classmethod
    def from_real(cls, p, delta: float = DEFAULT_DELTA) -> "ChartPoint":
        p = np.asarray(p, dtype=float)
        return cls(p[:3] + 1j * p[3:], delta)

    @property
    def real(self) -> np.ndarray:
        return np.concatenate([self.z.real, self.z.imag])

    @property
    def z4(self) -> complex:
        return complex(np.sqrt(1 - np.sum(self.z * self.z) + 0j))

    @property
    def full(self) -> np.ndarray:
        return np.append(self.z, self.z4)

    @property
    def valid(self) -> bool:
        return abs(self.z4) > self.delta

    def require_valid(self):
        if not self.valid:
            raise StenzelError(f"|z4| = {abs(self.z4):.3g} below the chart margin {self.delta}")


def tau_derivatives(p):
    """``tau`` with its real gradient and Hessian in chart coordinates.

    ``tau = |z|^2 + |w|`` with ``w = 1 - sum z_j^2 = u + i v``.
    """
    p = np.asarray(p, dtype=float)
    x, y = p[:3], p[3:]
    z = x + 1j * y
    w = 1 - np.sum(z * z)
    u, v, aw = w.real, w.imag, abs(w)
    du = np.concatenate([-2 * x, 2 * y])
    dv = np.concatenate([-2 * y, -2 * x])
    d2u = np.diag([-2.0, -2, -2, 2, 2, 2])
    d2v = np.zeros((6, 6))
    for k in range(3):
        d2v[k, 3 + k] = d2v[3 + k, k] = -2
    s = u * du + v * dv
    grad = np.concatenate([2 * x, 2 * y]) + s / aw
    hess = (2 * np.eye(6) + (np.outer(du, du) + u * d2u + np.outer(dv, dv) + v * d2v) / aw
            - np.outer(s, s) / aw**3)
    return float(np.sum(np.abs(z) ** 2) + aw), grad, hess


def tau(p) -> float:
    return tau_derivatives(p)[0]


_U = np.zeros((3, 6), dtype=complex)
for _j in range(3):
    _U[_j, _j] = 1
    _U[_j, 3 + _j] = 1j


def ddbar_gram(hess: np.ndarray) -> np.ndarray:
    """Gram matrix ``W`` of ``i d dbar phi`` from the real Hessian of ``phi``:
    ``i d dbar phi = sum_{a<b} W[a, b] db_a ^ db_b``."""
    A, B, C = hess[:3, :3], hess[3:, 3:], hess[:3, 3:]
    h = 0.25 * (A + B + 1j * (C - C.T))  # d^2 phi / dz_j dzbar_k
    W = 1j * (_U.T @ h @ _U.conj() - _U.conj().T @ h.T @ _U)
    if np.max(np.abs(W.imag)) > 1e-9 * max(1.0, np.max(np.abs(W.real))):
        raise StenzelError("i d dbar phi came out complex")
    return W.real


def kahler_gram(p, ode: StenzelODE) -> np.ndarray:
    """Chain rule: ``Hess phi = f'' grad tau grad tau^T + f' Hess tau``."""
    t, g, H = tau_derivatives(p)
    return ddbar_gram(float(ode.fpp(t)) * np.outer(g, g) + float(ode.fp(t)) * H)


def kahler_gram_fd(p, ode: StenzelODE, h: float = 1e-4) -> np.ndarray:
    """Same form from second-order central differences of ``phi``."""
    p = np.asarray(p, dtype=float)

    def phi(q):
        return float(ode.f(tau(q)))

    H = np.empty((6, 6))
    E = np.eye(6) * h
    for a in range(6):
        for b in range(a, 6):
            H[a, b] = H[b, a] = (phi(p + E[a] + E[b]) - phi(p + E[a] - E[b])
                                 - phi(p - E[a] + E[b]) + phi(p - E[a] - E[b])) / (4 * h * h)
    return ddbar_gram(H)


def gram_to_form(W: np.ndarray) -> Form:
    return Form(2, {(a, b): W[a, b] for a in range(6) for b in range(a + 1, 6)}, FLOAT)


def kahler_form(point: ChartPoint, ode: StenzelODE) -> Form:
    point.require_valid()
    return gram_to_form(kahler_gram(point.real, ode))


def _dz123() -> tuple[Form, Form]:
    re = Form.scalar(1.0, FLOAT)
    im = Form.scalar(0.0, FLOAT)
    for j in range(3):
        dx, dy = basis(j, mode=FLOAT), basis(3 + j, mode=FLOAT)
        re, im = wedge(re, dx) - wedge(im, dy), wedge(re, dy) + wedge(im, dx)
    return re, im


_DZ_RE, _DZ_IM = _dz123()
_DZ_RE_D = _DZ_RE.dense()
_DZ_IM_D = _DZ_IM.dense()


def holomorphic_volume_dense(p) -> tuple[np.ndarray, np.ndarray]:
    """Dense real and imaginary parts of ``-dz1^dz2^dz3 / z4``."""
    pt = ChartPoint.from_real(p)
    a = -1 / pt.z4
    return (a.real * _DZ_RE_D - a.imag * _DZ_IM_D, a.imag * _DZ_RE_D + a.real * _DZ_IM_D)


def holomorphic_volume(point: ChartPoint) -> tuple[Form, Form]:
    point.require_valid()
    re, im = holomorphic_volume_dense(point.real)
    return Form.from_dense(3, re, FLOAT), Form.from_dense(3, im, FLOAT)


def volume_by_determinant(point: ChartPoint, vectors) -> complex:
    """``det_C(z, Z1, Z2, Z3)`` with ``Z_i`` the complex tangent vectors of real
    chart vectors, completed by ``dz4 = -sum z_j dz_j / z4``."""
    z = point.full
    cols = [z]
    for X in vectors:
        X = np.asarray(X, dtype=float)
        dz = X[:3] + 1j * X[3:]
        cols.append(np.append(dz, -np.sum(point.z * dz) / point.z4))
    return complex(np.linalg.det(np.column_stack(cols)))


def cy_ratio(point: ChartPoint, ode: StenzelODE) -> float:
    """``r`` with ``Omega^3 = r i alpha ^ conj(alpha)``; ``i alpha ^ conj(alpha) = 2 Re ^ Im``."""
    O = kahler_form(point, ode)
    re, im = holomorphic_volume(point)
    return wedge(wedge(O, O), O)[FULL] / (2 * wedge(re, im)[FULL])


def random_points(count: int, seed: int, ode: StenzelODE, radius: float = 0.4,
                  delta: float = DEFAULT_DELTA, margin: float = 1e-2) -> list[ChartPoint]:
    """Uniform points of the cube ``[-radius, radius]^6`` inside the chart with
    ``tau`` safely below ``tau_max``."""
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 1000 * count:
            raise StenzelError("could not place sample points")
        pt = ChartPoint.from_real(rng.uniform(-radius, radius, 6), delta)
        if pt.valid and tau(pt.real) < ode.tau_max - margin:
            out.append(pt)
    return out


def ratio_spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / abs(np.median(v)))


# ---------------------------------------------------------------------------
# T*S^3 identification and Darboux coordinates

TAU_XI = "1+2|v|^2"
TAU_XI_ALT = "2+2|v|^2"


def xi(Z) -> tuple[np.ndarray, np.ndarray]:
    """``x + i y -> (x / sqrt(1 + |y|^2), y)`` from the quadric to T*S^3."""
    Z = np.asarray(Z, dtype=complex)
    X, Y = Z.real, Z.imag
    return X / np.sqrt(1 + Y @ Y), Y


def xi_inverse(u, v) -> np.ndarray:
    u, v = np.asarray(u, float), np.asarray(v, float)
    return u * np.sqrt(1 + v @ v) + 1j * v


def tau_on_cotangent(v, variant: str = TAU_XI) -> float:
    s = float(np.asarray(v) @ np.asarray(v))
    return 1 + 2 * s if variant == TAU_XI else 2 + 2 * s


def darboux_coords(u, v, ode: StenzelODE, variant: str = TAU_XI, tol: float = 1e-9):
    """``(w1, w2, w3, u1, u2, u3)`` with
    ``w_k = 2 f'(tau) sqrt(1 + |v|^2) / u4 (u_k v4 - v_k u4)``."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    if abs(u @ u - 1) > tol:
        raise StenzelError("u must be a unit vector")
    if abs(u @ v) > tol:
        raise StenzelError("u and v must be orthogonal")
    if abs(u[3]) < 1e-8:
        raise StenzelError("u4 vanishes")
    F = float(ode.fp(tau_on_cotangent(v, variant))) * np.sqrt(1 + v @ v)
    w = 2 * F / u[3] * (u[:3] * v[3] - v[:3] * u[3])
    return np.concatenate([w, u[:3]])


def darboux_defect(point: ChartPoint, ode: StenzelODE, variant: str = TAU_XI,
                   h: float = 1e-6) -> float:
    """``max |D^T J D - W|`` for the chart map to Darboux coordinates."""
    def chart_to_darboux(p):
        pt = ChartPoint.from_real(p)
        u, v = xi(pt.full)
        return darboux_coords(u, v, ode, variant)

    D = fields.central_jacobian(chart_to_darboux, point.real, h)
    return float(np.max(np.abs(D.T @ fields.J6 @ D - kahler_gram(point.real, ode))))


# ---------------------------------------------------------------------------
# the non-flatness report


def structure_field(ode: StenzelODE, h: float = fields.DEFAULT_H):
    """``(Re alpha field, Kaehler Gram field)`` on the chart."""
    form = fields.FormField(3, lambda p: holomorphic_volume_dense(p)[0], h=h)
    return form, (lambda p: kahler_gram(p, ode))


@dataclass
class StenzelReport:
    c: float
    ode_max_residual: float
    ratio_min: float
    ratio_max: float
    ratio_spread: float
    lam_max: float
    curvature: fields.CurvatureReport
    flat_reference: fields.CurvatureReport
    noise_ratio: float
    darboux_defect: dict
    tau_check: float

    @property
    def nonflat(self) -> bool:
        return self.noise_ratio > 10

    def to_dict(self) -> dict:
        cur = self.curvature.to_dict()
        return {
            "c": self.c,
            "odeMaxResidual": self.ode_max_residual,
            "cyRatio": {"min": self.ratio_min, "max": self.ratio_max,
                        "relativeSpread": self.ratio_spread},
            "lambdaMax": self.lam_max,
            "elliptic": self.lam_max < 0,
            "maxClosednessDefectOmega": cur["maxClosednessDefectOmega"],
            "maxClosednessDefectDual": cur["maxClosednessDefectDual"],
            "maxRiemannNorm": cur["maxRiemannNorm"],
            "flatNoiseFloor": self.flat_reference.max_riemann,
            "curvatureOverNoise": self.noise_ratio,
            "verdict": cur["verdict"],
            "nonFlat": self.nonflat,
            "darbouxDefect": self.darboux_defect,
            "tauUnderXiMaxError": self.tau_check,
            "curvatureReport": cur,
            "flatReferenceReport": self.flat_reference.to_dict(),
        }


def stenzel_report(ode: StenzelODE, samples: int = 50, seed: int = 7,
                   curvature_samples: int = 12, closed_tol: float = 1e-3,
                   h: float = fields.DEFAULT_H) -> StenzelReport:
    pts = random_points(samples, seed, ode)
    ratios = [cy_ratio(p, ode) for p in pts]
    form, gram = structure_field(ode, h)
    curv_pts = [p.real for p in pts[:curvature_samples]]
    tol = fields.Tolerances(closed=closed_tol)
    rep = fields.local_constancy_report(form, curv_pts, tol, gram=gram)
    lam_max = rep.lam_range[1]
    # same pipeline on a flat elliptic structure with non-constant coefficients
    ref_form, ref_gram = fields.pulled_back_structure(
        hitchin.table1_representative(3), seed, eps=0.3, h=h)
    ref = fields.local_constancy_report(ref_form, curv_pts, tol, gram=ref_gram)
    floor = max(ref.max_riemann, np.finfo(float).tiny)
    dd = {v: max(darboux_defect(p, ode, v) for p in pts[:10]) for v in (TAU_XI, TAU_XI_ALT)}
    tau_err = 0.0
    for p in pts:
        u, v = xi(p.full)
        tau_err = max(tau_err, abs(tau(p.real) - tau_on_cotangent(v, TAU_XI)))
    return StenzelReport(ode.c, float(np.max(np.abs(ode.residual()))), float(min(ratios)),
                         float(max(ratios)), ratio_spread(ratios), lam_max, rep, ref,
                         rep.max_riemann / floor, dd, tau_err)
