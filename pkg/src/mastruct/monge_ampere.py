"""Symplectic Monge-Ampere equations on T*R^3 as effective 3-forms.

Coordinates on T*R^3 are ``(x1, x2, x3, p1, p2, p3)`` and map to basis indices
``0..5``. A function ``f`` on R^3 solves the equation of ``w`` when the
pullback of ``w`` by the section ``x -> (x, grad f(x))`` vanishes. Along that
section ``dp_i = sum_j H_ij dx_j``, so the pullback of a monomial ``b_I`` is
``det(S[I, :]) dx1^dx2^dx3`` with ``S = [Id; H]`` (a 6x3 matrix).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp
from scipy import integrate

from . import hitchin
from .exterior import EXACT, FLOAT, Form, basis, evaluate, pullback, wedge
from .symplectic import is_effective, omega, theta

BUILTINS = ("hess", "special-lagrangian", "pseudo", "chynoweth-sewell")


@dataclass(frozen=True)
class MAEquation:
    name: str
    omega: Form
    gamma: object = None

    def __post_init__(self):
        if not is_effective(self.omega):
            raise ValueError(f"equation {self.name!r}: form is not effective")


def _exact(g) -> Fraction:
    if isinstance(g, float):
        return Fraction(repr(g))
    return Fraction(g)


def _m(*idx):
    return basis(*idx)


def builtin(name: str, gamma=1) -> MAEquation:
    """Constant-coefficient equations from the normal forms and the
    semi-geostrophic example.

    ``hess``:               det(Hess f) = gamma
    ``special-lagrangian``: Delta f - gamma det(Hess f) = 0
    ``pseudo``:             box f + gamma det(Hess f) = 0
    ``chynoweth-sewell``:   f_xx f_yy - f_xy^2 + f_zz = gamma (gamma = 0 allowed)
    """
    g = _exact(gamma)
    x1, x2, x3, p1, p2, p3 = 0, 1, 2, 3, 4, 5
    if name not in BUILTINS:
        raise ValueError(f"unknown equation {name!r}; choose from {', '.join(BUILTINS)}")
    if name != "chynoweth-sewell" and g == 0:
        raise ValueError(f"equation {name!r} needs gamma != 0")
    if name == "hess":
        w = _m(p1, p2, p3) - _m(x1, x2, x3) * g
    elif name == "special-lagrangian":
        w = (wedge(_m(p1), _m(x2, x3)) + wedge(wedge(_m(x1), _m(p2)), _m(x3))
             + _m(x1, x2, p3) - _m(p1, p2, p3) * g)
    elif name == "pseudo":
        w = (wedge(_m(p1), _m(x2, x3)) + wedge(_m(p2), _m(x1, x3))
             + wedge(_m(p3), _m(x1, x2)) + _m(p1, p2, p3) * g)
    else:
        # (x, y, z, p, q, h) = (x1, x2, x3, p1, p2, p3)
        w = (wedge(_m(p1, p2), _m(x3)) + wedge(_m(x1, x2), _m(p3))
             - _m(x1, x2, x3) * g)
    return MAEquation(name, w, g)


def chynoweth_sewell_map(gamma) -> np.ndarray:
    """Linear symplectic map ``(x,y,z,p,q,h) -> (x, y, h, p, q, gamma h - z)``."""
    g = _exact(gamma)
    M = np.full((6, 6), Fraction(0), dtype=object)
    for i, j in ((0, 0), (1, 1), (2, 5), (3, 3), (4, 4)):
        M[i, j] = Fraction(1)
    M[5, 5] = g
    M[5, 2] = Fraction(-1)
    return M


def section_matrix(H) -> np.ndarray:
    """``[Id; H]``: columns are the pushed-forward coordinate vectors."""
    H = np.asarray(H)
    top = np.eye(3, dtype=H.dtype) if H.dtype != object else np.array(
        [[Fraction(int(i == j)) for j in range(3)] for i in range(3)], dtype=object)
    return np.vstack([top, H])


def _det3(A):
    return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
            - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
            + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))


def operator_value(w: Form, H):
    """Coefficient of ``dx1^dx2^dx3`` in the pullback of ``w`` along a section
    with Hessian ``H``. Works for floats, Fractions and sympy symbols."""
    S = section_matrix(H)
    total = 0
    for I, c in w.items():
        total = total + c * _det3(S[list(I), :])
    return total


def symbolic_pde(eq: MAEquation) -> sp.Expr:
    """The operator with an indeterminate symmetric Hessian ``f_ij``."""
    f = {}
    for i in range(3):
        for j in range(i, 3):
            f[i, j] = f[j, i] = sp.Symbol(f"f_{i + 1}{j + 1}")
    H = np.array([[f[i, j] for j in range(3)] for i in range(3)], dtype=object)
    w = eq.omega
    expr = 0
    S = section_matrix(H)
    for I, c in w.items():
        expr += sp.Rational(c.numerator, c.denominator) * sp.expand(_det3(S[list(I), :]))
    return sp.expand(expr)


# ---------------------------------------------------------------------------
# candidate solutions and surfaces


def _fd_hessian(grad: Callable, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    H = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        H[:, j] = (np.asarray(grad(x + e)) - np.asarray(grad(x - e))) / (2 * h)
    return 0.5 * (H + H.T)


def _fd_gradient(value: Callable, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        g[j] = (value(x + e) - value(x - e)) / (2 * h)
    return g


@dataclass(frozen=True)
class CandidateSolution:
    """A function on R^3 with optional exact gradient/Hessian callbacks."""
    value: Callable[[np.ndarray], float] | None = None
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    region: Callable[[np.ndarray], bool] | None = None
    name: str = "user"

    def grad(self, x):
        if self.gradient is not None:
            return np.asarray(self.gradient(x), dtype=float)
        return _fd_gradient(self.value, x)

    def hess(self, x):
        if self.hessian is not None:
            return np.asarray(self.hessian(x), dtype=float)
        if self.gradient is not None:
            return _fd_hessian(self.gradient, x)
        return _fd_hessian(lambda y: _fd_gradient(self.value, y, 1e-4), x, 1e-4)


def residual(eq: MAEquation, f: CandidateSolution, x) -> float:
    return float(operator_value(eq.omega.to_float(), f.hess(np.asarray(x, dtype=float))))


def quadratic_solution(H) -> CandidateSolution:
    H = np.asarray(H, dtype=float)
    return CandidateSolution(
        value=lambda x: 0.5 * x @ H @ x,
        gradient=lambda x: H @ x,
        hessian=lambda x: H,
        name="quadratic",
    )


def _sigma2(x):
    return x[0] * x[1] + x[1] * x[2] + x[2] * x[0]


def integral_solution(a: float = 1.0, b: float = 1.0) -> CandidateSolution:
    """``f = int_a^{sqrt(xy+yz+zx)} (b + 4 s^3)^{1/3} ds``, a solution of det Hess f = 1."""

    def alpha(r):
        return 0.5 * np.cbrt(b / r**3 + 4.0)

    def dalpha(r):
        return -0.5 * b * r**-4 * np.cbrt(b / r**3 + 4.0) ** -2

    def value(x):
        r = np.sqrt(_sigma2(x))
        return integrate.quad(lambda s: np.cbrt(b + 4 * s**3), a, r)[0]

    def gradient(x):
        r = np.sqrt(_sigma2(x))
        S = np.array([x[1] + x[2], x[0] + x[2], x[0] + x[1]])
        return alpha(r) * S

    def hessian(x):
        r = np.sqrt(_sigma2(x))
        S = np.array([x[1] + x[2], x[0] + x[2], x[0] + x[1]])
        return dalpha(r) * np.outer(S, S) / (2 * r) + alpha(r) * (1 - np.eye(3))

    return CandidateSolution(value, gradient, hessian, region=lambda x: _sigma2(x) > 0.25,
                             name="hess-integral")


def chynoweth_sewell_regular() -> CandidateSolution:
    """``sqrt(x^2 + 2y)^3 / 3 - z^2 / 2`` (the gamma = 0 equation)."""

    def value(x):
        s = x[0] ** 2 + 2 * x[1]
        return s**1.5 / 3 - x[2] ** 2 / 2

    def gradient(x):
        s = np.sqrt(x[0] ** 2 + 2 * x[1])
        return np.array([x[0] * s, s, -x[2]])

    def hessian(x):
        s = np.sqrt(x[0] ** 2 + 2 * x[1])
        return np.array([[s + x[0] ** 2 / s, x[0] / s, 0.0],
                         [x[0] / s, 1 / s, 0.0],
                         [0.0, 0.0, -1.0]])

    return CandidateSolution(value, gradient, hessian,
                             region=lambda x: x[0] ** 2 + 2 * x[1] > 0.1,
                             name="chynoweth-sewell-regular")


@dataclass(frozen=True)
class ParamSurface:
    """A parametrized 3-fold ``L: R^3 -> R^6``."""
    map: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    region: Callable[[np.ndarray], bool] | None = None
    name: str = "user"

    def jacobian(self, s, h: float = 1e-6) -> np.ndarray:
        if self.jac is not None:
            return np.asarray(self.jac(s), dtype=float)
        J = np.empty((6, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            J[:, j] = (np.asarray(self.map(s + e)) - np.asarray(self.map(s - e))) / (2 * h)
        return J


def graph_surface(f: CandidateSolution) -> ParamSurface:
    return ParamSurface(lambda x: np.concatenate([x, f.grad(x)]),
                        lambda x: section_matrix(f.hess(x)).astype(float),
                        f.region, name=f"graph({f.name})")


def chynoweth_sewell_generalized(b: float = 1.0, gamma: float = 0.0) -> ParamSurface:
    """``L = (x, y, (x+y)a, (y+z)a, (z+x)a, gamma (x+y)a - z)``.

    This is the image of the graph of the integral solution under the linear
    symplectic change of variables, so its Jacobian is ``M [Id; Hess f]``.
    """
    f = integral_solution(1.0, b)
    M = np.array(chynoweth_sewell_map(gamma), dtype=float)

    def alpha(x):
        return 0.5 * np.cbrt(b / _sigma2(x) ** 1.5 + 4.0)

    def lmap(x):
        a = alpha(x)
        X, Y, Z = x
        return np.array([X, Y, (X + Y) * a, (Y + Z) * a, (Z + X) * a, gamma * (X + Y) * a - Z])

    def jac(x):
        return M @ section_matrix(f.hess(x))

    return ParamSurface(lmap, jac, f.region, name="chynoweth-sewell-generalized")


@dataclass
class GeneralizedReport:
    passed: bool
    max_symplectic: float
    max_form: float
    samples: int
    flagged: list = field(default_factory=list)


def check_generalized(eq: MAEquation, L: ParamSurface, samples, tol: float = 1e-6
                      ) -> GeneralizedReport:
    """Lagrangian test (``L^* Omega = 0``) and ``L^* w = 0`` at each sample."""
    O = omega(FLOAT)
    w = eq.omega.to_float()
    max_s = max_f = 0.0
    flagged = []
    n = 0
    for s in samples:
        s = np.asarray(s, dtype=float)
        J = L.jacobian(s)
        if np.linalg.matrix_rank(J, tol=1e-9) < 3:
            flagged.append(s.tolist())
            continue
        cols = [J[:, j] for j in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                max_s = max(max_s, abs(evaluate(O, cols[i], cols[j])))
        max_f = max(max_f, abs(evaluate(w, *cols)))
        n += 1
    return GeneralizedReport(max_s < tol and max_f < tol and n > 0, max_s, max_f, n, flagged)


def sample_region(region: Callable | None, box, count: int, seed: int) -> np.ndarray:
    """Rejection-sample ``count`` points of ``box`` (3 intervals) inside ``region``."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    pts = []
    tries = 0
    while len(pts) < count:
        x = lo + (hi - lo) * rng.random(3)
        tries += 1
        if region is None or region(x):
            pts.append(x)
        if tries > 1000 * count:
            raise ValueError("safe region is (nearly) empty inside the box")
    return np.array(pts)


# ---------------------------------------------------------------------------
# geometric structure


def geometric_structure(eq: MAEquation) -> dict:
    """Invariants of a constant-coefficient equation and the wedge identities
    behind the associated (pseudo) Calabi-Yau data, with measured constants."""
    w0 = eq.omega
    data = hitchin.hitchin_data(w0)
    if data.lam == 0:
        raise ValueError("degenerate structure")
    w = hitchin.normalize(w0)
    d = hitchin.decompose(w)
    dual = hitchin.dual(w)
    cls = hitchin.classify(w0)
    th = theta(FLOAT)[tuple(range(6))]
    O = omega(w.mode)
    O3 = wedge(wedge(O, O), O)[tuple(range(6))]
    top = tuple(range(6))
    report = {
        "equation": eq.name,
        "gamma": eq.gamma,
        "type": "hyperbolic" if data.lam > 0 else "elliptic",
        "orbit": cls.label,
        "lambda": data.lam,
        "normalized": w,
        "dual": dual,
        "decomposition": d,
        "qK": data.qK,
        "signatureQK": hitchin.signature(data.qK),
        "pde": str(symbolic_pde(eq)),
    }
    checks = {"omega_wedge_dual_over_theta": float(wedge(w, dual)[top]) / th}
    if d.kind == "hyperbolic":
        ab = float(wedge(d.alpha, d.beta)[top])
        checks["alpha_wedge_beta_over_theta"] = ab / th
        # real pseudo Calabi-Yau normalization alpha ^ beta = -Omega^3 / 6
        checks["alpha_wedge_beta_over_minus_Omega3_6"] = ab / (-float(O3) / 6)
    else:
        # alpha ^ conj(alpha) = -2i Re ^ Im; compare Omega^3 with (-3i/4) alpha ^ conj(alpha)
        re_im = float(wedge(d.alpha_re, d.alpha_im)[top])
        a_abar_over_i = -2 * re_im
        checks["alpha_wedge_alphabar_over_i_theta"] = a_abar_over_i / th
        ratio = float(O3) / (0.75 * a_abar_over_i)
        checks["Omega3_over_minus_3i_4_alpha_alphabar"] = ratio
        # same ratio for alpha without the 1/2 factor (alpha ^ conj(alpha) grows by 4)
        checks["Omega3_over_minus_3i_4_alpha_alphabar_unhalved"] = ratio / 4
    report["checks"] = checks
    return report
