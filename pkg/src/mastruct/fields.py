"""Point-sampled differential geometry on boxes in R^6.

Form fields are given by dense coefficient callbacks (``monomials(k)`` order)
and metric fields by 6x6 matrix callbacks. Derivatives come from exact
callbacks when supplied and from central differences otherwise.

The local-constancy report is a sampled necessary-condition check: it
measures ``d w``, ``d w_hat`` and the curvature of ``q_w`` at the given
points and compares them with tolerances. It proves nothing off the samples.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import hitchin
from .exterior import DIM, FLOAT, Form, monomials, sort_sign
from .symplectic import omega_matrix

DEFAULT_H = 1e-4
J6 = np.array(omega_matrix(False), dtype=float)

Vec = np.ndarray


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != DIM or len(self.hi) != DIM:
            raise ValueError("a box needs 6 intervals")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("empty box")

    @classmethod
    def cube(cls, half: float, center=None) -> "Box":
        c = np.zeros(DIM) if center is None else np.asarray(center, dtype=float)
        return cls(tuple(c - half), tuple(c + half))

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        return cls(tuple(float(a) for a, _ in intervals), tuple(float(b) for _, b in intervals))

    def require_interior(self, x, margin: float):
        x = np.asarray(x, dtype=float)
        if np.any(x - margin < np.asarray(self.lo)) or np.any(x + margin > np.asarray(self.hi)):
            raise DomainError(f"point {x.tolist()} is closer than {margin:g} to the boundary")

    def random(self, count: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return lo + (hi - lo) * rng.random((count, DIM))

    def grid(self, n: int) -> np.ndarray:
        axes = [np.linspace(a, b, n) for a, b in zip(self.lo, self.hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, DIM)


def central_jacobian(fun: Callable[[Vec], np.ndarray], x: Vec, h: float) -> np.ndarray:
    """``out[..., j] = d fun / d x_j`` by second-order central differences."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(DIM):
        e = np.zeros(DIM)
        e[j] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# form fields


@dataclass(frozen=True)
class FormField:
    degree: int
    coeffs: Callable[[Vec], np.ndarray]
    jacobian: Callable[[Vec], np.ndarray] | None = None  # (C(6,k), 6)
    h: float = DEFAULT_H
    box: Box | None = None

    @classmethod
    def constant(cls, w: Form, box: Box | None = None) -> "FormField":
        c = w.to_float().dense()
        z = np.zeros((len(c), DIM))
        return cls(w.degree, lambda x: c, lambda x: z, box=box)

    @classmethod
    def from_terms(cls, degree: int, terms: dict, derivs: dict | None = None, **kw) -> "FormField":
        """Coefficients given per monomial (0-based sorted tuples)."""
        mons = monomials(degree)
        pos = {m: i for i, m in enumerate(mons)}

        def coeffs(x):
            out = np.zeros(len(mons))
            for I, f in terms.items():
                out[pos[I]] = f(x)
            return out

        jac = None
        if derivs is not None:
            def jac(x):
                out = np.zeros((len(mons), DIM))
                for I, f in derivs.items():
                    out[pos[I]] = f(x)
                return out

        return cls(degree, coeffs, jac, **kw)

    def at(self, x) -> Form:
        return Form.from_dense(self.degree, np.asarray(self.coeffs(np.asarray(x, float))), FLOAT)

    def derivatives(self, x, h: float | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float)
        h = self.h if h is None else h
        if self.box is not None:
            self.box.require_interior(x, h)
        return central_jacobian(self.coeffs, x, h)


def _d_table(k: int):
    """Rows ``(I, j, J, sign)`` with ``dx_j ^ dx_I = sign dx_J``."""
    src = monomials(k)
    dst = {m: i for i, m in enumerate(monomials(k + 1))}
    table = []
    for a, I in enumerate(src):
        for j in range(DIM):
            s, J = sort_sign((j,) + I)
            if s:
                table.append((a, j, dst[J], s))
    return np.array(table, dtype=int).reshape(-1, 4)


_D_TABLES = {k: _d_table(k) for k in range(DIM)}


def d_dense(k: int, jac: np.ndarray) -> np.ndarray:
    """Dense ``d`` from the coefficient Jacobian of a k-form."""
    t = _D_TABLES[k]
    out = np.zeros(len(monomials(k + 1)))
    np.add.at(out, t[:, 2], t[:, 3] * jac[t[:, 0], t[:, 1]])
    return out


def exterior_derivative(F: FormField, x, h: float | None = None) -> Form:
    if F.degree >= DIM:
        return Form.zero(DIM, FLOAT) if F.degree == DIM else None
    return Form.from_dense(F.degree + 1, d_dense(F.degree, F.derivatives(x, h)), FLOAT)


def derivative_field(F: FormField, h: float | None = None) -> FormField:
    """``dF`` as a field (its own derivatives then fall back to differences)."""
    return FormField(F.degree + 1, lambda x: d_dense(F.degree, F.derivatives(x, h)),
                     h=F.h, box=F.box)


# ---------------------------------------------------------------------------
# metrics and curvature


@dataclass(frozen=True)
class MetricField:
    g: Callable[[Vec], np.ndarray]
    dg: Callable[[Vec], np.ndarray] | None = None  # (6, 6, 6), last axis = derivative
    h: float = DEFAULT_H
    box: Box | None = None

    @classmethod
    def constant(cls, G) -> "MetricField":
        G = np.asarray(G, dtype=float)
        z = np.zeros((DIM, DIM, DIM))
        return cls(lambda x: G, lambda x: z)

    def at(self, x) -> np.ndarray:
        G = np.asarray(self.g(np.asarray(x, float)), dtype=float)
        if np.max(np.abs(G - G.T)) > 1e-10 * max(1.0, np.max(np.abs(G))):
            raise ValueError("metric is not symmetric")
        return G

    def derivatives(self, x, h: float | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dg is not None:
            return np.asarray(self.dg(x), dtype=float)
        h = self.h if h is None else h
        if self.box is not None:
            self.box.require_interior(x, h)
        return central_jacobian(self.g, x, h)


def christoffel(g: MetricField, x, h: float | None = None) -> np.ndarray:
    """``Gamma[l, j, k]`` of the Levi-Civita connection."""
    G = g.at(x)
    if abs(np.linalg.det(G)) < 1e-12 or np.linalg.cond(G) > 1e12:
        raise np.linalg.LinAlgError(f"singular metric at {np.asarray(x).tolist()}")
    dG = g.derivatives(x, h)  # dG[m, k, j] = d_j g_mk
    # lowered[m, j, k] = d_j g_mk + d_k g_mj - d_m g_jk
    lowered = (np.einsum("mkj->mjk", dG) + dG - np.einsum("jkm->mjk", dG))
    return 0.5 * np.einsum("lm,mjk->ljk", np.linalg.inv(G), lowered)


def _gamma_derivative(g, x, h, step):
    return central_jacobian(lambda y: christoffel(g, y, h), x, step)


def _curvature(g: MetricField, x, h: float, richardson: bool):
    x = np.asarray(x, dtype=float)
    if g.box is not None:
        g.box.require_interior(x, 11 * h)
    Gam = christoffel(g, x, h)
    dGam = _gamma_derivative(g, x, h, 10 * h)  # [l, j, k, i]
    scale = float(np.max(np.abs(dGam)) + np.max(np.abs(Gam)) ** 2)
    if richardson:
        fine = _gamma_derivative(g, x, h, 5 * h)
        dGam = (4 * fine - dGam) / 3
    d = np.einsum("ljki->lijk", dGam)
    quad = np.einsum("lim,mjk->lijk", Gam, Gam)
    R = d - np.einsum("lijk->ljik", d) + quad - np.einsum("lijk->ljik", quad)
    return R, scale


def riemann(g: MetricField, x, h: float | None = None, richardson: bool = False) -> np.ndarray:
    """``R[l, i, j, k] = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik``.

    The derivative of Gamma uses central differences with step ``10 h``;
    ``richardson`` combines steps ``10 h`` and ``5 h``.
    """
    return _curvature(g, x, g.h if h is None else h, richardson)[0]


def curvature_scale(g: MetricField, x, h: float | None = None) -> float:
    """``max |dGamma| + max |Gamma|^2``: the size of the two terms of ``R``."""
    return _curvature(g, x, g.h if h is None else h, False)[1]


def norm(R: np.ndarray) -> float:
    return float(np.sqrt(np.sum(R * R)))


# ---------------------------------------------------------------------------
# pointwise Monge-Ampere structure


def symplectic_frame(W: np.ndarray) -> np.ndarray:
    """``P`` with ``P^T W P = J``: columns ``(e1, e2, e3, f1, f2, f3)``."""
    W = np.asarray(W, dtype=float)
    vecs = [v for v in np.eye(DIM)]
    es, fs = [], []
    while vecs:
        e = vecs.pop(0)
        vals = [abs(e @ W @ v) for v in vecs]
        if not vals or max(vals) < 1e-12:
            raise np.linalg.LinAlgError("degenerate 2-form")
        f = vecs.pop(int(np.argmax(vals)))
        f = f / (e @ W @ f)
        vecs = [v - (v @ W @ f) * e + (v @ W @ e) * f for v in vecs]
        es.append(e)
        fs.append(f)
    return np.column_stack(es + fs)


@dataclass(frozen=True)
class PointStructure:
    lam: float  # pfaffian of the raw form (relative to -Omega^3/6)
    normalized: np.ndarray  # dense 3-form
    dual: np.ndarray
    K: np.ndarray  # of the normalized form
    q: np.ndarray  # Omega(K X, Y) for the normalized form


def pointwise_structure(w: np.ndarray, gram: np.ndarray | None = None) -> PointStructure:
    """Normalize ``w`` and compute its dual and ``q`` at one point.

    With a non-Darboux ``gram`` the computation runs in a symplectic frame
    ``P`` and is mapped back: ``K = P K_f P^-1``, ``q = K^T W``.
    """
    w = np.asarray(w, dtype=float)
    if gram is None:
        P = Pinv = None
        wf = w
    else:
        P = symplectic_frame(gram)
        Pinv = np.linalg.inv(P)
        wf = hitchin.pullback3_dense(P, w)
    K = hitchin.k_dense(wf)
    lam = float(np.trace(K @ K) / 6)
    if lam == 0:
        raise ZeroDivisionError("degenerate form")
    s = abs(lam) ** -0.25
    wn = wf * s
    Kn = K * s * s
    ks = hitchin.pullback3_dense(Kn, wn)  # |lam_n| = 1
    dual = -np.sign(hitchin.top_pairing_dense(wn, ks)) * ks
    if P is None:
        return PointStructure(lam, wn, dual, Kn, Kn.T @ J6)
    Kx = P @ Kn @ Pinv
    return PointStructure(lam, hitchin.pullback3_dense(Pinv, wn),
                          hitchin.pullback3_dense(Pinv, dual), Kx, Kx.T @ gram)


class Verdict(enum.Enum):
    LOCALLY_CONSTANT = "LocallyConstant"
    NOT_LOCALLY_CONSTANT = "NotLocallyConstant"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Tolerances:
    closed: float = 1e-6
    curvature_rel: float = 1e-3
    curvature_abs: float = 1e-9
    lam: float = 1e-10


@dataclass
class CurvatureReport:
    samples: list
    max_riemann: float
    max_closed_omega: float
    max_closed_dual: float
    curvature_scale: float
    curvature_tol: float
    lam_range: tuple
    verdict: Verdict
    tolerances: Tolerances
    degenerate: list = field(default_factory=list)
    note: str = ("verdict holds within the stated tolerances at these samples only; "
                 "it is a sampled necessary-condition check, not a proof")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "samples": len(self.samples),
            "maxRiemannNorm": self.max_riemann,
            "maxClosednessDefectOmega": self.max_closed_omega,
            "maxClosednessDefectDual": self.max_closed_dual,
            "curvatureScale": self.curvature_scale,
            "curvatureTolerance": self.curvature_tol,
            "closednessTolerance": self.tolerances.closed,
            "lambdaRange": list(self.lam_range),
            "degeneratePoints": self.degenerate,
            "note": self.note,
        }


@dataclass(frozen=True)
class StructureFields:
    """Normalized form, dual and ``q`` as fields built from a raw 3-form field."""
    omega: FormField
    gram: Callable[[Vec], np.ndarray] | None = None

    def point(self, x) -> PointStructure:
        x = np.asarray(x, dtype=float)
        G = None if self.gram is None else np.asarray(self.gram(x), dtype=float)
        return pointwise_structure(self.omega.coeffs(x), G)

    def normalized(self) -> FormField:
        return FormField(3, lambda x: self.point(x).normalized, h=self.omega.h, box=self.omega.box)

    def dual(self) -> FormField:
        return FormField(3, lambda x: self.point(x).dual, h=self.omega.h, box=self.omega.box)

    def metric(self) -> MetricField:
        return MetricField(lambda x: self.point(x).q, h=self.omega.h, box=self.omega.box)


def local_constancy_report(omega_field: FormField, samples: Sequence, tol: Tolerances = Tolerances(),
                           gram: Callable[[Vec], np.ndarray] | None = None,
                           richardson: bool = False) -> CurvatureReport:
    """Closedness of the normalized form and its dual, and flatness of ``q``.

    ``gram`` is the Gram matrix field of the symplectic form (``None`` means
    the constant Darboux form).
    """
    st = StructureFields(omega_field, gram)
    wn, wd, q = st.normalized(), st.dual(), st.metric()
    h = omega_field.h
    pts = [np.asarray(s, dtype=float) for s in samples]
    max_r = max_cw = max_cd = scale = 0.0
    lams, degenerate = [], []
    for x in pts:
        try:
            lam = st.point(x).lam
        except ZeroDivisionError:
            lam = 0.0
        lams.append(lam)
        if abs(lam) <= tol.lam:
            degenerate.append(x.tolist())
            continue
        max_cw = max(max_cw, float(np.max(np.abs(d_dense(3, wn.derivatives(x, h))))))
        max_cd = max(max_cd, float(np.max(np.abs(d_dense(3, wd.derivatives(x, h))))))
        R, sc = _curvature(q, x, h, richardson)
        max_r = max(max_r, norm(R))
        scale = max(scale, sc)
    ctol = tol.curvature_rel * scale + tol.curvature_abs
    if degenerate:
        verdict = Verdict.INCONCLUSIVE
    elif max_cw <= tol.closed and max_cd <= tol.closed and max_r <= ctol:
        verdict = Verdict.LOCALLY_CONSTANT
    else:
        verdict = Verdict.NOT_LOCALLY_CONSTANT
    lam_range = (min(lams), max(lams)) if lams else (0.0, 0.0)
    return CurvatureReport([p.tolist() for p in pts], max_r, max_cw, max_cd, scale, ctol,
                           lam_range, verdict, tol, degenerate)


# ---------------------------------------------------------------------------
# flat reference structures and test metrics


def _quadratic_map(rng, eps):
    """``y = x + eps (B[x, x] / 2 + sin(C x))`` and its Jacobian."""
    B = rng.normal(size=(DIM, DIM, DIM))
    B = 0.5 * (B + np.einsum("ijk->ikj", B)) / DIM
    C = rng.normal(size=(DIM, DIM)) / DIM

    def fmap(x):
        return x + eps * (0.5 * np.einsum("ijk,j,k->i", B, x, x) + np.sin(C @ x))

    def jac(x):
        return np.eye(DIM) + eps * (np.einsum("ijk,k->ij", B, x) + np.cos(C @ x)[:, None] * C)

    return fmap, jac


def pulled_back_structure(w0: Form, seed: int, eps: float = 0.2, box: Box | None = None,
                          h: float = DEFAULT_H):
    """A flat structure with non-constant coefficients.

    ``w0`` (constant, Darboux) and ``Omega`` are pulled back by a random
    nonlinear diffeomorphism ``Psi``; returns ``(form field, gram field)``.
    """
    _, jac = _quadratic_map(np.random.default_rng(seed), eps)
    c0 = w0.to_float().dense()
    field_ = FormField(3, lambda x: hitchin.pullback3_dense(jac(x), c0), h=h, box=box)
    return field_, (lambda x: jac(x).T @ J6 @ jac(x))


def sheared_structure(w0: Form, seed: int, eps: float = 0.3, box: Box | None = None,
                      h: float = DEFAULT_H) -> FormField:
    """Pullback of ``w0`` by the symplectomorphism ``(x, p) -> (x, p + grad S(x))``
    with a random cubic ``S``; the Darboux form is unchanged."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    A = eps * (A + A.T) / 2
    T = rng.normal(size=(3, 3, 3))
    T = eps * sum(np.transpose(T, p) for p in
                  [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]) / 6
    c0 = w0.to_float().dense()

    def jac(x):
        D = np.eye(DIM)
        D[3:, :3] = A + np.einsum("ijk,k->ij", T, x[:3])
        return D

    return FormField(3, lambda x: hitchin.pullback3_dense(jac(x), c0), h=h, box=box)


def potential_metric(A: Callable, dA: Callable | None = None, h: float = DEFAULT_H,
                     box: Box | None = None) -> MetricField:
    """``g = [[0, A], [A^T, 0]]`` with ``A_ij = d^2 phi / dx_i dy_j``.

    ``dA(x)`` returns ``(3, 3, 6)`` derivatives (last axis over the 6 coordinates).
    """
    def g(p):
        a = A(p)
        G = np.zeros((DIM, DIM))
        G[:3, 3:] = a
        G[3:, :3] = a.T
        return G

    dg = None
    if dA is not None:
        def dg(p):
            d = dA(p)
            out = np.zeros((DIM, DIM, DIM))
            out[:3, 3:, :] = d
            out[3:, :3, :] = np.transpose(d, (1, 0, 2))
            return out

    return MetricField(g, dg, h, box)


def separable_potential(seed: int, eps: float = 0.2):
    """``phi = sum_l u_l(x) v_l(y)`` with random cubics near the identity,
    so ``A(x, y) = G(x) F(y)``; returns ``(A, dA)``."""
    rng = np.random.default_rng(seed)

    def cubic():
        B = eps * rng.normal(size=(3, 3, 3))
        B = 0.5 * (B + np.transpose(B, (0, 2, 1)))
        C = eps * rng.normal(size=(3, 3, 3, 3)) / 3
        C = sum(np.transpose(C, (0,) + p) for p in
                [(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]) / 6

        def D(z):  # D[l, i] = d_i u_l
            return np.eye(3) + np.einsum("lij,j->li", B, z) + 0.5 * np.einsum("lijk,j,k->li", C, z, z)

        def dD(z):  # dD[l, i, k]
            return B + np.einsum("lijk,j->lik", C, z)

        return D, dD

    Du, dDu = cubic()
    Dv, dDv = cubic()

    def A(p):
        return Du(p[:3]).T @ Dv(p[3:])

    def dA(p):
        out = np.zeros((3, 3, DIM))
        out[:, :, :3] = np.einsum("lik,lj->ijk", dDu(p[:3]), Dv(p[3:]))
        out[:, :, 3:] = np.einsum("li,ljk->ijk", Du(p[:3]), dDv(p[3:]))
        return out

    return A, dA


def nonseparable_potential(seed: int, eps: float = 0.3):
    """``phi = sum x_i y_i + eps sum c_ij x_i^2 y_j^2``; returns ``(A, dA)``."""
    c = np.random.default_rng(seed).normal(size=(3, 3))

    def A(p):
        x, y = p[:3], p[3:]
        return np.eye(3) + 4 * eps * c * np.outer(x, y)

    def dA(p):
        x, y = p[:3], p[3:]
        out = np.zeros((3, 3, DIM))
        for k in range(3):
            out[k, :, k] = 4 * eps * c[k] * y
            out[:, k, 3 + k] = 4 * eps * c[:, k] * x
        return out

    return A, dA
