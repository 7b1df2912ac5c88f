"""Invariants of effective 3-forms: K, the Hitchin pfaffian, the quadratic
invariants, the decomposition into decomposable pieces, the dual form and
the symplectic orbit classifier.

``K`` is defined by ``xi(K X) theta = xi ^ i_X w ^ w`` for all covectors
``xi``; with this sign ``K = diag(1, 1, 1, -1, -1, -1)`` for
``e123 + f123``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .exterior import (DIM, EXACT, FLOAT, DegreeError, Form, basis, interior,
                       monomials, pullback, unit, wedge)
from .symplectic import bot, is_effective, omega, omega_matrix

# q_K = QK_OVER_QLR * q_LR; fixed by the row-1 oracle and asserted on random forms.
QK_OVER_QLR = 2
# w ^ dual(w) = WEDGE_DUAL_CONSTANT * theta for normalized hyperbolic w.
WEDGE_DUAL_CONSTANT = -2
# dual(dual(w)) = DUAL_SQUARED_SIGN * w for normalized hyperbolic w.
DUAL_SQUARED_SIGN = -1

FULL = tuple(range(DIM))


def _require3(w: Form):
    if w.degree != 3:
        raise DegreeError(f"expected a 3-form, got degree {w.degree}")


def _top_coefficient(a: Form):
    return a[FULL]


def k_endomorphism(w: Form) -> np.ndarray:
    """Matrix of ``K_w`` acting on column vectors (column j is ``K b_j``)."""
    _require3(w)
    exact = w.mode == EXACT
    K = linalg.zeros((DIM, DIM), exact)
    for j in range(DIM):
        rho = wedge(interior(unit(j, w.mode), w), w)
        # b_k^* ^ rho = (-1)^k rho_{[6] minus k} theta
        for k in range(DIM):
            rest = FULL[:k] + FULL[k + 1:]
            c = rho[rest]
            K[k, j] = -c if k % 2 else c
    return K


def _trace_square(K):
    return sum(K[i, j] * K[j, i] for i in range(DIM) for j in range(DIM))


def pfaffian(w: Form):
    """Hitchin pfaffian ``Tr(K^2) / 6``."""
    return _trace_square(k_endomorphism(w)) / 6


def qk_matrix(K: np.ndarray) -> np.ndarray:
    """Gram matrix of ``(X, Y) -> Omega(K X, Y)``."""
    return K.T @ omega_matrix(linalg.is_exact(K))


_BOT2_PAIRING: np.ndarray | None = None


def _bot2_pairing() -> np.ndarray:
    """Integer matrix ``T[a, b] = bot^2(m_a ^ m_b)`` over 2-form monomials."""
    global _BOT2_PAIRING
    if _BOT2_PAIRING is None:
        mons = monomials(2)
        T = np.full((len(mons), len(mons)), Fraction(0), dtype=object)
        for a, ma in enumerate(mons):
            for b, mb in enumerate(mons):
                T[a, b] = bot(bot(wedge(basis(*ma), basis(*mb))))[()]
        _BOT2_PAIRING = T
    return _BOT2_PAIRING


def qlr_matrix(w: Form) -> np.ndarray:
    """Gram matrix of ``-1/8 bot^2(i_X w ^ i_Y w + i_Y w ^ i_X w)``.

    2-forms commute, so this is ``-1/4 bot^2(i_X w ^ i_Y w)``, a bilinear
    form ``C^T T C`` in the contraction matrix ``C``.
    """
    _require3(w)
    C = contraction_matrix(w)
    T = _bot2_pairing()
    if w.mode == EXACT:
        # integer arithmetic after clearing denominators
        L = math.lcm(*(c.denominator for c in C.ravel()))
        Ci = np.array([[int(c * L) for c in row] for row in C], dtype=object)
        Ti = np.array([[int(t) for t in row] for row in T], dtype=object)
        Q = Ci.T @ Ti @ Ci
        return np.array([[Fraction(-int(q), 4 * L * L) for q in row] for row in Q], dtype=object)
    return -0.25 * (np.asarray(C, float).T @ np.asarray(T, float) @ np.asarray(C, float))


def quadratic_invariants(w: Form) -> tuple[np.ndarray, np.ndarray]:
    _require3(w)
    if not is_effective(w):
        raise ValueError("q_w defined for effective forms only")
    return qk_matrix(k_endomorphism(w)), qlr_matrix(w)


@dataclass(frozen=True)
class HitchinData:
    K: np.ndarray
    lam: object
    qK: np.ndarray
    qLR: np.ndarray


def hitchin_data(w: Form) -> HitchinData:
    K = k_endomorphism(w)
    qK, qLR = quadratic_invariants(w)
    return HitchinData(K, _trace_square(K) / 6, qK, qLR)


def signature(q, tol: float | None = None) -> tuple[int, int, int]:
    if tol is None and not linalg.is_exact(q):
        tol = 1e-9 * max(1.0, float(np.max(np.abs(q))))
    return linalg.signature(q, tol)


def in_sp6(K) -> bool:
    """``Omega(K X, Y) + Omega(X, K Y) = 0`` for all X, Y."""
    Q = qk_matrix(K)
    D = Q - Q.T
    if linalg.is_exact(K):
        return all(x == 0 for x in D.ravel())
    return bool(np.max(np.abs(D)) < 1e-9)


def contraction_matrix(w: Form) -> np.ndarray:
    """Matrix of the linear map ``X -> i_X w`` (rows indexed by monomials)."""
    mons = monomials(w.degree - 1)
    cols = [interior(unit(j, w.mode), w) for j in range(DIM)]
    M = linalg.zeros((len(mons), DIM), w.mode == EXACT)
    for j, c in enumerate(cols):
        for r, m in enumerate(mons):
            M[r, j] = c[m]
    return M


def annihilator(w: Form, tol: float = 1e-9) -> list[list]:
    """Basis of ``{X : i_X w = 0}``."""
    M = contraction_matrix(w)
    return linalg.nullspace(M, None if w.mode == EXACT else tol)


def complex_annihilator(re: Form, im: Form, tol: float = 1e-9) -> np.ndarray:
    """Complex basis (rows) of ``{X in C^6 : i_X (re + i im) = 0}``."""
    A = np.array(contraction_matrix(re.to_float()), dtype=float)
    B = np.array(contraction_matrix(im.to_float()), dtype=float)
    Mc = A + 1j * B
    _, s, vh = np.linalg.svd(Mc)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return vh[rank:].conj()


def is_decomposable(w: Form) -> bool:
    return w.is_zero() or len(annihilator(w)) == DIM - w.degree


def is_lagrangian(vectors) -> bool:
    J = omega_matrix(False)
    V = np.array([[float(x) for x in v] for v in vectors])
    if V.size == 0:
        return True
    return bool(np.max(np.abs(V @ J @ V.T)) < 1e-9)


# ---------------------------------------------------------------------------
# decomposition and dual


@dataclass(frozen=True)
class Decomposition:
    kind: str  # "hyperbolic" | "elliptic"
    alpha: Form  # hyperbolic: alpha; elliptic: Re(alpha)
    beta: Form  # hyperbolic: beta; elliptic: Im(alpha)

    @property
    def alpha_re(self) -> Form:
        return self.alpha

    @property
    def alpha_im(self) -> Form:
        return self.beta


def _orientation(a: Form, b: Form):
    return wedge(a, b)[FULL]


def _scaled_kstar(w: Form, lam):
    """``|lam|^{-3/2} K^* w`` exactly when possible, else in float mode."""
    K = k_endomorphism(w)
    absl = abs(lam)
    if w.mode == EXACT:
        r = linalg.exact_sqrt(absl)
        if r is not None:
            return pullback(K, w) * (1 / (absl * r)), w
        w = w.to_float()
        K = np.array(K, dtype=float)
    s = float(absl) ** -1.5
    return pullback(K, w) * s, w


def decompose(w: Form) -> Decomposition:
    _require3(w)
    lam = pfaffian(w)
    if lam == 0 or (w.mode == FLOAT and abs(lam) < 1e-12):
        raise ValueError("degenerate form, no Hitchin decomposition")
    ks, w = _scaled_kstar(w, lam)
    if lam > 0:
        alpha = (w + ks) / 2
        beta = (w - ks) / 2
        if _orientation(alpha, beta) < 0:
            alpha, beta = beta, alpha
        return Decomposition("hyperbolic", alpha, beta)
    re = w / 2
    im = ks / 2
    # alpha ^ conj(alpha) = -2i re ^ im, so the orientation asks re ^ im < 0
    if _orientation(re, im) > 0:
        im = -im
    return Decomposition("elliptic", re, im)


def dual(w: Form) -> Form:
    d = decompose(w)
    if d.kind == "hyperbolic":
        return d.alpha - d.beta
    # i (conj(alpha) - alpha) = 2 Im(alpha)
    return d.beta * 2


def normalize(w: Form) -> Form:
    """``w / |lam|^{1/4}``; exact when the fourth root is rational."""
    lam = pfaffian(w)
    if lam == 0 or (w.mode == FLOAT and abs(lam) < 1e-300):
        raise ValueError("degenerate form, cannot normalize")
    if w.mode == EXACT:
        r = linalg.exact_root4(abs(lam))
        if r is not None:
            return w / r
        w = w.to_float()
    return w * (abs(float(lam)) ** -0.25)


def normalize_exact(w: Form) -> tuple[Form, Fraction]:
    """``(w, |lam|)``: the normalized form is ``w / |lam|^{1/4}``."""
    lam = pfaffian(w)
    if lam == 0:
        raise ValueError("degenerate form, cannot normalize")
    return w, abs(lam)


# ---------------------------------------------------------------------------
# Table 1 and the classifier


def table1_representative(row: int, gamma=1, mode: str = EXACT) -> Form:
    """Representative of the orbit ``row`` (1..9); ``gamma`` is ignored where unused."""
    g = Fraction(gamma) if mode == EXACT else float(gamma)
    e1, e2, e3, f1, f2, f3 = (basis(i, mode=mode) for i in range(DIM))

    def w3(a, b, c):
        return wedge(wedge(a, b), c)

    e123 = w3(e1, e2, e3)
    f123 = w3(f1, f2, f3)
    cross_pos = w3(f1, e2, e3) + w3(f2, e1, e3) + w3(f3, e1, e2)
    cross_neg = w3(f1, e2, e3) - w3(f2, e1, e3) + w3(f3, e1, e2)
    if row == 1:
        return e123 + f123 * g
    if row == 2:
        return cross_pos + f123 * (g * g)
    if row == 3:
        return cross_neg - f123 * (g * g)
    if row == 4:
        return cross_pos
    if row == 5:
        return cross_neg
    if row == 6:
        return w3(f3, e1, e2) + w3(f2, e1, e3)
    if row == 7:
        return w3(f3, e1, e2) - w3(f2, e1, e3)
    if row == 8:
        return e123
    if row == 9:
        return Form.zero(3, mode)
    raise ValueError(f"Table 1 has rows 1..9, not {row}")


class Kind(enum.Enum):
    ROW = "row"
    SIGN_VARIANT = "sign-variant"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class OrbitClass:
    kind: Kind
    row: int | None
    lam_sign: int
    signature: tuple[int, int, int]
    annihilator_dim: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def label(self) -> str:
        if self.kind is Kind.ROW:
            return f"Row{self.row}"
        if self.kind is Kind.SIGN_VARIANT:
            return f"SignVariant(Row{self.row})"
        return "Unclassified"


# (lambda sign, signature of qK) for each row; mirrored signatures give SignVariant.
_LAMBDA_ZERO_ROWS = {
    (2, 1, 3): 4,
    (0, 3, 3): 5,
    (1, 0, 5): 6,
    (0, 1, 5): 7,
}


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def classify(w: Form) -> OrbitClass:
    _require3(w)
    if not is_effective(w):
        raise ValueError("classify needs an effective 3-form")
    if w.mode == FLOAT:
        raise ValueError("classification runs on exact forms only")
    K = k_endomorphism(w)
    lam = _trace_square(K) / 6
    qK = qk_matrix(K)
    sig = signature(qK)
    ann = len(annihilator(w))
    s = _sign(lam)

    def make(kind, row):
        return OrbitClass(kind, row, s, sig, ann, {"lambda": lam})

    if w.is_zero():
        return make(Kind.ROW, 9)
    if ann == 3 and sig == (0, 0, 6):
        return make(Kind.ROW, 8)
    if s > 0:
        return make(Kind.ROW, 1) if sig == (3, 3, 0) else make(Kind.UNCLASSIFIED, None)
    if s < 0:
        if sig == (4, 2, 0):
            return make(Kind.ROW, 2)
        if sig == (2, 4, 0):
            return make(Kind.SIGN_VARIANT, 2)
        if sig == (0, 6, 0):
            return make(Kind.ROW, 3)
        if sig == (6, 0, 0):
            return make(Kind.SIGN_VARIANT, 3)
        return make(Kind.UNCLASSIFIED, None)
    if sig in _LAMBDA_ZERO_ROWS:
        return make(Kind.ROW, _LAMBDA_ZERO_ROWS[sig])
    mirrored = (sig[1], sig[0], sig[2])
    if mirrored in _LAMBDA_ZERO_ROWS:
        return make(Kind.SIGN_VARIANT, _LAMBDA_ZERO_ROWS[mirrored])
    return make(Kind.UNCLASSIFIED, None)


# ---------------------------------------------------------------------------
# dense float fast path (used by the field sampler)


def _bilinear_k_tensor() -> np.ndarray:
    """``T[k, j, I, J]`` with ``K[k, j] = sum T[k, j, I, J] w_I w_J``."""
    mons = monomials(3)
    n = len(mons)
    T = np.zeros((DIM, DIM, n, n))
    for a, b in itertools.product(range(n), repeat=2):
        wa = basis(*mons[a])
        wb = basis(*mons[b])
        for j in range(DIM):
            rho = wedge(interior(unit(j), wa), wb)
            if rho.is_zero():
                continue
            for k in range(DIM):
                rest = FULL[:k] + FULL[k + 1:]
                c = rho[rest]
                T[k, j, a, b] = float(-c if k % 2 else c)
    return T


_K_TENSOR: np.ndarray | None = None


def k_dense(coeffs: np.ndarray) -> np.ndarray:
    """Float ``K`` from a length-20 coefficient vector in :func:`monomials` order."""
    global _K_TENSOR
    if _K_TENSOR is None:
        _K_TENSOR = _bilinear_k_tensor()
    return np.einsum("kjab,a,b->kj", _K_TENSOR, coeffs, coeffs)


_MONS3 = np.array(monomials(3))
_ROWS = _MONS3[:, None, :, None]
_COLS = _MONS3[None, :, None, :]


def minors3(M: np.ndarray) -> np.ndarray:
    """All 3x3 minors ``det M[I, J]`` as a 20x20 array."""
    A = np.asarray(M, dtype=float)[_ROWS, _COLS]
    a, b, c = A[..., 0, :], A[..., 1, :], A[..., 2, :]
    return (a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
            - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
            + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0]))


def pullback3_dense(M: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Float pullback of a 3-form given densely."""
    return coeffs @ minors3(M)


def _complement_signs() -> tuple[np.ndarray, np.ndarray]:
    mons = monomials(3)
    pos = {m: i for i, m in enumerate(mons)}
    comp = np.empty(len(mons), dtype=int)
    sign = np.empty(len(mons))
    for i, m in enumerate(mons):
        rest = tuple(k for k in FULL if k not in m)
        comp[i] = pos[rest]
        sign[i] = float(wedge(basis(*m), basis(*rest))[FULL])
    return comp, sign


_COMP, _COMP_SIGN = _complement_signs()


def top_pairing_dense(a: np.ndarray, b: np.ndarray) -> float:
    """Coefficient of ``(a ^ b)`` on ``b1 ^ ... ^ b6`` for dense 3-forms."""
    return float(np.sum(_COMP_SIGN * a * b[_COMP]))
