"""The standard symplectic structure on V and the Lefschetz-type operators.

``Omega = e1*^f1* + e2*^f2* + e3*^f3*``. ``top`` wedges with Omega and
``bot`` contracts with the dual bivector ``sum_i e_i ^ f_i`` using
``i_{X^Y} = i_Y o i_X``; with that choice ``bot(Omega) = 3`` and
``[bot, top] = (3 - k)`` on k-forms.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import linalg
from .exterior import (DIM, EXACT, FLOAT, DegreeError, Form, basis, interior,
                       pullback, unit, wedge)

N = 3
EFFECTIVE_TOL = 1e-10


def omega(mode: str = EXACT) -> Form:
    return sum((basis(i, i + N, mode=mode) for i in range(1, N)), basis(0, N, mode=mode))


def theta(mode: str = EXACT) -> Form:
    """Volume form ``-Omega^3 / 6``; equals ``e1*^e2*^e3*^f1*^f2*^f3*``."""
    O = omega(mode)
    return -(wedge(wedge(O, O), O)) / 6


def bivector() -> list[tuple[int, int, int]]:
    """``X_Omega`` as ``(sign, i, j)`` triples meaning ``sign * b_i ^ b_j``."""
    return [(1, i, i + N) for i in range(N)]


def omega_matrix(exact: bool = True) -> np.ndarray:
    """Gram matrix ``J`` with ``Omega(X, Y) = X^T J Y``."""
    J = linalg.zeros((DIM, DIM), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(N):
        J[i, i + N] = one
        J[i + N, i] = -one
    return J


def top(a: Form) -> Form:
    if a.degree > DIM - 2:
        raise DegreeError(f"top of a {a.degree}-form overflows degree {DIM}")
    return wedge(a, omega(a.mode))


def bot(a: Form) -> Form:
    """Contraction with ``X_Omega``; forms of degree < 2 map to the zero scalar."""
    if a.degree < 2:
        return Form.zero(0, a.mode)
    out = Form.zero(a.degree - 2, a.mode)
    for sign, i, j in bivector():
        out = out + sign * interior(unit(j, a.mode), interior(unit(i, a.mode), a))
    return out


def is_effective(a: Form, tol: float = EFFECTIVE_TOL) -> bool:
    b = bot(a)
    eff = b.is_zero() if a.mode == EXACT else b.is_zero(tol)
    if a.degree == N:
        w = wedge(a, omega(a.mode))
        alt = w.is_zero() if a.mode == EXACT else w.is_zero(tol)
        if alt != eff:
            raise AssertionError("bot(a) = 0 and a ^ Omega = 0 disagree")
    return eff


def _bot_top_factor(j: int, r: int) -> int:
    # bot^r top^r w = prod_{s=1..r} s (n - j - s + 1) w for effective j-forms w,
    # from [bot, top] = (n - deg) applied r times.
    out = 1
    for s in range(1, r + 1):
        out *= s * (N - j - s + 1)
    return out


def _power(op, a: Form, r: int) -> Form:
    for _ in range(r):
        a = op(a)
    return a


def hodge_lepage(a: Form) -> list[Form]:
    """Components ``[w0, w1, ...]`` with ``a = sum_r top^r(w_r)``, all effective.

    The highest component is isolated first: ``bot^r`` kills every ``top^s w_s``
    with ``s < r`` and scales ``top^r w_r`` by a nonzero integer, so peeling
    from the top down is a triangular solve.
    """
    k = a.degree
    rmax = k // 2
    rmin = max(0, k - N)
    comps: dict[int, Form] = {}
    rest = a
    for r in range(rmax, rmin - 1, -1):
        j = k - 2 * r
        w = _power(bot, rest, r) / _bot_top_factor(j, r)
        comps[r] = w
        rest = rest - _power(top, w, r)
    if not rest.is_zero(0.0 if a.mode == EXACT else 1e-9 * max(1.0, a.max_abs())):
        raise AssertionError("Hodge-Lepage residual is not zero")
    return [comps.get(r, Form.zero(k - 2 * r, a.mode)) for r in range(rmax + 1)]


def effective_part(a: Form) -> Form:
    return hodge_lepage(a)[0]


def is_symplectic(M) -> bool:
    M = np.asarray(M)
    J = omega_matrix(linalg.is_exact(M))
    D = M.T @ J @ M - J
    if linalg.is_exact(M):
        return all(x == 0 for x in D.ravel())
    return bool(np.max(np.abs(D)) < 1e-9)


def _elementary(rng: np.random.Generator) -> np.ndarray:
    t = Fraction(int(rng.integers(-3, 4)) or 1, int(rng.integers(1, 5)))
    M = linalg.identity(DIM)
    kind = int(rng.integers(0, 3))
    i, j = (int(x) for x in rng.choice(N, size=2, replace=True))
    if kind == 0:
        # [[I, S], [0, I]] with S symmetric
        M[i, N + j] += t
        if i != j:
            M[j, N + i] += t
    elif kind == 1:
        M[N + i, j] += t
        if i != j:
            M[N + j, i] += t
    else:
        # diag(A, A^{-T}) with A = I + t E_ij
        if i == j:
            j = (i + 1) % N
        M[i, j] += t
        M[N + j, N + i] -= t
    return M


def random_symplectic(seed, depth: int = 10) -> np.ndarray:
    """Exact symplectic matrix: a product of ``depth`` elementary shears."""
    rng = np.random.default_rng(seed)
    M = linalg.identity(DIM)
    for _ in range(depth):
        M = M @ _elementary(rng)
    return M


def random_form(degree: int, rng: np.random.Generator, mode: str = EXACT,
                density: float = 1.0, span: int = 5) -> Form:
    """Random form with small rational (or float) coefficients."""
    from .exterior import monomials

    terms = {}
    for m in monomials(degree):
        if rng.random() <= density:
            if mode == EXACT:
                terms[m] = Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 4)))
            else:
                terms[m] = float(rng.normal())
    return Form(degree, terms, mode)


def random_effective(rng: np.random.Generator, mode: str = EXACT, density: float = 1.0) -> Form:
    return effective_part(random_form(N, rng, mode, density))


def symplectic_pullback(M, a: Form) -> Form:
    """Pullback that refuses non-symplectic matrices."""
    if not is_symplectic(M):
        raise ValueError("matrix is not symplectic")
    return pullback(M, a)


__all__ = [
    "omega", "theta", "bivector", "omega_matrix", "top", "bot", "is_effective",
    "hodge_lepage", "effective_part", "is_symplectic", "random_symplectic",
    "random_form", "random_effective", "symplectic_pullback", "FLOAT", "EXACT",
]
