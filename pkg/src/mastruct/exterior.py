"""Exterior algebra on the fixed 6-dimensional space V.

Basis vectors are ``(e1, e2, e3, f1, f2, f3)``. Internally they are indexed
``0..5`` (``0..2`` are the e's, ``3..5`` the f's); the JSON interchange format
uses 1-based indices. A :class:`Form` stores a sparse map from strictly
increasing index tuples to coefficients, which are either all
:class:`fractions.Fraction` (``mode="exact"``) or all ``float``
(``mode="float"``).

Operators: ``a + b``, ``a - b``, ``-a``, ``s * a`` and ``a ^ b`` (wedge).
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from numbers import Rational, Real
from typing import Iterable, Mapping, Sequence

import numpy as np

DIM = 6
EXACT = "exact"
FLOAT = "float"

E_IDX = (0, 1, 2)
F_IDX = (3, 4, 5)


class DegreeError(ValueError):
    pass


class ModeError(TypeError):
    pass


def _coerce(c, mode):
    if mode == EXACT:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, (int, Rational)) and not isinstance(c, bool):
            return Fraction(c)
        if isinstance(c, str):
            return Fraction(c)
        raise ModeError(f"cannot store {type(c).__name__} in an exact form")
    return float(c)


def sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple.

    Returns sign 0 if an index repeats.
    """
    if len(set(idx)) != len(idx):
        return 0, ()
    inv = sum(1 for i, j in itertools.combinations(range(len(idx)), 2) if idx[i] > idx[j])
    return (-1 if inv % 2 else 1), tuple(sorted(idx))


def monomials(k: int) -> list[tuple[int, ...]]:
    """All sorted index tuples of length ``k``, in lexicographic order."""
    return list(itertools.combinations(range(DIM), k))


class Form:
    """A homogeneous exterior form of fixed degree on V."""

    __slots__ = ("degree", "mode", "_terms", "_hash")

    def __init__(self, degree: int, terms: Mapping[tuple[int, ...], object] | None = None,
                 mode: str = EXACT):
        if not 0 <= degree <= DIM:
            raise DegreeError(f"degree {degree} outside 0..{DIM}")
        if mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown mode {mode!r}")
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise DegreeError(f"index tuple {idx} does not have length {degree}")
            if any(not 0 <= i < DIM for i in idx):
                raise ValueError(f"index out of range in {idx}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            c = _coerce(c, mode)
            if c != 0:
                clean[idx] = c
        self.degree = degree
        self.mode = mode
        self._terms = clean
        self._hash = None

    # construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, degree, terms, mode):
        obj = object.__new__(cls)
        obj.degree = degree
        obj.mode = mode
        obj._terms = {k: v for k, v in terms.items() if v != 0}
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, degree: int, mode: str = EXACT) -> "Form":
        return cls(degree, {}, mode)

    @classmethod
    def scalar(cls, c, mode: str = EXACT) -> "Form":
        return cls(0, {(): c}, mode)

    @classmethod
    def from_unsorted(cls, terms: Iterable[tuple[Sequence[int], object]], degree: int,
                      mode: str = EXACT) -> "Form":
        """Build a form from possibly unsorted/repeated index tuples."""
        acc: dict[tuple[int, ...], object] = {}
        for idx, c in terms:
            if len(idx) != degree:
                raise DegreeError(f"index tuple {tuple(idx)} does not have length {degree}")
            s, key = sort_sign(idx)
            if s:
                acc[key] = acc.get(key, 0) + s * _coerce(c, mode)
        return cls(degree, acc, mode)

    @classmethod
    def from_dense(cls, degree: int, coeffs: Sequence, mode: str = FLOAT) -> "Form":
        """Inverse of :meth:`dense` (coefficients in :func:`monomials` order)."""
        mons = monomials(degree)
        if len(coeffs) != len(mons):
            raise ValueError(f"expected {len(mons)} coefficients, got {len(coeffs)}")
        return cls(degree, dict(zip(mons, coeffs)), mode)

    # accessors ------------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __getitem__(self, idx) -> object:
        s, key = sort_sign(tuple(idx))
        zero = Fraction(0) if self.mode == EXACT else 0.0
        if len(idx) != self.degree or s == 0:
            return zero
        return s * self._terms.get(key, zero)

    def dense(self) -> np.ndarray:
        """Coefficient vector of length C(6, degree) in :func:`monomials` order."""
        dtype = object if self.mode == EXACT else float
        zero = Fraction(0) if self.mode == EXACT else 0.0
        return np.array([self._terms.get(m, zero) for m in monomials(self.degree)], dtype=dtype)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.mode == EXACT or tol == 0.0:
            return not self._terms
        return all(abs(c) <= tol for c in self._terms.values())

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def to_float(self) -> "Form":
        return Form._raw(self.degree, {k: float(v) for k, v in self._terms.items()}, FLOAT)

    def to_exact(self, max_denominator: int | None = None) -> "Form":
        if self.mode == EXACT:
            return self
        conv = (lambda v: Fraction(v).limit_denominator(max_denominator)) if max_denominator \
            else Fraction
        return Form(self.degree, {k: conv(v) for k, v in self._terms.items()}, EXACT)

    def map_coefficients(self, fn) -> "Form":
        return Form(self.degree, {k: fn(v) for k, v in self._terms.items()}, self.mode)

    # algebra --------------------------------------------------------------

    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            return NotImplemented
        if other.mode != self.mode:
            raise ModeError("mixed exact/float operands; call .to_float() explicitly")
        if other.degree != self.degree:
            raise DegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")
        return None

    def __add__(self, other):
        if (r := self._check(other)) is not None:
            return r
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0) + v
        return Form._raw(self.degree, terms, self.mode)

    def __neg__(self):
        return Form._raw(self.degree, {k: -v for k, v in self._terms.items()}, self.mode)

    def __sub__(self, other):
        if (r := self._check(other)) is not None:
            return r
        return self + (-other)

    def __mul__(self, s):
        if isinstance(s, Form):
            return NotImplemented
        if self.mode == EXACT:
            if isinstance(s, float):
                raise ModeError("float scalar on exact form; call .to_float() explicitly")
            s = _coerce(s, EXACT)
        elif isinstance(s, Real):
            s = float(s)
        else:
            raise TypeError(f"unsupported scalar {type(s).__name__}")
        return Form._raw(self.degree, {k: s * v for k, v in self._terms.items()}, self.mode)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if self.mode == EXACT:
            return self * (1 / _coerce(s, EXACT))
        return self * (1.0 / float(s))

    def __xor__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.degree, self.mode, self._terms) == (other.degree, other.mode, other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.degree, self.mode, frozenset(self._terms.items())))
        return self._hash

    def allclose(self, other: "Form", tol: float = 1e-10) -> bool:
        if self.degree != other.degree:
            return False
        a, b = self.to_float(), other.to_float()
        keys = set(a._terms) | set(b._terms)
        return all(abs(a._terms.get(k, 0.0) - b._terms.get(k, 0.0)) <= tol for k in keys)

    def __repr__(self):
        if not self._terms:
            return f"Form({self.degree}, 0)"
        names = ["e1", "e2", "e3", "f1", "f2", "f3"]
        parts = []
        for k in sorted(self._terms):
            mon = "^".join(names[i] for i in k) or "1"
            parts.append(f"{self._terms[k]}*{mon}")
        return " + ".join(parts)


def basis(*idx: int, mode: str = EXACT) -> Form:
    """The monomial covector ``b_{i1}^* ^ ... ^ b_{ik}^*`` (0-based indices)."""
    return Form.from_unsorted([(idx, 1)], len(idx), mode)


def wedge(a: Form, b: Form) -> Form:
    if a.mode != b.mode:
        raise ModeError("mixed exact/float operands; call .to_float() explicitly")
    deg = a.degree + b.degree
    if deg > DIM:
        raise DegreeError(f"wedge of degrees {a.degree} and {b.degree} exceeds {DIM}")
    acc: dict[tuple[int, ...], object] = {}
    for ia, ca in a._terms.items():
        sa = set(ia)
        for ib, cb in b._terms.items():
            if sa.intersection(ib):
                continue
            s, key = sort_sign(ia + ib)
            v = ca * cb
            acc[key] = acc.get(key, 0) + (v if s > 0 else -v)
    return Form._raw(deg, acc, a.mode)


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def _vec(X, mode):
    if len(X) != DIM:
        raise ValueError(f"vector must have {DIM} components")
    return [_coerce(x, mode) for x in X]


def interior(X: Sequence, a: Form) -> Form:
    """Contraction ``i_X a``; the slot filled is the first one."""
    if a.degree == 0:
        raise DegreeError("cannot contract scalar")
    X = _vec(X, a.mode)
    acc: dict[tuple[int, ...], object] = {}
    for idx, c in a._terms.items():
        for pos, i in enumerate(idx):
            if X[i] == 0:
                continue
            key = idx[:pos] + idx[pos + 1:]
            v = X[i] * c
            acc[key] = acc.get(key, 0) + (-v if pos % 2 else v)
    return Form._raw(a.degree - 1, acc, a.mode)


def unit(i: int, mode: str = EXACT) -> list:
    one, zero = (Fraction(1), Fraction(0)) if mode == EXACT else (1.0, 0.0)
    return [one if j == i else zero for j in range(DIM)]


def _det(rows):
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    total = 0
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def pullback(M, a: Form) -> Form:
    """``(M^* a)(X1, ..., Xk) = a(M X1, ..., M Xk)``.

    ``M`` acts on column vectors; the coefficient of ``b_J`` in ``M^* b_I`` is
    the minor ``det M[I, J]``.
    """
    M = np.asarray(M)
    if M.shape != (DIM, DIM):
        raise ValueError("pullback needs a 6x6 matrix")
    k = a.degree
    if k == 0:
        return a
    conv = (lambda v: _coerce(v, a.mode))
    rows = [[conv(v) for v in row] for row in M.tolist()]
    targets = monomials(k)
    acc: dict[tuple[int, ...], object] = {}
    for I, c in a._terms.items():
        sub = [rows[i] for i in I]
        for J in targets:
            d = _det([[r[j] for j in J] for r in sub])
            if d != 0:
                acc[J] = acc.get(J, 0) + c * d
    return Form._raw(k, acc, a.mode)


def evaluate(a: Form, *vectors: Sequence):
    """Multilinear, alternating evaluation ``a(X1, ..., Xk)``."""
    if len(vectors) != a.degree:
        raise ValueError(f"form of degree {a.degree} needs {a.degree} vectors, got {len(vectors)}")
    vs = [_vec(v, a.mode) for v in vectors]
    total = Fraction(0) if a.mode == EXACT else 0.0
    for idx, c in a._terms.items():
        total += c * _det([[v[i] for v in vs] for i in idx])
    return total


def dimension(k: int) -> int:
    return comb(DIM, k)
