from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mastruct import linalg
from mastruct.exterior import EXACT, Form, basis, monomials, pullback, wedge
from mastruct.hitchin import table1_representative
from mastruct.symplectic import (bot, hodge_lepage, is_effective, is_symplectic, omega,
                                 random_effective, random_form, random_symplectic,
                                 symplectic_pullback, theta, top)

from conftest import exact_forms, seeds


def test_theta_is_minus_omega_cubed_over_six():
    O = omega()
    assert theta() == wedge(wedge(O, O), O) / -6
    assert theta() == basis(0, 1, 2, 3, 4, 5)


def test_top_examples():
    assert top(Form.scalar(1)) == omega()
    assert top(basis(0)) == basis(0, 1, 4) + basis(0, 2, 5)
    assert top(omega()) == wedge(omega(), omega())


def test_bot_examples():
    assert bot(omega()) == Form.scalar(3)
    assert bot(basis(0, 1)).is_zero()
    assert bot(basis(0, 1, 2)).is_zero()
    assert bot(basis(0)).is_zero() and bot(Form.scalar(5)).is_zero()


def test_effectiveness_examples():
    assert is_effective(table1_representative(1))
    assert not is_effective(omega())
    assert not is_effective(top(basis(0)))


@given(exact_forms())
def test_commutator_identity(a):
    k = a.degree
    lhs = (bot(top(a)) if k <= 4 else Form.zero(k)) - (top(bot(a)) if k >= 2 else Form.zero(k))
    if k <= 4 and k >= 2:
        assert lhs == a * (3 - k)
    elif k < 2:
        assert bot(top(a)) == a * (3 - k)
    else:
        assert -top(bot(a)) == a * (3 - k)


def _operator_rank(op, k_in, k_out):
    mons_out = {m: i for i, m in enumerate(monomials(k_out))}
    cols = []
    for m in monomials(k_in):
        img = op(basis(*m) if m else Form.scalar(1))
        col = [Fraction(0)] * len(mons_out)
        for I, c in img.items():
            col[mons_out[I]] = c
        cols.append(col)
    return linalg.rank(np.array(cols, dtype=object).T)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_top_injective_low_degree(k):
    assert _operator_rank(top, k, k + 2) == len(monomials(k))


@pytest.mark.parametrize("k", [4, 5, 6])
def test_bot_injective_high_degree(k):
    assert _operator_rank(bot, k, k - 2) == len(monomials(k))


def test_hodge_lepage_examples():
    w = table1_representative(2)
    assert hodge_lepage(w) == [w, Form.zero(1)]
    assert hodge_lepage(top(basis(0))) == [Form.zero(3), basis(0)]
    assert hodge_lepage(w + top(basis(1))) == [w, basis(1)]


@given(exact_forms())
def test_hodge_lepage_all_degrees(a):
    comps = hodge_lepage(a)
    total = Form.zero(a.degree)
    for r, w in enumerate(comps):
        assert is_effective(w)
        t = w
        for _ in range(r):
            t = top(t)
        total = total + t
        assert hodge_lepage(w)[0] == w
    assert total == a


def test_hodge_lepage_degree3_bottom_peel(rng):
    for _ in range(20):
        a = random_form(3, rng)
        w0, w1 = hodge_lepage(a)
        assert w1 == bot(a) / 2
        assert w0 == a - top(w1)


@given(seeds)
def test_random_symplectic_preserves_omega(seed):
    M = random_symplectic(seed)
    assert pullback(M, omega()) == omega()
    assert linalg.det(M) == 1
    assert is_symplectic(M)


def test_random_symplectic_depth_zero_is_identity():
    M = random_symplectic(5, depth=0)
    assert all(M[i, j] == (1 if i == j else 0) for i in range(6) for j in range(6))


@given(seeds, seeds)
def test_effectiveness_survives_symplectic_pullback(s1, s2):
    w = random_effective(np.random.default_rng(s1))
    assert is_effective(symplectic_pullback(random_symplectic(s2, depth=5), w))


def test_symplectic_pullback_rejects_other_matrices():
    M = linalg.identity(6)
    M[0, 0] = Fraction(2)
    with pytest.raises(ValueError):
        symplectic_pullback(M, omega())


def test_float_effectiveness_tolerance(rng):
    w = random_effective(rng).to_float()
    assert is_effective(w)
    assert not is_effective(w + basis(0, 1, 3, mode="float") * 1e-6)
