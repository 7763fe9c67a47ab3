"""Hat-basis projection properties and the linearized operator assembly."""

import math

import numpy as np
import pytest

from rigdens.hatbasis import (
    HatBasis,
    assemble_linearized,
    op_distance_bound,
    project_hat,
)
from rigdens.intervals import iv
from rigdens.maps import LYCoefficientsLip, ly_coefficients_lip
from rigdens.ulam import markovize


def test_project_constant():
    c = project_hat([2.5] * 8)
    assert np.allclose(c, 2.5, atol=1e-15)


def test_project_single_hat_k4():
    # f = phi_1: self-coefficient 2/3, neighbours 1/6
    c = project_hat([0.0, 1.0, 0.0, 0.0])
    assert np.allclose(c, [1 / 6, 2 / 3, 1 / 6, 0.0], atol=1e-15)


def test_partition_of_unity():
    basis = HatBasis(16)
    rng = np.random.default_rng(2)
    for x in rng.uniform(0, 1, size=10_000):
        s = sum(basis.eval_hat(i, x) for i in range(16))
        assert abs(s - 1.0) <= 2 * math.ulp(1.0)


def _rand_lipschitz(rng, k):
    """Node samples of a random Lipschitz function on the circle."""
    f = np.cumsum(rng.uniform(-1, 1, size=k))
    f -= np.linspace(0, f[-1] + rng.uniform(-1, 1), k)  # close up the loop
    return f


def _lip_const(f, k):
    d = np.abs(np.diff(np.append(f, f[0])))
    return d.max() * k


def test_projection_three_properties():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        k = int(rng.integers(4, 64))
        f = _rand_lipschitz(rng, k)
        c = project_hat(f)
        lip_f = _lip_const(f, k)
        lip_c = _lip_const(c, k)
        assert lip_c <= lip_f * (1 + 1e-12)
        assert np.abs(c).max() <= np.abs(f).max() * (1 + 1e-12)
        # both are piecewise linear on the node grid: sup of the difference
        # is attained at the nodes
        assert np.abs(c - f).max() <= lip_f / k * (1 + 1e-12)


def test_linear_map_matrix_is_exact(quadrupling):
    lm = assemble_linearized(quadrupling, 4)
    assert np.allclose(lm.csr.toarray(), 0.25, atol=1e-12)
    assert lm.lin_err == 0.0
    assert lm.eps < 1e-9


def test_linear_map_fixed_vector_uniform(quadrupling):
    mk = markovize(assemble_linearized(quadrupling, 8))
    w, v = np.linalg.eig(mk.csr.toarray().T)
    ix = int(np.argmin(np.abs(w - 1.0)))
    vec = np.real(v[:, ix])
    vec /= vec.mean()
    assert np.allclose(vec, 1.0, atol=1e-9)


def test_row_sums_near_one(sinmap):
    lm = assemble_linearized(sinmap, 64)
    sums = np.asarray(lm.csr.sum(axis=1)).ravel()
    assert np.abs(sums - 1.0).max() <= 64 * lm.eps + 1e-12
    mk = markovize(lm)
    assert (mk.row_sums() == 1.0).all()


def test_lin_err_formula(sinmap):
    lys = ly_coefficients_lip(sinmap)
    lm = assemble_linearized(sinmap, 128, lys)
    expected = 4.0 * lys.distortion.hi / 128**2
    assert lm.lin_err >= expected * (1 - 1e-12)
    assert lm.lin_err <= expected * (1 + 1e-9)
    assert lm.m_sup == lys.m_sup.hi


def test_matrix_entries_enclose_dense_quadrature(sinmap):
    """Independent oracle: dense midpoint quadrature of the image-hat times
    basis-hat products must agree with the assembled entries to eps."""
    k = 32
    lm = assemble_linearized(sinmap, k)
    basis = HatBasis(k)
    dense = lm.csr.toarray()
    rng = np.random.default_rng(0)
    for i in rng.integers(0, k, size=6):
        br = next(
            b for b in sinmap.branches
            if b.domain_outer().lo <= i / k <= b.domain_outer().hi
        )
        s = br.deriv_iv(iv(i / k)).mid
        c = br.value_iv(iv(i / k)).mid
        ts = np.linspace(c - abs(s) / k, c + abs(s) / k, 20001)
        hat_img = (1 - np.abs(ts - c) / (abs(s) / k)) / abs(s)
        for j in range(k):
            phi = np.array([basis.eval_hat(j, t % 1.0) for t in ts])
            entry = k * np.trapezoid(hat_img * phi, ts)
            assert abs(entry - dense[i, j]) <= k * lm.eps + 5e-4


def test_op_distance_synthetic():
    ly = LYCoefficientsLip(
        lam=iv(0.27), b_var=iv(0.62), m_sup=iv(1.62), b_one=iv(1.8),
        k_iter=1, alpha=iv(0.44), distortion=iv(0.45),
    )
    bound = op_distance_bound(ly, 2**17)
    lip_f = 1.62 * (1 + 1.8 / 0.56) * 1.62
    expected = (2 / 2**17) * ((0.27 + 1.62) * lip_f + 1.8 * 1.62)
    assert math.isclose(bound, expected, rel_tol=1e-9)
    assert bound <= 0.004


def test_op_distance_halves_with_k():
    ly = LYCoefficientsLip(
        lam=iv(0.3), b_var=iv(0.5), m_sup=iv(1.5), b_one=iv(1.0),
        k_iter=1, alpha=iv(0.45), distortion=iv(0.4),
    )
    b1 = op_distance_bound(ly, 1000)
    b2 = op_distance_bound(ly, 2000)
    assert math.isclose(b1, 2 * b2, rel_tol=1e-12)


def test_op_distance_zero_for_constant_density():
    ly = LYCoefficientsLip(
        lam=iv(0.25), b_var=iv(0.0), m_sup=iv(1.0), b_one=iv(0.0),
        k_iter=1, alpha=iv(0.25), distortion=iv(0.0),
    )
    assert op_distance_bound(ly, 100, lip_f=0.0) == 0.0


def test_interior_kink_rejected():
    from fractions import Fraction as F

    from rigdens.maps import Branch, Endpoint, PiecewiseMap

    # values and end derivatives match on the circle, but T' jumps 5 -> 7
    # at the interior breakpoint: not C^1, so the sup-norm route must refuse
    left = Branch(Endpoint.from_rational(0), Endpoint.from_rational(F(1, 2)),
                  (F(0), F(4), F(1)))
    right = Branch(Endpoint.from_rational(F(1, 2)), Endpoint.from_rational(1),
                   (F(-2), F(10), F(-3)))
    m = PiecewiseMap((left, right), circle=True)
    with pytest.raises(ValueError, match="not C"):
        assemble_linearized(m, 16)


def test_op_distance_rejects_alpha_one():
    ly = LYCoefficientsLip(
        lam=iv(0.5), b_var=iv(1.0), m_sup=iv(2.0), b_one=iv(1.0),
        k_iter=1, alpha=iv(1.0), distortion=iv(0.5),
    )
    with pytest.raises(ValueError):
        op_distance_bound(ly, 100)
