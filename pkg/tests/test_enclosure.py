"""Fixed-vector enclosure soundness and contraction-certificate semantics."""

import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import sparse

from rigdens.enclosure import (
    NotContractingError,
    contraction_sweep,
    float_ledger,
    zero_sum_operator_norm_bound,
)
from rigdens.intervals import EPS_MACH
from rigdens.ulam import TransitionMatrix, assemble_ulam, markovize


def dyadic_stochastic(rng, k=8, denom_bits=11):
    """Random row-stochastic matrix with exactly float-representable
    entries j/2^denom_bits, every entry positive."""
    d = 1 << denom_bits
    rows = []
    for _ in range(k):
        cuts = sorted(rng.choice(np.arange(1, d), size=k - 1, replace=False))
        parts = np.diff([0, *cuts, d])
        rows.append(parts / d)
    return np.array(rows)


def exact_fixed_vector(mat: np.ndarray):
    """Independent oracle: rational dense solve of v^T Pi = v^T, sum v = 1."""
    k = mat.shape[0]
    a = [[F(mat[j][i]) for j in range(k)] for i in range(k)]  # Pi^T
    for i in range(k):
        a[i][i] -= 1
    for j in range(k):
        a[k - 1][j] = F(1)
    rhs = [F(0)] * (k - 1) + [F(1)]
    # Gaussian elimination with partial pivoting over the rationals
    for col in range(k):
        piv = max(range(col, k), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise ValueError("singular system")
        a[col], a[piv] = a[piv], a[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        rhs[col] *= inv
        for r in range(k):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                rhs[r] -= f * rhs[col]
    return rhs


def test_rank_one_contracts_immediately():
    csr = sparse.csr_matrix(np.full((3, 3), 1 / 3))
    tm = TransitionMatrix(k=3, csr=csr, eps=0.0, nnz_max=3)
    cert, dens = contraction_sweep(tm, 1e-4)
    assert dens.l == 1
    assert cert.n_eps == 1
    assert cert.n_true == 1
    assert np.allclose(dens.values, 1 / 3, atol=1e-15)
    assert dens.diameter == 2e-4


def test_float_ledger_values():
    assert float_ledger(0, 100) == 0.0
    assert math.isclose(float_ledger(25, 2**20), 5.82e-9, rel_tol=1e-2)
    assert float_ledger(25, 2**20) == 25 * 2**20 * EPS_MACH
    assert math.isclose(float_ledger(10, 4096), 9.1e-12, rel_tol=1e-2)


def test_zero_sum_bound_trivial_cases():
    assert zero_sum_operator_norm_bound([0.0, 0.0], 3, 16) == 3 * 16 * EPS_MACH
    b = zero_sum_operator_norm_bound([0.4, 0.6], 2, 16)
    assert b == 0.6 + 2 * 16 * EPS_MACH


def test_zero_sum_bound_vs_bruteforce():
    """On a 4x4 stochastic matrix the V-restricted 1-norm is attained at a
    scaled difference of basis vectors; the anchored bound must dominate."""
    rng = np.random.default_rng(99)
    m = dyadic_stochastic(rng, k=4)
    for t in (1, 2, 3):
        mt = np.linalg.matrix_power(m, t)
        brute = max(
            np.abs(mt[i] - mt[j]).sum() / 2.0
            for i in range(4)
            for j in range(i + 1, 4)
        ) * 2 / 2  # ||M^t (e_i - e_j)||_1 / ||e_i - e_j||_1 with norm 2
        anchored = [np.abs(mt[0] - mt[j]).sum() for j in range(1, 4)]
        assert zero_sum_operator_norm_bound(anchored, t, 4) >= brute - 1e-12


def test_threshold_semantics(eq6):
    mk = markovize(assemble_ulam(eq6, 64))
    cert, dens = contraction_sweep(mk, 1e-4)
    bounds = cert.per_step_bounds
    assert bounds[cert.n_eps - 1] <= 0.5
    if cert.n_eps > 1:
        assert bounds[cert.n_eps - 2] > 0.5
    assert cert.n_eps <= cert.n_true
    infl = cert.inflation_per_step
    assert bounds[cert.n_true - 1] + cert.n_true * infl <= 0.5


def test_norm_monotone_under_stochastic_action():
    rng = np.random.default_rng(4)
    m = dyadic_stochastic(rng, k=8)
    v = rng.standard_normal(8)
    v -= v.mean()
    prev = np.abs(v).sum()
    for _ in range(30):
        v = v @ m
        cur = np.abs(v).sum()
        assert cur <= prev * (1 + 1e-12)
        prev = cur


def test_enclosure_soundness_sample():
    rng = np.random.default_rng(12345)
    for _ in range(100):
        mat = dyadic_stochastic(rng)
        tm = TransitionMatrix(k=8, csr=sparse.csr_matrix(mat), eps=0.0, nnz_max=8)
        mk = markovize(tm)
        cert, dens = contraction_sweep(mk, 1e-6, j_max=5000)
        exact = exact_fixed_vector(mk.csr.toarray())
        err = sum(abs(F(float(v)) - e) for v, e in zip(dens.values, exact))
        assert float(err) <= dens.diameter + dens.float_err


def test_batch_size_determinism(eq6):
    mk = markovize(assemble_ulam(eq6, 64))
    cert1, dens1 = contraction_sweep(mk, 1e-4)
    cert2, dens2 = contraction_sweep(mk, 1e-4, batch_size=7)
    cert3, dens3 = contraction_sweep(mk, 1e-4, batch_size=7, workers=2)
    for cert, dens in ((cert2, dens2), (cert3, dens3)):
        assert cert1.n_eps == cert.n_eps
        assert cert1.n_true == cert.n_true
        assert cert1.per_step_bounds == cert.per_step_bounds
        assert dens1.l == dens.l
        assert (dens1.values == dens.values).all()


def test_non_contracting_raises():
    # two disjoint invariant blocks: anchors across blocks never contract
    block = np.full((2, 2), 0.5)
    m = np.zeros((4, 4))
    m[:2, :2] = block
    m[2:, 2:] = block
    tm = TransitionMatrix(k=4, csr=sparse.csr_matrix(m), eps=0.0, nnz_max=2)
    with pytest.raises(NotContractingError):
        contraction_sweep(tm, 1e-4, j_max=32)
