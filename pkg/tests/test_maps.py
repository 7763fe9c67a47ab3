"""Map evaluation and the inequality coefficients that feed certification."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from rigdens.intervals import Interval, iv
from rigdens.maps import (
    ExpansionError,
    distortion_sup,
    eval_on_interval,
    iterate_map,
    ly_coefficients_bv,
    ly_coefficients_lip,
)
from rigdens.cli import parse_map


def _dense_grid(m, fn, n=20001):
    """Non-rigorous dense-sample oracle of a per-branch quantity."""
    out = []
    for br in m.branches:
        lo, hi = br.domain_outer().lo, br.domain_outer().hi
        for x in np.linspace(lo + 1e-12, hi - 1e-12, n // m.branch_count):
            out.append(fn(br, x))
    return np.array(out)


def _oracle_deriv(br, x):
    return abs(br.deriv_iv(Interval(x, x)).mid)


def _oracle_distortion(br, x):
    d = br.deriv_iv(Interval(x, x)).mid
    s = br.second_iv(Interval(x, x)).mid
    return abs(s) / d ** 2


def test_eval_tripling_full_branch(tripling):
    imgs = eval_on_interval(tripling, iv(0.0, 1 / 3))
    img0 = [img for img, b in imgs if b == 0]
    assert len(img0) == 1
    assert img0[0].lo <= 0.0 and img0[0].hi >= 1.0 - 1e-12
    # any extra tagged images are breakpoint touches of zero measure
    for img, b in imgs:
        if b != 0:
            assert img.width < 1e-12


def test_eval_lanford_small_interval(lanford):
    imgs = eval_on_interval(lanford, iv(0.0, 0.1))
    assert len(imgs) == 1
    img, b = imgs[0]
    assert b == 0
    assert img.lo <= 0.0 and 0.245 <= img.hi <= 0.2475


def test_eval_eq7_single_branch(eq7):
    imgs = eval_on_interval(eq7, iv(0.35, 0.45))
    assert len(imgs) == 1


def test_eval_empty_raises(tripling):
    with pytest.raises(ValueError):
        eval_on_interval(tripling, iv(1.5, 1.6))


def test_eval_image_contains_samples(eq4):
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = sorted(rng.uniform(0, 1, size=2))
        imgs = eval_on_interval(eq4, iv(a, b))
        for x in rng.uniform(a, b, size=20):
            vals = [br.value_iv(Interval(x, x)) for br in eq4.branches
                    if br.domain_outer().lo <= x <= br.domain_outer().hi]
            v = vals[0].mid
            assert any(img.lo - 1e-12 <= v <= img.hi + 1e-12 for img, _ in imgs)


def test_bv_coefficients_tripling(tripling):
    ly = ly_coefficients_bv(tripling)
    assert abs(ly.lam.hi - 1 / 3) < 1e-12
    assert abs(ly.b_prime.hi - 6.0) < 1e-9
    assert abs(ly.b.hi - 18.0) < 1e-8


def test_bv_coefficients_eq6(eq6):
    ly = ly_coefficients_bv(eq6)
    assert abs(ly.lam.hi - 5 / 17) < 1e-12
    assert abs(ly.b_prime.hi - 17.0) < 1e-9
    assert abs(ly.b.hi - 289 / 7) < 1e-6


@pytest.mark.parametrize(
    "mapname,lam_exp,bprime_exp",
    [
        ("eq4", 1 / 3, 8 + F(8, 9)),
        ("eq7", 1 / 3, 17 + 2 * F(68, 25) / 9),
    ],
)
def test_bv_coefficients_quadratic_maps(request, mapname, lam_exp, bprime_exp):
    m = request.getfixturevalue(mapname)
    ly = ly_coefficients_bv(m)
    assert abs(ly.lam.hi - lam_exp) < 1e-10
    # rigorous upper bound, within 1% of the exact formula value
    assert float(bprime_exp) <= ly.b_prime.hi <= float(bprime_exp) * 1.01
    # independent dense-grid oracle
    grid_inf = _dense_grid(m, _oracle_deriv).min()
    grid_sup_dist = _dense_grid(m, _oracle_distortion).max()
    assert ly.lam.hi >= 1 / grid_inf - 1e-12
    assert ly.distortion.hi >= grid_sup_dist - 1e-9


def test_bv_rejects_slow_expansion(lanford):
    with pytest.raises(ExpansionError):
        ly_coefficients_bv(lanford)


def test_bv_b_relation(eq4):
    ly = ly_coefficients_bv(eq4)
    rebuilt = ly.b_prime / (iv(1) - iv(2) * ly.lam)
    assert rebuilt.lo <= ly.b.hi and ly.b.lo <= rebuilt.hi


def test_iterate_chain_rule_one_sided(lanford, lanford2):
    inf1 = lanford.abs_deriv_inf()
    inf2 = lanford2.abs_deriv_inf()
    # inf |(T^2)'| >= (inf |T'|)^2; the Lanford map attains equality at 1
    assert inf2.hi >= inf1.lo ** 2 * (1 - 1e-9)
    assert abs(inf1.lo - 1.5) < 1e-6
    assert inf2.lo <= 2.25 + 1e-12 and inf2.hi >= 2.25 - 1e-3


def test_lanford_iterate_structure(lanford2):
    assert lanford2.branch_count == 4
    beta = (5 - math.sqrt(17)) / 2
    b1 = lanford2.branches[1]
    assert b1.hi.enc.lo <= beta <= b1.hi.enc.hi


def test_lanford_bv_coefficients(lanford2):
    ly = ly_coefficients_bv(lanford2)
    # formula outputs on the composed map (see the quadratic-map oracle)
    grid_inf = _dense_grid(lanford2, _oracle_deriv, 40001).min()
    assert ly.lam.hi >= 1 / grid_inf - 1e-9
    assert ly.lam.hi <= 1 / grid_inf * 1.01
    min_len = min(
        float(F(br.hi.enc.lo) - F(br.lo.enc.hi)) for br in lanford2.branches
    )
    grid_dist = _dense_grid(lanford2, _oracle_distortion, 40001).max()
    expected = 2 / min_len + 2 * grid_dist
    assert expected * 0.999 <= ly.b_prime.hi <= expected * 1.02


def test_distortion_tripling(tripling):
    d = distortion_sup(tripling)
    assert d.hi <= 1e-12


def test_distortion_lanford_branch(lanford):
    # T'' = -1, T' in [3/2, 5/2]: sup |T''/(T')^2| = 4/9
    d = distortion_sup(lanford)
    assert 4 / 9 - 1e-9 <= d.hi <= 4 / 9 * 1.01


def test_distortion_sin_map(sinmap):
    d = distortion_sup(sinmap)
    grid = _dense_grid(sinmap, _oracle_distortion, 40001).max()
    crude = 0.64 * math.pi ** 2 / (4 - 0.08 * math.pi) ** 2  # ~0.45
    assert grid - 1e-6 <= d.hi <= crude * 1.05
    assert d.hi <= grid * 1.02


def test_lip_coefficients_quadrupling(quadrupling):
    ly = ly_coefficients_lip(quadrupling)
    assert abs(ly.lam.hi - 0.25) < 1e-12
    assert ly.b_var.hi <= 1e-12
    assert abs(ly.m_sup.hi - 1.0) < 1e-12
    assert ly.b_one.hi <= 1e-12
    assert abs(ly.alpha.hi - 0.25) < 1e-10
    assert ly.k_iter == 1


def test_lip_coefficients_tripling_circle():
    m = parse_map("circle\nlinear 3 mod 1").build()
    ly = ly_coefficients_lip(m)
    assert abs(ly.lam.hi - 1 / 3) < 1e-12
    assert abs(ly.m_sup.hi - 1.0) < 1e-12
    assert abs(ly.alpha.hi - 1 / 3) < 1e-10


def test_lip_coefficients_sin_map(sinmap):
    ly = ly_coefficients_lip(sinmap)
    lam_exact = 1 / (4 - 0.08 * math.pi)
    assert lam_exact <= ly.lam.hi <= lam_exact * 1.001
    assert ly.b_var.hi <= 0.62
    assert ly.m_sup.hi <= 1.62
    assert ly.b_one.hi < 1.8
    assert ly.alpha.hi <= 0.44
    assert ly.k_iter == 1


def test_lip_needs_circle(eq6):
    with pytest.raises(ValueError):
        ly_coefficients_lip(eq6)


def test_min_branch_length_eq6(eq6):
    ml = eq6.min_branch_length()
    assert abs(ml.lo - 2 / 17) < 1e-12


def test_iterate_rejects_trig(sinmap):
    with pytest.raises(ValueError):
        iterate_map(sinmap, 2)
