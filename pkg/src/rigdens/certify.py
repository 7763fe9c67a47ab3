"""Assembly of the final certified error bound and the Lyapunov interval.

The distance between the computed density and the true invariant density is
bounded by three nonnegative components, summed with upward rounding:

  * discretization error   2 N (2B/k)                    (mass norm), or the
    sup-norm analogue (2/k) N M ((4/k)D + 2(M+1)M(1+B1/(1-a))) (B+1);
  * matrix error           4 N_eps NNZ eps, respectively
    2 N M^2 (eps + 4D/k^2) (||v||_inf + eps_num);
  * numeric error          eps_num plus the float ledger of the enclosure.

The Lyapunov exponent integral log|T'| d(mu) is then enclosed cell by cell
against the computed density, and inflated by sup|log|T'|| times the final
error bound, which controls the difference against the true density.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .intervals import Interval, iv
from .maps import LYCoefficientsBV, LYCoefficientsLip, PiecewiseMap
from .enclosure import ContractionCertificate, EnclosedDensity
from .ulam import TransitionMatrix

__all__ = [
    "Certificate",
    "LyapunovResult",
    "CertificateReport",
    "certify_l1",
    "certify_linf",
    "lyapunov",
    "report",
]


@dataclass(frozen=True)
class Certificate:
    """Everything the a-posteriori bound consumed, plus its components."""

    mode: str
    map_id: str
    ly: Union[LYCoefficientsBV, LYCoefficientsLip]
    k: int
    nu: float
    eps: float
    eps_num: float
    nnz_max: int
    l: int
    n_eps: int
    n_true: int
    err_discretization: float
    err_matrix: float
    err_numeric: float
    eps_rig: float
    lyap_lo: Optional[float] = None
    lyap_hi: Optional[float] = None


@dataclass(frozen=True)
class LyapunovResult:
    """Certified enclosure [estimate - radius, estimate + radius] of the
    integral of log|T'| against the invariant density."""

    estimate: float
    radius: float
    method_note: str

    @property
    def lo(self) -> float:
        return self.estimate - self.radius

    @property
    def hi(self) -> float:
        return self.estimate + self.radius


def _up_sum(*terms: float) -> float:
    acc = iv(0)
    for t in terms:
        acc = acc + iv(t)
    return acc.hi


def certify_l1(ly: LYCoefficientsBV, matrix: TransitionMatrix,
               contraction: ContractionCertificate, density: EnclosedDensity,
               nu: float, eps_num: float, map_id: str = "map") -> Certificate:
    """Mass-norm certificate: ||f - v|| <= 2N(2B/k) + 4 N_eps NNZ eps + eps_num."""
    if matrix.norm_kind != "L1" or contraction.norm_kind != "L1":
        raise ValueError("certify_l1 needs L1-mode inputs")
    two_lam = (iv(2) * ly.lam).hi
    if not two_lam < 1.0:
        raise ValueError("2/inf|T'| must stay below 1 for the mass-norm bound")
    n_true = contraction.n_true
    n_eps = contraction.n_eps
    if n_true is None or n_eps is None:
        raise ValueError("contraction certificate incomplete")
    k = matrix.k
    err_disc = (iv(2) * iv(n_true) * (iv(2) * ly.b / iv(k))).hi
    err_mat = (iv(4) * iv(n_eps) * iv(matrix.nnz_max) * iv(matrix.eps)).hi
    err_num = _up_sum(eps_num, density.float_err)
    eps_rig = _up_sum(err_disc, err_mat, err_num)
    return Certificate(
        mode="L1", map_id=map_id, ly=ly, k=k, nu=nu, eps=matrix.eps,
        eps_num=eps_num, nnz_max=matrix.nnz_max, l=density.l,
        n_eps=n_eps, n_true=n_true,
        err_discretization=err_disc, err_matrix=err_mat, err_numeric=err_num,
        eps_rig=eps_rig,
    )


def certify_linf(ly: LYCoefficientsLip, matrix: TransitionMatrix,
                 contraction: ContractionCertificate, density: EnclosedDensity,
                 nu: float, eps_num: float, map_id: str = "map") -> Certificate:
    """Sup-norm certificate with the linearized-operator error terms."""
    if matrix.norm_kind != "Linf" or contraction.norm_kind != "Linf":
        raise ValueError("certify_linf needs sup-norm inputs")
    if not ly.alpha.hi < 1.0:
        raise ValueError("Lipschitz contraction alpha must stay below 1")
    n_true = contraction.n_true
    n_eps = contraction.n_eps
    k = matrix.k
    m = ly.m_sup
    d = ly.distortion
    lin_err = getattr(matrix, "lin_err", (iv(4) * d / (iv(k) * iv(k))).hi)
    bracket = (iv(4) / iv(k)) * d + iv(2) * (m + iv(1)) * m * (
        iv(1) + ly.b_one / (iv(1) - ly.alpha)
    )
    err_disc = ((iv(2) / iv(k)) * iv(n_true) * m * bracket * (ly.b_var + iv(1))).hi
    v_sup = float(np.abs(density.values).max())
    err_mat = (
        iv(2) * iv(n_true) * m * m * (iv(matrix.eps) + iv(lin_err))
        * (iv(v_sup) + iv(eps_num))
    ).hi
    err_num = _up_sum(eps_num, density.float_err)
    eps_rig = _up_sum(err_disc, err_mat, err_num)
    return Certificate(
        mode="Linf", map_id=map_id, ly=ly, k=k, nu=nu, eps=matrix.eps,
        eps_num=eps_num, nnz_max=matrix.nnz_max, l=density.l,
        n_eps=n_eps, n_true=n_true,
        err_discretization=err_disc, err_matrix=err_mat, err_numeric=err_num,
        eps_rig=eps_rig,
    )


def _cell_log_deriv(m: PiecewiseMap, k: int, i: int) -> Interval:
    # outward-rounded cell so the true rational cell is fully covered
    cell = Interval((iv(i) / iv(k)).lo, (iv(i + 1) / iv(k)).hi)
    dr = m.abs_deriv_range_over(cell)
    if dr.lo <= 0.0:
        raise ValueError(f"|T'| enclosure touches 0 over cell {i}")
    return dr.log()


def lyapunov(m: PiecewiseMap, density: EnclosedDensity,
             cert: Certificate) -> LyapunovResult:
    """Certified enclosure of the Lyapunov exponent of the certified run.

    Integrates the per-cell interval enclosure of log|T'| against the
    enclosed density, then charges sup|log|T'|| times eps_rig for the
    distance to the true invariant density (a sup-norm certificate also
    controls the mass norm on [0,1]).
    """
    k = cert.k
    vals = density.values
    total = iv(0)
    if density.norm_kind == "L1":
        for i in range(k):
            total = total + _cell_log_deriv(m, k, i) * iv(float(vals[i]))
    else:
        for i in range(k):
            w = (iv(float(vals[i])) + iv(float(vals[(i + 1) % k]))) / iv(2)
            total = total + _cell_log_deriv(m, k, i) * (w / iv(k))
    sup_d = m.abs_deriv_sup()
    inf_d = m.abs_deriv_inf()
    if inf_d.lo <= 0.0:
        raise ValueError("|T'| enclosure touches 0")
    log_mag = max(abs(sup_d.log().hi), abs(inf_d.log().lo))
    slack = (iv(log_mag) * iv(cert.eps_rig)).hi
    estimate = total.mid
    radius = _up_sum(total.width / 2.0, slack)
    return LyapunovResult(
        estimate=estimate,
        radius=radius,
        method_note=(
            "per-cell interval enclosure of log|T'| against the enclosed "
            "density; radius = quadrature width/2 + sup|log|T'|| * eps_rig"
        ),
    )


def attach_lyapunov(cert: Certificate, lyap: LyapunovResult) -> Certificate:
    return replace(cert, lyap_lo=lyap.lo, lyap_hi=lyap.hi)


@dataclass(frozen=True)
class CertificateReport:
    text: str
    data: dict

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.data, **kwargs)


def report(cert: Certificate, lyap: Optional[LyapunovResult] = None,
           density: Optional[EnclosedDensity] = None) -> CertificateReport:
    """Human-readable inputs/outputs table plus the machine-readable form."""
    ly = cert.ly
    if isinstance(ly, LYCoefficientsBV):
        lam, b_prime, b = ly.lam.hi, ly.b_prime.hi, ly.b.hi
    else:
        lam, b_prime, b = ly.lam.hi, None, ly.b_var.hi
    rows = [
        ("lambda", f"{lam:.6g}", "N_eps", str(cert.n_eps)),
        ("B'", "-" if b_prime is None else f"{b_prime:.6g}", "N", str(cert.n_true)),
        ("B", f"{b:.6g}", "l", str(cert.l)),
        ("eps", f"{cert.eps:.3g}", "eps_rig", f"{cert.eps_rig:.4g}"),
        (
            "eps_num",
            f"{cert.eps_num:.3g}",
            "L_exp",
            "-" if lyap is None else f"{lyap.estimate:.6g} +/- {lyap.radius:.2g}",
        ),
    ]
    if isinstance(ly, LYCoefficientsLip):
        rows.insert(3, ("M", f"{ly.m_sup.hi:.6g}", "alpha", f"{ly.alpha.hi:.4g}"))
        rows.insert(4, ("B1", f"{ly.b_one.hi:.6g}", "k_iter", str(ly.k_iter)))
    lines = [f"{'Inputs':<24}{'Outputs'}"]
    for a, av, c, cv in rows:
        lines.append(f"{a:<8}{av:<16}{c:<8}{cv}")
    if isinstance(ly, LYCoefficientsBV):
        lines.append("power-bound constant C_i = 1 (mass norm)")
    else:
        lines.append(f"power-bound constant C_i = M^2 = {(ly.m_sup * ly.m_sup).hi:.6g}")
    data = {
        "mode": cert.mode,
        "map_id": cert.map_id,
        "k": cert.k,
        "nu": cert.nu,
        "eps": cert.eps,
        "eps_num": cert.eps_num,
        "nnz_max": cert.nnz_max,
        "l": cert.l,
        "n_eps": cert.n_eps,
        "n_true": cert.n_true,
        "lambda": lam,
        "b_prime": b_prime,
        "b": b,
        "err_components": {
            "discretization": cert.err_discretization,
            "matrix": cert.err_matrix,
            "numeric": cert.err_numeric,
        },
        "eps_rig": cert.eps_rig,
        "lyap": None if lyap is None else {"lo": lyap.lo, "hi": lyap.hi},
    }
    return CertificateReport(text="\n".join(lines), data=data)
