"""Certified fixed-vector enclosure by simplex contraction.

The stationary vector of a row-stochastic matrix Pi is enclosed by iterating
the zero-sum anchor vectors (e_0 - e_j)/2 under the row action v -> v Pi and
watching their norms: once every anchor norm falls below the numeric
threshold, the iterated simplex has diameter at most twice that threshold
and any iterated start vector lies inside it together with the true fixed
vector.  The same sweep certifies the contraction step counts used by the
a-posteriori error bound: N_eps for the computed matrix itself and N for
the exact discretized operator, whose extra distance is charged linearly
per step ("inflation").

Norm evaluations are upward-rounded and every floating-point matrix-vector
product is covered by an explicit error ledger, so all reported bounds are
rigorous upper bounds.

In sup-norm mode anchors are scaled by the partition size so thresholds are
expressed at density scale, where the certificate formulas consume them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse

from .intervals import EPS_MACH
from .ulam import TransitionMatrix

__all__ = [
    "ContractionCertificate",
    "EnclosedDensity",
    "NotContractingError",
    "contraction_sweep",
    "zero_sum_operator_norm_bound",
    "float_ledger",
]

_U = 2.0 ** -53  # unit roundoff of binary64


class NotContractingError(RuntimeError):
    """Raised when no contraction is observed within the step budget."""


@dataclass(frozen=True)
class ContractionCertificate:
    """Certified contraction data for the zero-average subspace V.

    per_step_bounds[t-1] is a rigorous upper bound on ||Pi^t|_V|| in the
    active norm, float ledger included.  n_eps is the first t with bound
    <= 1/2; n_true additionally charges the per-step inflation that bounds
    the distance to the exact discretized operator.
    """

    n_eps: int
    n_true: int
    per_step_bounds: List[float]
    inflation_per_step: float
    norm_kind: str


@dataclass(frozen=True)
class EnclosedDensity:
    """Fixed-vector enclosure: the true fixed vector of the swept matrix
    lies within diameter + float_err of values in the active norm."""

    values: np.ndarray
    diameter: float
    l: int
    float_err: float
    norm_kind: str

    def masses(self) -> np.ndarray:
        """Per-cell masses summing to ~1 (both norms store density scale
        internally: L1 keeps masses, Linf keeps nodal values)."""
        if self.norm_kind == "L1":
            return self.values
        return self.values / len(self.values)


def float_ledger(l: int, k: int) -> float:
    """Accumulated matrix-vector roundoff estimate l * k * eps_mach."""
    return l * k * EPS_MACH


def zero_sum_operator_norm_bound(step_norms: Sequence[float], t: int, k: int) -> float:
    """max_j ||Pi^t (e_1 - e_j)|| + t*k*eps_mach, a bound on ||Pi^t|_V||.

    Any unit zero-sum vector splits as (p - q)/2 with p, q in the simplex,
    so its image norm is at most half the max pairwise anchor distance,
    which the triangle inequality reduces to single-anchor norms.
    """
    base = max(step_norms) if len(step_norms) else 0.0
    return base + float_ledger(t, k)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _upper_abs_row_sums(v: np.ndarray) -> np.ndarray:
    """Rigorous upper bounds of per-row 1-norms of a dense matrix."""
    k = v.shape[1]
    s = np.abs(v).sum(axis=1)
    infl = 1.0 + 1.02 * k * _U
    return np.nextafter(s * infl, math.inf)


def _max_colsum_upper(a: sparse.csr_matrix) -> float:
    k = a.shape[0]
    cs = np.asarray(np.abs(a).sum(axis=0)).ravel()
    return _up(float(cs.max()) * (1.0 + 1.02 * k * _U))


def _max_col_count(a: sparse.csr_matrix) -> int:
    csc = a.tocsc()
    counts = np.diff(csc.indptr)
    return int(counts.max()) if len(counts) else 0


def _run_batch(a: sparse.csr_matrix, ids: np.ndarray, steps: int,
               scale: float, norm_kind: str) -> np.ndarray:
    """Iterate half-anchors scale*(e_0 - e_j)/2 for j in ids; return the
    (steps x len(ids)) array of upward-rounded full-anchor norms."""
    k = a.shape[0]
    v = np.zeros((len(ids), k))
    v[np.arange(len(ids)), ids] = -0.5 * scale
    v[:, 0] += 0.5 * scale
    out = np.empty((steps, len(ids)))
    prev = None
    for t in range(steps):
        v = v @ a
        if norm_kind == "L1":
            out[t] = 2.0 * _upper_abs_row_sums(v)
            # a row-stochastic action never expands the 1-norm
            if prev is not None and not (out[t] <= prev * (1 + 1e-9) + 1e-30).all():
                raise AssertionError("1-norm grew under the stochastic action")
            prev = out[t]
        else:
            out[t] = 2.0 * np.abs(v).max(axis=1)
    return out


def _drift_sequence(norm_max: np.ndarray, k: int, scale: float,
                    col_count: int, colsum_up: float, norm_kind: str) -> np.ndarray:
    """Cumulative float-error bounds (full-anchor scale) per step.

    One product of a float vector v with the nonnegative matrix A obeys
    ||fl(vA) - vA|| <= gamma_C * ||v||_1 (1-norm, row sums 1) respectively
    gamma_C * ||v||_inf * S (sup norm, S = max column sum); accumulated
    error additionally rides through A, which expands the 1-norm by at most
    1 and the sup norm by at most S.
    """
    gamma = 1.01 * col_count * _U
    expand = 1.0 if norm_kind == "L1" else colsum_up
    amp = 1.0 if norm_kind == "L1" else colsum_up
    drift = 0.0
    prev_norm = scale  # full-anchor norm before the first multiply
    out = np.empty(len(norm_max))
    for t in range(len(norm_max)):
        drift = drift * expand + gamma * amp * (prev_norm + drift)
        out[t] = drift
        prev_norm = norm_max[t]
    return out


def contraction_sweep(matrix: TransitionMatrix, eps_num: float,
                      j_max: int = 200, batch_size: Optional[int] = None,
                      verbose: bool = False,
                      start: Optional[np.ndarray] = None,
                      workers: int = 1):
    """Certify contraction of Pi on V and enclose its fixed vector.

    Returns (ContractionCertificate, EnclosedDensity).  L1 mode works at
    mass scale (anchors e_0 - e_j); sup mode at density scale (anchors
    k*(e_0 - e_j)), so eps_num means the same thing the certificate's
    numeric-error term does in both cases.

    Anchor batches are independent; workers > 1 runs them in parallel
    processes with a deterministic merge (results assigned by batch slot).

    Raises NotContractingError if j_max steps pass without the certified
    bound dropping below 1/2 or some anchor staying above eps_num.
    """
    if eps_num <= 0:
        raise ValueError("eps_num must be positive")
    a = matrix.csr
    k = matrix.k
    norm_kind = matrix.norm_kind
    scale = 1.0 if norm_kind == "L1" else float(k)
    if norm_kind == "L1":
        inflation = 2.0 * matrix.nnz_max * matrix.eps
    else:
        m_sup = getattr(matrix, "m_sup", None)
        lin_err = getattr(matrix, "lin_err", 0.0)
        if m_sup is None:
            raise ValueError("sup-norm sweep needs the matrix m_sup bound")
        inflation = 2.0 * m_sup * m_sup * (matrix.eps + lin_err)

    if batch_size is None:
        batch_size = max(1, min(k - 1, (1 << 24) // max(k, 1)))
    col_count = _max_col_count(a)
    colsum_up = _max_colsum_upper(a)

    ids_all = np.arange(1, k)
    steps = min(j_max, 16)
    while True:
        norms_steps = np.zeros((steps, k - 1))
        slots = [(s, ids_all[s:s + batch_size]) for s in range(0, k - 1, batch_size)]
        if workers > 1 and len(slots) > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = pool.map(
                    _run_batch,
                    [a] * len(slots), [ids for _, ids in slots],
                    [steps] * len(slots), [scale] * len(slots),
                    [norm_kind] * len(slots),
                )
                for (s, ids), part in zip(slots, parts):
                    norms_steps[:, s:s + len(ids)] = part
        else:
            for s, ids in slots:
                norms_steps[:, s:s + len(ids)] = _run_batch(a, ids, steps, scale, norm_kind)
        norm_max = norms_steps.max(axis=1)
        drift = _drift_sequence(norm_max, k, scale, col_count, colsum_up, norm_kind)
        bounds = [_up(norm_max[t] + 2.0 * drift[t]) for t in range(steps)]

        n_eps = next((t + 1 for t in range(steps) if bounds[t] <= 0.5), None)
        n_true = next(
            (t + 1 for t in range(steps)
             if _up(bounds[t] + (t + 1) * inflation) <= 0.5),
            None,
        )
        below = norms_steps <= eps_num
        l_per_anchor = np.where(below.any(axis=0), below.argmax(axis=0) + 1, 0)
        l_ok = bool((l_per_anchor > 0).all())
        if verbose:
            for t in range(steps):
                print(f"step {t + 1}: max_norm={norm_max[t]:.6g} bound={bounds[t]:.6g}")
        if n_eps is not None and n_true is not None and l_ok:
            break
        if steps >= j_max:
            raise NotContractingError(
                "matrix not observed to contract within "
                f"{j_max} steps; map may not be mixing"
            )
        steps = min(j_max, steps * 2)

    l = int(l_per_anchor.max())
    cert = ContractionCertificate(
        n_eps=n_eps,
        n_true=n_true,
        per_step_bounds=[float(b) for b in bounds[: max(n_eps, n_true)]],
        inflation_per_step=inflation,
        norm_kind=norm_kind,
    )

    if start is None:
        b0 = np.full(k, scale / k) if norm_kind == "L1" else np.ones(k)
    else:
        b0 = np.asarray(start, dtype=float)
    v = b0
    for _ in range(l):
        v = v @ a
    if norm_kind == "L1":
        # restore unit mass; the scaling perturbs each entry by at most the
        # accumulated drift, which the float_err budget below absorbs
        v = v / math.fsum(v)
    density_drift = float(drift[min(l, steps) - 1]) if l > 0 else 0.0
    float_err = 3.0 * float_ledger(l, k) + 6.0 * density_drift
    dens = EnclosedDensity(
        values=v,
        diameter=2.0 * eps_num,
        l=l,
        float_err=float_err,
        norm_kind=norm_kind,
    )
    return cert, dens
