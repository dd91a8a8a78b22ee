"""Executable generalized Schur test for the weighted Toeplitz operator.

The verifier instantiates the abstract two-inequality Schur test with
the concrete test functions

    f  = rho^{-lam} |det G'|^{-1/p*},
    h1 = rho^{-lam} prod_c |zeta_c|^{m_c},
    h2 = rho^{-lam} Khat^{1/p-1/q} |det G'|^{-1/p},

where rho is the product of the factor defining functions.  Parameter
feasibility (the lambda window and the per-coordinate m ranges) is
decided in exact rational arithmetic; the sufficiency regimes share the
lambda constraint.  The empirical statistics C1_hat, C2_hat are maxima
over probe points of the two Schur integrals divided by their claimed
majorants, and sup_symbol is the essential-sup estimate of
h1^{-1} h2 K^{-t}; all three must stay finite and stable under sample
refinement exactly when the operator is bounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .domain import CPoint, DomainSpec, Frame
from .errors import NonFiniteIntegrand
from .kernel import defining_rho_pi, kernel_cross_pi, kernel_diag_pi
from .quadrature import SampleSet, sample_interior


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class SchurWitness:
    """Feasible Schur-test parameters for one (p, q, t) instance."""

    p: Fraction
    q: Fraction
    t: Fraction
    regime: int
    lam: Fraction
    m: tuple[Fraction, ...]     # one entry per disk coordinate

    @property
    def p_conj(self) -> Fraction:
        return self.p / (self.p - 1)

    @property
    def r(self) -> Fraction:
        """Kernel-splitting exponent 1/p* of the Schur test."""
        return 1 - 1 / self.p

    def to_json(self) -> str:
        return json.dumps({
            "p": str(self.p), "q": str(self.q), "t": str(self.t),
            "regime": self.regime, "lambda": str(self.lam),
            "m": [str(x) for x in self.m]})


@dataclass(frozen=True)
class Infeasible:
    """Returned when no parameter choice satisfies the stated ranges."""

    reason: str


def _m_range(spec: DomainSpec, p: Fraction, q: Fraction, t: Fraction,
             regime: int, j: int) -> tuple[Fraction, Fraction]:
    """Open-closed range (lo, hi] for m_j, paper-style 1-based j."""
    c = spec.c_bk
    p_star = p / (p - 1)
    lo = -Fraction(j + 1 + c) / p_star
    if regime == 2:
        hi = Fraction(j - 1 + c) * (q - 2 * p) / (p * q)
    elif regime == 3:
        hi = Fraction(j - 1 + c) * (2 * t - 1 / p)
    else:
        raise ValueError(f"regime must be 2 or 3, got {regime}")
    return lo, hi


def feasible_params(spec: DomainSpec, p, q, t, regime: int
                    ) -> SchurWitness | Infeasible:
    """Midpoint witness for the requested sufficiency regime, or Infeasible.

    Exact rational arithmetic throughout; the lambda window
    (0, min(1/q, 1/p*)) applies to both regimes.
    """
    p, q, t = _frac(p), _frac(q), _frac(t)
    if not 1 < p <= q:
        return Infeasible(f"need 1 < p <= q, got p={p}, q={q}")
    ms = []
    for j in range(spec.k + 1, spec.n + 1):
        lo, hi = _m_range(spec, p, q, t, regime, j)
        if not lo < hi:
            return Infeasible(
                f"m_{j} range empty in regime {regime}: ({lo}, {hi}]")
        ms.append((lo + hi) / 2)
    p_star = p / (p - 1)
    lam = min(Fraction(1) / q, 1 / p_star) / 2
    return SchurWitness(p=p, q=q, t=t, regime=regime, lam=lam, m=tuple(ms))


def symbol_disk_exponents(spec: DomainSpec, witness: SchurWitness
                          ) -> list[Fraction]:
    """Exact |zeta_j| exponents of h1^{-1} h2 K^{-t} after simplification.

    Equals (j-1+C)(2t - 1/p) - m_j per disk coordinate; nonnegative for
    a feasible witness with t at or above the boundedness threshold.
    """
    c = spec.c_bk
    out = []
    for idx, j in enumerate(range(spec.k + 1, spec.n + 1)):
        out.append(Fraction(j - 1 + c) * (2 * witness.t - 1 / witness.p)
                   - witness.m[idx])
    return out


def test_functions_array(spec: DomainSpec, witness: SchurWitness,
                         pts: np.ndarray
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(f, h1, h2) evaluated over an (N, n) product-frame array."""
    pts = np.atleast_2d(pts)
    lam = float(witness.lam)
    p = float(witness.p)
    p_star = float(witness.p_conj)
    rho = defining_rho_pi(spec, pts)
    abs_det = np.ones(pts.shape[0])
    for c in spec.disk_indices:
        abs_det *= np.abs(pts[:, c]) ** spec.disk_jacobian_exponent(c)
    f = rho ** (-lam) * abs_det ** (-1.0 / p_star)
    h1 = rho ** (-lam)
    for i, c in enumerate(spec.disk_indices):
        h1 = h1 * np.abs(pts[:, c]) ** float(witness.m[i])
    khat = kernel_diag_pi(spec, pts)
    h2 = (rho ** (-lam) * khat ** (float(witness.p ** -1 - witness.q ** -1))
          * abs_det ** (-1.0 / p))
    return f, h1, h2


def test_functions(spec: DomainSpec, witness: SchurWitness, point
                   ) -> tuple[float, float, float]:
    """(f, h1, h2) at a single product-frame point."""
    if isinstance(point, CPoint):
        if point.frame is not Frame.PI:
            raise ValueError("test functions are evaluated in the product frame")
        arr = point.as_array()
    else:
        arr = np.asarray(point, dtype=np.complex128)
    f, h1, h2 = test_functions_array(spec, witness, arr.reshape(1, -1))
    return float(f[0]), float(h1[0]), float(h2[0])


def symbol_array(spec: DomainSpec, witness: SchurWitness, t: float,
                 pts: np.ndarray) -> np.ndarray:
    """h1^{-1} h2 K^{-t} over an (N, n) product-frame array."""
    pts = np.atleast_2d(pts)
    _, h1, h2 = test_functions_array(spec, witness, pts)
    abs_det_sq = np.ones(pts.shape[0])
    for c in spec.disk_indices:
        abs_det_sq *= np.abs(pts[:, c]) ** (2 * spec.disk_jacobian_exponent(c))
    k_diag = kernel_diag_pi(spec, pts) / abs_det_sq
    return h2 / h1 * k_diag ** (-float(t))


@dataclass
class SchurReport:
    """Empirical Schur statistics for one witness and sample set."""

    c1_hat: float
    c2_hat: float
    sup_symbol: float
    n_samples: int
    n_probe: int

    def norm_bound(self, p: float, q: float) -> float:
        """The operator-norm majorant C1^{(p-1)/p} C2^{1/q} sup_symbol."""
        return (self.c1_hat ** ((p - 1.0) / p) * self.c2_hat ** (1.0 / q)
                * self.sup_symbol)

    def to_json(self) -> str:
        return json.dumps({
            "c1_hat": self.c1_hat, "c2_hat": self.c2_hat,
            "sup_symbol": self.sup_symbol, "n_samples": self.n_samples,
            "n_probe": self.n_probe})


def verify_schur(spec: DomainSpec, witness: SchurWitness, t,
                 samples: SampleSet, n_probe: int = 48, probe_seed: int = 11,
                 chunk: int = 131_072) -> SchurReport:
    """Evaluate C1_hat, C2_hat, sup_symbol on one sample set.

    Probe points stand in for the almost-every-x quantifier; they are
    deterministic given the seed so refinement sequences are comparable.
    """
    t = float(t)
    # probe radii stay below 0.85: the kernel's angular peak at radius r
    # has width ~(1-r), which the sample grids must resolve
    probes = sample_interior(spec, n_probe, probe_seed, radius_cap=0.85,
                             radius_min=0.1, frame=Frame.PI)
    p_star = float(witness.p_conj)
    q_over_p = float(witness.q / witness.p)
    lam = float(witness.lam)

    rho_probe = defining_rho_pi(spec, probes)
    f_probe, _, h2_probe = test_functions_array(spec, witness, probes)
    khat_probe = kernel_diag_pi(spec, probes)

    pts, wts = samples.points, samples.weights
    abs_det = np.ones(pts.shape[0])
    for c in spec.disk_indices:
        abs_det *= np.abs(pts[:, c]) ** spec.disk_jacobian_exponent(c)
    rho_s = defining_rho_pi(spec, pts)
    _, h1_s, _ = test_functions_array(spec, witness, pts)

    # pullback coefficients of the two Schur integrals (see module doc)
    coeff1 = wts * h1_s ** p_star * abs_det
    coeff2 = wts * rho_s ** (-lam * float(witness.q)) \
        * abs_det ** (2.0 - float(witness.q))
    int1 = np.zeros(n_probe)
    int2 = np.zeros(n_probe)
    for lo in range(0, pts.shape[0], chunk):
        hi = min(lo + chunk, pts.shape[0])
        cross = np.abs(kernel_cross_pi(spec, probes, pts[lo:hi]))
        int1 += cross @ coeff1[lo:hi]
        int2 += cross ** q_over_p @ coeff2[lo:hi]

    c1_vals = int1 / rho_probe ** (-lam * p_star)
    # C2: probes act as the y variable; divide by the h2^q majorant shape
    denom2 = (rho_probe ** (-lam * float(witness.q))
              * khat_probe ** (q_over_p - 1.0))
    c2_vals = int2 / denom2

    sym = symbol_array(spec, witness, t, pts)
    report = SchurReport(
        c1_hat=float(np.max(c1_vals)),
        c2_hat=float(np.max(c2_vals)),
        sup_symbol=float(np.max(sym)),
        n_samples=len(samples),
        n_probe=n_probe)
    if not all(np.isfinite([report.c1_hat, report.c2_hat, report.sup_symbol])):
        raise NonFiniteIntegrand("Schur statistics are not finite")
    return report


def schur_refinement(spec: DomainSpec, witness: SchurWitness, t,
                     sample_sets: Sequence[SampleSet], n_probe: int = 48,
                     probe_seed: int = 11) -> list[SchurReport]:
    """verify_schur across a refinement sequence of sample sets."""
    return [verify_schur(spec, witness, t, s, n_probe, probe_seed)
            for s in sample_sets]
