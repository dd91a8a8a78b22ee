"""Bergman kernel, pluricomplex Green function, and the two kernel bounds.

The diagonal kernel has the explicit product form

    K(z, z) = 1 / (|det G'(eta)|^2 * prod_j (1-||eta~_j||^2)^{k_j+1}
                                   * prod_c (1-|eta_c|^2)^2),

with eta the product-model image of z.  Off the diagonal the kernel is
completed through the biholomorphic transformation rule

    K(z, w) = Khat(eta, zeta) * det Psi'(z) * conj(det Psi'(w)),

which the truncated monomial series (kernel_series) validates
independently.  The Green function of the product model is the max of
per-factor automorphism norms in log scale; its sublevel sets drive the
mass lower bound (check_herbort_blocki) and the kernel comparability
check (check_comparability).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .domain import (CPoint, DomainSpec, Frame, abs_det_G_sq_array,
                     contains_H, contains_H_mask, det_G_prime_array,
                     map_to_h, map_to_pi)
from .errors import (DomainViolation, EmptySublevel, PoleCoincidence,
                     SingularPair)
from .indices import enumerate_basis, monomial_norm_sq
from .quadrature import SampleSet, monomial_values_pi, sample_interior


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation together with the points and method used."""

    value: complex
    at: tuple[CPoint, CPoint]
    method: str                 # "closed_form" | "series(N)"


def _as_pi_array(spec: DomainSpec, point, require_interior: bool = True
                 ) -> np.ndarray:
    """Coordinates of a point in the product frame as a (n,) array."""
    if isinstance(point, CPoint):
        arr = point.as_array()
        if point.frame is Frame.H:
            if require_interior and not contains_H(spec, point):
                raise DomainViolation(f"{point!r} is not in the domain")
            arr = map_to_pi(spec, arr.reshape(1, -1))[0]
        return arr
    return np.asarray(point, dtype=np.complex128)


def _as_h_array(spec: DomainSpec, point, require_interior: bool = True
                ) -> np.ndarray:
    if isinstance(point, CPoint):
        arr = point.as_array()
        if point.frame is Frame.PI:
            arr = map_to_h(spec, arr.reshape(1, -1))[0]
    else:
        arr = np.asarray(point, dtype=np.complex128)
    if require_interior and not np.all(contains_H_mask(spec, arr.reshape(1, -1))):
        raise DomainViolation("point is not in the domain")
    return arr


def _ball_sizes(spec: DomainSpec) -> np.ndarray:
    return np.asarray(spec.partition, dtype=np.int64)


def product_kernel(spec: DomainSpec, eta, zeta) -> complex:
    """Bergman kernel of the product model (normalized measures).

    Points may lie in the closed puncture (eta_c = 0 is allowed: the
    puncture is removable for square-integrable holomorphic functions).
    """
    e = _as_pi_array(spec, eta)
    t = _as_pi_array(spec, zeta)
    for arr, name in ((e, "eta"), (t, "zeta")):
        for sl in spec.ball_slices:
            if np.linalg.norm(arr[sl]) >= 1.0:
                raise DomainViolation(f"{name} leaves the unit ball block")
        if np.any(np.abs(arr[spec.k:]) >= 1.0):
            raise DomainViolation(f"{name} leaves the unit disk factors")
    val = _backend.kernel_cross(e.reshape(1, -1), t.reshape(1, -1),
                                _ball_sizes(spec), spec.n - spec.k)[0, 0]
    if not np.isfinite(val):
        raise SingularPair("kernel denominator vanished")
    return complex(val)


def kernel_cross_pi(spec: DomainSpec, x: np.ndarray, y: np.ndarray
                    ) -> np.ndarray:
    """Product-kernel matrix over (X, n) x (Y, n) product-model arrays."""
    return _backend.kernel_cross(np.atleast_2d(x), np.atleast_2d(y),
                                 _ball_sizes(spec), spec.n - spec.k)


def kernel_diag_pi(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Diagonal product-kernel values over an (N, n) product-model array."""
    return _backend.kernel_diag(np.atleast_2d(pts), _ball_sizes(spec),
                                spec.n - spec.k)


def defining_rho_pi(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """prod_j (1-||eta~_j||^2) * prod_c (1-|eta_c|^2) over (N, n) points."""
    pts = np.atleast_2d(pts)
    rho = np.ones(pts.shape[0])
    for sl in spec.ball_slices:
        rho *= 1.0 - np.sum(np.abs(pts[:, sl]) ** 2, axis=1)
    for c in spec.disk_indices:
        rho *= 1.0 - np.abs(pts[:, c]) ** 2
    return rho


def bergman_diag_array(spec: DomainSpec, z_pts: np.ndarray) -> np.ndarray:
    """K(z, z) over an (N, n) array of H-coordinates (no membership check)."""
    eta = map_to_pi(spec, np.atleast_2d(z_pts))
    return kernel_diag_pi(spec, eta) / abs_det_G_sq_array(spec, eta)


def bergman_diag(spec: DomainSpec, z) -> float:
    """Diagonal Bergman kernel at an interior point of H."""
    arr = _as_h_array(spec, z)
    return float(bergman_diag_array(spec, arr.reshape(1, -1))[0])


def bergman_kernel(spec: DomainSpec, z, w) -> KernelValue:
    """Off-diagonal kernel via the transformation rule."""
    za = _as_h_array(spec, z)
    wa = _as_h_array(spec, w)
    eta = map_to_pi(spec, za.reshape(1, -1))
    zeta = map_to_pi(spec, wa.reshape(1, -1))
    khat = kernel_cross_pi(spec, eta, zeta)[0, 0]
    dz = 1.0 / det_G_prime_array(spec, eta)[0]
    dw = 1.0 / det_G_prime_array(spec, zeta)[0]
    val = khat * dz * np.conj(dw)
    if not np.isfinite(val):
        raise SingularPair("kernel denominator vanished")
    return KernelValue(
        value=complex(val),
        at=(CPoint(tuple(za.tolist()), Frame.H),
            CPoint(tuple(wa.tolist()), Frame.H)),
        method="closed_form")


def kernel_matrix_h(spec: DomainSpec, z_pts: np.ndarray, w_pts_pi: np.ndarray
                    ) -> np.ndarray:
    """K(z_i, w_j) for H-frame rows against product-frame columns."""
    z_pts = np.atleast_2d(z_pts)
    eta = map_to_pi(spec, z_pts)
    dz = 1.0 / det_G_prime_array(spec, eta)
    dw = 1.0 / det_G_prime_array(spec, w_pts_pi)
    cross = kernel_cross_pi(spec, eta, w_pts_pi)
    return cross * dz[:, None] * np.conj(dw)[None, :]


def kernel_series(spec: DomainSpec, z, w, truncation: int) -> KernelValue:
    """Partial sum of the orthogonal-basis expansion of the kernel."""
    za = _as_h_array(spec, z)
    wa = _as_h_array(spec, w)
    indices = enumerate_basis(spec, truncation)
    exps = np.asarray(indices, dtype=np.int64)
    vz = _backend.monomial_matrix(za.reshape(1, -1), exps)[:, 0]
    vw = _backend.monomial_matrix(wa.reshape(1, -1), exps)[:, 0]
    norms = np.array([monomial_norm_sq(spec, a) for a in indices])
    val = complex(np.sum(vz * np.conj(vw) / norms))
    return KernelValue(
        value=val,
        at=(CPoint(tuple(za.tolist()), Frame.H),
            CPoint(tuple(wa.tolist()), Frame.H)),
        method=f"series({truncation})")


# ---------------------------------------------------------------------------
# Automorphisms and the Green function


def mobius_disk(a: complex, z: np.ndarray) -> np.ndarray:
    """Disk automorphism swapping 0 and a, applied to an array."""
    return (a - z) / (1.0 - np.conj(a) * z)


def mobius_ball(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Ball automorphism swapping 0 and a, applied to (..., k) arrays."""
    a = np.asarray(a, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    norm_a_sq = float(np.sum(np.abs(a) ** 2))
    if norm_a_sq == 0.0:
        return -z
    inner = z @ np.conj(a)
    proj = (inner / norm_a_sq)[..., None] * a
    orth = z - proj
    s = np.sqrt(1.0 - norm_a_sq)
    return (a - proj - s * orth) / (1.0 - inner)[..., None]


def _factor_mobius_norms(spec: DomainSpec, pts: np.ndarray, pole: np.ndarray
                         ) -> np.ndarray:
    """(N, l + n - k) matrix of per-factor automorphism norms."""
    pts = np.atleast_2d(pts)
    cols = []
    for sl in spec.ball_slices:
        cols.append(np.linalg.norm(mobius_ball(pole[sl], pts[:, sl]), axis=1))
    for c in spec.disk_indices:
        cols.append(np.abs(mobius_disk(complex(pole[c]), pts[:, c])))
    return np.stack(cols, axis=1)


def green_function(spec: DomainSpec, z, w) -> float:
    """Pluricomplex Green function of H with pole w (product formula)."""
    za = _as_h_array(spec, z)
    wa = _as_h_array(spec, w)
    eta = map_to_pi(spec, za.reshape(1, -1))[0]
    pole = map_to_pi(spec, wa.reshape(1, -1))[0]
    norms = _factor_mobius_norms(spec, eta.reshape(1, -1), pole)[0]
    top = float(np.max(norms))
    if top == 0.0:
        raise PoleCoincidence("Green function evaluated at its pole")
    return float(np.log(top))


def green_sublevel_mask(spec: DomainSpec, pts: np.ndarray, pole_pi: np.ndarray,
                        s: float) -> np.ndarray:
    """Mask of product-frame points with G(. , pole) < -s."""
    norms = _factor_mobius_norms(spec, pts, pole_pi)
    return np.all(norms < np.exp(-s), axis=1)


# ---------------------------------------------------------------------------
# The two kernel inequalities


@dataclass
class MassBoundReport:
    """Green-sublevel mass of |f|^2 against its kernel lower bound."""

    lhs: float
    rhs: float
    ratio: float
    n_inside: int


def check_herbort_blocki(spec: DomainSpec, alpha, w, s: float,
                         samples: SampleSet) -> MassBoundReport:
    """Sublevel-set mass of |z^alpha|^2 versus e^{-2ns} |f(w)|^2 / K(w,w)."""
    if s <= 0:
        raise ValueError("s must be positive")
    wa = _as_h_array(spec, w)
    pole = map_to_pi(spec, wa.reshape(1, -1))[0]
    mask = green_sublevel_mask(spec, samples.points, pole, s)
    n_inside = int(np.count_nonzero(mask))
    if n_inside == 0:
        raise EmptySublevel(f"no sample in the sublevel set at s={s}")
    vals = monomial_values_pi(spec, [tuple(alpha)], samples.points[mask])[0]
    weights = samples.pullback_weights(spec)[mask]
    lhs = float(np.sum(np.abs(vals) ** 2 * weights))
    f_at_w = np.prod(wa.astype(np.complex128) ** np.asarray(alpha))
    rhs = float(np.exp(-2 * spec.n * s) * abs(f_at_w) ** 2
                / bergman_diag(spec, wa))
    ratio = lhs / rhs if rhs > 0 else np.inf
    return MassBoundReport(lhs=lhs, rhs=rhs, ratio=ratio, n_inside=n_inside)


def comparability_constant(s: float) -> float:
    """Two-sided factor bound (1+e^{-s})/(1-e^{-s}) on Green sublevel sets."""
    r = np.exp(-s)
    return float((1.0 + r) / (1.0 - r))


def comparability_exponent(spec: DomainSpec) -> int:
    """Total kernel exponent: sum (k_j+1) over balls plus 2 per disk factor."""
    return sum(kj + 1 for kj in spec.partition) + 2 * (spec.n - spec.k)


@dataclass
class ComparabilityReport:
    """Extremes of the kernel ratio against the assembled envelope."""

    min_ratio: float
    max_ratio: float
    lower: float
    upper: float
    n_samples: int

    @property
    def within(self) -> bool:
        return self.lower <= self.min_ratio and self.max_ratio <= self.upper


def check_comparability(spec: DomainSpec, w, s: float, n_samples: int,
                        seed: int = 0) -> ComparabilityReport:
    """Sample K(z,z)/K(w,w) over |det Psi'(z)/det Psi'(w)|^2 on {G < -s}.

    Sublevel points are produced exactly, as automorphism images of
    radius e^{-s} factor balls around the pole coordinates.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    wa = _as_h_array(spec, w)
    pole = map_to_pi(spec, wa.reshape(1, -1))[0]
    r = float(np.exp(-s))
    # draw u uniformly in the radius-r factor balls, then push through the
    # factor automorphisms centered at the pole
    small = sample_interior(spec, n_samples, seed, radius_cap=r,
                            frame=Frame.PI)
    eta = np.empty_like(small)
    for sl in spec.ball_slices:
        eta[:, sl] = mobius_ball(pole[sl], small[:, sl])
    for c in spec.disk_indices:
        eta[:, c] = mobius_disk(complex(pole[c]), small[:, c])
    z = map_to_h(spec, eta)
    k_ratio = bergman_diag_array(spec, z) / bergman_diag(spec, wa)
    det_sq = abs_det_G_sq_array(spec, map_to_pi(spec, z))
    det_w_sq = abs_det_G_sq_array(spec, pole.reshape(1, -1))[0]
    jac_ratio = det_w_sq / det_sq          # |det Psi'(z)/det Psi'(w)|^2
    ratios = k_ratio / jac_ratio
    c1 = comparability_constant(s)
    d = comparability_exponent(spec)
    return ComparabilityReport(
        min_ratio=float(np.min(ratios)),
        max_ratio=float(np.max(ratios)),
        lower=c1 ** (-d),
        upper=c1 ** d,
        n_samples=n_samples)
