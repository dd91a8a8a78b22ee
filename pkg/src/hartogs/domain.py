"""Geometry of the generalized Hartogs domain and its product model.

The domain in H-coordinates is

    max_j ||z~_j|| < |z_{k+1}|^b < ... < |z_n|^b < 1,

with ball blocks z~_1..z~_l of sizes k_1..k_l occupying the first
k = k_1+...+k_l coordinates and a rising modulus chain in the last n-k.
The product model is B^{k_1} x ... x B^{k_l} x (D*)^{n-k}; the two are
identified by the biholomorphism `psi_forward` (inverse `psi_inverse`).

All coordinate arrays are complex128 of shape (n,) for single points or
(N, n) for batches; coordinate index c < k belongs to a ball block and
c >= k to the disk chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainViolation, InvalidExponent, InvalidPartition


class Frame(Enum):
    """Coordinate system tag: H for the Hartogs domain, PI for the product."""

    H = "H"
    PI = "Pi"


@dataclass(frozen=True)
class CPoint:
    """A point of C^n together with the frame its coordinates refer to."""

    coords: tuple[complex, ...]
    frame: Frame

    def __len__(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.complex128)


@dataclass(frozen=True)
class DomainSpec:
    """The tuple (partition, n, b) plus every constant derived from it.

    Single source of truth for the threshold formulas: all derived
    quantities that enter an if-and-only-if statement are exact
    (ints or Fractions).
    """

    partition: tuple[int, ...]
    n: int
    b: int

    @property
    def k(self) -> int:
        return sum(self.partition)

    @property
    def l(self) -> int:
        return len(self.partition)

    @property
    def c_bk(self) -> int:
        """The camber constant k*(b-1)."""
        return self.k * (self.b - 1)

    @property
    def ball_slices(self) -> tuple[slice, ...]:
        out = []
        start = 0
        for kj in self.partition:
            out.append(slice(start, start + kj))
            start += kj
        return tuple(out)

    @property
    def disk_indices(self) -> range:
        return range(self.k, self.n)

    def disk_jacobian_exponent(self, c: int) -> int:
        """Modulus exponent of coordinate c (0-based, c >= k) in det G'."""
        return c + (self.b - 1) * self.k

    def corollary_interval(self) -> tuple[Fraction, Fraction]:
        """Exact open p-interval on which the projection is L^p bounded."""
        n, c = self.n, self.c_bk
        return (Fraction(2 * n + 2 * c, n + 1 + c),
                Fraction(2 * n + 2 * c, n - 1 + c))

    def fingerprint(self) -> str:
        part = ",".join(str(k) for k in self.partition)
        return f"n={self.n};k=({part});b={self.b}"

    def to_json(self) -> str:
        return json.dumps({"partition": list(self.partition),
                           "n": self.n, "b": self.b})

    @staticmethod
    def from_json(text: str | dict) -> "DomainSpec":
        data = json.loads(text) if isinstance(text, str) else text
        return make_domain(data["partition"], data["n"], data["b"])


def make_domain(partition: Iterable[int], n: int, b: int) -> DomainSpec:
    """Validate (partition, n, b) and return the immutable spec."""
    part = tuple(int(k) for k in partition)
    n = int(n)
    b = int(b)
    if not part or any(k < 1 for k in part):
        raise InvalidPartition(f"partition entries must be >= 1, got {part}")
    if sum(part) >= n:
        raise InvalidPartition(
            f"sum(partition)={sum(part)} must be < n={n}")
    if b < 1:
        raise InvalidExponent(f"b must be >= 1, got {b}")
    return DomainSpec(partition=part, n=n, b=b)


def _coords(point: CPoint | Sequence[complex] | np.ndarray, spec: DomainSpec,
            expect_frame: Frame | None) -> np.ndarray:
    if isinstance(point, CPoint):
        if expect_frame is not None and point.frame is not expect_frame:
            raise DomainViolation(
                f"expected frame {expect_frame.value}, got {point.frame.value}")
        arr = point.as_array()
    else:
        arr = np.asarray(point, dtype=np.complex128)
    if arr.shape[-1] != spec.n:
        raise DomainViolation(
            f"point has {arr.shape[-1]} coordinates, spec needs {spec.n}")
    return arr


def contains_H(spec: DomainSpec, z: CPoint | Sequence[complex]) -> bool:
    """Strict membership test in H-coordinates; boundary counts as outside."""
    arr = _coords(z, spec, Frame.H if isinstance(z, CPoint) else None)
    return bool(np.all(contains_H_mask(spec, arr.reshape(1, -1))))


def contains_Pi(spec: DomainSpec, eta: CPoint | Sequence[complex]) -> bool:
    """Strict membership test in the product model (punctured disks)."""
    arr = _coords(eta, spec, Frame.PI if isinstance(eta, CPoint) else None)
    return bool(np.all(contains_Pi_mask(spec, arr.reshape(1, -1))))


def contains_H_mask(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Vectorized contains_H over an (N, n) array."""
    pts = np.atleast_2d(pts)
    k = spec.k
    ball_max = np.zeros(pts.shape[0])
    for sl in spec.ball_slices:
        norms = np.linalg.norm(pts[:, sl], axis=1)
        ball_max = np.maximum(ball_max, norms)
    mods = np.abs(pts[:, k:])
    ok = ball_max < mods[:, 0] ** spec.b
    for i in range(mods.shape[1] - 1):
        ok &= mods[:, i] < mods[:, i + 1]
    ok &= mods[:, -1] < 1.0
    return ok


def contains_Pi_mask(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Vectorized contains_Pi over an (N, n) array."""
    pts = np.atleast_2d(pts)
    ok = np.ones(pts.shape[0], dtype=bool)
    for sl in spec.ball_slices:
        ok &= np.linalg.norm(pts[:, sl], axis=1) < 1.0
    mods = np.abs(pts[:, spec.k:])
    ok &= np.all((mods > 0.0) & (mods < 1.0), axis=1)
    return ok


def map_to_pi(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Apply the biholomorphism H -> Pi to an (N, n) array (no membership check)."""
    pts = np.atleast_2d(pts)
    k, n = spec.k, spec.n
    out = np.empty_like(pts)
    out[:, k:n - 1] = pts[:, k:n - 1] / pts[:, k + 1:n]
    out[:, n - 1] = pts[:, n - 1]
    out[:, :k] = pts[:, :k] / pts[:, k][:, None] ** spec.b
    return out


def map_to_h(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Apply the inverse biholomorphism Pi -> H to an (N, n) array."""
    pts = np.atleast_2d(pts)
    k, n = spec.k, spec.n
    out = np.empty_like(pts)
    # suffix products along the chain: z_c = eta_c * eta_{c+1} * ... * eta_{n-1}
    out[:, k:] = np.cumprod(pts[:, k:][:, ::-1], axis=1)[:, ::-1]
    out[:, :k] = pts[:, :k] * out[:, k][:, None] ** spec.b
    return out


def psi_forward(spec: DomainSpec, z: CPoint) -> CPoint:
    """Map a point of H to the product model."""
    arr = _coords(z, spec, Frame.H)
    if not np.all(contains_H_mask(spec, arr.reshape(1, -1))):
        raise DomainViolation(f"point {z!r} is not in the Hartogs domain")
    eta = map_to_pi(spec, arr.reshape(1, -1))[0]
    return CPoint(tuple(eta.tolist()), Frame.PI)


def psi_inverse(spec: DomainSpec, eta: CPoint) -> CPoint:
    """Map a point of the product model back to H."""
    arr = _coords(eta, spec, Frame.PI)
    if not np.all(contains_Pi_mask(spec, arr.reshape(1, -1))):
        raise DomainViolation(f"point {eta!r} is not in the product domain")
    z = map_to_h(spec, arr.reshape(1, -1))[0]
    return CPoint(tuple(z.tolist()), Frame.H)


def jacobian_G(spec: DomainSpec, eta: CPoint | Sequence[complex]) -> complex:
    """Determinant of the complex Jacobian of the inverse map at eta."""
    arr = _coords(eta, spec, Frame.PI if isinstance(eta, CPoint) else None)
    if not np.all(contains_Pi_mask(spec, arr.reshape(1, -1))):
        raise DomainViolation("jacobian_G requires a point of the product domain")
    val = complex(1.0)
    for c in spec.disk_indices:
        val *= complex(arr[c]) ** spec.disk_jacobian_exponent(c)
    return val


def det_G_prime_array(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Vectorized det G' over (N, n) product-model points."""
    pts = np.atleast_2d(pts)
    val = np.ones(pts.shape[0], dtype=np.complex128)
    for c in spec.disk_indices:
        val *= pts[:, c] ** spec.disk_jacobian_exponent(c)
    return val


def abs_det_G_sq_array(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """|det G'|^2 over (N, n) product-model points (the pullback weight)."""
    pts = np.atleast_2d(pts)
    val = np.ones(pts.shape[0])
    for c in spec.disk_indices:
        val *= np.abs(pts[:, c]) ** (2 * spec.disk_jacobian_exponent(c))
    return val


def det_psi_prime(spec: DomainSpec, z: CPoint | Sequence[complex]) -> complex:
    """det of the forward Jacobian at z, computed as 1/det G' at the image."""
    arr = _coords(z, spec, Frame.H if isinstance(z, CPoint) else None)
    eta = map_to_pi(spec, arr.reshape(1, -1))[0]
    return 1.0 / jacobian_G(spec, CPoint(tuple(eta.tolist()), Frame.PI))


def theta_map(spec: DomainSpec, z: CPoint) -> CPoint:
    """Flatten the exponent: map the b-domain onto the b=1 domain.

    Points with z_{k+1} = 0 never occur inside the domain, so the
    membership precondition already excludes the ambiguous case.
    """
    arr = _coords(z, spec, Frame.H)
    if not np.all(contains_H_mask(spec, arr.reshape(1, -1))):
        raise DomainViolation("theta_map requires an interior point")
    out = arr.copy()
    out[:spec.k] = arr[:spec.k] * arr[spec.k] ** (1 - spec.b)
    return CPoint(tuple(out.tolist()), Frame.H)
