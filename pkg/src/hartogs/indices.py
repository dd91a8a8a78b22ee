"""Monomial basis of the Bergman space: admissibility, enumeration, norms.

A multi-index alpha lives in N^k x Z^{n-k}.  Pulling |z^alpha|^2 together
with the Jacobian weight back to the product model turns every disk
coordinate c (0-based, c >= k) into a radial moment |eta_c|^{2 e_c} with

    e_c = b*S + A_c + c + (b-1)*k,

where S is the sum of the ball-block entries and A_c the partial sum of
the chain entries up to c.  The monomial is square integrable exactly
when every e_c >= 0, which is the basis admissibility condition, and the
squared norm is the product of the disk moments 1/(e_c+1) with the ball
moments k_j! * beta! / (k_j + |beta|)!.  All of this is exact integer /
rational arithmetic; floats appear only on request.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .domain import DomainSpec
from .errors import MalformedIndex, NotAdmissible

MultiIndex = tuple[int, ...]


def _validate(spec: DomainSpec, alpha: Sequence[int]) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != spec.n:
        raise MalformedIndex(f"index needs {spec.n} entries, got {len(alpha)}")
    if any(a < 0 for a in alpha[:spec.k]):
        raise MalformedIndex(
            f"ball-block entries must be nonnegative, got {alpha[:spec.k]}")
    return alpha


def disk_exponents(spec: DomainSpec, alpha: Sequence[int]) -> tuple[int, ...]:
    """Per disk coordinate, the pullback radial exponent e_c (integers)."""
    alpha = _validate(spec, alpha)
    s = sum(alpha[:spec.k])
    out = []
    acc = 0
    for c in spec.disk_indices:
        acc += alpha[c]
        out.append(spec.b * s + acc + spec.disk_jacobian_exponent(c))
    return tuple(out)


def is_admissible(spec: DomainSpec, alpha: Sequence[int]) -> bool:
    """True iff z^alpha is square integrable on the domain."""
    return all(e >= 0 for e in disk_exponents(spec, alpha))


def enumerate_basis(spec: DomainSpec, bound: int) -> list[MultiIndex]:
    """All admissible indices with every |alpha_c| <= bound.

    Order is graded by sum(|alpha_c|), ties broken lexicographically, so
    truncated kernel series and test tables are reproducible.
    """
    if bound < 0:
        raise ValueError("bound must be >= 0")
    ranges = [range(0, bound + 1)] * spec.k + \
             [range(-bound, bound + 1)] * (spec.n - spec.k)
    found = [alpha for alpha in product(*ranges) if is_admissible(spec, alpha)]
    found.sort(key=lambda a: (sum(abs(x) for x in a), a))
    return found


def ball_moment(kj: int, beta: Sequence[int]) -> Fraction:
    """Normalized monomial moment of the unit ball: k! beta! / (k+|beta|)!."""
    beta = tuple(int(x) for x in beta)
    if any(x < 0 for x in beta):
        raise MalformedIndex(f"ball exponents must be nonnegative, got {beta}")
    num = math.factorial(kj)
    for x in beta:
        num *= math.factorial(x)
    return Fraction(num, math.factorial(kj + sum(beta)))


def monomial_norm_sq_exact(spec: DomainSpec, alpha: Sequence[int]) -> Fraction:
    """Exact squared L^2 norm of z^alpha; raises NotAdmissible if divergent."""
    alpha = _validate(spec, alpha)
    exps = disk_exponents(spec, alpha)
    if any(e < 0 for e in exps):
        raise NotAdmissible(
            f"{alpha} has a divergent pullback exponent: {exps}")
    val = Fraction(1)
    for sl, kj in zip(spec.ball_slices, spec.partition):
        val *= ball_moment(kj, alpha[sl])
    for e in exps:
        val *= Fraction(1, e + 1)
    return val


def monomial_norm_sq(spec: DomainSpec, alpha: Sequence[int]) -> float:
    """Float form of monomial_norm_sq_exact."""
    return float(monomial_norm_sq_exact(spec, alpha))


@dataclass
class OrthogonalityReport:
    """Worst off-diagonal inner product and diagonal norm agreement."""

    bound: int
    n_indices: int
    max_offdiag: float
    max_diag_rel_err: float


def check_orthogonality(spec: DomainSpec, bound: int, samples
                        ) -> OrthogonalityReport:
    """Gram matrix of the truncated basis under the sample quadrature.

    Off-diagonal entries vanish by angular symmetry and must come out
    below the quadrature residue; diagonal entries must match the closed
    forms.
    """
    from .quadrature import gram_matrix  # local import to avoid a cycle

    indices = enumerate_basis(spec, bound)
    gram = gram_matrix(spec, indices, samples)
    diag = np.real(np.diag(gram)).copy()
    exact = np.array([monomial_norm_sq(spec, a) for a in indices])
    off = gram - np.diag(np.diag(gram))
    return OrthogonalityReport(
        bound=bound,
        n_indices=len(indices),
        max_offdiag=float(np.max(np.abs(off))) if len(indices) > 1 else 0.0,
        max_diag_rel_err=float(np.max(np.abs(diag - exact) / exact)),
    )


def basis_rows(spec: DomainSpec, bound: int) -> Iterator[dict]:
    """Row dicts for the basis CSV dump (exact norms as num/den)."""
    for alpha in enumerate_basis(spec, bound):
        norm = monomial_norm_sq_exact(spec, alpha)
        yield {
            "spec": spec.fingerprint(),
            "alpha": " ".join(str(a) for a in alpha),
            "admissible": 1,
            "norm_sq_num": norm.numerator,
            "norm_sq_den": norm.denominator,
            "norm_sq": float(norm),
        }


def basis_to_csv(spec: DomainSpec, bound: int, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=[
            "spec", "alpha", "admissible", "norm_sq_num", "norm_sq_den",
            "norm_sq"])
        writer.writeheader()
        for row in basis_rows(spec, bound):
            writer.writerow(row)
