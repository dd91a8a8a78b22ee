"""Quadrature grids and Monte-Carlo samplers on the product domain.

Every factor measure is normalized to mass 1, so the weights of a full
tensor grid sum to 1 exactly.  Radial directions use Gauss rules in the
squared radius t = r^2 (Gauss-Jacobi with weight t^{k-1} for a ball of
complex dimension k), which integrates polynomial moments exactly;
angular directions use uniform nodes, exact for trigonometric
polynomials below the node count.  Optional geometric panels refine the
radial rule toward the puncture at t=0 and toward the rim at t=1 for
integrands with (integrable) endpoint singularities.

Integrals over the Hartogs domain are pulled back through the inverse
map with the |det G'|^2 weight.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import _backend
from .domain import (CPoint, DomainSpec, Frame, abs_det_G_sq_array, map_to_h)
from .errors import NonFiniteIntegrand, ResourceLimit

DEFAULT_MAX_POINTS = 4_000_000


@dataclass
class SampleSet:
    """Weighted point cloud on the product domain."""

    points: np.ndarray          # (N, n) complex128, product-model coordinates
    weights: np.ndarray         # (N,) float64, nonnegative
    kind: str                   # "grid" | "montecarlo"
    measure_total: float
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    def iter_cpoints(self) -> Iterator[CPoint]:
        for row in self.points:
            yield CPoint(tuple(row.tolist()), Frame.PI)

    def pullback_weights(self, spec: DomainSpec) -> np.ndarray:
        """weights * |det G'|^2, cached per spec."""
        key = ("pullback", spec)
        if key not in self._cache:
            self._cache[key] = self.weights * abs_det_G_sq_array(spec, self.points)
        return self._cache[key]

    def h_points(self, spec: DomainSpec) -> np.ndarray:
        key = ("h_points", spec)
        if key not in self._cache:
            self._cache[key] = map_to_h(spec, self.points)
        return self._cache[key]

    def to_csv(self, path) -> None:
        n = self.points.shape[1]
        header = []
        for c in range(n):
            header += [f"re_{c}", f"im_{c}"]
        header.append("weight")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row, w in zip(self.points, self.weights):
                flat = []
                for v in row:
                    flat += [f"{v.real:.17g}", f"{v.imag:.17g}"]
                flat.append(f"{w:.17g}")
                writer.writerow(flat)


def _panel_edges(inner_panels: int, outer_panels: int, ratio: float
                 ) -> list[tuple[float, float]]:
    """Partition of (0, 1) geometrically refined toward 0 and/or 1."""
    cuts = {0.0, 1.0}
    for g in range(1, inner_panels + 1):
        cuts.add(ratio ** g)
    for g in range(1, outer_panels + 1):
        cuts.add(1.0 - ratio ** g)
    edges = sorted(cuts)
    return list(zip(edges[:-1], edges[1:]))


def radial_rule_t(nodes: int, weight_power: int = 0, inner_panels: int = 0,
                  outer_panels: int = 0, ratio: float = 0.15
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for int_0^1 g(t) (p+1) t^p dt with p = weight_power.

    Returns (t_nodes, weights); weights sum to 1 exactly up to roundoff.
    On the leftmost panel the Jacobi rule absorbs the t^p density; other
    panels use plain Gauss-Legendre with the density factored in.
    """
    panels = _panel_edges(inner_panels, outer_panels, ratio)
    gl_x, gl_w = roots_legendre(nodes)
    if weight_power > 0:
        gj_x, gj_w = roots_jacobi(nodes, 0.0, float(weight_power))
    ts, ws = [], []
    for i, (a, b) in enumerate(panels):
        h = b - a
        if weight_power > 0 and i == 0 and a == 0.0:
            # t in (0, b): t = b*(x+1)/2, density (p+1) t^p dt
            t = b * (gj_x + 1.0) / 2.0
            w = gj_w * (weight_power + 1) * b ** (weight_power + 1) \
                / 2.0 ** (weight_power + 1)
        else:
            t = a + h * (gl_x + 1.0) / 2.0
            w = gl_w * (h / 2.0) * (weight_power + 1) * t ** weight_power
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def _angles(count: int) -> np.ndarray:
    return 2.0 * np.pi * (np.arange(count) + 0.5) / count


def disk_factor(radial: int, angular: int, inner_panels: int = 0,
                outer_panels: int = 0, ratio: float = 0.15
                ) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the normalized unit disk (radial x angular)."""
    t, tw = radial_rule_t(radial, 0, inner_panels, outer_panels, ratio)
    theta = _angles(angular)
    r = np.sqrt(t)
    pts = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    wts = np.repeat(tw / angular, angular)
    return pts[:, None], wts


def ball_factor(kj: int, radial: int, angular: int, stick: int | None = None,
                inner_panels: int = 0, outer_panels: int = 0,
                ratio: float = 0.15) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the normalized unit ball of complex dimension kj.

    Splits |w_i|^2 = t * lambda_i with t the squared radius (Gauss-Jacobi,
    weight t^{kj-1}) and lambda on the uniform simplex via stick-breaking
    Beta rules; each complex coordinate carries a uniform phase.
    """
    if kj == 1:
        return disk_factor(radial, angular, inner_panels, outer_panels, ratio)
    stick = stick or radial
    t, tw = radial_rule_t(radial, kj - 1, inner_panels, outer_panels, ratio)
    lam = np.ones((1, kj))
    lam_w = np.ones(1)
    remaining = np.ones(1)
    for i in range(kj - 1):
        p = kj - i - 1
        x, w = roots_jacobi(stick, float(p), 0.0)
        v = (x + 1.0) / 2.0
        vw = w * (p + 1) / 2.0 ** (p + 1)
        new_lam = np.empty((lam.shape[0] * stick, kj))
        new_w = np.empty(lam.shape[0] * stick)
        new_rem = np.empty(lam.shape[0] * stick)
        for a in range(lam.shape[0]):
            for s in range(stick):
                row = a * stick + s
                new_lam[row] = lam[a]
                new_lam[row, i] = remaining[a] * v[s]
                new_rem[row] = remaining[a] * (1.0 - v[s])
                new_w[row] = lam_w[a] * vw[s]
        lam, lam_w, remaining = new_lam, new_w, new_rem
    lam[:, kj - 1] = remaining

    phases = _angles(angular)
    phase_grid = np.stack(np.meshgrid(*([phases] * kj), indexing="ij"),
                          axis=-1).reshape(-1, kj)
    phase_w = np.full(phase_grid.shape[0], angular ** (-kj))

    n_t, n_lam, n_ph = len(t), lam.shape[0], phase_grid.shape[0]
    pts = np.empty((n_t * n_lam * n_ph, kj), dtype=np.complex128)
    wts = np.empty(n_t * n_lam * n_ph)
    row = 0
    for it in range(n_t):
        radii = np.sqrt(t[it] * lam)            # (n_lam, kj)
        for il in range(n_lam):
            block = radii[il][None, :] * np.exp(1j * phase_grid)
            pts[row:row + n_ph] = block
            wts[row:row + n_ph] = tw[it] * lam_w[il] * phase_w
            row += n_ph
    return pts, wts


def _tensor(factors: list[tuple[np.ndarray, np.ndarray]]
            ) -> tuple[np.ndarray, np.ndarray]:
    pts, wts = factors[0]
    for fp, fw in factors[1:]:
        n_old, n_new = pts.shape[0], fp.shape[0]
        pts = np.concatenate([np.repeat(pts, n_new, axis=0),
                              np.tile(fp, (n_old, 1))], axis=1)
        wts = (wts[:, None] * fw[None, :]).ravel()
    return pts, wts


def grid_Pi(spec: DomainSpec, radial_nodes: int, angular_nodes: int, *,
            inner_panels: int = 0, outer_panels: int = 0,
            panel_ratio: float = 0.15, stick_nodes: int | None = None,
            max_points: int = DEFAULT_MAX_POINTS) -> SampleSet:
    """Tensor-product quadrature grid over the product domain."""
    if radial_nodes < 2 or angular_nodes < 4:
        raise ValueError("need radial_nodes >= 2 and angular_nodes >= 4")
    factors = []
    for kj in spec.partition:
        factors.append(ball_factor(kj, radial_nodes, angular_nodes,
                                   stick_nodes, inner_panels, outer_panels,
                                   panel_ratio))
    for _ in spec.disk_indices:
        factors.append(disk_factor(radial_nodes, angular_nodes,
                                   inner_panels, outer_panels, panel_ratio))
    total = 1
    for fp, _ in factors:
        total *= fp.shape[0]
    if total > max_points:
        raise ResourceLimit(
            f"grid would have {total} points (cap {max_points})")
    pts, wts = _tensor(factors)
    return SampleSet(points=pts, weights=wts, kind="grid",
                     measure_total=float(np.sum(wts)))


def montecarlo_Pi(spec: DomainSpec, n_samples: int, seed: int) -> SampleSet:
    """I.i.d. uniform samples from each factor, equal weights 1/N."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    cols = []
    for kj in spec.partition:
        g = rng.standard_normal((n_samples, kj)) \
            + 1j * rng.standard_normal((n_samples, kj))
        g /= np.linalg.norm(g, axis=1)[:, None]
        radius = rng.random(n_samples) ** (1.0 / (2 * kj))
        cols.append(g * radius[:, None])
    for _ in spec.disk_indices:
        r = np.sqrt(rng.random(n_samples))
        theta = 2.0 * np.pi * rng.random(n_samples)
        cols.append((r * np.exp(1j * theta))[:, None])
    pts = np.concatenate(cols, axis=1)
    wts = np.full(n_samples, 1.0 / n_samples)
    return SampleSet(points=pts, weights=wts, kind="montecarlo",
                     measure_total=1.0)


def sample_interior(spec: DomainSpec, n: int, seed: int,
                    radius_cap: float = 1.0, radius_min: float = 0.0,
                    frame: Frame = Frame.H) -> np.ndarray:
    """Random interior points with factor radii in [radius_min, radius_cap)."""
    rng = np.random.default_rng(seed)
    cols = []
    lo, hi = radius_min ** 2, radius_cap ** 2
    for kj in spec.partition:
        g = rng.standard_normal((n, kj)) + 1j * rng.standard_normal((n, kj))
        g /= np.linalg.norm(g, axis=1)[:, None]
        t = lo + (hi - lo) * rng.random(n)
        cols.append(g * (t ** (1.0 / (2 * kj)))[:, None])
    for _ in spec.disk_indices:
        t = lo + (hi - lo) * rng.random(n)
        theta = 2.0 * np.pi * rng.random(n)
        cols.append((np.sqrt(t) * np.exp(1j * theta))[:, None])
    eta = np.concatenate(cols, axis=1)
    if frame is Frame.PI:
        return eta
    return map_to_h(spec, eta)


def _evaluate(integrand: Callable, pts: np.ndarray) -> np.ndarray:
    """Call a vectorized integrand; fall back to per-point evaluation."""
    try:
        vals = np.asarray(integrand(pts), dtype=np.complex128)
        if vals.shape == (pts.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([complex(integrand(p)) for p in pts], dtype=np.complex128)


def integrate_Pi(spec: DomainSpec, integrand: Callable | np.ndarray,
                 samples: SampleSet) -> complex:
    """Quadrature of a function given on product-model coordinates."""
    if callable(integrand):
        vals = _evaluate(integrand, samples.points)
    else:
        vals = np.asarray(integrand, dtype=np.complex128)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrand("integrand not finite on the sample set")
    return complex(np.sum(vals * samples.weights))


def integrate_H(spec: DomainSpec, integrand: Callable, samples: SampleSet, *,
                threads: int = 1, chunk: int = 262_144) -> complex:
    """Pullback quadrature of an integrand defined on H-coordinates.

    Evaluations run chunked (optionally across a thread pool); the final
    reduction always sums chunk partials in a fixed order so results are
    reproducible for any thread count.
    """
    z = samples.h_points(spec)
    w = samples.pullback_weights(spec)
    n = z.shape[0]
    ranges = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]

    def partial(rng_pair):
        lo, hi = rng_pair
        vals = _evaluate(integrand, z[lo:hi])
        if not np.all(np.isfinite(vals)):
            raise NonFiniteIntegrand(
                "integrand not finite on the sample set")
        return complex(np.sum(vals * w[lo:hi]))

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partial, ranges))
    else:
        parts = [partial(r) for r in ranges]
    return complex(sum(parts))


def pullback_eta_exponents(spec: DomainSpec, alpha: Sequence[int]
                           ) -> np.ndarray:
    """Integer exponent vector of z^alpha written in product coordinates."""
    alpha = tuple(int(a) for a in alpha)
    exps = np.zeros(spec.n, dtype=np.int64)
    exps[:spec.k] = alpha[:spec.k]
    s = sum(alpha[:spec.k])
    acc = 0
    for c in spec.disk_indices:
        acc += alpha[c]
        exps[c] = spec.b * s + acc
    return exps


def monomial_values_pi(spec: DomainSpec, indices: Sequence[Sequence[int]],
                       pts: np.ndarray) -> np.ndarray:
    """(M, P) matrix of z^alpha evaluated through product coordinates."""
    exps = np.stack([pullback_eta_exponents(spec, a) for a in indices])
    return _backend.monomial_matrix(pts, exps)


def gram_matrix(spec: DomainSpec, indices: Sequence[Sequence[int]],
                samples: SampleSet, chunk: int = 200_000) -> np.ndarray:
    """Inner-product matrix <z^a, z^b> under the sample quadrature."""
    w = samples.pullback_weights(spec)
    m = len(indices)
    gram = np.zeros((m, m), dtype=np.complex128)
    for lo in range(0, len(samples), chunk):
        hi = min(lo + chunk, len(samples))
        vals = monomial_values_pi(spec, indices, samples.points[lo:hi])
        gram += (vals * w[lo:hi]) @ vals.conj().T
    return gram
