"""Achievable rate regions: grid evaluation, convex hulls, and intersections.

Regions are convex polygons in the nonnegative rate quadrant, stored as
counterclockwise vertex lists together with the bounding halfplanes
a*R1 + b*R2 <= c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channels import BroadcastCQChannel, CQChannel, MACCQChannel, holevo_chi
from .errors import InvalidInputError
from .operators import ZERO_EIGENVALUE_TOL, ProbabilityDistribution

_VERTEX_DEDUP_TOL = 1e-8
_COLLINEAR_TOL = 1e-12
_CONTAIN_TOL = 1e-9


class RatePair(NamedTuple):
    r1: float
    r2: float


def simplex_lattice(resolution: int, d: int):
    """Integer vectors of length d summing to the resolution."""
    if resolution < 1 or d < 1:
        raise InvalidInputError("resolution and dimension must be >= 1")

    def rec(i, remaining, prefix):
        if i == d - 1:
            yield prefix + (remaining,)
            return
        for k in range(remaining + 1):
            yield from rec(i + 1, remaining - k, prefix + (k,))

    yield from rec(0, resolution, ())


@dataclass(frozen=True)
class DistributionGrid:
    """Lattice of distributions with weights m/resolution on the simplex."""

    labels: tuple
    resolution: int

    def __post_init__(self):
        if not self.labels:
            raise InvalidInputError("grid needs a nonempty label alphabet")
        if self.resolution < 1:
            raise InvalidInputError("grid resolution must be >= 1")
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        d = len(self.labels)
        return math.comb(self.resolution + d - 1, d - 1)

    def weight_matrix(self) -> np.ndarray:
        """All lattice weights as a (grid size, |labels|) array."""
        pts = np.array(list(simplex_lattice(self.resolution, len(self.labels))), dtype=float)
        return pts / self.resolution

    def distributions(self):
        for row in self.weight_matrix():
            yield ProbabilityDistribution(self.labels, row)


def _dedup_points(points, tol=_VERTEX_DEDUP_TOL):
    out = []
    for p in points:
        if not any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in out):
            out.append(p)
    return out


def convex_hull(points) -> list[tuple[float, float]]:
    """Monotone-chain hull, counterclockwise; degenerate inputs give 1-2 points.

    Coordinates are rounded to 12 decimals first: float jitter far below the
    rate scale can otherwise reorder sort ties along a near-vertical edge,
    and the collinearity pops then erode a true corner point.
    """
    pts = sorted(_dedup_points([(round(float(p[0]), 12), round(float(p[1]), 12)) for p in points]))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= _COLLINEAR_TOL:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= _COLLINEAR_TOL:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if not hull:
        hull = [pts[0], pts[-1]]
    return hull


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Convex polygon of achievable rate pairs, containing the origin."""

    vertices: tuple  # RatePair, counterclockwise from the lexicographically smallest
    halfplanes: tuple  # (a, b, c) with a*R1 + b*R2 <= c, unit normals

    @classmethod
    def from_points(cls, points) -> "RateRegion":
        cleaned = []
        for p in points:
            x, y = float(p[0]), float(p[1])
            cleaned.append((0.0 if abs(x) < _VERTEX_DEDUP_TOL else x, 0.0 if abs(y) < _VERTEX_DEDUP_TOL else y))
        if not cleaned:
            raise InvalidInputError("a region needs at least one point")
        for x, y in cleaned:
            if x < 0.0 or y < 0.0:
                raise InvalidInputError(f"rate point ({x}, {y}) is negative")
        hull = convex_hull(cleaned)
        start = min(range(len(hull)), key=lambda i: hull[i])
        ordered = tuple(RatePair(*hull[(start + i) % len(hull)]) for i in range(len(hull)))
        return cls(vertices=ordered, halfplanes=cls._halfplanes_of(ordered))

    @staticmethod
    def _halfplanes_of(vertices) -> tuple:
        planes = []

        def add(a, b, c):
            norm = math.hypot(a, b)
            if norm > 0.0:
                planes.append((a / norm, b / norm, c / norm))

        if len(vertices) == 1:
            (x, y) = vertices[0]
            add(1.0, 0.0, x)
            add(-1.0, 0.0, -x)
            add(0.0, 1.0, y)
            add(0.0, -1.0, -y)
        elif len(vertices) == 2:
            (x0, y0), (x1, y1) = vertices
            dx, dy = x1 - x0, y1 - y0
            add(dy, -dx, dy * x0 - dx * y0)
            add(-dy, dx, -(dy * x0 - dx * y0))
            add(dx, dy, dx * x1 + dy * y1)
            add(-dx, -dy, -(dx * x0 + dy * y0))
        else:
            m = len(vertices)
            for i in range(m):
                (x0, y0), (x1, y1) = vertices[i], vertices[(i + 1) % m]
                # Outward normal of a counterclockwise edge.
                add(y1 - y0, -(x1 - x0), (y1 - y0) * x0 - (x1 - x0) * y0)
        return tuple(planes)

    def contains(self, r1: float, r2: float, tol: float = _CONTAIN_TOL) -> bool:
        return all(a * r1 + b * r2 <= c + tol for a, b, c in self.halfplanes)

    def max_sum_rate(self) -> float:
        return max(v.r1 + v.r2 for v in self.vertices)


def _clip_by_halfplane(vertices, plane, tol=_COLLINEAR_TOL):
    a, b, c = plane
    m = len(vertices)
    if m == 0:
        return []
    if m == 1:
        (x, y) = vertices[0]
        return list(vertices) if a * x + b * y <= c + tol else []
    out = []
    for i in range(m):
        sx, sy = vertices[i]
        ex, ey = vertices[(i + 1) % m]
        ds = a * sx + b * sy - c
        de = a * ex + b * ey - c
        if ds <= tol:
            out.append((sx, sy))
        if (ds <= tol) != (de <= tol) and ds != de:
            t = ds / (ds - de)
            out.append((sx + t * (ex - sx), sy + t * (ey - sy)))
    return _dedup_points(out)


def intersect_regions(first: RateRegion, second: RateRegion) -> RateRegion:
    """Clip the first region by every halfplane of the second."""
    poly = [(v.r1, v.r2) for v in first.vertices]
    for plane in second.halfplanes:
        poly = _clip_by_halfplane(poly, plane)
        if not poly:
            return RateRegion.from_points([(0.0, 0.0)])
    return RateRegion.from_points(poly)


# ---------------------------------------------------------------------------
# Batched entropy helpers for grid sweeps.
# ---------------------------------------------------------------------------


def _batched_entropy_bits(mats: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(mats)
    w = np.clip(w, 0.0, None)
    logs = np.zeros_like(w)
    mask = w > ZERO_EIGENVALUE_TOL
    logs[mask] = np.log2(w[mask])
    return np.maximum(0.0, -(w * logs).sum(axis=-1))


def _chi_evaluator(channel: CQChannel):
    """Fast closure weights -> Holevo information, reusing state entropies."""
    states = np.stack([channel.state(a) for a in channel.alphabet])
    ent = _batched_entropy_bits(states)

    def chi(weights: np.ndarray) -> float:
        avg = np.einsum("i,ijk->jk", weights, states)
        return float(_batched_entropy_bits(avg[None])[0] - weights @ ent)

    return chi


def _pentagon_points(a: float, b: float, c: float):
    a, b, c = max(a, 0.0), max(b, 0.0), max(c, 0.0)
    aa, bb = min(a, c), min(b, c)
    return [
        (0.0, 0.0),
        (bb, 0.0),
        (0.0, aa),
        (bb, min(aa, c - bb)),
        (min(bb, c - aa), aa),
    ]


def mac_region(
    mac: MACCQChannel,
    grid: DistributionGrid,
    variant: str = "conditional",
    grid2: DistributionGrid | None = None,
) -> RateRegion:
    """Union of pentagons over independent sender distributions, then hull.

    Each pair (Q1, Q2) from the two simplex grids yields the pentagon
    {R2 <= A, R1 <= B, R1 + R2 <= C}.  'conditional' averages the slice
    information over the other sender (the form whose classical
    specializations come out right); 'as-written' scores each sender
    against the other-averaged channel.  grid2 defaults to the same
    resolution over the second alphabet.
    """
    if variant not in ("conditional", "as-written"):
        raise InvalidInputError(f"unknown region variant {variant!r}")
    a1, a2 = mac.alphabets
    d1, d2 = len(a1), len(a2)
    if grid.labels != tuple(a1):
        raise InvalidInputError("grid labels must match the first sender alphabet")
    if grid2 is None:
        grid2 = DistributionGrid(tuple(a2), grid.resolution)
    elif grid2.labels != tuple(a2):
        raise InvalidInputError("grid2 labels must match the second sender alphabet")
    states = np.stack([np.stack([mac.state(y1, y2) for y2 in a2]) for y1 in a1])
    dim = states.shape[-1]
    ent = _batched_entropy_bits(states.reshape(d1 * d2, dim, dim)).reshape(d1, d2)

    q1 = grid.weight_matrix()  # (G1, d1)
    q2 = grid2.weight_matrix()  # (G2, d2)
    g1, g2 = q1.shape[0], q2.shape[0]

    # Slice averages reused by both variants: over sender 1 per y2, and the
    # mirror image.
    slice2 = np.einsum("gi,ijkl->gjkl", q1, states)
    h_slice2 = _batched_entropy_bits(slice2.reshape(-1, dim, dim)).reshape(g1, d2)
    slice1 = np.einsum("hj,ijkl->hikl", q2, states)
    h_slice1 = _batched_entropy_bits(slice1.reshape(-1, dim, dim)).reshape(g2, d1)

    sigma = np.einsum("hj,gjkl->ghkl", q2, slice2)  # (G1, G2, dim, dim)
    h_sigma = _batched_entropy_bits(sigma.reshape(-1, dim, dim)).reshape(g1, g2)
    mean_ent = q1 @ ent @ q2.T  # (G1, G2)
    c_bound = h_sigma - mean_ent

    # Convention: the bound built from the first sender's distribution caps
    # R2, the mirror-image bound caps R1.
    if variant == "conditional":
        a_bound = (h_slice2 - q1 @ ent) @ q2.T
        b_bound = q1 @ (h_slice1 - q2 @ ent.T).T
    else:
        a_bound = h_sigma - q1 @ h_slice1.T
        b_bound = h_sigma - h_slice2 @ q2.T

    points = []
    for i in range(g1):
        for j in range(g2):
            points.extend(
                _pentagon_points(float(a_bound[i, j]), float(b_bound[i, j]), float(c_bound[i, j]))
            )
    return RateRegion.from_points(points)


def broadcast_region(bc: BroadcastCQChannel, grid: DistributionGrid) -> RateRegion:
    """Union of per-distribution rectangles (chi to each receiver), then hull."""
    if grid.labels != bc.alphabet:
        raise InvalidInputError("grid labels must match the broadcast alphabet")
    chi1 = _chi_evaluator(bc.marginal(1))
    chi2 = _chi_evaluator(bc.marginal(2))
    points = []
    for weights in grid.weight_matrix():
        x1 = max(0.0, chi1(weights))
        x2 = max(0.0, chi2(weights))
        points.extend([(0.0, 0.0), (x1, 0.0), (0.0, x2), (x1, x2)])
    return RateRegion.from_points(points)


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    cond = u - css / idx > 0
    rho = int(idx[cond][-1])
    theta = css[rho - 1] / rho
    return np.clip(v - theta, 0.0, None)


def _refine_simplex_ascent(chi, weights: np.ndarray, steps: int):
    """Projected coordinate-ascent refinement; accepts only improvements."""
    w = weights.copy()
    best = chi(w)
    history = [best]
    step = 0.5 / max(len(w), 2)
    h = 1e-6
    for _ in range(steps):
        grad = np.zeros_like(w)
        for i in range(len(w)):
            probe = w.copy()
            probe[i] += h
            probe = _project_to_simplex(probe)
            grad[i] = (chi(probe) - best) / h
        cand = _project_to_simplex(w + step * grad)
        cand_val = chi(cand)
        if cand_val > best:
            w, best = cand, cand_val
        else:
            step /= 2.0
        history.append(best)
    return w, best, history


def optimize_chi(
    channel: CQChannel, grid: DistributionGrid, refine_steps: int = 50
) -> tuple[ProbabilityDistribution, float]:
    """Grid search for the Holevo information, then local simplex ascent."""
    if grid.labels != channel.alphabet:
        raise InvalidInputError("grid labels must match the channel alphabet")
    chi = _chi_evaluator(channel)
    mat = grid.weight_matrix()
    values = [chi(row) for row in mat]
    best_idx = int(np.argmax(values))
    w, best, _ = _refine_simplex_ascent(chi, mat[best_idx], refine_steps)
    w = w / w.sum()
    return ProbabilityDistribution(channel.alphabet, w), float(best)


def weighted_boundary_point(region, mu: float) -> RatePair:
    """Vertex maximizing R1 + mu*R2; accepts a region or a region factory."""
    if callable(region):
        region = region()
    if not isinstance(region, RateRegion):
        raise InvalidInputError("expected a RateRegion or a callable producing one")
    if mu < 0.0:
        raise InvalidInputError(f"weight must be nonnegative, got {mu}")
    best = max(region.vertices, key=lambda v: v.r1 + mu * v.r2)
    return best
