"""Flow-grid partitioning: clustering, boundary extraction, line fitting.

Reduces a gridded 2D flow field to a piecewise-constant description. Grid
cells are clustered on normalized position+velocity features; boundary
points are midpoints between differently-labeled neighbors; each boundary
point set is fitted with a straight line a*x + y + c = 0; each cluster gets
its arithmetic-mean flow.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, PartitionError

EARTH_RADIUS_M = 6371000.0


@dataclass(frozen=True)
class FlowGrid:
    """Rectangular lattice of positions with one flow vector per cell."""

    positions: np.ndarray  # (nx, ny, 2)
    velocities: np.ndarray  # (nx, ny, 2)

    def __post_init__(self):
        p, v = self.positions, self.velocities
        if p.ndim != 3 or p.shape[2] != 2 or p.shape != v.shape:
            raise PartitionError("positions and velocities must both be (nx, ny, 2)")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(p)):
            raise PartitionError("grid holds non-finite values")

    @property
    def nx(self) -> int:
        return self.positions.shape[0]

    @property
    def ny(self) -> int:
        return self.positions.shape[1]

    @staticmethod
    def from_axes(xs, ys, velocities) -> "FlowGrid":
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        pos = np.empty((len(xs), len(ys), 2))
        pos[:, :, 0] = xs[:, None]
        pos[:, :, 1] = ys[None, :]
        return FlowGrid(positions=pos, velocities=np.asarray(velocities, dtype=float))


@dataclass(frozen=True)
class LineFit:
    """Fitted boundary line a*x + y + c = 0, or x = c when vertical is set."""

    a: float
    c: float
    vertical: bool = False

    def distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self.vertical:
            return abs(p[0] - self.c)
        return abs(self.a * p[0] + p[1] + self.c) / math.sqrt(self.a * self.a + 1.0)


@dataclass
class PartitionResult:
    """Clustering plus derived boundaries and per-region mean flows.

    A label pair can meet along several disconnected strips (a band cut out
    of a background field touches it on both sides), so fitted_lines maps
    each pair to a list with one line per spatially-connected point group.
    """

    k: int
    labels: np.ndarray  # (nx, ny) int
    centroids: np.ndarray  # (k, 4)
    mean_flows: np.ndarray  # (k, 2)
    boundary_points: dict  # (alpha, beta) -> (m, 2) array
    fitted_lines: dict  # (alpha, beta) -> list[LineFit]
    objective_history: list = field(default_factory=list)


def feature_vectors(grid: FlowGrid) -> np.ndarray:
    """Per-cell 4-vectors: coordinates scaled by their max magnitudes and the
    flow scaled by the peak flow speed, so every feature lives in [-1, 1].
    """
    if grid.nx * grid.ny == 0:
        raise PartitionError("grid is empty")
    p = grid.positions.reshape(-1, 2)
    v = grid.velocities.reshape(-1, 2)
    mx = np.abs(p[:, 0]).max()
    my = np.abs(p[:, 1]).max()
    if mx == 0.0 or my == 0.0:
        raise PartitionError("position normalization needs a nonzero coordinate range")
    speed = np.sqrt(v[:, 0] ** 2 + v[:, 1] ** 2).max()
    if speed == 0.0:
        raise PartitionError(
            "all-zero flow: cluster on positions only instead of flow features"
        )
    return np.column_stack([
        np.abs(p[:, 0]) / mx,
        np.abs(p[:, 1]) / my,
        v[:, 0] / speed,
        v[:, 1] / speed,
    ])


def _kmeans_objective(features, labels, centroids) -> float:
    return float(np.sum((features - centroids[labels]) ** 2))


def _seed_centroids(features, k, rng) -> np.ndarray:
    """Distance-weighted seeding: each new centroid drawn with probability
    proportional to the squared distance from the nearest chosen one."""
    n = len(features)
    centroids = np.empty((k, features.shape[1]))
    centroids[0] = features[rng.integers(n)]
    d2 = np.sum((features - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centroids[i] = features[rng.integers(n)]
            continue
        centroids[i] = features[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((features - centroids[i]) ** 2, axis=1))
    return centroids


def kmeans(features, k: int, seed: int = 0, max_iter: int = 300, trace: list | None = None):
    """Lloyd's iteration to an assignment fixed point.

    Empty clusters are re-seeded to the point farthest from its centroid.
    Pass a list as trace to collect the objective value after each assign
    step (non-increasing). Returns (labels, centroids).
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise PartitionError("features must be a 2-D array")
    n_distinct = len(np.unique(features, axis=0))
    if not (1 <= k <= n_distinct):
        raise PartitionError(f"k must be between 1 and the number of distinct points ({n_distinct})")
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(features, k, rng)
    labels = None
    for _ in range(max_iter):
        d2 = np.sum((features[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(d2[np.arange(len(features)), new_labels]))
                new_labels[far] = c
        if trace is not None:
            trace.append(_kmeans_objective(features, new_labels, centroids))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = features[labels == c].mean(axis=0)
    return labels, centroids


def boundary_points(grid: FlowGrid, labels) -> dict:
    """Midpoints between 4-neighbor cells with different labels, bucketed by
    the unordered label pair; each adjacent pair contributes once."""
    labels = np.asarray(labels)
    if labels.shape != (grid.nx, grid.ny):
        raise PartitionError("labels must be shaped like the grid")
    out: dict[tuple[int, int], list] = {}
    for i in range(grid.nx):
        for j in range(grid.ny):
            for m, n in ((i + 1, j), (i, j + 1)):  # right/up only: one visit per pair
                if m >= grid.nx or n >= grid.ny:
                    continue
                a, b = int(labels[i, j]), int(labels[m, n])
                if a == b:
                    continue
                key = (min(a, b), max(a, b))
                mid = 0.5 * (grid.positions[i, j] + grid.positions[m, n])
                out.setdefault(key, []).append(mid)
    return {key: np.vstack(pts) for key, pts in out.items()}


def fit_line(points, objective: str = "squared") -> LineFit:
    """Straight line through a point set, minimizing perpendicular distances.

    The default minimizes the sum of squared distances (orthogonal
    regression via the 2x2 covariance eigen-decomposition); objective
    "absolute" minimizes the plain sum of distances by iteratively
    reweighting the same decomposition. A best-fit line within 1e-9 of
    vertical cannot be written as a*x + y + c = 0 and comes back as the
    explicit vertical variant x = c.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or len(points) < 2:
        raise PartitionError("fit_line needs at least two 2-D points")
    if np.allclose(points, points[0], atol=1e-12):
        raise PartitionError("fit_line needs non-coincident points")
    if objective not in ("squared", "absolute"):
        raise PartitionError(f"unknown fit objective {objective!r}")

    w = np.ones(len(points))
    normal, center = _weighted_orthogonal(points, w)
    if objective == "absolute":
        for _ in range(50):
            r = np.abs((points - center) @ normal)
            w_new = 1.0 / np.maximum(r, 1e-9)
            normal_new, center_new = _weighted_orthogonal(points, w_new)
            if abs(float(np.dot(normal_new, normal))) > 1.0 - 1e-12:
                normal, center = normal_new, center_new
                break
            normal, center, w = normal_new, center_new, w_new

    if abs(normal[1]) < 1e-9:
        return LineFit(a=0.0, c=float(center[0]), vertical=True)
    a = float(normal[0] / normal[1])
    c = float(-(a * center[0] + center[1]))
    return LineFit(a=a, c=c, vertical=False)


def _weighted_orthogonal(points, w):
    """Unit normal (smallest-variance direction) and weighted centroid."""
    wsum = w.sum()
    center = (points * w[:, None]).sum(axis=0) / wsum
    q = (points - center) * np.sqrt(w)[:, None]
    cov = q.T @ q / wsum
    vals, vecs = np.linalg.eigh(cov)
    normal = vecs[:, 0]  # eigenvector of the smallest eigenvalue
    return normal, center


def split_components(points, radius: float) -> list:
    """Group points by single-linkage connectivity at the given radius.

    Midpoint sets from boundary_points can hold several parallel strips; a
    radius between the lattice spacing and the strip separation pulls them
    apart. Returns arrays in first-seen order.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    unseen = set(range(n))
    groups = []
    while unseen:
        seed_idx = min(unseen)
        stack = [seed_idx]
        unseen.discard(seed_idx)
        members = [seed_idx]
        while stack:
            i = stack.pop()
            near = np.nonzero(np.linalg.norm(points - points[i], axis=1) <= radius)[0]
            fresh = [j for j in near if j in unseen]
            unseen.difference_update(fresh)
            stack.extend(fresh)
            members.extend(fresh)
        groups.append(points[sorted(members)])
    return groups


def _lattice_spacing(grid: FlowGrid) -> float:
    hx = np.diff(grid.positions[:, 0, 0]) if grid.nx > 1 else np.array([0.0])
    hy = np.diff(grid.positions[0, :, 1]) if grid.ny > 1 else np.array([0.0])
    h = max(np.abs(hx).max(), np.abs(hy).max())
    if h <= 0.0:
        raise PartitionError("degenerate lattice: zero spacing on both axes")
    return float(h)


def region_mean_flow(grid: FlowGrid, labels) -> np.ndarray:
    """Arithmetic mean of the flow vectors within each label class."""
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    v = grid.velocities.reshape(-1, 2)
    flat = labels.reshape(-1)
    out = np.empty((k, 2))
    for c in range(k):
        mask = flat == c
        if not np.any(mask):
            raise PartitionError(f"label class {c} is empty")
        out[c] = v[mask].mean(axis=0)
    return out


def partition_grid(
    grid: FlowGrid, k: int, seed: int = 0, max_iter: int = 300,
    objective: str = "squared",
) -> PartitionResult:
    """Full pipeline: features, clustering, boundaries, line fits, mean flows."""
    feats = feature_vectors(grid)
    trace: list = []
    flat_labels, centroids = kmeans(feats, k, seed=seed, max_iter=max_iter, trace=trace)
    labels = flat_labels.reshape(grid.nx, grid.ny)
    bpts = boundary_points(grid, labels)
    radius = 1.5 * _lattice_spacing(grid)
    lines = {}
    for key, pts in bpts.items():
        fits = [fit_line(grp, objective=objective)
                for grp in split_components(pts, radius) if len(grp) >= 2]
        if fits:
            lines[key] = fits
    return PartitionResult(
        k=k, labels=labels, centroids=centroids,
        mean_flows=region_mean_flow(grid, labels),
        boundary_points=bpts, fitted_lines=lines,
        objective_history=trace,
    )


def mercator_xy(lon_deg, lat_deg, origin=(0.0, 0.0), radius: float = EARTH_RADIUS_M):
    """Spherical-Mercator projection of longitude/latitude, in meters from origin."""
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon0 = math.radians(origin[0])
    lat0 = math.radians(origin[1])
    x = radius * (lon - lon0)
    y = radius * (np.log(np.tan(math.pi / 4.0 + lat / 2.0))
                  - math.log(math.tan(math.pi / 4.0 + lat0 / 2.0)))
    return x, y


def mercator_grid(grid: FlowGrid, origin=(0.0, 0.0), radius: float = EARTH_RADIUS_M) -> FlowGrid:
    """Reinterpret grid positions as (longitude, latitude) and project them."""
    lon = grid.positions[:, :, 0]
    lat = grid.positions[:, :, 1]
    x, y = mercator_xy(lon, lat, origin=origin, radius=radius)
    return FlowGrid(positions=np.stack([x, y], axis=-1), velocities=grid.velocities.copy())


def read_grid_csv(path) -> FlowGrid:
    """Load a flow grid from CSV with header x,y,u,v, one row per cell.

    Rows may come in any order; the x/y values must form a complete
    rectangular lattice. Schema violations name the offending line.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y", "u", "v"]:
            raise InputError(f"{path}: line 1: expected header x,y,u,v")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise InputError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            try:
                rows.append((tuple(float(c) for c in row), lineno))
            except ValueError:
                raise InputError(f"{path}: line {lineno}: non-numeric field") from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    xs = np.unique([r[0][0] for r in rows])
    ys = np.unique([r[0][1] for r in rows])
    vel = np.full((len(xs), len(ys), 2), np.nan)
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: j for j, y in enumerate(ys)}
    for (x, y, u, v), lineno in rows:
        i, j = xi[x], yi[y]
        if np.isfinite(vel[i, j, 0]):
            raise InputError(f"{path}: line {lineno}: duplicate cell ({x}, {y})")
        vel[i, j] = (u, v)
    if np.any(~np.isfinite(vel)):
        miss = np.argwhere(~np.isfinite(vel[:, :, 0]))[0]
        raise InputError(
            f"{path}: incomplete lattice: no row for x={xs[miss[0]]}, y={ys[miss[1]]}"
        )
    return FlowGrid.from_axes(xs, ys, vel)


def write_grid_csv(path, grid: FlowGrid) -> None:
    """Row-major CSV dump of the grid (inverse of read_grid_csv)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "u", "v"])
        for i in range(grid.nx):
            for j in range(grid.ny):
                x, y = grid.positions[i, j]
                u, v = grid.velocities[i, j]
                writer.writerow([repr(float(x)), repr(float(y)),
                                 repr(float(u)), repr(float(v))])
