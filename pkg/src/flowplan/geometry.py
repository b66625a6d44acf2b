"""Piecewise-constant flow scenes: convex regions, parametrized boundaries, chains.

A scene is a box domain split into convex regions, each carrying one constant
flow vector. Adjacent regions share a boundary: a segment in 2D, a planar
convex patch in 3D. A candidate path is a junction chain: the ordered list of
boundaries it crosses plus one parameter vector per crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousRerouteError,
    DomainViolationError,
    InvalidRerouteError,
    OutOfDomainError,
    SceneValidationError,
)

GEOM_TOL = 1e-9


def _as_point(x, dim) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.shape != (dim,):
        raise SceneValidationError(f"expected a {dim}-vector, got shape {p.shape}")
    return p


def _ccw_hull_2d(vertices: np.ndarray) -> np.ndarray:
    """Order 2D convex-polygon vertices counterclockwise around their centroid."""
    c = vertices.mean(axis=0)
    ang = np.arctan2(vertices[:, 1] - c[1], vertices[:, 0] - c[0])
    return vertices[np.argsort(ang)]


def _halfspaces_2d(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Edge normals and offsets with A @ x <= b on the polygon interior."""
    v = _ccw_hull_2d(vertices)
    n = len(v)
    A = np.empty((n, 2))
    b = np.empty(n)
    for i in range(n):
        p, q = v[i], v[(i + 1) % n]
        e = q - p
        A[i] = (e[1], -e[0])  # outward normal for ccw order
        b[i] = A[i] @ p
    return A, b


def _halfspaces_3d(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    from scipy.spatial import ConvexHull

    hull = ConvexHull(vertices)
    eq = hull.equations  # rows [n..., d] with n @ x + d <= 0 inside
    return eq[:, :-1], -eq[:, -1]


@dataclass(frozen=True)
class Region:
    """Convex region with a constant flow vector."""

    id: int
    flow: np.ndarray
    vertices: np.ndarray
    halfspace_A: np.ndarray = field(repr=False, default=None)
    halfspace_b: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def make(id: int, flow, vertices) -> "Region":
        flow = np.asarray(flow, dtype=float)
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise SceneValidationError(f"region {id}: vertices must be (n,2) or (n,3)")
        if not np.all(np.isfinite(flow)) or flow.shape != (vertices.shape[1],):
            raise SceneValidationError(f"region {id}: flow must be a finite {vertices.shape[1]}-vector")
        if vertices.shape[1] == 2:
            if len(vertices) < 3:
                raise SceneValidationError(f"region {id}: need at least 3 vertices")
            vertices = _ccw_hull_2d(vertices)
            A, b = _halfspaces_2d(vertices)
        else:
            if len(vertices) < 4:
                raise SceneValidationError(f"region {id}: need at least 4 vertices")
            A, b = _halfspaces_3d(vertices)
        # Convexity: every vertex on the inner side of every face hyperplane.
        slack = A @ vertices.T - b[:, None]
        if np.any(slack > GEOM_TOL):
            raise SceneValidationError(f"region {id}: vertex set is not convex within {GEOM_TOL}")
        return Region(id=int(id), flow=flow, vertices=vertices, halfspace_A=A, halfspace_b=b)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def contains(self, x, tol: float = GEOM_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.halfspace_A @ x <= self.halfspace_b + tol))

    def interior_point(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


@dataclass(frozen=True)
class Boundary:
    """Shared face between two regions with an explicit parametrization.

    2D: segment p1-p2, parameter domain [0, 1], x(lam) = lam*p1 + (1-lam)*p2.
    3D: plane normal . x = offset restricted to a convex patch; the parameters
    are the point's coordinates on the two axes other than the solved axis
    (the largest-magnitude normal component, which avoids ill-conditioning for
    near-vertical planes).
    """

    pair: tuple[int, int]
    dimension: int
    p1: np.ndarray = None
    p2: np.ndarray = None
    normal: np.ndarray = None
    offset: float = None
    extent: np.ndarray = None  # (m, 2) polygon in parameter space, 3D only
    solved_axis: int = field(default=0, repr=False)
    free_axes: tuple[int, int] = field(default=None, repr=False)
    _extent_A: np.ndarray = field(default=None, repr=False)
    _extent_b: np.ndarray = field(default=None, repr=False)

    @staticmethod
    def segment(pair, p1, p2) -> "Boundary":
        p1 = _as_point(p1, 2)
        p2 = _as_point(p2, 2)
        if np.linalg.norm(p1 - p2) <= GEOM_TOL:
            raise SceneValidationError(f"boundary {pair}: endpoints coincide")
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise SceneValidationError(f"boundary {pair}: must join two distinct regions")
        return Boundary(pair=(a, b), dimension=2, p1=p1, p2=p2)

    @staticmethod
    def patch(pair, normal, offset, extent) -> "Boundary":
        normal = _as_point(normal, 3)
        nrm = np.linalg.norm(normal)
        if nrm <= GEOM_TOL:
            raise SceneValidationError(f"boundary {pair}: zero plane normal")
        normal = normal / nrm
        offset = float(offset) / nrm
        extent = np.asarray(extent, dtype=float)
        if extent.ndim != 2 or extent.shape[1] != 2 or len(extent) < 3:
            raise SceneValidationError(f"boundary {pair}: patch extent must be a polygon in parameter space")
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise SceneValidationError(f"boundary {pair}: must join two distinct regions")
        k = int(np.argmax(np.abs(normal)))
        free = tuple(i for i in range(3) if i != k)
        extent = _ccw_hull_2d(extent)
        eA, eb = _halfspaces_2d(extent)
        return Boundary(
            pair=(a, b), dimension=3, normal=normal, offset=offset, extent=extent,
            solved_axis=k, free_axes=free, _extent_A=eA, _extent_b=eb,
        )

    @property
    def param_dim(self) -> int:
        return 1 if self.dimension == 2 else 2

    @property
    def length(self) -> float:
        """Segment length in 2D; patch diameter in 3D (parameter-space extent)."""
        if self.dimension == 2:
            return float(np.linalg.norm(self.p1 - self.p2))
        d = 0.0
        for i in range(len(self.extent)):
            for j in range(i + 1, len(self.extent)):
                d = max(d, float(np.linalg.norm(self.extent[i] - self.extent[j])))
        return d

    def param_contains(self, lam, tol: float = GEOM_TOL) -> bool:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.dimension == 2:
            return bool(-tol <= lam[0] <= 1.0 + tol)
        return bool(np.all(self._extent_A @ lam <= self._extent_b + tol))

    def param_clamp(self, lam) -> np.ndarray:
        """Nearest parameter inside the domain (Euclidean projection)."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.dimension == 2:
            return np.clip(lam, 0.0, 1.0)
        if self.param_contains(lam):
            return lam.copy()
        # Project onto the convex polygon: nearest point over all edges.
        best, best_d = None, math.inf
        v = self.extent
        for i in range(len(v)):
            p, q = v[i], v[(i + 1) % len(v)]
            e = q - p
            t = float(np.clip(np.dot(lam - p, e) / np.dot(e, e), 0.0, 1.0))
            cand = p + t * e
            d = float(np.linalg.norm(cand - lam))
            if d < best_d:
                best, best_d = cand, d
        return best

    def point(self, lam) -> np.ndarray:
        """World point x(lam); raises DomainViolationError outside the domain."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if not self.param_contains(lam):
            raise DomainViolationError(lam, self.param_clamp(lam))
        return self.point_unchecked(lam)

    def point_unchecked(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.dimension == 2:
            t = lam[0]
            return t * self.p1 + (1.0 - t) * self.p2
        x = np.empty(3)
        j0, j1 = self.free_axes
        k = self.solved_axis
        x[j0], x[j1] = lam[0], lam[1]
        x[k] = (self.offset - self.normal[j0] * lam[0] - self.normal[j1] * lam[1]) / self.normal[k]
        return x

    def param_of(self, x) -> np.ndarray:
        """Parameter of a world point assumed to lie on the boundary geometry."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 2:
            e = self.p1 - self.p2
            return np.array([float(np.dot(x - self.p2, e) / np.dot(e, e))])
        return x[list(self.free_axes)].copy()

    def jacobian(self) -> np.ndarray:
        """d x / d lam, shape (dimension, param_dim). Constant per boundary."""
        if self.dimension == 2:
            return (self.p1 - self.p2).reshape(2, 1)
        J = np.zeros((3, 2))
        j0, j1 = self.free_axes
        k = self.solved_axis
        J[j0, 0] = 1.0
        J[j1, 1] = 1.0
        J[k, 0] = -self.normal[j0] / self.normal[k]
        J[k, 1] = -self.normal[j1] / self.normal[k]
        return J

    def implicit(self, x) -> float:
        """Signed value of the boundary's line/plane equation at x (0 on the boundary)."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 2:
            e = self.p1 - self.p2
            n = np.array([e[1], -e[0]])
            n = n / np.linalg.norm(n)
            return float(np.dot(n, x - self.p2))
        return float(np.dot(self.normal, x) - self.offset)

    def other(self, region_id: int) -> int:
        a, b = self.pair
        if region_id == a:
            return b
        if region_id == b:
            return a
        raise ValueError(f"region {region_id} is not adjacent to boundary {self.pair}")

    def endpoints(self) -> list[np.ndarray]:
        """Corner candidates: segment endpoints (2D); patch extent vertices (3D)."""
        if self.dimension == 2:
            return [self.p1, self.p2]
        return [self.point_unchecked(v) for v in self.extent]


@dataclass(frozen=True)
class Corner:
    """Meeting point of two or more boundaries with its incident sets."""

    point: np.ndarray
    boundary_ids: tuple[int, ...]  # F(x): indices into scene.boundaries
    region_ids: tuple[int, ...]  # R(x)


@dataclass(frozen=True)
class FlowScene:
    """Immutable scene: shared freely across concurrent optimizer rounds."""

    dimension: int
    domain: np.ndarray  # (2, dim): [mins, maxs]
    regions: tuple[Region, ...]
    boundaries: tuple[Boundary, ...]
    corner_index: dict = field(repr=False, default=None)

    @staticmethod
    def make(dimension, domain, regions, boundaries) -> "FlowScene":
        dimension = int(dimension)
        if dimension not in (2, 3):
            raise SceneValidationError("dimension must be 2 or 3")
        domain = np.asarray(domain, dtype=float)
        if domain.shape != (2, dimension) or np.any(domain[0] >= domain[1]):
            raise SceneValidationError("domain must be [mins, maxs] with mins < maxs")
        regions = tuple(regions)
        ids = [r.id for r in regions]
        if len(set(ids)) != len(ids):
            raise SceneValidationError("duplicate region ids")
        id_set = set(ids)
        for b in boundaries:
            if b.dimension != dimension:
                raise SceneValidationError(f"boundary {b.pair} has wrong dimension")
            if b.pair[0] not in id_set or b.pair[1] not in id_set:
                raise SceneValidationError(f"boundary {b.pair} references unknown regions")
        for r in regions:
            if r.dimension != dimension:
                raise SceneValidationError(f"region {r.id} has wrong dimension")
        boundaries = tuple(boundaries)
        corner_index = _build_corner_index(boundaries)
        return FlowScene(
            dimension=dimension, domain=domain, regions=regions,
            boundaries=boundaries, corner_index=corner_index,
        )

    def region_by_id(self, rid: int) -> Region:
        for r in self.regions:
            if r.id == rid:
                return r
        raise KeyError(f"no region with id {rid}")

    def flow_of(self, rid: int) -> np.ndarray:
        return self.region_by_id(rid).flow

    def boundary_index(self, b: Boundary) -> int:
        for i, bb in enumerate(self.boundaries):
            if bb is b:
                return i
        raise ValueError("boundary does not belong to this scene")

    def in_domain(self, x, tol: float = GEOM_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.domain[0] - tol) and np.all(x <= self.domain[1] + tol))


def _corner_key(p: np.ndarray) -> tuple:
    return tuple(np.round(np.asarray(p, dtype=float) / GEOM_TOL).astype(np.int64))


def _build_corner_index(boundaries) -> dict:
    groups: dict[tuple, list] = {}
    points: dict[tuple, np.ndarray] = {}
    for i, b in enumerate(boundaries):
        for p in b.endpoints():
            key = _corner_key(p)
            groups.setdefault(key, []).append(i)
            points.setdefault(key, np.asarray(p, dtype=float))
    index = {}
    for key, bids in groups.items():
        bids = sorted(set(bids))
        if len(bids) < 2:
            continue  # a boundary end on the domain wall is not a corner
        rids = sorted({rid for i in bids for rid in boundaries[i].pair})
        index[key] = Corner(point=points[key], boundary_ids=tuple(bids), region_ids=tuple(rids))
    return index


def find_corner(scene: FlowScene, x) -> Corner | None:
    return scene.corner_index.get(_corner_key(x))


@dataclass
class JunctionChain:
    """Ordered boundary crossings of a candidate path, with parameters.

    boundaries holds indices into scene.boundaries. region_sequence has one
    more entry than boundaries; entry i is the region of path segment i.
    """

    start: np.ndarray
    goal: np.ndarray
    boundaries: list[int]
    lambdas: list[np.ndarray]
    region_sequence: list[int]
    corner_offset_applied: bool = False

    def signature(self) -> tuple[int, ...]:
        return tuple(self.boundaries)

    def stacked(self) -> np.ndarray:
        if not self.lambdas:
            return np.empty(0)
        return np.concatenate([np.atleast_1d(l) for l in self.lambdas])

    def split_stacked(self, scene: FlowScene, stacked: np.ndarray) -> list[np.ndarray]:
        out, k = [], 0
        for bi in self.boundaries:
            d = scene.boundaries[bi].param_dim
            out.append(np.atleast_1d(stacked[k:k + d]).copy())
            k += d
        if k != len(stacked):
            raise ValueError("stacked parameter size does not match the chain")
        return out

    def junction_points(self, scene: FlowScene) -> list[np.ndarray]:
        return [
            scene.boundaries[bi].point_unchecked(l)
            for bi, l in zip(self.boundaries, self.lambdas)
        ]

    def copy(self) -> "JunctionChain":
        return JunctionChain(
            start=self.start.copy(), goal=self.goal.copy(),
            boundaries=list(self.boundaries),
            lambdas=[np.atleast_1d(l).copy() for l in self.lambdas],
            region_sequence=list(self.region_sequence),
            corner_offset_applied=self.corner_offset_applied,
        )

    def validate(self, scene: FlowScene, require_acyclic: bool = True) -> None:
        if len(self.region_sequence) != len(self.boundaries) + 1:
            raise SceneValidationError("region sequence length must be boundary count + 1")
        for i, bi in enumerate(self.boundaries):
            b = scene.boundaries[bi]
            if {self.region_sequence[i], self.region_sequence[i + 1]} != set(b.pair):
                raise SceneValidationError(
                    f"boundary {b.pair} does not separate regions "
                    f"{self.region_sequence[i]}, {self.region_sequence[i + 1]}"
                )
            if not b.param_contains(self.lambdas[i]):
                raise SceneValidationError(f"junction {i} parameter outside its domain")
        if not scene.region_by_id(self.region_sequence[0]).contains(self.start):
            raise SceneValidationError("start point not in the first region")
        if not scene.region_by_id(self.region_sequence[-1]).contains(self.goal):
            raise SceneValidationError("goal point not in the last region")
        if require_acyclic and len(set(self.region_sequence)) != len(self.region_sequence):
            raise SceneValidationError("region sequence revisits a region")


def boundary_point(b: Boundary, lam) -> np.ndarray:
    """World coordinates of the junction at parameter lam on boundary b."""
    return b.point(lam)


def locate_region(scene: FlowScene, x) -> int:
    """Region id whose closed geometry contains x; smallest id on boundary ties."""
    x = np.asarray(x, dtype=float)
    hits = [r.id for r in scene.regions if r.contains(x)]
    if not hits:
        raise OutOfDomainError(x)
    return min(hits)


def _segment_crossings(scene: FlowScene, x0: np.ndarray, xf: np.ndarray):
    """(s, boundary index, lam) for each boundary crossed by the open segment."""
    d = xf - x0
    out = []
    for i, b in enumerate(scene.boundaries):
        if b.dimension == 2:
            e = b.p1 - b.p2
            # Solve x0 + s d = p2 + t e.
            M = np.column_stack([d, -e])
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if abs(det) <= 1e-14 * (np.linalg.norm(d) * np.linalg.norm(e) + 1.0):
                continue  # parallel: tangency treated as no crossing
            rhs = b.p2 - x0
            s = (rhs[0] * M[1, 1] - rhs[1] * M[0, 1]) / det
            t = (M[0, 0] * rhs[1] - M[1, 0] * rhs[0]) / det
            if 1e-12 < s < 1.0 - 1e-12 and -GEOM_TOL <= t <= 1.0 + GEOM_TOL:
                out.append((float(s), i, np.array([float(np.clip(t, 0.0, 1.0))])))
        else:
            denom = float(np.dot(b.normal, d))
            if abs(denom) <= 1e-14 * (np.linalg.norm(d) + 1.0):
                continue
            s = (b.offset - float(np.dot(b.normal, x0))) / denom
            if not (1e-12 < s < 1.0 - 1e-12):
                continue
            lam = b.param_of(x0 + s * d)
            if b.param_contains(lam):
                out.append((float(s), i, b.param_clamp(lam)))
    out.sort(key=lambda r: r[0])
    return out


def initial_chain(scene: FlowScene, x0, xf) -> JunctionChain:
    """Chain of the straight start-goal segment, junctions at boundary crossings.

    If the segment passes exactly through a corner point, the goal is offset by
    1e-9 along the first axis before intersecting (recorded on the result);
    the chain itself keeps the original goal.
    """
    x0 = _as_point(x0, scene.dimension)
    xf = _as_point(xf, scene.dimension)
    if not scene.in_domain(x0):
        raise OutOfDomainError(x0)
    if not scene.in_domain(xf):
        raise OutOfDomainError(xf)

    target = xf.copy()
    offset_applied = False
    for _ in range(8):
        if not _hits_corner(scene, x0, target):
            break
        target = target.copy()
        target[0] += 1e-9
        offset_applied = True
    crossings = _segment_crossings(scene, x0, target)

    # Merge consecutive near-duplicate crossing points.
    merged = []
    last_pt = None
    for s, bi, lam in crossings:
        pt = x0 + s * (target - x0)
        if last_pt is not None and np.linalg.norm(pt - last_pt) <= GEOM_TOL:
            continue
        merged.append((s, bi, lam))
        last_pt = pt

    svals = [0.0] + [s for s, _, _ in merged] + [1.0]
    regions = []
    for k in range(len(merged) + 1):
        mid = x0 + 0.5 * (svals[k] + svals[k + 1]) * (target - x0)
        regions.append(locate_region(scene, mid))
    chain = JunctionChain(
        start=x0, goal=xf,
        boundaries=[bi for _, bi, _ in merged],
        lambdas=[lam for _, _, lam in merged],
        region_sequence=regions,
        corner_offset_applied=offset_applied,
    )
    chain.validate(scene, require_acyclic=False)
    return chain


def _hits_corner(scene: FlowScene, x0: np.ndarray, xf: np.ndarray) -> bool:
    d = xf - x0
    L2 = float(np.dot(d, d))
    if L2 <= 0.0:
        return False
    for corner in scene.corner_index.values():
        t = float(np.dot(corner.point - x0, d) / L2)
        if 0.0 < t < 1.0:
            if np.linalg.norm(x0 + t * d - corner.point) < GEOM_TOL:
                return True
    return False


def _boundary_directions_at(scene: FlowScene, corner: Corner) -> list[tuple[int, float]]:
    """(boundary index, angle) of each incident boundary's direction away from the corner."""
    out = []
    for bi in corner.boundary_ids:
        b = scene.boundaries[bi]
        ends = [b.p1, b.p2]
        away = None
        for k, e in enumerate(ends):
            if np.linalg.norm(e - corner.point) <= GEOM_TOL:
                away = ends[1 - k] - corner.point
        if away is None:
            raise InvalidRerouteError(f"boundary {b.pair} does not end at the corner")
        out.append((bi, math.atan2(away[1], away[0])))
    out.sort(key=lambda r: r[1])
    return out


def _sector_regions(scene: FlowScene, corner: Corner, dirs) -> list[int | None]:
    """Region occupying each angular sector between consecutive boundary rays.

    Sector k lies between dirs[k] and dirs[k+1] (cyclic). None marks a sector
    outside the scene domain (corner on the domain wall).
    """
    probe_step = 1e-6 * float(np.max(scene.domain[1] - scene.domain[0]))
    sectors: list[int | None] = []
    n = len(dirs)
    for k in range(n):
        a0 = dirs[k][1]
        a1 = dirs[(k + 1) % n][1]
        if k == n - 1:
            a1 += 2.0 * math.pi
        mid = 0.5 * (a0 + a1)
        probe = corner.point + probe_step * np.array([math.cos(mid), math.sin(mid)])
        try:
            sectors.append(locate_region(scene, probe))
        except OutOfDomainError:
            sectors.append(None)
    return sectors


def corner_reroute(
    scene: FlowScene,
    x,
    exit_region: int,
    enter_region: int,
    offended: int | None = None,
) -> list[int]:
    """Boundary chain that crosses the corner's fan from exit to enter region.

    Walks the angular fan of boundaries meeting at the corner, starting in the
    exit region's sector and ending in the enter region's sector, never
    crossing the offended boundary (the one the sliding junction fell off).
    With the offended boundary removed the walk around the fan is unique.
    2D only; 3D scenes repair by clamping instead.
    """
    corner = find_corner(scene, x)
    if corner is None:
        raise InvalidRerouteError(f"{tuple(np.asarray(x, float))} is not a corner point")
    if exit_region == enter_region:
        raise InvalidRerouteError("exit and enter regions must differ")
    if exit_region not in corner.region_ids or enter_region not in corner.region_ids:
        raise InvalidRerouteError(
            f"regions {exit_region}, {enter_region} are not both adjacent to the corner"
        )
    if offended is None:
        cands = [
            bi for bi in corner.boundary_ids
            if set(scene.boundaries[bi].pair) == {exit_region, enter_region}
        ]
        if not cands:
            raise InvalidRerouteError(
                f"no boundary at the corner separates regions {exit_region}, {enter_region}"
            )
        if len(cands) > 1:
            raise AmbiguousRerouteError(
                "two boundaries at the corner separate the same regions; pass the offended one"
            )
        offended = cands[0]

    dirs = _boundary_directions_at(scene, corner)
    sectors = _sector_regions(scene, corner, dirs)
    n = len(dirs)

    def walk(start_sector: int, step: int) -> list[int] | None:
        chain: list[int] = []
        k = start_sector
        for _ in range(n):
            crossed = dirs[(k + 1) % n][0] if step == 1 else dirs[k][0]
            if crossed == offended:
                return None
            k = (k + step) % n
            if sectors[k] is None:
                return None
            chain.append(crossed)
            if sectors[k] == enter_region:
                return chain
        return None

    starts = [k for k in range(n) if sectors[k] == exit_region]
    if not starts:
        raise InvalidRerouteError(f"region {exit_region} holds no sector at the corner")
    results = []
    for k in starts:
        for step in (1, -1):
            got = walk(k, step)
            if got is not None:
                results.append(got)
    unique = {tuple(r) for r in results}
    if not unique:
        raise InvalidRerouteError(
            f"no boundary chain around the corner joins regions {exit_region} and {enter_region}"
        )
    if len(unique) > 1:
        raise AmbiguousRerouteError(
            f"multiple boundary chains around the corner join regions "
            f"{exit_region} and {enter_region}: {sorted(unique)}"
        )
    return list(unique.pop())
