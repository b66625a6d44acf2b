"""Angle summaries of planned paths, in degrees.

2D headings are measured from the +y travel axis with positive sign toward
-x (a segment aimed up and to the left has a positive heading); steering
angles use the vehicle velocity with positive sign toward +x. 3D segments
are described relative to the boundary plane they launch from: elevation
above the plane plus the in-plane azimuth of the projection.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .geometry import FlowScene, JunctionChain


def heading_angles(points) -> np.ndarray:
    """Per-segment displacement angle atan2(-dx, dy) for a 2D polyline."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or len(points) < 2:
        raise InputError("heading_angles expects a 2D polyline with >= 2 points")
    d = np.diff(points, axis=0)
    return np.degrees(np.arctan2(-d[:, 0], d[:, 1]))


def steering_angles(solutions) -> np.ndarray:
    """Vehicle-velocity angle atan2(v_x, v_y) per 2D segment solution."""
    out = []
    for sol in solutions:
        v = np.asarray(sol.v, dtype=float)
        if v.shape != (2,):
            raise InputError("steering_angles expects 2D segment solutions")
        out.append(math.degrees(math.atan2(v[0], v[1])))
    return np.asarray(out)


def _plane_basis(normal) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-handed in-plane basis; normal sign fixed so the dominant
    component is positive, which keeps the azimuth orientation stable."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    if n[int(np.argmax(np.abs(n)))] < 0.0:
        n = -n
    ex = np.array([1.0, 0.0, 0.0])
    x_in = ex - np.dot(ex, n) * n
    if np.linalg.norm(x_in) < 1e-9:
        ey = np.array([0.0, 1.0, 0.0])
        x_in = ey - np.dot(ey, n) * n
    x_in = x_in / np.linalg.norm(x_in)
    y_in = np.cross(n, x_in)
    return n, x_in, y_in


def plane_angles(points, normals) -> tuple[np.ndarray, np.ndarray]:
    """Elevation/azimuth of each 3D segment against its launch plane.

    Segment k (points[k] to points[k+1]) is measured against normals[k]:
    elevation theta in (0, 90] from the plane, azimuth gamma in (-180, 180]
    of the in-plane projection against the plane's x-axis.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) < 2:
        raise InputError("plane_angles expects a 3D polyline with >= 2 points")
    if len(normals) != len(points) - 1:
        raise InputError("need one launch-plane normal per segment")
    thetas, gammas = [], []
    for k in range(len(points) - 1):
        d = points[k + 1] - points[k]
        nd = np.linalg.norm(d)
        if nd <= 0.0:
            raise InputError(f"segment {k} has zero length")
        n, x_in, y_in = _plane_basis(normals[k])
        s = min(1.0, abs(float(np.dot(d, n))) / nd)
        thetas.append(math.degrees(math.asin(s)))
        gammas.append(math.degrees(math.atan2(float(np.dot(d, y_in)),
                                              float(np.dot(d, x_in)))))
    return np.asarray(thetas), np.asarray(gammas)


def chain_plane_angles(scene: FlowScene, chain: JunctionChain) -> tuple[np.ndarray, np.ndarray]:
    """plane_angles over a chain's junction polyline.

    The first segment launches from the plane of the chain's first crossed
    boundary (the start point has no boundary of its own); segment k >= 1
    launches from boundary k-1.
    """
    if scene.dimension != 3:
        raise InputError("chain_plane_angles applies to 3D scenes")
    if not chain.boundaries:
        raise InputError("chain crosses no boundaries")
    pts = np.vstack([chain.start, *chain.junction_points(scene), chain.goal])
    normals = []
    for k in range(len(pts) - 1):
        idx = chain.boundaries[k - 1] if k > 0 else chain.boundaries[0]
        normals.append(scene.boundaries[idx].normal)
    return plane_angles(pts, normals)
