"""Bundled benchmark scenes and synthetic flow grids.

Four scenes exercise the planner: a uniform diagonal drift split into three
regions, a horizontal jet band, a counter-flow block with carrying flanks,
and a 3D two-slab jet. Schedules are tuned per scene so a full benchmark
run stays well under a minute; the block scene needs the largest noise and
round count because the straight-through chain is a strong local basin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import Boundary, FlowScene, Region
from .mej import IDSchedule
from .partition import FlowGrid


@dataclass(frozen=True)
class Fixture:
    name: str
    scene: FlowScene
    start: tuple
    goal: tuple
    V: float
    schedule: IDSchedule


def constant_scene() -> FlowScene:
    """Uniform flow (1,1) split into three convex regions at y=9.5."""
    regions = [
        Region.make(1, (1, 1), [(-10, 0), (10, 0), (10, 9.5), (-10, 9.5)]),
        Region.make(2, (1, 1), [(2.5, 9.5), (10, 9.5), (10, 17)]),
        Region.make(3, (1, 1), [(-10, 9.5), (2.5, 9.5), (10, 17), (10, 20), (-10, 20)]),
    ]
    boundaries = [
        Boundary.segment((1, 2), (2.5, 9.5), (10, 9.5)),
        Boundary.segment((1, 3), (-10, 9.5), (2.5, 9.5)),
        Boundary.segment((2, 3), (2.5, 9.5), (10, 17)),
    ]
    return FlowScene.make(2, [(-10, 0), (10, 20)], regions, boundaries)


def jet_scene() -> FlowScene:
    """Still water with a horizontal jet band u=(2.9,0) for 7.5 < y < 10.5."""
    regions = [
        Region.make(1, (0, 0), [(-10, 0), (10, 0), (10, 7.5), (-10, 7.5)]),
        Region.make(2, (2.9, 0), [(-10, 7.5), (10, 7.5), (10, 10.5), (-10, 10.5)]),
        Region.make(3, (0, 0), [(-10, 10.5), (10, 10.5), (10, 20), (-10, 20)]),
    ]
    boundaries = [
        Boundary.segment((1, 2), (-10, 7.5), (10, 7.5)),
        Boundary.segment((2, 3), (-10, 10.5), (10, 10.5)),
    ]
    return FlowScene.make(2, [(-10, 0), (10, 20)], regions, boundaries)


def block_scene() -> FlowScene:
    """Central down-flow block (0,-2) with flank strips carrying outward.

    The flank flows point away from the block (+x on the right, -x on the
    left), which is what makes the two around-the-block paths co-optimal
    mirror images and cheaper than pushing through the counter-flow.
    """
    regions = [
        Region.make(1, (0, 0), [(-10, 0), (10, 0), (10, 4.5), (-10, 4.5)]),
        Region.make(2, (-1.5, 0), [(-10, 4.5), (-2.5, 4.5), (-2.5, 14.5), (-10, 14.5)]),
        Region.make(3, (0, -2), [(-2.5, 4.5), (2.5, 4.5), (2.5, 14.5), (-2.5, 14.5)]),
        Region.make(4, (1.5, 0), [(2.5, 4.5), (10, 4.5), (10, 14.5), (2.5, 14.5)]),
        Region.make(5, (0, 0), [(-10, 14.5), (10, 14.5), (10, 20), (-10, 20)]),
    ]
    boundaries = [
        Boundary.segment((1, 2), (-10, 4.5), (-2.5, 4.5)),
        Boundary.segment((1, 3), (-2.5, 4.5), (2.5, 4.5)),
        Boundary.segment((1, 4), (2.5, 4.5), (10, 4.5)),
        Boundary.segment((2, 3), (-2.5, 4.5), (-2.5, 14.5)),
        Boundary.segment((3, 4), (2.5, 4.5), (2.5, 14.5)),
        Boundary.segment((2, 5), (-10, 14.5), (-2.5, 14.5)),
        Boundary.segment((3, 5), (-2.5, 14.5), (2.5, 14.5)),
        Boundary.segment((4, 5), (2.5, 14.5), (10, 14.5)),
    ]
    return FlowScene.make(2, [(-10, 0), (10, 20)], regions, boundaries)


def jet3d_scene() -> FlowScene:
    """Two stacked 3D jet slabs: (0.5,0,0) below z=10, (2,1,0) to z=15, still above."""
    def box(z0, z1):
        return [(sx * 10.0, sy * 10.0, z) for z in (z0, z1) for sx in (-1, 1) for sy in (-1, 1)]

    regions = [
        Region.make(1, (0.5, 0, 0), box(0, 10)),
        Region.make(2, (2, 1, 0), box(10, 15)),
        Region.make(3, (0, 0, 0), box(15, 20)),
    ]
    extent = [(-10, -10), (10, -10), (10, 10), (-10, 10)]
    boundaries = [
        Boundary.patch((1, 2), (0, 0, 1), 10.0, extent),
        Boundary.patch((2, 3), (0, 0, 1), 15.0, extent),
    ]
    return FlowScene.make(3, [(-10, -10, 0), (10, 10, 20)], regions, boundaries)


def trijunction_scene() -> FlowScene:
    """Three regions meeting at an interior corner; exercises chain repair.

    Only the left region flows (it drags paths toward the corner); the
    geometry makes a straight start-goal segment cross two boundaries whose
    shared corner sits just off the segment.
    """
    c = (-2.5, 9.0)
    a13 = (-10.0, 6.0)
    a12 = (10.0, 4.0)
    a23 = (7.5, 20.0)
    regions = [
        Region.make(1, (0, 0), [(-10, 0), (10, 0), a12, c, a13]),
        Region.make(2, (-1, 0.5), [a12, (10, 20), a23, c]),
        Region.make(3, (0, 0), [a13, c, a23, (-10, 20)]),
    ]
    boundaries = [
        Boundary.segment((1, 2), c, a12),
        Boundary.segment((1, 3), c, a13),
        Boundary.segment((2, 3), c, a23),
    ]
    return FlowScene.make(2, [(-10, 0), (10, 20)], regions, boundaries)


_BUILDERS = {
    "constant": (constant_scene, (0.0, 0.0), (0.0, 20.0), 3.0,
                 dict(rounds=6)),
    "jet": (jet_scene, (0.0, 0.0), (0.0, 20.0), 3.0,
            dict(rounds=8)),
    "block": (block_scene, (0.0, 0.0), (0.0, 20.0), 3.0,
              dict(rounds=24, sigma0=2.0, h=1e-2)),
    "jet3d": (jet3d_scene, (0.0, 0.0, 0.0), (0.0, 0.0, 20.0), 3.0,
              dict(rounds=4, h=5e-3)),
    "trijunction": (trijunction_scene, (0.0, 0.0), (0.0, 20.0), 3.0,
                    dict(rounds=6)),
}

FIXTURE_NAMES = tuple(_BUILDERS)


def fixture(name: str, seed: int = 0) -> Fixture:
    """Named scene with its tuned schedule; seed feeds the schedule only."""
    try:
        builder, start, goal, V, kw = _BUILDERS[name]
    except KeyError:
        raise InputError(
            f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}"
        ) from None
    return Fixture(
        name=name, scene=builder(), start=start, goal=goal, V=V,
        schedule=IDSchedule(seed=seed, **kw),
    )


def jet_grid() -> FlowGrid:
    """Sampled jet band on a half-unit lattice.

    Rows sit at quarter offsets so that label-change midpoints land exactly
    on the band edges y=7.5 and y=10.5.
    """
    xs = np.arange(-9.75, 10.0, 0.5)
    ys = np.arange(6.25, 12.0, 0.5)
    vel = np.zeros((len(xs), len(ys), 2))
    band = (ys > 7.5) & (ys < 10.5)
    vel[:, band, 0] = 2.9
    return FlowGrid.from_axes(xs, ys, vel)


def meander_grid() -> FlowGrid:
    """Slanted current band between y = x/4 + 7 and y = x/4 + 11.

    The band flows along its own axis at speed ~2; outside is still. Used
    for the end-to-end partition walkthrough: the fitted lines are slanted,
    so recovering them checks more than axis-aligned splits do. The y window
    hugs the band; padding it with much more still water lets the position
    features outweigh the flow features and the two-class split stops
    tracking the current.
    """
    xs = np.arange(-9.75, 10.0, 0.5)
    ys = np.arange(3.25, 15.0, 0.5)
    vel = np.zeros((len(xs), len(ys), 2))
    flow = 2.0 * np.array([1.0, 0.25]) / np.hypot(1.0, 0.25)
    for i, x in enumerate(xs):
        lo = x / 4.0 + 7.0
        hi = x / 4.0 + 11.0
        inside = (ys > lo) & (ys < hi)
        vel[i, inside] = flow
    return FlowGrid.from_axes(xs, ys, vel)
