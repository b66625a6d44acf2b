import math

import numpy as np
import pytest

from flowplan import (
    FlowGrid,
    boundary_points,
    feature_vectors,
    fit_line,
    kmeans,
    partition_grid,
    region_mean_flow,
)
from flowplan.errors import InputError, PartitionError
from flowplan.fixtures import jet_grid, meander_grid
from flowplan.partition import (
    EARTH_RADIUS_M,
    LineFit,
    mercator_grid,
    mercator_xy,
    read_grid_csv,
    split_components,
    write_grid_csv,
)

import oracles


def _grid2x2():
    vel = np.zeros((2, 2, 2))
    vel[0, 0] = (3.0, 4.0)
    vel[1, 1] = (0.0, -2.0)
    return FlowGrid.from_axes([1.0, 2.0], [3.0, 4.0], vel)


def test_grid_validation():
    with pytest.raises(PartitionError):
        FlowGrid(positions=np.zeros((2, 2, 2)), velocities=np.zeros((2, 3, 2)))
    bad = np.zeros((1, 1, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(PartitionError):
        FlowGrid(positions=np.zeros((1, 1, 2)), velocities=bad)


def test_feature_vectors_exact():
    F = feature_vectors(_grid2x2())
    # row order is (x index, y index) row-major; scales: |x| max 2, |y| max 4, speed max 5
    expected = np.array([
        [0.5, 0.75, 0.6, 0.8],
        [0.5, 1.0, 0.0, 0.0],
        [1.0, 0.75, 0.0, 0.0],
        [1.0, 1.0, 0.0, -0.4],
    ])
    assert np.allclose(F, expected)


def test_feature_vectors_error_cases():
    with pytest.raises(PartitionError):
        feature_vectors(FlowGrid.from_axes([], [1.0], np.zeros((0, 1, 2))))
    with pytest.raises(PartitionError):
        feature_vectors(FlowGrid.from_axes([0.0], [1.0], np.ones((1, 1, 2))))
    still = FlowGrid.from_axes([1.0, 2.0], [1.0], np.zeros((2, 1, 2)))
    with pytest.raises(PartitionError):
        feature_vectors(still)


def test_kmeans_matches_exhaustive_on_small_set():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(size=(6, 2)) * 0.1 + (0, 0),
                     rng.normal(size=(6, 2)) * 0.1 + (5, 5)])
    trace = []
    labels, centroids = kmeans(pts, 2, seed=1, trace=trace)
    obj = float(np.sum((pts - centroids[labels]) ** 2))
    assert obj == pytest.approx(oracles.exhaustive_two_class(pts), rel=1e-12)
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    labels2, _ = kmeans(pts, 2, seed=1)
    assert np.array_equal(labels, labels2)


def test_kmeans_validation():
    pts = np.zeros((4, 2))
    pts[1:] = [[1, 0], [0, 1], [1, 1]]
    with pytest.raises(PartitionError):
        kmeans(pts, 0)
    with pytest.raises(PartitionError):
        kmeans(pts, 5)
    with pytest.raises(PartitionError):
        kmeans(np.zeros(4), 2)
    # duplicates shrink the budget of distinct points
    dup = np.vstack([pts, pts])
    with pytest.raises(PartitionError):
        kmeans(dup, 5)


def test_kmeans_separates_jet_band():
    grid = jet_grid()
    labels, _ = kmeans(feature_vectors(grid), 2, seed=0)
    lab = labels.reshape(grid.nx, grid.ny)
    band = (grid.positions[0, :, 1] > 7.5) & (grid.positions[0, :, 1] < 10.5)
    inside = lab[:, band]
    outside = lab[:, ~band]
    assert len(np.unique(inside)) == 1
    assert len(np.unique(outside)) == 1
    assert inside[0, 0] != outside[0, 0]


def test_boundary_points_midpoints():
    grid = _grid2x2()
    labels = np.array([[0, 1], [0, 1]])  # split between the two y rows
    pts = boundary_points(grid, labels)
    assert set(pts) == {(0, 1)}
    got = sorted(map(tuple, pts[(0, 1)]))
    assert got == [(1.0, 3.5), (2.0, 3.5)]
    with pytest.raises(PartitionError):
        boundary_points(grid, np.zeros((3, 2), dtype=int))


def test_boundary_points_on_jet_band_edges():
    grid = jet_grid()
    labels, _ = kmeans(feature_vectors(grid), 2, seed=0)
    pts = boundary_points(grid, labels.reshape(grid.nx, grid.ny))
    (key,) = pts.keys()
    ys = np.unique(pts[key][:, 1])
    assert np.allclose(np.sort(ys), [7.5, 10.5])


def test_split_components_pulls_strips_apart():
    a = np.column_stack([np.arange(0, 5, 0.5), np.zeros(10)])
    b = np.column_stack([np.arange(0, 5, 0.5), np.full(10, 5.0)])
    pts = np.vstack([a, b])
    groups = split_components(pts, radius=1.0)
    assert len(groups) == 2
    assert np.allclose(groups[0], a)  # first-seen order
    assert np.allclose(groups[1], b)
    assert len(split_components(pts, radius=10.0)) == 1


def test_fit_line_horizontal():
    pts = np.column_stack([np.linspace(-9, 9, 20), np.full(20, 7.5)])
    fit = fit_line(pts)
    assert not fit.vertical
    assert fit.a == pytest.approx(0.0, abs=1e-12)
    assert fit.c == pytest.approx(-7.5, abs=1e-12)
    assert fit.distance((0.0, 8.5)) == pytest.approx(1.0)


def test_fit_line_vertical():
    pts = np.column_stack([np.full(15, 2.5), np.linspace(0, 7, 15)])
    fit = fit_line(pts)
    assert fit.vertical
    assert fit.c == pytest.approx(2.5, abs=1e-12)
    assert fit.distance((3.5, 100.0)) == pytest.approx(1.0)


def test_fit_line_recovers_slanted_line():
    x = np.linspace(-4, 6, 30)
    pts = np.column_stack([x, -0.25 * x + 3.0])  # 0.25 x + y - 3 = 0
    fit = fit_line(pts)
    assert fit.a == pytest.approx(0.25, abs=1e-9)
    assert fit.c == pytest.approx(-3.0, abs=1e-9)


def test_fit_line_absolute_resists_outlier():
    pts = np.column_stack([np.arange(10.0), np.zeros(10)])
    pts = np.vstack([pts, [4.5, 5.0]])
    sq = fit_line(pts, objective="squared")
    ab = fit_line(pts, objective="absolute")
    assert abs(sq.c) > 0.3  # dragged toward the outlier
    assert abs(ab.c) < 0.05
    assert abs(ab.a) < 0.05


def test_fit_line_validation():
    with pytest.raises(PartitionError):
        fit_line(np.zeros((1, 2)))
    with pytest.raises(PartitionError):
        fit_line(np.ones((5, 2)))
    with pytest.raises(PartitionError):
        fit_line(np.random.default_rng(0).normal(size=(5, 2)), objective="huber")


def test_region_mean_flow_exact():
    grid = jet_grid()
    labels, _ = kmeans(feature_vectors(grid), 2, seed=0)
    lab = grid.positions[0, 0, 1]  # noqa: F841 (orientation fixed below)
    labels = labels.reshape(grid.nx, grid.ny)
    flows = region_mean_flow(grid, labels)
    band_label = labels[0, 5]  # y = 8.75 lies inside the band
    assert np.allclose(flows[band_label], [2.9, 0.0])
    assert np.allclose(flows[1 - band_label], [0.0, 0.0])
    with pytest.raises(PartitionError):
        region_mean_flow(grid, np.full((grid.nx, grid.ny), 2))


def test_partition_grid_recovers_band_lines():
    res = partition_grid(jet_grid(), 2, seed=0)
    assert res.k == 2
    (key,) = res.fitted_lines.keys()
    fits = res.fitted_lines[key]
    assert len(fits) == 2
    edges = sorted(-f.c for f in fits)
    assert edges[0] == pytest.approx(7.5, abs=1e-9)
    assert edges[1] == pytest.approx(10.5, abs=1e-9)
    for f in fits:
        assert abs(f.a) < 1e-9 and not f.vertical
    hist = res.objective_history
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))


def test_partition_grid_meander_slant():
    res = partition_grid(meander_grid(), 2, seed=0)
    (key,) = res.fitted_lines.keys()
    fits = sorted(res.fitted_lines[key], key=lambda f: -f.c)
    assert len(fits) == 2
    for f, offset in zip(fits, (7.0, 11.0)):
        assert f.a == pytest.approx(-0.25, abs=0.02)
        assert -f.c == pytest.approx(offset, abs=0.1)


def test_mercator_projection_values():
    x, y = mercator_xy(1.0, 0.0)
    assert x == pytest.approx(EARTH_RADIUS_M * math.pi / 180.0)
    assert y == pytest.approx(0.0, abs=1e-9)
    _, y45 = mercator_xy(0.0, 45.0)
    assert y45 == pytest.approx(EARTH_RADIUS_M * math.log(math.tan(math.radians(67.5))))
    _, yneg = mercator_xy(0.0, -45.0)
    assert yneg == pytest.approx(-y45)
    x0, y0 = mercator_xy(10.0, 20.0, origin=(10.0, 20.0))
    assert x0 == pytest.approx(0.0) and y0 == pytest.approx(0.0, abs=1e-9)
    xu, _ = mercator_xy(90.0, 0.0, radius=1.0)
    assert xu == pytest.approx(math.pi / 2.0)


def test_mercator_grid_projects_positions_only():
    grid = _grid2x2()
    proj = mercator_grid(grid, radius=1.0)
    assert np.allclose(proj.velocities, grid.velocities)
    proj.velocities[0, 0, 0] = 99.0
    assert grid.velocities[0, 0, 0] == 3.0  # deep copy
    ex, ey = mercator_xy(grid.positions[:, :, 0], grid.positions[:, :, 1], radius=1.0)
    assert np.allclose(proj.positions[:, :, 0], ex)
    assert np.allclose(proj.positions[:, :, 1], ey)


def test_grid_csv_roundtrip(tmp_path):
    grid = jet_grid()
    path = tmp_path / "grid.csv"
    write_grid_csv(path, grid)
    back = read_grid_csv(path)
    assert np.array_equal(back.positions, grid.positions)
    assert np.array_equal(back.velocities, grid.velocities)


def test_grid_csv_row_order_is_free(tmp_path):
    path = tmp_path / "shuffled.csv"
    lines = ["x,y,u,v"]
    rng = np.random.default_rng(1)
    cells = [(x, y) for x in (0.0, 1.0) for y in (0.0, 1.0, 2.0)]
    rng.shuffle(cells)
    for x, y in cells:
        lines.append(f"{x},{y},{x + y},{x - y}")
    path.write_text("\n".join(lines) + "\n")
    grid = read_grid_csv(path)
    assert grid.nx == 2 and grid.ny == 3
    assert grid.velocities[1, 2, 0] == 3.0
    assert grid.velocities[1, 2, 1] == -1.0


@pytest.mark.parametrize("body,fragment", [
    ("a,b,c,d\n0,0,0,0\n", "line 1"),
    ("x,y,u,v\n0,0,0\n", "line 2: expected 4 fields"),
    ("x,y,u,v\n0,0,0,0\n1,zero,0,0\n", "line 3: non-numeric"),
    ("x,y,u,v\n0,0,0,0\n0,0,1,1\n", "line 3: duplicate"),
    ("x,y,u,v\n", "no data rows"),
    ("x,y,u,v\n0,0,0,0\n0,1,0,0\n1,0,0,0\n", "incomplete lattice"),
])
def test_grid_csv_errors_name_the_line(tmp_path, body, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(InputError) as err:
        read_grid_csv(path)
    assert fragment in str(err.value)
