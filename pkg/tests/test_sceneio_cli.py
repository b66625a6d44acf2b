import json

import numpy as np
import pytest

from flowplan import IDSchedule, optimize, time_model
from flowplan.cli import main
from flowplan.errors import InputError
from flowplan.fixtures import FIXTURE_NAMES, fixture
from flowplan.sceneio import (
    dump_json,
    load_scene,
    report_chain,
    report_dict,
    save_scene,
    scene_from_dict,
    scene_to_dict,
    verify_report,
)

from conftest import DATA_DIR


def _jet_doc(**extra):
    fx = fixture("jet")
    doc = scene_to_dict(fx.scene, name="jet", start=fx.start, goal=fx.goal,
                        model=time_model(fx.V))
    doc.update(extra)
    return doc


def test_scene_roundtrip_via_dict():
    doc = _jet_doc()
    parsed = scene_from_dict(doc)
    assert parsed.warnings == []
    assert parsed.name == "jet"
    assert parsed.model.kind == "time" and parsed.model.V == 3.0
    assert np.allclose(parsed.start, [0.0, 0.0])
    assert np.allclose(parsed.goal, [0.0, 20.0])
    assert scene_to_dict(parsed.scene) == scene_to_dict(fixture("jet").scene)


def test_unknown_fields_warn_but_load():
    doc = _jet_doc(author="someone", comment="hand-annotated")
    doc["regions"][0]["color"] = "blue"
    parsed = scene_from_dict(doc, name="annotated")
    assert len(parsed.warnings) == 3
    assert any("author" in w for w in parsed.warnings)
    assert any("regions[0]" in w and "color" in w for w in parsed.warnings)


@pytest.mark.parametrize("mutate,fragment", [
    (lambda d: d.pop("regions"), "missing field 'regions'"),
    (lambda d: d.update(dimension=4), "dimension must be 2 or 3"),
    (lambda d: d["regions"][0].pop("flow"), "missing 'flow'"),
    (lambda d: d["boundaries"][0].pop("endpoints"), "needs either endpoints or plane"),
    (lambda d: d.update(model={"kind": "fuel", "V": 3}), "model.kind"),
    (lambda d: d.update(model={"kind": "energy", "V": 3}), "needs C"),
    (lambda d: d.update(start=[1.0, 2.0, 3.0]), "start must be a 2-vector"),
    (lambda d: d["boundaries"][0].update(pair=[1]), "pair must be"),
])
def test_scene_dict_strictness(mutate, fragment):
    doc = _jet_doc()
    mutate(doc)
    with pytest.raises(InputError) as err:
        scene_from_dict(doc, name="bad")
    assert fragment in str(err.value)


def test_bundled_scene_files_load_clean():
    for name in FIXTURE_NAMES:
        doc = load_scene(DATA_DIR / f"{name}.json")
        assert doc.warnings == []
        assert doc.name == name
        assert doc.start is not None and doc.goal is not None
        assert doc.model is not None
        fx = fixture(name)
        assert scene_to_dict(doc.scene) == scene_to_dict(fx.scene)


def test_save_load_file_roundtrip(tmp_path):
    fx = fixture("jet3d")
    path = tmp_path / "scene.json"
    save_scene(path, fx.scene, name="jet3d", start=fx.start, goal=fx.goal)
    doc = load_scene(path)
    assert doc.warnings == []
    assert scene_to_dict(doc.scene) == scene_to_dict(fx.scene)


def test_load_scene_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(InputError) as err:
        load_scene(path)
    assert "invalid JSON" in str(err.value)


def _quick_result():
    fx = fixture("constant")
    sched = IDSchedule(**{**fx.schedule.__dict__, "rounds": 2})
    model = time_model(fx.V)
    return fx, model, sched, optimize(fx.scene, fx.start, fx.goal, model, sched)


def test_report_verifies_and_rebuilds():
    fx, model, sched, result = _quick_result()
    rep = report_dict(fx.scene, "constant", model, sched, result)
    assert verify_report(fx.scene, rep) < 1e-9
    chain = report_chain(fx.scene, rep)
    assert chain.boundaries == result.chain.boundaries
    assert np.allclose(np.concatenate(chain.lambdas),
                       np.concatenate(result.chain.lambdas))
    assert "wall_clock" not in rep
    timed = report_dict(fx.scene, "constant", model, sched, result, wall_clock=1.5)
    assert timed["wall_clock"] == 1.5


def test_dump_json_stable():
    a = dump_json({"b": 1, "a": [1, 2], "c": {"y": 0, "x": 1}})
    b = dump_json({"c": {"x": 1, "y": 0}, "a": [1, 2], "b": 1})
    assert a == b
    assert a.endswith("\n")


def test_cli_plan_fixture(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["plan", "constant", "--rounds", "2", "--threads", "1",
                 "--no-timing", "--json-out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["cost"] == pytest.approx(5.2241, abs=1e-3)
    assert doc["scene"] == "constant"
    assert verify_report(fixture("constant").scene, doc) < 1e-9
    assert "cost 5.2241 via 1 junctions" in capsys.readouterr().out


def test_cli_plan_json_to_stdout(capsys):
    code = main(["plan", "constant", "--rounds", "1", "--threads", "1",
                 "--no-timing", "--json-out", "-"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["result"]["cost"] == pytest.approx(5.2241, abs=1e-3)


def test_cli_plan_scene_file_with_overrides(tmp_path, capsys):
    fx = fixture("jet")
    path = tmp_path / "jet.json"
    save_scene(path, fx.scene, name="jet", start=fx.start, goal=fx.goal,
               model=time_model(fx.V))
    out = tmp_path / "rep.json"
    code = main(["plan", str(path), "--rounds", "2", "--threads", "1",
                 "--goal", "0,20", "--no-timing", "--json-out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["cost"] == pytest.approx(6.7377, abs=1e-2)


def test_cli_plan_byte_stable(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    argv = ["plan", "constant", "--rounds", "3", "--threads", "2", "--no-timing"]
    assert main(argv + ["--json-out", str(a)]) == 0
    assert main(argv + ["--json-out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_plan_scene_warnings_on_stderr(tmp_path, capsys):
    path = tmp_path / "noisy.json"
    path.write_text(dump_json(_jet_doc(annotation="x")))
    code = main(["plan", str(path), "--rounds", "1", "--threads", "1",
                 "--no-timing", "--json-out", "-"])
    assert code == 0
    assert "warning: unknown field 'annotation'" in capsys.readouterr().err


def test_cli_plan_missing_inputs(tmp_path, capsys):
    fx = fixture("jet")
    path = tmp_path / "bare.json"
    save_scene(path, fx.scene)  # no start/goal/model blocks
    code = main(["plan", str(path)])
    assert code == 2
    assert "start and goal" in capsys.readouterr().err
    code = main(["plan", str(path), "--start", "0,0", "--goal", "0,20"])
    assert code == 2
    assert "vehicle speed missing" in capsys.readouterr().err


def test_cli_plan_planning_failure_emits_error_json(capsys):
    code = main(["plan", "jet", "--V", "0.5", "--rounds", "1",
                 "--duration", "5", "--threads", "1"])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["error"]["type"] == "planning_failure"
    assert "diagnostics" in doc["error"]


@pytest.mark.parametrize("argv,fragment", [
    (["plan", "nosuchscene"], "neither a scene file nor a bundled fixture"),
    (["plan", "constant", "--start", "zero,0"], "cannot parse point"),
    (["plan", "constant", "--start", "1,2,3"], "must have 2 coordinates"),
    (["partition", "missing.csv", "--k", "2"], "error"),
])
def test_cli_input_errors_exit_2(tmp_path, capsys, argv, fragment):
    code = main(argv)
    assert code == 2
    assert fragment in capsys.readouterr().err


def test_cli_plan_bad_scene_json_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    assert main(["plan", str(path)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_cli_partition_jet_grid(tmp_path, capsys):
    out = tmp_path / "part.json"
    skel = tmp_path / "skeleton.json"
    code = main(["partition", str(DATA_DIR / "jet_grid.csv"), "--k", "2",
                 "--json-out", str(out), "--skeleton-out", str(skel)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["k"] == 2
    edges = sorted(-line["c"] for line in doc["fitted_lines"])
    assert edges == pytest.approx([7.5, 10.5], abs=0.1)
    flows = sorted(np.hypot(u, v) for u, v in doc["mean_flows"])
    assert flows[0] == pytest.approx(0.0, abs=1e-12)
    assert flows[1] == pytest.approx(2.9, abs=1e-12)
    hist = doc["objective_history"]
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    skel_doc = json.loads(skel.read_text())
    assert skel_doc["dimension"] == 2
    assert len(skel_doc["regions"]) == 2
    assert len(skel_doc["fitted_lines"]) == 2
    assert "cluster sizes" in capsys.readouterr().out


def test_cli_partition_mercator(tmp_path):
    # degree-scale grid projected to meters before clustering
    src = tmp_path / "deg.csv"
    lines = ["x,y,u,v"]
    for lon in np.arange(0.0, 1.01, 0.25):
        for lat in np.arange(40.0, 41.01, 0.25):
            u = 1.0 if 40.4 < lat < 40.6 else 0.0
            lines.append(f"{lon},{lat},{u},0.0")
    src.write_text("\n".join(lines) + "\n")
    out = tmp_path / "m.json"
    code = main(["partition", str(src), "--k", "2", "--mercator", "0.5,40.5",
                 "--json-out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["k"] == 2


def test_cli_plot_deterministic(tmp_path):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    assert main(["plot", "jet", "--svg-out", str(a)]) == 0
    assert main(["plot", "jet", "--svg-out", str(b)]) == 0
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert data.startswith(b"<?xml") and b"<svg" in data


def test_cli_plot_with_report_overlay(tmp_path):
    rep = tmp_path / "rep.json"
    assert main(["plan", "constant", "--rounds", "1", "--threads", "1",
                 "--no-timing", "--json-out", str(rep)]) == 0
    svg = tmp_path / "c.svg"
    assert main(["plot", "constant", "--report", str(rep),
                 "--svg-out", str(svg)]) == 0
    assert b"<svg" in svg.read_bytes()


def test_cli_plan_svg_out(tmp_path):
    svg = tmp_path / "plan.svg"
    code = main(["plan", "constant", "--rounds", "1", "--threads", "1",
                 "--no-timing", "--svg-out", str(svg), "--json-out", "-"])
    assert code == 0
    assert b"<svg" in svg.read_bytes()


def test_cli_bench_exit_codes(tmp_path, monkeypatch, capsys):
    calls = {}

    def fake_suite(seed, threads):
        calls["seed"] = seed
        return (True, [{"name": "constant-time", "ok": True}], "ALL OK")

    monkeypatch.setattr("flowplan.cli.run_suite", fake_suite)
    out = tmp_path / "bench.json"
    assert main(["bench", "--seed", "7", "--json-out", str(out)]) == 0
    assert calls["seed"] == 7
    assert "ALL OK" in capsys.readouterr().out
    assert json.loads(out.read_text())["passed"] is True

    monkeypatch.setattr(
        "flowplan.cli.run_suite",
        lambda seed, threads: (False, [{"name": "x", "ok": False}], "FAIL"))
    assert main(["bench"]) == 3
