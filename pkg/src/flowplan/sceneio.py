"""Scene-file and run-report JSON serialization.

Scene documents are strict about types but lenient about extra keys:
unknown fields are collected as warnings rather than errors, so files
annotated by other tools still load. Reports serialize a planning result
completely enough that the stored cost can be re-derived from the stored
junction parameters alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cost import CostModel, chain_cost, energy_model, time_model
from .errors import InputError
from .geometry import Boundary, FlowScene, JunctionChain, Region
from .mej import IDSchedule, PlanResult

_SCENE_KEYS = {"dimension", "domain", "regions", "boundaries", "start", "goal", "model", "name"}
_REGION_KEYS = {"id", "flow", "vertices"}
_BOUNDARY_KEYS = {"pair", "endpoints", "plane", "extent"}
_MODEL_KEYS = {"kind", "V", "C"}


@dataclass
class SceneDocument:
    """A parsed scene plus its optional planning defaults."""

    scene: FlowScene
    name: str | None = None
    start: np.ndarray | None = None
    goal: np.ndarray | None = None
    model: CostModel | None = None
    warnings: list = field(default_factory=list)


def _require(cond: bool, msg: str):
    if not cond:
        raise InputError(msg)


def _model_from_dict(d: dict, where: str) -> CostModel:
    _require(isinstance(d, dict), f"{where}: model must be an object")
    kind = d.get("kind")
    _require(kind in ("time", "energy"), f"{where}: model.kind must be 'time' or 'energy'")
    _require("V" in d, f"{where}: model.V missing")
    if kind == "time":
        return time_model(V=float(d["V"]))
    _require("C" in d, f"{where}: energy model needs C")
    return energy_model(V=float(d["V"]), C=float(d["C"]))


def scene_from_dict(doc: dict, name: str = "<scene>") -> SceneDocument:
    _require(isinstance(doc, dict), f"{name}: top level must be an object")
    warnings = [f"unknown field {k!r}" for k in sorted(set(doc) - _SCENE_KEYS)]
    for key in ("dimension", "domain", "regions", "boundaries"):
        _require(key in doc, f"{name}: missing field {key!r}")
    dim = doc["dimension"]
    _require(dim in (2, 3), f"{name}: dimension must be 2 or 3")

    regions = []
    for i, r in enumerate(doc["regions"]):
        where = f"{name}: regions[{i}]"
        _require(isinstance(r, dict), f"{where} must be an object")
        warnings += [f"regions[{i}]: unknown field {k!r}" for k in sorted(set(r) - _REGION_KEYS)]
        for key in ("id", "flow", "vertices"):
            _require(key in r, f"{where}: missing {key!r}")
        regions.append(Region.make(int(r["id"]), r["flow"], r["vertices"]))

    boundaries = []
    for i, b in enumerate(doc["boundaries"]):
        where = f"{name}: boundaries[{i}]"
        _require(isinstance(b, dict), f"{where} must be an object")
        warnings += [f"boundaries[{i}]: unknown field {k!r}" for k in sorted(set(b) - _BOUNDARY_KEYS)]
        _require("pair" in b and len(b["pair"]) == 2, f"{where}: pair must be [alpha, beta]")
        pair = (int(b["pair"][0]), int(b["pair"][1]))
        if "endpoints" in b:
            _require(len(b["endpoints"]) == 2, f"{where}: endpoints must be [p1, p2]")
            boundaries.append(Boundary.segment(pair, b["endpoints"][0], b["endpoints"][1]))
        elif "plane" in b:
            plane = b["plane"]
            _require(isinstance(plane, dict) and "normal" in plane and "offset" in plane,
                     f"{where}: plane needs normal and offset")
            _require("extent" in b, f"{where}: a plane boundary needs an extent polygon")
            boundaries.append(Boundary.patch(pair, plane["normal"], float(plane["offset"]), b["extent"]))
        else:
            raise InputError(f"{where}: needs either endpoints or plane+extent")

    scene = FlowScene.make(dim, doc["domain"], regions, boundaries)
    out = SceneDocument(scene=scene, name=doc.get("name", None), warnings=warnings)
    if "start" in doc:
        out.start = np.asarray(doc["start"], dtype=float)
        _require(out.start.shape == (dim,), f"{name}: start must be a {dim}-vector")
    if "goal" in doc:
        out.goal = np.asarray(doc["goal"], dtype=float)
        _require(out.goal.shape == (dim,), f"{name}: goal must be a {dim}-vector")
    if "model" in doc:
        out.model = _model_from_dict(doc["model"], name)
    return out


def scene_to_dict(scene: FlowScene, name: str | None = None,
                  start=None, goal=None, model: CostModel | None = None) -> dict:
    doc: dict = {
        "dimension": scene.dimension,
        "domain": scene.domain.tolist(),
        "regions": [
            {"id": r.id, "flow": r.flow.tolist(), "vertices": r.vertices.tolist()}
            for r in scene.regions
        ],
        "boundaries": [],
    }
    for b in scene.boundaries:
        if b.dimension == 2:
            doc["boundaries"].append({"pair": list(b.pair),
                                      "endpoints": [b.p1.tolist(), b.p2.tolist()]})
        else:
            doc["boundaries"].append({
                "pair": list(b.pair),
                "plane": {"normal": b.normal.tolist(), "offset": b.offset},
                "extent": b.extent.tolist(),
            })
    if name is not None:
        doc["name"] = name
    if start is not None:
        doc["start"] = np.asarray(start, dtype=float).tolist()
    if goal is not None:
        doc["goal"] = np.asarray(goal, dtype=float).tolist()
    if model is not None:
        doc["model"] = {"kind": model.kind, "V": model.V}
        if model.kind == "energy":
            doc["model"]["C"] = model.C
    return doc


def load_scene(path) -> SceneDocument:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    return scene_from_dict(doc, name=str(path))


def save_scene(path, scene: FlowScene, **kw) -> None:
    with open(path, "w") as fh:
        json.dump(scene_to_dict(scene, **kw), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _model_dict(model: CostModel) -> dict:
    d = {"kind": model.kind, "V": model.V}
    if model.kind == "energy":
        d["C"] = model.C
    return d


def _chain_dict(scene: FlowScene, chain: JunctionChain, cost: float) -> dict:
    return {
        "boundaries": list(chain.boundaries),
        "lambdas": [np.atleast_1d(l).tolist() for l in chain.lambdas],
        "region_sequence": list(chain.region_sequence),
        "junction_points": [p.tolist() for p in chain.junction_points(scene)],
        "cost": cost,
    }


def report_dict(scene: FlowScene, scene_id: str, model: CostModel,
                schedule: IDSchedule, result: PlanResult,
                wall_clock: float | None = None) -> dict:
    """JSON-ready run report; omit wall_clock for byte-stable output."""
    doc = {
        "scene": scene_id,
        "model": _model_dict(model),
        "schedule": {
            "h": schedule.h, "rounds": schedule.rounds,
            "perturb_duration": schedule.perturb_duration,
            "sigma0": schedule.sigma0, "grad_tol": schedule.grad_tol,
            "max_descent_steps": schedule.max_descent_steps, "seed": schedule.seed,
        },
        "result": {
            **_chain_dict(scene, result.chain, result.cost),
            "start": result.chain.start.tolist(),
            "goal": result.chain.goal.tolist(),
            "per_segment": [
                {"t": s.t, "v": np.asarray(s.v).tolist(), "cost": s.cost,
                 "max_speed_branch": bool(s.max_speed_branch)}
                for s in result.per_segment
            ],
            "round_costs": list(result.round_costs),
            "diagnostics": result.diagnostics,
        },
        "co_optimal": [
            {
                "boundaries": list(m.boundaries),
                "lambdas": [np.atleast_1d(l).tolist() for l in m.lambdas],
                "junction_points": [np.asarray(p).tolist() for p in m.junction_points],
                "cost": m.cost,
            }
            for m in result.local_minima if m.co_optimal
        ],
    }
    if wall_clock is not None:
        doc["wall_clock"] = wall_clock
    return doc


def report_chain(scene: FlowScene, report: dict) -> JunctionChain:
    """Rebuild the winning chain from a serialized report."""
    res = report["result"]
    return JunctionChain(
        start=np.asarray(res["start"], dtype=float),
        goal=np.asarray(res["goal"], dtype=float),
        boundaries=[int(b) for b in res["boundaries"]],
        lambdas=[np.asarray(l, dtype=float) for l in res["lambdas"]],
        region_sequence=[int(r) for r in res["region_sequence"]],
    )


def verify_report(scene: FlowScene, report: dict) -> float:
    """Re-derive the stored cost from stored parameters; returns |difference|."""
    chain = report_chain(scene, report)
    model = _model_from_dict(report["model"], "<report>")
    return abs(chain_cost(scene, chain, model) - float(report["result"]["cost"]))


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
