"""Report documents: versioned JSON plus a flat CSV rendering of the same numbers.

Documents are plain dicts so that ``report`` can reformat a saved file without
rerunning anything.  Keys are sorted and floats are written with ``repr`` so
identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from importlib import metadata
from typing import Sequence

import numpy as np

from .exact.classes import EquilibriumClass, StrategySpace
from .preferences import reduce_state
from .scenario import Scenario, format_number, serialize_scenario
from .sim import LikelihoodReport, LikelihoodView, SimConfig

SCHEMA = "powergame.report/1"
CSV_FIELDS = ("section", "view", "label", "piece", "country", "metric", "value")


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def scenario_digest(s: Scenario) -> str:
    return hashlib.sha256(serialize_scenario(s).encode()).hexdigest()


def _base(command: str, s: Scenario) -> dict:
    g = s.graph
    return {
        "schema": SCHEMA,
        "command": command,
        "scenario": {
            "digest": scenario_digest(s),
            "countries": g.n,
            "names": [g.name(i) for i in range(g.n)],
            "power": [format_number(p) for p in g.power],
            "preferences": "orders" if s.orders is not None else "utilities",
            "warnings": list(s.warnings),
        },
        "metadata": {"versions": {"powergame": package_version(), "numpy": np.__version__}},
    }


def _constraint_doc(c, names) -> dict:
    return {
        "coeffs": [format_number(a) for a in c.coeffs],
        "rel": c.rel,
        "bound": format_number(c.bound),
        "text": c.format(names),
    }


def enumeration_document(s: Scenario, space: StrategySpace, classes: Sequence[EquilibriumClass],
                         cap: int, samples: int | None, seed: int | None) -> dict:
    g = s.graph
    names = g.flat_names()
    doc = _base("enumerate", s)
    doc["metadata"].update({"cap": cap, "volume_samples": samples, "seed": seed})
    out = []
    for c in classes:
        pieces = []
        for k, p in enumerate(c.polytopes):
            piece = {"constraints": [_constraint_doc(r, names) for r in p.constraints]}
            if c.piece_volumes:
                piece["volume"] = c.piece_volumes[k]
            pieces.append(piece)
        entry = {
            "label": c.name,
            "survival": list(c.survival()),
            "reduced": ["".join(map(str, reduce_state(g, c.label, i))) for i in range(g.n)],
            "polytopes": pieces,
        }
        if c.volume is not None:
            entry["volume"] = c.volume
        out.append(entry)
    doc["enumeration"] = {
        "variables": names,
        "space_volume": format_number(space.volume()),
        "classes": out,
    }
    return doc


def _view_doc(v: LikelihoodView) -> dict:
    return {
        "total": v.total,
        "classes": [{"label": label, "count": c, "share": c / v.total} for label, c in v.class_counts],
        "survival": list(v.survival),
        "safe": list(v.safe),
    }


def simulation_document(s: Scenario, config: SimConfig, report: LikelihoodReport) -> dict:
    doc = _base("simulate", s)
    doc["metadata"].update({"seed": config.seed, "q": config.q, "rounds": config.rounds,
                            "mode": config.mode, "lattice": config.lattice})
    doc["simulation"] = {
        "views": {"all": _view_doc(report.all), "converged": _view_doc(report.converged)},
        "rounds_histogram": [[r, k] for r, k in report.rounds_histogram],
    }
    return doc


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def csv_rows(doc: dict) -> list[dict]:
    rows = []

    def add(section, metric, value, view="", label="", piece="", country=""):
        rows.append({"section": section, "view": view, "label": label, "piece": piece,
                     "country": country, "metric": metric, "value": value})

    enum = doc.get("enumeration")
    if enum is not None:
        add("enumeration", "space_volume", enum["space_volume"])
        for c in enum["classes"]:
            if "volume" in c:
                add("enumeration", "volume", repr(c["volume"]), label=c["label"])
            add("enumeration", "polytopes", len(c["polytopes"]), label=c["label"])
            for k, p in enumerate(c["polytopes"]):
                if "volume" in p:
                    add("enumeration", "volume", repr(p["volume"]), label=c["label"], piece=k)
                for r in p["constraints"]:
                    add("enumeration", "constraint", r["text"], label=c["label"], piece=k)
    sim = doc.get("simulation")
    if sim is not None:
        for view in ("all", "converged"):
            v = sim["views"][view]
            add("simulation", "total", v["total"], view=view)
            for c in v["classes"]:
                add("simulation", "count", c["count"], view=view, label=c["label"])
                add("simulation", "share", repr(c["share"]), view=view, label=c["label"])
            for i, (sv, sf) in enumerate(zip(v["survival"], v["safe"])):
                add("simulation", "survival", repr(sv), view=view, country=i + 1)
                add("simulation", "safe", repr(sf), view=view, country=i + 1)
    return rows


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(csv_rows(doc))
    return buf.getvalue()


def load_document(text: str) -> dict:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} document")
    return doc

