"""JSON serialization of networks, spike-train files and data files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .core import Multi, NetworkSpec, NeuronSpec, Single, SpikeTrain, Synapse

__all__ = [
    "network_to_dict",
    "network_from_dict",
    "load_network",
    "save_network",
    "load_records",
    "load_trains",
    "save_trains",
    "dump_json",
]


def _limit_to_json(limit):
    return "single" if isinstance(limit, Single) else {"multi": limit.budget}


def _limit_from_json(obj):
    if obj == "single":
        return Single()
    if isinstance(obj, dict) and set(obj) == {"multi"}:
        return Multi(int(obj["multi"]))
    raise ValueError(f"bad spike_limit {obj!r}")


def network_to_dict(net: NetworkSpec) -> dict[str, Any]:
    doc = {
        "d_in": net.d_in,
        "d_out": net.d_out,
        "B": net.B,
        "dt": net.dt,
        "horizon": net.horizon,
        "neurons": [
            {
                "id": n.id,
                "layer": n.layer,
                "threshold_base": n.threshold_base,
                "threshold_multiplier": n.threshold_multiplier,
                "leak": n.leak,
                "spike_limit": _limit_to_json(n.spike_limit),
                **({"reset": n.reset} if n.reset != "offset" else {}),
            }
            for n in net.neurons
        ],
        "synapses": [
            {"pre": s.pre, "post": s.post, "weight": s.weight, "delay_steps": s.delay}
            for s in net.synapses
        ],
        "output_neurons": list(net.output_neurons),
    }
    if net.output_groups is not None:
        doc["output_groups"] = [list(g) for g in net.output_groups]
    return doc


def network_from_dict(doc: dict[str, Any]) -> NetworkSpec:
    neurons = [
        NeuronSpec(
            id=str(n["id"]),
            layer=int(n["layer"]),
            threshold_base=n.get("threshold_base", 1.0),
            threshold_multiplier=int(n.get("threshold_multiplier", 1)),
            leak=n.get("leak", 1.0),
            spike_limit=_limit_from_json(n.get("spike_limit", "single")),
            reset=n.get("reset", "offset"),
        )
        for n in doc.get("neurons", [])
    ]
    synapses = [
        Synapse(str(s["pre"]), str(s["post"]), s["weight"], int(s.get("delay_steps", 0)))
        for s in doc.get("synapses", [])
    ]
    groups = doc.get("output_groups")
    return NetworkSpec(
        d_in=int(doc["d_in"]),
        d_out=int(doc["d_out"]),
        neurons=neurons,
        synapses=synapses,
        output_neurons=[str(o) for o in doc.get("output_neurons", [])],
        B=doc["B"],
        dt=doc.get("dt", 1.0),
        horizon=int(doc["horizon"]),
        output_groups=None if groups is None else [[str(i) for i in g] for g in groups],
    )


def dump_json(obj, path=None) -> str:
    """Stable JSON text (sorted keys, fixed indentation, trailing newline)."""
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_network(path) -> NetworkSpec:
    return network_from_dict(json.loads(Path(path).read_text()))


def save_network(net: NetworkSpec, path) -> None:
    dump_json(network_to_dict(net), path)


def load_records(path) -> list:
    """Records from a JSON array, or one JSON value per non-blank line."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a list of records")
    return data


def load_trains(path) -> list[SpikeTrain]:
    return [SpikeTrain(r) for r in load_records(path)]


def save_trains(trains, path) -> None:
    Path(path).write_text("".join(json.dumps(list(t)) + "\n" for t in trains))
