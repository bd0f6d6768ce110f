"""JSON reading and writing for instances, policies, fluxes and value vectors.

Instance files look like::

    {"n": 2, "actions": [{"id": 1, "state": 1, "cost": 1.0, "to": {}},
                         {"id": 2, "state": 2, "cost": 2.0, "to": {"1": 1.0}}]}

``to`` omits the target; action ids are dense ``1..m``.  An optional
``"label"`` per action is kept for display.  Output is canonical: sorted
keys, two-space indent, floats in Python's shortest round-trip form.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import SspError
from .model import Decomposition, Policy, SspInstance


class ParseError(SspError):
    pass


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ParseError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _loads(text: str):
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        raise ParseError(f"non-finite number {x}")
    return x


def instance_from_dict(doc) -> SspInstance:
    try:
        n = doc["n"]
        raw = doc["actions"]
        if not isinstance(n, int) or isinstance(n, bool) or not isinstance(raw, list):
            raise ParseError("'n' must be an integer and 'actions' a list")
        by_id = {}
        for entry in raw:
            aid = entry["id"]
            if not isinstance(aid, int) or aid in by_id:
                raise ParseError(f"bad or repeated action id {aid!r}")
            by_id[aid] = entry
        if sorted(by_id) != list(range(1, len(by_id) + 1)):
            raise ParseError("action ids must be dense 1..m")
        actions, labels = [], []
        for aid in range(1, len(by_id) + 1):
            e = by_id[aid]
            to = {int(k): _num(v) for k, v in e.get("to", {}).items()}
            if 0 in to:
                raise ParseError(f"action {aid}: 'to' must omit the target state 0")
            actions.append((int(e["state"]), _num(e["cost"]), to))
            labels.append(e.get("label"))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed instance document: {exc!r}") from exc
    use_labels = labels if all(lbl is not None for lbl in labels) and labels else None
    return SspInstance.from_actions(n, actions, labels=use_labels)


def instance_to_dict(instance: SspInstance) -> dict:
    actions = []
    for a in range(1, instance.m + 1):
        e = {
            "id": a,
            "state": instance.owner[a - 1],
            "cost": float(instance.cost[a - 1]),
            "to": {str(j): float(p) for j, p in instance.trans[a - 1] if j != 0},
        }
        if instance.labels is not None:
            e["label"] = instance.labels[a - 1]
        actions.append(e)
    return {"n": instance.n, "actions": actions}


def loads_instance(text: str) -> SspInstance:
    return instance_from_dict(_loads(text))


def dumps_instance(instance: SspInstance) -> str:
    return dumps(instance_to_dict(instance))


def read_instance(path) -> SspInstance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    return loads_instance(text)


def write_instance(instance: SspInstance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def policy_to_dict(policy: Policy) -> dict:
    if policy.is_deterministic:
        return {"choice": {str(s): a for s, a in policy.as_dict().items()}}
    return {
        "choice": {str(s): [[a, float(w)] for a, w in ws.items()] for s, ws in policy.weights.items()}
    }


def policy_from_dict(doc) -> Policy:
    try:
        choice = doc["choice"]
        parsed = {}
        for s, v in choice.items():
            if isinstance(v, list):
                parsed[int(s)] = [(int(a), _num(w)) for a, w in v]
            else:
                parsed[int(s)] = int(v)
        return Policy(parsed)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed policy document: {exc!r}") from exc


def vector_to_dict(v) -> dict:
    """Flat ``{"1": v[0], "2": v[1], ...}`` map for fluxes (by action) or values (by state)."""
    return {str(i): float(x) for i, x in enumerate(np.asarray(v, dtype=float), start=1)}


def vector_from_dict(doc, size: int) -> np.ndarray:
    v = np.zeros(size)
    try:
        for k, x in doc.items():
            i = int(k)
            if not 1 <= i <= size:
                raise ParseError(f"index {i} outside 1..{size}")
            v[i - 1] = _num(x)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed vector document: {exc!r}") from exc
    return v


def decomposition_to_dict(dec: Decomposition) -> dict:
    return {
        "parts": [
            {"weight": float(p.weight), "policy": policy_to_dict(p.policy), "flux": vector_to_dict(p.flux)}
            for p in dec.parts
        ],
        "residual": vector_to_dict(dec.residual),
        "rounds": dec.rounds,
    }


def read_json(path):
    try:
        return _loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(str(exc)) from exc
