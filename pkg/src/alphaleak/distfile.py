"""JSON distribution files.

A file is an object with ``x_labels``, ``y_labels``, optional ``z_labels``
and exactly one way of specifying the distribution:

* ``joint`` - nested array indexed X, then Y, then Z (2-D without Z);
* ``px`` + ``channel_yx`` - input distribution and row-stochastic channel;
* ``px`` + ``channel_yx`` + ``channel_zx`` - also side information drawn
  from X alone, so Z - X - Y holds by construction.

Without ``z_labels`` the side information is a constant with label ``"z0"``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .prob_core import Channel, Joint3, Pmf, ValidationError


class SchemaError(ValidationError):
    """A distribution file does not follow the schema; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


_FORMS = {
    frozenset({"joint"}): "joint",
    frozenset({"px", "channel_yx"}): "channel",
    frozenset({"px", "channel_yx", "channel_zx"}): "markov",
}
_PAYLOAD = {"joint", "px", "channel_yx", "channel_zx"}
_KNOWN = _PAYLOAD | {"x_labels", "y_labels", "z_labels"}


def _labels(obj: dict, key: str, required: bool = True):
    if key not in obj:
        if required:
            raise SchemaError(key, "missing required field")
        return None
    labels = obj[key]
    if not isinstance(labels, list) or not labels:
        raise SchemaError(key, "must be a non-empty array")
    if not all(isinstance(lab, (str, int)) and not isinstance(lab, bool) for lab in labels):
        raise SchemaError(key, "labels must be strings or integers")
    if len(set(labels)) != len(labels):
        raise SchemaError(key, "labels must be unique")
    return labels


def _array(obj: dict, key: str, shape: tuple) -> np.ndarray:
    try:
        arr = np.array(obj[key], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(key, "must be a (nested) array of numbers") from None
    if arr.shape != shape:
        raise SchemaError(key, f"expected shape {list(shape)}, got {list(arr.shape)}")
    return arr


def parse_distribution(obj) -> Joint3:
    """Build a :class:`Joint3` from a decoded JSON object."""
    if not isinstance(obj, dict):
        raise SchemaError("<root>", "must be a JSON object")
    unknown = sorted(set(obj) - _KNOWN)
    if unknown:
        raise SchemaError(unknown[0], "unknown field")
    xs = _labels(obj, "x_labels")
    ys = _labels(obj, "y_labels")
    zs = _labels(obj, "z_labels", required=False)
    form = _FORMS.get(frozenset(set(obj) & _PAYLOAD))
    if form is None:
        present = sorted(set(obj) & _PAYLOAD)
        raise SchemaError(
            ",".join(present) or "joint",
            "give exactly one of: joint | px+channel_yx | px+channel_yx+channel_zx",
        )
    try:
        if form == "joint":
            if zs is None:
                t = _array(obj, "joint", (len(xs), len(ys)))[:, :, None]
            else:
                t = _array(obj, "joint", (len(xs), len(ys), len(zs)))
            return Joint3(xs, ys, zs or ["z0"], t)
        px = Pmf(xs, _array(obj, "px", (len(xs),)))
        W = Channel(xs, ys, _array(obj, "channel_yx", (len(xs), len(ys)))).matrix
        if form == "channel":
            t = (px.probs[:, None] * W)
            if zs is not None:
                if len(zs) != 1:
                    raise SchemaError("z_labels", "without channel_zx or joint, Z must be a single label")
            return Joint3(xs, ys, zs or ["z0"], t[:, :, None])
        if zs is None:
            raise SchemaError("z_labels", "required with channel_zx")
        V = Channel(xs, zs, _array(obj, "channel_zx", (len(xs), len(zs)))).matrix
        return Joint3(xs, ys, zs, px.probs[:, None, None] * W[:, :, None] * V[:, None, :])
    except SchemaError:
        raise
    except ValidationError as exc:
        field = {"joint": "joint", "channel": "px/channel_yx", "markov": "px/channel_yx/channel_zx"}[form]
        raise SchemaError(field, str(exc)) from None


def load_distribution(path) -> Joint3:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from None
    return parse_distribution(obj)


def dump_distribution(j: Joint3) -> dict:
    """Inverse of :func:`parse_distribution`, always using the ``joint`` form."""
    return {
        "x_labels": list(j.x_labels),
        "y_labels": list(j.y_labels),
        "z_labels": list(j.z_labels),
        "joint": j.tensor.tolist(),
    }
