"""Finite-alphabet probability objects.

Everything here is immutable after construction. Distributions are aligned
by label, never by position: two objects that use the same labels in a
different order are reordered before any arithmetic happens.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

# Entries more negative than this are modeling errors, not round-off.
NEGATIVE_TOL = 1e-12
# Mass may deviate from 1 by at most this much before we refuse the input.
MASS_TOL = 1e-9
# After validation, anything smaller is snapped to exactly zero.
ZERO_CLAMP = 1e-13

AXES = ("X", "Y", "Z")


class ValidationError(ValueError):
    """Raised when a distribution or label set is malformed."""


class LabelMismatchError(ValidationError):
    """Raised when two objects that must share an alphabet do not."""


class ZeroProbabilityEventError(ValueError):
    """Raised when conditioning on an event of probability zero."""


class AlphaDomainError(ValueError):
    """Raised when an order parameter is outside an operation's domain."""


# ---------------------------------------------------------------------------
# Order parameter and log base
# ---------------------------------------------------------------------------


class AlphaKind(enum.Enum):
    ONE = "one"
    FINITE = "finite"
    INFINITY = "infinity"


@dataclass(frozen=True)
class Alpha:
    """Order parameter with exact handling of 1 and infinity.

    ``Alpha(1)`` and ``Alpha(math.inf)`` select the continuous extensions;
    every other positive value is the finite case.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v <= 0:
            raise AlphaDomainError(f"alpha must be > 0, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def kind(self) -> AlphaKind:
        if self.value == 1.0:
            return AlphaKind.ONE
        if math.isinf(self.value):
            return AlphaKind.INFINITY
        return AlphaKind.FINITE

    @property
    def is_one(self) -> bool:
        return self.kind is AlphaKind.ONE

    @property
    def is_inf(self) -> bool:
        return self.kind is AlphaKind.INFINITY

    @property
    def is_finite(self) -> bool:
        return self.kind is AlphaKind.FINITE

    @classmethod
    def parse(cls, token: str | float | int | Alpha) -> Alpha:
        """Parse ``"inf"``, ``"1"`` or any positive decimal."""
        if isinstance(token, Alpha):
            return token
        if isinstance(token, str):
            t = token.strip().lower()
            if t in ("inf", "infinity", "∞"):
                return cls(math.inf)
            try:
                return cls(float(t))
            except ValueError:
                raise AlphaDomainError(f"cannot parse alpha {token!r}") from None
        return cls(float(token))

    def __str__(self) -> str:
        if self.is_inf:
            return "inf"
        text = repr(self.value)
        return text[:-2] if text.endswith(".0") else text


def as_alpha(alpha) -> Alpha:
    return Alpha.parse(alpha)


class LogBase(enum.Enum):
    BITS = "bits"
    NATS = "nats"

    @property
    def nats_per_unit(self) -> float:
        return math.log(2.0) if self is LogBase.BITS else 1.0

    def from_nats(self, value: float) -> float:
        return value / self.nats_per_unit

    def to_nats(self, value: float) -> float:
        return value * self.nats_per_unit

    @classmethod
    def parse(cls, token) -> LogBase:
        if isinstance(token, LogBase):
            return token
        try:
            return cls(str(token).lower())
        except ValueError:
            raise ValidationError(f"unknown log base {token!r}; use bits or nats") from None


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def _check_labels(labels: Iterable[Hashable], what: str) -> tuple:
    labels = tuple(labels)
    if len(labels) == 0:
        raise ValidationError(f"{what}: alphabet must contain at least one symbol")
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{what}: labels must be unique")
    return labels


def _normalize(arr: np.ndarray, axis, what: str) -> np.ndarray:
    """Validate non-negativity and unit mass along ``axis``; clamp and renormalize."""
    arr = np.array(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: entries must be finite")
    if np.any(arr < -NEGATIVE_TOL):
        raise ValidationError(f"{what}: negative probability {arr.min():.3g}")
    arr = np.clip(arr, 0.0, None)
    mass = arr.sum(axis=axis, keepdims=True)
    if np.any(np.abs(mass - 1.0) > MASS_TOL):
        worst = float(np.max(np.abs(mass - 1.0)))
        raise ValidationError(f"{what}: mass deviates from 1 by {worst:.3g}")
    arr = arr / mass
    arr[arr < ZERO_CLAMP] = 0.0
    arr = arr / arr.sum(axis=axis, keepdims=True)
    arr.flags.writeable = False
    return arr


def _reorder(labels: tuple, target: tuple, what: str) -> np.ndarray:
    """Index array mapping ``target`` order onto ``labels`` order."""
    if set(labels) != set(target) or len(labels) != len(target):
        raise LabelMismatchError(f"{what}: labels {list(labels)} do not match {list(target)}")
    pos = {lab: i for i, lab in enumerate(labels)}
    return np.array([pos[t] for t in target], dtype=int)


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over a labeled finite alphabet."""

    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.labels, "Pmf")
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (len(labels),):
            raise ValidationError(
                f"Pmf: {len(labels)} labels but probability vector has shape {probs.shape}"
            )
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", _normalize(probs, 0, "Pmf"))

    @classmethod
    def uniform(cls, labels: Sequence[Hashable]) -> Pmf:
        n = len(labels)
        return cls(labels, np.full(n, 1.0 / n))

    @classmethod
    def point(cls, labels: Sequence[Hashable], at: Hashable) -> Pmf:
        probs = np.array([1.0 if lab == at else 0.0 for lab in labels])
        return cls(labels, probs)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label) -> float:
        return float(self.probs[self.labels.index(label)])

    def as_dict(self) -> dict:
        return {lab: float(p) for lab, p in zip(self.labels, self.probs)}

    def aligned_to(self, labels: Sequence[Hashable]) -> np.ndarray:
        """Probabilities listed in the order of ``labels``."""
        return self.probs[_reorder(self.labels, tuple(labels), "Pmf")]

    def __repr__(self) -> str:
        body = ", ".join(f"{lab!r}: {p:.6g}" for lab, p in zip(self.labels, self.probs))
        return f"Pmf({{{body}}})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic conditional distribution ``P(output | input)``."""

    input_labels: tuple
    output_labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        ins = _check_labels(self.input_labels, "Channel inputs")
        outs = _check_labels(self.output_labels, "Channel outputs")
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (len(ins), len(outs)):
            raise ValidationError(
                f"Channel: expected shape {(len(ins), len(outs))}, got {mat.shape}"
            )
        object.__setattr__(self, "input_labels", ins)
        object.__setattr__(self, "output_labels", outs)
        object.__setattr__(self, "matrix", _normalize(mat, 1, "Channel row"))

    @classmethod
    def identity(cls, labels: Sequence[Hashable]) -> Channel:
        return cls(labels, labels, np.eye(len(labels)))

    @classmethod
    def constant(cls, input_labels, output_labels, row=None) -> Channel:
        m = len(output_labels)
        row = np.full(m, 1.0 / m) if row is None else np.asarray(row, dtype=float)
        return cls(input_labels, output_labels, np.tile(row, (len(input_labels), 1)))

    def row(self, label) -> np.ndarray:
        return self.matrix[self.input_labels.index(label)]

    def rows_for(self, labels: Sequence[Hashable]) -> np.ndarray:
        """Matrix with rows ordered by ``labels``; every label must be an input."""
        pos = {lab: i for i, lab in enumerate(self.input_labels)}
        try:
            return self.matrix[[pos[lab] for lab in labels]]
        except KeyError as exc:
            raise LabelMismatchError(f"Channel has no input row for {exc.args[0]!r}") from None


@dataclass(frozen=True, eq=False)
class Joint2:
    """Joint distribution over a pair of labeled alphabets (rows x columns)."""

    row_labels: tuple
    col_labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        rows = _check_labels(self.row_labels, "Joint2 rows")
        cols = _check_labels(self.col_labels, "Joint2 columns")
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (len(rows), len(cols)):
            raise ValidationError(f"Joint2: expected shape {(len(rows), len(cols))}, got {mat.shape}")
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)
        object.__setattr__(self, "matrix", _normalize(mat, None, "Joint2"))

    def row_marginal(self) -> Pmf:
        return Pmf(self.row_labels, self.matrix.sum(axis=1))

    def col_marginal(self) -> Pmf:
        return Pmf(self.col_labels, self.matrix.sum(axis=0))

    def split(self) -> tuple[Pmf, Channel]:
        """Row marginal and row-conditional channel, both restricted to the row support.

        Rows with zero mass have no conditional distribution, so they are
        dropped rather than filled with an invented one.
        """
        px = self.matrix.sum(axis=1)
        keep = np.flatnonzero(px > 0)
        labels = [self.row_labels[i] for i in keep]
        ch = self.matrix[keep] / px[keep, None]
        return Pmf(labels, px[keep]), Channel(labels, self.col_labels, ch)

    @classmethod
    def from_channel(cls, px: Pmf, ch: Channel) -> Joint2:
        W = ch.rows_for(px.labels)
        return cls(px.labels, ch.output_labels, px.probs[:, None] * W)


@dataclass(frozen=True, eq=False)
class Joint3:
    """Joint distribution tensor over (X, Y, Z), indexed X-major."""

    x_labels: tuple
    y_labels: tuple
    z_labels: tuple
    tensor: np.ndarray

    def __post_init__(self):
        xs = _check_labels(self.x_labels, "Joint3 X")
        ys = _check_labels(self.y_labels, "Joint3 Y")
        zs = _check_labels(self.z_labels, "Joint3 Z")
        t = np.asarray(self.tensor, dtype=float)
        if t.shape != (len(xs), len(ys), len(zs)):
            raise ValidationError(
                f"Joint3: expected shape {(len(xs), len(ys), len(zs))}, got {t.shape}"
            )
        object.__setattr__(self, "x_labels", xs)
        object.__setattr__(self, "y_labels", ys)
        object.__setattr__(self, "z_labels", zs)
        object.__setattr__(self, "tensor", _normalize(t, None, "Joint3"))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.tensor.shape

    def labels_for(self, axis: str) -> tuple:
        return (self.x_labels, self.y_labels, self.z_labels)[_axis_index(axis)]

    @classmethod
    def from_joint2(cls, j: Joint2, z_label: Hashable = "z0") -> Joint3:
        """Embed an (X, Y) joint with a constant side-information variable."""
        return cls(j.row_labels, j.col_labels, (z_label,), j.matrix[:, :, None])

    @classmethod
    def from_channels(cls, px: Pmf, ch_yx: Channel, ch_z_xy: Channel) -> Joint3:
        """Build ``P(x) P(y|x) P(z|x,y)``; ``ch_z_xy`` inputs are ``(x, y)`` tuples."""
        W = ch_yx.rows_for(px.labels)
        xs, ys, zs = px.labels, ch_yx.output_labels, ch_z_xy.output_labels
        V = ch_z_xy.rows_for([(x, y) for x in xs for y in ys]).reshape(len(xs), len(ys), len(zs))
        return cls(xs, ys, zs, px.probs[:, None, None] * W[:, :, None] * V)

    def permuted(self, order: str) -> Joint3:
        """Reorder axes, e.g. ``"XZY"`` swaps the roles of Y and Z."""
        idx = [_axis_index(a) for a in order]
        if sorted(idx) != [0, 1, 2]:
            raise ValidationError(f"bad axis order {order!r}")
        labels = [self.labels_for(a) for a in order]
        return Joint3(*labels, np.transpose(self.tensor, idx))


def _axis_index(axis: str) -> int:
    try:
        return AXES.index(str(axis).upper())
    except ValueError:
        raise ValidationError(f"unknown axis {axis!r}; expected one of X, Y, Z") from None


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def marginalize(j: Joint3, keep_axes: Iterable[str]) -> Pmf | Joint2 | Joint3:
    """Sum out every axis not in ``keep_axes``.

    Kept axes stay in X, Y, Z order. One kept axis gives a :class:`Pmf`,
    two give a :class:`Joint2`, all three return ``j`` unchanged.
    """
    keep = sorted({_axis_index(a) for a in keep_axes})
    if not keep:
        raise ValidationError("marginalize: keep_axes must be non-empty")
    drop = tuple(i for i in range(3) if i not in keep)
    arr = j.tensor.sum(axis=drop) if drop else j.tensor
    labels = [j.labels_for(AXES[i]) for i in keep]
    if len(keep) == 1:
        return Pmf(labels[0], arr)
    if len(keep) == 2:
        return Joint2(labels[0], labels[1], arr)
    return j


def condition_on_event(j: Joint3, z: Hashable) -> Joint2:
    """Return ``P(X, Y | Z = z)``."""
    if z not in j.z_labels:
        raise LabelMismatchError(f"{z!r} is not a Z label")
    k = j.z_labels.index(z)
    slab = j.tensor[:, :, k]
    pz = slab.sum()
    if pz <= 0:
        raise ZeroProbabilityEventError(f"P(Z={z!r}) = 0; cannot condition on it")
    return Joint2(j.x_labels, j.y_labels, slab / pz)


def support(p: Pmf) -> frozenset:
    """Labels carrying strictly positive mass."""
    return frozenset(lab for lab, q in zip(p.labels, p.probs) if q > 0)


def restrict_support(p: Pmf, allowed: Iterable[Hashable]) -> Pmf:
    """Zero out labels outside ``allowed`` and renormalize over the same alphabet."""
    allowed = set(allowed)
    mask = np.array([lab in allowed for lab in p.labels])
    kept = np.where(mask, p.probs, 0.0)
    if kept.sum() <= 0:
        raise ValidationError("restrict_support: allowed set misses the support entirely")
    return Pmf(p.labels, kept / kept.sum())
