"""Entropies and mutual informations of order alpha.

All quantities are evaluated in nats by array kernels (the ``*_nats``
functions) and wrapped into :class:`MeasureValue` by the public API. Every
sum of powers goes through log-sum-exp so that alpha up to ~1e4 neither
overflows nor underflows. Zero-probability terms are skipped, i.e.
``0 log 0 = 0`` and ``0 ** alpha = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from ._logspace import logsumexp, safe_log, xlogx
from .prob_core import (
    Alpha,
    AlphaDomainError,
    Channel,
    Joint3,
    LabelMismatchError,
    LogBase,
    Pmf,
    as_alpha,
    condition_on_event,
)


@dataclass(frozen=True)
class MeasureValue:
    """A scalar information quantity tagged with its order and unit."""

    value: float
    alpha: Alpha
    base: LogBase = LogBase.BITS

    def __float__(self) -> float:
        return self.value

    def to(self, base) -> MeasureValue:
        base = LogBase.parse(base)
        nats = self.base.to_nats(self.value)
        return MeasureValue(base.from_nats(nats), self.alpha, base)


def _wrap(nats: float, alpha: Alpha, base) -> MeasureValue:
    base = LogBase.parse(base)
    return MeasureValue(float(base.from_nats(nats)), alpha, base)


def _require_leakage_order(alpha: Alpha, op: str) -> None:
    if alpha.value < 1:
        raise AlphaDomainError(f"{op} is defined only for 1 <= alpha <= inf, got {alpha}")


def _aligned(px: Pmf, ch: Channel) -> tuple[np.ndarray, np.ndarray]:
    """Input probabilities and channel rows in a common order."""
    if set(px.labels) != set(ch.input_labels):
        raise LabelMismatchError(
            f"channel inputs {list(ch.input_labels)} differ from Pmf labels {list(px.labels)}"
        )
    return px.probs, ch.rows_for(px.labels)


# ---------------------------------------------------------------------------
# Array kernels (nats)
# ---------------------------------------------------------------------------


def renyi_entropy_nats(p: np.ndarray, a: float) -> float:
    p = np.asarray(p, dtype=float)
    if a == 1.0:
        return float(-np.sum(xlogx(p)))
    if math.isinf(a):
        return float(-math.log(p.max()))
    return float(logsumexp(a * safe_log(p)) / (1.0 - a))


def shannon_mi_nats(p: np.ndarray, W: np.ndarray) -> float:
    """I(X;Y) for input ``p`` and row-stochastic ``W``."""
    joint = np.asarray(p)[:, None] * W
    return joint_mi_nats(joint)


def joint_mi_nats(joint: np.ndarray) -> float:
    """Shannon mutual information between the row and column of a 2-D joint."""
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    return float(-np.sum(xlogx(px)) - np.sum(xlogx(py)) + np.sum(xlogx(joint)))


def sibson_mi_nats(p: np.ndarray, W: np.ndarray, a: float) -> float:
    """Sibson MI of order ``a`` for input ``p`` and channel ``W`` (rows = inputs)."""
    p = np.asarray(p, dtype=float)
    W = np.asarray(W, dtype=float)
    on = p > 0
    p, W = p[on], W[on]
    if a == 1.0:
        return shannon_mi_nats(p, W)
    if math.isinf(a):
        return float(math.log(np.sum(W.max(axis=0))))
    # log sum_x p(x) W(y|x)^a, per y
    log_inner = logsumexp(safe_log(p)[:, None] + a * safe_log(W), axis=0)
    return float(a / (a - 1.0) * logsumexp(log_inner / a))


def arimoto_cond_entropy_joint_nats(joint: np.ndarray, a: float) -> float:
    """H_a(X|W) from a 2-D joint ``P(x, w)`` with X on the rows."""
    joint = np.asarray(joint, dtype=float)
    if a == 1.0:
        return float(-np.sum(xlogx(joint)) + np.sum(xlogx(joint.sum(axis=0))))
    if math.isinf(a):
        return float(-math.log(np.sum(joint.max(axis=0))))
    log_inner = logsumexp(a * safe_log(joint), axis=0)
    return float(a / (1.0 - a) * logsumexp(log_inner / a))


def arimoto_mi_nats(p: np.ndarray, W: np.ndarray, a: float) -> float:
    p = np.asarray(p, dtype=float)
    W = np.asarray(W, dtype=float)
    if a == 1.0 or math.isinf(a):
        return renyi_entropy_nats(p, a) - arimoto_cond_entropy_joint_nats(p[:, None] * W, a)
    on = p > 0
    lp, lW = safe_log(p[on]), safe_log(W[on])
    log_norm = logsumexp(a * lp)
    log_inner = logsumexp(a * lp[:, None] + a * lW, axis=0) - log_norm
    return float(a / (a - 1.0) * logsumexp(log_inner / a))


def conditional_arimoto_mi_nats(tensor: np.ndarray, a: float) -> float:
    """H_a(X|Z) - H_a(X|Y,Z) for a tensor indexed (x, y, z)."""
    nx, ny, nz = tensor.shape
    h_xz = arimoto_cond_entropy_joint_nats(tensor.sum(axis=1), a)
    h_xyz = arimoto_cond_entropy_joint_nats(tensor.reshape(nx, ny * nz), a)
    return h_xz - h_xyz


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def renyi_entropy(p: Pmf, alpha, base=LogBase.BITS) -> MeasureValue:
    """Rényi entropy; Shannon at alpha = 1 and min-entropy at alpha = inf."""
    alpha = as_alpha(alpha)
    return _wrap(renyi_entropy_nats(p.probs, alpha.value), alpha, base)


def arimoto_cond_entropy(px: Pmf, ch: Channel, alpha, base=LogBase.BITS) -> MeasureValue:
    """Arimoto conditional entropy of X given the channel output."""
    alpha = as_alpha(alpha)
    p, W = _aligned(px, ch)
    return _wrap(arimoto_cond_entropy_joint_nats(p[:, None] * W, alpha.value), alpha, base)


def sibson_mi(px: Pmf, ch: Channel, alpha, base=LogBase.BITS) -> MeasureValue:
    """Sibson mutual information of order alpha.

    At alpha = inf the maximum over inputs runs only over ``supp(px)``.
    """
    alpha = as_alpha(alpha)
    p, W = _aligned(px, ch)
    return _wrap(sibson_mi_nats(p, W, alpha.value), alpha, base)


def arimoto_mi(px: Pmf, ch: Channel, alpha, base=LogBase.BITS) -> MeasureValue:
    """Arimoto mutual information, ``H_alpha(X) - H_alpha(X|Y)``."""
    alpha = as_alpha(alpha)
    p, W = _aligned(px, ch)
    return _wrap(arimoto_mi_nats(p, W, alpha.value), alpha, base)


def event_conditional_sibson_mi(j: Joint3, z: Hashable, alpha, base=LogBase.BITS) -> MeasureValue:
    """Sibson MI between X and Y computed on ``P(X, Y | Z = z)``.

    Raises :class:`~alphaleak.prob_core.ZeroProbabilityEventError` when
    ``P(Z = z) = 0``.
    """
    alpha = as_alpha(alpha)
    px_z, ch_z = condition_on_event(j, z).split()
    return _wrap(sibson_mi_nats(px_z.probs, ch_z.matrix, alpha.value), alpha, base)


def conditional_arimoto_mi(j: Joint3, alpha, base=LogBase.BITS) -> MeasureValue:
    """Conditional Arimoto MI, with the pair (Y, Z) as the conditioning variable
    of the second term. Equals I(X;Y|Z) at alpha = 1."""
    alpha = as_alpha(alpha)
    return _wrap(conditional_arimoto_mi_nats(j.tensor, alpha.value), alpha, base)


def alpha_loss(prob: float, alpha) -> float:
    """Loss incurred by assigning probability ``prob`` to the true outcome.

    Log-loss at alpha = 1 (``inf`` for ``prob = 0``), probability of error
    at alpha = inf. Returned in nats where a logarithm is involved.
    """
    alpha = as_alpha(alpha)
    _require_leakage_order(alpha, "alpha_loss")
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"prob must lie in [0, 1], got {prob}")
    if alpha.is_one:
        return math.inf if prob == 0 else -math.log(prob)
    if alpha.is_inf:
        return 1.0 - prob
    a = alpha.value
    return a / (a - 1.0) * (1.0 - prob ** ((a - 1.0) / a))


def _best_expected_gain(joint: np.ndarray, alpha: Alpha) -> float:
    """max over estimators q(.|w) of E[g(q(X|W))] for a 2-D joint P(x, w).

    The gain g is ``q ** ((a-1)/a)`` for finite a, ``log q`` at a = 1 and
    ``q`` at a = inf, so the optimizer is the tilted posterior
    ``q(x|w) ∝ P(x|w) ** a`` (the MAP guess at a = inf). The expectation is
    evaluated term by term against the original joint.
    """
    total = 0.0
    for col in joint.T:
        pw = col.sum()
        if pw <= 0:
            continue
        post = col / pw
        if alpha.is_inf:
            q = np.zeros_like(post)
            q[int(np.argmax(post))] = 1.0
            total += float(np.dot(col, q))
            continue
        a = alpha.value
        log_q = a * safe_log(post)
        log_q = log_q - logsumexp(log_q)
        on = col > 0
        if alpha.is_one:
            total += float(np.dot(col[on], log_q[on]))
        else:
            total += float(np.dot(col[on], np.exp((a - 1.0) / a * log_q[on])))
    return total


def conditional_alpha_leakage_by_definition(j: Joint3, alpha, base=LogBase.BITS) -> MeasureValue:
    """Conditional alpha-leakage from X to Y given Z, evaluated from its
    operational definition: the optimal-estimator gain with (Y, Z) observed,
    relative to the optimal gain with only Z observed.

    Serves as an independent route to :func:`conditional_arimoto_mi`.
    """
    alpha = as_alpha(alpha)
    _require_leakage_order(alpha, "conditional alpha-leakage")
    nx, ny, nz = j.shape
    num = _best_expected_gain(j.tensor.reshape(nx, ny * nz), alpha)
    den = _best_expected_gain(j.tensor.sum(axis=1), alpha)
    if alpha.is_one:
        nats = num - den
    elif alpha.is_inf:
        nats = math.log(num / den)
    else:
        a = alpha.value
        nats = a / (a - 1.0) * math.log(num / den)
    return _wrap(nats, alpha, base)
