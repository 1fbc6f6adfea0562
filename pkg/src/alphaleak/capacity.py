"""Maximal alpha-leakage as a support-constrained capacity problem.

For 1 < alpha < inf the leakage is the supremum of Sibson MI over input
distributions supported inside ``supp(P_X)``. The objective

    f(P) = a/(a-1) * log sum_y (sum_x P(x) W(y|x)^a)^(1/a)

is concave on the simplex, so we maximize it with pairwise Frank-Wolfe
steps (move mass from the worst active vertex to the best vertex, exact
line search on the segment). The Frank-Wolfe gap max_x <grad f, e_x - P>
upper-bounds f* - f(P) and is returned as the optimality certificate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np
from scipy.optimize import brentq

from ._logspace import logsumexp, safe_log
from .measures import (
    MeasureValue,
    _aligned,
    _wrap,
    conditional_arimoto_mi_nats,
    shannon_mi_nats,
)
from .prob_core import (
    AlphaDomainError,
    Channel,
    Joint3,
    LogBase,
    Pmf,
    ValidationError,
    as_alpha,
    condition_on_event,
)

DEFAULT_TOL = 1e-8
MAX_ITER = 100_000
MAX_ORACLE_SUPPORT = 4
MIN_ORACLE_RESOLUTION = 50


class Method(enum.Enum):
    SOLVER = "solver"
    CLOSED_FORM = "closed_form"
    GRID_ORACLE = "grid_oracle"


class ConvergenceError(RuntimeError):
    """The solver hit its iteration cap or stalled above the tolerance."""

    def __init__(self, message, *, iterations, gap, value, argmax=None):
        super().__init__(message)
        self.iterations = iterations
        self.gap = gap
        self.value = value
        self.argmax = argmax


@dataclass(frozen=True)
class CapacityResult:
    value: MeasureValue
    argmax_input: Pmf
    certificate_gap: float = 0.0
    iterations: int = 0
    method: Method = Method.CLOSED_FORM


@dataclass(frozen=True)
class CondCapacityResult:
    value: MeasureValue
    argmax_z: Hashable | None = None
    per_z: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Objective and gradient (nats, unconstrained in P)
# ---------------------------------------------------------------------------


def _log_mass(p, lW, a):
    """log A_y = log sum_x P(x) W(y|x)^a for every output y."""
    return logsumexp(safe_log(p)[:, None] + a * lW, axis=0)


def _log_grad_scaled(la, lW, a):
    """L_x = log((a-1) * df/dP(x)); finite-a Sibson objective."""
    log_f = logsumexp(la / a)
    live = np.isfinite(la)
    # Columns with A_y = 0: infinite slope for any x that can reach y, no
    # contribution otherwise.
    with np.errstate(invalid="ignore"):
        terms = np.where(live, (1.0 / a - 1.0) * la - log_f, np.inf) + a * lW
    terms = np.where(np.isnan(terms) | (lW == -np.inf), -np.inf, terms)
    return logsumexp(terms, axis=1), log_f


def sibson_objective(p, W, alpha) -> float:
    """Sibson MI in nats as a function of an (unnormalized) input weight vector."""
    a = float(alpha)
    la = _log_mass(np.asarray(p, dtype=float), safe_log(W), a)
    return float(a / (a - 1.0) * logsumexp(la / a))


def sibson_gradient(p, W, alpha) -> np.ndarray:
    """Analytic gradient of :func:`sibson_objective` with respect to ``p``."""
    a = float(alpha)
    lW = safe_log(W)
    la = _log_mass(np.asarray(p, dtype=float), lW, a)
    L, _ = _log_grad_scaled(la, lW, a)
    return np.exp(L) / (a - 1.0)


def _lse(X, axis):
    """Lean log-sum-exp for the solver's inner loop; caller silences fp warnings."""
    m = X.max(axis=axis, keepdims=True)
    m = np.where(m > -np.inf, m, 0.0)
    return np.squeeze(m + np.log(np.exp(X - m).sum(axis=axis, keepdims=True)), axis=axis)


def _pairwise_fw(W: np.ndarray, a: float, tol_nats: float, max_iter: int):
    """Maximize the finite-order Sibson objective over the full simplex of rows of W."""
    k = W.shape[0]
    lW = safe_log(W)
    # Outputs no input can reach never matter.
    aW = a * lW[:, np.isfinite(lW).any(axis=0)]
    c = 1.0 / a - 1.0
    p = np.full(k, 1.0 / k)
    gap = math.inf

    def grad_rows(q, rows):
        la = _lse(np.log(q)[:, None] + aW, 0)
        log_f = _lse(la / a, 0)
        terms = np.where(np.isfinite(la), c * la - log_f, np.inf) + aW[rows]
        terms[np.isnan(terms)] = -np.inf
        return _lse(terms, 1), log_f

    def pair_slope(t, i, j):
        q = p.copy()
        q[i] += t
        q[j] = max(q[j] - t, 0.0)
        L, _ = grad_rows(q, [i, j])
        return L[0] - L[1]

    everything = np.arange(k)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for it in range(max_iter + 1):
            L, log_f = grad_rows(p, everything)
            i = int(np.argmax(L))
            gap = max(float(np.expm1(L[i])) / (a - 1.0), 0.0)
            if gap <= tol_nats:
                return p, a / (a - 1.0) * log_f, gap, it
            if it == max_iter:
                break
            active = np.flatnonzero(p > 0)
            j = int(active[np.argmin(L[active])])
            if i == j:
                break
            t_max = p[j]
            if pair_slope(t_max, i, j) >= 0:
                t = t_max
            else:
                t = brentq(pair_slope, 0.0, t_max, args=(i, j), xtol=1e-12 * t_max, maxiter=500)
            if t <= 0:
                break
            p = p.copy()
            p[i] += t
            p[j] = 0.0 if t == t_max else p[j] - t
            p /= p.sum()
        value = a / (a - 1.0) * grad_rows(p, [0])[1]
    raise ConvergenceError(
        f"Frank-Wolfe stopped after {it} iterations with gap {gap:.3g} > tol {tol_nats:.3g} nats",
        iterations=it,
        gap=gap,
        value=value,
        argmax=p,
    )


def _support_indices(px: Pmf) -> np.ndarray:
    return np.flatnonzero(px.probs > 0)


def _embed(px: Pmf, idx: np.ndarray, weights: np.ndarray) -> Pmf:
    full = np.zeros(len(px))
    full[idx] = weights
    return Pmf(px.labels, full)


def maximal_alpha_leakage(px: Pmf, ch: Channel, alpha, base=LogBase.BITS, tol=DEFAULT_TOL,
                          max_iter=MAX_ITER) -> CapacityResult:
    """Maximal alpha-leakage from X to Y for the channel ``ch``.

    ``px`` only matters through its support for alpha > 1; at alpha = 1 the
    leakage is I(X;Y) at ``px`` itself. ``tol`` is in units of ``base``.
    """
    alpha = as_alpha(alpha)
    base = LogBase.parse(base)
    if alpha.value < 1:
        raise AlphaDomainError(f"maximal alpha-leakage needs alpha >= 1, got {alpha}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p, W = _aligned(px, ch)
    idx = _support_indices(px)
    Ws = W[idx]
    if alpha.is_one:
        return CapacityResult(_wrap(shannon_mi_nats(p, W), alpha, base), px)
    uniform = np.full(len(idx), 1.0 / len(idx))
    if alpha.is_inf:
        nats = math.log(np.sum(Ws.max(axis=0)))
        return CapacityResult(_wrap(nats, alpha, base), _embed(px, idx, uniform))
    if len(idx) == 1:
        return CapacityResult(_wrap(0.0, alpha, base), _embed(px, idx, uniform))
    q, nats, gap, iters = _pairwise_fw(Ws, alpha.value, base.to_nats(tol), max_iter)
    return CapacityResult(
        _wrap(nats, alpha, base),
        _embed(px, idx, q),
        certificate_gap=base.from_nats(gap),
        iterations=iters,
        method=Method.SOLVER,
    )


def conditional_maximal_alpha_leakage(j: Joint3, alpha, base=LogBase.BITS,
                                      tol=DEFAULT_TOL, max_iter=MAX_ITER) -> CondCapacityResult:
    """Conditional maximal alpha-leakage from X to Y given side information Z.

    At alpha = 1 this is I(X;Y|Z) with no per-z breakdown. Above 1 it is the
    largest support-restricted capacity among the channels P(Y | X, Z=z),
    z in supp(Z); ties go to the first z in label order.
    """
    alpha = as_alpha(alpha)
    base = LogBase.parse(base)
    if alpha.value < 1:
        raise AlphaDomainError(f"conditional maximal alpha-leakage needs alpha >= 1, got {alpha}")
    if alpha.is_one:
        return CondCapacityResult(_wrap(conditional_arimoto_mi_nats(j.tensor, 1.0), alpha, base))
    pz = j.tensor.sum(axis=(0, 1))
    per_z = {}
    best_z, best = None, -math.inf
    for z, mass in zip(j.z_labels, pz):
        if mass <= 0:
            continue
        px_z, ch_z = condition_on_event(j, z).split()
        res = maximal_alpha_leakage(px_z, ch_z, alpha, base, tol, max_iter)
        per_z[z] = res
        if res.value.value > best:
            best_z, best = z, res.value.value
    return CondCapacityResult(per_z[best_z].value, best_z, per_z)


def shannon_capacity(ch: Channel, support: Iterable[Hashable] | None = None,
                     base=LogBase.BITS, tol=1e-12, max_iter=MAX_ITER) -> CapacityResult:
    """Blahut-Arimoto capacity over inputs supported in ``support``."""
    base = LogBase.parse(base)
    labels = list(ch.input_labels if support is None else support)
    W = ch.rows_for(labels)
    lW = safe_log(W)
    p = np.full(len(labels), 1.0 / len(labels))
    tol_nats = base.to_nats(tol)
    for it in range(max_iter):
        q = p @ W
        # D(W_x || q) per input, with 0 log 0 = 0
        d = np.sum(np.where(W > 0, W * (lW - safe_log(q)[None, :]), 0.0), axis=1)
        lower = float(p @ d)
        upper = float(d.max())
        if upper - lower <= tol_nats:
            break
        p = p * np.exp(d - d.max())
        p /= p.sum()
    return CapacityResult(
        _wrap(lower, as_alpha(1), base),
        Pmf(labels, p),
        certificate_gap=base.from_nats(upper - lower),
        iterations=it,
        method=Method.SOLVER,
    )


# ---------------------------------------------------------------------------
# Grid oracle
# ---------------------------------------------------------------------------


def _compositions(k: int, n: int):
    """Yield arrays whose rows enumerate all k-part compositions of n."""
    if k == 1:
        yield np.array([[n]])
    elif k == 2:
        i = np.arange(n + 1)
        yield np.stack([i, n - i], axis=1)
    elif k == 3:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        i, j = i[keep], j[keep]
        yield np.stack([i, j, n - i - j], axis=1)
    else:
        for first in range(n + 1):
            for rest in _compositions(k - 1, n - first):
                yield np.hstack([np.full((len(rest), 1), first), rest])


def _grid_values(P: np.ndarray, W: np.ndarray, a: float, objective: str) -> np.ndarray:
    """Vectorized Sibson or Arimoto MI (nats) at every row of P."""
    lP = safe_log(P)
    if objective == "arimoto" and a != 1.0:
        if math.isinf(a):
            joint_max = np.max(P[:, :, None] * W[None], axis=1)
            return np.log(joint_max.sum(axis=1)) - np.log(P.max(axis=1))
        lP = a * lP - logsumexp(a * lP, axis=1)[:, None]
    if a == 1.0:
        joint = P[:, :, None] * W[None]
        q = joint.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(joint > 0, np.log(joint) - safe_log(P)[:, :, None] - safe_log(q)[:, None, :], 0.0)
        return np.sum(np.where(joint > 0, joint * ratio, 0.0), axis=(1, 2))
    if math.isinf(a):
        masked = np.where(P[:, :, None] > 0, W[None], 0.0)
        return np.log(masked.max(axis=1).sum(axis=1))
    la = logsumexp(lP[:, :, None] + a * safe_log(W)[None], axis=1)
    return a / (a - 1.0) * logsumexp(la / a, axis=1)


def _grid_max(px_support, ch: Channel, alpha, resolution: int, objective: str):
    labels = list(px_support)
    if not labels:
        raise ValidationError("grid oracle: empty support")
    if len(labels) > MAX_ORACLE_SUPPORT:
        raise ValidationError(
            f"grid oracle handles at most {MAX_ORACLE_SUPPORT} support points, got {len(labels)}"
        )
    if resolution < MIN_ORACLE_RESOLUTION:
        raise ValidationError(f"grid oracle resolution must be >= {MIN_ORACLE_RESOLUTION}")
    W = ch.rows_for(labels)
    best, best_p = -math.inf, None
    for chunk in _compositions(len(labels), resolution):
        P = chunk / resolution
        vals = _grid_values(P, W, alpha.value, objective)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_p = float(vals[i]), P[i]
    return labels, best, best_p


def grid_oracle_capacity(px_support, ch: Channel, alpha, base=LogBase.BITS,
                         resolution: int = 200) -> CapacityResult:
    """Brute-force maximum of Sibson MI over the lattice {k / resolution}."""
    alpha = as_alpha(alpha)
    base = LogBase.parse(base)
    labels, best, best_p = _grid_max(px_support, ch, alpha, resolution, "sibson")
    full = np.zeros(len(ch.input_labels))
    for lab, w in zip(labels, best_p):
        full[ch.input_labels.index(lab)] = w
    return CapacityResult(
        _wrap(best, alpha, base),
        Pmf(ch.input_labels, full),
        method=Method.GRID_ORACLE,
        iterations=0,
    )


@dataclass(frozen=True)
class SupEqualityReport:
    sibson_max: MeasureValue
    arimoto_max: MeasureValue

    @property
    def difference(self) -> float:
        return self.sibson_max.value - self.arimoto_max.value


def sup_equality_check(px_support, ch: Channel, alpha, base=LogBase.BITS,
                       resolution: int = 200) -> SupEqualityReport:
    """Grid-maximize Sibson and Arimoto MI separately over the same support."""
    alpha = as_alpha(alpha)
    base = LogBase.parse(base)
    _, s, _ = _grid_max(px_support, ch, alpha, resolution, "sibson")
    _, r, _ = _grid_max(px_support, ch, alpha, resolution, "arimoto")
    return SupEqualityReport(_wrap(s, alpha, base), _wrap(r, alpha, base))


__all__ = [
    "CapacityResult",
    "CondCapacityResult",
    "ConvergenceError",
    "Method",
    "SupEqualityReport",
    "conditional_maximal_alpha_leakage",
    "grid_oracle_capacity",
    "maximal_alpha_leakage",
    "shannon_capacity",
    "sibson_gradient",
    "sibson_objective",
    "sup_equality_check",
]
