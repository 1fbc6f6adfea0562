"""Executable checks of the side-information results on fixed and random instances.

Randomized verifiers draw every Pmf and channel row uniformly from the
simplex. Each trial gets its own generator spawned from the configured
seed, so a report depends only on its :class:`TrialConfig`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from ._logspace import logsumexp, safe_log
from .capacity import (
    DEFAULT_TOL,
    ConvergenceError,
    conditional_maximal_alpha_leakage,
    maximal_alpha_leakage,
)
from .measures import (
    MeasureValue,
    _wrap,
    conditional_alpha_leakage_by_definition,
    conditional_arimoto_mi,
    conditional_arimoto_mi_nats,
    sibson_mi,
)
from .prob_core import (
    Alpha,
    AlphaDomainError,
    Channel,
    Joint2,
    Joint3,
    LabelMismatchError,
    LogBase,
    Pmf,
    ValidationError,
    as_alpha,
    marginalize,
)

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Configuration and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialConfig:
    x_size: int = 2
    y_size: int = 2
    z_size: int = 2
    alphas: tuple = (1, 1.5, 2, 5, math.inf)
    trials: int = 1000
    seed: int = 0
    tol: float = 1e-7

    def __post_init__(self):
        if min(self.x_size, self.y_size, self.z_size) < 1:
            raise ValidationError("alphabet sizes must be >= 1")
        if self.trials < 1:
            raise ValidationError("trial count must be >= 1")
        if self.tol <= 0:
            raise ValidationError("tolerance must be positive")
        object.__setattr__(self, "alphas", tuple(as_alpha(a) for a in self.alphas))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    alpha: Alpha
    lhs: float
    rhs: float
    violated: bool


@dataclass
class TrialReport:
    """Outcome of a verifier run.

    ``relation`` is the claim being checked between ``lhs`` and ``rhs``:
    ``"<="`` is violated when lhs > rhs + tol, ``"<"`` when lhs >= rhs - tol,
    and ``"=="`` when |lhs - rhs| > tol.
    """

    suite: str
    relation: str
    seed: int | None
    tolerance: float
    base: LogBase = LogBase.BITS
    experimental: bool = False
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def add(self, trial: int, alpha: Alpha, lhs: float, rhs: float) -> None:
        self.records.append(TrialRecord(trial, alpha, lhs, rhs, _violates(self.relation, lhs, rhs, self.tolerance)))

    @property
    def trials(self) -> int:
        return len({r.trial for r in self.records} | {f["trial"] for f in self.failures})

    @property
    def alphas(self) -> list[str]:
        seen = []
        for r in self.records:
            if str(r.alpha) not in seen:
                seen.append(str(r.alpha))
        return seen

    @property
    def violations(self) -> int:
        return sum(r.violated for r in self.records)

    @property
    def max_violation(self) -> float:
        """Largest amount by which a record breaks its relation (0 if none)."""
        worst = 0.0
        for r in self.records:
            if r.violated:
                excess = abs(r.lhs - r.rhs) if self.relation == "==" else r.lhs - r.rhs
                worst = max(worst, excess)
        return worst

    @property
    def max_excess(self) -> float:
        """max(lhs - rhs) over all records, violated or not."""
        if not self.records:
            return 0.0
        return max(r.lhs - r.rhs for r in self.records)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and not self.failures

    def to_dict(self, per_trial: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "relation": self.relation,
            "experimental": self.experimental,
            "trials": self.trials,
            "alpha": self.alphas,
            "violations": self.violations,
            "max_violation": self.max_violation,
            "max_excess": self.max_excess,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "base": self.base.value,
            "failures": list(self.failures),
        }
        if per_trial:
            out["per_trial"] = [
                {"trial": r.trial, "alpha": str(r.alpha), "lhs": r.lhs, "rhs": r.rhs, "violated": r.violated}
                for r in self.records
            ]
        return out


def _violates(relation: str, lhs: float, rhs: float, tol: float) -> bool:
    if relation == "<=":
        return lhs > rhs + tol
    if relation == "<":
        return lhs >= rhs - tol
    if relation == "==":
        return abs(lhs - rhs) > tol
    raise ValueError(f"unknown relation {relation!r}")


def _trial_rngs(seed: int, trials: int):
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        yield i, np.random.default_rng(child)


def _run_trials(report: TrialReport, cfg: TrialConfig, body: Callable) -> TrialReport:
    """Call ``body(rng, alpha) -> (lhs, rhs)`` for every trial and order."""
    for i, rng in _trial_rngs(cfg.seed, cfg.trials):
        instance = body(rng)
        for alpha in cfg.alphas:
            try:
                lhs, rhs = instance(alpha)
            except ConvergenceError as exc:
                report.failures.append({"trial": i, "alpha": str(alpha), "error": str(exc)})
                continue
            report.add(i, alpha, lhs, rhs)
    return report


# ---------------------------------------------------------------------------
# Instance builders
# ---------------------------------------------------------------------------


def _labels(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


def random_pmf(rng: np.random.Generator, labels: Sequence[Hashable]) -> Pmf:
    return Pmf(labels, rng.dirichlet(np.ones(len(labels))))


def random_channel(rng: np.random.Generator, ins: Sequence[Hashable], outs: Sequence[Hashable]) -> Channel:
    return Channel(ins, outs, rng.dirichlet(np.ones(len(outs)), size=len(ins)))


def random_joint3(rng: np.random.Generator, nx: int, ny: int, nz: int) -> Joint3:
    t = rng.dirichlet(np.ones(nx * ny * nz)).reshape(nx, ny, nz)
    return Joint3(_labels("x", nx), _labels("y", ny), _labels("z", nz), t)


def make_markov_joint(px: Pmf, ch_yx: Channel, ch_zx: Channel) -> Joint3:
    """P(x, y, z) = P(x) P(y|x) P(z|x), so that Z - X - Y holds."""
    W = ch_yx.rows_for(px.labels)
    V = ch_zx.rows_for(px.labels)
    if set(ch_yx.input_labels) != set(px.labels) or set(ch_zx.input_labels) != set(px.labels):
        raise LabelMismatchError("channel inputs must match the X alphabet")
    t = px.probs[:, None, None] * W[:, :, None] * V[:, None, :]
    return Joint3(px.labels, ch_yx.output_labels, ch_zx.output_labels, t)


def bsc(p: float, labels=(0, 1), out_labels=None) -> Channel:
    out_labels = labels if out_labels is None else out_labels
    return Channel(labels, out_labels, [[1 - p, p], [p, 1 - p]])


def markov_bsc_joint(p: float, q: float) -> Joint3:
    """Uniform binary X; Y = BSC(p) of X; Z = BSC(q) of X."""
    return make_markov_joint(Pmf.uniform([0, 1]), bsc(p), bsc(q))


def xor_side_info_joint(p: float) -> Joint3:
    """Z ~ Ber(p) independent of uniform X; Y = X when Z = 0, flipped when Z = 1."""
    t = np.zeros((2, 2, 2))
    for x in (0, 1):
        for z, pz in ((0, 1 - p), (1, p)):
            t[x, x ^ z, z] = 0.5 * pz
    return Joint3([0, 1], [0, 1], [0, 1], t)


def _xy_split(j: Joint3) -> tuple[Pmf, Channel]:
    return marginalize(j, "XY").split()


# ---------------------------------------------------------------------------
# Closed forms for the binary symmetric examples (nats)
# ---------------------------------------------------------------------------


def binary_entropy_nats(p: float) -> float:
    return -sum(v * math.log(v) for v in (p, 1 - p) if v > 0)


def bsc_leakage_nats(p: float, alpha) -> float:
    """Maximal alpha-leakage of BSC(p) with uniform input."""
    alpha = as_alpha(alpha)
    if alpha.is_one:
        return LN2 - binary_entropy_nats(p)
    if alpha.is_inf:
        return LN2 + math.log(max(p, 1 - p))
    a = alpha.value
    return LN2 + logsumexp(a * safe_log([p, 1 - p])) / (a - 1.0)


def markov_bsc_conditional_nats(p: float, q: float, alpha) -> float:
    """Conditional maximal alpha-leakage of the BSC(p)/BSC(q) Markov example."""
    alpha = as_alpha(alpha)
    if q == 0:
        return 0.0
    if alpha.is_one:
        return binary_entropy_nats(p + q - 2 * p * q) - binary_entropy_nats(p)
    return bsc_leakage_nats(p, alpha)


@dataclass(frozen=True)
class BscRow:
    alpha: Alpha
    unconditional_closed: float
    unconditional_solver: float
    conditional_closed: float
    conditional_solver: float

    @property
    def max_abs_diff(self) -> float:
        return max(
            abs(self.unconditional_closed - self.unconditional_solver),
            abs(self.conditional_closed - self.conditional_solver),
        )


def bsc_closed_forms(p: float, q: float, alpha_grid, base=LogBase.BITS, tol=DEFAULT_TOL) -> list[BscRow]:
    """Closed-form versus solver values for the BSC(p)/BSC(q) example."""
    if not 0 < p < 0.5:
        raise ValidationError(f"crossover p must lie in (0, 0.5), got {p}")
    if not 0 <= q <= 0.5:
        raise ValidationError(f"crossover q must lie in [0, 0.5], got {q}")
    base = LogBase.parse(base)
    j = markov_bsc_joint(p, q)
    px, ch = _xy_split(j)
    rows = []
    for alpha in map(as_alpha, alpha_grid):
        rows.append(BscRow(
            alpha,
            base.from_nats(bsc_leakage_nats(p, alpha)),
            maximal_alpha_leakage(px, ch, alpha, base, tol).value.value,
            base.from_nats(markov_bsc_conditional_nats(p, q, alpha)),
            conditional_maximal_alpha_leakage(j, alpha, base, tol).value.value,
        ))
    return rows


def verify_bsc(p: float = 0.25, q: float = 0.25, alphas=(1, 1.5, 2, 5, 20, math.inf),
               tol: float = 1e-6, base=LogBase.BITS) -> TrialReport:
    """Closed form versus solver on the binary example. Record 0 is unconditional, 1 conditional."""
    report = TrialReport("bsc", "==", None, tol, LogBase.parse(base))
    for row in bsc_closed_forms(p, q, alphas, base):
        report.add(0, row.alpha, row.unconditional_solver, row.unconditional_closed)
        report.add(1, row.alpha, row.conditional_solver, row.conditional_closed)
    return report


# ---------------------------------------------------------------------------
# Randomized verifiers
# ---------------------------------------------------------------------------


def verify_robustness_theorem(cfg: TrialConfig, base=LogBase.BITS) -> TrialReport:
    """Side information independent of Y given X never increases the leakage."""
    report = TrialReport("robustness", "<=", cfg.seed, cfg.tol, LogBase.parse(base))
    xs, ys, zs = _labels("x", cfg.x_size), _labels("y", cfg.y_size), _labels("z", cfg.z_size)

    def body(rng):
        px = random_pmf(rng, xs)
        ch_yx = random_channel(rng, xs, ys)
        j = make_markov_joint(px, ch_yx, random_channel(rng, xs, zs))
        return lambda a: (
            conditional_maximal_alpha_leakage(j, a, base).value.value,
            maximal_alpha_leakage(px, ch_yx, a, base).value.value,
        )

    return _run_trials(report, cfg, body)


def verify_conditional_leakage_identity(cfg: TrialConfig, base=LogBase.BITS) -> TrialReport:
    """Operational conditional alpha-leakage equals conditional Arimoto MI."""
    report = TrialReport("thm1", "==", cfg.seed, cfg.tol, LogBase.parse(base))

    def body(rng):
        j = random_joint3(rng, cfg.x_size, cfg.y_size, cfg.z_size)
        return lambda a: (
            conditional_alpha_leakage_by_definition(j, a, base).value,
            conditional_arimoto_mi(j, a, base).value,
        )

    return _run_trials(report, cfg, body)


def verify_sibson_dpi(cfg: TrialConfig, base=LogBase.BITS) -> TrialReport:
    """Post-processing Y into W cannot increase Sibson MI. |W| is ``cfg.z_size``."""
    report = TrialReport("dpi", "<=", cfg.seed, cfg.tol, LogBase.parse(base))
    xs, ys, ws = _labels("x", cfg.x_size), _labels("y", cfg.y_size), _labels("w", cfg.z_size)

    def body(rng):
        px = random_pmf(rng, xs)
        ch_yx = random_channel(rng, xs, ys)
        ch_wy = random_channel(rng, ys, ws)
        ch_wx = Channel(xs, ws, ch_yx.matrix @ ch_wy.matrix)
        return lambda a: (
            sibson_mi(px, ch_wx, a, base).value,
            sibson_mi(px, ch_yx, a, base).value,
        )

    return _run_trials(report, cfg, body)


def composition_terms(j: Joint3, alpha, base=LogBase.BITS, tol=DEFAULT_TOL) -> tuple[float, float]:
    """(leakage X -> (Y,Z), leakage X -> Y + conditional leakage X -> Z given Y)."""
    nx, ny, nz = j.shape
    pair_labels = [(y, z) for y in j.y_labels for z in j.z_labels]
    joint_pair = Joint2(j.x_labels, pair_labels, j.tensor.reshape(nx, ny * nz))
    px, ch_pair = joint_pair.split()
    lhs = maximal_alpha_leakage(px, ch_pair, alpha, base, tol).value.value
    px_y, ch_y = _xy_split(j)
    rhs = (maximal_alpha_leakage(px_y, ch_y, alpha, base, tol).value.value
           + conditional_maximal_alpha_leakage(j.permuted("XZY"), alpha, base, tol).value.value)
    return lhs, rhs


def verify_composition_conjecture(cfg: TrialConfig, base=LogBase.BITS) -> TrialReport:
    """Experimental: count instances where the conjectured composition bound fails.

    Never asserts. A nonzero violation count is a finding about the
    conjecture, not a defect in this code.
    """
    report = TrialReport("composition", "<=", cfg.seed, cfg.tol, LogBase.parse(base), experimental=True)

    def body(rng):
        j = random_joint3(rng, cfg.x_size, cfg.y_size, cfg.z_size)
        return lambda a: composition_terms(j, a, base)

    return _run_trials(report, cfg, body)


def verify_counterexample_nonmarkov(p_grid=(0.1, 0.2, 0.25, 0.3, 0.4, 0.45),
                                    alphas=(1, 1.5, 2, 5, 20, math.inf),
                                    base=LogBase.BITS, tol: float = 1e-9) -> TrialReport:
    """Side information that drives the channel can increase leakage.

    Records compare the unconditional leakage (lhs) against the conditional
    leakage (rhs); the claim checked is lhs < rhs strictly.
    """
    report = TrialReport("counterexample", "<", None, tol, LogBase.parse(base))
    for i, p in enumerate(p_grid):
        j = xor_side_info_joint(p)
        px, ch = _xy_split(j)
        for alpha in map(as_alpha, alphas):
            uncond = maximal_alpha_leakage(px, ch, alpha, base).value.value
            cond = conditional_maximal_alpha_leakage(j, alpha, base).value.value
            report.add(i, alpha, uncond, cond)
    return report


# ---------------------------------------------------------------------------
# Constructive lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessConfig:
    """Cardinalities of the blocks making up the auxiliary variable's alphabet."""

    u0_size: int
    per_x_sizes: dict
    target_input: Pmf | None = None

    def __post_init__(self):
        if self.u0_size < 1 or any(int(n) < 1 for n in self.per_x_sizes.values()):
            raise ValidationError("witness block sizes must be >= 1")


@dataclass(frozen=True)
class WitnessBound:
    value: MeasureValue
    direct: MeasureValue | None
    z_star: Hashable
    induced_input: Pmf


def _z_star(j: Joint3, alpha: Alpha) -> Hashable:
    return conditional_maximal_alpha_leakage(j, alpha).argmax_z


def witness_config(j: Joint3, alpha, u0_size: int, target_input: Pmf | None = None,
                   min_size: int = 1, max_size: int = 10**12) -> WitnessConfig:
    """Pick block sizes whose induced input approximates ``target_input``.

    Sizes are the rounding of C * (P(x, z*)^a / target(x))^(1/(a-1)), with C
    the smallest scale that makes every size at least ``min_size``. Without
    a target, the solver's optimal input at z* is used.
    """
    alpha = as_alpha(alpha)
    if not alpha.is_finite or alpha.value <= 1:
        raise AlphaDomainError("the witness construction needs a finite alpha > 1")
    a = alpha.value
    res = conditional_maximal_alpha_leakage(j, alpha)
    z_star = res.argmax_z
    k = j.z_labels.index(z_star)
    pxz = j.tensor.sum(axis=1)[:, k]
    xs = [x for x, v in zip(j.x_labels, pxz) if v > 0]
    if target_input is None:
        target_input = res.per_z[z_star].argmax_input
    t = np.array([target_input[x] if x in target_input.labels else 0.0 for x in xs])
    log_raw = (a * np.log(pxz[pxz > 0]) - safe_log(t)) / (a - 1.0)
    log_scale = max(math.log(min_size) - float(log_raw.min()), 0.0)
    log_sizes = np.minimum(log_raw + log_scale, math.log(max_size))
    sizes = np.maximum(np.rint(np.exp(log_sizes)), 1).astype(np.int64)
    return WitnessConfig(int(u0_size), {x: int(n) for x, n in zip(xs, sizes)}, target_input)


def _witness_tensor(j: Joint3, z_star, w: WitnessConfig, xs) -> np.ndarray:
    """Explicit joint over (U, Y, Z) for the block construction."""
    nx, ny, nz = j.shape
    k = j.z_labels.index(z_star)
    blocks = [int(w.per_x_sizes[x]) for x in xs]
    nu = w.u0_size + sum(blocks)
    t = np.zeros((nu, ny, nz))
    pyz = j.tensor.sum(axis=0)
    others = [c for c in range(nz) if c != k]
    t[: w.u0_size, :, others] = pyz[None, :, others] / w.u0_size
    start = w.u0_size
    for x, n in zip(xs, blocks):
        t[start:start + n, :, k] = j.tensor[j.x_labels.index(x), :, k][None, :] / n
        start += n
    return t


def appendix_witness_lower_bound(j: Joint3, alpha, w: WitnessConfig, base=LogBase.BITS,
                                 cross_check: bool | None = None,
                                 direct_limit: int = 20_000_000) -> WitnessBound:
    """Conditional Arimoto MI of the auxiliary variable built from block sizes ``w``.

    Outside z*, U is uniform on a shared block of size ``u0_size``; at z*,
    each x in the conditional support gets its own uniform block. The
    value is computed from the simplified numerator/denominator sums and,
    when the explicit joint is small enough (or ``cross_check`` forces it),
    also directly from the explicit (U, Y, Z) joint.
    """
    alpha = as_alpha(alpha)
    base = LogBase.parse(base)
    if not alpha.is_finite or alpha.value <= 1:
        raise AlphaDomainError("the witness construction needs a finite alpha > 1")
    a = alpha.value
    z_star = _z_star(j, alpha)
    k = j.z_labels.index(z_star)
    pxz = j.tensor.sum(axis=1)[:, k]
    xs = [x for x, v in zip(j.x_labels, pxz) if v > 0]
    if set(w.per_x_sizes) != set(xs):
        raise LabelMismatchError(f"per_x_sizes keys must be the support of X given Z={z_star!r}: {xs}")
    rows = [j.x_labels.index(x) for x in xs]
    log_n = np.log(np.array([float(w.per_x_sizes[x]) for x in xs]))
    slab = j.tensor[rows, :, k]
    pz_star = float(pxz.sum())
    rest = 1.0 - pz_star

    # sum_y (sum_x |U_x|^(1-a) P(x,y,z*)^a)^(1/a), and the Z-only analogue
    log_num_star = logsumexp(logsumexp((1 - a) * log_n[:, None] + a * safe_log(slab), axis=0) / a)
    log_den_star = logsumexp((1 - a) * log_n + a * np.log(pxz[rows])) / a
    if rest > 0:
        log_shared = math.log(rest) + (1.0 / a - 1.0) * math.log(w.u0_size)
        log_num = np.logaddexp(log_shared, log_num_star)
        log_den = np.logaddexp(log_shared, log_den_star)
    else:
        log_num, log_den = log_num_star, log_den_star
    value = _wrap(a / (a - 1.0) * float(log_num - log_den), alpha, base)

    weights = (1 - a) * log_n + a * np.log(pxz[rows])
    induced = np.zeros(len(j.x_labels))
    induced[rows] = np.exp(weights - logsumexp(weights))

    size = (w.u0_size + sum(w.per_x_sizes.values())) * j.shape[1] * j.shape[2]
    if cross_check is None:
        cross_check = size <= direct_limit
    direct = None
    if cross_check:
        direct = _wrap(conditional_arimoto_mi_nats(_witness_tensor(j, z_star, w, xs), a), alpha, base)
    return WitnessBound(value, direct, z_star, Pmf(j.x_labels, induced))


def verify_witness(p: float = 0.25, q: float = 0.25, alpha=2, u0_sizes=(10**2, 10**4, 10**6),
                   base=LogBase.BITS, tol: float = DEFAULT_TOL) -> TrialReport:
    """Lower bound from the block construction versus the conditional leakage.

    One record per shared-block size; the bound must not exceed the
    leakage by more than the solver tolerance.
    """
    base = LogBase.parse(base)
    j = markov_bsc_joint(p, q)
    target = conditional_maximal_alpha_leakage(j, alpha, base, tol).value.value
    report = TrialReport("witness", "<=", None, tol, base)
    for i, u0 in enumerate(u0_sizes):
        w = witness_config(j, alpha, u0)
        report.add(i, as_alpha(alpha), appendix_witness_lower_bound(j, alpha, w, base).value.value, target)
    return report
