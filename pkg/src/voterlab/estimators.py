"""Estimators built on the coalescing dual representation.

Persistence probabilities come from the identity P(origin holds opinion
1 throughout [0, t]) = E[rho^(number of distinct dual lineages)]; tail
probabilities P(T_t >= alpha t) use conditional Monte Carlo: given the
lineage masses of a dual sample, the inner probability over independent
Bernoulli(rho) lineage marks is computed exactly by subset enumeration
when the lineage count is small and by mark resampling otherwise.

Scaling fits regress -log p against log t or log^2 t with delta-method
weights, which is how the decay-rate order (log vs log^2) is
discriminated; the fitted slopes are reported with standard errors, as
no ground-truth constants exist.
"""

import math
import warnings
from dataclasses import dataclass
from typing import List

import numpy as np

from .dual_coalescer import DualBatch, sample_batch
from .lattice_walks import ProbEstimate
from .streams import as_generator, generator, replica_keys

__all__ = [
    "PersistenceEstimate",
    "TailEstimate",
    "ScalingFit",
    "WindowCountEstimate",
    "VarianceIdentityReport",
    "persistence_dual",
    "persistence_from_batch",
    "tail_dual",
    "tail_from_batch",
    "tail_profile",
    "mean_window_count",
    "fit_scaling",
    "variance_identity_check",
    "magnetization_tail",
    "dual_meeting_prob",
    "exact_exceedance_prob",
    "resampled_exceedance_prob",
    "batch_means_stderr",
    "neglog_stderr",
]

EXACT_ENUM_MAX = 25  # exact subset enumeration below this lineage count

# stream tags for hash-derived substreams (documented in run manifests)
SIM_STREAM = 0
MARK_STREAM = 1


def batch_means_stderr(values, min_batches=32):
    """Standard error of the mean via batch means.

    Replicas are i.i.d., so the plain standard error would be valid;
    batch means guard against accidental stream reuse.  Uses at least
    ``min_batches`` batches when the sample allows it.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 2:
        return float("nan")
    n_batches = min_batches if n >= 2 * min_batches else max(2, n // 2)
    size = n // n_batches
    means = values[: n_batches * size].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def neglog_stderr(p, stderr):
    """Delta-method standard error of -log(p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    return stderr / p


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PersistenceEstimate:
    t: float
    rho: float
    mean: float
    stderr: float
    replicas: int
    aborted: int = 0

    def __post_init__(self):
        if self.mean > self.rho + 1e-12:
            raise ValueError(
                f"persistence mean {self.mean} exceeds rho={self.rho}; "
                "every dual sample has at least one lineage"
            )


@dataclass(frozen=True)
class TailEstimate:
    t: float
    rho: float
    level_alpha: float
    prob: float
    stderr: float
    replicas: int
    marks_per_replica: int
    aborted: int = 0


@dataclass(frozen=True)
class WindowCountEstimate:
    t: float
    mean: float
    stderr: float
    replicas: int
    aborted: int = 0


@dataclass(frozen=True)
class ScalingFit:
    """Weighted least squares of -log p against log t or log^2 t."""

    model: str
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    points: np.ndarray  # rows (t, -log p)

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    def residuals(self) -> np.ndarray:
        u = np.log(self.points[:, 0])
        if self.model == "log2":
            u = u * u
        return self.points[:, 1] - (self.intercept + self.slope * u)


@dataclass(frozen=True)
class VarianceIdentityReport:
    t: float
    rho: float
    lhs: float  # empirical Var(T_t / t)
    rhs: float  # rho(1-rho) E[sum of squared masses] / t^2
    combined_stderr: float
    passed: bool
    replicas: int
    aborted: int = 0


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def persistence_from_batch(batch: DualBatch, rho) -> PersistenceEstimate:
    valid = batch.valid
    counts = batch.n_lineages[valid].astype(np.float64)
    if counts.size < 2:
        raise ValueError("need at least 2 valid replicas")
    values = rho**counts
    return PersistenceEstimate(
        t=batch.horizon,
        rho=float(rho),
        mean=float(values.mean()),
        stderr=batch_means_stderr(values),
        replicas=int(counts.size),
        aborted=batch.n_aborted,
    )


def persistence_dual(t, rho, replicas, rng, jump_budget=None) -> PersistenceEstimate:
    """Mean of rho^(distinct lineage count) over independent dual samples."""
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    batch = sample_batch(t, replicas, rng, jump_budget=jump_budget)
    return persistence_from_batch(batch, rho)


# ---------------------------------------------------------------------------
# Occupation-time tails via conditional Monte Carlo
# ---------------------------------------------------------------------------


def exact_exceedance_prob(masses, rho, threshold) -> float:
    """P(sum of masses with independent Bernoulli(rho) marks >= threshold).

    Exact subset enumeration, organized meet-in-the-middle so its cost
    is O(2^(n/2) log) instead of O(2^n).
    """
    masses = np.asarray(masses, dtype=np.float64)
    n = masses.size
    if n > EXACT_ENUM_MAX:
        raise ValueError(f"exact enumeration limited to {EXACT_ENUM_MAX} masses")
    if threshold <= 0:
        return 1.0
    if threshold > masses.sum():
        return 0.0

    def enumerate_half(ms):
        sums = np.zeros(1)
        probs = np.ones(1)
        for m in ms:
            sums = np.concatenate([sums, sums + m])
            probs = np.concatenate([probs * (1.0 - rho), probs * rho])
        return sums, probs

    a_sums, a_probs = enumerate_half(masses[: n // 2])
    b_sums, b_probs = enumerate_half(masses[n // 2 :])
    order = np.argsort(b_sums, kind="stable")
    b_sums = b_sums[order]
    # suffix[i] = P(S_B >= b_sums[i])
    suffix = np.concatenate([np.cumsum(b_probs[order][::-1])[::-1], [0.0]])
    idx = np.searchsorted(b_sums, threshold - a_sums, side="left")
    return float(np.dot(a_probs, suffix[idx]))


def resampled_exceedance_prob(masses, rho, threshold, n_marks, rng) -> float:
    """Mark-resampling estimate of the same inner probability."""
    masses = np.asarray(masses, dtype=np.float64)
    if n_marks < 1:
        raise ValueError("n_marks must be >= 1")
    rng = as_generator(rng)
    marks = rng.random((n_marks, masses.size)) < rho
    return float(((marks @ masses) >= threshold).mean())


def _inner_tail_probs(batch, rho, levels, marks_per_replica, mark_keys):
    """Inner exceedance probability per valid sample and level.

    Exact below EXACT_ENUM_MAX lineages, mark resampling above; mark
    uniforms are shared across levels (coupled estimates).
    """
    if batch.masses is None:
        raise ValueError("batch was sampled without masses")
    t = batch.horizon
    thresholds = [lvl * t for lvl in levels]
    valid_idx = np.nonzero(batch.valid)[0]
    inner = np.empty((valid_idx.size, len(levels)))
    for row, i in enumerate(valid_idx):
        n = int(batch.n_lineages[i])
        ms = batch.masses[i, :n]
        if n <= EXACT_ENUM_MAX:
            for j, theta in enumerate(thresholds):
                inner[row, j] = exact_exceedance_prob(ms, rho, theta)
        else:
            marks = generator(mark_keys[i]).random((marks_per_replica, n)) < rho
            dots = marks @ ms
            for j, theta in enumerate(thresholds):
                inner[row, j] = float((dots >= theta).mean())
    return inner


def tail_from_batch(
    batch: DualBatch, rho, level_alpha, marks_per_replica, mark_keys
) -> TailEstimate:
    inner = _inner_tail_probs(batch, rho, [level_alpha], marks_per_replica, mark_keys)
    values = inner[:, 0]
    return TailEstimate(
        t=batch.horizon,
        rho=float(rho),
        level_alpha=float(level_alpha),
        prob=float(values.mean()),
        stderr=batch_means_stderr(values),
        replicas=int(values.size),
        marks_per_replica=int(marks_per_replica),
        aborted=batch.n_aborted,
    )


def _check_tail_args(rho, level_alpha, marks_per_replica):
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if level_alpha <= rho:
        raise ValueError(
            f"level_alpha={level_alpha} must exceed rho={rho}; levels at or "
            "below the density are law-of-large-numbers territory"
        )
    if level_alpha >= 1.0:
        raise ValueError(
            f"level_alpha={level_alpha} must be < 1; the persistence "
            "estimator covers the extreme level"
        )
    if marks_per_replica < 1:
        raise ValueError("marks_per_replica must be >= 1")


def _reject_key_arrays(rng):
    # operations that need several independent substreams (simulation
    # draws and mark draws) cannot split a raw key array
    if isinstance(rng, np.ndarray):
        raise TypeError(
            "this estimator derives multiple substreams; pass an int seed "
            "or a numpy Generator instead of a key array"
        )


def tail_dual(
    t, rho, level_alpha, replicas, marks_per_replica, rng, jump_budget=None
) -> TailEstimate:
    """Conditional Monte Carlo estimate of P(T_t >= level_alpha * t)."""
    _check_tail_args(rho, level_alpha, marks_per_replica)
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    _reject_key_arrays(rng)
    sim_keys = replica_keys(rng, replicas, stream=SIM_STREAM)
    mark_keys = replica_keys(rng, replicas, stream=MARK_STREAM)
    batch = sample_batch(
        t, replicas, sim_keys, jump_budget=jump_budget, want_masses=True
    )
    return tail_from_batch(batch, rho, level_alpha, marks_per_replica, mark_keys)


def tail_profile(
    t, rho, levels, replicas, marks_per_replica, rng, jump_budget=None
) -> List[TailEstimate]:
    """Tail estimates for several levels sharing one set of dual samples.

    Shared samples and shared mark uniforms make the estimates coupled:
    the estimated probability is non-increasing in the level by
    construction, sample noise included.
    """
    for lvl in levels:
        _check_tail_args(rho, lvl, marks_per_replica)
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    _reject_key_arrays(rng)
    sim_keys = replica_keys(rng, replicas, stream=SIM_STREAM)
    mark_keys = replica_keys(rng, replicas, stream=MARK_STREAM)
    batch = sample_batch(
        t, replicas, sim_keys, jump_budget=jump_budget, want_masses=True
    )
    inner = _inner_tail_probs(batch, rho, list(levels), marks_per_replica, mark_keys)
    out = []
    for j, lvl in enumerate(levels):
        values = inner[:, j]
        out.append(
            TailEstimate(
                t=float(t),
                rho=float(rho),
                level_alpha=float(lvl),
                prob=float(values.mean()),
                stderr=batch_means_stderr(values),
                replicas=int(values.size),
                marks_per_replica=int(marks_per_replica),
                aborted=batch.n_aborted,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Windowed distinct-lineage counts
# ---------------------------------------------------------------------------


def mean_window_count(t, replicas, rng, jump_budget=None) -> WindowCountEstimate:
    """Mean distinct-lineage count over the forward-time window [t/2, t]."""
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    batch = sample_batch(
        t, replicas, rng, jump_budget=jump_budget, windows=[(t / 2.0, t)]
    )
    counts = batch.window_counts[batch.valid, 0].astype(np.float64)
    return WindowCountEstimate(
        t=float(t),
        mean=float(counts.mean()),
        stderr=batch_means_stderr(counts),
        replicas=int(counts.size),
        aborted=batch.n_aborted,
    )


# ---------------------------------------------------------------------------
# Scaling-law regression
# ---------------------------------------------------------------------------


def fit_scaling(points, model) -> ScalingFit:
    """Weighted least squares of -log p against log t or log^2 t.

    ``points`` holds (t, p_hat, stderr) triples.  Weights come from the
    delta-method standard error of -log p (stderr/p); points with
    p_hat = 0 are dropped with a warning (Monte Carlo underflow), and a
    fit needs at least 3 surviving points.
    """
    if model not in ("log", "log2"):
        raise ValueError(f"model must be 'log' or 'log2', got {model!r}")
    kept = []
    for t, p, se in points:
        if t <= 0:
            raise ValueError(f"t values must be positive, got {t}")
        if p < 0 or p > 1:
            raise ValueError(f"p_hat must lie in [0, 1], got {p}")
        if p == 0:
            warnings.warn(
                f"dropping point t={t}: p_hat = 0 (Monte Carlo underflow)",
                stacklevel=2,
            )
            continue
        kept.append((float(t), float(p), float(se)))
    if len(kept) < 3:
        raise ValueError(f"need at least 3 points with p_hat > 0, got {len(kept)}")
    t_arr = np.array([k[0] for k in kept])
    p_arr = np.array([k[1] for k in kept])
    se_arr = np.array([k[2] for k in kept])
    y = -np.log(p_arr)
    se_y = se_arr / p_arr
    u = np.log(t_arr)
    if model == "log2":
        u = u * u

    exact = bool(np.all(se_y <= 0))
    if exact:
        weights = np.ones_like(y)
    else:
        floor = se_y[se_y > 0].min()
        se_eff = np.where(se_y > 0, se_y, floor)
        weights = 1.0 / (se_eff * se_eff)
    wn = weights / weights.max()

    sw = wn.sum()
    su = float(np.dot(wn, u))
    sy = float(np.dot(wn, y))
    suu = float(np.dot(wn, u * u))
    suy = float(np.dot(wn, u * y))
    det = sw * suu - su * su
    slope = (sw * suy - su * sy) / det
    intercept = (suu * sy - su * suy) / det

    if exact:
        slope_stderr = 0.0
    else:
        det_abs = weights.sum() * float(np.dot(weights, u * u)) - float(
            np.dot(weights, u)
        ) ** 2
        slope_stderr = math.sqrt(weights.sum() / det_abs)

    fitted = intercept + slope * u
    y_bar = sy / sw
    ss_res = float(np.dot(wn, (y - fitted) ** 2))
    ss_tot = float(np.dot(wn, (y - y_bar) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot

    return ScalingFit(
        model=model,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r_squared),
        slope_stderr=float(slope_stderr),
        points=np.column_stack([t_arr, y]),
    )


# ---------------------------------------------------------------------------
# Variance identity
# ---------------------------------------------------------------------------


def variance_identity_check(
    t, rho, replicas, rng, jump_budget=None
) -> VarianceIdentityReport:
    """Check Var(T_t/t) = rho(1-rho) E[sum of squared masses] / t^2.

    Both sides are estimated from the same dual samples (left via mark
    draws, right via mass second moments); see
    docs/variance_identity.md for the derivation.  The combined standard
    error comes from the per-sample influence values of the difference,
    so the correlation between the two sides is accounted for.
    """
    if replicas < 100:
        raise ValueError("replicas must be >= 100")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    _reject_key_arrays(rng)
    sim_keys = replica_keys(rng, replicas, stream=SIM_STREAM)
    mark_key = replica_keys(rng, 1, stream=MARK_STREAM)[0]
    batch = sample_batch(
        t, replicas, sim_keys, jump_budget=jump_budget, want_masses=True
    )
    valid = batch.valid
    masses = batch.masses[valid]
    marks = generator(mark_key).random(masses.shape) < rho
    occupations = (masses * marks).sum(axis=1) / t
    n = occupations.size
    lhs = float(occupations.var(ddof=1))
    rhs = float(rho * (1.0 - rho) * batch.mass_sq[valid].mean() / (t * t))
    centered_sq = (occupations - occupations.mean()) ** 2 * (n / (n - 1.0))
    influence = centered_sq - rho * (1.0 - rho) * batch.mass_sq[valid] / (t * t)
    stderr = float(influence.std(ddof=1) / math.sqrt(n))
    # absolute floor guards the degenerate densities, where both sides
    # are zero up to float accumulation dust
    passed = abs(lhs - rhs) <= 4.0 * stderr + 1e-18
    return VarianceIdentityReport(
        t=float(t),
        rho=float(rho),
        lhs=lhs,
        rhs=rhs,
        combined_stderr=stderr,
        passed=bool(passed),
        replicas=int(n),
        aborted=batch.n_aborted,
    )


# ---------------------------------------------------------------------------
# Physics observables
# ---------------------------------------------------------------------------


def magnetization_tail(t, x, replicas, marks_per_replica, rng) -> TailEstimate:
    """P(mean magnetization M(t) >= x) for the symmetric spin start.

    With opinions relabeled to {-1, +1} and density 1/2, M(t) = 2 T_t/t - 1,
    so {M(t) >= x} = {T_t >= (1+x)/2 * t}.  The extreme level x = 1 is
    redirected to the persistence estimator.
    """
    if not 0.0 < x <= 1.0:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    if x == 1.0:
        est = persistence_dual(t, 0.5, replicas, rng)
        return TailEstimate(
            t=est.t,
            rho=0.5,
            level_alpha=1.0,
            prob=est.mean,
            stderr=est.stderr,
            replicas=est.replicas,
            marks_per_replica=0,
            aborted=est.aborted,
        )
    return tail_dual(t, 0.5, (1.0 + x) / 2.0, replicas, marks_per_replica, rng)


def _sized_replicas(sd, mean, target, pilot, min_replicas, max_replicas):
    """Replica count so that stderr(-log p) = sd/(mean sqrt(R)) <= target."""
    if mean <= 0:
        return max_replicas
    rel_var = (sd / mean) ** 2
    needed = int(math.ceil(1.3 * rel_var / (target * target)))  # 30% sizing margin
    return int(min(max(needed, min_replicas, pilot), max_replicas))


def persistence_series(
    t_grid,
    rho,
    rng,
    target_neglog_stderr=0.15,
    pilot=400,
    min_replicas=1000,
    max_replicas=200_000,
    jump_budget=None,
) -> List[PersistenceEstimate]:
    """Persistence estimates over a horizon grid, replica counts chosen
    per point so the standard error of -log p_hat meets the target.

    A pilot batch (independent substream) gives the initial size; the
    run then extends along the same key stream until the realized
    standard error meets the target or the replica cap is hit.  The
    values rho^(lineage count) are right-skewed, so pilot variance
    estimates routinely undershoot; the extension loop is what actually
    enforces the precision contract.
    """
    if isinstance(rng, np.random.Generator):
        raise TypeError("series sizing needs an integer seed for substream bookkeeping")
    out = []
    for j, t in enumerate(t_grid):
        pilot_keys = replica_keys(rng, pilot, stream=_series_stream(j, pilot_run=True))
        pb = sample_batch(t, pilot, pilot_keys, jump_budget=jump_budget)
        pvals = rho ** pb.n_lineages[pb.valid].astype(np.float64)
        goal = _sized_replicas(
            float(pvals.std(ddof=1)), float(pvals.mean()),
            target_neglog_stderr, pilot, min_replicas, max_replicas,
        )
        counts = []
        drawn = 0
        aborted = 0
        while True:
            chunk = min(max(256, goal - drawn), max_replicas - drawn)
            keys = replica_keys(rng, chunk, stream=_series_stream(j), start=drawn)
            batch = sample_batch(t, chunk, keys, jump_budget=jump_budget)
            counts.append(batch.n_lineages[batch.valid].astype(np.float64))
            aborted += batch.n_aborted
            drawn += chunk
            values = rho ** np.concatenate(counts)
            # judge precision with the same estimator that gets reported
            achieved = batch_means_stderr(values) / values.mean()
            if achieved <= target_neglog_stderr or drawn >= max_replicas:
                break
            goal = _sized_replicas(
                float(values.std(ddof=1)), float(values.mean()),
                target_neglog_stderr, 0, drawn + 256, max_replicas,
            )
        out.append(
            PersistenceEstimate(
                t=float(t),
                rho=float(rho),
                mean=float(values.mean()),
                stderr=batch_means_stderr(values),
                replicas=int(values.size),
                aborted=aborted,
            )
        )
    return out


def tail_series(
    t_grid,
    rho,
    levels,
    marks_per_replica,
    rng,
    targets=None,
    pilot=400,
    min_replicas=1000,
    max_replicas=200_000,
    jump_budget=None,
) -> List[List[TailEstimate]]:
    """Tail estimates for several levels over a horizon grid.

    Per horizon, one set of dual samples is shared across levels (the
    estimates are coupled); like :func:`persistence_series`, the run
    extends until every level's -log p_hat standard error meets its
    target (default 0.15 each) or the replica cap is hit.
    """
    if isinstance(rng, np.random.Generator):
        raise TypeError("series sizing needs an integer seed for substream bookkeeping")
    levels = list(levels)
    if targets is None:
        targets = [0.15] * len(levels)
    out = []
    for j, t in enumerate(t_grid):
        pilot_sim = replica_keys(rng, pilot, stream=_series_stream(j, pilot_run=True))
        pilot_mark = replica_keys(
            rng, pilot, stream=_series_stream(j, pilot_run=True, marks=True)
        )
        pb = sample_batch(t, pilot, pilot_sim, jump_budget=jump_budget, want_masses=True)
        pinner = _inner_tail_probs(pb, rho, levels, marks_per_replica, pilot_mark)
        goal = min_replicas
        for k in range(len(levels)):
            goal = max(
                goal,
                _sized_replicas(
                    float(pinner[:, k].std(ddof=1)), float(pinner[:, k].mean()),
                    targets[k], pilot, min_replicas, max_replicas,
                ),
            )
        chunks = []
        drawn = 0
        aborted = 0
        while True:
            chunk = min(max(256, goal - drawn), max_replicas - drawn)
            sim_keys = replica_keys(rng, chunk, stream=_series_stream(j), start=drawn)
            mark_keys = replica_keys(
                rng, chunk, stream=_series_stream(j, marks=True), start=drawn
            )
            batch = sample_batch(
                t, chunk, sim_keys, jump_budget=jump_budget, want_masses=True
            )
            chunks.append(_inner_tail_probs(batch, rho, levels, marks_per_replica, mark_keys))
            aborted += batch.n_aborted
            drawn += chunk
            inner = np.concatenate(chunks, axis=0)
            worst_goal = drawn
            met = True
            for k in range(len(levels)):
                mean_k = float(inner[:, k].mean())
                sd_k = float(inner[:, k].std(ddof=1))
                if mean_k <= 0.0:
                    # the level underflowed on every sample; no amount of
                    # sizing can meet a -log precision target for it
                    continue
                # judge precision with the reported (batch-means) estimator
                if batch_means_stderr(inner[:, k]) / mean_k > targets[k]:
                    met = False
                worst_goal = max(
                    worst_goal,
                    _sized_replicas(sd_k, mean_k, targets[k], 0, drawn + 256, max_replicas),
                )
            if met or drawn >= max_replicas:
                break
            goal = worst_goal
        ests = []
        for k, lvl in enumerate(levels):
            vals = inner[:, k]
            ests.append(
                TailEstimate(
                    t=float(t),
                    rho=float(rho),
                    level_alpha=float(lvl),
                    prob=float(vals.mean()),
                    stderr=batch_means_stderr(vals),
                    replicas=int(vals.size),
                    marks_per_replica=int(marks_per_replica),
                    aborted=aborted,
                )
            )
        out.append(ests)
    return out


def _series_stream(point_index, pilot_run=False, marks=False):
    """Substream tag for grid point ``point_index`` (documented in manifests)."""
    return 16 * point_index + 2 * int(pilot_run) + int(marks) + 2


def dual_meeting_prob(t, s1, s2, replicas, rng) -> ProbEstimate:
    """P(the dual walks injected at forward times s1 and s2 coalesce).

    Coalescing walks occupy the same site at evaluation time exactly
    when they have merged, so this is the same-lineage indicator mean.
    Feeds the covariance identity Cov(eta_s(0), eta_s2(0)) =
    rho(1-rho) * (this probability).
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    batch = sample_batch(t, replicas, rng, pair=(s1, s2))
    values = batch.same_lineage[batch.valid]
    mean = float(values.mean())
    stderr = math.sqrt(mean * (1.0 - mean) / values.size)
    return ProbEstimate(mean=mean, stderr=stderr, replicas=int(values.size))
