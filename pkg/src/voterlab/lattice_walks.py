"""Simple-random-walk primitives on the 2D integer lattice.

Continuous-time walks jump at total rate 1 (exponential mean-1 holding
times, each jump uniform over the 4 nearest neighbours), so the variance
of each coordinate grows at rate 1/2 and E|X(t)|^2 = t.  Hitting and
exit events depend only on the embedded jump chain, which the Monte
Carlo kernels exploit by skipping holding-time draws where elapsed time
is irrelevant.

Norms are Euclidean; a walk at |x| exactly equal to an exit radius
counts as having exited.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from numba import njit, prange
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .streams import as_generator, exp_f64, replica_keys, xo_next, xo_seed

__all__ = [
    "Site",
    "ProbEstimate",
    "sample_srw",
    "sample_srw_endpoints",
    "hit_origin_before_exit_mc",
    "hit_origin_before_exit_exact",
    "lawler_reference_hit_before_exit",
    "lawler_reference_hit_by_time",
    "meet_prob_mc",
    "annulus_stay_prob_mc",
]

ORIGIN_TUPLE = (0, 0)


class Site(NamedTuple):
    """Lattice point with integer coordinates."""

    x: int
    y: int

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ORIGIN = Site(0, 0)


def _site_xy(site):
    x, y = site
    if int(x) != x or int(y) != y:
        raise ValueError(f"site coordinates must be integers, got {site!r}")
    return int(x), int(y)


@dataclass(frozen=True)
class ProbEstimate:
    """Monte Carlo estimate of a probability.

    For an indicator average the binomial standard error is used, so
    stderr <= 0.5/sqrt(replicas) always holds.  ``warning`` is set when
    the estimate was produced outside an operation's validity window.
    """

    mean: float
    stderr: float
    replicas: int
    warning: Optional[str] = None

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"mean must lie in [0, 1], got {self.mean}")
        if self.stderr < 0.0:
            raise ValueError("stderr must be >= 0")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")


def _indicator_estimate(hits, warning=None):
    n = int(hits.size)
    mean = float(hits.mean())
    stderr = math.sqrt(mean * (1.0 - mean) / n)
    return ProbEstimate(mean=mean, stderr=stderr, replicas=n, warning=warning)


# ---------------------------------------------------------------------------
# Path sampling
# ---------------------------------------------------------------------------

_STEPS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


def _holding_times(duration, rng):
    """Exponential holding times covering [0, duration]; returns jump times."""
    block = max(16, int(duration + 6.0 * math.sqrt(duration) + 16))
    times = rng.exponential(1.0, size=block)
    total = times.sum()
    while total <= duration:
        extra = rng.exponential(1.0, size=block)
        times = np.concatenate([times, extra])
        total += extra.sum()
    jump_times = np.cumsum(times)
    n_jumps = int(np.searchsorted(jump_times, duration, side="right"))
    return jump_times[:n_jumps]


def sample_srw(start, duration, rng, return_path=False):
    """Run one continuous-time walk for the given duration.

    Returns the final Site, or ``(final, jump_times, positions)`` when
    ``return_path`` is set; ``positions`` has one row per visited site
    including the start.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    x0, y0 = _site_xy(start)
    rng = as_generator(rng)
    if duration == 0:
        if return_path:
            return Site(x0, y0), np.empty(0), np.array([[x0, y0]], dtype=np.int64)
        return Site(x0, y0)
    jump_times = _holding_times(duration, rng)
    steps = _STEPS[rng.integers(0, 4, size=jump_times.size)]
    if return_path:
        positions = np.concatenate(
            [np.array([[x0, y0]], dtype=np.int64), np.cumsum(steps, axis=0) + (x0, y0)]
        ) if steps.size else np.array([[x0, y0]], dtype=np.int64)
        final = Site(int(positions[-1, 0]), int(positions[-1, 1]))
        return final, jump_times, positions
    dx, dy = (steps.sum(axis=0) if steps.size else (0, 0))
    return Site(x0 + int(dx), y0 + int(dy))


def sample_srw_endpoints(start, duration, n, rng):
    """Endpoints of ``n`` independent walks of the given duration.

    Jump counts are drawn Poisson(duration) -- the exact law of the
    exponential-holding-time count -- and directions multinomially, so
    the endpoint law matches running each walk event by event.
    Returns an (n, 2) int64 array.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    x0, y0 = _site_xy(start)
    rng = as_generator(rng)
    counts = rng.poisson(duration, size=n)
    dirs = rng.multinomial(counts, [0.25, 0.25, 0.25, 0.25])
    out = np.empty((n, 2), dtype=np.int64)
    out[:, 0] = x0 + dirs[:, 0] - dirs[:, 1]
    out[:, 1] = y0 + dirs[:, 2] - dirs[:, 3]
    return out


# ---------------------------------------------------------------------------
# Hitting the origin before exiting a disc
# ---------------------------------------------------------------------------

_U3 = np.uint64(3)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)


@njit(cache=True, parallel=True)
def _hit_before_exit_kernel(x0, y0, r2_exit, keys):
    # Hitting-before-exit depends only on the jump chain, so holding
    # times are not drawn.
    n = keys.shape[0]
    hit = np.zeros(n, np.uint8)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        x = x0
        y = y0
        res = np.uint8(0)
        walking = True
        while walking:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            d = z & _U3
            if d == _U0:
                x += 1
            elif d == _U1:
                x -= 1
            elif d == _U2:
                y += 1
            else:
                y -= 1
            if x == 0 and y == 0:
                res = np.uint8(1)
                walking = False
            elif float(x * x + y * y) >= r2_exit:
                walking = False
        hit[i] = res
    return hit


def hit_origin_before_exit_mc(x, radius, replicas, rng):
    """Estimate P_x(walk hits the origin before reaching norm >= radius)."""
    xi, yi = _site_xy(x)
    norm = math.hypot(xi, yi)
    if norm == 0.0:
        raise ValueError("start must differ from the origin")
    if norm >= radius:
        raise ValueError(f"start norm {norm} must be < radius {radius}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    keys = replica_keys(rng, replicas)
    hits = _hit_before_exit_kernel(np.int64(xi), np.int64(yi), float(radius) ** 2, keys)
    return _indicator_estimate(hits)


@lru_cache(maxsize=8)
def _disc_solution(radius_nano):
    """Solve the discrete harmonic system on the disc of the given radius.

    Unknowns are sites with 0 < |z| < radius; the origin is absorbing
    with value 1 and every site with |z| >= radius is absorbing with
    value 0.  Returns (values grid, box half-width); non-interior grid
    entries hold their absorbing values.
    """
    radius = radius_nano / 1e9
    r2 = radius * radius
    half = int(math.ceil(radius))
    side = 2 * half + 1
    xs, ys = np.meshgrid(
        np.arange(-half, half + 1), np.arange(-half, half + 1), indexing="ij"
    )
    inside = (xs * xs + ys * ys) < r2
    interior = inside & ~((xs == 0) & (ys == 0))
    n = int(interior.sum())
    index = -np.ones((side, side), dtype=np.int64)
    index[interior] = np.arange(n)

    ix = xs[interior]
    iy = ys[interior]
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nx = ix + dx
        ny = iy + dy
        at_origin = (nx == 0) & (ny == 0)
        rhs[at_origin] += 0.25
        nbr_idx = index[nx + half, ny + half]
        into_interior = nbr_idx >= 0
        rows.append(np.nonzero(into_interior)[0])
        cols.append(nbr_idx[into_interior])
        vals.append(np.full(int(into_interior.sum()), -0.25))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    system = sparse.eye(n, format="csr") + sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n, n)
    )
    solution = spsolve(system, rhs)
    grid = np.zeros((side, side))
    grid[half, half] = 1.0
    grid[interior] = solution
    return grid, half


def hit_origin_before_exit_exact(x, radius):
    """Exact P_x(hit origin before exit) from the linear-solve oracle."""
    xi, yi = _site_xy(x)
    norm = math.hypot(xi, yi)
    if norm == 0.0:
        raise ValueError("start must differ from the origin")
    if norm >= radius:
        raise ValueError(f"start norm {norm} must be < radius {radius}")
    grid, half = _disc_solution(round(float(radius) * 1e9))
    return float(grid[xi + half, yi + half])


# ---------------------------------------------------------------------------
# Reference asymptotics (orders, clamped to [0, 1]; not probabilities)
# ---------------------------------------------------------------------------


def _check_reference_args(x, t, t_min):
    xi, yi = _site_xy(x)
    norm = math.hypot(xi, yi)
    if t <= t_min:
        raise ValueError(f"t must be > {t_min}, got {t}")
    root_t = math.sqrt(t)
    if norm == 0.0:
        raise ValueError("x must differ from the origin")
    if norm > root_t:
        raise ValueError(f"|x| = {norm} must be <= sqrt(t) = {root_t}")
    return norm, root_t


def lawler_reference_hit_before_exit(x, t):
    """Reference order (log sqrt(t) - log|x|) / log sqrt(t) for hitting
    the origin before exiting the radius-sqrt(t) disc."""
    norm, root_t = _check_reference_args(x, t, 1.0)
    value = (math.log(root_t) - math.log(norm)) / math.log(root_t)
    return min(1.0, max(0.0, value))


def lawler_reference_hit_by_time(x, t):
    """Reference order (log sqrt(t) - log|x| + 1) / log sqrt(t) for
    hitting the origin by time t."""
    norm, root_t = _check_reference_args(x, t, math.e**2)
    value = (math.log(root_t) - math.log(norm) + 1.0) / math.log(root_t)
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# Two-walk meeting probability
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _meet_kernel(first_dur, diff_dur, keys):
    # Walk X for time s; conditional on X(s), the walks meet in [s, t]
    # iff a walk started at X(s) hits the origin within 2(t - s): the
    # difference of two independent rate-1 walks is a rate-2 walk.
    n = keys.shape[0]
    hit = np.zeros(n, np.uint8)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        x = np.int64(0)
        y = np.int64(0)
        tau = 0.0
        walking = True
        while walking:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            tau += exp_f64(z)
            if tau > first_dur:
                walking = False
            else:
                s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
                d = z & _U3
                if d == _U0:
                    x += 1
                elif d == _U1:
                    x -= 1
                elif d == _U2:
                    y += 1
                else:
                    y -= 1
        res = np.uint8(0)
        if x == 0 and y == 0:
            res = np.uint8(1)
        else:
            tau = 0.0
            walking = True
            while walking:
                s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
                tau += exp_f64(z)
                if tau > diff_dur:
                    walking = False
                else:
                    s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
                    d = z & _U3
                    if d == _U0:
                        x += 1
                    elif d == _U1:
                        x -= 1
                    elif d == _U2:
                        y += 1
                    else:
                        y -= 1
                    if x == 0 and y == 0:
                        res = np.uint8(1)
                        walking = False
        hit[i] = res
    return hit


def meet_prob_mc(s, t, replicas, rng):
    """Estimate the probability that two walks from the origin, the
    second started at time s, occupy the same site at some time in [s, t].

    The estimate is flagged (not rejected) when s falls outside the
    validity window (t/log t, t/2) of the reference asymptotics.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    warning = None
    if t <= 1 or not (t / math.log(t) < s < t / 2):
        warning = f"s={s} outside validity window (t/log t, t/2) for t={t}"
    keys = replica_keys(rng, replicas)
    hits = _meet_kernel(float(s), 2.0 * float(t - s), keys)
    return _indicator_estimate(hits, warning=warning)


# ---------------------------------------------------------------------------
# Annulus confinement probability
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _annulus_kernel(t, keys):
    n = keys.shape[0]
    stays = np.zeros(n, np.uint8)
    quarter = t / 4.0
    lo = t
    hi = 2.0 * t
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        x = np.int64(0)
        y = np.int64(0)
        tau = 0.0
        in_window = False
        ok = True
        walking = True
        while walking:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            tnext = tau + exp_f64(z)
            if not in_window and tnext > quarter:
                r2 = float(x * x + y * y)
                if not (lo < r2 < hi):
                    ok = False
                    walking = False
                in_window = True
            if walking and tnext > t:
                walking = False
            elif walking:
                tau = tnext
                s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
                d = z & _U3
                if d == _U0:
                    x += 1
                elif d == _U1:
                    x -= 1
                elif d == _U2:
                    y += 1
                else:
                    y -= 1
                if in_window:
                    r2 = float(x * x + y * y)
                    if not (lo < r2 < hi):
                        ok = False
                        walking = False
        if ok:
            stays[i] = 1
    return stays


def annulus_stay_prob_mc(t, replicas, rng):
    """Estimate P(|X(u)| in (sqrt(t), sqrt(2t)) for all u in [t/4, t]).

    As t grows this approaches the corresponding Brownian annulus
    constant by the invariance principle.
    """
    if math.sqrt(t) < 10.0:
        raise ValueError(f"need sqrt(t) >= 10 lattice units, got t={t}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    keys = replica_keys(rng, replicas)
    stays = _annulus_kernel(float(t), keys)
    return _indicator_estimate(stays)
