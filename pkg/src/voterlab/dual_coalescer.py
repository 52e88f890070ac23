"""Event-driven coalescing dual of the origin's opinion process.

The opinion history of the origin over [0, t] is determined by a system
of coalescing rate-1 random walks on the full lattice, one injected at
the origin at every time point, all evaluated at reversed time t.  The
continuum of injections collapses to a finite walker system: walkers
injected while some walker occupies the origin coalesce with it
instantly, so fresh walkers are born exactly when the current origin
resident first jumps away.  Each walker therefore owns a birth interval
in reversed time; interval lengths absorbed into a merged lineage add up
to that lineage's occupation mass, and the masses partition [0, t].
See docs/dual_construction.md for the derivation.

One sample is strictly sequential: a priority queue orders per-walker
jump times, an occupancy map detects collisions, and a union-find tracks
lineage merges.  Samples are independent, so batches run replicas in
parallel with hash-derived substreams.

Per-sample work grows superlinearly in t (roughly t^2/log t jump events,
because a freshly spawned walker escapes its predecessor only with
probability of order 1/log).  A jump-budget guard aborts runaway
replicas and reports them instead of stalling.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit, prange

from .streams import as_generator, exp_f64, replica_keys, xo_next, xo_seed

__all__ = [
    "DualSample",
    "DualBatch",
    "JumpBudgetExceeded",
    "simulate_dual",
    "sample_batch",
    "count_window",
    "occupation_sample",
    "lineage_of_injection",
    "default_jump_budget",
    "TRACE_DTYPE",
]

# status codes shared by the core and the batch kernel
STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_WALKER_OVERFLOW = 2
STATUS_BOX_ESCAPE = 3
STATUS_LINEAGE_OVERFLOW = 4

# trace record kinds
TRACE_MOVE = 0
TRACE_MERGE = 1
TRACE_SPAWN = 2

TRACE_DTYPE = np.dtype(
    [("beta", "<f8"), ("walker", "<i4"), ("kind", "<u1"), ("aux", "<i4")], align=False
)

MASS_TOLERANCE = 1e-9  # relative tolerance on sum(masses) == t

_U3 = np.uint64(3)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)


class JumpBudgetExceeded(RuntimeError):
    """A single-sample simulation exceeded its jump-event budget."""


def default_jump_budget(t):
    """Event cap per replica; several times the typical event count."""
    t = max(float(t), 2.0)
    return int(4_000_000 + 10.0 * t * t / math.log(t))


def walker_capacity(t):
    # spawns are Poisson(t); leave a wide margin
    return int(t + 12.0 * math.sqrt(t + 1.0) + 64)


def box_half_width(t):
    # walkers wander O(sqrt(t)); 8*sqrt(t) is ~11 sigma per coordinate
    return int(math.ceil(8.0 * math.sqrt(max(t, 1.0)))) + 2


# ---------------------------------------------------------------------------
# numba core
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _heap_less(ht, hi, a, b):
    # lexicographic (time, walker id); ties have probability zero but the
    # id order makes the event sequence fully deterministic
    if ht[a] < ht[b]:
        return True
    if ht[a] > ht[b]:
        return False
    return hi[a] < hi[b]


@njit(cache=True)
def _heap_push(ht, hi, n, tval, wid):
    ht[n] = tval
    hi[n] = wid
    i = n
    while i > 0:
        p = (i - 1) // 2
        if _heap_less(ht, hi, i, p):
            ht[i], ht[p] = ht[p], ht[i]
            hi[i], hi[p] = hi[p], hi[i]
            i = p
        else:
            break
    return n + 1


@njit(cache=True)
def _heap_pop(ht, hi, n):
    tval = ht[0]
    wid = hi[0]
    n -= 1
    ht[0] = ht[n]
    hi[0] = hi[n]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= n:
            break
        m = l
        r = l + 1
        if r < n and _heap_less(ht, hi, r, l):
            m = r
        if _heap_less(ht, hi, m, i):
            ht[i], ht[m] = ht[m], ht[i]
            hi[i], hi[m] = hi[m], hi[i]
            i = m
        else:
            break
    return tval, wid, n


@njit(cache=True, inline="always")
def _uf_find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def _dual_core(
    t,
    key,
    budget,
    px,
    py,
    birth,
    endb,
    parent,
    usize,
    alive,
    heap_t,
    heap_id,
    occ_id,
    occ_epoch,
    epoch,
    half,
    side,
    trace_beta,
    trace_walker,
    trace_kind,
    trace_aux,
):
    """Run one dual sample into caller-provided workspaces.

    Returns (n_walkers, events, status, n_trace).
    """
    cap = px.shape[0]
    trace_cap = trace_beta.shape[0]
    s0, s1, s2, s3 = xo_seed(key)
    origin_cell = half * side + half

    px[0] = 0
    py[0] = 0
    birth[0] = 0.0
    endb[0] = t
    parent[0] = 0
    usize[0] = 1
    alive[0] = 1
    occ_id[origin_cell] = 0
    occ_epoch[origin_cell] = epoch
    resident = 0
    n_w = 1
    hn = 0
    ntr = 0
    events = 0
    status = STATUS_OK

    s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
    first = exp_f64(z)
    if first < t:
        hn = _heap_push(heap_t, heap_id, hn, first, 0)

    while hn > 0:
        tau, w, hn = _heap_pop(heap_t, heap_id, hn)
        if alive[w] == 0:
            continue  # stale entry of a merged walker
        events += 1
        if events > budget:
            status = STATUS_BUDGET
            break
        s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
        d = z & _U3
        x = px[w]
        y = py[w]
        nx = x
        ny = y
        if d == _U0:
            nx = x + 1
        elif d == _U1:
            nx = x - 1
        elif d == _U2:
            ny = y + 1
        else:
            ny = y - 1
        if nx < -half or nx > half or ny < -half or ny > half:
            status = STATUS_BOX_ESCAPE
            break
        if w == resident:
            # first jump off the origin: close this walker's birth
            # interval and spawn its successor at the origin
            endb[w] = tau
            k = n_w
            if k >= cap:
                status = STATUS_WALKER_OVERFLOW
                break
            n_w += 1
            px[k] = 0
            py[k] = 0
            birth[k] = tau
            endb[k] = t
            parent[k] = k
            usize[k] = 1
            alive[k] = 1
            occ_id[origin_cell] = k
            occ_epoch[origin_cell] = epoch
            resident = k
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            nt = tau + exp_f64(z)
            if nt < t:
                hn = _heap_push(heap_t, heap_id, hn, nt, k)
            if ntr < trace_cap:
                trace_beta[ntr] = tau
                trace_walker[ntr] = k
                trace_kind[ntr] = TRACE_SPAWN
                trace_aux[ntr] = w
                ntr += 1
        else:
            occ_epoch[(x + half) * side + (y + half)] = 0  # vacate old cell
        cell = (nx + half) * side + (ny + half)
        if occ_epoch[cell] == epoch:
            # jumped onto an occupied site: lineages merge and the
            # jumping walker goes inert
            v = occ_id[cell]
            ra = _uf_find(parent, w)
            rb = _uf_find(parent, v)
            if ra != rb:
                if usize[ra] < usize[rb]:
                    parent[ra] = rb
                    usize[rb] += usize[ra]
                else:
                    parent[rb] = ra
                    usize[ra] += usize[rb]
            alive[w] = 0
            if ntr < trace_cap:
                trace_beta[ntr] = tau
                trace_walker[ntr] = w
                trace_kind[ntr] = TRACE_MERGE
                trace_aux[ntr] = v
                ntr += 1
        else:
            px[w] = nx
            py[w] = ny
            occ_id[cell] = w
            occ_epoch[cell] = epoch
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            nt = tau + exp_f64(z)
            if nt < t:
                hn = _heap_push(heap_t, heap_id, hn, nt, w)
            if ntr < trace_cap:
                trace_beta[ntr] = tau
                trace_walker[ntr] = w
                trace_kind[ntr] = TRACE_MOVE
                trace_aux[ntr] = np.int32(d)
                ntr += 1
    return n_w, events, status, ntr


@njit(cache=True)
def _finalize(n_w, parent, alive, birth, endb, px, py, comp, lin_of, masses, sx, sy):
    """Compact lineage ids, masses and final sites.  Returns n_lineages.

    Lineages are numbered in increasing order of their surviving
    walker's id; every root has exactly one surviving walker.
    """
    n_lin = 0
    for k in range(n_w):
        if alive[k] == 1:
            r = _uf_find(parent, k)
            comp[r] = n_lin
            sx[n_lin] = px[k]
            sy[n_lin] = py[k]
            masses[n_lin] = 0.0
            n_lin += 1
    for k in range(n_w):
        c = comp[_uf_find(parent, k)]
        lin_of[k] = c
        masses[c] += endb[k] - birth[k]
    return n_lin


@njit(cache=True)
def _window_count(n_w, birth, endb, parent, stamp, stamp_val, lo, hi):
    cnt = 0
    for k in range(n_w):
        if birth[k] <= hi and endb[k] >= lo:
            r = _uf_find(parent, k)
            if stamp[r] != stamp_val:
                stamp[r] = stamp_val
                cnt += 1
    return cnt


@njit(cache=True)
def _walker_at(n_w, birth, beta):
    lo = 0
    hi = n_w - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if birth[mid] <= beta:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit(cache=True, parallel=True)
def _batch_kernel(
    t,
    keys,
    budget,
    cap,
    half,
    side,
    win_lo,
    win_hi,
    want_masses,
    mass_cap,
    pair_a,
    pair_b,
    want_pair,
    nchunks,
):
    R = keys.shape[0]
    nwin = win_lo.shape[0]
    n_lin_out = np.zeros(R, np.int32)
    mass_sum = np.zeros(R, np.float64)
    mass_sq = np.zeros(R, np.float64)
    wcounts = np.zeros((R, nwin), np.int32)
    masses_out = np.zeros((R, mass_cap if want_masses else 1), np.float64)
    same_lin = np.zeros(R, np.uint8)
    events_out = np.zeros(R, np.int64)
    status_out = np.zeros(R, np.uint8)

    base = R // nchunks
    rem = R % nchunks
    trace0f = np.empty(0, np.float64)
    trace0i = np.empty(0, np.int32)
    trace0k = np.empty(0, np.uint8)

    for c in prange(nchunks):
        start = c * base + min(c, rem)
        stop = start + base + (1 if c < rem else 0)
        px = np.empty(cap, np.int32)
        py = np.empty(cap, np.int32)
        birth = np.empty(cap, np.float64)
        endb = np.empty(cap, np.float64)
        parent = np.empty(cap, np.int32)
        usize = np.empty(cap, np.int32)
        alive = np.empty(cap, np.uint8)
        heap_t = np.empty(cap, np.float64)
        heap_id = np.empty(cap, np.int32)
        occ_id = np.empty(side * side, np.int32)
        occ_epoch = np.zeros(side * side, np.int32)
        stamp = np.zeros(cap, np.int32)
        comp = np.empty(cap, np.int32)
        lin_of = np.empty(cap, np.int32)
        lmass = np.empty(cap, np.float64)
        sx = np.empty(cap, np.int32)
        sy = np.empty(cap, np.int32)
        for i in range(start, stop):
            epoch = i + 1
            n_w, events, status, _ = _dual_core(
                t, keys[i], budget,
                px, py, birth, endb, parent, usize, alive,
                heap_t, heap_id, occ_id, occ_epoch, epoch, half, side,
                trace0f, trace0i, trace0k, trace0i,
            )
            events_out[i] = events
            if status != STATUS_OK:
                status_out[i] = status
                continue
            n_lin = _finalize(
                n_w, parent, alive, birth, endb, px, py, comp, lin_of, lmass, sx, sy
            )
            n_lin_out[i] = n_lin
            total = 0.0
            sq = 0.0
            for j in range(n_lin):
                m = lmass[j]
                total += m
                sq += m * m
            mass_sum[i] = total
            mass_sq[i] = sq
            for j in range(nwin):
                wcounts[i, j] = _window_count(
                    n_w, birth, endb, parent, stamp,
                    np.int32(i * 8 + j + 1), win_lo[j], win_hi[j],
                )
            if want_masses:
                if n_lin > mass_cap:
                    status_out[i] = STATUS_LINEAGE_OVERFLOW
                    continue
                for j in range(n_lin):
                    masses_out[i, j] = lmass[j]
            if want_pair:
                ka = _walker_at(n_w, birth, pair_a)
                kb = _walker_at(n_w, birth, pair_b)
                same_lin[i] = 1 if lin_of[ka] == lin_of[kb] else 0
    return (
        n_lin_out,
        mass_sum,
        mass_sq,
        wcounts,
        masses_out,
        same_lin,
        events_out,
        status_out,
    )


# ---------------------------------------------------------------------------
# Python-facing containers and operations
# ---------------------------------------------------------------------------


@dataclass
class DualSample:
    """One realization of the coalescing dual system at a given horizon.

    ``birth_beta``/``end_beta`` hold each walker's birth interval in
    reversed time (the intervals partition [0, horizon]);
    ``walker_lineage`` maps each walker to the compact id of the lineage
    that absorbed it; ``lineage_masses`` are the total interval lengths
    per surviving lineage and ``lineage_sites`` their pairwise-distinct
    final positions.
    """

    horizon: float
    lineage_masses: np.ndarray
    birth_beta: np.ndarray
    end_beta: np.ndarray
    walker_lineage: np.ndarray
    lineage_sites: np.ndarray
    events: int

    def __post_init__(self):
        total = float(self.lineage_masses.sum())
        if abs(total - self.horizon) > MASS_TOLERANCE * self.horizon:
            raise ValueError(
                f"lineage masses sum to {total}, expected {self.horizon} "
                f"(tolerance {MASS_TOLERANCE * self.horizon})"
            )
        if self.n_lineages < 1:
            raise ValueError("a dual sample must contain at least one lineage")
        if np.any(self.lineage_masses <= 0):
            raise ValueError("every lineage mass must be positive")

    @property
    def n_lineages(self) -> int:
        return int(self.lineage_masses.shape[0])

    @property
    def n_walkers(self) -> int:
        return int(self.birth_beta.shape[0])


@dataclass
class DualBatch:
    """Per-replica summaries of many independent dual samples.

    Replicas with nonzero status (budget/capacity aborts) carry no
    statistics and are excluded from estimates; callers report their
    count.  ``window_counts`` columns follow the windows passed to
    :func:`sample_batch` (windows are given in forward time).
    """

    horizon: float
    n_lineages: np.ndarray
    mass_sum: np.ndarray
    mass_sq: np.ndarray
    window_counts: np.ndarray
    masses: Optional[np.ndarray]
    same_lineage: Optional[np.ndarray]
    events: np.ndarray
    status: np.ndarray

    @property
    def valid(self) -> np.ndarray:
        return self.status == STATUS_OK

    @property
    def n_replicas(self) -> int:
        return int(self.status.shape[0])

    @property
    def n_aborted(self) -> int:
        return int(np.count_nonzero(self.status))


def _num_chunks(n_replicas):
    import numba

    return max(1, min(int(numba.get_num_threads()), n_replicas))


def sample_batch(
    t,
    replicas,
    rng,
    jump_budget=None,
    windows=(),
    want_masses=False,
    mass_cap=None,
    pair=None,
) -> DualBatch:
    """Simulate ``replicas`` independent dual samples and summarize them.

    ``windows`` is a sequence of (r, s) pairs in forward time; the batch
    records the windowed distinct-lineage count for each.  With
    ``want_masses`` the per-lineage masses are returned (rows beyond
    ``n_lineages`` are zero).  ``pair=(s1, s2)`` records whether the
    injections at forward times s1 and s2 ended in the same lineage.
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"horizon must be > 0, got {t}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    budget = int(jump_budget) if jump_budget is not None else default_jump_budget(t)
    keys = replica_keys(rng, replicas)
    win_lo = np.empty(len(windows), np.float64)
    win_hi = np.empty(len(windows), np.float64)
    for j, (r, s) in enumerate(windows):
        if not 0 <= r <= s <= t:
            raise ValueError(f"window ({r}, {s}) outside [0, {t}]")
        win_lo[j] = t - s  # forward-time window -> reversed-time window
        win_hi[j] = t - r
    if mass_cap is None:
        mass_cap = _default_mass_cap(t)
    want_pair = pair is not None
    if want_pair:
        s1, s2 = pair
        if not (0 <= s1 <= t and 0 <= s2 <= t):
            raise ValueError(f"pair times must lie in [0, {t}]")
        pair_a, pair_b = t - float(s1), t - float(s2)
    else:
        pair_a = pair_b = 0.0
    half = box_half_width(t)
    (
        n_lin,
        mass_sum,
        mass_sq,
        wcounts,
        masses,
        same_lin,
        events,
        status,
    ) = _batch_kernel(
        t,
        keys,
        budget,
        walker_capacity(t),
        half,
        2 * half + 1,
        win_lo,
        win_hi,
        bool(want_masses),
        int(mass_cap),
        pair_a,
        pair_b,
        want_pair,
        _num_chunks(replicas),
    )
    return DualBatch(
        horizon=t,
        n_lineages=n_lin,
        mass_sum=mass_sum,
        mass_sq=mass_sq,
        window_counts=wcounts,
        masses=masses if want_masses else None,
        same_lineage=same_lin if want_pair else None,
        events=events,
        status=status,
    )


def _default_mass_cap(t):
    # generous multiple of the typical distinct-lineage count
    return int(min(512, 48 + 4.0 * math.log(max(t, 2.0)) ** 2))


def simulate_dual(t, rng, jump_budget=None, trace_path=None) -> DualSample:
    """Simulate one dual sample, optionally dumping its event trace.

    The trace is a little-endian binary record stream (see
    docs/trace_format.md); it is meant for debugging small horizons.
    Raises :class:`JumpBudgetExceeded` when the event cap is hit.
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"horizon must be > 0, got {t}")
    budget = int(jump_budget) if jump_budget is not None else default_jump_budget(t)
    key = np.uint64(replica_keys(rng, 1)[0])
    cap = walker_capacity(t)
    half = box_half_width(t)
    side = 2 * half + 1
    px = np.empty(cap, np.int32)
    py = np.empty(cap, np.int32)
    birth = np.empty(cap, np.float64)
    endb = np.empty(cap, np.float64)
    parent = np.empty(cap, np.int32)
    usize = np.empty(cap, np.int32)
    alive = np.empty(cap, np.uint8)
    heap_t = np.empty(cap, np.float64)
    heap_id = np.empty(cap, np.int32)
    occ_id = np.empty(side * side, np.int32)
    occ_epoch = np.zeros(side * side, np.int32)
    if trace_path is not None:
        trace_cap = min(budget, 8_000_000)
        tr_beta = np.empty(trace_cap, np.float64)
        tr_walker = np.empty(trace_cap, np.int32)
        tr_kind = np.empty(trace_cap, np.uint8)
        tr_aux = np.empty(trace_cap, np.int32)
    else:
        tr_beta = np.empty(0, np.float64)
        tr_walker = np.empty(0, np.int32)
        tr_kind = np.empty(0, np.uint8)
        tr_aux = np.empty(0, np.int32)

    n_w, events, status, ntr = _dual_core(
        t, key, budget,
        px, py, birth, endb, parent, usize, alive,
        heap_t, heap_id, occ_id, occ_epoch, 1, half, side,
        tr_beta, tr_walker, tr_kind, tr_aux,
    )
    if status == STATUS_BUDGET:
        raise JumpBudgetExceeded(
            f"dual sample at t={t} exceeded jump budget {budget}"
        )
    if status != STATUS_OK:
        raise RuntimeError(f"dual sample failed with status {status}")

    comp = np.empty(cap, np.int32)
    lin_of = np.empty(cap, np.int32)
    lmass = np.empty(cap, np.float64)
    sx = np.empty(cap, np.int32)
    sy = np.empty(cap, np.int32)
    n_lin = _finalize(n_w, parent, alive, birth, endb, px, py, comp, lin_of, lmass, sx, sy)

    if trace_path is not None:
        records = np.empty(ntr, dtype=TRACE_DTYPE)
        records["beta"] = tr_beta[:ntr]
        records["walker"] = tr_walker[:ntr]
        records["kind"] = tr_kind[:ntr]
        records["aux"] = tr_aux[:ntr]
        records.tofile(trace_path)

    sites = np.empty((n_lin, 2), np.int32)
    sites[:, 0] = sx[:n_lin]
    sites[:, 1] = sy[:n_lin]
    return DualSample(
        horizon=t,
        lineage_masses=lmass[:n_lin].copy(),
        birth_beta=birth[:n_w].copy(),
        end_beta=endb[:n_w].copy(),
        walker_lineage=lin_of[:n_w].copy(),
        lineage_sites=sites,
        events=int(events),
    )


def count_window(sample: DualSample, r, s) -> int:
    """Distinct lineages among injections with forward time in [r, s]."""
    if not 0 <= r <= s <= sample.horizon:
        raise ValueError(f"need 0 <= r <= s <= horizon, got ({r}, {s})")
    lo = sample.horizon - s
    hi = sample.horizon - r
    mask = (sample.birth_beta <= hi) & (sample.end_beta >= lo)
    return int(np.unique(sample.walker_lineage[mask]).size)


def occupation_sample(sample: DualSample, rho, rng) -> float:
    """One draw of the origin occupation time given the dual sample.

    Each lineage sits at its own site, so under a product-Bernoulli
    start the lineage marks are independent; the draw is the sum of
    masses whose mark came up 1.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 1.0:
        return float(sample.horizon)
    if rho == 0.0:
        return 0.0
    rng = as_generator(rng)
    marks = rng.random(sample.n_lineages) < rho
    return float(sample.lineage_masses[marks].sum())


def lineage_of_injection(sample: DualSample, s) -> int:
    """Compact lineage id of the dual walk injected at forward time s."""
    if not 0 <= s <= sample.horizon:
        raise ValueError(f"injection time {s} outside [0, {sample.horizon}]")
    beta = sample.horizon - s
    idx = int(np.searchsorted(sample.birth_beta, beta, side="right")) - 1
    return int(sample.walker_lineage[max(idx, 0)])
