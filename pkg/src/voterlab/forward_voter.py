"""Forward-in-time voter model on a finite torus.

Dynamics follow the Harris picture: every site carries a rate-1 clock
and, when it rings, the site copies the opinion of a uniformly chosen
nearest neighbour (equivalent to four rate-1/4 ordered-pair clocks).
Events are scheduled with a single global exponential clock of rate L^2
and a uniform site per event (Gillespie), which is exact.

The torus is a finite stand-in for the infinite lattice; configurations
with side L >= 8*sqrt(horizon) keep wrap-around effects negligible at
the horizons used here, and smaller tori raise a warning rather than an
error so exploratory runs stay possible.

The module is the independent oracle for the dual-walk estimators: it
never looks at the dual representation.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .lattice_walks import ProbEstimate
from .streams import as_generator, exp_f64, replica_keys, unit_f64, xo_next, xo_seed

__all__ = [
    "TorusConfig",
    "ForwardState",
    "MeanEstimate",
    "init_bernoulli",
    "evolve",
    "forward_persistence_mc",
    "forward_tail_mc",
    "forward_occupation_mc",
    "forward_covariance_mc",
    "coupled_occupations",
    "survival_from_state_mc",
]


@dataclass(frozen=True)
class TorusConfig:
    """Torus side, time horizon and initial Bernoulli density."""

    side: int
    horizon: float
    rho: float

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 4:
            raise ValueError(f"side must be an integer >= 4, got {self.side}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not self.wrap_guard_ok:
            warnings.warn(
                f"torus side {self.side} < 8*sqrt(horizon) = "
                f"{8 * math.sqrt(self.horizon):.1f}; wrap-around effects may "
                "not be negligible",
                stacklevel=2,
            )

    @property
    def wrap_guard_ok(self) -> bool:
        return self.side >= 8.0 * math.sqrt(self.horizon)


@dataclass
class ForwardState:
    """Voter configuration plus the running origin occupation integral.

    ``eta`` is a (side, side) uint8 array with the origin at [0, 0];
    ``origin_occupation`` is the exact integral of eta[0, 0] over
    [0, clock], accrued piecewise-constantly between events.
    """

    eta: np.ndarray
    clock: float = 0.0
    origin_occupation: float = 0.0

    def __post_init__(self):
        if self.eta.ndim != 2 or self.eta.shape[0] != self.eta.shape[1]:
            raise ValueError("eta must be a square 2D array")
        if not 0.0 <= self.origin_occupation <= self.clock + 1e-12:
            raise ValueError("origin_occupation must lie in [0, clock]")

    @property
    def side(self) -> int:
        return self.eta.shape[0]


@dataclass(frozen=True)
class MeanEstimate:
    """Sample mean with standard error (for unbounded-range estimands)."""

    value: float
    stderr: float
    replicas: int


def init_bernoulli(cfg: TorusConfig, rng) -> ForwardState:
    """Independent Bernoulli(rho) opinions at every site, clock at 0."""
    rng = as_generator(rng)
    eta = (rng.random((cfg.side, cfg.side)) < cfg.rho).astype(np.uint8)
    return ForwardState(eta=eta, clock=0.0, origin_occupation=0.0)


# ---------------------------------------------------------------------------
# Kernels.  Each event consumes two draws: one for the holding time, one
# for the site (high bits) and copied neighbour (low two bits).
# ---------------------------------------------------------------------------

_U3 = np.uint64(3)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)


@njit(cache=True, inline="always")
def _neighbour(site, d, L):
    x = site % L
    y = site // L
    if d == _U0:
        x = x + 1 if x + 1 < L else 0
    elif d == _U1:
        x = x - 1 if x > 0 else L - 1
    elif d == _U2:
        y = y + 1 if y + 1 < L else 0
    else:
        y = y - 1 if y > 0 else L - 1
    return y * L + x


@njit(cache=True)
def _bernoulli_fill(eta, rho, s0, s1, s2, s3):
    for j in range(eta.shape[0]):
        s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
        eta[j] = 1 if unit_f64(z) < rho else 0
    return s0, s1, s2, s3


@njit(cache=True, parallel=True)
def _persistence_kernel(L, horizon, rho, keys):
    n = keys.shape[0]
    out = np.zeros(n, np.uint8)
    nsites = L * L
    rate = float(nsites)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta = np.empty(nsites, np.uint8)
        s0, s1, s2, s3 = _bernoulli_fill(eta, rho, s0, s1, s2, s3)
        if eta[0] == 0:
            continue
        tau = 0.0
        survived = True
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            tau += exp_f64(z) / rate
            if tau > horizon:
                break
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            v = eta[_neighbour(site, z & _U3, L)]
            if eta[site] != v:
                eta[site] = v
                if site == 0:
                    # origin flipped to 0: replica decided, stop early
                    survived = False
                    break
        if survived:
            out[i] = 1
    return out


@njit(cache=True, parallel=True)
def _tail_kernel(L, horizon, rho, alpha, keys):
    n = keys.shape[0]
    out = np.zeros(n, np.uint8)
    nsites = L * L
    rate = float(nsites)
    target = alpha * horizon
    zero_budget = horizon - target
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta = np.empty(nsites, np.uint8)
        s0, s1, s2, s3 = _bernoulli_fill(eta, rho, s0, s1, s2, s3)
        tau = 0.0
        occ = 0.0
        org = eta[0]
        decided = False
        success = False
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            dt = exp_f64(z) / rate
            if tau + dt > horizon:
                occ += org * (horizon - tau)
                break
            occ += org * dt
            tau += dt
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            v = eta[_neighbour(site, z & _U3, L)]
            if eta[site] != v:
                eta[site] = v
                if site == 0:
                    org = v
            # the event {T >= alpha*horizon} is already decided once the
            # occupied time reaches the target or the vacant time exceeds
            # its budget; stopping here leaves the estimator unchanged
            if occ >= target:
                decided = True
                success = True
                break
            if tau - occ > zero_budget:
                decided = True
                break
        if decided:
            if success:
                out[i] = 1
        elif occ >= target:
            out[i] = 1
    return out


@njit(cache=True, parallel=True)
def _occupation_kernel(L, horizon, rho, keys):
    n = keys.shape[0]
    out = np.zeros(n, np.float64)
    nsites = L * L
    rate = float(nsites)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta = np.empty(nsites, np.uint8)
        s0, s1, s2, s3 = _bernoulli_fill(eta, rho, s0, s1, s2, s3)
        tau = 0.0
        occ = 0.0
        org = eta[0]
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            dt = exp_f64(z) / rate
            if tau + dt > horizon:
                occ += org * (horizon - tau)
                break
            occ += org * dt
            tau += dt
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            v = eta[_neighbour(site, z & _U3, L)]
            if eta[site] != v:
                eta[site] = v
                if site == 0:
                    org = v
        out[i] = occ
    return out


@njit(cache=True, parallel=True)
def _two_time_kernel(L, s1_time, s2_time, rho, keys):
    n = keys.shape[0]
    out = np.zeros((n, 2), np.uint8)
    nsites = L * L
    rate = float(nsites)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta = np.empty(nsites, np.uint8)
        s0, s1, s2, s3 = _bernoulli_fill(eta, rho, s0, s1, s2, s3)
        tau = 0.0
        first_done = False
        if s1_time == 0.0:
            out[i, 0] = eta[0]
            first_done = True
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            tnext = tau + exp_f64(z) / rate
            if not first_done and tnext > s1_time:
                out[i, 0] = eta[0]
                first_done = True
            if tnext > s2_time:
                out[i, 1] = eta[0]
                break
            tau = tnext
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            v = eta[_neighbour(site, z & _U3, L)]
            if eta[site] != v:
                eta[site] = v
    return out


@njit(cache=True, parallel=True)
def _coupled_occupation_kernel(L, horizon, rho_lo, rho_hi, keys):
    # Shared initial uniforms and shared Harris events for both densities.
    n = keys.shape[0]
    out = np.zeros((n, 2), np.float64)
    nsites = L * L
    rate = float(nsites)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta_a = np.empty(nsites, np.uint8)
        eta_b = np.empty(nsites, np.uint8)
        for j in range(nsites):
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            u = unit_f64(z)
            eta_a[j] = 1 if u < rho_lo else 0
            eta_b[j] = 1 if u < rho_hi else 0
        tau = 0.0
        occ_a = 0.0
        occ_b = 0.0
        org_a = eta_a[0]
        org_b = eta_b[0]
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            dt = exp_f64(z) / rate
            if tau + dt > horizon:
                occ_a += org_a * (horizon - tau)
                occ_b += org_b * (horizon - tau)
                break
            occ_a += org_a * dt
            occ_b += org_b * dt
            tau += dt
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            nb = _neighbour(site, z & _U3, L)
            eta_a[site] = eta_a[nb]
            eta_b[site] = eta_b[nb]
            if site == 0:
                org_a = eta_a[0]
                org_b = eta_b[0]
        out[i, 0] = occ_a
        out[i, 1] = occ_b
    return out


@njit(cache=True, parallel=True)
def _survival_from_state_kernel(eta0, L, horizon, keys):
    n = keys.shape[0]
    out = np.zeros(n, np.uint8)
    nsites = L * L
    rate = float(nsites)
    for i in prange(n):
        s0, s1, s2, s3 = xo_seed(keys[i])
        eta = eta0.copy()
        tau = 0.0
        while True:
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            tau += exp_f64(z) / rate
            if tau > horizon:
                break
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            eta[site] = eta[_neighbour(site, z & _U3, L)]
        for j in range(nsites):
            if eta[j] == 1:
                out[i] = 1
                break
    return out


@njit(cache=True)
def _evolve_kernel(eta, L, clock, occ, until, key):
    nsites = L * L
    rate = float(nsites)
    s0, s1, s2, s3 = xo_seed(key)
    tau = float(clock)
    acc = float(occ)
    org = 1.0 if eta[0] == 1 else 0.0
    running = True
    while running:
        s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
        dt = exp_f64(z) / rate
        if tau + dt > until:
            acc += org * (until - tau)
            tau = until
            running = False
        else:
            acc += org * dt
            tau += dt
            s0, s1, s2, s3, z = xo_next(s0, s1, s2, s3)
            site = np.int64(unit_f64(z) * nsites)
            v = eta[_neighbour(site, z & _U3, L)]
            if eta[site] != v:
                eta[site] = v
                if site == 0:
                    org = float(v)
    return tau, acc


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def evolve(state: ForwardState, until, rng) -> ForwardState:
    """Advance the Harris dynamics to the given time (in place).

    Origin occupation accrues exactly between events.  The state object
    is mutated and returned.
    """
    if until < state.clock:
        raise ValueError(f"until={until} is before clock={state.clock}")
    rng = as_generator(rng)
    key = np.uint64(rng.integers(0, 2**64, dtype=np.uint64))
    flat = state.eta.reshape(-1)
    clock, occ = _evolve_kernel(
        flat, state.side, state.clock, state.origin_occupation, float(until), key
    )
    state.clock = float(clock)
    state.origin_occupation = float(occ)
    return state


def forward_persistence_mc(cfg: TorusConfig, replicas, rng) -> ProbEstimate:
    """Fraction of replicas whose origin opinion is 1 throughout [0, horizon]."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    keys = replica_keys(rng, replicas)
    out = _persistence_kernel(cfg.side, float(cfg.horizon), float(cfg.rho), keys)
    hits = int(out.sum())
    warning = None
    if hits < 10:
        warning = (
            f"only {hits} persistent replicas observed; the horizon may be "
            "too deep for direct forward Monte Carlo at this replica count"
        )
    mean = hits / replicas
    stderr = math.sqrt(mean * (1.0 - mean) / replicas)
    return ProbEstimate(mean=mean, stderr=stderr, replicas=replicas, warning=warning)


def forward_tail_mc(cfg: TorusConfig, level_alpha, replicas, rng) -> ProbEstimate:
    """Fraction of replicas with origin occupation >= level_alpha * horizon."""
    if not 0.0 < level_alpha <= 1.0:
        raise ValueError(f"level_alpha must lie in (0, 1], got {level_alpha}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    keys = replica_keys(rng, replicas)
    out = _tail_kernel(
        cfg.side, float(cfg.horizon), float(cfg.rho), float(level_alpha), keys
    )
    mean = float(out.mean())
    stderr = math.sqrt(mean * (1.0 - mean) / replicas)
    return ProbEstimate(mean=mean, stderr=stderr, replicas=replicas)


def forward_occupation_mc(cfg: TorusConfig, replicas, rng) -> np.ndarray:
    """Origin occupation times T_horizon for independent replicas."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    keys = replica_keys(rng, replicas)
    return _occupation_kernel(cfg.side, float(cfg.horizon), float(cfg.rho), keys)


def forward_covariance_mc(cfg: TorusConfig, s, s2, replicas, rng) -> MeanEstimate:
    """Empirical covariance of the origin indicator at two times."""
    if not 0.0 <= s <= s2 <= cfg.horizon:
        raise ValueError(f"need 0 <= s <= s2 <= horizon, got s={s}, s2={s2}")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    keys = replica_keys(rng, replicas)
    ab = _two_time_kernel(cfg.side, float(s), float(s2), float(cfg.rho), keys)
    a = ab[:, 0].astype(np.float64)
    b = ab[:, 1].astype(np.float64)
    centered = (a - a.mean()) * (b - b.mean())
    value = float(centered.mean())
    stderr = float(centered.std(ddof=1) / math.sqrt(replicas))
    return MeanEstimate(value=value, stderr=stderr, replicas=replicas)


def coupled_occupations(side, horizon, rho_lo, rho_hi, replicas, rng) -> np.ndarray:
    """Occupation pairs for two densities driven by identical randomness.

    Shared initialization marks and shared Harris events make T_horizon
    pointwise non-decreasing in the density.  Returns an (n, 2) array of
    (low-density, high-density) occupations.
    """
    if not 0.0 <= rho_lo <= rho_hi <= 1.0:
        raise ValueError("need 0 <= rho_lo <= rho_hi <= 1")
    keys = replica_keys(rng, replicas)
    return _coupled_occupation_kernel(
        int(side), float(horizon), float(rho_lo), float(rho_hi), keys
    )


def survival_from_state_mc(state: ForwardState, horizon, replicas, rng) -> ProbEstimate:
    """P(some site still holds opinion 1 at the horizon), from a fixed start."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    keys = replica_keys(rng, replicas)
    out = _survival_from_state_kernel(
        state.eta.reshape(-1).copy(), state.side, float(horizon), keys
    )
    mean = float(out.mean())
    stderr = math.sqrt(mean * (1.0 - mean) / replicas)
    return ProbEstimate(mean=mean, stderr=stderr, replicas=replicas)
