"""Slice-sampling Gibbs algorithm for a Dirichlet process mixture of
conditional Gaussian copulas.

The model places a DP prior (total mass ``total_mass``, base measure a
zero-mean normal with covariance ``base_sigma2 * I``) on the calibration
coefficient vectors. Auxiliary uniform slice variables truncate the
infinite stick-breaking mixture to a finite candidate set per observation,
so one sweep cycles through

    sticks -> slices -> extension to the truncation level ->
    allocations -> coefficient vectors

where every update is a draw from an exact full conditional except the
coefficient move, which is Metropolis-Hastings: a symmetric random walk
whose per-component scale shrinks with occupancy (step = rw_step /
sqrt(members)), except that singleton components get an independence
proposal from the base measure. The shared base scale adapts during
burn-in only, so retained sweeps target the exact posterior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .calibration import CalibrationSpec, clamped_rho, eval_calibration
from .copulas import gaussian_copula_logpdf_scores, std_normal_quantile
from .pseudo import PseudoDataset

__all__ = [
    "ChainConsistencyError",
    "PriorConfig",
    "MCMCConfig",
    "MixtureState",
    "ChainTrace",
    "init_state",
    "update_sticks",
    "update_slices",
    "extend_to_nstar",
    "update_allocations",
    "update_betas",
    "run_chain",
    "validate_state",
    "state_log_likelihood",
]

# Stick values are kept away from {0, 1} so weights stay strictly positive
# and partial sums strictly below one.
_STICK_LO = 1e-300
_STICK_HI = 1.0 - 1e-16

_ADAPT_INTERVAL = 50
_ADAPT_TARGET = (0.25, 0.40)
_STEP_BOUNDS = (1e-3, 50.0)

# Components at or below this occupancy get independence proposals from the
# base measure instead of a random walk; fresh niches then cannot ratchet
# themselves into long-lived spurious clusters.
_INDEP_MAX_OCCUPANCY = 1

_MAX_COMPONENTS = 100_000
_INIT_CANDIDATES = 500


class ChainConsistencyError(RuntimeError):
    """Sampler state violated an invariant that its updates should preserve."""


@dataclass(frozen=True)
class PriorConfig:
    """DP total mass and the scale of the normal base measure."""

    total_mass: float = 1.0
    base_sigma2: float = 100.0

    def __post_init__(self):
        if not self.total_mass > 0:
            raise ValueError("total_mass must be positive")
        if not self.base_sigma2 > 0:
            raise ValueError("base_sigma2 must be positive")


@dataclass(frozen=True)
class MCMCConfig:
    iterations: int = 4000
    burn_in: int = 3500
    rw_step: float = 0.25
    seed: int = 0
    thin: int = 1

    def __post_init__(self):
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")
        if not self.rw_step > 0:
            raise ValueError("rw_step must be positive")
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")


@dataclass
class MixtureState:
    """Full sampler state.

    ``alloc`` holds 0-based component indices; component j is "instantiated"
    when it has a stick, a weight and an atom (row of ``atoms``).
    """

    sticks: np.ndarray   # (m,) stick-breaking fractions in (0, 1)
    weights: np.ndarray  # (m,) w_j = stick_j * prod_{l<j}(1 - stick_l)
    slices: np.ndarray   # (n,) slice variables, 0 < z_i < weights[alloc_i]
    alloc: np.ndarray    # (n,) int component indices
    atoms: np.ndarray    # (m, dim) calibration coefficient vectors

    @property
    def n_components(self) -> int:
        return len(self.sticks)

    @property
    def n_occupied(self) -> int:
        return len(np.unique(self.alloc))


@dataclass
class ChainTrace:
    """Post-burn-in retained sweeps plus Metropolis acceptance diagnostics."""

    iters: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    weights: list = field(default_factory=list)      # per sweep: (m_t,)
    atoms: list = field(default_factory=list)        # per sweep: (m_t, dim)
    occupancy: list = field(default_factory=list)    # per sweep: (m_t,) counts
    occupied: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    accepted: int = 0
    proposed: int = 0
    rw_step_final: float = float("nan")

    @property
    def n_kept(self) -> int:
        return len(self.weights)


class _Prepared:
    """Pseudo-observations with precomputed normal scores (hot-path cache)."""

    def __init__(self, pseudo: PseudoDataset):
        self.n = pseudo.n
        self.x = pseudo.x
        self.z1 = np.atleast_1d(std_normal_quantile(pseudo.u))
        self.z2 = np.atleast_1d(std_normal_quantile(pseudo.v))


def _as_prepared(pseudo) -> _Prepared:
    return pseudo if isinstance(pseudo, _Prepared) else _Prepared(pseudo)


def _stick_weights(sticks: np.ndarray) -> np.ndarray:
    w = sticks.copy()
    w[1:] *= np.cumprod(1.0 - sticks[:-1])
    return w


def _open_uniform(rng, size):
    u = rng.random(size)
    return np.where(u == 0.0, 0.5, u)


def _log_prior(beta: np.ndarray, sigma2: float) -> float:
    return -0.5 * float(beta @ beta) / sigma2


def _member_loglik(beta, x, z1, z2, spec) -> float:
    rho = clamped_rho(eval_calibration(spec, beta, x))
    return float(np.sum(gaussian_copula_logpdf_scores(z1, z2, rho)))


def init_state(pseudo, prior: PriorConfig, spec: CalibrationSpec, rng) -> MixtureState:
    """All observations start in a single component.

    The starting atom is the best of ``_INIT_CANDIDATES`` base-measure draws
    under the penalized log likelihood, polished by a short Nelder-Mead
    run. The base measure concentrates on near-singular correlations, so a
    raw draw can leave the random walk stranded for the paper-scale sweep
    budget; the start point does not affect the target distribution.
    """
    data = _as_prepared(pseudo)
    sticks = np.clip(rng.beta(1.0, prior.total_mass, 1), _STICK_LO, _STICK_HI)

    candidates = rng.normal(0.0, np.sqrt(prior.base_sigma2),
                            (_INIT_CANDIDATES, spec.dim))

    def penalized(beta):
        return -(_member_loglik(beta, data.x, data.z1, data.z2, spec)
                 + _log_prior(beta, prior.base_sigma2))

    best = candidates[int(np.argmin([penalized(c) for c in candidates]))]
    result = minimize(penalized, best, method="Nelder-Mead",
                      options={"maxiter": 400, "xatol": 1e-4, "fatol": 1e-6})
    atoms = result.x[np.newaxis, :].copy()

    weights = _stick_weights(sticks)
    alloc = np.zeros(data.n, dtype=int)
    slices = weights[alloc] * _open_uniform(rng, data.n)
    return MixtureState(sticks=sticks, weights=weights, slices=slices,
                        alloc=alloc, atoms=atoms)


def update_sticks(state: MixtureState, prior: PriorConfig, rng) -> MixtureState:
    """Resample every instantiated stick from its Beta full conditional.

    Component j gets Be(1 + #{alloc = j}, total_mass + #{alloc > j}); for
    unoccupied tail components both counts vanish and the draw is the
    Be(1, total_mass) prior.
    """
    m = state.n_components
    counts = np.bincount(state.alloc, minlength=m).astype(float)
    beyond = counts[::-1].cumsum()[::-1] - counts
    sticks = rng.beta(1.0 + counts, prior.total_mass + beyond)
    state.sticks = np.clip(sticks, _STICK_LO, _STICK_HI)
    state.weights = _stick_weights(state.sticks)
    return state


def update_slices(state: MixtureState, rng) -> MixtureState:
    """Redraw each slice uniformly on (0, weight of its component)."""
    state.slices = state.weights[state.alloc] * _open_uniform(rng, len(state.alloc))
    return state


def extend_to_nstar(state: MixtureState, prior: PriorConfig, rng) -> MixtureState:
    """Instantiate prior components until the unbroken stick mass drops
    below every slice, which guarantees each candidate set is complete."""
    z_min = state.slices.min()
    remaining = float(np.prod(1.0 - state.sticks))
    new_sticks = []
    while remaining >= z_min:
        s = float(np.clip(rng.beta(1.0, prior.total_mass), _STICK_LO, _STICK_HI))
        new_sticks.append(s)
        remaining *= 1.0 - s
        if state.n_components + len(new_sticks) > _MAX_COMPONENTS:
            raise ChainConsistencyError("truncation level exploded")
    if new_sticks:
        dim = state.atoms.shape[1]
        sigma = np.sqrt(prior.base_sigma2)
        state.sticks = np.concatenate([state.sticks, new_sticks])
        state.atoms = np.vstack([state.atoms,
                                 rng.normal(0.0, sigma, (len(new_sticks), dim))])
        state.weights = _stick_weights(state.sticks)
    return state


def _loglik_matrix(state, data, spec):
    """(n, m) log copula density of each observation under each component."""
    theta = eval_calibration(spec, state.atoms, data.x)  # (m, n)
    rho = clamped_rho(np.atleast_2d(theta))
    return gaussian_copula_logpdf_scores(data.z1[np.newaxis, :],
                                         data.z2[np.newaxis, :], rho).T


def update_allocations(state: MixtureState, pseudo, spec: CalibrationSpec, rng,
                       prior_only: bool = False) -> MixtureState:
    """Draw each allocation from the candidate components its slice admits,
    weighted by the conditional copula density (Gumbel-max trick)."""
    data = _as_prepared(pseudo)
    m = state.n_components
    mask = state.weights[np.newaxis, :] > state.slices[:, np.newaxis]
    if not mask.any(axis=1).all():
        raise ChainConsistencyError("observation with empty candidate set")
    if prior_only:
        logdens = np.zeros((data.n, m))
    else:
        logdens = _loglik_matrix(state, data, spec)
    scores = np.where(mask, logdens + rng.gumbel(size=(data.n, m)), -np.inf)
    state.alloc = np.argmax(scores, axis=1)
    return state


def _trim(state: MixtureState) -> None:
    # Components beyond the highest allocated index are prior draws and get
    # regenerated during the next extension, so dropping them is exact.
    k = int(state.alloc.max()) + 1
    if k < state.n_components:
        state.sticks = state.sticks[:k]
        state.weights = state.weights[:k]
        state.atoms = state.atoms[:k]


def update_betas(state: MixtureState, pseudo, prior: PriorConfig,
                 spec: CalibrationSpec, rw_step: float, rng,
                 prior_only: bool = False) -> tuple[int, int, int, int]:
    """One Metropolis-Hastings move per occupied component.

    Occupancy above ``_INDEP_MAX_OCCUPANCY``: symmetric random walk with
    scale rw_step / sqrt(occupancy). At or below it: independence proposal
    from the base measure (the prior terms cancel against the proposal
    density, leaving the likelihood ratio). Unoccupied instantiated atoms
    are refreshed from the base measure, their full conditional.

    Returns (accepted, proposed, rw_accepted, rw_proposed); the random-walk
    counts drive burn-in scale adaptation.
    """
    data = _as_prepared(pseudo)
    m = state.n_components
    dim = state.atoms.shape[1]
    sigma = np.sqrt(prior.base_sigma2)
    counts = np.bincount(state.alloc, minlength=m)

    empty = counts == 0
    if empty.any():
        state.atoms[empty] = rng.normal(0.0, sigma, (int(empty.sum()), dim))

    accepted = rw_accepted = rw_proposed = 0
    occupied = np.flatnonzero(counts)
    for j in occupied:
        members = state.alloc == j
        x, z1, z2 = data.x[members], data.z1[members], data.z2[members]
        current = state.atoms[j]
        random_walk = counts[j] > _INDEP_MAX_OCCUPANCY
        if random_walk:
            step = rw_step / np.sqrt(counts[j])
            proposal = current + step * rng.standard_normal(dim)
            delta = (_log_prior(proposal, prior.base_sigma2)
                     - _log_prior(current, prior.base_sigma2))
            rw_proposed += 1
        else:
            proposal = rng.normal(0.0, sigma, dim)
            delta = 0.0
        if not prior_only:
            delta += (_member_loglik(proposal, x, z1, z2, spec)
                      - _member_loglik(current, x, z1, z2, spec))
        u = rng.random()
        if delta >= 0.0 or u < np.exp(delta):
            state.atoms[j] = proposal
            accepted += 1
            if random_walk:
                rw_accepted += 1
    return accepted, len(occupied), rw_accepted, rw_proposed


def validate_state(state: MixtureState) -> None:
    """Raise ``ChainConsistencyError`` on any violated state invariant."""
    m = state.n_components
    if len(state.weights) != m or state.atoms.shape[0] != m:
        raise ChainConsistencyError("sticks, weights and atoms disagree in length")
    if not np.all(state.weights > 0.0):
        raise ChainConsistencyError("nonpositive mixture weight")
    if not np.all(np.cumsum(state.weights) < 1.0):
        raise ChainConsistencyError("stick-breaking partial sum reached 1")
    if state.alloc.min() < 0 or state.alloc.max() >= m:
        raise ChainConsistencyError("allocation outside instantiated components")
    if not np.all(state.slices > 0.0):
        raise ChainConsistencyError("slice variable not strictly positive")
    if not np.all(state.slices < state.weights[state.alloc]):
        raise ChainConsistencyError("slice variable at or above its component weight")
    if not np.all(np.isfinite(state.atoms)):
        raise ChainConsistencyError("non-finite atom")


def state_log_likelihood(state: MixtureState, pseudo, spec: CalibrationSpec) -> float:
    """Joint data log-density of the augmented model at the current state.

    Returns -inf when a slice indicator fails; otherwise the sum of the
    conditional copula log-densities at the allocated components.
    """
    data = _as_prepared(pseudo)
    if np.any(state.slices >= state.weights[state.alloc]):
        return float("-inf")
    total = 0.0
    for j in np.unique(state.alloc):
        members = state.alloc == j
        total += _member_loglik(state.atoms[j], data.x[members],
                                data.z1[members], data.z2[members], spec)
    return total


def run_chain(pseudo: PseudoDataset, prior: PriorConfig, spec: CalibrationSpec,
              config: MCMCConfig, prior_only: bool = False,
              check_invariants: bool = False) -> ChainTrace:
    """Run the full Gibbs sweep for ``config.iterations`` sweeps and record
    every ``config.thin``-th state after burn-in.

    Fully deterministic given ``config.seed``. ``prior_only`` forces the
    likelihood factor to one (used to check the prior clustering
    behaviour); ``check_invariants`` validates the state after every sweep.
    """
    data = _Prepared(pseudo)
    rng = np.random.default_rng(config.seed)
    state = init_state(data, prior, spec, rng)

    trace = ChainTrace()
    kept_iters: list[int] = []
    occupied: list[int] = []
    rw_step = config.rw_step
    window_acc = 0
    window_prop = 0

    for it in range(1, config.iterations + 1):
        update_sticks(state, prior, rng)
        update_slices(state, rng)
        extend_to_nstar(state, prior, rng)
        update_allocations(state, data, spec, rng, prior_only=prior_only)
        _trim(state)
        acc, prop, rw_acc, rw_prop = update_betas(
            state, data, prior, spec, rw_step, rng, prior_only=prior_only)
        trace.accepted += acc
        trace.proposed += prop
        window_acc += rw_acc
        window_prop += rw_prop

        # Scale adaptation is confined to burn-in, so retained sweeps target
        # the exact posterior.
        if it <= config.burn_in and it % _ADAPT_INTERVAL == 0 and window_prop:
            rate = window_acc / window_prop
            if rate < _ADAPT_TARGET[0]:
                rw_step = max(rw_step * 0.7, _STEP_BOUNDS[0])
            elif rate > _ADAPT_TARGET[1]:
                rw_step = min(rw_step * 1.4, _STEP_BOUNDS[1])
            window_acc = 0
            window_prop = 0

        if check_invariants:
            validate_state(state)

        if it > config.burn_in and (it - config.burn_in - 1) % config.thin == 0:
            counts = np.bincount(state.alloc, minlength=state.n_components)
            kept_iters.append(it)
            trace.weights.append(state.weights.copy())
            trace.atoms.append(state.atoms.copy())
            trace.occupancy.append(counts)
            occupied.append(int((counts > 0).sum()))

    trace.iters = np.asarray(kept_iters, dtype=int)
    trace.occupied = np.asarray(occupied, dtype=int)
    trace.rw_step_final = rw_step
    return trace
