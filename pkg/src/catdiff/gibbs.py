"""Gibbs sampler for the group-dependent product-multinomial mixture.

Each iteration runs five full-conditional updates in a fixed order:

  [1] group marginal pi_X from its Dirichlet full conditional,
  [2] per-unit latent components z_i (the hot sweep, compiled when possible),
  [3] every per-component kernel from its Dirichlet full conditional,
  [4] the testing indicator T from a collapsed Bernoulli whose odds are a
      ratio of Dirichlet-multinomial marginal likelihoods of the component
      counts (shared vs. group-specific weights),
  [5] the mixing weights: one shared draw copied to every group when T=0,
      k independent draws when T=1.

Steps [3]-[5] use counts from the z drawn in step [2] of the same
iteration. Within step [2] units are updated in index order; their full
conditionals are mutually independent given the parameters, so the order
is immaterial. All Gamma-function arithmetic runs in log scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from . import backend
from .errors import DimensionError, NumericalDegeneracyError
from .model import CategorySpace, ComponentProfiles, GroupMixingWeights
from .priors import (PriorConfig, RngSpec, _sample_dirichlet_rows,
                     profile_concentration, sample_dirichlet, sample_prior_model)
from .simulate import Dataset


@dataclass(frozen=True)
class McmcSchedule:
    n_iter: int = 5000
    burn_in: int = 1000
    thin: int = 1

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < n_iter, got {self.burn_in}/{self.n_iter}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin

    def to_dict(self) -> dict:
        return {"n_iter": self.n_iter, "burn_in": self.burn_in, "thin": self.thin}


@dataclass
class SufficientStats:
    """Count bookkeeping for one latent assignment.

    n_x    units per group, length k        (fixed by the data)
    n_h    units per component, length H
    n_hx   units per (group, component), shape (k, H)
    n_jhc  units in component h with Y_j = c, shape (p, H, d_max)
    """

    n_x: np.ndarray
    n_h: np.ndarray
    n_hx: np.ndarray
    n_jhc: np.ndarray

    def validate(self, n: int) -> None:
        if int(self.n_x.sum()) != n:
            raise ValueError("group counts do not sum to n")
        if int(self.n_h.sum()) != n:
            raise ValueError("component counts do not sum to n")
        if not np.array_equal(self.n_hx.sum(axis=1), self.n_x):
            raise ValueError("n_hx rows do not sum to the group counts")
        if not np.array_equal(self.n_hx.sum(axis=0), self.n_h):
            raise ValueError("n_hx columns do not sum to the component counts")
        if not np.all(self.n_jhc.sum(axis=2) == self.n_h[None, :]):
            raise ValueError("per-variable level counts do not sum to the component counts")


def compute_stats(data: Dataset, z: np.ndarray) -> SufficientStats:
    """All four count families for assignment ``z`` (0-based components)."""
    space = data.space
    H, k, p, dmax = space.H, space.k, space.p, space.d_max
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (data.n,):
        raise DimensionError(f"z must have shape ({data.n},), got {z.shape}")
    if z.size and (z.min() < 0 or z.max() >= H):
        raise DimensionError(f"z entries out of range 0..{H - 1}")
    n_x = np.bincount(data.x, minlength=k)
    n_h = np.bincount(z, minlength=H)
    n_hx = np.bincount(data.x * H + z, minlength=k * H).reshape(k, H)
    n_jhc = np.zeros((p, H, dmax), dtype=np.int64)
    for j in range(p):
        n_jhc[j] = np.bincount(z * dmax + data.y[:, j], minlength=H * dmax).reshape(H, dmax)
    return SufficientStats(n_x=n_x, n_h=n_h, n_hx=n_hx, n_jhc=n_jhc)


# -- full-conditional updates --------------------------------------------------


def update_group_marginal(stats: SufficientStats, config: PriorConfig,
                          rng: np.random.Generator) -> np.ndarray:
    """Step [1]: pi_X ~ Dirichlet(alpha + group counts)."""
    return sample_dirichlet(config.alpha + stats.n_x, rng)


def update_latent_classes(data: Dataset, profiles, nu: np.ndarray,
                          rng: np.random.Generator, *, sweep=None,
                          z_out: np.ndarray | None = None,
                          scratch: np.ndarray | None = None) -> np.ndarray:
    """Step [2]: resample every unit's component from its categorical full
    conditional, computed stably via max subtraction in log scale.

    Raises NumericalDegeneracyError naming the first unit whose observed
    cell has probability zero under every component.
    """
    probs = profiles.probs if isinstance(profiles, ComponentProfiles) else np.asarray(profiles)
    H = probs.shape[0]
    if sweep is None:
        _, sweep = backend.get_sweep()
    with np.errstate(divide="ignore"):
        log_prof = np.log(probs)
        log_nu = np.log(np.ascontiguousarray(nu))
    if z_out is None:
        z_out = np.empty(data.n, dtype=np.int64)
    if scratch is None:
        scratch = np.empty(H)
    u = rng.random(data.n)
    bad = sweep(log_nu, data.x, log_prof, data.y, u, z_out, scratch)
    if bad >= 0:
        raise NumericalDegeneracyError(
            f"unit {bad + 1}: every mixture component assigns probability zero "
            f"to its observed cell")
    return z_out


def update_component_profiles(data: Dataset, z: np.ndarray, config: PriorConfig,
                              rng: np.random.Generator, *,
                              stats: SufficientStats | None = None) -> np.ndarray:
    """Step [3]: independent Dirichlet(gamma_j + counts) draw per (h, j).

    Returns the (H, p, d_max) kernel array; components with no units fall
    back to prior draws automatically (their counts are zero).
    """
    if stats is None:
        stats = compute_stats(data, z)
    conc = profile_concentration(config, data.space) + stats.n_jhc.transpose(1, 0, 2)
    return _sample_dirichlet_rows(conc, rng)


def _log_dirichlet_multinomial(counts: np.ndarray, a: float, H: int) -> float:
    # log integral prod_h w_h^{c_h} dDir(a, ..., a); ordered units, so no
    # multinomial coefficient. At a = 1/H the lgamma(H a) terms vanish and
    # this reduces to the usual Gamma-product display.
    c = np.asarray(counts, dtype=float)
    total = c.sum()
    return float(gammaln(H * a) - gammaln(H * a + total)
                 + gammaln(a + c).sum() - H * gammaln(a))


def log_bf_h0_h1(stats: SufficientStats, config: PriorConfig) -> float:
    """Log marginal-likelihood ratio of the component counts, shared weights
    over group-specific weights: log m(n_h) - sum_x log m(n_hx).

    This is the factor multiplying the prior odds pr(H0)/pr(H1) inside the
    step-[4] Bernoulli probability. Entirely log-Gamma arithmetic, so large
    counts cannot overflow. Returns exactly 0 for empty data.
    """
    a = config.nu_concentration
    H = config.h_bar
    out = _log_dirichlet_multinomial(stats.n_h, a, H)
    for x in range(stats.n_hx.shape[0]):
        out -= _log_dirichlet_multinomial(stats.n_hx[x], a, H)
    return out


def pr_alternative(stats: SufficientStats, config: PriorConfig) -> float:
    """Closed-form pr(T = 1 | counts) of the step-[4] full conditional."""
    if config.pr_h1 <= 0.0:
        return 0.0
    if config.pr_h1 >= 1.0:
        return 1.0
    log_odds = (np.log(config.pr_h1) - np.log1p(-config.pr_h1)
                - log_bf_h0_h1(stats, config))
    return float(expit(log_odds))


def update_testing_indicator(stats: SufficientStats, config: PriorConfig,
                             rng: np.random.Generator) -> int:
    """Step [4]: Bernoulli draw of the testing indicator."""
    return int(rng.random() < pr_alternative(stats, config))


def update_mixing_weights(stats: SufficientStats, T: int, config: PriorConfig,
                          rng: np.random.Generator) -> GroupMixingWeights:
    """Step [5]: shared draw copied to every group when T=0; k independent
    group draws when T=1.

    Under T=1 the shared vector upsilon drops out of the likelihood, so it
    is refreshed from its full conditional, which is its prior; it is kept
    only to keep the weights object complete.
    """
    a = config.nu_concentration
    H = config.h_bar
    k = stats.n_x.shape[0]
    if T == 0:
        upsilon = sample_dirichlet(a + stats.n_h, rng)
        nu = np.tile(upsilon, (k, 1))
    else:
        nu = _sample_dirichlet_rows(a + stats.n_hx.astype(float), rng)
        upsilon = sample_dirichlet(np.full(H, a), rng)
    return GroupMixingWeights(nu=nu, upsilon=upsilon, T=int(T))


# -- chain orchestration ---------------------------------------------------------


@dataclass(frozen=True)
class ChainOutput:
    """Thinned post-burn-in draws plus run metadata.

    ``profiles`` holds raw per-component kernel draws; component labels are
    not identifiable (the sampler performs no relabeling), so only
    permutation-invariant functionals of these draws are directly
    interpretable. ``occupancy`` counts the nonempty components at each
    retained draw; values pinned at H suggest the truncation is saturated
    and should be raised.
    """

    space: CategorySpace
    config: PriorConfig
    schedule: McmcSchedule
    rng: RngSpec | None
    backend: str
    n_units: int
    pi_x: np.ndarray       # (S, k)
    profiles: np.ndarray   # (S, H, p, d_max)
    nu: np.ndarray         # (S, k, H)
    T: np.ndarray          # (S,) int8
    occupancy: np.ndarray  # (S,) int64

    @property
    def n_draws(self) -> int:
        return self.T.shape[0]


def run_chain(data: Dataset, config: PriorConfig, schedule: McmcSchedule,
              rng: RngSpec, *, validate: bool = False,
              backend_name: str | None = None) -> ChainOutput:
    """Run one chain and return its retained draws.

    The initial state is a prior draw and the initial assignment is uniform
    over components; neither choice affects the stationary law. Output is
    bitwise-reproducible for a fixed (rng, backend) pair.
    """
    data = data.with_truncation(config.h_bar)
    space = data.space
    config.check_space(space)
    kernel_name, sweep = backend.get_sweep(backend_name)
    gen = rng.generator()
    n, k, H = data.n, space.k, space.H

    model0 = sample_prior_model(config, space, gen)
    profiles = np.array(model0.profiles.probs)
    nu = np.array(model0.weights.nu)
    gen.integers(0, H, size=n)  # initial uniform assignment; replaced by step [2]

    S = schedule.n_retained
    out_pi = np.empty((S, k))
    out_prof = np.empty((S, H, space.p, space.d_max))
    out_nu = np.empty((S, k, H))
    out_t = np.empty(S, dtype=np.int8)
    out_occ = np.empty(S, dtype=np.int64)

    alpha_post = config.alpha + np.bincount(data.x, minlength=k)
    z_buf = np.empty(n, dtype=np.int64)
    scratch = np.empty(H)

    for it in range(1, schedule.n_iter + 1):
        pi_x = sample_dirichlet(alpha_post, gen)
        z = update_latent_classes(data, profiles, nu, gen,
                                  sweep=sweep, z_out=z_buf, scratch=scratch)
        stats = compute_stats(data, z)
        if validate:
            stats.validate(n)
        profiles = update_component_profiles(data, z, config, gen, stats=stats)
        T = update_testing_indicator(stats, config, gen)
        weights = update_mixing_weights(stats, T, config, gen)
        nu = weights.nu
        if it > schedule.burn_in and (it - schedule.burn_in) % schedule.thin == 0:
            s = (it - schedule.burn_in) // schedule.thin - 1
            out_pi[s] = pi_x
            out_prof[s] = profiles
            out_nu[s] = nu
            out_t[s] = T
            out_occ[s] = int((stats.n_h > 0).sum())

    return ChainOutput(space=space, config=config, schedule=schedule, rng=rng,
                       backend=kernel_name, n_units=n, pi_x=out_pi,
                       profiles=out_prof, nu=out_nu, T=out_t, occupancy=out_occ)
