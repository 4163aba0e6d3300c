"""Group-dependent mixture of product-multinomial distributions.

The joint probability mass function of a categorical response vector
``Y = (Y_1, ..., Y_p)`` and a group label ``X`` is represented as

    pi(y, x) = pi_X(x) * sum_h nu[x, h] * prod_j profiles[h, j, y_j]

i.e. the conditional law of ``Y`` given ``X = x`` is a mixture of products
of univariate categorical kernels, with only the mixing weights depending
on the group. Everything in this module is an immutable value; evaluation
is read-only and safe to share across workers.

Categories, groups, variables and components are 1-based in the public
API (matching the usual statistical convention) and 0-based in the stored
arrays; the conversion happens at the call boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, DimensionError

# Brute-force enumeration (full_tensor, marginal maps) refuses spaces larger
# than this many cells so oracle-style checks stay sub-second.
ORACLE_CELL_LIMIT = 10_000_000

# Products of per-variable probabilities switch to log scale above this many
# variables. Linear scale is exact and fast for the sizes this model targets
# (p=17, d=4 gives products >= 4^-17), but long products must not silently
# underflow.
LOG_PRODUCT_THRESHOLD = 30


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def as_probability_vector(values, length: int | None = None, name: str = "probability vector",
                          tol: float = 1e-12) -> np.ndarray:
    """Validate and freeze a probability vector.

    Entries must lie in [0, 1] and sum to 1 within ``tol``. Returns a
    read-only float64 array.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionError(f"{name} must have length {length}, got {v.shape[0]}")
    if v.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    if np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError(f"{name} has entries outside [0, 1]")
    if abs(float(v.sum()) - 1.0) > tol:
        raise ValueError(f"{name} sums to {v.sum()!r}, not 1 within {tol}")
    return _readonly(v.copy())


@dataclass(frozen=True)
class CategorySpace:
    """Dimensions of the problem: p variables with d_j levels each, k groups,
    and the mixture truncation level H."""

    p: int
    d: tuple[int, ...]
    k: int
    H: int = 1

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if self.p < 1:
            raise ValueError(f"need at least one variable, got p={self.p}")
        if len(self.d) != self.p:
            raise DimensionError(f"d has {len(self.d)} entries for p={self.p} variables")
        if any(dj < 2 for dj in self.d):
            raise ValueError(f"every variable needs >= 2 levels, got d={self.d}")
        if self.k < 1:
            raise ValueError(f"need at least one group, got k={self.k}")
        if self.H < 1:
            raise ValueError(f"truncation level must be >= 1, got H={self.H}")

    @property
    def d_max(self) -> int:
        return max(self.d)

    @property
    def n_cells(self) -> int:
        """Total number of joint cells |Y x X| (exact integer arithmetic)."""
        return self.k * math.prod(self.d)

    def check_cells(self, limit: int = ORACLE_CELL_LIMIT) -> None:
        if self.n_cells > limit:
            raise CapacityError(
                f"space has {self.n_cells} cells, above the enumeration limit {limit}")


@dataclass(frozen=True)
class ComponentProfiles:
    """Per-component categorical kernels.

    ``probs[h, j, c]`` is the probability that variable j+1 takes level c+1
    in component h+1. The array is padded to the largest level count; padded
    cells are exactly zero. Zero probabilities at real levels are allowed.
    """

    space: CategorySpace
    probs: np.ndarray  # (H, p, d_max)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        H, p, dmax = self.space.H, self.space.p, self.space.d_max
        if probs.shape != (H, p, dmax):
            raise DimensionError(
                f"profiles must have shape {(H, p, dmax)}, got {probs.shape}")
        for j, dj in enumerate(self.space.d):
            block = probs[:, j, :dj]
            if np.any(block < 0.0) or np.any(block > 1.0):
                raise ValueError(f"profile entries for variable {j + 1} outside [0, 1]")
            if np.any(np.abs(block.sum(axis=1) - 1.0) > 1e-12):
                raise ValueError(f"profile rows for variable {j + 1} do not sum to 1")
            if dj < dmax and np.any(probs[:, j, dj:] != 0.0):
                raise ValueError(f"padding cells for variable {j + 1} must be zero")
        object.__setattr__(self, "probs", _readonly(probs))

    def pmf(self, h: int, j: int) -> np.ndarray:
        """Kernel of variable j in component h (both 1-based)."""
        if not 1 <= h <= self.space.H:
            raise DimensionError(f"component {h} out of range 1..{self.space.H}")
        if not 1 <= j <= self.space.p:
            raise DimensionError(f"variable {j} out of range 1..{self.space.p}")
        return self.probs[h - 1, j - 1, :self.space.d[j - 1]]

    @classmethod
    def from_rows(cls, space: CategorySpace, rows) -> "ComponentProfiles":
        """Build from nested rows ``rows[h][j]`` of per-variable PMFs."""
        probs = np.zeros((space.H, space.p, space.d_max))
        for h in range(space.H):
            for j in range(space.p):
                v = np.asarray(rows[h][j], dtype=float)
                if v.shape != (space.d[j],):
                    raise DimensionError(
                        f"kernel (h={h + 1}, j={j + 1}) must have length {space.d[j]}")
                probs[h, j, :space.d[j]] = v
        return cls(space, probs)


@dataclass(frozen=True)
class GroupMixingWeights:
    """Group-specific mixing weights plus the shared vector and test indicator.

    When ``T == 0`` every row of ``nu`` is the shared vector ``upsilon``
    (bitwise equality, not just numerical closeness); when ``T == 1`` the
    rows are free.
    """

    nu: np.ndarray       # (k, H)
    upsilon: np.ndarray  # (H,)
    T: int

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if nu.ndim != 2:
            raise DimensionError(f"nu must be a (k, H) matrix, got shape {nu.shape}")
        for x in range(nu.shape[0]):
            as_probability_vector(nu[x], name=f"nu for group {x + 1}")
        ups = as_probability_vector(self.upsilon, length=nu.shape[1], name="upsilon")
        if self.T not in (0, 1):
            raise ValueError(f"testing indicator must be 0 or 1, got {self.T}")
        if self.T == 0 and not all(np.array_equal(nu[x], ups) for x in range(nu.shape[0])):
            raise ValueError("T=0 requires every group weight vector to equal upsilon exactly")
        object.__setattr__(self, "nu", _readonly(nu))
        object.__setattr__(self, "upsilon", ups)
        object.__setattr__(self, "T", int(self.T))


@dataclass(frozen=True)
class JointModel:
    """One full parameter configuration of the factorized joint PMF."""

    space: CategorySpace
    pi_x: np.ndarray
    profiles: ComponentProfiles
    weights: GroupMixingWeights

    def __post_init__(self):
        pi_x = as_probability_vector(self.pi_x, length=self.space.k, name="pi_x")
        object.__setattr__(self, "pi_x", pi_x)
        if self.profiles.space != self.space:
            raise DimensionError("profiles were built for a different space")
        if self.weights.nu.shape != (self.space.k, self.space.H):
            raise DimensionError(
                f"nu must have shape {(self.space.k, self.space.H)}, "
                f"got {self.weights.nu.shape}")
        # Normalization of each conditional PMF, via the analytic collapse
        # sum_y sum_h nu prod_j pi = sum_h nu_h prod_j (sum_c pi_hj(c)):
        # O(H p) instead of enumerating |Y| cells.
        rowsums = self.profiles.probs.sum(axis=2)          # (H, p)
        total_per_h = rowsums.prod(axis=1)                 # (H,)
        cond_mass = self.weights.nu @ total_per_h          # (k,)
        if np.any(np.abs(cond_mass - 1.0) > 1e-10):
            raise ValueError(
                f"conditional PMFs do not sum to 1 within 1e-10 (masses {cond_mass})")

    # -- point evaluation ---------------------------------------------------

    def _check_cell(self, y, x: int) -> tuple[np.ndarray, int]:
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (self.space.p,):
            raise DimensionError(f"y must have length p={self.space.p}, got shape {y.shape}")
        for j, (yj, dj) in enumerate(zip(y, self.space.d)):
            if not 1 <= yj <= dj:
                raise DimensionError(
                    f"category {yj} out of range 1..{dj} for variable {j + 1}")
        if not 1 <= x <= self.space.k:
            raise DimensionError(f"group {x} out of range 1..{self.space.k}")
        return y - 1, x - 1

    def conditional_pmf(self, y, x: int, log_scale: bool | None = None) -> float:
        """pr(Y = y | X = x) for a 1-based cell ``y`` and group ``x``.

        ``log_scale=None`` selects the evaluation path automatically: linear
        products for p <= LOG_PRODUCT_THRESHOLD, log-space otherwise. Zero
        kernel probabilities are mapped to -inf in log space and drop out of
        the mixture sum.
        """
        y0, x0 = self._check_cell(y, x)
        gathered = self.profiles.probs[:, np.arange(self.space.p), y0]  # (H, p)
        nu_x = self.weights.nu[x0]
        if log_scale is None:
            log_scale = self.space.p > LOG_PRODUCT_THRESHOLD
        if not log_scale:
            return float(nu_x @ gathered.prod(axis=1))
        with np.errstate(divide="ignore"):
            logs = np.log(gathered).sum(axis=1) + np.log(nu_x)
        m = logs.max()
        if m == -np.inf:
            return 0.0
        return float(np.exp(m) * np.exp(logs - m).sum())

    def joint_pmf(self, y, x: int, log_scale: bool | None = None) -> float:
        """pr(Y = y, X = x) = pr(Y = y | X = x) pr(X = x)."""
        return self.conditional_pmf(y, x, log_scale=log_scale) * float(self.pi_x[x - 1])

    # -- marginalization ----------------------------------------------------

    def _component_weights(self, x: int | None) -> np.ndarray:
        if x is None:
            # Unconditional: mix the group-specific weights through pi_X.
            return self.pi_x @ self.weights.nu
        if not 1 <= x <= self.space.k:
            raise DimensionError(f"group {x} out of range 1..{self.space.k}")
        return self.weights.nu[x - 1]

    def marginal_pmf(self, subset: Sequence[int], x: int | None = None) -> dict[tuple[int, ...], float]:
        """Marginal PMF of the variables in ``subset`` (1-based indices).

        With ``x`` given this is the group-conditional marginal
        sum_h nu[x, h] prod_{j in subset} profiles[h, j, .]; with ``x=None``
        the group variable is mixed out through pi_X. Returns a dict keyed by
        1-based category tuples in odometer order.
        """
        subset = tuple(int(j) for j in subset)
        if len(subset) == 0:
            raise ValueError("subset must be nonempty")
        if len(set(subset)) != len(subset):
            raise ValueError(f"subset has duplicate indices: {subset}")
        for j in subset:
            if not 1 <= j <= self.space.p:
                raise DimensionError(f"variable {j} out of range 1..{self.space.p}")
        dims = tuple(self.space.d[j - 1] for j in subset)
        if math.prod(dims) > ORACLE_CELL_LIMIT:
            raise CapacityError(
                f"marginal table has {math.prod(dims)} cells, above {ORACLE_CELL_LIMIT}")
        w = self._component_weights(x)
        table = np.zeros(dims)
        for h in range(self.space.H):
            if w[h] == 0.0:
                continue
            factors = [self.profiles.probs[h, j - 1, :self.space.d[j - 1]] for j in subset]
            table += w[h] * reduce(np.multiply.outer, factors)
        return {tuple(int(c) + 1 for c in idx): float(v) for idx, v in np.ndenumerate(table)}

    def full_tensor(self) -> np.ndarray:
        """Dense joint PMF over all of Y x X.

        Axes are the p variables followed by the group, all 0-based. Built by
        accumulating rank-1 component tensors, so it provides an evaluation
        route independent of :meth:`conditional_pmf` for cross-checks.
        Refuses spaces above ORACLE_CELL_LIMIT cells.
        """
        self.space.check_cells()
        cond = np.zeros(self.space.d + (self.space.k,))
        for h in range(self.space.H):
            factors = [self.profiles.probs[h, j, :self.space.d[j]] for j in range(self.space.p)]
            rank1 = reduce(np.multiply.outer, factors)
            cond += rank1[..., None] * self.weights.nu[:, h]
        return cond * self.pi_x

    # -- (de)serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "space": {"p": self.space.p, "d": list(self.space.d),
                      "k": self.space.k, "H": self.space.H},
            "pi_x": self.pi_x.tolist(),
            "profiles": self.profiles.probs.tolist(),
            "nu": self.weights.nu.tolist(),
            "upsilon": self.weights.upsilon.tolist(),
            "T": self.weights.T,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "JointModel":
        sp = doc["space"]
        space = CategorySpace(p=int(sp["p"]), d=tuple(sp["d"]), k=int(sp["k"]), H=int(sp["H"]))
        profiles = ComponentProfiles(space, np.asarray(doc["profiles"], dtype=float))
        weights = GroupMixingWeights(
            nu=np.asarray(doc["nu"], dtype=float),
            upsilon=np.asarray(doc["upsilon"], dtype=float),
            T=int(doc["T"]),
        )
        return cls(space=space, pi_x=np.asarray(doc["pi_x"], dtype=float),
                   profiles=profiles, weights=weights)
