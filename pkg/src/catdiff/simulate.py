"""Synthetic data generation and dataset ingestion.

Datasets hold integer-coded categorical observations: a response matrix
``y`` of shape (n, p) and a group vector ``x`` of length n, both 0-based
internally. Files on disk and constructor helpers use 1-based codes, the
external convention.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DimensionError, IngestionError
from .model import CategorySpace, ComponentProfiles, GroupMixingWeights, JointModel
from .priors import RngSpec, sample_dirichlet

DEFAULT_GROUP_COLUMN = "group"


@dataclass(frozen=True)
class Dataset:
    """n observations of (y, x). Arrays are 0-based and read-only."""

    y: np.ndarray  # (n, p) int64, entry in [0, d_j)
    x: np.ndarray  # (n,)   int64, entry in [0, k)
    space: CategorySpace
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        x = np.ascontiguousarray(self.x, dtype=np.int64)
        if y.ndim != 2 or y.shape[1] != self.space.p:
            raise DimensionError(f"y must have shape (n, {self.space.p}), got {y.shape}")
        if x.shape != (y.shape[0],):
            raise DimensionError(f"x must have shape ({y.shape[0]},), got {x.shape}")
        for j, dj in enumerate(self.space.d):
            col = y[:, j]
            if col.size and (col.min() < 0 or col.max() >= dj):
                raise ValueError(f"variable {j + 1} has codes outside 1..{dj}")
        if x.size and (x.min() < 0 or x.max() >= self.space.k):
            raise ValueError(f"group codes outside 1..{self.space.k}")
        if self.columns is not None:
            cols = tuple(str(c) for c in self.columns)
            if len(cols) != self.space.p:
                raise DimensionError(f"need {self.space.p} column names, got {len(cols)}")
            object.__setattr__(self, "columns", cols)
        y.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @classmethod
    def from_one_based(cls, y, x, space: CategorySpace, columns=None) -> "Dataset":
        y = np.asarray(y, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        return cls(y=y - 1, x=x - 1, space=space, columns=columns)

    def with_truncation(self, h_bar: int) -> "Dataset":
        """Same data, space rebound to truncation level ``h_bar``."""
        return replace(self, space=replace(self.space, H=int(h_bar)))


def _categorical_rows(pvals: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row: pvals (m, L) against uniforms u (m,)."""
    cum = np.cumsum(pvals, axis=1)
    idx = (cum < (u * cum[:, -1])[:, None]).sum(axis=1)
    return np.minimum(idx, pvals.shape[1] - 1)


def generate_from_model(model: JointModel, n_per_group, rng: np.random.Generator) -> Dataset:
    """Ancestral sampling with fixed per-group counts.

    Groups are laid out in blocks (all of group 1 first, then group 2, ...);
    within each unit a latent component is drawn from the group's mixing
    weights and each variable from that component's kernel. The group
    marginal pi_X plays no role because counts are fixed by design.
    """
    counts = [int(c) for c in n_per_group]
    if len(counts) != model.space.k:
        raise DimensionError(f"need {model.space.k} group counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError(f"group counts must be nonnegative, got {counts}")
    n = sum(counts)
    x = np.repeat(np.arange(model.space.k, dtype=np.int64), counts)
    z = _categorical_rows(model.weights.nu[x], rng.random(n)) if n else np.zeros(0, np.int64)
    y = np.zeros((n, model.space.p), dtype=np.int64)
    for j in range(model.space.p):
        pv = model.profiles.probs[z, j, :model.space.d[j]]
        y[:, j] = _categorical_rows(pv, rng.random(n)) if n else 0
    return Dataset(y=y, x=x, space=model.space)


# -- benchmark scenarios -------------------------------------------------------

# Three stock generating processes over k=2 groups, p=17 four-level variables
# and a rank-5 mixture. Variables outside ACTIVE_VARS share one random kernel
# across all components (no marginal or pairwise structure anywhere); the four
# active variables carry the group/dependence structure:
#   1 - same mixing weights in both groups: full independence of Y and X.
#   2 - group 1 concentrated on component 1: marginals and pairwise structure
#       both shift across groups.
#   3 - like 2 but component 1 tuned so every per-variable marginal matches
#       across groups; only pairwise (higher-order) structure differs.
ACTIVE_VARS = (5, 10, 15, 17)  # 1-based variable indices

_SPIKE_ROWS = [
    (0.85, 0.05, 0.05, 0.05),
    (0.05, 0.85, 0.05, 0.05),
    (0.05, 0.05, 0.85, 0.05),
    (0.05, 0.05, 0.05, 0.85),
]
_COMPONENT1_ROW = {
    1: (0.25, 0.25, 0.25, 0.25),
    2: (0.75, 0.25, 0.00, 0.00),
    3: (0.25, 0.25, 0.25, 0.25),
}
_SHARED_WEIGHTS = (0.0, 0.25, 0.25, 0.25, 0.25)
_GROUP1_WEIGHTS = {
    1: _SHARED_WEIGHTS,
    2: (1.0, 0.0, 0.0, 0.0, 0.0),
    3: (1.0, 0.0, 0.0, 0.0, 0.0),
}


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: int
    n_per_group: tuple[int, ...] = (200, 200)
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in (1, 2, 3):
            raise ValueError(f"unknown scenario {self.scenario}, expected 1, 2 or 3")
        counts = tuple(int(c) for c in self.n_per_group)
        if len(counts) != 2 or any(c < 0 for c in counts):
            raise ValueError(f"n_per_group must be two nonnegative counts, got {self.n_per_group}")
        object.__setattr__(self, "n_per_group", counts)


def scenario_model(scenario: int, rng: np.random.Generator) -> JointModel:
    """True generating model for one scenario.

    The inactive variables draw a single Dirichlet(0.25, 0.25, 0.25, 0.25)
    kernel per variable from ``rng``, reused identically across all five
    components; the active variables use the fixed rows above. pi_X is set
    to (1/2, 1/2), the balanced design the fixed group counts realize.
    """
    space = CategorySpace(p=17, d=(4,) * 17, k=2, H=5)
    active0 = {j - 1 for j in ACTIVE_VARS}
    probs = np.zeros((5, 17, 4))
    for j in range(17):
        if j in active0:
            probs[0, j] = _COMPONENT1_ROW[scenario]
            for h in range(1, 5):
                probs[h, j] = _SPIKE_ROWS[h - 1]
        else:
            shared = sample_dirichlet(np.full(4, 0.25), rng)
            probs[:, j] = shared
    nu1 = np.asarray(_GROUP1_WEIGHTS[scenario])
    nu2 = np.asarray(_SHARED_WEIGHTS)
    if scenario == 1:
        weights = GroupMixingWeights(nu=np.tile(nu2, (2, 1)), upsilon=nu2, T=0)
    else:
        weights = GroupMixingWeights(nu=np.stack([nu1, nu2]),
                                     upsilon=(nu1 + nu2) / 2.0, T=1)
    return JointModel(space=space, pi_x=np.array([0.5, 0.5]),
                      profiles=ComponentProfiles(space, probs), weights=weights)


def build_scenario(spec: ScenarioSpec, rng: np.random.Generator | None = None
                   ) -> tuple[JointModel, Dataset]:
    """Construct the generating model for ``spec`` and sample a dataset from it.

    When ``rng`` is omitted, two streams derived from ``spec.seed`` drive
    model construction and data generation so scenarios are reproducible
    end to end.
    """
    if rng is None:
        model = scenario_model(spec.scenario, RngSpec(spec.seed, stream=0).generator())
        data_rng = RngSpec(spec.seed, stream=1).generator()
    else:
        model = scenario_model(spec.scenario, rng)
        data_rng = rng
    data = generate_from_model(model, spec.n_per_group, data_rng)
    return model, data


# -- CSV ingestion -------------------------------------------------------------
#
# Format: UTF-8, comma-separated, one header row; every response column holds
# 1-based integer codes; the group column (named "group" by default) comes
# last on write. Deterministic byte-for-byte output for fixed input.


def read_dataset(path, group_column: str = DEFAULT_GROUP_COLUMN,
                 levels=None, n_groups: int | None = None) -> Dataset:
    """Read and validate a dataset CSV.

    ``levels`` fixes the per-variable level counts (sequence of d_j in header
    order); when omitted they are inferred as the per-column maximum observed
    code, floored at 2. ``n_groups`` similarly fixes or infers k. Rows with
    missing or unparseable cells are rejected with a row/column-addressed
    error.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"dataset file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if group_column not in header:
            raise IngestionError(f"{path}: no column named {group_column!r} in header")
        gpos = header.index(group_column)
        ycols = [(i, name) for i, name in enumerate(header) if i != gpos]
        if not ycols:
            raise IngestionError(f"{path}: no response columns besides {group_column!r}")
        y_rows: list[list[int]] = []
        x_rows: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise IngestionError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for i, name in ycols + [(gpos, group_column)]:
                cell = row[i].strip()
                if cell == "":
                    raise IngestionError(f"{path}: row {lineno}, column {name!r}: missing value")
                try:
                    code = int(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {lineno}, column {name!r}: "
                        f"unparseable cell {cell!r}") from None
                if code < 1:
                    raise IngestionError(
                        f"{path}: row {lineno}, column {name!r}: code {code} below 1")
                parsed.append(code)
            y_rows.append(parsed[:-1])
            x_rows.append(parsed[-1])
    y = np.asarray(y_rows, dtype=np.int64).reshape(len(y_rows), len(ycols))
    x = np.asarray(x_rows, dtype=np.int64)
    p = len(ycols)
    if levels is not None:
        d = tuple(int(dj) for dj in levels)
        if len(d) != p:
            raise IngestionError(f"{path}: {len(d)} level counts declared for {p} columns")
    else:
        d = tuple(max(2, int(y[:, j].max()) if y.size else 2) for j in range(p))
    k = int(n_groups) if n_groups is not None else max(1, int(x.max()) if x.size else 1)
    for j, (_, name) in enumerate(ycols):
        if y.size and y[:, j].max() > d[j]:
            bad = int(np.argmax(y[:, j] > d[j]))
            raise IngestionError(
                f"{path}: row {bad + 2}, column {name!r}: code {y[bad, j]} "
                f"exceeds declared level count {d[j]}")
    if x.size and x.max() > k:
        bad = int(np.argmax(x > k))
        raise IngestionError(
            f"{path}: row {bad + 2}, column {group_column!r}: group {x[bad]} "
            f"exceeds declared group count {k}")
    space = CategorySpace(p=p, d=d, k=k)
    return Dataset.from_one_based(y, x, space, columns=[name for _, name in ycols])


def write_dataset(data: Dataset, path, group_column: str = DEFAULT_GROUP_COLUMN) -> None:
    """Write a dataset CSV (header, 1-based codes, group column last)."""
    names = list(data.columns) if data.columns is not None else \
        [f"y{j + 1}" for j in range(data.space.p)]
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + [group_column])
        for i in range(data.n):
            writer.writerow([int(c) + 1 for c in data.y[i]] + [int(data.x[i]) + 1])
