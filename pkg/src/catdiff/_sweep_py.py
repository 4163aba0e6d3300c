"""Pure-numpy latent-class sweep, the fallback when the compiled kernel
is unavailable.

Semantics shared with the compiled kernel: per unit i, the unnormalized
log weight of component h is log nu[x_i, h] + sum_j log prof[h, j, y_ij];
weights are stabilized by max subtraction, and the component is picked by
inverse CDF against u[i] * total (strict less-than, clamped to H-1).
"""

from __future__ import annotations

import numpy as np


def latent_sweep(log_nu: np.ndarray, x: np.ndarray, log_prof: np.ndarray,
                 y: np.ndarray, u: np.ndarray, z: np.ndarray,
                 scratch: np.ndarray | None = None) -> int:
    """Resample every unit's latent component into ``z``.

    Returns -1 on success, else the index of the first unit whose weights
    are all zero (every component assigns probability zero to its cell).
    ``scratch`` exists for signature parity with the compiled kernel.
    """
    n, p = y.shape
    H = log_prof.shape[0]
    if n == 0:
        return -1
    s = log_nu[x].copy()                      # (n, H)
    for j in range(p):
        s += log_prof[:, j, y[:, j]].T
    m = s.max(axis=1)
    bad = np.flatnonzero(m == -np.inf)
    if bad.size:
        return int(bad[0])
    w = np.exp(s - m[:, None])
    c = np.cumsum(w, axis=1)
    target = u * c[:, -1]
    z[:] = np.minimum((c < target[:, None]).sum(axis=1), H - 1)
    return -1
