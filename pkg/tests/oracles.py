"""Independent oracles used by the test suite.

These deliberately avoid the library's own evaluation paths: the Bessel
function comes from its power series, the Hilbert-Schmidt norm oracle from
naive nested Riemann/Gauss sums over explicitly built phase arrays.
"""

import numpy as np


def bessel_j(order: int, x) -> np.ndarray:
    """J_order(x) by the alternating power series.

    Accurate to ~1e-12 absolute for |x| <= 12 and any modest order, which
    covers every oracle comparison in the suite (J_{-n} = (-1)^n J_n).
    """
    n = abs(int(order))
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    term = half**n / float(np.prod(np.arange(1, n + 1), dtype=float) or 1.0)
    total = term.copy()
    for k in range(1, 80):
        term = -term * half**2 / (k * (n + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-30)):
            break
    if order < 0 and n % 2 == 1:
        total = -total
    return total


def brute_force_hs_norm_sq(field_values, grid_axes, cell_volume, h_abs, targets, t_weights):
    """|h| * sum_i w_i |F(f)(target_i)|^2 with a naive direct transform.

    ``targets`` is (P, n); each transform value is computed by building the
    full phase array over the grid and summing, with no factorisation or
    reuse, so the only thing shared with the library path is the sample
    data itself.
    """
    total = 0.0
    dim = len(grid_axes)
    for point, w in zip(targets, t_weights):
        phase = np.zeros(field_values.shape)
        for a in range(dim):
            shape = [1] * dim
            shape[a] = grid_axes[a].size
            phase = phase + grid_axes[a].reshape(shape) * point[a]
        val = np.sum(field_values * np.exp(-2j * np.pi * phase)) * cell_volume
        total += w * abs(val) ** 2
    return h_abs * total
