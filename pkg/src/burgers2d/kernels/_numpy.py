"""Pure-numpy reference kernels.

Every expression here mirrors the jitted twin in ``_numba.py`` operation by
operation, so both backends produce bit-identical fields.  Powers are spelled
as repeated products for that reason.
"""

import numpy as np


def _godunov(a, b):
    ap = np.maximum(a, 0.0)
    bm = np.minimum(b, 0.0)
    return np.maximum(0.5 * ap * ap, 0.5 * bm * bm)


def _cubic(a):
    return a * a * a / 3.0


def step_interior(ext, dt, h1, h2):
    """One conservative update on the padded array ``ext`` ((n1+2) x (n2+2));
    returns the new (n1, n2) interior."""
    r1 = dt / h1
    r2 = dt / h2
    uc = ext[1:-1, 1:-1]
    fr = _godunov(ext[1:-1, 1:-1], ext[2:, 1:-1])
    fl = _godunov(ext[:-2, 1:-1], ext[1:-1, 1:-1])
    gu = _cubic(ext[1:-1, 1:-1])
    gd = _cubic(ext[1:-1, :-2])
    return uc - r1 * (fr - fl) - r2 * (gu - gd)


def entropy_interior(ext_before, after, dt, h1, h2, k):
    """Per-cell entropy residual of one step for the entropy |u - k|.

    Numerical entropy fluxes are flux differences of states clipped at k;
    nonpositive residuals certify the cell entropy inequality.
    """
    r1 = dt / h1
    r2 = dt / h2
    up = np.maximum(ext_before, k)
    dn = np.minimum(ext_before, k)
    qf = _godunov(up[:-1, 1:-1], up[1:, 1:-1]) - _godunov(dn[:-1, 1:-1], dn[1:, 1:-1])
    qg = _cubic(up[1:-1, :-1]) - _cubic(dn[1:-1, :-1])
    uc = ext_before[1:-1, 1:-1]
    acc = np.abs(after - k) - np.abs(uc - k)
    acc += r1 * (qf[1:, :] - qf[:-1, :])
    acc += r2 * (qg[:, 1:] - qg[:, :-1])
    return acc / dt
