"""Jitted hot kernels: flux sweep and entropy residual.

Same arithmetic as ``_numpy.py``, cell by cell.  fastmath stays off; the
contraction and conservation checks run at 1e-12 and need strict IEEE
ordering.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _god(a, b):
    ap = a if a > 0.0 else 0.0
    bm = b if b < 0.0 else 0.0
    fa = 0.5 * ap * ap
    fb = 0.5 * bm * bm
    return fa if fa > fb else fb


@njit(cache=True, nogil=True)
def step_interior(ext, dt, h1, h2):
    n1 = ext.shape[0] - 2
    n2 = ext.shape[1] - 2
    r1 = dt / h1
    r2 = dt / h2
    out = np.empty((n1, n2))
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            uc = ext[i, j]
            fr = _god(uc, ext[i + 1, j])
            fl = _god(ext[i - 1, j], uc)
            gu = uc * uc * uc / 3.0
            ud = ext[i, j - 1]
            gd = ud * ud * ud / 3.0
            out[i - 1, j - 1] = uc - r1 * (fr - fl) - r2 * (gu - gd)
    return out


@njit(cache=True, nogil=True)
def entropy_interior(ext_before, after, dt, h1, h2, k):
    n1 = ext_before.shape[0] - 2
    n2 = ext_before.shape[1] - 2
    r1 = dt / h1
    r2 = dt / h2
    out = np.empty((n1, n2))
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            uc = ext_before[i, j]
            ul = ext_before[i - 1, j]
            ur = ext_before[i + 1, j]
            ud = ext_before[i, j - 1]
            ucu = uc if uc > k else k
            ucd = uc if uc < k else k
            # right/left clipped horizontal fluxes
            uru = ur if ur > k else k
            urd = ur if ur < k else k
            ulu = ul if ul > k else k
            uld = ul if ul < k else k
            qfr = _god(ucu, uru) - _god(ucd, urd)
            qfl = _god(ulu, ucu) - _god(uld, ucd)
            # vertical flux is left-state only
            udu = ud if ud > k else k
            udd = ud if ud < k else k
            qgu = ucu * ucu * ucu / 3.0 - ucd * ucd * ucd / 3.0
            qgd = udu * udu * udu / 3.0 - udd * udd * udd / 3.0
            ua = after[i - 1, j - 1]
            acc = abs(ua - k) - abs(uc - k)
            acc += r1 * (qfr - qfl)
            acc += r2 * (qgu - qgd)
            out[i - 1, j - 1] = acc / dt
    return out
