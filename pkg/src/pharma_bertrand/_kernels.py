"""Hot numeric kernels with a numba path and a pure-numpy path.

The backend is picked once at import from ``PHARMA_BERTRAND_BACKEND``
(``numba`` or ``numpy``; default ``numba`` when it imports). Both paths share
the same arithmetic: choice counts agree exactly, prices to rounding
(numba may contract multiply-adds).
"""

import os
import warnings

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "PHARMA_BERTRAND_BACKEND"


def _pick_backend():
    wanted = os.environ.get(ENV_FLAG, "numba").strip().lower()
    if wanted not in ("numba", "numpy"):
        raise ValueError(f"{ENV_FLAG} must be 'numba' or 'numpy', got {wanted!r}")
    if wanted == "numba" and numba is None:
        warnings.warn("numba is not importable; using the numpy backend", RuntimeWarning)
        return "numpy"
    return wanted


BACKEND = _pick_backend()

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is often too old and numba warns on every parallel call
    numba.config.THREADING_LAYER = "workqueue"

# channel order inside kernels: 0 = unorganized, 1 = organized, 2 = online


def closed_form_kernel(alpha, theta, m, tx, c1, c2, c3, mu1, mu2):
    """Bertrand-Nash prices (p1, p2, p3), valid for scalars or broadcastable arrays."""
    a = alpha
    th = theta
    den = m * (2.0 + 4.0 * a * (-4.0 + th) + 11.0 * th - th * th)
    n1 = (
        -2.0 * tx + 4.0 * a + 8.0 * tx * a - 8.0 * a * a - 3.0 * th - 5.0 * tx * th
        + 9.0 * a * th - 2.0 * tx * a * th + 2.0 * a * a * th - 3.0 * th * th
        + tx * th * th - a * th * th
        + 2.0 * m * (a * (-4.0 + th) + 3.0 * th) * c1
        - m * (a - th) * (2.0 + th) * c2
        + m * c3 - 3.0 * m * a * c3 + 2.0 * m * th * c3
        - 2.0 * a * mu1 + 2.0 * th * mu1 - a * th * mu1 + th * th * mu1
        + mu2 - 3.0 * a * mu2 + 2.0 * th * mu2
    )
    n2 = (
        2.0 - 4.0 * tx - 4.0 * a + 4.0 * tx * th + 4.0 * a * th - 2.0 * th * th
        + 4.0 * m * (-1.0 + th) * c1
        + 8.0 * m * (-a + th) * c2
        + 3.0 * m * c3 - 4.0 * m * a * c3 + m * th * c3
        - 2.0 * mu1 + 8.0 * a * mu1 - 3.0 * th * mu1 - 4.0 * a * th * mu1 + th * th * mu1
        + 3.0 * mu2 - 4.0 * a * mu2 + th * mu2
    )
    n3 = (
        th - 2.0 * tx * th - 2.0 * a * th + 2.0 * tx * th * th + 2.0 * a * th * th - th * th * th
        + 2.0 * m * (-1.0 + th) * th * c1
        + 4.0 * m * th * (-a + th) * c2
        + m * c3 - 8.0 * m * a * c3 + 7.0 * m * th * c3
        - 4.0 * a * th * mu1 + 4.0 * th * th * mu1
        - mu2 + 8.0 * a * mu2 - 4.0 * th * mu2 - 4.0 * a * th * mu2 + th * th * mu2
    )
    return n1 / den, n2 / den, n3 / den


def _closed_form_batch_numpy(table):
    p1, p2, p3 = closed_form_kernel(*(table[:, j] for j in range(9)))
    return np.column_stack((p1, p2, p3))


def _count_choices_numpy(v, slopes, costs, offered):
    neg = -np.inf
    best = np.full(v.shape, neg)
    pick = np.full(v.shape, -1, dtype=np.int64)
    # priority: online, then organized, then unorganized; replace only on strict gain
    for ch in (2, 1, 0):
        if not offered[ch]:
            continue
        u = slopes[ch] * v - costs[ch]
        better = u > best
        best = np.where(better, u, best)
        pick = np.where(better, ch, pick)
    pick = np.where(best > 0.0, pick, -1)
    counts = np.zeros(3, dtype=np.int64)
    for ch in range(3):
        counts[ch] = np.count_nonzero(pick == ch)
    return counts


if numba is not None:
    _closed_form_scalar_nb = numba.njit(cache=True)(closed_form_kernel)

    @numba.njit(cache=True, parallel=True)
    def _closed_form_batch_numba(table):
        n = table.shape[0]
        out = np.empty((n, 3))
        for i in numba.prange(n):
            r = table[i]
            p1, p2, p3 = _closed_form_scalar_nb(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8])
            out[i, 0] = p1
            out[i, 1] = p2
            out[i, 2] = p3
        return out

    @numba.njit(cache=True, nogil=True)
    def _count_choices_numba(v, slopes, costs, offered):
        counts = np.zeros(3, dtype=np.int64)
        for i in range(v.shape[0]):
            best = -np.inf
            pick = -1
            for ch in (2, 1, 0):
                if offered[ch]:
                    u = slopes[ch] * v[i] - costs[ch]
                    if u > best:
                        best = u
                        pick = ch
            if best > 0.0:
                counts[pick] += 1
        return counts
else:  # pragma: no cover
    _closed_form_batch_numba = None
    _count_choices_numba = None


IMPLEMENTATIONS = {
    "numpy": {"closed_form_batch": _closed_form_batch_numpy, "count_choices": _count_choices_numpy},
    "numba": {"closed_form_batch": _closed_form_batch_numba, "count_choices": _count_choices_numba},
}


def closed_form_batch(table, backend=None):
    """Closed-form prices for each row of an (n, 9) table.

    Columns: alpha, theta, m, t*x, c1, c2, c3, mu1, mu2.
    """
    table = np.ascontiguousarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[1] != 9:
        raise ValueError("expected an (n, 9) parameter table")
    return IMPLEMENTATIONS[backend or BACKEND]["closed_form_batch"](table)


def count_choices(v, slopes, costs, offered, backend=None):
    """Count utility-maximizing purchases per channel among valuations ``v``.

    Utility of channel ``ch`` is ``slopes[ch] * v - costs[ch]``. A consumer
    buys only when the best offered utility is strictly positive.
    """
    return IMPLEMENTATIONS[backend or BACKEND]["count_choices"](
        np.ascontiguousarray(v, dtype=np.float64),
        np.asarray(slopes, dtype=np.float64),
        np.asarray(costs, dtype=np.float64),
        np.asarray(offered, dtype=np.bool_),
    )
