"""Compiled inner loops for the offset-grouped pair sums."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def offset_block_sums(values, m, dim, b, k, offsets, p, out):
    """For each offset ``d`` and each aligned block, accumulate ``|u(i+d) - u(i)|**p``.

    Only pairs whose two cells lie in the same ``b**dim`` block are counted.
    ``out`` has shape ``(len(offsets), k**dim)``; block numbering is
    lexicographic over the ``k**dim`` partition.
    """
    stride = np.empty(dim, np.int64)
    s = 1
    for a in range(dim - 1, -1, -1):
        stride[a] = s
        s *= m
    blk = np.zeros(dim, np.int64)
    lo = np.empty(dim, np.int64)
    hi = np.empty(dim, np.int64)
    idx = np.empty(dim, np.int64)
    n_blocks = k**dim
    last = dim - 1
    p_is_1 = p == 1.0
    p_is_2 = p == 2.0
    for o in range(offsets.shape[0]):
        doff = 0
        for a in range(dim):
            doff += offsets[o, a] * stride[a]
        for q in range(n_blocks):
            rem = q
            for a in range(dim - 1, -1, -1):
                blk[a] = rem % k
                rem //= k
            empty = False
            for a in range(dim):
                d = offsets[o, a]
                lo[a] = blk[a] * b + (-d if d < 0 else 0)
                hi[a] = blk[a] * b + b - (d if d > 0 else 0)
                if lo[a] >= hi[a]:
                    empty = True
                idx[a] = lo[a]
            if empty:
                out[o, q] = 0.0
                continue
            total = 0.0
            comp = 0.0
            while True:
                base = 0
                for a in range(last):
                    base += idx[a] * stride[a]
                row = 0.0
                for i in range(base + lo[last], base + hi[last]):
                    diff = abs(values[i + doff] - values[i])
                    if p_is_1:
                        row += diff
                    elif p_is_2:
                        row += diff * diff
                    else:
                        row += diff**p
                # Kahan step over row partials
                y = row - comp
                t = total + y
                comp = (t - total) - y
                total = t
                a = last - 1
                while a >= 0:
                    idx[a] += 1
                    if idx[a] < hi[a]:
                        break
                    idx[a] = lo[a]
                    a -= 1
                if a < 0:
                    break
            out[o, q] = total
    return out
