"""Exact depot-anchored tours for single routes (subset dynamic program).

Route sizes on the target benchmarks stay small (a few dozen visits at
most), so an in-process Held-Karp solve is enough; routes beyond the
configured limit raise RouteTooLarge and the caller picks a fallback.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


class RouteTooLarge(ValueError):
    def __init__(self, size, limit):
        self.size = size
        self.limit = limit
        super().__init__(
            f"route has {size} visits, exact solve limited to {limit}")


@dataclass(frozen=True)
class ExactConfig:
    max_exact: int = 20

    def __post_init__(self):
        if self.max_exact < 1:
            raise ValueError("max_exact must be positive")


def solve_exact(visits, dm, max_exact=20):
    """Minimum-cost order of the given visit set as a depot round trip.

    The visit set is canonicalized (sorted) before solving, so the result
    depends only on the set, never on the incoming order. Returns
    (cost, order int32 array). Memory grows as 2^|visits|.
    """
    v = np.asarray(visits, dtype=np.int32)
    m = v.shape[0]
    if m == 0:
        raise ValueError("empty route")
    if m > max_exact:
        raise RouteTooLarge(m, max_exact)
    vs = np.sort(v)
    cost, order = kernels.held_karp(vs, dm)
    return int(cost), order
