"""Independent reference computations shared by several test modules."""
import itertools
import math


def brute_force_minimum(lam, r, n_max):
    """Plain double loop over index multisets; sums accumulated left to right."""
    omega = [0.0] + [math.sqrt(n * n + 2.0 * lam * n) for n in range(1, n_max + 1)]
    by_size = []
    for p in range(r + 1):
        group = []
        for combo in itertools.combinations_with_replacement(range(1, n_max + 1), p):
            total = 0.0
            for i in combo:
                total += omega[i]
            group.append((combo, total))
        by_size.append(group)
    best = math.inf
    for p in range(r + 1):
        for q in range(r + 1 - p):
            if p + q == 0:
                continue
            for m, sm in by_size[p]:
                for n, sn in by_size[q]:
                    if m != n:
                        d = abs(sm - sn)
                        if d < best:
                            best = d
    return best
