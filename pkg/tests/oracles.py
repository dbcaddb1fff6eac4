"""Independent reference implementations used to check the package's metrics."""
import math

import numpy as np


def ks_bruteforce(a, b):
    """Scan every integer between the smallest and largest degree and count directly."""
    a, b = list(a), list(b)
    best = 0.0
    for x in range(min(a + b) - 1, max(a + b) + 2):
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def kl_scalar(p, q, pseudocount=0.5):
    support = sorted(set(p) | set(q))
    np_, nq = len(p), len(q)
    k = len(support)
    total = 0.0
    for x in support:
        pp = (p.count(x) + pseudocount) / (np_ + pseudocount * k)
        qq = (q.count(x) + pseudocount) / (nq + pseudocount * k)
        total += pp * math.log(pp / qq)
    return total


def ccdh_counts(degrees):
    xs = sorted(set(degrees))
    return xs, [sum(1 for v in degrees if v >= x) for x in xs]


def _curve(xs, ys):
    """Piecewise-linear CCDH: flat at its first value on the left, zero past the last support point."""
    def at(t):
        if t > xs[-1]:
            return 0.0
        return float(np.interp(t, xs, ys))
    return at


def _feasible_one(d, fd, eps, xs, ys):
    lo, hi = (1 - eps) * d, (1 + eps) * d
    at = _curve(xs, ys)
    pts = [lo, min(hi, xs[-1])] + [x for x in xs if lo <= x <= hi]
    vals = [at(t) for t in pts if t <= xs[-1]]
    if hi > xs[-1]:
        vals.append(0.0)
    want_lo, want_hi = (1 - eps) * fd, (1 + eps) * fd
    if hi > xs[-1] and want_lo <= 0.0:
        return True
    # the curve is continuous on [lo, min(hi, xmax)], so its image is [min, max]
    cont = [at(t) for t in pts if t <= xs[-1]]
    if cont and min(cont) <= want_hi and max(cont) >= want_lo:
        return True
    return any(want_lo <= v <= want_hi for v in vals)


def rh_close(f_deg, g_deg, eps):
    fx, fy = ccdh_counts(f_deg)
    gx, gy = ccdh_counts(g_deg)
    return (all(_feasible_one(d, c, eps, gx, gy) for d, c in zip(fx, fy))
            and all(_feasible_one(d, c, eps, fx, fy) for d, c in zip(gx, gy)))


def rh_grid(f_deg, g_deg, step=0.001, limit=50.0):
    """Smallest eps on the grid {0, step, 2 step, ...} at which the two CCDHs are close.

    Closeness is monotone in eps, so the first feasible grid point is found by
    bisection over grid indices instead of a linear scan.
    """
    lo, hi = 0, int(round(limit / step))
    if rh_close(f_deg, g_deg, 0.0):
        return 0.0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rh_close(f_deg, g_deg, mid * step):
            hi = mid
        else:
            lo = mid
    return hi * step


def caveman_by_hand(n, communities):
    """Connected caveman built directly: cliques, then each clique's first edge re-pointed to the next clique."""
    size = n // communities
    starts = [c * size for c in range(communities)]
    edges = set()
    for s in starts:
        for i in range(s, s + size):
            for j in range(i + 1, s + size):
                edges.add((i, j))
    for c, s in enumerate(starts):
        edges.discard((s, s + 1))
        nxt = starts[(c + 1) % communities]
        edges.add(tuple(sorted((s + 1, nxt))))
    return edges
