"""Pure-Python kernels; reference semantics for the compiled ``_kernels`` module.

Both backends must produce bit-identical results, so the loops here are written in the
same order and with the same float operations as the Cython source.
"""

import numpy as np

MASK64 = (1 << 64) - 1
INF = float("inf")
FLOW_EPS = 1e-12
RELAX_EPS = 1e-9
STATUS_OK = 0
STATUS_INFEASIBLE = 1


class SplitMix64:
    """Small counter-based generator shared by both kernel backends."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        return int(self.random() * n)


def transport_ssp(supply, demand, cost, tol=1e-9):
    """Min-cost transportation by successive shortest augmenting paths.

    Returns ``(flow, total_cost, status)``. Shortest paths use Bellman-Ford over the
    bipartite residual graph; scanning order is fixed so ties resolve to the lowest
    (source, sink) index.
    """
    supply = [float(v) for v in supply]
    demand = [float(v) for v in demand]
    cost = np.ascontiguousarray(cost, dtype=float)
    m, n = len(supply), len(demand)
    c = cost.tolist()
    F = [[0.0] * n for _ in range(m)]
    if sum(supply) < sum(demand) - tol:
        return np.zeros((m, n)), INF, STATUS_INFEASIBLE
    rs = supply[:]
    rd = demand[:]

    while True:
        target_left = False
        for j in range(n):
            if rd[j] > FLOW_EPS:
                target_left = True
                break
        if not target_left:
            break

        ds = [0.0 if rs[i] > FLOW_EPS else INF for i in range(m)]
        ps = [-1] * m
        dt = [INF] * n
        pt = [-1] * n
        for _ in range(m + n + 1):
            changed = False
            for j in range(n):
                for i in range(m):
                    if ds[i] < INF:
                        nd = ds[i] + c[i][j]
                        if nd < dt[j] - RELAX_EPS:
                            dt[j] = nd
                            pt[j] = i
                            changed = True
            for i in range(m):
                for j in range(n):
                    if F[i][j] > FLOW_EPS and dt[j] < INF:
                        nd = dt[j] - c[i][j]
                        if nd < ds[i] - RELAX_EPS:
                            ds[i] = nd
                            ps[i] = j
                            changed = True
            if not changed:
                break

        best = -1
        for j in range(n):
            if rd[j] > FLOW_EPS and dt[j] < INF and (best < 0 or dt[j] < dt[best]):
                best = j
        if best < 0:
            break

        # walk back to the originating source, collecting the bottleneck
        bott = rd[best]
        j = best
        steps = 0
        while True:
            i = pt[j]
            if ps[i] < 0:
                if rs[i] < bott:
                    bott = rs[i]
                src = i
                break
            jj = ps[i]
            if F[i][jj] < bott:
                bott = F[i][jj]
            j = jj
            steps += 1
            if steps > m + n:
                raise RuntimeError("cycle in shortest-path tree")

        j = best
        while True:
            i = pt[j]
            F[i][j] += bott
            if ps[i] < 0:
                break
            jj = ps[i]
            F[i][jj] -= bott
            if F[i][jj] < FLOW_EPS:
                F[i][jj] = 0.0
            j = jj
        rs[src] -= bott
        rd[best] -= bott

    total = 0.0
    short = 0.0
    for j in range(n):
        short += rd[j] if rd[j] > 0.0 else 0.0
    for i in range(m):
        for j in range(n):
            total += c[i][j] * F[i][j]
    flow = np.array(F, dtype=float).reshape(m, n)
    if short > tol:
        return flow, INF, STATUS_INFEASIBLE
    return flow, total, STATUS_OK


def draw_rectangle(p, rng, attempts=20, four_corner=False):
    """Pick a rectangle (l1, c1, l2, c2, amount) for a pivot.

    (l1, c1) and (l2, c2) lose ``amount``; (l2, c1) and (l1, c2) gain it. The amount is
    bounded by the two losing corners, or by all four with ``four_corner``. Returns
    amount 0 when no rectangle with a positive bound turns up within ``attempts`` draws.
    """
    m, n = len(p), len(p[0]) if len(p) else 0
    if m < 2 or n < 2:
        return 0, 0, 0, 0, 0.0
    for _ in range(attempts):
        l1 = rng.randbelow(m)
        c1 = rng.randbelow(n)
        l2 = rng.randbelow(m - 1)
        if l2 >= l1:
            l2 += 1
        c2 = rng.randbelow(n - 1)
        if c2 >= c1:
            c2 += 1
        bound = min(p[l1][c1], p[l2][c2])
        if four_corner:
            bound = min(bound, p[l2][c1], p[l1][c2])
        if bound > 0.0:
            return l1, c1, l2, c2, rng.random() * bound
    return 0, 0, 0, 0, 0.0


def _weighted_sum(p, w, m, n):
    s = 0.0
    for i in range(m):
        for j in range(n):
            s += w[i][j] * p[i][j]
    return s


def vns_scenario(p_in, w_in, kmax, seed, four_corner=False):
    """Rectangle-pivot descent on one facility x consumer flow matrix.

    Returns ``(p, accepted_costs)``, where accepted_costs starts with the initial cost
    and lists the cost after every accepted move.
    """
    p = np.array(p_in, dtype=float).tolist()
    w = np.array(w_in, dtype=float).tolist()
    m = len(p)
    n = len(p[0]) if m else 0
    rng = SplitMix64(seed)
    cur = _weighted_sum(p, w, m, n)
    trace = [cur]
    k = 1
    while k < kmax:
        l1, c1, l2, c2, amt = draw_rectangle(p, rng, 20, four_corner)
        if amt <= 0.0:
            k += 1
            continue
        o11, o21, o12, o22 = p[l1][c1], p[l2][c1], p[l1][c2], p[l2][c2]
        p[l1][c1] = o11 - amt
        p[l2][c2] = o22 - amt
        p[l2][c1] = o21 + amt
        p[l1][c2] = o12 + amt
        new = _weighted_sum(p, w, m, n)
        if new < cur:
            cur = new
            trace.append(cur)
        else:
            p[l1][c1], p[l2][c1], p[l1][c2], p[l2][c2] = o11, o21, o12, o22
            k += 1
    return np.array(p, dtype=float).reshape(m, n), trace


def greedy_alloc(lam, capacity, alpha, demand):
    """Cheapest-first routing of each consumer, once per column of ``alpha``.

    ``alpha[l, k]`` is the number of units delivered per unit produced at facility l in
    pattern k; residual demand is reduced by delivered units. Returns produced flows
    ``p[l, c, k]`` and unserved demand ``u[c, k]``.
    """
    lam = np.asarray(lam, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    m, n = lam.shape
    K = alpha.shape[1]
    lam_l = lam.tolist()
    cap = [float(v) for v in capacity]
    dem = [float(v) for v in demand]
    p = np.zeros((m, n, K))
    u = np.zeros((n, K))
    for k in range(K):
        al = alpha[:, k].tolist()
        g = cap[:]
        for c in range(n):
            a = dem[c]
            while a > 0.0:
                best = -1
                for l in range(m):
                    if g[l] > 0.0 and (best < 0 or lam_l[l][c] < lam_l[best][c]):
                        best = l
                if best < 0:
                    u[c, k] = a
                    break
                deliverable = al[best] * g[best]
                if deliverable > a:
                    used = a / al[best]
                    p[best, c, k] += used
                    g[best] -= used
                    a = 0.0
                else:
                    p[best, c, k] += g[best]
                    a -= deliverable
                    g[best] = 0.0
    return p, u
