"""Brute-force reference solvers that share no code with the package.

They work from raw parameter lists, recompute scenario probabilities and costs by hand,
and enumerate integer flows, so agreement with the package is meaningful.
"""

import itertools

import numpy as np


def compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first, *rest)


def transport_bruteforce(supply, demand, cost):
    """Cheapest integer transportation plan by full enumeration.

    Integer data gives integral optimal vertices, so this equals the LP optimum.
    Returns inf when no plan fits the supplies.
    """
    m, n = len(supply), len(demand)
    per_sink = [list(compositions(int(d), m)) for d in demand]
    best = np.inf
    for cols in itertools.product(*per_sink):
        used = [sum(col[i] for col in cols) for i in range(m)]
        if any(used[i] > supply[i] + 1e-9 for i in range(m)):
            continue
        c = sum(cost[i][j] * cols[j][i] for i in range(m) for j in range(n))
        best = min(best, c)
    return best


def scenario_probabilities(theta):
    """(failed tuple, probability) for every subset, low bit = facility 0."""
    L = len(theta)
    out = []
    for mask in range(1 << L):
        failed = tuple(bool(mask >> l & 1) for l in range(L))
        prob = 1.0
        for l in range(L):
            prob *= (1 - theta[l]) if failed[l] else theta[l]
        out.append((failed, prob))
    return out


def exact_bruteforce(f, kappa, n_cost, theta, q, r, b, lam, o, gamma):
    """Optimum by enumerating selections, every inspection vector and integer delivered flows.

    Delivered units per consumer are split over open facilities in whole units; a
    facility inspected in a failed scenario delivers 1 - q + r units per unit produced.
    Choose kappa so that (1 - q + r) * kappa is integral, otherwise the integer grid can
    miss the LP optimum. Scenarios are independent once x is fixed, so each is minimised
    on its own.
    """
    L, C = len(f), len(b)
    scen = scenario_probabilities(theta)
    best = (np.inf, None)
    for x in itertools.product((0, 1), repeat=L):
        open_l = [l for l in range(L) if x[l]]
        if not open_l or sum(kappa[l] for l in open_l) < sum(b):
            continue
        total = float(sum(f[l] for l in open_l))
        splits = [list(compositions(int(bc), len(open_l))) for bc in b]
        for failed, prob in scen:
            qs = [q[l] if failed[l] else 0.0 for l in range(L)]
            rs = [r[l] if failed[l] else 0.0 for l in range(L)]
            scen_best = np.inf
            for zbits in itertools.product((0, 1), repeat=len(open_l)):
                z = dict(zip(open_l, zbits))
                alpha = {l: (1 - qs[l] + rs[l]) if z[l] else 1.0 for l in open_l}
                insp = sum(n_cost[l] for l in open_l if z[l])
                for cols in itertools.product(*splits):
                    cost = insp
                    ok = True
                    for i, l in enumerate(open_l):
                        produced = sum(cols[c][i] for c in range(C)) / alpha[l]
                        if produced > kappa[l] + 1e-9:
                            ok = False
                            break
                        for c in range(C):
                            p = cols[c][i] / alpha[l]
                            if z[l]:
                                k, d = rs[l] * p, (qs[l] - rs[l]) * p
                            else:
                                k, d = qs[l] * p, 0.0
                            cost += lam[l][c] * (1 - qs[l]) * p + o[l][c] * k + gamma[l][c] * d
                    if ok and cost < scen_best:
                        scen_best = cost
            total += prob * scen_best
        if total < best[0]:
            best = (total, x)
    return best
