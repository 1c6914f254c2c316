"""Hand-built instances for tests."""

import numpy as np

from scdopt.instance import ConsumerParams, CostMatrices, FacilityParams, build_instance


def make_instance(f, kappa, n, theta, q, r, b, lam, o, gamma=None):
    lam = np.asarray(lam, dtype=np.int64)
    o = np.asarray(o, dtype=np.int64)
    gamma = 0.25 * lam.astype(float) if gamma is None else np.asarray(gamma, dtype=float)
    facilities = [
        FacilityParams(l, int(f[l]), int(kappa[l]), int(n[l]), float(theta[l]), float(q[l]), float(r[l]))
        for l in range(len(f))
    ]
    consumers = [ConsumerParams(c, int(b[c])) for c in range(len(b))]
    return build_instance(facilities, consumers, CostMatrices(lam, o, gamma))


def raw_params(inst):
    """Plain-list parameters for the brute-force oracles."""
    return dict(
        f=inst.fixed_cost.tolist(), kappa=inst.capacity.tolist(), n_cost=inst.inspection_cost.tolist(),
        theta=inst.reliability.tolist(), q=inst.taint_rate.tolist(), r=inst.residual_rate.tolist(),
        b=inst.demand.tolist(), lam=inst.lam.tolist(), o=inst.o.tolist(), gamma=inst.gamma.tolist(),
    )


def tiny(seed):
    """Instance whose inspected capacities (1 - q + r) * kappa are whole numbers."""
    rng = np.random.default_rng(seed)
    L = 2 if seed % 2 == 0 else 3
    C = 2 if seed < 3 else 3
    # (q, r, kappa step) with (1 - q + r) * step integral
    kinds = [(0.30, 0.05, 4), (0.25, 0.05, 5), (0.22, 0.02, 5)]
    q, r, kappa = [], [], []
    for l in range(L):
        qq, rr, step = kinds[l]
        q.append(qq)
        r.append(rr)
        kappa.append(step * int(rng.integers(1, 3)))
    b = rng.integers(2, 5, C)
    while sum(kappa) < b.sum():
        kappa[0] += kinds[0][2]
    return make_instance(
        f=rng.integers(50, 400, L), kappa=kappa, n=rng.integers(5, 60, L),
        theta=rng.uniform(0.5, 0.95, L), q=q, r=r, b=b,
        lam=rng.integers(1, 40, (L, C)), o=rng.integers(100, 300, (L, C)),
    )
