"""Hot kernels, backed by the compiled extension when it is importable.

Set ``SCDOPT_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

import os

from . import _kernels_py
from ._kernels_py import STATUS_INFEASIBLE, STATUS_OK, SplitMix64, draw_rectangle  # noqa: F401

_compiled = None
if os.environ.get("SCDOPT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"

transport_ssp = _impl.transport_ssp
vns_scenario = _impl.vns_scenario
greedy_alloc = _impl.greedy_alloc


def backends() -> dict:
    """Available kernel modules by name, for parity tests and benchmarks."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels

            out["cython"] = _kernels
        except ImportError:
            pass
    return out
