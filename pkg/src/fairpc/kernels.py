"""Backend selection for the numeric kernels.

Numba is used when it is importable, unless ``FAIRPC_DISABLE_NUMBA`` is set
to a truthy value, in which case the pure-numpy implementations run. Both
backends expose the same functions; see ``benchmarks/bench_kernels.py``.
"""

import os

from . import _kernels_np

DISABLE_ENV = "FAIRPC_DISABLE_NUMBA"
THREADS_ENV = "FAIRPC_THREADS"


def _disabled():
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled():
        raise ImportError("numba disabled by " + DISABLE_ENV)
    from . import _kernels_nb as _impl
    BACKEND = "numba"
except ImportError:
    _impl = _kernels_np
    BACKEND = "numpy"

fix_sign = _impl.fix_sign
top_eigpair = _impl.top_eigpair
power_iteration = _impl.power_iteration
weighted_gram = _impl.weighted_gram
quad_forms = _impl.quad_forms
frank_wolfe_loop = _impl.frank_wolfe_loop
max_loss_batch = _impl.max_loss_batch
grid_sweep_2d = _impl.grid_sweep_2d


def apply_thread_cap():
    """Honour FAIRPC_THREADS (0 or unset leaves the default)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw or BACKEND != "numba":
        return
    try:
        cap = int(raw)
    except ValueError:
        from .errors import InputError
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if cap > 0:
        import numba
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
