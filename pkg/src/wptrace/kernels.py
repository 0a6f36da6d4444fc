"""Hot-loop kernels.  Uses the compiled extension when it is importable,
otherwise the numpy/scipy implementation.  Set ``WPTRACE_PURE_PYTHON=1`` to
force the fallback.

``trace_half`` and ``trapz_convolve`` always use numpy: its vectorized
transcendentals and ``np.convolve`` beat the scalar compiled loops
(see benchmarks/bench_kernels.py)."""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("WPTRACE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

expansion = _impl.expansion
trace_half = _pykernels.trace_half
nb_closed_walk_traces = _impl.nb_closed_walk_traces
trapz_convolve = _pykernels.trapz_convolve
sign_patterns = _pykernels.sign_patterns
hashimoto = _pykernels.hashimoto
