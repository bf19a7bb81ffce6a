"""Backend selection for the hot loops.

The compiled extension is used when it was built; set ``OPTOSQUEEZE_PURE=1``
to force the numpy fallback.
"""
import os

from ._errors import SingularSystemError

if os.environ.get("OPTOSQUEEZE_PURE", "").strip() not in ("", "0"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"

solve_batch = _impl.solve_batch
lti_response = _impl.lti_response
spectral_density = _impl.spectral_density

__all__ = ["BACKEND", "SingularSystemError", "solve_batch", "lti_response", "spectral_density"]
