"""Select the compiled kernels when importable, else the pure-Python mirror.

Set ``BLFR_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("BLFR_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pykernels as impl
else:
    try:
        from . import _kernels as impl
    except ImportError:
        from . import _pykernels as impl

NAME = "python" if impl.__name__.endswith("_pykernels") else "cython"

betainc_pair = impl.betainc_pair
betainc_arrays = impl.betainc_arrays
loglik_derivs = impl.loglik_derivs
lfr_inverse = impl.lfr_inverse
uniforms = impl.uniforms
sample_gamma = impl.sample_gamma
sample_beta = impl.sample_beta
sample_blfr = impl.sample_blfr
digamma = impl.digamma
log_beta = impl.log_beta
trigamma = impl.trigamma
