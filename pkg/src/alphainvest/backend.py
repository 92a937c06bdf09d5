"""Selects the simulation kernel at import: compiled extension when built,
pure-Python twin otherwise. Set ALPHAINVEST_PURE=1 to force the fallback.
"""
from __future__ import annotations

import os

from . import _purekern

if os.environ.get("ALPHAINVEST_PURE"):
    kernel = _purekern
    BACKEND = "pure"
else:
    try:
        from . import _fastkern

        kernel = _fastkern
        BACKEND = "compiled"
    except ImportError:
        kernel = _purekern
        BACKEND = "pure"

KIND_ALPHA_SPENDING = _purekern.KIND_ALPHA_SPENDING
KIND_ALPHA_INVESTING = _purekern.KIND_ALPHA_INVESTING
KIND_ASR = _purekern.KIND_ASR
KIND_ERO = _purekern.KIND_ERO
SCHEME_CONSTANT = _purekern.SCHEME_CONSTANT
SCHEME_RELATIVE = _purekern.SCHEME_RELATIVE
SCHEME_RELATIVE_FIXED_M = _purekern.SCHEME_RELATIVE_FIXED_M

run_one = kernel.run_one
norm_cdf = kernel.norm_cdf
norm_quantile = kernel.norm_quantile
ero_level_z = kernel.ero_level_z
