"""Truncated q-series, eta quotients and congruences for k-regular partitions."""

__version__ = "0.1.0"

from .eta import EtaQuotient, bk_oracle, bk_series, eta_expand, expand_quotient
from .series import EXACT, MOD, PrecisionError, Ring, Series

__all__ = ["EXACT", "MOD", "EtaQuotient", "PrecisionError", "Ring", "Series", "__version__",
           "bk_oracle", "bk_series", "eta_expand", "expand_quotient"]
