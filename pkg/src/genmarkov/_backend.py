"""Select the compiled core if available.

Set ``GENMARKOV_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _core_py

BACKEND = "python"
volterra_heun = _core_py.volterra_heun
stochastic_heun = _core_py.stochastic_heun

if os.environ.get("GENMARKOV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        volterra_heun = _core.volterra_heun
        stochastic_heun = _core.stochastic_heun
