"""Select the integration kernel: compiled extension if built, else Python."""
from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py.integrate}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.integrate

DEFAULT_BACKEND = "cython" if _compiled is not None else "python"


def get_integrator(name=None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}") from None
