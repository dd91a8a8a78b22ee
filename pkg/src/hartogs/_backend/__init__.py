"""Hot-loop kernels with a compiled core and a numpy fallback.

The Cython extension (``hartogs._backend._core``) is built at install
time when a compiler is available; otherwise, or when the environment
variable ``HARTOGS_BACKEND=python`` is set, the numpy implementation in
``_ref`` is used.  Both expose the same three functions:

    monomial_matrix(points, exponents) -> (M, P) complex matrix
    kernel_cross(x, y, ball_sizes, n_disk) -> (X, Y) product-kernel matrix
    kernel_diag(points, ball_sizes, n_disk) -> (P,) diagonal values

``tests/test_backends.py`` pins the two implementations against each
other and ``benchmarks/bench_backends.py`` compares their throughput.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _ref


def _load() -> tuple[ModuleType, str]:
    choice = os.environ.get("HARTOGS_BACKEND", "auto").lower()
    if choice not in ("auto", "python", "compiled"):
        raise ValueError(f"HARTOGS_BACKEND must be auto/python/compiled, got {choice!r}")
    if choice == "python":
        return _ref, "python"
    try:
        from . import _core
        return _core, "compiled"
    except ImportError:
        if choice == "compiled":
            raise
        return _ref, "python"


_impl, BACKEND_NAME = _load()

monomial_matrix = _impl.monomial_matrix
kernel_cross = _impl.kernel_cross
kernel_diag = _impl.kernel_diag


def available_backends() -> dict[str, ModuleType]:
    """Every importable implementation, keyed by name."""
    out: dict[str, ModuleType] = {"python": _ref}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out
