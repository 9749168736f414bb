"""Hot-loop MLP kernels with backend selection at import time.

The compiled Cython core is preferred when it was built; otherwise the
pure-numpy implementation is used. Force a choice with the environment
variable ``STOCHCERT_KERNELS`` (``auto`` | ``cython`` | ``numpy``); both
backends implement the identical contract documented in ``_mlp_np``.
"""

import os

from . import _mlp_np

_choice = os.environ.get("STOCHCERT_KERNELS", "auto").lower()
if _choice not in ("auto", "cython", "numpy"):
    raise RuntimeError(
        f"STOCHCERT_KERNELS must be auto, cython or numpy, got {_choice!r}"
    )

if _choice == "numpy":
    _impl = _mlp_np
    backend = "numpy"
else:
    try:
        from . import _mlp_cy as _impl  # type: ignore[attr-defined]

        backend = "cython"
    except ImportError:
        if _choice == "cython":
            raise ImportError(
                "STOCHCERT_KERNELS=cython but the compiled extension is not "
                "available; reinstall with a C toolchain present"
            ) from None
        _impl = _mlp_np
        backend = "numpy"

ACT_RELU = _mlp_np.ACT_RELU
ACT_TANH = _mlp_np.ACT_TANH

mlp_forward = _impl.mlp_forward
mlp_vjp_input = _impl.mlp_vjp_input


def available_backends():
    """Name -> module for every importable backend (used by benchmarks)."""
    out = {"numpy": _mlp_np}
    try:
        from . import _mlp_cy  # type: ignore[attr-defined]

        out["cython"] = _mlp_cy
    except ImportError:
        pass
    return out
