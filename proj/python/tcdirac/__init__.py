"""Two-center Dirac bound states and collisions in cubic Hermite spline bases."""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
    from ._core import __version__  # noqa: F401
except ImportError:  # in-tree runs: _core.so directly on PYTHONPATH
    from _core import *  # type: ignore # noqa: F401,F403
    from _core import __version__  # type: ignore # noqa: F401
