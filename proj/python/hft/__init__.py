"""Heat-flow transport maps on the 1d Gaussian and gamma model spaces.

Thin wrapper over the compiled extension: semigroup evaluators, the
Bakry-Emery gamma calculus, the characteristic-flow transport map with its
explicit Lipschitz bound, and the verification battery.
"""

try:
    from ._hft import *  # noqa: F401,F403
    from ._hft import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree builds put the extension directly on sys.path
    from _hft import *  # noqa: F401,F403
    from _hft import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
