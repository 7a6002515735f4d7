"""Chebyshev-proxy consensus optimisation with private push-sum dissemination."""

from ._chebcon import *  # noqa: F401,F403

__version__ = "0.1.0"
