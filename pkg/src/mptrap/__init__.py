"""Numerical toolkit for trapping and localized energy estimates on
(1+4)-dimensional Myers-Perry and Schwarzschild-Tangherlini black holes."""

__version__ = "0.1.0"

from .params import BlackHoleParams, SchwParams, HorizonData, horizons

__all__ = ["BlackHoleParams", "SchwParams", "HorizonData", "horizons", "__version__"]
