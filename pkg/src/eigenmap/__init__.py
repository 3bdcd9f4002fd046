"""eigenmap: pullback-metric spectra of smooth maps, verified numerically."""

__version__ = "0.1.0"
