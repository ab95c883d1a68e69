"""Two-colour EPR entanglement simulator and analysis toolkit.

Gaussian-state operations, below-threshold NOPO noise spectra, seeded
homodyne-trace synthesis and the spectral analysis chain, backed by the C++
core.
"""

from eprsim._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
