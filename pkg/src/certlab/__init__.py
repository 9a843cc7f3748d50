"""certlab: Fourier sampling of Boolean functions, heaviness statistics,
squared-forrelation experiments, and a verifiable randomness protocol built
from them.  All randomness flows from a single 64-bit seed through
counter-based streams, so every experiment is exactly reproducible.
"""

__version__ = "0.1.0"
