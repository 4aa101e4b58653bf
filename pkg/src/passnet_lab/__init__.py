"""passnet-lab: passing-network analytics and match-outcome prediction.

Turns soccer event logs into per-team passing networks, extracts
network and match-statistics features, trains and explains outcome
classifiers, and runs clustering / correlation / season-simulation
studies through a deterministic pipeline CLI.
"""

from .kernels import KERNEL_IMPLEMENTATION

__version__ = "0.1.0"

__all__ = ["KERNEL_IMPLEMENTATION", "__version__"]
