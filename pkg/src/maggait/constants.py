"""Physical constants shared across the package."""

import numpy as np

# Vacuum permeability (T m / A). The single authoritative definition.
MU0: float = 4.0 * np.pi * 1e-7

# Standard gravity magnitude (m/s^2), used only for defaults.
G_STANDARD: float = 9.81
