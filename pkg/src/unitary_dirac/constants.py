ALPHA = 1.0 / 137.035999084
ELECTRON_MASS_EV = 510998.95
