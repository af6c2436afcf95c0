"""Physical and numerical constants shared across the package."""
# component power draw in mW
RF_CHAIN_POWER_MW = 118.0
PHASE_SHIFTER_POWER_MW = 20.0

NOISE_DENSITY_DBM_HZ = -174.0
DEFAULT_BANDWIDTH_HZ = 100e6

# path loss 36.72 + 35.3 log10(d)
PATH_LOSS_INTERCEPT_DB = 36.72
PATH_LOSS_SLOPE_DB = 35.3

# soft max-min: delta used below / above the high-budget threshold
DEFAULT_DELTA = 0.5
HIGH_BUDGET_DELTA = 1.0
HIGH_BUDGET_THRESHOLD_MW = 1000.0

BITS_PER_NAT = 1.4426950408889634
