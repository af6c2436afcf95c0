"""Power accounting of the hybrid transmitter."""
from typing import Dict, List, Sequence, Union

from hybrid_precoding._utils.constants import (
    DEFAULT_DELTA,
    HIGH_BUDGET_DELTA,
    HIGH_BUDGET_THRESHOLD_MW,
    PHASE_SHIFTER_POWER_MW,
    RF_CHAIN_POWER_MW,
)
from hybrid_precoding.exceptions import ConfigurationError, DomainError

AUTO_DELTA = "auto"


def total_power(
    transmit_mw: float,
    n_rf: int,
    n_ps: int,
    rf_power_mw: float = RF_CHAIN_POWER_MW,
    ps_power_mw: float = PHASE_SHIFTER_POWER_MW,
) -> float:
    """Return P_total = P + N_c * P_RF + N_PS * P_PS in mW."""
    if min(transmit_mw, n_rf, n_ps) < 0:
        raise ConfigurationError("Power and component counts must be non-negative.")
    return transmit_mw + n_rf * rf_power_mw + n_ps * ps_power_mw


def transmit_budget_from_total(
    total_mw: float,
    n_rf: int,
    n_ps: int,
    rf_power_mw: float = RF_CHAIN_POWER_MW,
    ps_power_mw: float = PHASE_SHIFTER_POWER_MW,
) -> float:
    """Return the transmit power P left for the digital precoder once the hardware is paid for."""
    hardware = n_rf * rf_power_mw + n_ps * ps_power_mw
    if total_mw < hardware:
        raise ConfigurationError(
            f"A total budget of {total_mw} mW cannot power {n_rf} RF chains and {n_ps} phase shifters ({hardware} mW)."
        )
    return total_mw - hardware


def resolve_delta(delta: Union[float, str, None], transmit_mw: float) -> float:
    """Resolve `auto` (or None) to 1 above the high-budget threshold and 0.5 otherwise.

    :param delta: A number in (0, 1], "auto" or None.
    :param transmit_mw: Transmit power P of the sweep point.
    """
    if delta is None or (isinstance(delta, str) and delta.strip().lower() == AUTO_DELTA):
        return HIGH_BUDGET_DELTA if transmit_mw > HIGH_BUDGET_THRESHOLD_MW else DEFAULT_DELTA
    value = float(delta)
    if not 0.0 < value <= 1.0:
        raise DomainError(f"delta must lie in (0, 1], got {value}.")
    return value


def power_table(
    n_rf: int,
    n_ps_values: Sequence[int],
    transmit_mw: float,
    total_mw: float,
    rf_power_mw: float = RF_CHAIN_POWER_MW,
    ps_power_mw: float = PHASE_SHIFTER_POWER_MW,
) -> List[Dict[str, float]]:
    """Total power at a fixed transmit power and transmit power at a fixed total, per N_PS."""
    rows = []
    for n_ps in n_ps_values:
        rows.append(
            {
                "n_ps": n_ps,
                "total_power_mw": total_power(transmit_mw, n_rf, n_ps, rf_power_mw, ps_power_mw),
                "transmit_power_mw": transmit_budget_from_total(total_mw, n_rf, n_ps, rf_power_mw, ps_power_mw),
            }
        )
    return rows
