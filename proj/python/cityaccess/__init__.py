"""Python bindings for the cityaccess simulator core."""

from ._core import (  # noqa: F401
    ControllerState,
    DriverRecord,
    LedgerDag,
    LedgerError,
    PassengerRecord,
    Schedule,
    __version__,
    access_probability,
    annual_fleet_estimate,
    assign_passengers,
    attest_presence,
    classify_who,
    deposit_bond,
    dispersion_volume,
    draw_daily_access,
    forfeit_expired,
    has_priority,
    n_schedule,
    retrieve_bond,
    run_scenario,
    solve_optimum,
    steady_concentration,
    sweep,
    update_average,
    update_gamma,
)
