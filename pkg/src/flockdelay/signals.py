"""
The signal definition for flockdelay.

Example:
    ```python
    from flockdelay.signals import post_integrate

    @post_integrate.connect
    def on_post_integrate(config, history):
        print(f"integrated up to t = {history.t_now}")
    ```
"""

from blinker import NamedSignal, Namespace

flock_signals = Namespace()

pre_integrate: NamedSignal = flock_signals.signal("pre_integrate")
"""Called before the integrator takes its first step.

Args:
    config (SystemConfig): The system being integrated
    plan (numpy.ndarray): The aligned step times
"""
post_integrate: NamedSignal = flock_signals.signal("post_integrate")
"""Called after a run reached its horizon.

Args:
    config (SystemConfig): The system that was integrated
    history (TrajectoryHistory): The completed trajectory
"""
post_report: NamedSignal = flock_signals.signal("post_report")
"""Called after the diagnostics report of a run is built.

Args:
    config (SystemConfig): The system that was integrated
    report (DiagnosticsReport): The report with constants and verdicts
"""
post_sweep_point: NamedSignal = flock_signals.signal("post_sweep_point")
"""Called after one grid point of a sweep finished.

Args:
    scenario (Scenario): The derived scenario of the grid point
    summary (dict[str, Any]): The summary row written for that point
"""
