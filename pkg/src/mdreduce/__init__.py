"""Multi-component block reduction on an emulated tensor unit, with a
baseline shuffle/atomic reduction and a small docking workload to compare
them in."""

__version__ = "0.1.0"
