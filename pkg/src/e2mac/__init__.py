"""Energy-efficient clustered MAC for massive machine-type uplinks: models, planner and simulator."""

__version__ = "0.1.0"
