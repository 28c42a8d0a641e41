"""Session-aware next-item recommendation: non-neural baselines, session-aware
extensions and an offline evaluation protocol over implicit-feedback logs."""

__version__ = "0.1.0"
