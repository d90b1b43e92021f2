"""acband: capped parallel algorithm configuration with combinatorial successive elimination."""

__version__ = "0.1.0"
