"""Random-cluster model on isoradial graphs: weights, loop representation,
parafermionic observables and Monte Carlo estimators."""

__version__ = "0.1.0"
