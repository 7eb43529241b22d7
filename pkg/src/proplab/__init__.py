"""proplab: bounded propagation observables, positive-commutator certificates,
and monotonic local-decay experiments on a 1-D lattice."""

__version__ = "0.1.0"

from . import certify, config, evolve, experiments, operators, potentials  # noqa: F401
