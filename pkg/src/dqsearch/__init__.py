"""Dissipative quantum search at desk scale.

Dense simulation of purely dissipative Lindblad dynamics on an unstructured
search space, the single-ancilla discrete-time channel that approximates it,
symmetry-reduced ODE systems for large qubit counts, and the classical
random-walk baselines they are compared against.
"""

from dqsearch import baselines, cli, continuous, discrete, jump, linops, model

__all__ = [
    "baselines",
    "cli",
    "continuous",
    "discrete",
    "jump",
    "linops",
    "model",
]

__version__ = "0.1.0"
