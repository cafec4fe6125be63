"""Replicator-mutator dynamics with environmental feedback.

Modules: ``model`` (parameters, vector field), ``equilibria``,
``bifurcation`` (Hopf point, Lyapunov coefficient, Dulac threshold),
``flow`` (integration), ``cycles`` (return maps, sweeps), ``control``
(incentive design), ``lienard`` (uniqueness conditions) and ``cli``.
"""

from .model import PayoffPair, State, SystemParams, payoff_at, reparameterize, vector_field

__all__ = ["PayoffPair", "State", "SystemParams", "payoff_at", "reparameterize", "vector_field"]
__version__ = "0.1.0"
