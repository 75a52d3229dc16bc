"""Bayesian game models of spectrum sharing between a primary and a secondary user."""

from .core_model import ChannelGains, EntryAction, GameParams, RestrictedAction, SeqAction
from .distributions import (Discrete, GainPriors, MonteCarlo, PointMass, Quadrature,
                            Triangular, TruncatedExponential, Uniform, parse_distribution)

__version__ = "0.1.0"

__all__ = [
    "ChannelGains", "EntryAction", "GameParams", "RestrictedAction", "SeqAction",
    "Discrete", "GainPriors", "MonteCarlo", "PointMass", "Quadrature", "Triangular",
    "TruncatedExponential", "Uniform", "parse_distribution",
]
