from ._backend import BACKEND
from .core import (Jet, apply_univariate, constant, cos, cosh, dot, exp, log,
                   norm_sq, sin, sinh, sqrt, variable)
from .maps import ChartDomain, Jet3, SmoothMap, evaluate_jet, finite_difference_jet

__all__ = [
    "BACKEND",
    "Jet",
    "constant",
    "apply_univariate",
    "variable",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "sinh",
    "cosh",
    "dot",
    "norm_sq",
    "ChartDomain",
    "Jet3",
    "SmoothMap",
    "evaluate_jet",
    "finite_difference_jet",
]
