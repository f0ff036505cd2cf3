"""Numerics for randomized-smoothing certification.

Total-variation distances between shifted noise distributions, orthogonal
sign-vector direction families, closed-form lower bounds on the noise
magnitude needed for l_p certification, Monte Carlo certification of
smoothed classifiers, and adversarial witness classifiers.
"""
from .kernels import BACKEND

__version__ = "0.1.0"
