"""Gauss-Legendre rules and exact monomial moments on boxes."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_nodes(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [a, b], exact for polynomials of degree 2*order - 1."""
    x, w = _gl_rule(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def box_monomial_moments(lower, upper, powers) -> np.ndarray:
    """Integrals of monomials x**powers over a box, one coordinate at a time.

    ``powers`` is a nonnegative integer array whose last axis indexes
    coordinates; the result drops that axis.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    p1 = np.asarray(powers, dtype=np.int64) + 1
    return np.prod((upper**p1 - lower**p1) / p1, axis=-1)
