"""Analytic parametrizations of curved boundary and interface arcs.

Curved mesh edges never store point samples; they reference a
:class:`CurveParam` plus a parameter sub-interval, so that quadrature and
normals are exact up to the certified rule accuracy.  Curves that may
appear in mesh files come from a small named registry, see
:func:`make_curve`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class CurveParam:
    """Regular, invertible parametrization ``t -> (x, y)`` of an arc.

    Parameters
    ----------
    name : str
        Registry key (used for mesh serialization); empty for ad-hoc curves.
    map : callable
        Vectorized ``t -> (n, 2)`` array of points.
    derivative : callable
        Vectorized ``t -> (n, 2)`` array of first derivatives.
    t_range : (float, float)
        Natural parameter domain of the curve.
    smoothness_order : int
        Smoothness metadata; must be at least the method order in use.
    params : tuple
        Extra registry parameters (only "affine" uses them).
    """

    name: str
    map: Callable
    derivative: Callable
    t_range: tuple[float, float] = (0.0, 1.0)
    smoothness_order: int = 16
    params: tuple = ()

    def points(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(self.map(t), dtype=float)

    def velocity(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(self.derivative(t), dtype=float)


def graph_curve(name, g, dg, t_range=(0.0, 1.0), params=()):
    """Curve ``t -> (t, g(t))`` for a graph function g."""

    def _map(t):
        t = np.asarray(t, dtype=float)
        return np.stack([t, np.asarray(g(t), dtype=float) + 0.0 * t], axis=-1)

    def _deriv(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.ones_like(t), np.asarray(dg(t), dtype=float) + 0.0 * t], axis=-1)

    return CurveParam(name=name, map=_map, derivative=_deriv,
                      t_range=t_range, params=tuple(params))


def affine_curve(x0, y0, x1, y1):
    """Straight segment from (x0, y0) to (x1, y1), parametrized on [0, 1]."""
    p0 = np.array([x0, y0], dtype=float)
    d = np.array([x1 - x0, y1 - y0], dtype=float)

    def _map(t):
        t = np.asarray(t, dtype=float)
        return p0[None, :] + t[..., None] * d[None, :]

    def _deriv(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(d, t.shape + (2,)).copy()

    return CurveParam(name="affine", map=_map, derivative=_deriv,
                      params=(float(x0), float(y0), float(x1), float(y1)))


def _registry():
    reg = {}
    reg["zero"] = lambda params: graph_curve(
        "zero", lambda t: np.zeros_like(t), lambda t: np.zeros_like(t))
    reg["sin_pi_over20"] = lambda params: graph_curve(
        "sin_pi_over20",
        lambda t: np.sin(np.pi * t) / 20.0,
        lambda t: np.pi * np.cos(np.pi * t) / 20.0)
    reg["sin_3pi_over20"] = lambda params: graph_curve(
        "sin_3pi_over20",
        lambda t: np.sin(3.0 * np.pi * t) / 20.0,
        lambda t: 3.0 * np.pi * np.cos(3.0 * np.pi * t) / 20.0)
    reg["one_plus_sin_3pi_over20"] = lambda params: graph_curve(
        "one_plus_sin_3pi_over20",
        lambda t: 1.0 + np.sin(3.0 * np.pi * t) / 20.0,
        lambda t: 3.0 * np.pi * np.cos(3.0 * np.pi * t) / 20.0)
    reg["affine"] = lambda params: affine_curve(*params)
    return reg


_REGISTRY = _registry()

REGISTRY_NAMES = tuple(sorted(_REGISTRY))


def make_curve(name, params=()):
    """Instantiate a registry curve by name.

    Raises
    ------
    KeyError
        Unknown curve name.
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown curve {name!r}; known: {', '.join(REGISTRY_NAMES)}")
    return factory(tuple(float(p) for p in params))


def validate_curve(curve, samples=256):
    """Check regularity (nonvanishing derivative) and sampled injectivity.

    Raises ``ValueError`` on violation; returns (min speed, min separation)
    otherwise.
    """
    t0, t1 = curve.t_range
    t = np.linspace(t0, t1, samples)
    speed = np.linalg.norm(curve.velocity(t), axis=1)
    min_speed = float(speed.min())
    if min_speed <= 0.0:
        raise ValueError(f"curve {curve.name!r}: derivative vanishes on sampled grid")
    pts = curve.points(t)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    min_sep = float(np.sqrt(d2.min()))
    if min_sep <= 0.0:
        raise ValueError(f"curve {curve.name!r}: self-intersection at sample resolution")
    return min_speed, min_sep
