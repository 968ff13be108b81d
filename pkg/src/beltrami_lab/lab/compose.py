"""Composition of a coefficient with a quasiconformal phase: mu(phi(z))."""

from __future__ import annotations

from typing import Union

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ..beltrami import PrincipalSolution
from ..errors import OutOfDomain
from ..fields import ComplexField

__all__ = ["compose_field"]


def compose_field(mu: ComplexField, phi: Union[PrincipalSolution, ComplexField],
                  margin: float = 2.0) -> ComplexField:
    """Sample mu(phi(z)) by bicubic interpolation of mu's grid samples.

    ``phi`` is a principal solution (its phase field is used) or a plain map
    field on the same grid.  The map must stay ``margin`` spacings inside the
    grid box, otherwise OutOfDomain is raised.  With the identity map the
    result reproduces mu at the nodes to interpolation round-off.
    """
    w = phi.phi if isinstance(phi, PrincipalSolution) else phi
    if w.grid != mu.grid:
        raise ValueError("map and coefficient live on different grids")
    g = mu.grid
    lo = -g.S + margin * g.h
    hi = g.S - (margin + 1.0) * g.h
    px, py = w.data.real, w.data.imag
    if px.min() < lo or px.max() > hi or py.min() < lo or py.max() > hi:
        raise OutOfDomain(
            f"map range [{px.min():.3f}, {px.max():.3f}] x [{py.min():.3f}, {py.max():.3f}] "
            f"leaves the interior box [{lo:.3f}, {hi:.3f}]^2")
    x = -g.S + g.h * np.arange(g.N)
    re = RectBivariateSpline(x, x, mu.data.real, kx=3, ky=3)
    im = RectBivariateSpline(x, x, mu.data.imag, kx=3, ky=3)
    vals = re(px.ravel(), py.ravel(), grid=False) + 1j * im(px.ravel(), py.ravel(), grid=False)
    return ComplexField(g, vals.reshape(g.N, g.N), f"compose({mu.tag})")
