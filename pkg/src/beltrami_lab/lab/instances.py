"""Deterministic test-instance generators.

Random fields are synthesized from Gaussian spectral coefficients on a fixed
mode lattice xi = (pi/S) * (m1, m2), |m|_inf <= band, drawn in a fixed order
from a seeded generator.  Because the mode lattice and the normalization are
grid-independent (the target norm is measured on a fixed reference grid), the
same seed produces samples of the *same continuum function* on any N, which is
what grid-refinement comparisons need.
"""

from __future__ import annotations

import numpy as np

from ..beltrami import gamma_to_mu
from ..dtn import Conductivity
from ..errors import TargetUnreachable
from ..fields import ComplexField, Grid, build_grid, disk_mask, lp_norm
from ..sobolev import sobolev_norm

__all__ = [
    "random_conductivity",
    "random_bandlimited_field",
    "radial_stretch_mu",
    "bump_mu",
    "disk_coverage_mask",
]

_REFERENCE_N = 256


def _mode_matrix(rng, band: int, decay_exponent: float, S: float) -> np.ndarray:
    """Coefficient matrix over the fixed mode lattice, zero mode excluded."""
    m = np.arange(-band, band + 1)
    xi = (np.pi / S) * m
    mag = np.hypot.outer(xi, xi)
    re = rng.standard_normal((2 * band + 1, 2 * band + 1))
    im = rng.standard_normal((2 * band + 1, 2 * band + 1))
    coeff = (re + 1j * im) * (1.0 + mag) ** (-decay_exponent)
    coeff[band, band] = 0.0
    return coeff


def _synthesize(grid: Grid, coeff: np.ndarray, S: float) -> np.ndarray:
    band = (coeff.shape[0] - 1) // 2
    m = np.arange(-band, band + 1)
    x = -grid.S + grid.h * np.arange(grid.N)
    E = np.exp(1j * np.outer(x, (np.pi / S) * m))  # (N, modes)
    return E @ coeff @ E.T


def _smooth_disk_window(z: np.ndarray, radius: float) -> np.ndarray:
    """C-infinity bump equal to exp(-t^2/(1-t^2)), t = |z|/radius, zero outside."""
    t2 = (np.abs(z) / radius) ** 2
    out = np.zeros_like(t2)
    inside = t2 < 1.0
    out[inside] = np.exp(-t2[inside] / (1.0 - t2[inside]))
    return out


def random_bandlimited_field(grid: Grid, band: int = 16, seed: int = 0,
                             decay_exponent: float = 0.0) -> ComplexField:
    """Random band-limited complex field, zero mean, unit L2 norm."""
    rng = np.random.default_rng(seed)
    coeff = _mode_matrix(rng, band, decay_exponent, grid.S)
    data = _synthesize(grid, coeff, grid.S)
    f = ComplexField(grid, data, f"bandlimited(seed={seed})")
    return ComplexField(grid, f.data / lp_norm(f, 2), f.tag)


def random_conductivity(alpha: float, gamma0: float, K: float, seed: int,
                        grid: Grid, band: int = 24) -> Conductivity:
    """Random conductivity with target fractional-smoothness norm.

    Draws Gaussian spectral coefficients with decay (1+|xi|)^-(1+alpha+0.1),
    band-limits, takes the real part, confines the contrast to the disk with a
    smooth window, rescales so ||gamma - 1|| in the order-alpha Bessel norm hits
    gamma0, clamps to [1/K, K] and re-measures.  Raises TargetUnreachable when
    clamping destroys more than half the target.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if gamma0 <= 0 or K <= 1:
        raise ValueError("need gamma0 > 0 and K > 1")
    rng = np.random.default_rng(seed)
    coeff = _mode_matrix(rng, band, 1.0 + alpha + 0.1, grid.S)

    def contrast_on(g: Grid) -> np.ndarray:
        u = np.real(_synthesize(g, coeff, grid.S))
        return u * _smooth_disk_window(g.nodes(), 0.95)

    # normalization measured on a fixed reference grid so the continuum
    # instance does not depend on the caller's N
    ref = grid if grid.N == _REFERENCE_N else build_grid(_REFERENCE_N, grid.S)
    ref_norm = sobolev_norm(ComplexField(ref, contrast_on(ref)), alpha).value
    scale = gamma0 / ref_norm

    gamma = 1.0 + scale * contrast_on(grid)
    gamma = np.clip(gamma, 1.0 / K, K)
    post = sobolev_norm(ComplexField(grid, gamma - 1.0), alpha).value
    if post < 0.5 * gamma0:
        raise TargetUnreachable(
            f"clamping to [1/K, K] kept only {post:.3g} of the target norm {gamma0:.3g}")
    field = ComplexField(grid, gamma, f"random_conductivity(seed={seed})")
    return Conductivity(K=K, gamma=field,
                        meta={"alpha": alpha, "gamma0_target": gamma0,
                              "gamma0_post_clamp": post, "seed": seed, "band": band})


def conductivity_mu(c: Conductivity) -> ComplexField:
    """Beltrami coefficient of a sampled conductivity."""
    return gamma_to_mu(c.gamma)


def radial_stretch_mu(grid: Grid, K: float) -> ComplexField:
    """mu = -kappa (z/zbar) on the unit disk, the coefficient of z |z|^{1/K - 1}."""
    kappa = (K - 1.0) / (K + 1.0)
    z = grid.nodes()
    zs = np.where(z == 0, 1.0, z)
    mu = np.where(np.abs(z) < 1.0, -kappa * zs / np.conj(zs), 0.0)
    mu[z == 0] = 0.0
    return ComplexField(grid, mu, f"radial_stretch(K={K})")


def bump_mu(grid: Grid, amplitude: float, radius: float = 0.9) -> ComplexField:
    """Smooth real bump amplitude * exp(-t^2/(1-t^2)), t = |z|/radius."""
    if abs(amplitude) >= 1:
        raise ValueError("amplitude must satisfy |a| < 1")
    data = amplitude * _smooth_disk_window(grid.nodes(), radius)
    return ComplexField(grid, data, f"bump({amplitude})")


def disk_coverage_mask(grid: Grid, radius: float, center: complex = 0j,
                       subsample: int = 16) -> np.ndarray:
    """Fractional cell coverage of the disk |z - center| < radius.

    Cells within half a diagonal of the circle are antialiased by subsampling;
    all others are exactly 0 or 1.  Used as an lp_norm weight this turns the
    masked quadrature of indicator contrasts into an O(h^2)-accurate area rule.
    """
    z = grid.nodes()
    d = np.abs(z - center)
    h = grid.h
    mask = (d < radius).astype(float)
    ring = np.abs(d - radius) <= h * np.sqrt(0.5) + 1e-15
    if np.any(ring):
        offs = (np.arange(subsample) + 0.5) / subsample * h
        ox, oy = np.meshgrid(offs, offs, indexing="ij")
        cell = (ox.ravel() - 0.5 * h) + 1j * (oy.ravel() - 0.5 * h)
        zr = z[ring][:, None] + cell[None, :]
        mask[ring] = np.mean(np.abs(zr - center) < radius, axis=1)
    return mask
