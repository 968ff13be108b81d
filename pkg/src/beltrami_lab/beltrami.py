"""Linear Beltrami solver: principal solutions via the contractive Neumann series.

The equation dbar(phi) = mu dz(phi) + nu conj(dz(phi)) with |mu| + |nu| <= kappa < 1
and coefficients supported in the unit disk has a unique homeomorphic solution
normalized by phi(z) - z = O(1/z).  Writing phi = z + C h reduces it to the
fixed point

    h = mu T h + nu conj(T h) + (mu + nu),

which contracts at rate kappa in L^2 because T is an isometry.  Picard
iteration is used verbatim (no acceleration) so the iteration count obeys the
geometric bound ceil(log tol / log kappa) + O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import fft as sfft

from .errors import EllipticityViolation, MaxIterExceeded
from .fields import ComplexField, Grid, disk_mask, lp_norm
from .transforms import _kit, beurling, cauchy

__all__ = [
    "BeltramiPair",
    "PrincipalSolution",
    "NeumannResult",
    "gamma_to_mu",
    "mu_to_gamma",
    "neumann_solve",
    "principal_solution",
]

_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class BeltramiPair:
    """Coefficient pair (mu, nu) with certified ellipticity bound.

    kappa is the grid ess-sup of |mu| + |nu| and K = (1 + kappa)/(1 - kappa).
    Construction fails if kappa >= 1 or if either coefficient has support
    outside the unit disk.
    """

    mu: ComplexField
    nu: ComplexField
    kappa: float
    K: float

    @classmethod
    def make(cls, mu: ComplexField, nu: Optional[ComplexField] = None) -> "BeltramiPair":
        if nu is None:
            nu = ComplexField(mu.grid, np.zeros_like(mu.data))
        if mu.grid != nu.grid:
            raise ValueError("mu and nu live on different grids")
        kappa = float(np.max(np.abs(mu.data) + np.abs(nu.data)))
        if kappa >= 1.0:
            raise EllipticityViolation(f"|mu| + |nu| reaches {kappa:.6f} >= 1")
        outside = ~disk_mask(mu.grid)
        spill = max(float(np.max(np.abs(mu.data[outside]))),
                    float(np.max(np.abs(nu.data[outside]))))
        if spill > _SUPPORT_TOL * (1.0 + kappa):
            raise EllipticityViolation(
                f"coefficients must be supported in the unit disk (max outside = {spill:.3e})")
        K = (1.0 + kappa) / (1.0 - kappa)
        return cls(mu=mu, nu=nu, kappa=kappa, K=K)

    @classmethod
    def from_mu(cls, mu: ComplexField) -> "BeltramiPair":
        return cls.make(mu, None)


class NeumannResult(NamedTuple):
    h: ComplexField
    residual: float
    iterations: int


@dataclass(frozen=True)
class PrincipalSolution:
    """h = dbar(phi), phi = z + C h, dphi = 1 + T h, plus convergence diagnostics."""

    pair: BeltramiPair
    h: ComplexField
    phi: ComplexField
    dphi: ComplexField
    residual: float
    iterations: int

    def jacobian_positive_fraction(self) -> float:
        jac = np.abs(self.dphi.data) ** 2 - np.abs(self.h.data) ** 2
        return float(np.mean(jac > 0))

    def ellipticity_fraction(self, slack: Optional[float] = None) -> float:
        """Share of nodes with |dbar phi| <= kappa |dz phi| + slack.

        The default slack sqrt(h) * kappa covers the sampling error of rough,
        ellipticity-saturating coefficients.
        """
        if slack is None:
            slack = np.sqrt(self.h.grid.h) * max(self.pair.kappa, 1e-3)
        ok = np.abs(self.h.data) <= self.pair.kappa * np.abs(self.dphi.data) + slack
        return float(np.mean(ok))


def gamma_to_mu(gamma: ComplexField) -> ComplexField:
    """Conductivity -> Beltrami coefficient, mu = (1 - gamma)/(1 + gamma)."""
    g = gamma.data
    if np.max(np.abs(g.imag)) > 1e-12:
        raise EllipticityViolation("conductivity must be real-valued")
    if np.min(g.real) <= 0:
        raise EllipticityViolation("conductivity must be positive")
    return ComplexField(gamma.grid, (1.0 - g) / (1.0 + g), "mu")


def mu_to_gamma(mu: ComplexField) -> ComplexField:
    """Beltrami coefficient -> conductivity, gamma = (1 - mu)/(1 + mu)."""
    m = mu.data
    if np.max(np.abs(m.imag)) > 1e-12:
        raise EllipticityViolation("coefficient must be real-valued")
    if np.max(np.abs(m.real)) >= 1:
        raise EllipticityViolation("coefficient must satisfy |mu| < 1")
    return ComplexField(mu.grid, (1.0 - m) / (1.0 + m), "gamma")


def neumann_solve(pair: BeltramiPair, rhs: ComplexField, tol: float = 1e-10,
                  max_iter: int = 5000) -> NeumannResult:
    """Fixed point of h -> mu T h + nu conj(T h) + rhs by plain Picard iteration.

    Stops when the update norm (which bounds the fixed-point residual of the
    previous iterate, and dominates that of the returned one) drops below
    tol * ||rhs||_2.  Raises MaxIterExceeded carrying the last residual.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if pair.mu.grid != rhs.grid:
        raise ValueError("rhs grid differs from coefficient grid")
    kit = _kit(rhs.grid.N, rhs.grid.S)
    h2 = rhs.grid.h ** 2
    mu = pair.mu.data
    nu = pair.nu.data
    use_nu = bool(np.any(nu))
    use_mu = bool(np.any(mu))
    b = rhs.data
    nrhs = np.sqrt(np.sum(np.abs(b) ** 2) * h2)
    if nrhs == 0:
        return NeumannResult(ComplexField(rhs.grid, b), 0.0, 1)
    h = b.copy()
    for it in range(1, max_iter + 1):
        t = sfft.ifft2(sfft.fft2(h) * kit.mult_T)
        hn = b.copy()
        if use_mu:
            hn += mu * t
        if use_nu:
            hn += nu * np.conj(t)
        res = float(np.sqrt(np.sum(np.abs(hn - h) ** 2) * h2) / nrhs)
        h = hn
        if res <= tol:
            return NeumannResult(ComplexField(rhs.grid, h), res, it)
    raise MaxIterExceeded(
        f"Neumann iteration did not reach tol={tol:g} in {max_iter} steps "
        f"(last residual {res:.3e})", residual=res, iterations=max_iter)


def principal_solution(pair: BeltramiPair, tol: float = 1e-10,
                       max_iter: int = 5000,
                       rhs: Optional[ComplexField] = None) -> PrincipalSolution:
    """Normalized homeomorphic solution phi = z + C h, h = neumann_solve(pair, mu + nu)."""
    grid = pair.mu.grid
    if rhs is None:
        rhs = ComplexField(grid, pair.mu.data + pair.nu.data)
    h, res, it = neumann_solve(pair, rhs, tol=tol, max_iter=max_iter)
    # the iteration uses the bare multiplier T (exact isometry, provable rate);
    # the output fields use the split-completed transforms so that dphi = 1 + T h
    # stays the derivative of phi = z + C h even when int(h) != 0
    ch = cauchy(h, on_outer_mass="ignore")
    kit = _kit(grid.N, grid.S)
    phi = ComplexField(grid, kit.z + ch.data, "phi")
    dphi = ComplexField(grid, 1.0 + beurling(h).data, "dphi")
    return PrincipalSolution(pair=pair, h=h, phi=phi, dphi=dphi,
                             residual=res, iterations=it)
