"""Complex geometric optics solutions f(z, k) = exp(i k phi(z, k)).

The phase phi solves the nonlinear Beltrami-type problem

    dbar(phi) = -lam * mu(z) * (conj(k)/k) * e_{-k}(phi) * conj(dz(phi)),
    phi(z) - z = O(1/z),

with |lam| = 1 and e_{-k}(w) = exp(-2i Re(k w)) unimodular by construction.
A damped Picard outer iteration freezes the unimodular factor at the current
iterate and solves the resulting linear principal-solution problem; damping
halves on stalls (floor 1/16) and failures raise NoConvergence with the
iterate history.  k = 0 short-circuits to f = 1.

Also here: the linearized solutions psi with the modulation acting on z rather
than on psi, the Neumann-series diagnostics f_n = mu T_n f_{n-1}, decay tables
for sup |phi - z| over a k-lattice, and the conductivity-equation solutions
u = Re f_mu + i Im f_{-mu}.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import fft as sfft

from .beltrami import BeltramiPair, PrincipalSolution, principal_solution
from .errors import FrequencyOverflow, MismatchedSolutions, NoConvergence
from .fields import ComplexField, Grid, lp_norm, modulation, to_internal_frequency
from .transforms import _kit, shifted_beurling

__all__ = [
    "CgoSolution",
    "solve_cgo",
    "u_gamma",
    "linear_psi",
    "epsilon_decay_table",
    "DecayTable",
    "neumann_term_fn",
    "NeumannTerms",
    "fourier_tail",
]


@dataclass(frozen=True)
class CgoSolution:
    """One CGO solve: phase phi, solution f = e^{ikz} M, M = e^{ik(phi - z)}."""

    k: complex
    lam: complex
    phi: ComplexField
    f: ComplexField
    M: ComplexField
    outer_residual: float
    outer_iterations: int

    @property
    def eps(self) -> ComplexField:
        """Phase correction eps = phi - z (f = e^{ik(z + eps)})."""
        g = self.phi.grid
        return ComplexField(g, self.phi.data - g.nodes(), "eps")


def _e_minus_k_of(k: complex, w: np.ndarray) -> np.ndarray:
    # exp(-i(k w + conj(k w))) = exp(-2i Re(k w)); exactly unimodular
    return np.exp(-2j * np.real(k * w))


def _validate_mu(mu: ComplexField) -> float:
    sup = float(np.max(np.abs(mu.data)))
    if sup >= 1.0:
        raise ValueError(f"need sup|mu| < 1, got {sup:.6f}")
    return sup


def solve_cgo(mu: ComplexField, k: complex, lam: complex = 1.0,
              tol: float = 1e-8, max_outer: int = 200,
              inner_tol: Optional[float] = None) -> CgoSolution:
    """Solve for the CGO phase by damped Picard iteration on the frozen coefficient.

    Each outer step solves the linear principal-solution problem with
    nu_j = -lam mu (conj(k)/k) e_{-k}(phi_j) and relaxes
    phi_{j+1} = (1-w) phi_j + w phi_new; stops when ||phi_{j+1} - phi_j||_inf <= tol.
    The reported outer_residual is the L2 residual of the nonlinear equation at
    the returned phase.
    """
    grid = mu.grid
    sup_mu = _validate_mu(mu)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("lam must be unimodular")
    kit = _kit(grid.N, grid.S)
    if k == 0:
        one = ComplexField(grid, np.ones((grid.N, grid.N), dtype=complex), "f")
        return CgoSolution(k=0j, lam=complex(lam),
                           phi=ComplexField(grid, kit.z.copy(), "phi"),
                           f=one, M=one, outer_residual=0.0, outer_iterations=1)

    itol = min(1e-11, tol * 1e-3) if inner_tol is None else inner_tol
    phase_factor = lam * np.conj(k) / k
    omega = 1.0 if sup_mu <= 0.5 else 0.5
    phi = kit.z.copy()
    history = []
    last_delta = np.inf
    sol = None
    for j in range(1, max_outer + 1):
        nu = ComplexField(grid, -phase_factor * mu.data * _e_minus_k_of(k, phi))
        pair = BeltramiPair.make(ComplexField(grid, np.zeros_like(nu.data)), nu)
        sol = principal_solution(pair, tol=itol)
        delta = float(np.max(np.abs(sol.phi.data - phi)))
        history.append((j, delta, omega))
        phi_new = (1.0 - omega) * phi + omega * sol.phi.data
        if delta <= tol:
            phi = phi_new
            break
        if delta > 1.2 * last_delta and omega > 1.0 / 16.0:
            omega *= 0.5
        last_delta = delta
        phi = phi_new
    else:
        raise NoConvergence(
            f"outer iteration stalled after {max_outer} steps "
            f"(last delta {history[-1][1]:.3e})", history=history[-10:])

    phi_f = ComplexField(grid, phi, "phi")
    eps = phi - kit.z
    M = np.exp(1j * k * eps)
    f = np.exp(1j * k * kit.z) * M
    if np.any(M == 0):
        raise NoConvergence("M underflowed to zero on the grid", history=history[-10:])

    # equation residual at the returned phase (spectral derivatives)
    dbar_phi = sfft.ifft2(sfft.fft2(eps) * kit.mult_dbar)
    dz_phi = 1.0 + sfft.ifft2(sfft.fft2(eps) * kit.mult_dz)
    rhs = -phase_factor * mu.data * _e_minus_k_of(k, phi) * np.conj(dz_phi)
    h2 = grid.h ** 2
    denom = np.sqrt(np.sum(np.abs(mu.data) ** 2) * h2)
    resid = float(np.sqrt(np.sum(np.abs(dbar_phi - rhs) ** 2) * h2) / max(denom, 1e-300))

    return CgoSolution(k=complex(k), lam=complex(lam), phi=phi_f,
                       f=ComplexField(grid, f, "f"), M=ComplexField(grid, M, "M"),
                       outer_residual=resid, outer_iterations=len(history))


def u_gamma(fp: CgoSolution, fm: CgoSolution) -> tuple[ComplexField, ComplexField]:
    """Conductivity-equation solutions u = Re f_mu + i Im f_{-mu} and its companion.

    ``fp`` and ``fm`` must be the CGO solutions for mu and -mu at the same k
    with lam = 1.  Returns (u, u_tilde) with u_tilde = Im f_mu + i Re f_{-mu}.
    """
    if fp.phi.grid != fm.phi.grid:
        raise MismatchedSolutions("solutions live on different grids")
    if fp.k != fm.k:
        raise MismatchedSolutions(f"spectral parameters differ: {fp.k} vs {fm.k}")
    if fp.lam != 1.0 or fm.lam != 1.0:
        raise MismatchedSolutions("u_gamma requires lam = 1 solutions")
    grid = fp.phi.grid
    u = np.real(fp.f.data) + 1j * np.imag(fm.f.data)
    ut = np.imag(fp.f.data) + 1j * np.real(fm.f.data)
    return (ComplexField(grid, u, "u_gamma"), ComplexField(grid, ut, "u_gamma_tilde"))


def linear_psi(mu: ComplexField, k: complex, lam: complex = 1.0,
               tol: float = 1e-10) -> PrincipalSolution:
    """Linearized solution: modulation on z, not on psi.

    Solves dbar(psi) = (conj(k)/k) lam e_{-k}(z) mu(z) dz(psi) as a principal
    solution with the oscillating coefficient in the mu slot and nu = 0.
    """
    _validate_mu(mu)
    grid = mu.grid
    if k == 0:
        raise ValueError("k must be nonzero for the linearized problem")
    coeff = (np.conj(k) / k) * lam * modulation(grid, -k).data * mu.data
    pair = BeltramiPair.make(ComplexField(grid, coeff))
    return principal_solution(pair, tol=tol)


@dataclass(frozen=True)
class DecayTable:
    """sup_z |phi_lam(z, k) - z| over a (k, lambda) lattice."""

    rows: tuple  # of (k, lam, sup_abs, outer_iterations, outer_residual)

    def slope(self) -> float:
        """Least-squares slope of log(sup over lambda) against log |k|."""
        by_k: dict = {}
        for k, lam, sup, its, res in self.rows:
            by_k.setdefault(abs(k), []).append(sup)
        ks = sorted(by_k)
        if len(ks) < 2:
            raise ValueError("need at least two |k| values for a slope")
        x = np.log(ks)
        y = np.log([max(by_k[a]) for a in ks])
        return float(np.polyfit(x, y, 1)[0])

    def lambda_spread(self, kabs: float) -> float:
        """max/min of sup|phi - z| across lambda at fixed |k|."""
        vals = [sup for k, lam, sup, _, _ in self.rows if abs(abs(k) - kabs) < 1e-12]
        return float(max(vals) / min(vals))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k_re", "k_im", "lambda_re", "lambda_im",
                        "sup_abs_phi_minus_z", "outer_iterations", "outer_residual"])
            for k, lam, sup, its, res in self.rows:
                w.writerow([repr(k.real), repr(k.imag), repr(lam.real),
                            repr(lam.imag), repr(sup), its, repr(res)])


def epsilon_decay_table(mu: ComplexField, k_list: Sequence[complex],
                        lambda_list: Sequence[complex] = (1.0,),
                        tol: float = 1e-6, max_outer: int = 200,
                        workers: int = 1) -> DecayTable:
    """Tabulate sup_z |phi_lam(z, k) - z| for each (k, lambda).

    Cells are independent; with workers > 1 they run in a thread pool but are
    always reduced in (k, lambda) order, so results do not depend on the pool
    size.  mu = 0 yields an all-zero table.
    """
    grid = mu.grid
    z = grid.nodes()
    cells = [(complex(k), complex(lam)) for k in k_list for lam in lambda_list]

    def cell(kl):
        k, lam = kl
        sol = solve_cgo(mu, k, lam, tol=tol, max_outer=max_outer)
        sup = float(np.max(np.abs(sol.phi.data - z)))
        return (k, lam, sup, sol.outer_iterations, sol.outer_residual)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = tuple(ex.map(cell, cells))
    else:
        rows = tuple(cell(c) for c in cells)
    return DecayTable(rows=rows)


@dataclass(frozen=True)
class NeumannTerms:
    """Neumann-series terms f_0 = mu, f_n = mu T_n f_{n-1}, with Fourier tails."""

    k: complex
    fields: tuple  # ComplexField, orders 0..n_max
    norms: tuple   # L2 norms
    tails: tuple   # dict {R: tail_2(f_n, R)} per order, R in spectral-parameter units


def fourier_tail(f: ComplexField, R: float) -> float:
    """L2 mass of fhat beyond radius R, measured in spectral-parameter units.

    The spectral parameter k pairs with internal frequency xi = 2 conj(k), so
    the cutoff |k-units| > R corresponds to |xi| > 2R on the internal lattice.
    """
    g = f.grid
    F = sfft.fft2(f.data) * g.h ** 2
    sel = np.abs(g.freqs()) > 2.0 * R
    dxi2 = (2.0 * np.pi / (g.N * g.h)) ** 2
    return float(np.sqrt(np.sum(np.abs(F[sel]) ** 2) * dxi2 / (2.0 * np.pi) ** 2))


def neumann_term_fn(mu: ComplexField, k: complex, n_max: int,
                    tail_radii: Optional[Iterable[float]] = None) -> NeumannTerms:
    """Compute f_0..f_{n_max} and their high-frequency tails.

    Raises FrequencyOverflow (via the shifted transform) if |n_max * k| exceeds
    the Nyquist margin.  Default tail radii are |k|/4, |k|/2, |k|.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    grid = mu.grid
    # validate the largest shift up front so the failure is atomic
    if abs(to_internal_frequency(n_max * k)) > 0.75 * grid.nyquist:
        raise FrequencyOverflow(
            f"|{n_max} * k| modulation exceeds the Nyquist margin of the grid")
    radii = tuple(tail_radii) if tail_radii is not None else (abs(k) / 4, abs(k) / 2, abs(k))
    fields = [mu.with_tag("f_0")]
    for n in range(1, n_max + 1):
        t = shifted_beurling(fields[-1], n, k, form="conjugation")
        fields.append(ComplexField(grid, mu.data * t.data, f"f_{n}"))
    norms = tuple(lp_norm(f, 2) for f in fields)
    tails = tuple({R: fourier_tail(f, R) for R in radii} for f in fields)
    return NeumannTerms(k=complex(k), fields=tuple(fields), norms=norms, tails=tails)
