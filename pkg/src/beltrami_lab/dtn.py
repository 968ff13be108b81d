"""Forward conductivity solver on the unit disk and Dirichlet-to-Neumann matrices.

The DtN operator is assembled in the trigonometric boundary basis e^{i n theta},
|n| <= N_b, from first-order finite elements on the symmetric ring mesh:
entry (m, n) = (1/2 pi) int_D gamma grad(u_n) . conj(grad(Phi_m)) with u_n the
discrete gamma-harmonic extension of e^{i n theta} and Phi_m any extension of
e^{i m theta} (the pairing is extension-independent up to solver tolerance,
and Hermitian for real gamma).  For gamma = 1 the matrix is diag(|n|).

The operator distance rho realizes the H^{1/2} -> H^{-1/2} norm through the
diagonal Fourier weights W = diag((1 + n^2)^(1/2)):

    rho = || W^(-1/2) (L1 - L2) W^(-1/2) ||_2.

`radial_dtn_oracle` provides the independent route for radial piecewise
constant conductivities: the impedance ratio of the radial ODE is propagated
across interfaces by a Moebius transfer step that stays bounded for all mode
orders, giving the diagonal entries to round-off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RegularGridInterpolator

from .errors import (DimensionMismatch, EllipticityViolation, MeshTooCoarse,
                     SolverFailure)
from .fields import ComplexField
from .mesh import DiskMesh, disk_mesh

__all__ = [
    "RadialLayers",
    "Conductivity",
    "DtnMatrix",
    "dtn_matrix",
    "radial_dtn_oracle",
    "dtn_distance",
    "extension_compare",
    "save_dtn",
    "load_dtn",
]


@dataclass(frozen=True)
class RadialLayers:
    """Piecewise-constant radial conductivity: values[i] on (radii[i-1], radii[i]].

    ``radii`` is strictly increasing and ends at 1.0; len(values) == len(radii).
    """

    radii: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(r) != len(v) or len(r) == 0:
            raise ValueError("radii and values must have equal nonzero length")
        if not np.all(np.diff(np.concatenate([[0.0], r])) > 0) or abs(r[-1] - 1.0) > 1e-14:
            raise ValueError("radii must be strictly increasing and end at 1.0")
        if np.min(v) <= 0:
            raise EllipticityViolation("layer conductivities must be positive")

    def __call__(self, r: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.radii), np.asarray(r), side="left")
        idx = np.minimum(idx, len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]

    def interfaces(self) -> tuple:
        return tuple(self.radii[:-1])

    def min_feature(self) -> float:
        bounds = np.concatenate([[0.0], np.asarray(self.radii)])
        return float(np.min(np.diff(bounds)))


@dataclass(frozen=True)
class Conductivity:
    """Real conductivity on the unit disk with ellipticity certificate.

    Carries grid samples, an analytic radial descriptor, or both; the
    descriptor takes precedence for finite element evaluation and enables the
    exact transfer-matrix oracle and interface-aligned meshing.
    """

    K: float
    gamma: Optional[ComplexField] = None
    layers: Optional[RadialLayers] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma is None and self.layers is None:
            raise ValueError("need grid samples or a radial descriptor")
        if self.K < 1:
            raise EllipticityViolation("K must be >= 1")
        lo, hi = 1.0 / self.K - 1e-12, self.K + 1e-12
        if self.layers is not None:
            v = np.asarray(self.layers.values)
            if np.min(v) < lo or np.max(v) > hi:
                raise EllipticityViolation("layer values leave [1/K, K]")
        if self.gamma is not None:
            g = self.gamma.data
            if np.max(np.abs(g.imag)) > 1e-12:
                raise EllipticityViolation("conductivity must be real-valued")
            inside = np.abs(self.gamma.grid.nodes()) < 1.0
            vals = g.real[inside]
            if np.min(vals) < lo or np.max(vals) > hi:
                raise EllipticityViolation(
                    f"gamma range [{np.min(vals):.4g}, {np.max(vals):.4g}] leaves [1/K, K]")

    def evaluator(self) -> Callable[[np.ndarray], np.ndarray]:
        """gamma as a function of (n, 2) points inside the closed unit disk."""
        if self.layers is not None:
            lay = self.layers
            return lambda p: lay(np.hypot(p[:, 0], p[:, 1]))
        g = self.gamma
        x = -g.grid.S + g.grid.h * np.arange(g.grid.N)
        interp = RegularGridInterpolator((x, x), g.data.real, method="linear")
        return lambda p: interp(p)


@dataclass(frozen=True)
class DtnMatrix:
    """DtN operator in the basis e^{i n theta}, n = -N_b .. N_b."""

    n_b: int
    entries: np.ndarray  # (2 N_b + 1, 2 N_b + 1) complex
    mesh_h: float
    tolerance: float

    def __post_init__(self):
        m = 2 * self.n_b + 1
        if self.entries.shape != (m, m):
            raise DimensionMismatch(f"expected {(m, m)} entries, got {self.entries.shape}")

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_b, self.n_b + 1)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries)

    def hermitian_defect(self) -> float:
        e = self.entries
        return float(np.linalg.norm(e - e.conj().T) / max(np.linalg.norm(e), 1e-300))

    def zero_mode_defect(self) -> float:
        i0 = self.n_b
        scale = max(np.linalg.norm(self.entries), 1e-300)
        return float(max(np.abs(self.entries[:, i0]).max(),
                         np.abs(self.entries[i0, :]).max()) / scale)

    def offdiagonal_mass(self) -> float:
        d = np.diag(np.diag(self.entries))
        off = self.entries - d
        return float(np.linalg.norm(off) ** 2 / max(np.linalg.norm(d) ** 2, 1e-300))


def _assemble_stiffness(mesh: DiskMesh, gamma_tri: np.ndarray) -> sp.csr_matrix:
    p = mesh.nodes[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    grads = np.empty((len(mesh.triangles), 3, 2))
    grads[:, 0] = np.column_stack([p[:, 1, 1] - p[:, 2, 1], p[:, 2, 0] - p[:, 1, 0]])
    grads[:, 1] = np.column_stack([p[:, 2, 1] - p[:, 0, 1], p[:, 0, 0] - p[:, 2, 0]])
    grads[:, 2] = np.column_stack([p[:, 0, 1] - p[:, 1, 1], p[:, 1, 0] - p[:, 0, 0]])
    grads /= det[:, None, None]
    k_loc = np.einsum("tid,tjd->tij", grads, grads) * (gamma_tri * area)[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.triangles, (1, 3)).reshape(-1)
    n = len(mesh.nodes)
    return sp.coo_matrix((k_loc.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()


def _dtn_from_fn(gamma_fn, n_b: int, mesh_h: float,
                 align_radii: Sequence[float] = (),
                 tolerance: float = 1e-10) -> DtnMatrix:
    if n_b < 1 or n_b > 64:
        raise ValueError("n_b must lie in [1, 64]")
    mesh = disk_mesh(mesh_h, align_radii=align_radii, symmetry=2 * n_b + 2)
    gamma_tri = np.asarray(gamma_fn(mesh.centroids), dtype=float)
    if np.min(gamma_tri) <= 0 or not np.all(np.isfinite(gamma_tri)):
        raise EllipticityViolation("gamma must evaluate positive and finite on the mesh")
    K = _assemble_stiffness(mesh, gamma_tri)

    n_nodes = len(mesh.nodes)
    interior = np.ones(n_nodes, dtype=bool)
    interior[mesh.boundary] = False
    ii = np.where(interior)[0]
    bb = mesh.boundary
    try:
        lu = spla.splu(K[ii][:, ii].tocsc().astype(np.complex128))
    except RuntimeError as exc:  # singular factorization
        raise SolverFailure(f"sparse factorization failed: {exc}") from exc

    ns = np.arange(-n_b, n_b + 1)
    G = np.exp(1j * np.outer(mesh.boundary_theta, ns))
    U_int = lu.solve(-(K[ii][:, bb] @ G))
    if not np.all(np.isfinite(U_int)):
        raise SolverFailure("interior solve produced non-finite values")
    flux = K[bb][:, ii] @ U_int + K[bb][:, bb] @ G
    entries = (G.conj().T @ flux) / (2.0 * np.pi)
    return DtnMatrix(n_b=n_b, entries=entries, mesh_h=float(mesh_h),
                     tolerance=float(tolerance))


def dtn_matrix(c: Conductivity, n_b: int = 16, mesh_h: float = 0.01) -> DtnMatrix:
    """Assemble the DtN matrix of a conductivity by P1 finite elements.

    With a radial descriptor the mesh is aligned to the interface circles and
    mesh_h must resolve the smallest layer (MeshTooCoarse otherwise); sampled
    conductivities are evaluated at element centroids by bilinear interpolation.
    """
    align: Sequence[float] = ()
    if c.layers is not None:
        if mesh_h > c.layers.min_feature() / 4.0:
            raise MeshTooCoarse(
                f"mesh_h = {mesh_h} exceeds a quarter of the smallest layer "
                f"{c.layers.min_feature():.4g}")
        align = c.layers.interfaces()
    return _dtn_from_fn(c.evaluator(), n_b, mesh_h, align_radii=align)


def radial_dtn_oracle(layers: RadialLayers, n_b: int = 16) -> DtnMatrix:
    """Diagonal DtN of a radial layered conductivity by impedance transfer.

    In each layer u = A r^m + B r^{-m}; the impedance zeta = gamma r u'/(m u)
    starts at zeta = gamma_1 (regularity at 0) and crosses a layer of relative
    thickness t = r_in/r_out via

        beta = (gamma - zeta)/(gamma + zeta),  zeta -> gamma (1 - beta t^{2m})/(1 + beta t^{2m}),

    all factors bounded by 1, so arbitrarily high orders are stable.  The
    eigenvalue is lambda_n = m * zeta(1); lambda_0 = 0.
    """
    bounds = np.concatenate([[0.0], np.asarray(layers.radii, dtype=float)])
    vals = np.asarray(layers.values, dtype=float)
    ns = np.arange(-n_b, n_b + 1)
    diag = np.zeros(len(ns), dtype=complex)
    for i, n in enumerate(ns):
        m = abs(int(n))
        if m == 0:
            continue
        zeta = vals[0]
        for j in range(1, len(vals)):
            t = bounds[j] / bounds[j + 1]
            g = vals[j]
            beta = (g - zeta) / (g + zeta)
            bt = beta * t ** (2 * m)
            zeta = g * (1.0 - bt) / (1.0 + bt)
        diag[i] = m * zeta
    return DtnMatrix(n_b=n_b, entries=np.diag(diag), mesh_h=0.0, tolerance=0.0)


def dtn_distance(l1: DtnMatrix, l2: DtnMatrix) -> float:
    """Operator distance rho = || W^(-1/2) (L1 - L2) W^(-1/2) ||_2, W = diag((1+n^2)^(1/2))."""
    if l1.n_b != l2.n_b:
        raise DimensionMismatch(f"truncation orders differ: {l1.n_b} vs {l2.n_b}")
    n = l1.orders.astype(float)
    w = (1.0 + n ** 2) ** (-0.25)
    d = (l1.entries - l2.entries) * np.outer(w, w)
    return float(np.linalg.norm(d, 2))


def extension_compare(c1: Conductivity, c2: Conductivity, r: float,
                      n_b: int = 16, mesh_h: float = 0.01) -> tuple[float, float]:
    """Compare DtN distances on the sub-disk B(0, r) and on the unit circle.

    ``c1``, ``c2`` are conductivities on the unit disk whose contrasts are
    supported inside B(0, r) (extension by 1 outside).  The inner distance uses
    the rescaled problem gamma(r w) on the unit disk, which has the identical
    DtN matrix as the sub-disk problem in the angular basis.
    Returns (rho_inner, rho_outer).
    """
    if not (0.0 < r < 1.0):
        raise ValueError("sub-disk radius must lie in (0, 1)")

    def scaled(c: Conductivity):
        fn = c.evaluator()
        align = ()
        if c.layers is not None:
            inner = [ri / r for ri in c.layers.radii if ri < r - 1e-14]
            align = tuple(inner)
        return (lambda p, fn=fn: fn(p * r)), align

    mats_inner = []
    mats_outer = []
    for c in (c1, c2):
        fn_in, align_in = scaled(c)
        mats_inner.append(_dtn_from_fn(fn_in, n_b, mesh_h, align_radii=align_in))
        align_out = c.layers.interfaces() if c.layers is not None else ()
        mats_outer.append(_dtn_from_fn(c.evaluator(), n_b, mesh_h, align_radii=align_out))
    return (dtn_distance(mats_inner[0], mats_inner[1]),
            dtn_distance(mats_outer[0], mats_outer[1]))


def save_dtn(m: DtnMatrix, path) -> None:
    """One JSON header line, then raw little-endian complex entries."""
    header = json.dumps({"n_b": m.n_b, "mesh_h": m.mesh_h, "tolerance": m.tolerance},
                        sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8") + b"\n")
        fh.write(m.entries.astype("<c16").tobytes(order="C"))


def load_dtn(path) -> DtnMatrix:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        m = 2 * header["n_b"] + 1
        entries = np.frombuffer(fh.read(16 * m * m), dtype="<c16").reshape(m, m)
    return DtnMatrix(n_b=header["n_b"], entries=entries,
                     mesh_h=header["mesh_h"], tolerance=header["tolerance"])


def dtn_diagonal_csv(m: DtnMatrix, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "lambda_re", "lambda_im"])
        for n, v in zip(m.orders, m.diagonal()):
            w.writerow([int(n), repr(v.real), repr(v.imag)])
