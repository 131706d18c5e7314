"""Galerkin solves of the exterior value problems on the grid.

Unknowns are the nodal values inside Omega; the exterior datum is held
fixed and couples in through the right-hand side b_i = -B(f_ext, e_i).
The interior stiffness block is dense (the kernel couples every pair of
cells) but small, so a Cholesky factorization is the solver.  For the
Schrodinger equation the stiffness is the unit-conductivity block plus the
diagonal h^n q, which by the exact discrete Liouville transform is the
congruence D_g A_gamma D_g of the conductivity block; Cholesky failure for
a potential therefore signals a genuinely non-transformed, non-coercive q
and is reported as such.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .conductivity import Conductivity, Potential
from .geometry import GridField
from .operators import FracOperator, pair_matvec

__all__ = [
    "SolverError",
    "ExteriorDatum",
    "Solution",
    "InteriorSystem",
    "solve_conductivity",
    "solve_schrodinger",
    "coercivity_check",
]


class SolverError(RuntimeError):
    """Raised when the Galerkin system cannot be solved to tolerance."""


@dataclass(frozen=True)
class ExteriorDatum:
    """Exterior boundary datum: a grid field vanishing on closure(Omega)."""

    geometry: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(self.geometry.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("exterior datum must be finite")
        closure = self.geometry.omega_closure_mask()
        if np.any(v[closure] != 0.0):
            raise ValueError("exterior datum must vanish on the closure of Omega")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def field(self):
        return GridField(self.geometry, self.values)


@dataclass(frozen=True)
class Solution:
    """Forward solution: full-grid field, Galerkin residual, energy B(u, u)."""

    u: GridField
    residual: float
    energy: float


def _digest(*arrays):
    hsh = hashlib.sha256()
    for a in arrays:
        hsh.update(np.ascontiguousarray(a).tobytes())
    return hsh.hexdigest()[:24]


class InteriorSystem:
    """Dense interior Galerkin block with its Cholesky factor.

    coefficient is a Conductivity (conductivity equation) or a Potential
    (Schrodinger equation).  Matrix-vector products with the full-grid
    operator go through FFT circular convolutions; only the interior block
    is ever formed densely.
    """

    def __init__(self, coefficient, op: FracOperator):
        self.op = op
        self.geometry = coefficient.geometry
        geom = self.geometry
        self.mask = geom.omega_mask()
        self.idx = np.flatnonzero(self.mask.reshape(-1))
        if self.idx.size == 0:
            raise SolverError("no interior degrees of freedom")
        w = op.form_weights()
        h_n = geom.cell_volume
        if isinstance(coefficient, Conductivity):
            self.kind = "conductivity"
            self.g = coefficient.sqrt_values
            self.q = None
        elif isinstance(coefficient, Potential):
            self.kind = "schrodinger"
            self.g = None
            self.q = coefficient.values
        else:
            raise TypeError("coefficient must be a Conductivity or a Potential")

        A = self._interior_block(w, h_n)
        try:
            self.chol = sla.cho_factor(A, lower=True, check_finite=False)
        except sla.LinAlgError as exc:
            if self.kind == "schrodinger":
                raise SolverError(
                    "interior Schrodinger matrix is not positive definite; "
                    "the potential does not come from an admissible "
                    "conductivity"
                ) from exc
            raise SolverError(
                "interior conductivity matrix is not positive definite; "
                "this indicates an assembly bug, the form is coercive"
            ) from exc
        self.matrix = A

    def _interior_block(self, w, h_n):
        geom = self.geometry
        N = geom.grid_points
        cns = self.op.cns
        idx = self.idx
        if geom.n == 1:
            offs = (idx[:, None] - idx[None, :]) % N
            wblock = w[offs]
        else:
            i1, i2 = np.divmod(idx, N)
            o1 = (i1[:, None] - i1[None, :]) % N
            o2 = (i2[:, None] - i2[None, :]) % N
            wblock = w[o1, o2]
        if self.g is not None:
            gflat = self.g.reshape(-1)[idx]
            conv_g = _conv(w, self.g)
            diag = cns * h_n * gflat * conv_g.reshape(-1)[idx]
            A = -cns * h_n * np.outer(gflat, gflat) * wblock
        else:
            conv_1 = _conv(w, np.ones(geom.shape))
            diag = cns * h_n * conv_1.reshape(-1)[idx]
            A = -cns * h_n * wblock
            if self.q is not None:
                diag = diag + h_n * self.q.reshape(-1)[idx]
        np.fill_diagonal(A, diag)
        return 0.5 * (A + A.T)

    # -- full-grid operator --------------------------------------------------

    def apply(self, values):
        """Full-grid stiffness applied to a field (FFT convolutions)."""
        w = self.op.form_weights()
        h_n = self.geometry.cell_volume
        out = pair_matvec(w, self.op.cns, h_n, self.g, values)
        if self.q is not None:
            out = out + h_n * self.q * values
        return out

    def energy(self, values):
        return float(np.sum(values * self.apply(values)))

    def solve(self, datum: ExteriorDatum, tol: float = 1e-10) -> Solution:
        if datum.geometry != self.geometry:
            raise ValueError("geometry mismatch")
        f = datum.values
        b = -self.apply(f).reshape(-1)[self.idx]
        wvec = sla.cho_solve(self.chol, b, check_finite=False)
        resid_vec = self.matrix @ wvec - b
        scale = max(float(np.linalg.norm(b)), 1e-300)
        residual = float(np.linalg.norm(resid_vec)) / scale
        if not np.isfinite(residual) or residual > tol:
            raise SolverError(f"Galerkin residual {residual:.3e} exceeds tol {tol:.3e}")
        u = f.copy().reshape(-1)
        u[self.idx] = wvec
        u = u.reshape(self.geometry.shape)
        return Solution(
            u=GridField(self.geometry, u),
            residual=residual,
            energy=self.energy(u),
        )

    def smallest_eigenvalue(self):
        vals = sla.eigh(
            self.matrix, eigvals_only=True, subset_by_index=[0, 0], check_finite=False
        )
        return float(vals[0])


def _conv(w, v):
    return np.fft.ifftn(np.fft.fftn(w) * np.fft.fftn(v)).real


_SYSTEM_CACHE: dict = {}
_CACHE_LIMIT = 16


def interior_system(coefficient, op: FracOperator) -> InteriorSystem:
    """Memoized interior system (one factorization per coefficient/operator)."""
    if isinstance(coefficient, Conductivity):
        payload = coefficient.values
        tag = "c"
    else:
        payload = coefficient.values
        tag = "q"
    key = (
        tag,
        coefficient.geometry.content_hash(),
        float(op.s),
        op.mode,
        _digest(payload),
    )
    if key not in _SYSTEM_CACHE:
        if len(_SYSTEM_CACHE) >= _CACHE_LIMIT:
            _SYSTEM_CACHE.pop(next(iter(_SYSTEM_CACHE)))
        _SYSTEM_CACHE[key] = InteriorSystem(coefficient, op)
    return _SYSTEM_CACHE[key]


def solve_conductivity(
    gamma: Conductivity, f: ExteriorDatum, op: FracOperator, tol: float = 1e-10
) -> Solution:
    """Weak solution of the fractional conductivity problem with datum f."""
    return interior_system(gamma, op).solve(f, tol)


def solve_schrodinger(
    q: Potential, f: ExteriorDatum, op: FracOperator, tol: float = 1e-10
) -> Solution:
    """Weak solution of the fractional Schrodinger problem with datum f."""
    return interior_system(q, op).solve(f, tol)


def coercivity_check(coefficient, op: FracOperator) -> float:
    """Smallest eigenvalue of the interior Galerkin matrix (diagnostic)."""
    return interior_system(coefficient, op).smallest_eigenvalue()
