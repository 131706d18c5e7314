"""Singular-kernel quadrature weights for the periodic box.

All nonlocal forms here discretize integrals against the kernel
K(y) = |y|^(-n-2s).  Because fields are extended periodically, the kernel
is folded over the period lattice: the weight attached to a grid offset r
is the total K-mass of every cell congruent to r modulo the box.

Two weight families are built:

* "moment" weights: plain cell masses (midpoint evaluation of the field,
  exact kernel mass per cell).  They are nonnegative, which makes every
  assembled quadratic form positive semidefinite and monotone in the
  conductivity.  All Galerkin matrices use these.
* "product" weights (n = 1): high-order product-integration weights.  Each
  cell integrates the kernel against a local polynomial interpolant of the
  field; in a near zone around the singularity the field is divided by y^2
  first (it vanishes to second order there) so the interpolation stays
  smooth.  These drive the high-accuracy diagnostic forms.

The normalization constant c_{n,s} = 4^s Gamma(n/2+s) / (pi^(n/2) |Gamma(-s)|)
is validated against the Fourier multiplier |k|^(2s) by the test suite, not
assumed.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gamma as gamma_fn
from scipy.integrate import dblquad, quad

__all__ = [
    "normalization_constant",
    "moment_weights",
    "moment_weights_for",
    "product_weights",
    "product_weights_for",
    "symbol_from_weights",
    "central_cell_second_moment",
    "central_second_moment_for",
]


def normalization_constant(n, s):
    """c_{n,s} making the singular integral match the multiplier |k|^(2s)."""
    return 4.0**s * gamma_fn(n / 2.0 + s) / (np.pi ** (n / 2.0) * abs(gamma_fn(-s)))


# ---------------------------------------------------------------------------
# elementary kernel moments in one dimension
# ---------------------------------------------------------------------------


def _power_integral(a, b, p, s):
    """Integral of y^(p-1-2s) over (a, b), 0 < a < b, for integer p >= 0."""
    expo = p - 2.0 * s
    if abs(expo) < 1e-14:
        return np.log(b / a)
    return (b**expo - a**expo) / expo


def _cell_mass_scaled(m, s):
    """Mass of |t|^(-1-2s) over the unit-spaced cell (m-1/2, m+1/2), m >= 1."""
    m = np.asarray(m, dtype=float)
    return ((m - 0.5) ** (-2.0 * s) - (m + 0.5) ** (-2.0 * s)) / (2.0 * s)


def _tail_mass_scaled(a_start, s, N):
    """Sum of _cell_mass_scaled(q + j N) over j >= 0 landing at q+jN >= a_start.

    Euler-Maclaurin in j with analytic antiderivative; a_start is the first
    cell index of the tail.  Accurate to ~1e-14 once a_start >> 1.
    """
    A = np.asarray(a_start, dtype=float)
    two_s = 2.0 * s
    if abs(two_s - 1.0) < 1e-14:
        integral = np.log((A + 0.5) / (A - 0.5))
    else:
        integral = ((A + 0.5) ** (1.0 - two_s) - (A - 0.5) ** (1.0 - two_s)) / (
            1.0 - two_s
        )
    integral /= 2.0 * s * N
    half = 0.5 * _cell_mass_scaled(A, s)
    deriv = (A + 0.5) ** (-1.0 - two_s) - (A - 0.5) ** (-1.0 - two_s)
    return integral + half - (N / 12.0) * deriv


def _folded_cell_masses_1d(N, s, h, images=48):
    """Periodized moment weights: W[r] = total kernel mass of cells = r (mod N).

    W[0] is zero: offsets congruent to 0 pair a grid point with its own
    periodic copies, so they never contribute to a pair difference.
    """
    r = np.arange(N)
    j = np.arange(images + 1)
    W = np.zeros(N)
    for q in (r, N - r):
        idx = q[:, None] + N * j[None, :]
        valid = idx >= 1
        contrib = np.where(valid, _cell_mass_scaled(np.maximum(idx, 1), s), 0.0)
        W += contrib.sum(axis=1)
        W += _tail_mass_scaled(q + N * (images + 1), s, N)
    W[0] = 0.0
    return W * h ** (-2.0 * s)


# ---------------------------------------------------------------------------
# public weight builders
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _moment_weights_cached(n, s, N, L):
    h = 2.0 * L / N
    if n == 1:
        return _folded_cell_masses_1d(N, s, h)
    return _moment_weights_2d(s, N, L)


def moment_weights_for(n, s, N, L):
    """Nonnegative periodized cell-moment weights, indexed by grid offset."""
    return _moment_weights_cached(n, float(s), int(N), float(L))


def moment_weights(geometry):
    return moment_weights_for(
        geometry.n, geometry.s, geometry.grid_points, geometry.box_halfwidth
    )


def _moment_weights_2d(s, N, L, near=4, images=6, gl_order=24):
    h = 2.0 * L / N
    ax = np.where(np.arange(N) <= N // 2, np.arange(N), np.arange(N) - N) * h
    Y1, Y2 = np.meshgrid(ax, ax, indexing="ij")
    R2 = Y1**2 + Y2**2
    R2[0, 0] = np.inf  # singular cell excluded
    W = h**2 * R2 ** (-(1.0 + s))

    # near cells: exact mass by Gauss-Legendre product rule
    nodes, wts = np.polynomial.legendre.leggauss(gl_order)
    half = 0.5 * h
    for r1 in range(-near, near + 1):
        for r2 in range(-near, near + 1):
            if r1 == 0 and r2 == 0:
                continue
            x = r1 * h + half * nodes
            y = r2 * h + half * nodes
            X, Y = np.meshgrid(x, y, indexing="ij")
            WW = np.outer(wts, wts) * half * half
            mass = np.sum(WW * (X**2 + Y**2) ** (-(1.0 + s)))
            W[r1 % N, r2 % N] = mass

    # periodic images by midpoint, then a uniformly spread radial tail
    shifts = range(-images, images + 1)
    for j1 in shifts:
        for j2 in shifts:
            if j1 == 0 and j2 == 0:
                continue
            D2 = (Y1 + 2 * L * j1) ** 2 + (Y2 + 2 * L * j2) ** 2
            W += h**2 * D2 ** (-(1.0 + s))
    R_out = (2 * images + 1) * L
    tail = 2.0 * np.pi * R_out ** (-2.0 * s) / (2.0 * s)
    W += tail / N**2
    W[0, 0] = 0.0
    return W


def _lagrange_coeffs(nodes):
    """Row i: polynomial coefficients (ascending) of the Lagrange basis l_i."""
    nodes = np.asarray(nodes, dtype=float)
    k = len(nodes)
    out = np.zeros((k, k))
    for i in range(k):
        poly = np.array([1.0])
        for j in range(k):
            if j == i:
                continue
            poly = P.polymul(poly, np.array([-nodes[j], 1.0]) / (nodes[i] - nodes[j]))
        out[i, : len(poly)] = poly
    return out


@lru_cache(maxsize=32)
def _product_weights_cached(s, N, L, near, stencil):
    h = 2.0 * L / N
    half = stencil // 2
    V = np.zeros(N)

    # near zone |y| < (near + 1/2) h: interpolate f(y)/y^2 on the nodes
    # +-h ... +-near*h and integrate against y^2 K(y) = |y|^(1-2s).
    qs = np.array([q for q in range(-near, near + 1) if q != 0], dtype=float)
    coeffs = _lagrange_coeffs(qs)  # in the variable z = y/h
    Y = (near + 0.5) * h
    mmax = coeffs.shape[1]
    zmom = np.zeros(mmax)
    for m in range(0, mmax, 2):
        # integral of z^m |y|^(1-2s) dy over (-Y, Y), z = y/h
        zmom[m] = 2.0 * h ** (-m) * Y ** (m + 2.0 - 2.0 * s) / (m + 2.0 - 2.0 * s)
    cq = coeffs @ zmom
    for q, c in zip(qs.astype(int), cq):
        V[q % N] += c / (q * h) ** 2

    # principal far cells: product integration with a centered stencil,
    # exact for the interpolating polynomial of degree stencil-1.  The
    # negative-side cell mirrors the positive one (node j <-> node -j), so
    # only the positive side is integrated.  Cells at +L and -L are both
    # kept, matching the double count in the folded moment weights.
    zs = np.arange(-half, half + 1, dtype=float)
    lag = _lagrange_coeffs(zs)  # in z = (y - r h)/h
    for p in range(near + 1, N // 2 + 1):
        c = p * h
        a, b = c - 0.5 * h, c + 0.5 * h
        mu = np.zeros(lag.shape[1])
        for m in range(lag.shape[1]):
            # integral of ((y - c)/h)^m K(y) over the cell at +c
            acc = 0.0
            for i in range(m + 1):
                acc += comb(m, i) * ((-c) ** (m - i)) * _power_integral(a, b, i, s)
            mu[m] = acc / h**m
        wts = lag @ mu
        for j, w in zip(range(-half, half + 1), wts):
            V[(p + j) % N] += w
            V[(-p - j) % N] += w

    # periodic images |y| > Y = L + h/2: the principal cells tile (-Y, Y)
    # exactly, and on torus frequencies the image contribution has the
    # closed multiplier T(k) = 2 int_Y^inf (1 - cos ky) K(y) dy.  Oscillatory
    # quadrature evaluates it per frequency; the unique circulant weights
    # realizing that multiplier are its inverse transform.
    V += _image_weights_1d(s, N, L)
    return V


@lru_cache(maxsize=32)
def _image_weights_1d(s, N, L):
    Y = L + L / N  # (N/2 + 1/2) h with h = 2L/N
    T = np.zeros(N // 2 + 1)
    tail_mass = Y ** (-2.0 * s) / (2.0 * s)
    for j in range(1, N // 2 + 1):
        k = np.pi * j / L
        osc = quad(
            lambda y: y ** (-1.0 - 2.0 * s),
            Y,
            np.inf,
            weight="cos",
            wvar=k,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=400,
        )[0]
        T[j] = 2.0 * (tail_mass - osc)
    full = np.empty(N)
    full[: N // 2 + 1] = T
    full[N // 2 + 1:] = T[1 : N // 2][::-1]
    w = -np.fft.ifft(full).real
    w[0] = 0.0
    return w


def product_weights_for(s, N, L, near=4, stencil=5):
    """High-order product-integration weights (one-dimensional grids only)."""
    return _product_weights_cached(float(s), int(N), float(L), near, stencil)


def product_weights(geometry, near=4, stencil=5):
    if geometry.n != 1:
        raise ValueError("product weights are implemented for n = 1 only")
    return product_weights_for(
        geometry.s, geometry.grid_points, geometry.box_halfwidth, near, stencil
    )


# ---------------------------------------------------------------------------
# symbols and central-cell data
# ---------------------------------------------------------------------------


def symbol_from_weights(weights, cns):
    """Multiplier of the pair-difference operator u -> c Sum_r w_r (u - u_shift_r)."""
    if weights.ndim == 1:
        spectrum = np.fft.fft(weights).real
    else:
        spectrum = np.fft.fft2(weights).real
    sym = cns * (weights.sum() - spectrum)
    # roundoff guard: the symbol of a nonnegative-weight form is >= 0 at k=0
    flat = sym.reshape(-1)
    flat[0] = 0.0
    return sym


@lru_cache(maxsize=32)
def _central_second_moment_2d(s, h):
    c = dblquad(
        lambda y, x: (x * x + y * y) ** (-s),
        0.0,
        0.5 * h,
        0.0,
        0.5 * h,
        epsabs=1e-13,
        epsrel=1e-12,
    )[0]
    return 4.0 * c


def central_second_moment_for(n, s, h):
    """Integral of |y|^2 K(y) over the singular cell."""
    if n == 1:
        return 2.0 * (0.5 * h) ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    return _central_second_moment_2d(float(s), float(h))


def central_cell_second_moment(geometry):
    return central_second_moment_for(geometry.n, geometry.s, geometry.h)
