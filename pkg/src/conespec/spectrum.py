"""Dirichlet-Laplacian eigenvalues of the cone and its exact-cut
perturbations, via the radial Bessel problems.

At angular parameter l (Bessel order nu = (N + 2l - 2)/2) the radial
factor of an eigenfunction is r^(1-N/2) times a combination of J_nu and
Y_nu evaluated at r sqrt(lambda). Eigenvalues are therefore:

* eps = 0 :  lambda = j_{nu,k}^2, the squared zeros of J_nu;
* eps > 0 :  zeros in lambda of the cross-product
             J_nu(sqrt(l)) Y_nu(eps sqrt(l)) - Y_nu(sqrt(l)) J_nu(eps sqrt(l)).

Branch tracking continues one (l, k) eigenvalue through decreasing eps
by nearest-zero continuation. ``spectrum_merge`` assembles the n
smallest eigenvalues across modes; for N >= 3 only the axisymmetric
angular family is available, and the result is labelled accordingly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .charval import AngularMode, sigma_beta
from .errors import (
    BracketingError,
    BranchJumpError,
    InconclusiveError,
    NumericalError,
    ParameterError,
    PreconditionError,
)
from .geometry import ConeGeometry
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    bessel_j,
    bessel_j_deriv,
    bessel_y,
    find_zero,
)

__all__ = [
    "EigenvalueRecord",
    "RadialProfile",
    "MergedSpectrum",
    "unperturbed_eigen",
    "cross_product_eigen",
    "track_branch",
    "spectrum_merge",
    "radial_profile",
    "gradient_exponent",
    "integrability_threshold",
    "verify_integrability",
]

_EPS_MAX = 0.95  # beyond this the zero spacing outruns the bracketing budget


@dataclass(frozen=True)
class EigenvalueRecord:
    """One eigenvalue lambda of mode (l, k) at inner radius eps;
    ``limit_lam`` carries lambda* when the record belongs to a tracked
    branch."""

    mode: AngularMode
    radial_index: int
    eps: float
    lam: float
    limit_lam: Optional[float] = None

    def __post_init__(self):
        if self.radial_index < 1:
            raise ParameterError("radial index is 1-based")
        if not self.lam > 0.0:
            raise ParameterError("eigenvalues are positive")


@dataclass(frozen=True)
class RadialProfile:
    """Normalized radial eigenfunction samples on a grid in (eps, 1)."""

    mode: AngularMode
    eps: float
    lam: float
    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class MergedSpectrum:
    """Ascending eigenvalue records plus the sector label: 'complete'
    for N = 2, 'axisymmetric' for N >= 3 (non-axisymmetric angular
    families, if any, are not enumerated)."""

    records: tuple
    sector: str
    dim: int
    beta: float
    eps: float

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def _scan_sign_changes(f_vals: np.ndarray, grid: np.ndarray):
    """Indices i where f changes sign between grid[i] and grid[i+1]."""
    s = np.sign(f_vals)
    return np.nonzero(s[:-1] * s[1:] < 0.0)[0]


def _refine(f, grid, i, fprime=None, tol=1e-10):
    """find_zero on (grid[i], grid[i+1]), widening by one cell per side
    when a grid point sits within an ulp of the zero (vectorized and
    scalar evaluation can then disagree about the sign)."""
    try:
        return find_zero(f, (grid[i], grid[i + 1]), fprime=fprime, tol=tol)
    except BracketingError:
        lo = grid[i - 1] if i > 0 else grid[i]
        hi = grid[i + 2] if i + 2 < len(grid) else grid[i + 1]
        return find_zero(f, (lo, hi), fprime=fprime, tol=tol)


def _jzero(nu: float, k: int, control: SeriesControl) -> float:
    """k-th positive zero of J_nu by scan plus Newton-polished bisection."""
    # scan from below the first zero; j_{nu,1} > nu always
    lo = max(nu, 1e-2)
    # McMahon-style bound with headroom for the nu-dependent onset
    hi = nu + 1.9 * max(nu, 1.0) ** (1.0 / 3.0) + (k + 2) * math.pi + 5.0
    grid = np.arange(lo, hi, math.pi / 4.0)
    vals = bessel_j(nu, grid, control)
    idx = _scan_sign_changes(vals, grid)
    if len(idx) < k:
        raise BracketingError(
            f"found only {len(idx)} zeros of J_{nu:g} scanning ({lo:g}, {hi:g})")
    i = idx[k - 1]
    return _refine(lambda s: bessel_j(nu, float(s), control), grid, i,
                   fprime=lambda s: bessel_j_deriv(nu, float(s), control),
                   tol=1e-10)


def unperturbed_eigen(mode: AngularMode, k: int,
                      control: SeriesControl = DEFAULT_CONTROL) -> EigenvalueRecord:
    """Eigenvalue lambda = j_{nu,k}^2 of the unperturbed cone."""
    if not 1 <= k <= 50:
        raise ParameterError("radial index k must satisfy 1 <= k <= 50")
    j = _jzero(mode.nu, k, control)
    return EigenvalueRecord(mode, k, 0.0, j * j)


def _cross_product(nu: float, eps: float, s, control: SeriesControl):
    """J_nu(s) Y_nu(eps s) - Y_nu(s) J_nu(eps s), array-friendly in s."""
    return (bessel_j(nu, s, control) * bessel_y(nu, eps * s, control)
            - bessel_y(nu, s, control) * bessel_j(nu, eps * s, control))


def cross_product_eigen(mode: AngularMode, eps: float, k: int,
                        control: SeriesControl = DEFAULT_CONTROL) -> EigenvalueRecord:
    """k-th zero in lambda of the cross-product equation at inner radius eps."""
    if not 0.0 < eps < 1.0:
        raise ParameterError("cross_product_eigen requires 0 < eps < 1")
    if eps > _EPS_MAX:
        raise PreconditionError(
            f"eps > {_EPS_MAX} exceeds the bracketing budget "
            "(annulus-limit zero spacing)")
    if k < 1:
        raise ParameterError("radial index k must be positive")
    nu = mode.nu
    step = min(math.pi / 4.0, math.pi * (1.0 - eps) / 8.0)
    # zeros in s are spaced ~ pi/(1-eps); the k-th sits near k pi/(1-eps)
    hi = (k + 2) * math.pi / (1.0 - eps) + nu + 5.0
    grid = np.arange(step, hi, step)
    vals = _cross_product(nu, eps, grid, control)
    if not np.all(np.isfinite(vals)):
        keep = np.isfinite(vals)
        grid, vals = grid[keep], vals[keep]
    idx = _scan_sign_changes(vals, grid)
    if len(idx) < k:
        raise BracketingError(
            f"found only {len(idx)} cross-product zeros scanning "
            f"(0, {hi:g}) at eps={eps:g}, nu={nu:g}")
    i = idx[k - 1]
    s = _refine(lambda t: _cross_product(nu, eps, float(t), control),
                grid, i, tol=1e-10)
    return EigenvalueRecord(mode, k, eps, s * s)


def track_branch(mode: AngularMode, k: int, eps_grid,
                 control: SeriesControl = DEFAULT_CONTROL) -> list:
    """Continue the (mode, k) eigenvalue branch through decreasing eps.

    Each step takes the unique cross-product zero inside a window of
    half the local zero spacing around the previous point (seeded at
    sqrt(lambda*)); zero or several zeros in the window raise
    BranchJumpError. Records carry limit_lam = lambda*.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        return []
    if any(not 0.0 < e < 1.0 for e in eps_grid):
        raise ParameterError("eps grid values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ParameterError("eps grid must be strictly decreasing")
    lam_star = unperturbed_eigen(mode, k, control).lam
    s_prev = math.sqrt(lam_star)
    out = []
    for eps in eps_grid:
        w = math.pi / (2.0 * (1.0 - eps))
        lo = max(s_prev - w, 1e-6)
        hi = s_prev + w
        grid = np.linspace(lo, hi, 129)
        vals = _cross_product(mode.nu, eps, grid, control)
        idx = _scan_sign_changes(vals, grid)
        if len(idx) != 1:
            raise BranchJumpError(
                f"{len(idx)} cross-product zeros in the continuation window "
                f"({lo:g}, {hi:g}) at eps={eps:g}; refine the eps grid")
        i = idx[0]
        s = _refine(lambda t: _cross_product(mode.nu, eps, float(t), control),
                    grid, i, tol=1e-10)
        out.append(EigenvalueRecord(mode, k, eps, s * s, limit_lam=lam_star))
        s_prev = s
    return out


def spectrum_merge(g: ConeGeometry, eps: float, n: int,
                   control: SeriesControl = DEFAULT_CONTROL) -> MergedSpectrum:
    """The n smallest eigenvalues over modes and radial indices, sorted.

    Modes come from sigma_beta; the n smallest can involve at most the
    first n angular modes (first eigenvalues increase with l), expanded
    lazily in Young-tableau order. Ties across distinct (l, k) stay as
    separate records.
    """
    if n < 0 or n > 64:
        raise ParameterError("spectrum_merge supports 0 <= n <= 64")
    sector = "complete" if g.dim == 2 else "axisymmetric"
    if n == 0:
        return MergedSpectrum((), sector, g.dim, g.half_angle, eps)
    modes = sigma_beta(g, min(32, n), control)

    def solve(mode, k):
        if eps == 0.0:
            return unperturbed_eigen(mode, k, control)
        return cross_product_eigen(mode, eps, k, control)

    heap = []
    first = solve(modes[0], 1)
    heapq.heappush(heap, (first.lam, 0, 1, first))
    out = []
    while len(out) < n:
        lam, i, k, rec = heapq.heappop(heap)
        out.append(rec)
        nxt = solve(modes[i], k + 1)
        heapq.heappush(heap, (nxt.lam, i, k + 1, nxt))
        if k == 1 and i + 1 < len(modes):
            d = solve(modes[i + 1], 1)
            heapq.heappush(heap, (d.lam, i + 1, 1, d))
    if len(modes) < n and len(modes) == 32:
        last_first = solve(modes[-1], 1)
        if last_first.lam < out[-1].lam:
            raise NumericalError(
                "spectrum_merge would need more than the 32 supported "
                "angular modes")
    return MergedSpectrum(tuple(out), sector, g.dim, g.half_angle, eps)


def radial_profile(rec: EigenvalueRecord, grid_size: int = 64,
                   control: SeriesControl = DEFAULT_CONTROL) -> RadialProfile:
    """Normalized radial eigenfunction of a record on an interior grid.

    eps = 0: R(r) = r^(1-N/2) J_nu(r sqrt(lambda)); eps > 0: the
    nontrivial kernel combination of J and Y. max |R| = 1 after
    normalization; boundary residuals above 1e-8 flag an inconsistent
    record.
    """
    if grid_size < 16:
        raise ParameterError("radial_profile requires grid_size >= 16")
    nu = rec.mode.nu
    ndim = rec.mode.dim
    s = math.sqrt(rec.lam)
    i = np.arange(1, grid_size + 1)
    r = rec.eps + (1.0 - rec.eps) * i / (grid_size + 1.0)

    if rec.eps == 0.0:
        def shape(rr):
            rr = np.asarray(rr, dtype=float)
            return rr ** (1.0 - ndim / 2.0) * bessel_j(nu, rr * s, control)
        resid_left = 0.0  # R extends continuously by r^l to 0 at the vertex
    else:
        c1 = bessel_y(nu, rec.eps * s, control)
        c2 = -bessel_j(nu, rec.eps * s, control)
        scale = max(abs(c1), abs(c2))
        c1, c2 = c1 / scale, c2 / scale

        def shape(rr):
            rr = np.asarray(rr, dtype=float)
            return rr ** (1.0 - ndim / 2.0) * (
                c1 * bessel_j(nu, rr * s, control)
                + c2 * bessel_y(nu, rr * s, control))
        resid_left = abs(float(shape(rec.eps)))

    vals = shape(r)
    norm = float(np.max(np.abs(vals)))
    if norm == 0.0:
        raise NumericalError("radial profile vanished on the whole grid")
    vals = vals / norm
    resid = max(resid_left, abs(float(shape(1.0)))) / norm
    if resid > 1e-8:
        raise NumericalError(
            f"record does not satisfy its boundary conditions: "
            f"normalized endpoint residual {resid:.2e} > 1e-8")
    return RadialProfile(rec.mode, rec.eps, rec.lam, r, vals)


def gradient_exponent(mode: AngularMode) -> float:
    """Growth exponent of the radial derivative at the vertex:
    dR/dr ~ r^(l-1) as r -> 0."""
    return mode.l - 1.0


def integrability_threshold(g: ConeGeometry, l: float) -> float:
    """sup{p : grad u in L^p} for an eigenfunction of angular parameter
    l: infinity when l >= 1, else N/(1-l) (endpoint excluded)."""
    if not l > 0.0:
        raise ParameterError("integrability_threshold requires l > 0")
    if l >= 1.0:
        return math.inf
    return g.dim / (1.0 - l)


def _radial_derivative(rec: EigenvalueRecord, r: np.ndarray,
                       control: SeriesControl) -> np.ndarray:
    nu = rec.mode.nu
    ndim = rec.mode.dim
    s = math.sqrt(rec.lam)
    a = 1.0 - ndim / 2.0
    return (a * r ** (a - 1.0) * bessel_j(nu, r * s, control)
            + s * r ** a * bessel_j_deriv(nu, r * s, control))


def verify_integrability(mode: AngularMode, g: ConeGeometry, p: float,
                         rec: EigenvalueRecord,
                         control: SeriesControl = DEFAULT_CONTROL) -> str:
    """Numerical classification of int_0^1 |R'(r)|^p r^(N-1) dr.

    Quadrature increments over nested dyadic intervals [2^-m-1, 2^-m]
    decay geometrically iff the integral is finite (near 0 the integrand
    is ~ r^(p(l-1)+N-1), so the increment ratio tends to 2^-(q+1) with
    q = p(l-1)+N-1); growth or stagnation of the increments means
    divergence. Returns 'finite' or 'divergent'; raises
    InconclusiveError inside the noise band.
    """
    if p < 2.0:
        raise ParameterError("verify_integrability requires p >= 2")
    if rec.eps != 0.0:
        raise ParameterError("classification applies to eps = 0 records")
    if rec.mode is not mode and rec.mode != mode:
        raise ParameterError("record does not belong to the given mode")
    u, w = np.polynomial.legendre.leggauss(24)
    ratios = []
    d_prev = None
    for m in range(1, 37):
        a, b = 2.0 ** (-(m + 1)), 2.0 ** (-m)
        r = (u + 1.0) * (b - a) / 2.0 + a
        vals = np.abs(_radial_derivative(rec, r, control)) ** p * r ** (g.dim - 1)
        d = float(np.dot(w, vals) * (b - a) / 2.0)
        if d_prev is not None:
            if d_prev < 1e-280 or d < 1e-280:
                return "finite"  # increments vanished: tail converged
            if d > 1e200:
                return "divergent"  # increments exploding
            ratios.append(d / d_prev)
        d_prev = d
    rho = float(np.median(ratios[-6:]))
    if rho <= 0.97:
        return "finite"
    if rho >= 0.995:
        return "divergent"
    raise InconclusiveError(
        f"dyadic increment ratio {rho:.6f} is inside the noise band "
        "(0.97, 0.995); classification withheld")
