"""Finite-difference eigensolvers used as an independent check.

Nothing here touches the special-function stack: the radial solver
discretizes the Sturm-Liouville form of the radial equation

    r^2 R'' + (N-1) r R' + (lambda r^2 - l(l+N-2)) R = 0,

conjugated by r^((N-1)/2) into -w'' + q(r) w = lambda w with
q(r) = (l(l+N-2) + (N-1)(N-3)/4) / r^2, a symmetric tridiagonal matrix;
the 2D solver discretizes -Laplace on the plane sector
{eps < r < 1, |theta| < beta} with the 5-point polar stencil,
symmetrized by the sqrt(r) similarity. Eigenvalues come from Sturm
bisection (radial) plus inverse iteration with deflation, or inverse
power iteration on a sparse LU factorization (2D).

Grids start one spacing away from the vertex with a Dirichlet-0 ghost
value: the radial factor vanishes like r^l there, and the discretization
error this adds is inside the quoted 1% raw tolerance. ``radial_nodes``
and ``angular_nodes`` count grid *intervals*; interior unknowns number
one fewer, and halving is exact for the Richardson pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import csc_matrix, identity
from scipy.sparse.linalg import splu

from .errors import NumericalError, ParameterError
from .geometry import ConeGeometry

__all__ = ["FdConfig", "radial_fd_eigen", "polar_fd_eigen"]


@dataclass(frozen=True)
class FdConfig:
    """Grid intervals, Richardson flag and inverse-iteration shift."""

    radial_nodes: int = 2048
    angular_nodes: int = 128
    richardson: bool = False
    shift: float = 0.0

    def __post_init__(self):
        if self.radial_nodes < 64:
            raise ParameterError("radial_nodes must be >= 64")
        if self.angular_nodes < 16:
            raise ParameterError("angular_nodes must be >= 16")
        if self.richardson:
            for count in (self.radial_nodes, self.angular_nodes):
                if count & (count - 1):
                    raise ParameterError(
                        "richardson extrapolation needs power-of-two "
                        "interval counts (halving sequence)")


def _sturm_count(d: np.ndarray, e: np.ndarray, sigma: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below
    sigma, via the LDL^T pivot sign count."""
    scale = float(np.max(np.abs(d)) + 2.0 * np.max(np.abs(e)))
    floor = 1e-280 * scale
    count = 0
    q = d[0] - sigma
    if q < 0.0:
        count += 1
    for i in range(1, len(d)):
        denom = q if abs(q) > floor else math.copysign(floor, q or 1.0)
        q = d[i] - sigma - e[i - 1] ** 2 / denom
        if q < 0.0:
            count += 1
    return count


def _tridiag_eigenpair(d: np.ndarray, e: np.ndarray, k: int,
                       prior: list, shift: float):
    """k-th smallest eigenpair by Sturm bisection + inverse iteration,
    orthogonalized against the ``prior`` eigenvectors (deflation)."""
    m = len(d)
    radius = np.max(np.abs(d)) + 2.0 * np.max(np.abs(e))
    lo, hi = -radius, radius
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if _sturm_count(d, e, mid) >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    sigma = 0.5 * (lo + hi) + shift
    ab = np.zeros((3, m))
    ab[0, 1:] = e
    ab[1, :] = d - sigma
    ab[2, :-1] = e
    rng = np.random.Generator(np.random.PCG64(12345))
    v = rng.standard_normal(m)
    v /= np.linalg.norm(v)
    theta = sigma
    # residuals bottom out at matrix-scale rounding noise
    tol = 1e-10 * float(np.max(np.abs(d)) + 2.0 * np.max(np.abs(e)))
    for _ in range(500):
        try:
            w = solve_banded((1, 1), ab, v)
        except np.linalg.LinAlgError:
            ab[1, :] += 1e-10 * max(1.0, abs(sigma))
            w = solve_banded((1, 1), ab, v)
        for u in prior:
            w -= np.dot(u, w) * u
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise NumericalError("inverse iteration produced a zero vector")
        v = w / nrm
        tv = d * v
        tv[:-1] += e * v[1:]
        tv[1:] += e * v[:-1]
        theta = float(np.dot(v, tv))
        resid = float(np.linalg.norm(tv - theta * v))
        if resid <= tol:
            return theta, v
    raise NumericalError(
        "inverse iteration did not converge within 500 sweeps")


def _radial_eigen_raw(g: ConeGeometry, l: float, eps: float, k: int,
                      intervals: int) -> float:
    n = g.dim
    h = (1.0 - eps) / intervals
    r = eps + h * np.arange(1, intervals)
    q = (l * (l + n - 2.0) + (n - 1.0) * (n - 3.0) / 4.0) / r ** 2
    d = 2.0 / h ** 2 + q
    e = np.full(intervals - 2, -1.0 / h ** 2)
    prior: list = []
    theta = None
    for j in range(1, k + 1):
        theta, v = _tridiag_eigenpair(d, e, j, prior, 0.0)
        prior.append(v)
    return float(theta)


def radial_fd_eigen(g: ConeGeometry, l: float, eps: float, k: int,
                    cfg: FdConfig = FdConfig()) -> float:
    """k-th radial eigenvalue at angular parameter l by finite
    differences; with ``cfg.richardson`` the two-grid h^2-extrapolated
    value."""
    if not 0.0 <= eps < 1.0:
        raise ParameterError("eps must lie in [0, 1)")
    if k < 1:
        raise ParameterError("radial index k is 1-based")
    if not l > 0.0 and eps == 0.0:
        raise ParameterError("the vertex-touching grid requires l > 0")
    lam_h = _radial_eigen_raw(g, l, eps, k, cfg.radial_nodes)
    if not cfg.richardson:
        return lam_h
    lam_2h = _radial_eigen_raw(g, l, eps, k, cfg.radial_nodes // 2)
    return (4.0 * lam_h - lam_2h) / 3.0


def _polar_matrix(beta: float, eps: float, nr: int, nth: int):
    """Symmetrized 5-point polar discretization of -Laplace on the
    sector {eps < r < 1, |theta| < beta}, Dirichlet throughout."""
    hr = (1.0 - eps) / nr
    hth = 2.0 * beta / nth
    r = eps + hr * np.arange(1, nr)
    mr, mth = nr - 1, nth - 1

    def idx(i, j):
        return i * mth + j

    rows, cols, vals = [], [], []
    for i in range(mr):
        ri = r[i]
        diag = 2.0 / hr ** 2 + 2.0 / (ri ** 2 * hth ** 2)
        # radial couplings, symmetrized: c_i r_i = a_{i+1} r_{i+1}
        if i + 1 < mr:
            off = -(ri + hr / 2.0) / (hr ** 2 * math.sqrt(ri * r[i + 1]))
        for j in range(mth):
            p = idx(i, j)
            rows.append(p); cols.append(p); vals.append(diag)
            if i + 1 < mr:
                qd = idx(i + 1, j)
                rows.append(p); cols.append(qd); vals.append(off)
                rows.append(qd); cols.append(p); vals.append(off)
            if j + 1 < mth:
                qd = idx(i, j + 1)
                ang = -1.0 / (ri ** 2 * hth ** 2)
                rows.append(p); cols.append(qd); vals.append(ang)
                rows.append(qd); cols.append(p); vals.append(ang)
    m = mr * mth
    return csc_matrix((vals, (rows, cols)), shape=(m, m))


def _polar_eigen_raw(beta: float, eps: float, nr: int, nth: int,
                     shift: float) -> float:
    a = _polar_matrix(beta, eps, nr, nth)
    lu = splu(a - shift * identity(a.shape[0], format="csc"))
    rng = np.random.Generator(np.random.PCG64(6789))
    v = rng.standard_normal(a.shape[0])
    v /= np.linalg.norm(v)
    theta = shift
    tol = 1e-10 * float(a.diagonal().max())  # matrix-scale noise floor
    for _ in range(500):
        w = lu.solve(v)
        v = w / np.linalg.norm(w)
        av = a @ v
        theta = float(np.dot(v, av))
        resid = float(np.linalg.norm(av - theta * v))
        if resid <= tol:
            return theta
    raise NumericalError(
        "inverse power iteration did not converge within 500 sweeps")


def polar_fd_eigen(beta: float, eps: float,
                   cfg: FdConfig = FdConfig(radial_nodes=128)) -> float:
    """Smallest Dirichlet eigenvalue of the N=2 sector by the 5-point
    polar discretization and inverse power iteration."""
    if not 0.0 < beta < math.pi:
        raise ParameterError("polar_fd_eigen requires beta in (0, pi)")
    if not 0.0 <= eps < 1.0:
        raise ParameterError("eps must lie in [0, 1)")
    lam_h = _polar_eigen_raw(beta, eps, cfg.radial_nodes,
                             cfg.angular_nodes, cfg.shift)
    if not cfg.richardson:
        return lam_h
    lam_2h = _polar_eigen_raw(beta, eps, cfg.radial_nodes // 2,
                              cfg.angular_nodes // 2, cfg.shift)
    return (4.0 * lam_h - lam_2h) / 3.0
