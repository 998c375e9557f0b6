"""Angular eigenvalue parameters of the spherical cap.

The admissible set Sigma_beta consists of the l > 0 for which the
Laplace-Beltrami Dirichlet problem on the cap of half-angle beta has a
nontrivial eigenfunction with eigenvalue l (l + N - 2). Its minimum
l_beta (the characteristic value of the cap) controls the vertex
regularity of the cone eigenfunctions.

For N = 2 everything is explicit: l_k = k pi / (2 beta). For N >= 3 the
axisymmetric parameters are the zeros in l of

    l  |->  P^(-mu)_(l+mu)(cos beta),        mu = (N - 3) / 2,

located by a sign-change scan plus bracketed root refinement. Whether
additional non-axisymmetric families enter Sigma_beta is not resolved
here; every consumer labels N >= 3 output as the axisymmetric sector.

Closed forms used as cross-checks: l_beta = pi/(2 beta) for N = 2 and
l_beta = (pi - beta)/beta for N = 4; for beta -> pi the known asymptotic
equivalents are provided by ``characteristic_asymptotic``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BracketingError, NumericalError, ParameterError, PreconditionError
from .geometry import ConeGeometry
from .specfun import DEFAULT_CONTROL, SeriesControl, find_zero, gamma, legendre_p

__all__ = [
    "AngularMode",
    "characteristic_function",
    "characteristic_value",
    "sigma_beta",
    "characteristic_asymptotic",
]

# beta above which the direct Legendre path is refused for N >= 3
_DIRECT_BETA_MAX_GAP = 0.05
# scan resolution in l; zeros are separated by >~ 1/2 on supported ranges
_SCAN_STEP = 0.05
_FIRST_ROOT_BOUND = 50.0


@dataclass(frozen=True)
class AngularMode:
    """One admissible angular parameter l with its Bessel order
    nu = (N + 2 l - 2)/2 and its 1-based position within Sigma_beta."""

    l: float
    dim: int
    index: int
    nu: float = field(init=False)

    def __post_init__(self):
        if not self.l > 0.0:
            raise ParameterError("angular parameter l must be positive")
        if self.index < 1:
            raise ParameterError("mode index is 1-based")
        object.__setattr__(self, "nu", (self.dim + 2.0 * self.l - 2.0) / 2.0)


def characteristic_function(g: ConeGeometry, l: float,
                            control: SeriesControl = DEFAULT_CONTROL) -> float:
    """P^(-mu)_(l+mu)(cos beta), the function whose zeros in l form the
    axisymmetric sector of Sigma_beta. Defined for any N >= 2."""
    return legendre_p(-g.mu, l + g.mu, math.cos(g.half_angle), control)


def _scan_grid(start: float, stop: float, step: float):
    """A geometric ladder below ``step`` (first roots approach 0 as
    beta -> pi for N >= 4) followed by arithmetic steps."""
    pts = []
    v = start
    while v < step:
        pts.append(v)
        v *= 2.0
    v = step
    while v <= stop:
        pts.append(v)
        v += step
    return pts


def _legendre_roots(g: ConeGeometry, count: int,
                    control: SeriesControl) -> list[float]:
    """First ``count`` positive zeros of the characteristic function."""
    if g.dim >= 3 and g.half_angle > math.pi - _DIRECT_BETA_MAX_GAP:
        raise PreconditionError(
            f"direct Legendre path requires beta <= pi - "
            f"{_DIRECT_BETA_MAX_GAP:g}; use characteristic_asymptotic")
    # enough room for `count` roots spaced ~ pi / beta apart
    bound = _FIRST_ROOT_BOUND + (count + 2) * (math.pi / g.half_angle + 1.0)
    grid = _scan_grid(1e-6, bound, _SCAN_STEP)
    f = lambda l: characteristic_function(g, l, control)
    roots: list[float] = []
    f_prev = f(grid[0])
    for l_prev, l_next in zip(grid, grid[1:]):
        f_next = f(l_next)
        if f_prev == 0.0:
            roots.append(l_prev)
        elif f_prev * f_next < 0.0:
            roots.append(find_zero(f, (l_prev, l_next), tol=1e-11))
        f_prev = f_next
        if len(roots) >= count:
            return roots
        if not roots and l_next > _FIRST_ROOT_BOUND:
            raise BracketingError(
                f"no sign change of the characteristic function for "
                f"l in (0, {_FIRST_ROOT_BOUND:g}]")
    raise BracketingError(
        f"scan exhausted at l={bound:g} with only {len(roots)} of "
        f"{count} roots found")


def characteristic_value(g: ConeGeometry,
                         control: SeriesControl = DEFAULT_CONTROL) -> float:
    """The characteristic value l_beta = min Sigma_beta.

    N = 2 returns the exact closed form pi/(2 beta). N >= 3 locates the
    smallest Legendre zero (absolute tolerance ~1e-9); for N = 4 the
    result is checked against the closed form (pi - beta)/beta.
    """
    if g.dim == 2:
        return math.pi / (2.0 * g.half_angle)
    root = _legendre_roots(g, 1, control)[0]
    if g.dim == 4:
        closed = (math.pi - g.half_angle) / g.half_angle
        if abs(root - closed) > 1e-6 * max(1.0, closed):
            raise NumericalError(
                f"N=4 Legendre root {root!r} disagrees with the closed "
                f"form {closed!r}")
    return root


def sigma_beta(g: ConeGeometry, count: int,
               control: SeriesControl = DEFAULT_CONTROL) -> list[AngularMode]:
    """The first ``count`` elements of Sigma_beta, increasing.

    For N >= 3 this is the axisymmetric sector (zeros of the single
    Legendre family); see the module docstring.
    """
    if not 1 <= count <= 32:
        raise ParameterError("sigma_beta supports 1 <= count <= 32")
    if g.dim == 2:
        ls = [k * math.pi / (2.0 * g.half_angle) for k in range(1, count + 1)]
    else:
        ls = _legendre_roots(g, count, control)
    modes = [AngularMode(l, g.dim, i + 1) for i, l in enumerate(ls)]
    for a, b in zip(modes, modes[1:]):
        if not a.l < b.l:
            raise NumericalError("Sigma_beta scan produced non-increasing l")
    return modes


def characteristic_asymptotic(g: ConeGeometry) -> float:
    """Leading-order equivalent of l_beta as beta -> pi:

        N = 3 :  1 / (2 log(2/(pi - beta)))
        N >= 4:  Gamma(N-2) / (Gamma((N-1)/2) Gamma((N-3)/2))
                 * ((pi - beta)/2)^(N-3)
    """
    if g.dim == 2:
        raise ParameterError(
            "N=2 has the exact value pi/(2 beta); no asymptotic needed")
    if not g.half_angle > math.pi - 0.2:
        raise PreconditionError(
            "characteristic_asymptotic applies for beta > pi - 0.2")
    gap = math.pi - g.half_angle
    if g.dim == 3:
        return 1.0 / (2.0 * math.log(2.0 / gap))
    n = g.dim
    return (gamma(n - 2.0) / (gamma((n - 1.0) / 2.0) * gamma((n - 3.0) / 2.0))
            * (gap / 2.0) ** (n - 3))
