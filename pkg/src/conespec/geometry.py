"""Spherical cones, their inner-ball perturbations, and measures.

The base domain is the unit-ball cone of half-angle beta: points with
radius in (0, 1) whose polar angle from the positive x1-axis is below
beta (for N = 2 this is the pair of arcs |angle| < beta, one connected
sector). Two perturbations are supported:

* ExactCut    -- remove the ball of radius eps about the vertex.
* LipschitzCut -- truncate by the graph of the piecewise function
  g(xbar) = eps - |xbar| tan(beta/2)   for |xbar| <= eps sin(beta),
  g(xbar) = |xbar| cot(beta)           otherwise,
  which keeps the whole family in one Lipschitz class for eps < 1/2.

All boundaries are treated as open sets: membership is strict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, VariantError
from .specfun import gamma

__all__ = [
    "Variant",
    "ConeGeometry",
    "PerturbedCone",
    "cap_measure",
    "removed_volume",
    "inclusion_constant",
    "contains",
    "mc_removed_volume",
]


class Variant(enum.Enum):
    EXACT_CUT = "exact"
    LIPSCHITZ_CUT = "lipschitz"


@dataclass(frozen=True)
class ConeGeometry:
    """Dimension N >= 2 and half-angle beta in (0, pi); mu = (N-3)/2."""

    dim: int
    half_angle: float
    mu: float = field(init=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ParameterError(f"dimension must be an integer >= 2, got {self.dim}")
        if not 0.0 < self.half_angle < math.pi:
            raise ParameterError(
                f"half-angle must lie in (0, pi), got {self.half_angle}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "mu", (self.dim - 3) / 2.0)


@dataclass(frozen=True)
class PerturbedCone:
    """A cone plus an inner radius eps and the perturbation variant."""

    base: ConeGeometry
    eps: float
    variant: Variant = Variant.EXACT_CUT

    def __post_init__(self):
        if not 0.0 <= self.eps < 1.0:
            raise ParameterError(f"eps must lie in [0, 1), got {self.eps}")
        if self.variant is Variant.LIPSCHITZ_CUT and not self.eps < 0.5:
            raise ParameterError(
                "the Lipschitz variant requires eps < 1/2 "
                "(single-class membership range)")


def _adaptive_simpson(f, a, b, tol, depth=48):
    fa, fm, fb = f(a), f((a + b) / 2.0), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2.0
        lm, rm = (a + m) / 2.0, (m + b) / 2.0
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    return rec(a, b, fa, fm, fb, whole, tol, depth)


def _unit_sphere_area(n: int) -> float:
    """Surface measure of S^(n) embedded in R^(n+1)."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


def cap_measure(g: ConeGeometry) -> float:
    """(N-1)-dimensional measure sigma_beta of the spherical cap.

    N = 2: the two boundary arcs carry total angle 2 beta. N >= 3:
    |S^(N-2)| * int_0^beta sin^(N-2) dtheta by adaptive quadrature.
    """
    if g.dim == 2:
        return 2.0 * g.half_angle
    p = g.dim - 2
    integral = _adaptive_simpson(lambda t: math.sin(t) ** p,
                                 0.0, g.half_angle, 1e-12)
    return _unit_sphere_area(g.dim - 2) * integral


def removed_volume(p: PerturbedCone) -> float:
    """|Omega_beta \\ Omega_beta(eps)| = sigma_beta eps^N / N (exact cut)."""
    if p.variant is not Variant.EXACT_CUT:
        raise VariantError(
            "removed_volume has a closed form only for the exact cut; "
            "use mc_removed_volume for the Lipschitz variant")
    n = p.base.dim
    return cap_measure(p.base) * p.eps ** n / n


def inclusion_constant(beta: float) -> float:
    """The constant A = sin(beta) / sqrt(2 (1 - cos(beta))) in (0, 1]
    governing Omega(eps) c LipschitzCut(eps) c Omega(A eps)."""
    if not 0.0 < beta < math.pi:
        raise ParameterError("inclusion_constant requires beta in (0, pi)")
    # 1 - cos(beta) = 2 sin^2(beta/2): same formula, no cancellation at 0
    return math.sin(beta) / math.sqrt(4.0 * math.sin(beta / 2.0) ** 2)


def _g_profile(norm_xbar, eps: float, beta: float):
    """The Lipschitz truncation profile g(|xbar|); array-friendly."""
    tan_half = math.tan(beta / 2.0)
    cot = math.cos(beta) / math.sin(beta)
    inner = eps - norm_xbar * tan_half
    outer = norm_xbar * cot
    return np.where(norm_xbar <= eps * math.sin(beta), inner, outer)


def contains(p: PerturbedCone, x) -> bool:
    """Strict membership of the point x (length-N array) in the open set."""
    pt = np.asarray(x, dtype=float)
    if pt.shape != (p.base.dim,):
        raise ParameterError(
            f"point has shape {pt.shape}, expected ({p.base.dim},)")
    return bool(_contains_many(p, pt[None, :])[0])


def _contains_many(p: PerturbedCone, pts: np.ndarray) -> np.ndarray:
    """Vectorized membership for an (m, N) array of points."""
    beta = p.base.half_angle
    x1 = pts[:, 0]
    norm_xbar = np.sqrt(np.sum(pts[:, 1:] ** 2, axis=1))
    r = np.sqrt(x1 * x1 + norm_xbar * norm_xbar)
    if p.variant is Variant.EXACT_CUT:
        theta = np.arctan2(norm_xbar, x1)  # polar angle in [0, pi]
        return (r > p.eps) & (r < 1.0) & (theta < beta)
    return (r < 1.0) & (x1 > _g_profile(norm_xbar, p.eps, beta))


def mc_removed_volume(p: PerturbedCone, samples: int, seed: int,
                      chunk: int = 1 << 14):
    """Monte Carlo estimate of |Omega_beta \\ LipschitzCut(eps)|.

    The difference set lies inside the ball of radius eps about the
    vertex (it is squeezed between the exact cuts at radii A*eps and
    eps), so sampling is uniform on that ball. Deterministic for a fixed
    seed: the sample range is partitioned into fixed chunks with
    SeedSequence-spawned streams, so the result does not depend on
    evaluation order. Returns (estimate, standard_error).
    """
    if p.variant is not Variant.LIPSCHITZ_CUT:
        raise VariantError("mc_removed_volume applies to the Lipschitz variant")
    if samples < 10_000:
        raise ParameterError("mc_removed_volume requires samples >= 10^4")
    if p.eps == 0.0:
        return 0.0, 0.0
    n = p.base.dim
    exact = PerturbedCone(p.base, p.eps, Variant.EXACT_CUT)
    ball_vol = math.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0) * p.eps ** n

    n_chunks = (samples + chunk - 1) // chunk
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    total = 0
    for i in range(n_chunks):
        m = min(chunk, samples - total)
        rng = np.random.Generator(np.random.PCG64(streams[i]))
        # uniform in the eps-ball: direction x radius^(1/n)
        z = rng.standard_normal((m, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        radii = p.eps * rng.random(m) ** (1.0 / n)
        pts = z * radii[:, None]
        inside_cone = _contains_many(
            PerturbedCone(p.base, 0.0, Variant.EXACT_CUT), pts)
        in_lipschitz = _contains_many(p, pts)
        hits += int(np.sum(inside_cone & ~in_lipschitz))
        total += m
    frac = hits / total
    estimate = ball_vol * frac
    std_error = ball_vol * math.sqrt(max(frac * (1.0 - frac), 1e-12) / total)
    return estimate, std_error
