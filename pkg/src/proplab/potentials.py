"""Potential families with exact complex-dilation continuation.

Each family supports evaluation V(x), the analytic continuation V(e^{i beta} x),
the odd continued part

    dilation_odd_part(x, beta) = (i/2) [V(e^{i beta} x) - V(e^{-i beta} x)]
                               = -Im V(e^{i beta} x),

and the classical virial -x V'(x) via hand-coded derivatives (never finite
differences).  The odd part is odd in beta, vanishes at beta = 0, and obeys
dilation_odd_part / beta -> virial as beta -> 0.

The black-hole family is expressed in hump-centered tortoise coordinates: the
grid coordinate x maps to r* = x + r*(peak), and the area radius r solves
r + 2M ln(r - 2M) = r*.  Centering puts the potential's maximum at x = 0,
where the scaling generator lives; without it the virial changes sign between
the origin and the hump and every repulsiveness certificate fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

# continuation angle ceilings; rotations of x^2 hit the negative real axis at 2*beta = pi
_BETA_MAX_RATIONAL = 0.499 * math.pi
_BETA_MAX_BLACKHOLE = 0.5


class ContinuationError(RuntimeError):
    """Analytic continuation hit a pole or failed to converge."""


@dataclass(frozen=True)
class Lorentzian:
    """V(x) = c0 / (b^2 + (x - center)^2).  Repulsive one-hump for c0 > 0.

    A nonzero center shifts the hump (used to build multi-hump sums); the
    dilation continuation always rotates about the origin.
    """

    c0: float = 1.0
    b: float = 1.0
    center: float = 0.0
    beta_max: float = _BETA_MAX_RATIONAL

    def __post_init__(self):
        if not (self.b > 0):
            raise ValueError(f"Lorentzian needs b > 0, got b={self.b}")


@dataclass(frozen=True)
class ExponentialTail:
    """V(x) = amplitude * exp(-rate * sqrt(1 + x^2)).

    Even, one-hump, repulsive, with tails amplitude * e^{-rate |x|}; its
    continued odd part oscillates with period ~ 1/(rate sin beta) under the
    exponentially decaying envelope.
    """

    amplitude: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if not (self.rate > 0):
            raise ValueError(f"ExponentialTail needs rate > 0, got {self.rate}")

    beta_max: float = _BETA_MAX_RATIONAL


@dataclass(frozen=True)
class Stieltjes:
    """V(x) = integral rho(a) / (a + x^2) da, trapezoid on given samples.

    rho >= 0 samplewise and the tail mass integral rho/(1+a) must be finite on
    the sampled range (always true for finite samples; checked for NaN/inf).
    """

    alphas: tuple
    rhos: tuple
    beta_max: float = _BETA_MAX_RATIONAL

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        r = np.asarray(self.rhos, dtype=float)
        if a.ndim != 1 or a.shape != r.shape or len(a) < 2:
            raise ValueError("Stieltjes needs matching 1-D alpha and rho samples (>= 2 points)")
        if np.any(np.diff(a) <= 0):
            raise ValueError("Stieltjes alpha samples must be strictly increasing")
        if np.any(a < 0):
            raise ValueError("Stieltjes alpha samples must be >= 0")
        if np.any(r < 0):
            raise ValueError("Stieltjes density must be >= 0 samplewise")
        if not np.all(np.isfinite(np.trapezoid(r / (1.0 + a), a))):
            raise ValueError("Stieltjes tail mass integral is not finite")

    def arrays(self):
        return np.asarray(self.alphas, dtype=float), np.asarray(self.rhos, dtype=float)


@dataclass(frozen=True)
class BlackHole:
    """Radial barrier (1 - 2M/r)(2M/r^3 + l(l+1)/r^2) in centered tortoise x.

    mass > 0; evaluation domain is the whole line (r > 2M always).  With
    centered=True (default) the coordinate is shifted so the hump top sits at
    x = 0.
    """

    mass: float = 1.0
    ell: int = 0
    centered: bool = True
    beta_max: float = _BETA_MAX_BLACKHOLE
    _center: float = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (self.mass > 0):
            raise ValueError(f"BlackHole needs mass > 0, got {self.mass}")
        if self.ell < 0:
            raise ValueError(f"BlackHole needs ell >= 0, got {self.ell}")
        object.__setattr__(self, "_center", self._find_center() if self.centered else 0.0)

    def _find_center(self) -> float:
        # numeric peak of V over r* (golden refinement of a dense scan)
        scan = np.linspace(-20.0 * self.mass, 60.0 * self.mass, 4001)
        vals = _blackhole_eval(scan, self.mass, self.ell, 0.0)
        i = int(np.argmax(vals))
        res = minimize_scalar(
            lambda s: -float(_blackhole_eval(np.array([s]), self.mass, self.ell, 0.0)[0]),
            bracket=(scan[i - 1], scan[i], scan[i + 1]),
            method="golden",
            options={"xtol": 1e-12},
        )
        return float(res.x)

    @property
    def center(self) -> float:
        return self._center


@dataclass(frozen=True)
class Scaled:
    """Angular-momentum scaling l^2 * base(x)."""

    ell: int
    base: object

    def __post_init__(self):
        if self.ell < 0:
            raise ValueError(f"Scaled needs ell >= 0, got {self.ell}")

    @property
    def beta_max(self) -> float:
        return self.base.beta_max


@dataclass(frozen=True)
class SumPotential:
    """Linear combination sum_i coeff_i * spec_i."""

    terms: tuple  # of (coeff, spec)

    @property
    def beta_max(self) -> float:
        return min(s.beta_max for _, s in self.terms)


def load_stieltjes_csv(path) -> Stieltjes:
    """Two-column CSV (alpha, rho), strictly increasing alpha, header optional."""
    alphas, rhos = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected two columns, got {len(parts)}")
            try:
                a, r = float(parts[0]), float(parts[1])
            except ValueError:
                if line_no == 1:
                    continue  # header
                raise ValueError(f"{path}:{line_no}: non-numeric row {parts!r}")
            alphas.append(a)
            rhos.append(r)
    return Stieltjes(alphas=tuple(alphas), rhos=tuple(rhos))


# ---------------------------------------------------------------------------
# tortoise coordinate machinery
# ---------------------------------------------------------------------------

def tortoise(r, mass: float):
    """r* = r + 2M ln(r - 2M), defined for r > 2M."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 2 * mass):
        raise ValueError(f"tortoise coordinate needs r > 2*mass = {2 * mass}")
    return r + 2 * mass * np.log(r - 2 * mass)


def tortoise_inverse(rstar, mass: float, max_iter: int = 200):
    """Invert r* = r + 2M ln(r - 2M) by safeguarded Newton in u = ln(r - 2M).

    Converges for any real r*; |tortoise(result) - rstar| <= 1e-10 (1 + |rstar|).
    """
    rs = np.asarray(rstar, dtype=float)
    scalar = rs.ndim == 0
    rs = np.atleast_1d(rs)
    # seed: far out r ~ r*, near the horizon u ~ (r* - 2M) / 2M
    u = np.where(rs > 4 * mass, np.log(np.maximum(rs - 2 * mass, 1e-300)), (rs - 2 * mass) / (2 * mass))
    done = np.zeros(rs.shape, dtype=bool)
    for _ in range(max_iter):
        eu = np.exp(u)
        f = 2 * mass + eu + 2 * mass * u - rs
        du = f / (eu + 2 * mass)
        u = np.where(done, u, u - du)
        done |= np.abs(du) <= 1e-14 * (1.0 + np.abs(u))
        if done.all():
            break
    else:
        raise ContinuationError("tortoise inversion did not converge within the iteration cap")
    r = 2 * mass + np.exp(u)
    return float(r[0]) if scalar else r


def _tortoise_inverse_complex(z, mass: float, seed, max_iter: int = 200):
    """Newton for r + 2M Log(r - 2M) = z in the complex plane."""
    r = np.asarray(seed, dtype=complex).copy()
    z = np.asarray(z, dtype=complex)
    done = np.zeros(r.shape, dtype=bool)
    for _ in range(max_iter):
        w = r - 2 * mass
        if np.any(np.abs(w) < 1e-12):
            raise ContinuationError("continuation reached the horizon singularity")
        f = r + 2 * mass * np.log(w) - z
        dr = f / (1 + 2 * mass / w)
        r = np.where(done, r, r - dr)
        done |= np.abs(dr) <= 1e-14 * (1.0 + np.abs(r))
        if done.all():
            return r
    raise ContinuationError("complex tortoise inversion did not converge")


def _blackhole_radius(spec: BlackHole, x, beta: float):
    """Area radius for the (possibly rotated) centered tortoise coordinate."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rstar0 = x + spec.center
    r = tortoise_inverse(rstar0, spec.mass)
    r = np.atleast_1d(r).astype(complex)
    if beta == 0.0:
        return r
    # path continuation in the rotation angle, seeded from the real solution
    steps = max(4, int(math.ceil(abs(beta) / 0.02)))
    for s in range(1, steps + 1):
        bb = beta * s / steps
        z = np.exp(1j * bb) * x + spec.center
        r = _tortoise_inverse_complex(z, spec.mass, r)
    return r


def _blackhole_eval(x, mass: float, ell: int, center: float):
    r = tortoise_inverse(np.asarray(x, dtype=float) + center, mass)
    f = 1.0 - 2.0 * mass / r
    return f * (2.0 * mass / r**3 + ell * (ell + 1) / r**2)


# ---------------------------------------------------------------------------
# evaluation, continuation, virial
# ---------------------------------------------------------------------------

def evaluate(spec, x):
    """Real potential value(s) at x."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Lorentzian):
        return spec.c0 / (spec.b**2 + (x - spec.center) ** 2)
    if isinstance(spec, ExponentialTail):
        return spec.amplitude * np.exp(-spec.rate * np.sqrt(1.0 + x**2))
    if isinstance(spec, Stieltjes):
        a, r = spec.arrays()
        return stieltjes_evaluate(a, r, x)
    if isinstance(spec, BlackHole):
        return _blackhole_eval(x, spec.mass, spec.ell, spec.center)
    if isinstance(spec, Scaled):
        return spec.ell**2 * evaluate(spec.base, x)
    if isinstance(spec, SumPotential):
        return sum(c * evaluate(s, x) for c, s in spec.terms)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


def evaluate_continued(spec, x, beta: float):
    """Complex value V(e^{i beta} x); conjugate-symmetric in beta."""
    if abs(beta) > spec.beta_max:
        raise ValueError(f"|beta| = {abs(beta)} exceeds beta_max = {spec.beta_max} for {type(spec).__name__}")
    x = np.asarray(x, dtype=float)
    rot2 = np.exp(2j * beta)
    if isinstance(spec, Lorentzian):
        den = spec.b**2 + (np.exp(1j * beta) * x - spec.center) ** 2
        if np.any(np.abs(den) < 1e-12):
            raise ContinuationError("Lorentzian continuation hit a pole")
        return spec.c0 / den
    if isinstance(spec, ExponentialTail):
        root = np.sqrt(1.0 + rot2 * x**2)
        return spec.amplitude * np.exp(-spec.rate * root)
    if isinstance(spec, Stieltjes):
        a, r = spec.arrays()
        den = a[None, :] + rot2 * (x.reshape(-1, 1) ** 2)
        if np.any(np.abs(den) < 1e-12):
            raise ContinuationError("Stieltjes continuation hit a pole")
        vals = np.trapezoid(r[None, :] / den, a, axis=1)
        return vals.reshape(x.shape)
    if isinstance(spec, BlackHole):
        r = _blackhole_radius(spec, x, beta)
        f = 1.0 - 2.0 * spec.mass / r
        out = f * (2.0 * spec.mass / r**3 + spec.ell * (spec.ell + 1) / r**2)
        return out.reshape(np.shape(x)) if np.shape(x) else out[0]
    if isinstance(spec, Scaled):
        return spec.ell**2 * evaluate_continued(spec.base, x, beta)
    if isinstance(spec, SumPotential):
        return sum(c * evaluate_continued(s, x, beta) for c, s in spec.terms)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


def dilation_odd_part(spec, x, beta: float):
    """(i/2)[V(e^{i b} x) - V(e^{-i b} x)] = -Im V(e^{i b} x); odd in beta.

    Positivity of this quantity (alone or with a 2 sin(2b) p^2 helping term)
    is the analytic strengthening of classical repulsiveness.
    """
    return -np.imag(evaluate_continued(spec, x, beta))


def virial(spec, x):
    """-x V'(x) from the hand-coded derivative of each closed form."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Lorentzian):
        return 2.0 * spec.c0 * x * (x - spec.center) / (spec.b**2 + (x - spec.center) ** 2) ** 2
    if isinstance(spec, ExponentialTail):
        s = np.sqrt(1.0 + x**2)
        return spec.amplitude * spec.rate * (x**2 / s) * np.exp(-spec.rate * s)
    if isinstance(spec, Stieltjes):
        a, r = spec.arrays()
        integ = r[None, :] * 2.0 * (x.reshape(-1, 1) ** 2) / (a[None, :] + x.reshape(-1, 1) ** 2) ** 2
        return np.trapezoid(integ, a, axis=1).reshape(x.shape)
    if isinstance(spec, BlackHole):
        r = np.real(_blackhole_radius(spec, x, 0.0)).reshape(np.shape(x) or (1,))
        m, L = spec.mass, spec.ell * (spec.ell + 1)
        fprime = 2.0 * m / r**2
        core = 2.0 * m / r**3 + L / r**2
        coreprime = -6.0 * m / r**4 - 2.0 * L / r**3
        f = 1.0 - 2.0 * m / r
        dv_dr = fprime * core + f * coreprime
        out = -(np.asarray(x).reshape(r.shape)) * dv_dr * f  # dV/dx = dV/dr * dr/dr*, dr/dr* = f
        return out.reshape(np.shape(x)) if np.shape(x) else float(out[0])
    if isinstance(spec, Scaled):
        return spec.ell**2 * virial(spec.base, x)
    if isinstance(spec, SumPotential):
        return sum(c * virial(s, x) for c, s in spec.terms)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


def stieltjes_evaluate(alphas, rhos, x):
    """Trapezoid quadrature of integral rho(a)/(a + x^2) da; even in x,
    nonincreasing in |x|."""
    a = np.asarray(alphas, dtype=float)
    r = np.asarray(rhos, dtype=float)
    if np.any(r < 0):
        raise ValueError("Stieltjes density must be >= 0 samplewise")
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).reshape(-1, 1)
    vals = np.trapezoid(r[None, :] / (a[None, :] + flat**2), a, axis=1)
    return vals.reshape(x.shape) if x.shape else float(vals[0])


def hump_analysis(spec, sample_grid) -> dict:
    """Locate the potential's maximum and decide whether it is one-hump.

    Dense sampling, golden-section refinement of the peak, and a sign-change
    count of the sampled derivative.  Flat potentials (maximum attained on
    more than 10% of the samples) are flagged and reported as not one-hump.
    """
    xs = np.asarray(sample_grid, dtype=float)
    vals = np.asarray(evaluate(spec, xs), dtype=float)
    vmax = vals.max()
    near_max = np.abs(vals - vmax) <= 1e-12 * max(1.0, abs(vmax))
    if near_max.mean() > 0.10:
        return {
            "peak_x": float(xs[int(np.argmax(vals))]),
            "is_one_hump": False,
            "diagnostic": "flat: maximum attained on more than 10% of samples",
        }
    i = int(np.argmax(vals))
    lo = max(i - 1, 0)
    hi = min(i + 1, len(xs) - 1)
    if lo < i < hi:
        res = minimize_scalar(
            lambda s: -float(evaluate(spec, np.array([s]))[0]),
            bracket=(xs[lo], xs[i], xs[hi]),
            method="golden",
            options={"xtol": 1e-12},
        )
        peak_x = float(res.x)
    else:
        peak_x = float(xs[i])
    dv = np.diff(vals)
    dv = dv[np.abs(dv) > 1e-13 * max(1.0, abs(vmax))]
    changes = int(np.sum(np.diff(np.sign(dv)) != 0)) if len(dv) else 0
    out = {"peak_x": peak_x, "is_one_hump": changes == 1, "diagnostic": f"{changes} derivative sign change(s)"}
    if isinstance(spec, BlackHole):
        out["peak_radius"] = float(tortoise_inverse(peak_x + spec.center, spec.mass))
    return out


def beta_budget(ell: int, beta0: float = 0.1) -> float:
    """Continuation angle for scaled barriers: min(beta0, 1/(4 ln(2 + l))).

    Scaled potentials with exponential tails need the rotation angle to shrink
    logarithmically with the scaling, or the oscillating part of the continued
    potential outruns the l^2 growth.
    """
    return min(beta0, 1.0 / (4.0 * math.log(2.0 + ell)))
