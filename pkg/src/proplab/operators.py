"""Discrete grid, core self-adjoint operators, and spectral calculus.

Everything lives on a uniform 1-D Dirichlet lattice.  The stencils are chosen
so that the basic commutation relations close exactly up to terms supported on
the outermost lattice points:

    lap = (2/h^2) (I - M_avg)          M_avg u_j = (u_{j+1} + u_{j-1}) / 2
    [X, D] = -M_avg                    D = central difference
    i [lap, A] = 2 P^2 + corner terms  A = (X P + P X) / 2

In particular the positive-commutator identity

    i [-lap, tanh(A/R)] = 2 P k(A/R) P ,  k(a) = sin(2/R) / (cosh(2a/R) + cos(2/R))

holds at machine precision as a quadratic form on grid-resolved states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

# tanh(A/R) has a positive commutator with the Laplacian only for R above this.
POSITIVITY_THRESHOLD = 2.0 / math.pi

HERMITICITY_RTOL = 1e-12
SPECTRAL_RTOL = 1e-10


class SpectralError(RuntimeError):
    """Eigendecomposition failed its reconstruction or unitarity check."""


class SubcriticalScaleWarning(UserWarning):
    """The tanh scale is at or below the positivity threshold 2/pi."""


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D lattice with Dirichlet convention beyond both ends."""

    n: int
    x_min: float
    x_max: float
    h: float
    boundary: str = "dirichlet"
    points: np.ndarray = field(repr=False, default=None)

    @property
    def is_symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-12 * max(1.0, abs(self.x_max))

    @property
    def half_width(self) -> float:
        return self.x_max

    def key(self) -> tuple:
        return (self.n, self.x_min, self.x_max)


def make_grid(n: int, half_width: float) -> Grid:
    """Symmetric grid on [-half_width, +half_width] with n points."""
    if not isinstance(n, (int, np.integer)) or n < 16:
        raise ValueError(f"grid needs n >= 16 points, got n={n}")
    if not (np.isfinite(half_width) and half_width > 0):
        raise ValueError(f"half_width must be finite and positive, got {half_width}")
    # points as (2j - (n-1)) * c are exactly antisymmetric under index reversal,
    # which makes parity identities hold at the bit level; spacing is h = 2c
    c = half_width / (n - 1)
    h = 2.0 * c
    points = (2.0 * np.arange(n) - (n - 1)) * c
    points.setflags(write=False)
    return Grid(n=int(n), x_min=-float(half_width), x_max=float(half_width), h=h, points=points)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense self-adjoint matrix on a grid.

    hermiticity_defect records max |M - M^dag| of the matrix as handed to the
    constructor; the stored matrix is the symmetrized (M + M^dag)/2.
    """

    grid: Grid
    matrix: np.ndarray = field(repr=False)
    label: str
    hermiticity_defect: float

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def hermitian(grid: Grid, matrix: np.ndarray, label: str) -> HermitianOperator:
    """Symmetrize and wrap a matrix, recording its hermiticity defect."""
    matrix = np.asarray(matrix)
    defect = float(np.abs(matrix - matrix.conj().T).max())
    scale = float(np.abs(matrix).max())
    if scale > 0 and defect > 1e-6 * scale:
        raise ValueError(
            f"matrix for '{label}' is far from Hermitian: defect {defect:.3e} vs scale {scale:.3e}"
        )
    sym = (matrix + matrix.conj().T) / 2.0
    sym.setflags(write=False)
    return HermitianOperator(grid=grid, matrix=sym, label=label, hermiticity_defect=defect)


def require_same_grid(a: HermitianOperator, b: HermitianOperator) -> Grid:
    if a.grid.n != b.grid.n or abs(a.grid.h - b.grid.h) > 1e-15:
        raise ValueError(f"grid mismatch between '{a.label}' and '{b.label}'")
    return a.grid


def position_op(grid: Grid) -> HermitianOperator:
    """Multiplication by x."""
    return hermitian(grid, np.diag(grid.points), "x")


def difference_matrix(grid: Grid) -> np.ndarray:
    """Antisymmetric central difference (D u)_j = (u_{j+1} - u_{j-1}) / 2h."""
    n, h = grid.n, grid.h
    off = np.full(n - 1, 1.0 / (2.0 * h))
    return np.diag(off, 1) - np.diag(off, -1)


def momentum_op(grid: Grid) -> HermitianOperator:
    """p = -i D with the central-difference stencil; exactly Hermitian."""
    return hermitian(grid, -1j * difference_matrix(grid), "p")


def laplacian_op(grid: Grid) -> HermitianOperator:
    """3-point Dirichlet stencil for -d^2/dx^2; positive semidefinite."""
    n, h = grid.n, grid.h
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return hermitian(grid, np.diag(main) + np.diag(off, 1) + np.diag(off, -1), "lap")


def averaging_op(grid: Grid) -> HermitianOperator:
    """Symmetric neighbor average; equals I - (h^2/2) lap on this lattice."""
    off = np.full(grid.n - 1, 0.5)
    return hermitian(grid, np.diag(off, 1) + np.diag(off, -1), "avg")


def dilation_op(grid: Grid) -> HermitianOperator:
    """A = (X P + P X) / 2, the generator of scalings about the origin."""
    if not grid.is_symmetric:
        raise ValueError("dilation generator needs a symmetric grid (x_min = -x_max)")
    x = grid.points
    d = difference_matrix(grid)
    # (X D + D X) is real antisymmetric, so -i/2 times it is exactly Hermitian
    return hermitian(grid, -0.5j * (x[:, None] * d + d * x[None, :]), "A")


def weight_op(grid: Grid, b: float, sigma: float) -> HermitianOperator:
    """Multiplication by (b^2 + x^2)^(-sigma/2); bounded by b^(-sigma)."""
    if not (b > 0):
        raise ValueError(f"weight scale b must be positive, got {b}")
    if sigma < 0:
        raise ValueError(f"weight exponent sigma must be >= 0, got {sigma}")
    w = (b**2 + grid.points**2) ** (-sigma / 2.0)
    return hermitian(grid, np.diag(w), f"<x>_{b}^-{sigma}")


def window_complement_op(grid: Grid, b: float, sigma: float) -> HermitianOperator:
    """Multiplication by (b^-sigma - (b^2+x^2)^(-sigma/2))^(1/2).

    Square root of the gap between the weight and its ceiling; vanishes at
    x = 0 and approaches b^(-sigma/2) far out.
    """
    if not (b > 0):
        raise ValueError(f"weight scale b must be positive, got {b}")
    gap = b ** (-sigma) - (b**2 + grid.points**2) ** (-sigma / 2.0)
    return hermitian(grid, np.diag(np.sqrt(np.maximum(gap, 0.0))), f"chi_{b}^{sigma}")


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_label: str
    grid: Grid


def eigendecompose(op: HermitianOperator) -> SpectralDecomposition:
    """Full dense eigendecomposition with reconstruction self-check."""
    vals, vecs = np.linalg.eigh(op.matrix)
    mnorm = float(np.linalg.norm(op.matrix))
    recon = (vecs * vals) @ vecs.conj().T
    defect = float(np.linalg.norm(recon - op.matrix)) / (mnorm if mnorm > 0 else 1.0)
    if defect > SPECTRAL_RTOL:
        raise SpectralError(f"reconstruction defect {defect:.3e} for '{op.label}'")
    unit = float(np.abs(vecs.conj().T @ vecs - np.eye(op.grid.n)).max())
    if unit > SPECTRAL_RTOL:
        raise SpectralError(f"unitarity defect {unit:.3e} for '{op.label}'")
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralDecomposition(vals, vecs, op.label, op.grid)


def apply_function(decomp: SpectralDecomposition, f, label: str | None = None) -> HermitianOperator:
    """U f(Lambda) U^dag for a real scalar function f."""
    fv = np.asarray(f(decomp.eigenvalues), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise ValueError(
            f"function produced non-finite values on the spectrum of '{decomp.source_label}'"
        )
    m = (decomp.eigenvectors * fv) @ decomp.eigenvectors.conj().T
    return hermitian(decomp.grid, m, label or f"f({decomp.source_label})")


def tanh_observable(a_op: HermitianOperator, r_scale: float) -> HermitianOperator:
    """Bounded propagation observable tanh(A/R); norm < 1.

    Constructible for any R > 0, but positivity of its Heisenberg derivative
    needs R > 2/pi; below that a warning is issued.
    """
    if r_scale <= POSITIVITY_THRESHOLD:
        warnings.warn(
            f"scale R={r_scale} is at or below the positivity threshold 2/pi ~ "
            f"{POSITIVITY_THRESHOLD:.4f}; positivity certificates will fail",
            SubcriticalScaleWarning,
            stacklevel=2,
        )
    dec = eigendecompose(a_op)
    return apply_function(dec, lambda a: np.tanh(a / r_scale), f"tanh(A/{r_scale})")


def tanh_kernel_curve(a, r_scale: float, variant: str = "addition"):
    """Scalar kernel k(a) with i[-lap, tanh(A/R)] = 2 p k(A/R) p.

    variant="addition" is the closed form obtained from the hyperbolic
    addition identity, 2 k(a) = (1/i)[tanh((a+i)/R) - tanh((a-i)/R)]:

        k(a) = sin(2/R) / (cosh(2a/R) + cos(2/R)).

    variant="alternate" replaces cos(2/R) with 2 cosh(2/R) in the denominator;
    emitted in reports for arbitration, it does not match the commutator.
    """
    a = np.asarray(a, dtype=float)
    num = math.sin(2.0 / r_scale)
    ch = np.cosh(np.clip(2.0 * a / r_scale, -700.0, 700.0))
    if variant == "addition":
        return num / (ch + math.cos(2.0 / r_scale))
    if variant == "alternate":
        return num / (ch + 2.0 * math.cosh(2.0 / r_scale))
    raise ValueError(f"unknown kernel variant '{variant}'")


def tanh_commutator_kernel(
    a_op: HermitianOperator, r_scale: float, shift: float = 0.0
) -> HermitianOperator:
    """Positive kernel k((A - shift)/R) of the tanh commutator; PSD for R > 2/pi."""
    if r_scale <= POSITIVITY_THRESHOLD:
        raise ValueError(
            f"kernel positivity needs R > 2/pi ~ {POSITIVITY_THRESHOLD:.4f}, got R={r_scale}"
        )
    dec = eigendecompose(a_op)
    return apply_function(
        dec, lambda a: tanh_kernel_curve(a - shift, r_scale), f"k((A-{shift})/{r_scale})"
    )


def smooth_projection(
    op: HermitianOperator, threshold: float, direction: str, width: float
) -> HermitianOperator:
    """tanh-profile smoothed spectral projection of op.

    direction="above": eigenvalues well above the threshold map to ~1;
    direction="below": well below map to ~1.  Values land in [0, 1] and the
    above/below pair at the same threshold sums exactly to the identity.
    """
    if not (width > 0):
        raise ValueError(f"projection width must be positive, got {width}")
    if direction not in ("above", "below"):
        raise ValueError(f"direction must be 'above' or 'below', got '{direction}'")
    sign = 1.0 if direction == "above" else -1.0
    dec = eigendecompose(op)
    return apply_function(
        dec,
        lambda lam: 0.5 * (1.0 + np.tanh(sign * (lam - threshold) / width)),
        f"F({op.label} {direction} {threshold})",
    )


def outgoing_projection(
    a_op: HermitianOperator, m_threshold: float, r_scale: float
) -> HermitianOperator:
    """Smoothed projection onto outgoing waves, (tanh((A-M)/R) + 1)/2."""
    return smooth_projection(a_op, m_threshold, "above", r_scale)


def incoming_projection(
    a_op: HermitianOperator, m_threshold: float, r_scale: float
) -> HermitianOperator:
    """Smoothed projection onto incoming waves, (1 - tanh((A+M)/R))/2."""
    return smooth_projection(a_op, -m_threshold, "below", r_scale)


def parity_conjugate(op: HermitianOperator) -> HermitianOperator:
    """Index reversal combined with complex conjugation: Pi conj(M) Pi.

    On a symmetric grid this sends A to -A, and any odd spectral function of A
    to its negative, exactly at matrix level.
    """
    return hermitian(op.grid, op.matrix[::-1, ::-1].conj(), f"parity({op.label})")
