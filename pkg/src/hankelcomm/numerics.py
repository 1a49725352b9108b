"""Precision-aware scalar arithmetic, asymptotic fitting and limit extrapolation.

Everything downstream (family evaluators, commutator residuals, obstruction
determinants) funnels its arithmetic through a :class:`PrecisionContext`.
Three modes are supported:

* ``binary64`` -- plain machine floats,
* ``software`` -- mpmath floats with a configurable number of decimal digits
  (default 60; the obstruction determinants cancel ~10 leading digits around
  m = 100, so binary64 is useless there),
* ``rational`` -- exact :class:`fractions.Fraction` arithmetic, accepted only
  by operations whose inputs are provably rational.
"""

from __future__ import annotations

import math
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mp

from .errors import DegenerateFitError, PrecisionError

__all__ = [
    "PrecisionContext",
    "AsymptoticFit",
    "LimitEstimate",
    "fit_asymptotic",
    "limit_estimate",
    "geometric_grid",
]

_MODES = ("binary64", "software", "rational")


@dataclass(frozen=True)
class PrecisionContext:
    """Arithmetic mode plus the tolerance used for 'is this zero' decisions.

    ``digits`` is only meaningful in ``software`` mode and must be >= 30
    there; the default of 60 decimal digits is chosen so that determinant
    cancellations of ten orders of magnitude still leave ~50 good digits.
    """

    mode: str = "software"
    digits: int = 60
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.mode not in _MODES:
            raise PrecisionError(f"unknown precision mode {self.mode!r}; expected one of {_MODES}")
        if self.mode == "software" and self.digits < 30:
            raise PrecisionError("software-float mode requires at least 30 decimal digits")
        if self.tolerance < 0:
            raise PrecisionError("tolerance must be nonnegative")

    @contextmanager
    def active(self):
        """Context manager installing this precision for mpmath arithmetic."""
        if self.mode == "software":
            with mp.workdps(self.digits):
                yield
        else:
            with nullcontext():
                yield

    # -- scalar constructors -------------------------------------------------

    def real(self, x):
        if self.mode == "software":
            with mp.workdps(self.digits):
                return mp.mpf(x) if not isinstance(x, Fraction) else mp.mpf(x.numerator) / x.denominator
        if self.mode == "binary64":
            return float(x)
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        if isinstance(x, float):
            return Fraction(x)  # exact binary value; caller supplies exact inputs
        raise PrecisionError(f"cannot coerce {type(x).__name__} to an exact rational")

    def complex(self, x):
        if self.mode == "software":
            with mp.workdps(self.digits):
                return mp.mpc(x)
        if self.mode == "binary64":
            return complex(x)
        raise PrecisionError("complex scalars are not representable in exact-rational mode")

    def sqrt(self, x):
        if self.mode == "software":
            return mpmath.sqrt(x)
        if self.mode == "binary64":
            if isinstance(x, complex):
                return complex(x) ** 0.5
            return math.sqrt(x) if x >= 0 else complex(x) ** 0.5
        raise PrecisionError("square roots are not available in exact-rational mode")

    def reject_rational(self, operation: str):
        if self.mode == "rational":
            raise PrecisionError(f"{operation} does not accept exact-rational inputs")

    @property
    def eps(self) -> float:
        """Unit roundoff of the active mode (1 for rational, which is exact)."""
        if self.mode == "software":
            return 10.0 ** (1 - self.digits)
        if self.mode == "binary64":
            return 2.0**-52
        return 0.0


DEFAULT_CONTEXT = PrecisionContext()


def geometric_grid(n_min, n_max, count: int):
    """``count`` points spanning [n_min, n_max] with constant ratio."""
    if not (n_max > n_min >= 1):
        raise ValueError("need n_max > n_min >= 1")
    if count < 2:
        raise ValueError("need at least two grid points")
    ratio = (float(n_max) / float(n_min)) ** (1.0 / (count - 1))
    return [float(n_min) * ratio**k for k in range(count)]


@dataclass
class AsymptoticFit:
    """Least-squares expansion f(n) ~ sum_i coefficients[i] * n**powers[i].

    ``residual_norm`` is the maximum relative deviation over the sample grid.
    """

    powers: list
    coefficients: list
    residual_norm: float
    sample_points: list = field(default_factory=list)

    def coefficient(self, power):
        return self.coefficients[self.powers.index(power)]

    def __call__(self, n):
        return sum(c * n**p for c, p in zip(self.coefficients, self.powers))


def fit_asymptotic(
    f: Callable,
    powers: Sequence,
    n_min,
    n_max,
    count: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
) -> AsymptoticFit:
    """Fit f(n) against the monomials n**p over a geometric grid.

    The grid is geometric so that several decades of 1/n behaviour are seen
    by the fit. Raises :class:`DegenerateFitError` when the design matrix is
    rank deficient (grid too small for the requested powers).
    """
    ctx.reject_rational("fit_asymptotic")
    powers = list(powers)
    if count < len(powers) + 2:
        raise ValueError("count must be at least len(powers) + 2")
    grid = geometric_grid(n_min, n_max, count)

    with ctx.active():
        if ctx.mode == "software":
            points = [mp.mpf(g) for g in grid]
            values = [mp.mpf(f(g)) for g in points]
            # Column scaling keeps the QR factorization well conditioned even
            # when the powers span n^2 .. n^-4 over several decades.
            scales = [max(abs(g**p) for g in points) for p in powers]
            A = mp.matrix(count, len(powers))
            for i, g in enumerate(points):
                for j, p in enumerate(powers):
                    A[i, j] = g**p / scales[j]
            b = mp.matrix(values)
            try:
                x, _ = mp.qr_solve(A, b)
            except (ZeroDivisionError, ValueError) as exc:
                raise DegenerateFitError(str(exc)) from exc
            coeffs = [x[j] / scales[j] for j in range(len(powers))]
        else:
            import numpy as np

            points = grid
            values = [float(f(g)) for g in grid]
            A = np.array([[g**p for p in powers] for g in grid], dtype=float)
            scales = np.max(np.abs(A), axis=0)
            sol, _, rank, _ = np.linalg.lstsq(A / scales, np.array(values), rcond=None)
            if rank < len(powers):
                raise DegenerateFitError("rank-deficient fit system")
            coeffs = list(sol / scales)

        fit = AsymptoticFit(powers=powers, coefficients=coeffs, sample_points=list(points), residual_norm=0.0)
        rel = 0.0
        for g, v in zip(points, values):
            scale = max(abs(v), abs(g) ** max(powers) * ctx.eps, ctx.eps)
            rel = max(rel, float(abs(fit(g) - v) / scale))
        fit.residual_norm = rel
    return fit


@dataclass
class LimitEstimate:
    """Richardson-extrapolated limit with a crude internal error estimate.

    ``converged`` is False when the last two extrapolation stages still
    disagree beyond the context tolerance; the value is reported regardless.
    """

    value: object
    error: float
    converged: bool

    def __float__(self):
        return float(self.value)


def limit_estimate(
    f: Callable,
    scale_power: int = 0,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    n0: float = 64.0,
    ratio: float = 2.0,
    levels: int = 14,
    power_step: float = 1.0,
) -> LimitEstimate:
    """Estimate lim_{n->inf} f(n) / n**scale_power by Richardson extrapolation.

    Samples on the geometric grid n0 * ratio**k and eliminates correction
    terms n**(-j*power_step), j = 1, 2, ...; ``power_step=0.5`` handles
    sequences with half-integer asymptotic expansions (square-root
    recurrence coefficients).
    """
    ctx.reject_rational("limit_estimate")
    with ctx.active():
        samples = []
        for k in range(levels):
            n = ctx.real(n0) * ctx.real(ratio) ** k
            samples.append(f(n) / n**scale_power)
        # Neville/Richardson table; diag[j] is the best estimate using j
        # eliminated correction orders.
        table = list(samples)
        diag = [table[-1]]
        for j in range(1, levels):
            factor = ctx.real(ratio) ** (j * power_step)
            table = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
            diag.append(table[-1])
        value = diag[-1]
        err = float(abs(diag[-1] - diag[-2]))
        scale = max(1.0, float(abs(value)))
        converged = err <= ctx.tolerance * scale
    return LimitEstimate(value=value, error=err, converged=converged)
