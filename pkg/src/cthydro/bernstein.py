r"""Bernstein polynomial machinery for piecewise time functions.

A time function on the horizon is stored per interval as a vector of
Bernstein coefficients on the scaled time :math:`\tau \in [0, 1]`.  Degree 3
is the working basis; degree 4 appears for integrated quantities (reservoir
volume) and degree 2 for derivatives.

The three constant matrices used by the model builders are exposed as
module attributes:

``W``
    4x4 change of basis from cubic Bernstein to cubic Hermite,
    ``H(t) = W @ B3(t)``.
``N``
    4x5 integration matrix, ``integral_0^t B3(s) ds = N @ B4(t)``.
``K``
    4x3 differentiation matrix, ``d/dt B3(t) = K @ B2(t)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_DEGREES = (2, 3, 4)

W = np.array(
    [
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 1.0 / 3.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, -1.0 / 3.0, 0.0],
    ]
)
# (W^-1)^T maps Bernstein coefficients to [x0, dx0/dtau, x1, dx1/dtau]
HERMITE_FROM_BERNSTEIN = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [-3.0, 3.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -3.0, 3.0],
    ]
)
BERNSTEIN_FROM_HERMITE = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0 / 3.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0 / 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
N = 0.25 * np.array(
    [
        [0.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ]
)
K = 3.0 * np.array(
    [
        [-1.0, 0.0, 0.0],
        [1.0, -1.0, 0.0],
        [0.0, 1.0, -1.0],
        [0.0, 0.0, 1.0],
    ]
)


class BernsteinDomainError(ValueError):
    """Argument outside the domain of a polynomial operation."""


class FitError(ValueError):
    """Least-squares fit is underdetermined."""

    def __init__(self, message: str, interval: int | None = None):
        super().__init__(message)
        self.interval = interval


def _check_degree(degree: int) -> None:
    if degree not in SUPPORTED_DEGREES:
        raise BernsteinDomainError(f"unsupported Bernstein degree {degree}")


def _basis_matrix(degree: int, tau: np.ndarray) -> np.ndarray:
    """Rows of basis values for every entry of ``tau`` (no domain checks)."""
    tau = np.asarray(tau, dtype=float)
    i = np.arange(degree + 1)
    binom = np.array([math.comb(degree, k) for k in i], dtype=float)
    t = tau[..., None]
    return binom * t**i * (1.0 - t) ** (degree - i)


def eval_basis(degree: int, t: float) -> np.ndarray:
    """Evaluate the Bernstein basis of the given degree at ``t`` in [0, 1].

    >>> eval_basis(3, 0.5).tolist()
    [0.125, 0.375, 0.375, 0.125]
    """
    _check_degree(degree)
    if not 0.0 <= t <= 1.0:
        raise BernsteinDomainError(f"t={t} outside [0, 1]")
    return _basis_matrix(degree, np.asarray(t, dtype=float))


def elevate(coeffs: Sequence[float], degree: int) -> np.ndarray:
    """Raise a Bernstein coefficient vector to a higher degree (same polynomial)."""
    c = np.asarray(coeffs, dtype=float)
    while len(c) - 1 < degree:
        n = len(c)  # current degree + 1
        out = np.empty(n + 1)
        out[0] = c[0]
        out[-1] = c[-1]
        k = np.arange(1, n)
        out[1:-1] = (k / n) * c[k - 1] + (1.0 - k / n) * c[k]
        c = out
    return c


@dataclass(frozen=True)
class BernsteinVec:
    degree: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        _check_degree(self.degree)
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != self.degree + 1:
            raise BernsteinDomainError(
                f"degree {self.degree} needs {self.degree + 1} coefficients, "
                f"got {len(self.coeffs)}"
            )

    @classmethod
    def cubic(cls, coeffs: Iterable[float]) -> "BernsteinVec":
        return cls(3, tuple(coeffs))

    @classmethod
    def constant(cls, value: float, degree: int = 3) -> "BernsteinVec":
        return cls(degree, (float(value),) * (degree + 1))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __call__(self, tau):
        return _basis_matrix(self.degree, tau) @ self.array


def to_hermite(c: BernsteinVec | Sequence[float]) -> np.ndarray:
    """Hermite coefficients ``[x_start, x'_start, x_end, x'_end]`` of a cubic.

    Derivatives are with respect to the scaled time of the interval; divide
    by the interval length for physical rates.
    """
    return HERMITE_FROM_BERNSTEIN @ _cubic_array(c)


def from_hermite(h: Sequence[float]) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (4,):
        raise BernsteinDomainError("Hermite vector must have 4 entries")
    return BERNSTEIN_FROM_HERMITE @ h


def integrate_interval(c: BernsteinVec | Sequence[float], delta: float) -> float:
    """Exact integral of the cubic over an interval of length ``delta``."""
    if delta <= 0:
        raise BernsteinDomainError(f"interval length must be positive, got {delta}")
    return 0.25 * delta * float(np.sum(_cubic_array(c)))


def antiderivative_coeffs(c: BernsteinVec | Sequence[float]) -> BernsteinVec:
    """Degree-4 coefficients of the running integral on the scaled interval.

    ``v0 + delta * antiderivative_coeffs(c)(tau)`` is the value at scaled time
    ``tau`` of a quantity with initial value ``v0`` and rate ``c``.
    """
    return BernsteinVec(4, tuple(N.T @ _cubic_array(c)))


def derivative_coeffs(c: BernsteinVec | Sequence[float], delta: float) -> BernsteinVec:
    """Degree-2 coefficients of the time derivative over an interval of length ``delta``."""
    if delta <= 0:
        raise BernsteinDomainError(f"interval length must be positive, got {delta}")
    return BernsteinVec(2, tuple(K.T @ _cubic_array(c) / delta))


def _cubic_array(c) -> np.ndarray:
    if isinstance(c, BernsteinVec):
        if c.degree != 3:
            raise BernsteinDomainError(f"expected a cubic, got degree {c.degree}")
        return c.array
    arr = np.asarray(c, dtype=float)
    if arr.shape != (4,):
        raise BernsteinDomainError(f"expected 4 cubic coefficients, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PiecewisePoly:
    """Time function given by one Bernstein vector per horizon interval.

    At an interior knot the value is taken from the interval starting there;
    :meth:`left_limit` gives the value approached from the left.
    """

    knots: tuple[float, ...]
    intervals: tuple[BernsteinVec, ...]

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if len(knots) != len(self.intervals) + 1:
            raise BernsteinDomainError(
                f"{len(self.intervals)} intervals need {len(self.intervals) + 1} knots, "
                f"got {len(knots)}"
            )
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise BernsteinDomainError("knots must be strictly increasing")

    @classmethod
    def from_coeffs(cls, knots: Sequence[float], coeffs) -> "PiecewisePoly":
        rows = [np.asarray(r, dtype=float) for r in coeffs]
        return cls(tuple(knots), tuple(BernsteinVec(len(r) - 1, tuple(r)) for r in rows))

    @classmethod
    def constant(cls, knots: Sequence[float], values: Sequence[float] | float, degree: int = 3):
        n = len(knots) - 1
        if np.isscalar(values):
            values = [values] * n
        return cls(tuple(knots), tuple(BernsteinVec.constant(v, degree) for v in values))

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    @cached_property
    def deltas(self) -> np.ndarray:
        return np.diff(np.array(self.knots))

    @property
    def start(self) -> float:
        return self.knots[0]

    @property
    def end(self) -> float:
        return self.knots[-1]

    @property
    def max_degree(self) -> int:
        return max(iv.degree for iv in self.intervals)

    def coeff_matrix(self, degree: int | None = None) -> np.ndarray:
        """All intervals elevated to a common degree, one row per interval."""
        d = self.max_degree if degree is None else degree
        return np.vstack([elevate(iv.coeffs, d) for iv in self.intervals])

    def _locate(self, t: np.ndarray, left: bool) -> np.ndarray:
        knots = np.array(self.knots)
        if np.any(t < knots[0]) or np.any(t > knots[-1]):
            raise BernsteinDomainError(
                f"time outside horizon [{knots[0]}, {knots[-1]}]"
            )
        side = "left" if left else "right"
        idx = np.searchsorted(knots, t, side=side) - 1
        return np.clip(idx, 0, self.n_intervals - 1)

    def _eval(self, t, left: bool):
        scalar = np.isscalar(t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self._locate(t, left)
        knots = np.array(self.knots)
        tau = (t - knots[idx]) / self.deltas[idx]
        tau = np.clip(tau, 0.0, 1.0)
        out = np.empty_like(t)
        for h in np.unique(idx):
            mask = idx == h
            out[mask] = self.intervals[h](tau[mask])
        return float(out[0]) if scalar else out

    def __call__(self, t):
        return self._eval(t, left=False)

    def left_limit(self, t):
        return self._eval(t, left=True)

    def derivative(self) -> "PiecewisePoly":
        """Time derivative, one degree lower per interval."""
        rows = []
        for iv, d in zip(self.intervals, self.deltas):
            c = iv.array
            rows.append(iv.degree * np.diff(c) / d if iv.degree > 0 else np.zeros(1))
        # degree-1 results are elevated so the pieces stay inside the supported set
        rows = [elevate(r, 2) if len(r) < 3 else r for r in rows]
        return PiecewisePoly.from_coeffs(self.knots, rows)

    def integral(self) -> float:
        return float(
            sum(d * np.mean(iv.array) for iv, d in zip(self.intervals, self.deltas))
        )

    def interval_means(self) -> np.ndarray:
        return np.array([np.mean(iv.array) for iv in self.intervals])

    def _combine(self, other: "PiecewisePoly", sign: float) -> "PiecewisePoly":
        if not np.allclose(self.knots, other.knots, rtol=0, atol=1e-9):
            raise BernsteinDomainError("piecewise polynomials on different knots")
        rows = []
        for a, b in zip(self.intervals, other.intervals):
            d = max(a.degree, b.degree)
            rows.append(elevate(a.coeffs, d) + sign * elevate(b.coeffs, d))
        return PiecewisePoly.from_coeffs(self.knots, rows)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scale: float):
        return PiecewisePoly.from_coeffs(
            self.knots, [scale * iv.array for iv in self.intervals]
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def zero_poly(knots: Sequence[float], degree: int = 3) -> PiecewisePoly:
    return PiecewisePoly.constant(knots, 0.0, degree)


def _assign_intervals(times: np.ndarray, knots: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(knots, times, side="right") - 1
    return np.clip(idx, 0, len(knots) - 2)


def fit_samples(
    samples: Sequence[tuple[float, float]] | np.ndarray,
    knots: Sequence[float],
    enforce_c1: bool = True,
) -> PiecewisePoly:
    """Least-squares piecewise cubic fit of sampled data.

    Parameters
    ----------
    samples : sequence of (time, value)
        Sorted sample times in seconds and the sampled values.
    knots : sequence of float
        Strictly increasing interval boundaries covering every sample.
    enforce_c1 : bool
        Impose continuity of value and time derivative at interior knots.
        The constraints are eliminated by parametrizing each interval after
        the first by its two free trailing coefficients.

    Raises
    ------
    FitError
        If the (reduced) normal equations are rank deficient; ``interval`` is
        the first interval where the deficiency appears.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise BernsteinDomainError("samples must be (time, value) pairs")
    times, values = data[:, 0], data[:, 1]
    knots_arr = np.asarray(knots, dtype=float)
    if len(knots_arr) < 2 or np.any(np.diff(knots_arr) <= 0):
        raise BernsteinDomainError("knots must be strictly increasing")
    if np.any(np.diff(times) < 0):
        raise BernsteinDomainError("sample times must be sorted")
    if len(times) and (times[0] < knots_arr[0] or times[-1] > knots_arr[-1]):
        raise BernsteinDomainError("samples extend beyond the knots")

    n_int = len(knots_arr) - 1
    deltas = np.diff(knots_arr)
    idx = _assign_intervals(times, knots_arr)
    tau = (times - knots_arr[idx]) / deltas[idx]
    basis = _basis_matrix(3, tau)

    # design matrix over all 4*n_int coefficients
    A = np.zeros((len(times), 4 * n_int))
    for k in range(4):
        A[np.arange(len(times)), 4 * idx + k] = basis[:, k]

    if enforce_c1:
        Z = _c1_parametrization(deltas)
        widths = [4] + [2] * (n_int - 1)
    else:
        Z = np.eye(4 * n_int)
        widths = [4] * n_int
    AZ = A @ Z

    # locate the first interval whose cumulative parameters are not identified
    col_end = np.cumsum(widths)
    for h in range(n_int):
        rows = idx <= h
        sub = AZ[np.ix_(rows, np.arange(col_end[h]))]
        if not enforce_c1:
            sub = AZ[np.ix_(idx == h, np.arange(col_end[h] - 4, col_end[h]))]
            need = 4
        else:
            need = col_end[h]
        if sub.shape[0] < need or np.linalg.matrix_rank(sub) < need:
            raise FitError(
                f"interval {h}: underdetermined fit "
                f"({int(np.sum(idx == h))} samples in interval)",
                interval=h,
            )

    normal = AZ.T @ AZ
    y = np.linalg.solve(normal, AZ.T @ values)
    coeffs = (Z @ y).reshape(n_int, 4)
    return PiecewisePoly.from_coeffs(tuple(knots_arr), coeffs)


def _c1_parametrization(deltas: np.ndarray) -> np.ndarray:
    """Matrix Z with coefficients = Z @ params for C1-continuous cubics.

    Interval 0 contributes all four coefficients; interval h > 0 contributes
    its last two, the first two follow from value and slope continuity.
    """
    n_int = len(deltas)
    n_par = 4 + 2 * (n_int - 1)
    Z = np.zeros((4 * n_int, n_par))
    Z[0:4, 0:4] = np.eye(4)
    for h in range(1, n_int):
        prev = Z[4 * (h - 1) : 4 * h]
        ratio = deltas[h] / deltas[h - 1]
        Z[4 * h] = prev[3]
        Z[4 * h + 1] = prev[3] + ratio * (prev[3] - prev[2])
        col = 4 + 2 * (h - 1)
        Z[4 * h + 2, col] = 1.0
        Z[4 * h + 3, col + 1] = 1.0
    return Z


def fit_rmse(poly: PiecewisePoly, samples) -> float:
    data = np.asarray(samples, dtype=float)
    resid = poly(data[:, 0]) - data[:, 1]
    return float(np.sqrt(np.mean(resid**2)))


def read_samples_csv(path: str | Path) -> np.ndarray:
    """Read a ``time_s,value`` CSV into an (n, 2) array."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["time_s", "value"]:
            raise ValueError(f"{path}:1: expected header 'time_s,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field in {row}") from None
    data = np.array(rows, dtype=float).reshape(-1, 2)
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ValueError(f"{path}: times must be strictly increasing")
    return data


def write_samples_csv(path: str | Path, times, values) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("time_s,value\n")
        for t, v in zip(times, values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")
