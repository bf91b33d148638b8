"""FTRL play distribution for the hybrid Tsallis / negentropy potential.

The potential is separable, ``F(x) = sum_i f(x_i)`` with

    f(x) = -2 * weight * sqrt(x) + inv_eta * x * log(x)

so the constrained minimiser of ``<x, L> + F(x)`` over the simplex satisfies
``f'(x_i) = c - L_i`` for one scalar multiplier ``c``.  We invert ``f'`` per
coordinate (safeguarded Newton in log space) and root-find ``c`` so that the
coordinates sum to one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

__all__ = [
    "PotentialParams",
    "SimplexDistribution",
    "KktCertificate",
    "SolverError",
    "potential_derivative",
    "invert_derivative",
    "solve_distribution",
    "objective_value",
    "grid_oracle",
    "INNER_TOL",
    "NORM_TOL",
    "KKT_TOL",
]

# Fixed on purpose: the acceptance tests are written against these.
INNER_TOL = 1e-12
NORM_TOL = 1e-10
KKT_TOL = 1e-8

_MAX_INNER = 200
_MAX_OUTER = 200
_EPS = np.finfo(float).eps


class SolverError(RuntimeError):
    """Raised when an iteration cap is hit. Indicates a bug or non-finite input."""


@dataclass(frozen=True)
class PotentialParams:
    """Coefficients of the per-coordinate potential.

    ``weight`` multiplies the 1/2-Tsallis part (it is ``sqrt(t)`` in round
    ``t``) and ``inv_eta`` multiplies the negative entropy.
    """

    weight: float
    inv_eta: float

    def __post_init__(self):
        for name in ("weight", "inv_eta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")

    @classmethod
    def at_round(cls, t: int, inv_eta: float) -> "PotentialParams":
        if t < 1:
            raise ValueError("rounds are 1-indexed")
        return cls(math.sqrt(t), float(inv_eta))

    def _require_nondegenerate(self):
        if self.weight == 0 and self.inv_eta == 0:
            raise ValueError("weight and inv_eta cannot both be zero")


@dataclass(frozen=True)
class SimplexDistribution:
    """A probability vector over ``k`` arms.

    Mesh points returned by :func:`grid_oracle` may contain zeros; the
    solver itself only ever returns strictly positive vectors.
    """

    probs: np.ndarray

    @classmethod
    def _trusted(cls, probs: np.ndarray) -> "SimplexDistribution":
        # solver output is already checked; skip the numpy validation
        obj = object.__new__(cls)
        probs.setflags(write=False)
        object.__setattr__(obj, "probs", probs)
        return obj

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probs must be a non-empty vector")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("probs must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probs sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def k(self) -> int:
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class KktCertificate:
    multiplier: float
    max_residual: float


def potential_derivative(x, p: PotentialParams):
    """f'(x) = -weight / sqrt(x) + inv_eta * (log(x) + 1). Accepts scalars or arrays."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ValueError("potential_derivative is only defined for x > 0")
    out = -p.weight / np.sqrt(xa) + p.inv_eta * (np.log(xa) + 1.0)
    return float(out) if np.ndim(out) == 0 else out


def _fprime(x, w, e):
    return -w / math.sqrt(x) + e * (math.log(x) + 1.0)


def _log_bracket(y, w, e):
    # h(u) = f'(e^u) - y is increasing and concave in u; returns (lo, hi)
    # with h(lo) <= 0 <= h(hi).  Requires w > 0 and e > 0.
    lo = y / e - 1.0
    if y < 0:
        lo = max(lo, min(2.0 * math.log(w / -y), -1.0))
        hi = max(2.0 * math.log(2.0 * w / -y), y / (2.0 * e) - 1.0)
    else:
        hi = max(0.0, (y + w) / e - 1.0)
    return lo, hi


def _invert_log(y, w, e, u0=None):
    """log of f'^{-1}(y) for w > 0, e > 0."""
    if u0 is None:
        lo, hi = _log_bracket(y, w, e)
        u = 2.0 * math.log(w / -y) if y < 0 else lo
        u = min(max(u, lo), hi)
    else:
        # the closed-form bracket is only computed if Newton leaves the known interval
        lo, hi, u = -math.inf, math.inf, u0
    tol = INNER_TOL * max(1.0, abs(y))
    for _ in range(_MAX_INNER):
        s = w * math.exp(-0.5 * u)
        h = -s + e * (u + 1.0) - y
        if abs(h) <= tol:
            return u
        if h < 0:
            lo = u
        else:
            hi = u
        un = u - h / (0.5 * s + e)
        if not lo < un < hi:
            if math.isinf(lo) or math.isinf(hi):
                blo, bhi = _log_bracket(y, w, e)
                lo, hi = max(lo, blo), min(hi, bhi)
            un = un if lo < un < hi else 0.5 * (lo + hi)
        if abs(un - u) <= 4.0 * _EPS * max(1.0, abs(u)):
            return un
        u = un
    raise SolverError(f"derivative inversion did not converge for y={y!r}")


def invert_derivative(y: float, p: PotentialParams) -> float:
    """Return the x > 0 with f'(x) = y."""
    p._require_nondegenerate()
    y = float(y)
    if not math.isfinite(y):
        raise ValueError("y must be finite")
    w, e = p.weight, p.inv_eta
    if e == 0 and y >= 0:
        raise ValueError("pure Tsallis derivative only takes negative values")
    try:
        if e == 0:
            return (w / -y) ** 2
        if w == 0:
            return math.exp(y / e - 1.0)
        return math.exp(_invert_log(y, w, e))
    except (OverflowError, ValueError) as exc:
        raise ValueError(f"f'^-1({y!r}) is not representable for {p}") from exc


def _coordinate(y, w, e, u0):
    """Returns (x, dx/dy, log x, dlogx/dy), dispatching on the degenerate cases."""
    if e == 0:
        x = (w / -y) ** 2
        return x, 2.0 * x / -y, None, None
    if w == 0:
        x = math.exp(y / e - 1.0)
        return x, x / e, None, None
    u = _invert_log(y, w, e, u0)
    x = math.exp(u)
    dudy = 1.0 / (0.5 * w * math.exp(-0.5 * u) + e)
    return x, x * dudy, u, dudy


def solve_distribution(L, p: PotentialParams, c_hint: float | None = None):
    """Minimise ``<x, L> + F(x)`` over the probability simplex.

    Parameters
    ----------
    L : array_like, shape (k,)
        Cumulative (estimated) losses, k >= 2.
    p : PotentialParams
    c_hint : float, optional
        Warm start for the multiplier, e.g. the previous round's value.

    Returns
    -------
    (SimplexDistribution, KktCertificate)
    """
    p._require_nondegenerate()
    L = np.asarray(L, dtype=float)
    if L.ndim != 1 or L.size < 2:
        raise ValueError("need a loss vector with at least two arms")
    Lraw = L.tolist()
    if not all(map(math.isfinite, Lraw)):
        raise ValueError("losses must be finite")
    k = len(Lraw)
    w, e = p.weight, p.inv_eta

    shift = min(Lraw)
    Ls = [li - shift for li in Lraw]

    # With min(Ls) = 0: c = f'(1/k) gives every x_i <= 1/k, c = f'(1) gives x_argmin = 1.
    c_lo = _fprime(1.0 / k, w, e)
    c_hi = _fprime(1.0, w, e)
    c = c_lo
    if c_hint is not None and math.isfinite(c_hint):
        c = min(max(c_hint - shift, c_lo), c_hi)

    us = [None] * k
    dus = [None] * k
    xs = [0.0] * k
    c_prev = c
    for _ in range(_MAX_OUTER):
        total = 0.0
        slope = 0.0
        for i in range(k):
            # first-order prediction of log x_i at the new multiplier
            u0 = None if us[i] is None else us[i] + (c - c_prev) * dus[i]
            x, dx, us[i], dus[i] = _coordinate(c - Ls[i], w, e, u0)
            xs[i] = x
            total += x
            slope += dx
        g = total - 1.0
        if abs(g) <= 1e-3 * NORM_TOL:
            break
        if g < 0:
            c_lo = c
        else:
            c_hi = c
        cn = c - g / slope
        if not c_lo < cn < c_hi:
            cn = 0.5 * (c_lo + c_hi)
        if cn == c or abs(cn - c) <= 4.0 * _EPS * max(1.0, abs(c)):
            break
        c_prev, c = c, cn
    else:
        raise SolverError("normalisation root-find did not converge")

    if abs(math.fsum(xs) - 1.0) > NORM_TOL or min(xs) <= 0:
        raise SolverError(f"solution not normalised: sum={math.fsum(xs)!r}")
    multiplier = c + shift
    residual = max(abs(_fprime(xi, w, e) + li - multiplier) for xi, li in zip(xs, Lraw))
    if residual > KKT_TOL * max(1.0, abs(multiplier)):
        raise SolverError(f"KKT residual {residual!r} above tolerance")
    return SimplexDistribution._trusted(np.array(xs)), KktCertificate(multiplier, residual)


def _objective_rows(X, L, p):
    return X @ L - 2.0 * p.weight * np.sqrt(X).sum(axis=-1) + p.inv_eta * xlogy(X, X).sum(axis=-1)


def objective_value(x, L, p: PotentialParams) -> float:
    """``<x, L> - 2 weight sum sqrt(x_i) + inv_eta sum x_i log x_i`` (0 log 0 = 0)."""
    probs = x.probs if isinstance(x, SimplexDistribution) else np.asarray(x, dtype=float)
    L = np.asarray(L, dtype=float)
    if probs.shape != L.shape:
        raise ValueError(f"dimension mismatch: {probs.shape} vs {L.shape}")
    return float(_objective_rows(probs, L, p))


def grid_oracle(L, p: PotentialParams, resolution: float) -> SimplexDistribution:
    """Brute-force minimiser of :func:`objective_value` on the mesh with spacing ``resolution``.

    Only for testing the solver.  ``k = 2`` scans the full mesh; ``k = 3``
    scans a coarse sub-lattice and then zooms in by factors of ten, so every
    candidate is still a point of the requested mesh.
    """
    L = np.asarray(L, dtype=float)
    k = L.size
    if k not in (2, 3):
        raise ValueError("grid_oracle supports k in {2, 3} only")
    if not 0 < resolution <= 1e-3:
        raise ValueError("resolution must be in (0, 1e-3]")
    N = int(round(1.0 / resolution))
    if abs(N * resolution - 1.0) > 1e-9:
        raise ValueError("1 / resolution must be an integer")

    if k == 2:
        a = np.arange(N + 1, dtype=float) / N
        X = np.stack([a, 1.0 - a], axis=1)
        best = X[np.argmin(_objective_rows(X, L, p))]
        return SimplexDistribution(best)

    stride = 1
    while N // (stride * 10) >= 200:
        stride *= 10
    i_lo, i_hi, j_lo, j_hi = 0, N, 0, N
    while True:
        i = np.arange(i_lo, i_hi + 1, stride)
        j = np.arange(j_lo, j_hi + 1, stride)
        I, J = np.meshgrid(i, j, indexing="ij")
        mask = I + J <= N
        I, J = I[mask], J[mask]
        X = np.stack([I, J, N - I - J], axis=1) / N
        m = int(np.argmin(_objective_rows(X, L, p)))
        bi, bj = int(I[m]), int(J[m])
        if stride == 1:
            break
        span = 10 * stride
        i_lo, i_hi = max(0, bi - span), min(N, bi + span)
        j_lo, j_hi = max(0, bj - span), min(N, bj + span)
        stride //= 10
    return SimplexDistribution(np.array([bi, bj, N - bi - bj], dtype=float) / N)
