"""Least-squares fits of overlap data to the finite-size scaling forms

    -log <B|k>_N           = a0 N + a1 log N + a2 + a3/N + a4/N^2
    -log(<B|k>_N/<B|0>_N)  =               a2 + a3/N + a4/N^2 + a5/N^3

Solved by orthogonal factorization (SVD least squares), never normal
equations: with N up to 500 the design columns span several orders of
magnitude.  Uncertainties are the max deviation of each coefficient over a
family of fit windows obtained by increasing the number of dropped initial
points; they are window spreads, not statistical error bars.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TERMS = ("N", "logN", "1", "1/N", "1/N^2", "1/N^3")

ABSOLUTE_BASIS = ("N", "logN", "1", "1/N", "1/N^2")
RATIO_BASIS = ("1", "1/N", "1/N^2", "1/N^3")


class FitError(ValueError):
    pass


def _design_column(term: str, n: np.ndarray) -> np.ndarray:
    if term == "N":
        return n
    if term == "logN":
        return np.log(n)
    if term == "1":
        return np.ones_like(n)
    if term == "1/N":
        return 1.0 / n
    if term == "1/N^2":
        return 1.0 / n ** 2
    if term == "1/N^3":
        return 1.0 / n ** 3
    raise FitError(f"unknown basis term {term!r}")


@dataclass
class FitResult:
    basis: tuple
    coefficients: dict
    residual_norm: float
    window_spread: dict = field(default_factory=dict)
    points_used: int = 0

    def coefficient(self, term: str) -> float:
        return self.coefficients[term]

    def to_json(self):
        return {"basis": list(self.basis),
                "coefficients": self.coefficients,
                "residual_norm": self.residual_norm,
                "window_spread": self.window_spread,
                "points_used": self.points_used}


def _solve(ns: np.ndarray, ys: np.ndarray, basis) -> tuple[dict, float]:
    a = np.column_stack([_design_column(t, ns) for t in basis])
    coef, _, rank, _ = np.linalg.lstsq(a, ys, rcond=None)
    if rank < len(basis):
        raise FitError(f"design matrix rank {rank} < {len(basis)} terms on these N")
    resid = ys - a @ coef
    return dict(zip(basis, coef.tolist())), float(np.linalg.norm(resid))


def fit(data, basis, drop_first: int = 0, n_windows: int = 4) -> FitResult:
    """Least-squares fit of (N, y) pairs after dropping `drop_first` points.

    `basis` is a sequence drawn from {N, logN, 1, 1/N, 1/N^2, 1/N^3} with at
    least two terms.  The window family drops 0..n_windows-1 further points;
    spreads are max |coefficient - central|.
    """
    basis = tuple(basis)
    if len(basis) < 2:
        raise FitError("need at least two basis terms")
    pts = sorted((float(n), float(y)) for n, y in data)
    pts = pts[drop_first:]
    if len(pts) <= len(basis):
        raise FitError(f"{len(pts)} points after dropping is too few for {len(basis)} terms")
    ns = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    central, resid = _solve(ns, ys, basis)
    spread = {t: 0.0 for t in basis}
    for extra in range(1, n_windows):
        if len(pts) - extra <= len(basis):
            break
        sub, _ = _solve(ns[extra:], ys[extra:], basis)
        for t in basis:
            spread[t] = max(spread[t], abs(sub[t] - central[t]))
    return FitResult(basis=basis, coefficients=central, residual_norm=resid,
                     window_spread=spread, points_used=len(pts))


def extract_overlap(result: FitResult) -> float:
    """exp(-a2): the scaling-limit overlap from a ratio fit.

    Applied to the absolute ground-state fit this gives the lattice
    proportionality constant alpha instead, since the ground-state overlap
    is 1 in the continuum normalization."""
    return float(np.exp(-result.coefficient("1")))
