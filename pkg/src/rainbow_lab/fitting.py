"""Linear least squares and the scaling ansatze used on entropy data.

Every model here is linear in its unknown coefficients once the
Luttinger parameter is fixed to 1, so a single QR solver covers the
central-charge fit, the deformed half-chain Renyi fit and the 2D
volume/log/constant fit.  No nonlinear optimizer anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .entanglement import EntropyCurve


class RankDeficientError(ValueError):
    """The design matrix has (numerically) dependent columns."""


@dataclass(frozen=True)
class FitResult:
    """Least-squares solution of a named linear model.

    chi2 is the unnormalized sum of squared residuals; covariance is the
    unscaled (X^T X)^{-1} of the design (multiply by chi2/dof for the
    usual parameter covariance estimate).
    """

    model: str
    coefficients: dict
    chi2: float
    dof: int
    covariance: np.ndarray = field(repr=False)
    condition: float = math.nan

    def __getitem__(self, name: str) -> float:
        return self.coefficients[name]

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "coeffs": self.coefficients,
                "chi2": self.chi2,
                "dof": self.dof,
                "condition": self.condition,
            }
        )


def linear_lsq(design, y, names=None, model: str = "linear") -> FitResult:
    """Minimize ||design @ beta - y||^2 by QR factorization.

    Raises RankDeficientError naming the first dependent column when the
    design is numerically rank deficient.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("design must be 2D")
    rows, cols = X.shape
    if rows < cols:
        raise ValueError(f"underdetermined: {rows} rows < {cols} columns")
    if y.shape != (rows,):
        raise ValueError(f"y has shape {y.shape}, expected ({rows},)")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    bad = np.nonzero(diag < 1e-12 * diag.max())[0]
    if bad.size:
        raise RankDeficientError(
            f"design column {int(bad[0])} is linearly dependent on the others"
        )
    beta = sla.solve_triangular(r, q.T @ y)
    resid = X @ beta - y
    chi2 = float(resid @ resid)
    names = list(names) if names is not None else [f"b{i}" for i in range(cols)]
    rinv = sla.solve_triangular(r, np.eye(cols))
    return FitResult(
        model=model,
        coefficients={n: float(b) for n, b in zip(names, beta)},
        chi2=chi2,
        dof=rows - cols,
        covariance=rinv @ rinv.T,
        condition=float(np.linalg.cond(X)),
    )


def _curve_xy(curve: EntropyCurve, order: float):
    pts = [p for p in curve.points if p.order == float(order)]
    sizes = np.asarray([p.size for p in pts], dtype=float)
    values = np.asarray([p.value for p in pts], dtype=float)
    return sizes, values


def fit_central_charge(curve: EntropyCurve, order: float = 1) -> FitResult:
    """Fit S = c (1/12)(1 + 1/n) ln(size) + c' on half-chain entropies.

    For n = 1 the prefactor reduces to the usual c/6.  The abscissa is
    whatever sizes the curve carries, so feeding deformed lengths L~
    instead of L performs the deformed fit directly.
    """
    sizes, values = _curve_xy(curve, order)
    if sizes.size < 3:
        raise ValueError(f"need at least 3 sizes, got {sizes.size}")
    pref = (1.0 + 1.0 / order) / 12.0
    design = np.column_stack([pref * np.log(sizes), np.ones_like(sizes)])
    return linear_lsq(design, values, names=("c", "cprime"), model="central-charge")


@dataclass(frozen=True)
class RenyiAnsatz:
    """Half-chain Renyi scaling basis at fixed order n (Luttinger K = 1):

        S_L = c_n/12 (1 + 1/n) ln(4L/pi) + d_n + f_n (-1)^L (8L/pi)^(-1/n)
    """

    n: float
    K: float = 1.0

    def design(self, sizes) -> np.ndarray:
        L = np.asarray(sizes, dtype=float)
        return np.column_stack(
            [
                (1.0 + 1.0 / self.n) / 12.0 * np.log(4.0 * L / np.pi),
                np.ones_like(L),
                np.cos(np.pi * L) * (8.0 * L / np.pi) ** (-self.K / self.n),
            ]
        )


def fit_renyi_halfchain(curve: EntropyCurve, n: float, z: float) -> FitResult:
    """Fit the deformed half-chain Renyi ansatz, returning c_n, d_n, f_n.

    Requires at least 6 sizes mixing even and odd L; the oscillation
    column cannot be identified from a single parity.
    """
    sizes, values = _curve_xy(curve, n)
    if sizes.size < 6:
        raise ValueError(f"need at least 6 sizes, got {sizes.size}")
    parities = {int(L) % 2 for L in sizes}
    if len(parities) < 2:
        raise RankDeficientError(
            "all sizes share one parity; the (-1)^L oscillation column is "
            "not identifiable"
        )
    ansatz = RenyiAnsatz(n=float(n))
    fit = linear_lsq(
        ansatz.design(sizes), values, names=("c_n", "d_n", "f_n"),
        model=f"renyi-halfchain(n={n:g}, z={z:g})",
    )
    return fit


def fit_2d(curve: EntropyCurve, order: float = 1) -> FitResult:
    """Fit the 2D per-length entropy s_L = A L + B ln L + C."""
    sizes, values = _curve_xy(curve, order)
    if sizes.size < 5:
        raise ValueError(f"need at least 5 sizes, got {sizes.size}")
    design = np.column_stack([sizes, np.log(sizes), np.ones_like(sizes)])
    return linear_lsq(design, values, names=("A", "B", "C"), model="entropy-2d")


# Sizes used to pin the oscillation amplitudes empirically at z = 0.
_FN_SIZES = (40, 41, 60, 61, 80, 81, 100, 101, 140, 141)


def fn_constants(n: int, sizes=_FN_SIZES) -> float:
    """Oscillation amplitude f_n of the uniform half-chain entropies.

    f_1 = -1 is exact.  For n >= 2 the closed form is not available
    here, so the amplitude is pinned by fitting exact uniform-chain data
    at z = 0; it serves as the reference point for the f_n(z) decay law.
    """
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    if n == 1:
        return -1.0
    from .entanglement import entropy_scan
    from .lattice import uniform_profile

    points = []
    for L in sizes:
        # the half block of a 2L-site chain has exactly L sites, so the
        # point's size field is already the half-chain length
        points.extend(entropy_scan(uniform_profile(L), "half", [n]).points)
    fit = fit_renyi_halfchain(EntropyCurve(points=points), n=n, z=0.0)
    return fit["f_n"]
