"""Numerical monodromy of ``xi' = (1/t) A xi (+ g(t))`` around ``t = 0``.

The fundamental matrix is integrated around a circle with the same adaptive
integrator used for the flows.  For this exactly Fuchsian system the
monodromy is ``exp(2 pi i A)``, which serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .dynamics import TimePath, integrate_field
from .errors import PreconditionError
from .frobenius import FrobeniusSystem, frobenius_solve

EIG_CLUSTER = 1e-4
RANK_RTOL = 1e-7


@dataclass(frozen=True, eq=False)
class MonodromyReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    semisimple: bool
    unipotent_defect: int
    log_detected: bool
    radius: float = 1.0

    def to_json(self) -> dict:
        return {
            "matrix": [list(row) for row in self.matrix],
            "eigenvalues": list(self.eigenvalues),
            "semisimple": self.semisimple,
            "unipotent_defect": self.unipotent_defect,
            "log_detected": self.log_detected,
            "radius": self.radius,
        }


def exp_oracle(A, turns: int = 1) -> np.ndarray:
    """``exp(2 pi i turns A)`` by scaling and squaring (scipy's Pade-13 expm)."""
    return expm(2j * math.pi * turns * np.asarray(A, dtype=complex))


def eigen_defect(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    """Eigenvalues and ``n`` minus the number of independent eigenvectors.

    Eigenvalues are clustered first because a defective matrix perturbed by
    integration noise splits its eigenvalue by roughly the square root of
    the noise.
    """
    n = matrix.shape[0]
    ev = np.linalg.eigvals(matrix)
    norm = max(np.linalg.norm(matrix, 2), 1.0)
    clusters: list[list[complex]] = []
    for v in ev:
        for cl in clusters:
            if abs(v - np.mean(cl)) <= EIG_CLUSTER * max(1.0, abs(v)):
                cl.append(v)
                break
        else:
            clusters.append([v])
    geometric = 0
    for cl in clusters:
        lam = np.mean(cl)
        sv = np.linalg.svd(matrix - lam * np.eye(n), compute_uv=False)
        geometric += min(len(cl), int(np.sum(sv <= RANK_RTOL * norm)))
    return ev, n - geometric


def _loop(rhs, xi0, radius, tol, turns=1):
    if radius <= 0:
        raise PreconditionError("radius must be positive")
    return integrate_field(rhs, xi0, TimePath.circle(radius, turns=turns), tol).final


def linear_monodromy(A, radius: float = 1.0, tol: float = 1e-12, turns: int = 1) -> MonodromyReport:
    """Monodromy of the homogeneous system, normalized by ``Xi(r) = I``."""
    A = np.asarray(A.A if isinstance(A, FrobeniusSystem) else A, dtype=complex)
    n = A.shape[0]

    def rhs(t, x):
        return (A @ x.reshape(n, n)).reshape(-1) / t

    end = _loop(rhs, np.eye(n, dtype=complex).reshape(-1), radius, tol, turns).reshape(n, n)
    ev, defect = eigen_defect(end)
    return MonodromyReport(end, ev, defect == 0, defect, defect > 0, radius)


@dataclass(frozen=True, eq=False)
class AffineMonodromyReport:
    homogeneous: MonodromyReport
    start: np.ndarray
    particular_shift: np.ndarray
    predicted_shift: np.ndarray
    shift_in_log_direction: bool
    k_shift: np.ndarray | None = field(default=None)

    def to_json(self) -> dict:
        out = {
            "homogeneous": self.homogeneous.to_json(),
            "start": list(self.start),
            "particular_shift": list(self.particular_shift),
            "predicted_shift": list(self.predicted_shift),
            "shift_in_log_direction": self.shift_in_log_direction,
        }
        if self.k_shift is not None:
            out["k_shift"] = list(self.k_shift)
        return out


def affine_monodromy(sys: FrobeniusSystem, radius: float = 1.0, tol: float = 1e-12, basis=None,
                     particular=None) -> AffineMonodromyReport:
    """Loop the forced system once around ``t = 0`` from the series particular solution.

    A nonzero shift certifies that the particular solution is not single
    valued.  ``shift_in_log_direction`` is set when the shift is nonzero
    and equals the jump predicted by the ``ln t`` terms of the series.
    With ``basis`` given the shift is also expressed in the coordinates
    ``k_i`` of ``sum_i k_i t^(s_i) v_i`` at ``t = r``.
    """
    xi_p = particular if particular is not None else frobenius_solve(sys)
    r = float(radius)
    start = np.array([c.evaluate(r) for c in xi_p], dtype=complex)
    end = _loop(sys.rhs, start, r, tol)
    shift = end - start
    predicted = np.array([c.log_shift(r) for c in xi_p], dtype=complex)
    scale = max(np.linalg.norm(predicted), 1e-300)
    in_log = bool(np.linalg.norm(predicted) > 0 and np.linalg.norm(shift - predicted) <= 1e-5 * scale)
    k_shift = None
    if basis is not None:
        V = np.column_stack([r**s * vec for s, vec in basis])
        k_shift = np.linalg.solve(V, shift)
    return AffineMonodromyReport(linear_monodromy(sys.A, r, tol), start, shift, predicted, in_log, k_shift)
