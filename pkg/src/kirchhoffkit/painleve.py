"""Kowalevski-Painleve test for homogeneous quadratic fields.

A balance is a residue ``x0`` with ``x0 + f(x0) = 0``, the leading term of
``x(t) = x0 / t + ...``.  Exponents are the eigenvalues ``s`` of ``Df(x0)``
so that ``t^s v`` solves the variational equation ``xi' = (1/t) Df(x0) xi``;
the classical Kowalevski exponents are ``s + 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .frobenius import solve_layer
from .liepoisson import E3, KirchhoffModel, bilinear_field, field_jacobian, field_vector
from .series import LogLaurentSeries

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 200
DEDUP = 1e-6
RESONANCE_TOL = 1e-8
RANK_RTOL = 1e-10
MAX_ORDER = 20


@dataclass(frozen=True, eq=False)
class BalanceResult:
    residue: np.ndarray
    jacobian_spectrum: list
    free_parameter_count: int
    degenerate: bool
    residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "residue": list(self.residue),
            "jacobian_spectrum": list(self.jacobian_spectrum),
            "free_parameter_count": self.free_parameter_count,
            "degenerate": self.degenerate,
            "residual": self.residual,
        }


def _g(model, x):
    return x + field_vector(model.K, model.kind, x)


def balance_residual(model: KirchhoffModel, x0) -> float:
    x0 = np.asarray(x0, dtype=complex)
    return float(np.max(np.abs(_g(model, x0))))


def _newton(model, x):
    n = len(x)
    for _ in range(NEWTON_MAXITER):
        g = _g(model, x)
        if np.max(np.abs(g)) <= NEWTON_TOL:
            return x
        J = np.eye(n) + field_jacobian(model.K, model.kind, x)
        # minimum-norm step: balances come in families, so J is singular on them
        dx, *_ = np.linalg.lstsq(J, -g, rcond=1e-13)
        x = x + dx
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e8:
            return None
    return x if np.max(np.abs(_g(model, x))) <= NEWTON_TOL else None


def kowalevski_exponents(model: KirchhoffModel, residue) -> list[complex]:
    """Eigenvalues of ``Df(x0)``, sorted by real then imaginary part."""
    x0 = np.asarray(residue, dtype=complex)
    ev = np.linalg.eigvals(field_jacobian(model.K, model.kind, x0))
    return sorted((complex(v) for v in ev), key=lambda v: (round(v.real, 8), round(v.imag, 8)))


def family_dimension(model: KirchhoffModel, residue) -> int:
    """Dimension of the balance manifold at ``x0``: the kernel of ``I + Df(x0)``."""
    x0 = np.asarray(residue, dtype=complex)
    sv = np.linalg.svd(np.eye(len(x0)) + field_jacobian(model.K, model.kind, x0), compute_uv=False)
    return int(np.sum(sv <= RANK_RTOL * max(sv[0], 1.0)))


def _is_degenerate(model, x0) -> bool:
    scale = np.max(np.abs(x0))
    if scale <= 1e-8:
        return True
    return model.kind == E3 and abs(x0[5]) <= 1e-8 * max(1.0, scale)


def _balance(model, x0) -> BalanceResult:
    degenerate = _is_degenerate(model, x0)
    return BalanceResult(
        residue=x0,
        jacobian_spectrum=kowalevski_exponents(model, x0),
        free_parameter_count=0 if degenerate else family_dimension(model, x0),
        degenerate=degenerate,
        residual=balance_residual(model, x0),
    )


def find_balances(model: KirchhoffModel, n_starts: int = 200, seed: int = 42, radius: float = 2.0) -> list[BalanceResult]:
    """Newton multistart on ``g(x) = x + f(x)``.

    Starts are uniform in the complex ball of the given radius.  Converged
    points are sorted, then deduplicated in the max norm.  The zero residue
    is always included.
    """
    if n_starts < 100:
        raise PreconditionError("find_balances needs at least 100 starts")
    rng = np.random.default_rng(seed)
    n = model.dim
    found = [np.zeros(n, dtype=complex)]
    for _ in range(n_starts):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        r = radius * rng.uniform() ** (1 / (2 * n))
        x = _newton(model, z / np.linalg.norm(z) * r)
        if x is not None:
            found.append(x)
    found.sort(key=lambda v: tuple(np.round(np.concatenate([v.real, v.imag]), 6)))
    unique: list[np.ndarray] = []
    for x in found:
        if all(np.max(np.abs(x - u)) > DEDUP for u in unique):
            unique.append(x)
    return [_balance(model, x) for x in unique]


# ---------------------------------------------------------------------------
# formal series


@dataclass(frozen=True)
class Resonance:
    level: int
    exponent: complex
    kernel_dim: int
    compatible: bool
    log_power: int


@dataclass(frozen=True, eq=False)
class FormalSeries:
    """``x(t) = sum_k x^(k) t^(k-1)``, each coordinate a log-Laurent series."""

    components: list = field(repr=False)
    coefficients: list = field(repr=False)
    resonances: list = field(default_factory=list)
    family_dim: int = 0
    free_parameter_count: int = 0
    log_obstruction: bool = False
    order: int = 0

    def evaluate(self, t: complex) -> np.ndarray:
        return np.array([c.evaluate(t) for c in self.components], dtype=complex)


def formal_series(model: KirchhoffModel, residue, order: int = 10, free_values: dict | None = None) -> FormalSeries:
    """Psi-series continuation of a balance up to ``t^(order-1)``.

    At level ``k`` the coefficient solves ``((k-1) I - Df(x0)) x^(k) = R_k``
    with ``R_k`` the ``t^(k-2)`` part of ``f`` applied to the lower levels.
    At a resonance the free kernel directions are counted and set from
    ``free_values[k]`` (coefficients on an orthonormal kernel basis, default
    zero); an incompatible resonance raises the log power instead and sets
    ``log_obstruction``.  Degenerate balances carry no free parameters.
    """
    if order > MAX_ORDER:
        raise PreconditionError(f"order {order} exceeds {MAX_ORDER}")
    x0 = np.asarray(residue, dtype=complex)
    if balance_residual(model, x0) > 1e-10 * (1 + np.max(np.abs(x0)) ** 2):
        raise PreconditionError("residue is not a balance")
    n = model.dim
    free_values = free_values or {}
    J = field_jacobian(model.K, model.kind, x0)
    spectrum = np.linalg.eigvals(J)
    degenerate = _is_degenerate(model, x0)
    family = 0 if degenerate else family_dimension(model, x0)
    # levels[k] is a list over log power m of coefficient vectors
    levels: list[list[np.ndarray]] = [[x0]]
    resonances = []
    free_count = family
    obstruction = False
    for k in range(1, order + 1):
        R = _quadratic_level(model, levels, k)
        s = k - 1
        hits = [ev for ev in spectrum if abs(s - ev) <= RESONANCE_TOL]
        coeffs = solve_layer(J, s, R if R else [np.zeros(n, dtype=complex)], RANK_RTOL)
        if hits:
            base = s * np.eye(n) - J
            U, sv, Vh = np.linalg.svd(base)
            kernel = Vh[np.sum(sv > RANK_RTOL * max(sv[0], 1.0)):].conj().T
            top_in = max(len(R) - 1, 0)
            compatible = len(coeffs) - 1 <= top_in
            if compatible and not degenerate:
                free_count += kernel.shape[1]
                vals = np.asarray(free_values.get(k, np.zeros(kernel.shape[1])), dtype=complex)
                coeffs[0] = coeffs[0] + kernel @ vals
            else:
                obstruction = True
            resonances.append(Resonance(k, complex(hits[0]), kernel.shape[1], compatible, len(coeffs) - 1))
        levels.append(coeffs)
    comps = []
    for i in range(n):
        terms = {}
        for k, coeffs in enumerate(levels):
            for m, vec in enumerate(coeffs):
                if vec[i] != 0:
                    terms[(k - 1, m)] = complex(vec[i])
        comps.append(LogLaurentSeries(terms))
    return FormalSeries(comps, levels, resonances, family, free_count, obstruction, order)


def _poly_mul(a: list, b: list, model) -> list:
    out: dict[int, np.ndarray] = {}
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            term = bilinear_field(model, u, v)
            out[i + j] = out.get(i + j, 0) + term
    return [out[m] for m in sorted(out)] if out else []


def _quadratic_level(model, levels, k) -> list[np.ndarray]:
    """``sum_{0<i<k} F(x^(i), x^(k-i))`` as a polynomial in ``ln t``."""
    acc: dict[int, np.ndarray] = {}
    for i in range(1, k):
        for m, vec in enumerate(_poly_mul(levels[i], levels[k - i], model)):
            acc[m] = acc.get(m, 0) + vec
    if not acc:
        return []
    top = max(acc)
    return [np.asarray(acc.get(m, np.zeros(model.dim)), dtype=complex) for m in range(top + 1)]


# ---------------------------------------------------------------------------
# verdict


class Reason(str, enum.Enum):
    PASS = "Pass"
    NO_POLE_BALANCE = "NoPoleBalance"
    INSUFFICIENT_PARAMETERS = "InsufficientParameters"
    LOG_OBSTRUCTION = "LogObstruction"


@dataclass(frozen=True, eq=False)
class Verdict:
    passes_kp_test: bool
    reason: Reason
    witnesses: dict
    balances: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "passes_kp_test": self.passes_kp_test,
            "reason": self.reason.value,
            "witnesses": self.witnesses,
            "balances": [b.to_json() for b in self.balances],
        }


def verdict(model: KirchhoffModel, n_starts: int = 200, seed: int = 42, order: int = 6) -> Verdict:
    """Kowalevski-Painleve verdict.

    Fails when no nondegenerate balance exists, when none carries the full
    ``n - 1`` free parameters (family dimension plus compatible resonances,
    time shift excluded), or when any resonance forces a logarithm.
    """
    balances = find_balances(model, n_starts, seed)
    nondeg = [b for b in balances if not b.degenerate]
    if not nondeg:
        return Verdict(False, Reason.NO_POLE_BALANCE,
                       {"n_starts": n_starts, "seed": seed, "balances_found": len(balances)}, balances)
    best = None
    for b in nondeg:
        top = max(int(round(ev.real)) for ev in b.jacobian_spectrum) + 2
        fs = formal_series(model, b.residue, max(order, min(top, MAX_ORDER)))
        if fs.log_obstruction:
            bad = next(r for r in fs.resonances if not r.compatible)
            return Verdict(False, Reason.LOG_OBSTRUCTION,
                           {"residue": list(b.residue), "level": bad.level, "exponent": bad.exponent}, balances)
        if best is None or fs.free_parameter_count > best[1].free_parameter_count:
            best = (b, fs)
    b, fs = best
    wit = {
        "residue": list(b.residue),
        "free_parameter_count": fs.free_parameter_count,
        "required": model.dim - 1,
        "resonances": [{"level": r.level, "kernel_dim": r.kernel_dim, "compatible": r.compatible} for r in fs.resonances],
        "family_dim": fs.family_dim,
    }
    if fs.free_parameter_count < model.dim - 1:
        return Verdict(False, Reason.INSUFFICIENT_PARAMETERS, wit, balances)
    return Verdict(True, Reason.PASS, wit, balances)


def kirchhoff_family_residual(a1, c1, c3, residue) -> float:
    """Distance of a residue from the two-branch family ``x0(alpha, beta)`` of the unperturbed Kirchhoff case.

    ``alpha, beta`` are read off ``M1, M2``; the sign of ``p3`` picks the
    square-root branch.  The residual also includes ``|alpha^2 + beta^2 - 1|``.
    """
    from .frobenius import unperturbed_residue

    x0 = np.asarray(residue, dtype=complex)
    a1 = complex(a1)
    alpha, beta = -1j * a1 * x0[0], -1j * a1 * x0[1]
    best = np.inf
    for sign in (1, -1):
        ref = unperturbed_residue(a1, c1, c3, alpha, beta)
        ref[3:] *= sign
        best = min(best, float(np.max(np.abs(x0 - ref))))
    return max(best, float(abs(alpha**2 + beta**2 - 1)))
