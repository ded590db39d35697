"""Regular-singular linear systems ``xi' = (1/t) A xi + g(t)`` solved in log-Laurent series.

The particular solution is found layer by layer: for a forcing term at
``t^(s-1)`` the coefficients ``c[s, m]`` satisfy
``(s I - A) c[s, m] + (m + 1) c[s, m + 1] = g[s - 1, m]``.  When ``s`` is a
resonance and the right side leaves the range of ``s I - A``, the top log
power is raised until the block system becomes consistent.  This replaces
variation of constants by linear algebra and is where ``ln t`` appears.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TimePath, integrate_field
from .errors import PreconditionError, SeriesError
from .liepoisson import E3, KirchhoffModel, build_model, field_jacobian, field_vector
from .series import LogLaurentSeries, series_antideriv, series_diff, series_mul

__all__ = [
    "FrobeniusSystem",
    "LogLaurentSeries",
    "PerturbationReport",
    "frobenius_solve",
    "fundamental_basis",
    "perturbation_first_order",
    "series_antideriv",
    "series_diff",
    "series_mul",
    "solve_layer",
    "unperturbed_residue",
]

# (M1, M2, p1, p2, p3): the state without M3, which is constant at first order
REDUCED = (0, 1, 3, 4, 5)
MAX_LOG = 10


@dataclass(frozen=True, eq=False)
class FrobeniusSystem:
    A: np.ndarray
    forcing: tuple = ()

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise PreconditionError("A must be square")
        forcing = tuple(self.forcing) or tuple(LogLaurentSeries() for _ in range(A.shape[0]))
        if len(forcing) != A.shape[0]:
            raise PreconditionError(f"forcing has {len(forcing)} components, A is {A.shape[0]}x{A.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "forcing", tuple(LogLaurentSeries(f.terms) for f in forcing))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def homogeneous(self) -> "FrobeniusSystem":
        return FrobeniusSystem(self.A)

    def rhs(self, t: complex, xi: np.ndarray) -> np.ndarray:
        g = np.array([f.evaluate(t) for f in self.forcing], dtype=complex)
        return (self.A @ xi) / t + g

    def apply(self, xi) -> list[LogLaurentSeries]:
        """``(1/t) A xi`` for a vector of series."""
        out = []
        for i in range(self.n):
            acc = LogLaurentSeries()
            for j in range(self.n):
                if self.A[i, j] != 0:
                    acc = acc + xi[j] * complex(self.A[i, j])
            out.append(series_mul(acc, LogLaurentSeries.monomial(1, -1)))
        return out

    def residual(self, xi) -> list[LogLaurentSeries]:
        rhs = self.apply(xi)
        return [series_diff(x) - r - g for x, r, g in zip(xi, rhs, self.forcing)]


def _layers(forcing, n):
    layers: dict[int, dict[int, np.ndarray]] = {}
    for i, comp in enumerate(forcing):
        for (e, m), c in comp.terms.items():
            by_m = layers.setdefault(e, {})
            by_m.setdefault(m, np.zeros(n, dtype=complex))[i] += c
    return layers


def solve_layer(A, s: int, g: list, rtol: float = 1e-10, max_log: int = MAX_LOG) -> list[np.ndarray]:
    """Coefficients ``c[0..K]`` of ``t^s ln^m t`` for forcing ``g[m]`` at ``t^(s-1) ln^m t``.

    Starts with ``K`` equal to the forcing's top log power and escalates
    while the block system is inconsistent.  Rank decisions use singular
    values relative to the largest one (``rtol``).
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    base = s * np.eye(n) - A
    top = len(g) - 1
    for K in range(top, max_log + 1):
        size = n * (K + 1)
        big = np.zeros((size, size), dtype=complex)
        rhs = np.zeros(size, dtype=complex)
        for m in range(K + 1):
            big[m * n:(m + 1) * n, m * n:(m + 1) * n] = base
            if m < K:
                big[m * n:(m + 1) * n, (m + 1) * n:(m + 2) * n] = (m + 1) * np.eye(n)
            if m <= top:
                rhs[m * n:(m + 1) * n] = g[m]
        sol, *_ = np.linalg.lstsq(big, rhs, rcond=rtol)
        if np.linalg.norm(big @ sol - rhs) <= rtol * max(1.0, np.linalg.norm(rhs)):
            coeffs = [sol[m * n:(m + 1) * n] for m in range(K + 1)]
            while len(coeffs) > 1 and np.max(np.abs(coeffs[-1])) <= 1e-15:
                coeffs.pop()
            return coeffs
    raise SeriesError(f"log escalation at exponent {s} exceeded power {max_log}")


def frobenius_solve(sys: FrobeniusSystem, rtol: float = 1e-10, check: float = 1e-12) -> list[LogLaurentSeries]:
    """A particular log-Laurent solution of ``xi' = (1/t) A xi + forcing``.

    Free kernel components at resonant layers are set by the minimum-norm
    choice; adding any homogeneous solution gives another valid answer.
    The result is verified by substitution to ``check`` (relative to the
    forcing scale) before it is returned.
    """
    n = sys.n
    terms: list[dict] = [dict() for _ in range(n)]
    for e, by_m in sorted(_layers(sys.forcing, n).items()):
        top = max(by_m)
        g = [by_m.get(m, np.zeros(n, dtype=complex)) for m in range(top + 1)]
        for m, vec in enumerate(solve_layer(sys.A, e + 1, g, rtol)):
            for i in range(n):
                if vec[i] != 0:
                    terms[i][(e + 1, m)] = terms[i].get((e + 1, m), 0) + complex(vec[i])
    xi = [LogLaurentSeries(t) for t in terms]
    scale = max([1.0] + [f.max_abs() for f in sys.forcing])
    worst = max(r.max_abs() for r in sys.residual(xi))
    if worst > check * scale:
        raise SeriesError(f"particular solution fails substitution (residual {worst:.3e})")
    return xi


# ---------------------------------------------------------------------------
# the unperturbed Kirchhoff balance and its fundamental system


def _q_and_a(a1, c1, c3):
    a1, c1, c3 = complex(a1), complex(c1), complex(c3)
    if a1 == 0 or c3 == c1:
        raise PreconditionError("need a1 != 0 and c3 != c1")
    q = 1 / cmath.sqrt(a1 * (c3 - c1))
    return q, 1 / (a1 * q)


def unperturbed_residue(a1, c1, c3, alpha, beta) -> np.ndarray:
    """Pole residue ``x0`` of the Laurent solution ``x0 / t`` of the unperturbed system."""
    q, _ = _q_and_a(a1, c1, c3)
    a1 = complex(a1)
    return np.array([1j * alpha / a1, 1j * beta / a1, 0, 1j * beta * q, -1j * alpha * q, q], dtype=complex)


def fundamental_basis(a1, c1, c3, alpha, beta) -> list[tuple[int, np.ndarray]]:
    """The five solutions ``t^s v`` of the homogeneous reduced system, ordered ``k1..k5``.

    Vectors use the reduced layout ``(M1, M2, p1, p2, p3)`` and the scale
    ``a = sqrt((c3 - c1) / a1)``.
    """
    _, a = _q_and_a(a1, c1, c3)
    al, be = alpha, beta
    return [
        (1, np.array([0, -a, 1, 0, 0], dtype=complex)),
        (1, np.array([a, 0, 0, 1, 0], dtype=complex)),
        (1, np.array([-1j * al * a, -1j * be * a, 0, 0, 1], dtype=complex)),
        (-1, np.array([-a * be, a * al, al, be, 0], dtype=complex)),
        (-2, np.array([1j * al * a, 1j * be * a, 1j * be, -1j * al, 1], dtype=complex)),
    ]


def basis_series(basis) -> list[list[LogLaurentSeries]]:
    """Each basis solution as a vector of series (for substitution checks)."""
    return [[LogLaurentSeries.monomial(complex(v), s) for v in vec] for s, vec in basis]


def project_onto_basis(xi, basis) -> tuple[list[LogLaurentSeries], float]:
    """Write ``xi = sum_i k_i(t) t^(s_i) v_i``; returns the ``k_i`` and cond(V)."""
    V = np.column_stack([vec for _, vec in basis])
    W = np.linalg.inv(V)
    ks = []
    for i, (s, _) in enumerate(basis):
        acc = LogLaurentSeries()
        for j in range(len(xi)):
            if abs(W[i, j]) > 0:
                acc = acc + xi[j] * complex(W[i, j])
        ks.append(series_mul(acc, LogLaurentSeries.monomial(1, -s)))
    return ks, float(np.linalg.cond(V))


# ---------------------------------------------------------------------------
# first-order perturbation around the Laurent solution


@dataclass(frozen=True, eq=False)
class PerturbationReport:
    which: str
    alpha: complex
    beta: complex
    m3: complex
    params: dict
    system: FrobeniusSystem = field(repr=False)
    basis: list = field(repr=False)
    particular: list = field(repr=False)
    k_functions: list = field(repr=False)
    basis_condition: float = 0.0

    @property
    def ln_coefficients(self) -> dict[int, complex]:
        return {i + 1: complex(k.coef(0, 1)) for i, k in enumerate(self.k_functions) if k.coef(0, 1) != 0}

    @property
    def ln_present(self) -> bool:
        return any(k.has_log() for k in self.k_functions)

    def ln_coefficient(self, index: int = 4) -> complex:
        return complex(self.k_functions[index - 1].coef(0, 1))

    def linear_coefficient(self, index: int = 4) -> complex:
        return complex(self.k_functions[index - 1].coef(1, 0))

    def nonconstant_part(self, index: int) -> LogLaurentSeries:
        k = self.k_functions[index - 1]
        return LogLaurentSeries({key: c for key, c in k.terms.items() if key != (0, 0)})

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "alpha": self.alpha,
            "beta": self.beta,
            "M3_1": self.m3,
            "params": self.params,
            "k_functions": {str(i + 1): k.to_triples() for i, k in enumerate(self.k_functions)},
            "ln_present": self.ln_present,
            "ln_coefficients": {str(i): c for i, c in self.ln_coefficients.items()},
            "linear_coefficient_k4": self.linear_coefficient(4),
            "basis_condition": self.basis_condition,
        }


def _unperturbed_parts(model: KirchhoffModel, which: str | None):
    if model.kind != E3 or model.case not in ("kirchhoff_e3", "chaplygin_e3"):
        raise PreconditionError("perturbation needs a kirchhoff_e3 or chaplygin_e3 model")
    which = which or ("kirchhoff" if model.case == "kirchhoff_e3" else "chaplygin")
    if which not in ("kirchhoff", "chaplygin"):
        raise PreconditionError(f"unknown perturbation {which!r}")
    P = model.params
    if which == "chaplygin" and P["b1"] != P["b3"]:
        raise PreconditionError("the Chaplygin perturbation is taken around B = 0")
    base = build_model("kirchhoff_e3", a1=P["a1"], a3=P["a3"], c1=P["c1"], c3=P["c3"])
    if which == "kirchhoff":
        direction = build_model("generic_e3", B=np.diag([0, 0, 1.0]))
    else:
        A = np.zeros((3, 3))
        A[0, 2] = A[2, 0] = 1.0
        direction = build_model("generic_e3", A=A)
    return which, base, direction


def first_order_system(model, which=None, alpha=1.0, beta=0.0, m3=0.0):
    """Reduced first-order system around the Laurent solution, generated from the field.

    The forcing is the eps-linear part of the field evaluated on ``x0 / t``
    (a ``t^-2`` term) plus the ``M3`` column of the Jacobian times the
    constant ``M3^1`` (a ``t^-1`` term).
    """
    which, base, direction = _unperturbed_parts(model, which)
    alpha, beta, m3 = complex(alpha), complex(beta), complex(m3)
    if abs(alpha**2 + beta**2 - 1) > 1e-12:
        raise PreconditionError("alpha^2 + beta^2 must equal 1")
    if which == "chaplygin" and m3 != 0:
        raise PreconditionError("the Chaplygin computation is on the invariant manifold M3 = 0")
    P = base.params
    x0 = unperturbed_residue(P["a1"], P["c1"], P["c3"], alpha, beta)
    if np.max(np.abs(x0 + field_vector(base.K, E3, x0))) > 1e-10 * (1 + np.max(np.abs(x0)) ** 2):
        raise PreconditionError("residue is not a balance of the unperturbed model")
    J = field_jacobian(base.K, E3, x0)
    eps_part = field_vector(direction.K, E3, x0)
    if abs(eps_part[2]) > 1e-14 or np.max(np.abs(J[2])) > 1e-14:
        raise PreconditionError("M3 is not constant at first order for this model")
    R = list(REDUCED)
    A5 = J[np.ix_(R, R)]
    forcing = []
    for row in R:
        terms = {(-2, 0): eps_part[row], (-1, 0): J[row, 2] * m3}
        forcing.append(LogLaurentSeries(terms))
    sysm = FrobeniusSystem(A5, tuple(forcing))
    basis = fundamental_basis(P["a1"], P["c1"], P["c3"], alpha, beta)
    return which, base, sysm, basis


def perturbation_first_order(model, which=None, alpha=1.0, beta=0.0, m3=0.0) -> PerturbationReport:
    """Order-eps correction to the Laurent solution, expressed through ``k1(t) .. k5(t)``."""
    which, base, sysm, basis = first_order_system(model, which, alpha, beta, m3)
    xi = frobenius_solve(sysm)
    ks, cond = project_onto_basis(xi, basis)
    P = base.params
    params = {k: P[k] for k in ("a1", "a3", "c1", "c3")}
    return PerturbationReport(which, complex(alpha), complex(beta), complex(m3), params, sysm, basis, xi, ks, cond)


def fit_log_coefficients(sysm: FrobeniusSystem, basis, t_span=(1.0, 3.0), n_samples: int = 201,
                         tol: float = 1e-12, seed: int = 0) -> dict:
    """Least-squares estimate of the ``ln t`` and ``t``-linear parts of ``k_i(t)`` from a numerical solution.

    Integrates the system on the real segment from a random start (so the
    homogeneous part is generic), fits every component with
    ``t^-2, t^-1, 1, t, ln(t)/t`` and projects the fitted vectors onto the
    basis.  Independent of the series solver.
    """
    rng = np.random.default_rng(seed)
    xi0 = rng.standard_normal(sysm.n) + 1j * rng.standard_normal(sysm.n)
    t0, t1 = t_span
    ds = (t1 - t0) / (n_samples - 1)
    traj = integrate_field(sysm.rhs, xi0, TimePath.line(t0, t1), tol, sample_ds=ds)
    t = traj.ts.real
    design = np.column_stack([t**-2, t**-1, np.ones_like(t), t, np.log(t) / t])
    coef, *_ = np.linalg.lstsq(design, traj.xs, rcond=None)
    W = np.linalg.inv(np.column_stack([vec for _, vec in basis]))
    ln_k = W @ coef[4]
    const_k = W @ coef[2]
    return {
        "ln_coefficients": {i + 1: complex(ln_k[i]) for i in range(len(basis))},
        "linear_coefficients": {i + 1: complex(const_k[i]) for i, (s, _) in enumerate(basis) if s == -1},
        "const_to_k": {i + 1: complex(const_k[i]) for i in range(len(basis))},
        "fit_residual": float(np.max(np.abs(design @ coef - traj.xs))),
        "samples": len(t),
    }


def m3_dependence(model, alpha, beta, samples=(0.0, 1.0, 2.0)) -> list[dict]:
    """The ``k4`` ln and linear coefficients for several values of ``M3^1``."""
    out = []
    for m3 in samples:
        rep = perturbation_first_order(model, "kirchhoff", alpha, beta, m3)
        out.append({"M3_1": complex(m3), "ln_coefficient_k4": rep.ln_coefficient(4),
                    "linear_coefficient_k4": rep.linear_coefficient(4)})
    return out
