"""Kirchhoff and Chaplygin cases on e(4): integrals, involution and invariant relations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TimePath, drift_report, integrate
from .errors import PreconditionError
from .liepoisson import (
    COORDS,
    E4,
    KirchhoffModel,
    Observable,
    PhaseState,
    _as_vector,
    _e4_K,
    _parse_e4_name,
    bilinear_matrix,
    bracket,
    coordinate,
    field_vector,
    poisson_tensor,
    quadratic,
    sum_of_squares,
)

DEFAULT_BINDING = {"a1": "A1313", "c1": "C11", "c3": "C33"}
INVOLUTION_TOL = 1e-10

# the four bilinear forms whose squares make up the second Casimir
_Q = (
    [(1, "M13", "p4"), (-1, "M14", "p3"), (1, "M34", "p1")],
    [(1, "M23", "p1"), (1, "M12", "p3"), (-1, "M13", "p2")],
    [(1, "M24", "p1"), (-1, "M14", "p2"), (1, "M12", "p4")],
    [(1, "M23", "p4"), (1, "M34", "p2"), (-1, "M24", "p3")],
)
_PFAFF = [(1, "M12", "M34"), (1, "M14", "M23"), (-1, "M13", "M24")]


def _S(monomials):
    return bilinear_matrix(E4, monomials)


def casimirs_e4() -> list[Observable]:
    pp = _S([(1, f"p{i}", f"p{i}") for i in range(1, 5)])
    F1 = quadratic("F1", E4, pp, role="casimir")
    F2 = sum_of_squares("F2", E4, [(1.0, _S(q)) for q in _Q], role="casimir")
    return [F1, F2]


def quadratic_integral_F5(model: KirchhoffModel, binding: dict | None = None) -> Observable:
    """The quartic integral ``F5`` with its three constants read from model coefficients.

    ``binding`` maps the symbols ``a1, c1, c3`` to coefficient names of the
    model (default ``A1313, C11, C33``).
    """
    binding = dict(DEFAULT_BINDING if binding is None else binding)
    if set(binding) != {"a1", "c1", "c3"}:
        raise PreconditionError("binding must map exactly a1, c1, c3")
    a1, c1, c3 = (complex(model.params[binding[k]]) for k in ("a1", "c1", "c3"))
    terms = [
        (a1, _S(_PFAFF)),
        (-c1, _S(_Q[0])), (-c1, _S(_Q[3])),
        (-c3, _S(_Q[1])), (-c3, _S(_Q[2])),
    ]
    return sum_of_squares("F5", E4, terms, role="integral")


@dataclass(frozen=True)
class IntegralSet4:
    H: Observable
    F1: Observable
    F2: Observable
    F3: Observable
    F4: Observable
    F5: Observable

    @classmethod
    def of(cls, model: KirchhoffModel, binding: dict | None = None) -> "IntegralSet4":
        if model.kind != E4:
            raise PreconditionError("IntegralSet4 needs an e(4) model")
        F1, F2 = casimirs_e4()
        return cls(
            model.hamiltonian(), F1, F2,
            coordinate(E4, "M12", role="integral"), coordinate(E4, "M34", role="integral"),
            quadratic_integral_F5(model, binding),
        )

    @property
    def names(self) -> tuple[str, ...]:
        return ("H", "F1", "F2", "F3", "F4", "F5")

    def observables(self) -> list[Observable]:
        return [getattr(self, n) for n in self.names]


def integrals4(x, model: KirchhoffModel, binding: dict | None = None) -> dict[str, complex]:
    vec = _as_vector(x, E4)
    s = IntegralSet4.of(model, binding)
    return {n: complex(obs.evaluate(vec)) for n, obs in zip(s.names, s.observables())}


def random_states(n: int, seed: int = 42, scale: float = 1.0, complex_: bool = True) -> np.ndarray:
    """Seeded unit-scale states on e(4)*, one per row."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 10)).astype(complex)
    if complex_:
        x = (x + 1j * rng.standard_normal((n, 10))) / np.sqrt(2)
    return scale * x


# ---------------------------------------------------------------------------
# involution


@dataclass(frozen=True, eq=False)
class InvolutionReport:
    names: tuple
    matrix: np.ndarray
    tolerance: float
    passes: bool
    n_points: int
    seed: int
    binding: dict
    binding_search: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "tolerance": self.tolerance,
            "passes": self.passes,
            "n_points": self.n_points,
            "seed": self.seed,
            "binding": self.binding,
            "binding_search": self.binding_search,
        }


def _bracket_maxima(obs, states) -> np.ndarray:
    k = len(obs)
    out = np.zeros((k, k))
    for x in states:
        grads = [o.gradient(x) for o in obs]
        P = poisson_tensor(E4, x)
        for i in range(k):
            Pg = P @ grads[i]
            for j in range(i + 1, k):
                v = abs(grads[j] @ Pg)
                if v > out[i, j]:
                    out[i, j] = out[j, i] = v
    return out


def _tolerance(model: KirchhoffModel) -> float:
    scale = max([1.0] + [abs(complex(v)) for v in model.params.values()])
    return INVOLUTION_TOL * scale**2


def involution_matrix(model: KirchhoffModel, n_points: int = 1000, seed: int = 42,
                      binding: dict | None = None, search: bool = True) -> InvolutionReport:
    """Maxima of ``|{F_i, F_j}|`` over seeded random complex states for ``H, F1 .. F5``.

    When the requested binding of ``F5`` fails and ``search`` is set, all
    assignments of ``A1313, C11, C33`` to ``a1, c1, c3`` are tried and
    reported; the first passing one is used.
    """
    if n_points < 100:
        raise PreconditionError("involution_matrix needs at least 100 points")
    if model.kind != E4:
        raise PreconditionError("involution_matrix needs an e(4) model")
    states = random_states(n_points, seed)
    tol = _tolerance(model)
    binding = dict(DEFAULT_BINDING if binding is None else binding)

    def attempt(b):
        s = IntegralSet4.of(model, b)
        mat = _bracket_maxima(s.observables(), states)
        return s.names, mat, bool(np.all(mat <= tol))

    names, mat, ok = attempt(binding)
    tried = [{"binding": binding, "passes": ok, "max_bracket": float(mat.max())}]
    if not ok and search:
        symbols = ("a1", "c1", "c3")
        for perm in itertools.permutations(("A1313", "C11", "C33")):
            b = dict(zip(symbols, perm))
            if b == binding:
                continue
            n2, m2, ok2 = attempt(b)
            tried.append({"binding": b, "passes": ok2, "max_bracket": float(m2.max())})
            if ok2:
                names, mat, ok, binding = n2, m2, ok2, b
                break
    return InvolutionReport(names, mat, tol, ok, n_points, seed, binding, tried)


def binding_table(model: KirchhoffModel, n_points: int = 100, seed: int = 42) -> list[dict]:
    """``max |{H, F5}|`` for each of the six bindings of ``a1, c1, c3``."""
    states = random_states(n_points, seed)
    H = model.hamiltonian()
    out = []
    for perm in itertools.permutations(("A1313", "C11", "C33")):
        b = dict(zip(("a1", "c1", "c3"), perm))
        F5 = quadratic_integral_F5(model, b)
        worst = max(abs(bracket(H, F5, x)) for x in states)
        out.append({"binding": b, "max_bracket": float(worst), "passes": bool(worst <= _tolerance(model))})
    return out


def integral_drift(model: KirchhoffModel, x0, duration: float = 1.0, tol: float = 1e-10,
                   binding: dict | None = None) -> dict:
    """Relative drift of ``H, F1 .. F5`` along a real-time trajectory."""
    traj = integrate(model, x0, TimePath.line(0.0, duration), tol)
    s = IntegralSet4.of(model, binding)
    rep = drift_report(traj, s.observables())
    return {name: rep[obs.name].relative for name, obs in zip(s.names, s.observables())}


# ---------------------------------------------------------------------------
# mixed term obstruction


@dataclass(frozen=True, eq=False)
class Witness:
    found: bool
    state: PhaseState | None
    rates: dict
    samples: int
    coefficients: dict

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "state": None if self.state is None else list(self.state.vector),
            "rates": self.rates,
            "samples": self.samples,
            "coefficients": self.coefficients,
        }


def mixed_term_rates(B_coeffs: dict, x) -> dict[str, complex]:
    """``dM12/dt`` and ``dM34/dt`` generated by the mixed term ``sum B_ijk M_ij p_k`` alone."""
    K = _e4_K(B_coeffs)
    v = field_vector(K, E4, _as_vector(x, E4))
    return {"M12": complex(v[0]), "M34": complex(v[5])}


_PARTNER = {1: 2, 2: 1, 3: 4, 4: 3}


def _candidates(B_coeffs):
    for name, value in B_coeffs.items():
        if complex(value) == 0:
            continue
        d = [int(ch) for ch in name[1:]]
        pair = f"M{d[0]}{d[1]}"
        if pair not in ("M12", "M34"):
            continue
        x = np.zeros(10, dtype=complex)
        x[COORDS[E4].index(pair)] = 1.0
        x[5 + _PARTNER[d[2]]] = 1.0
        yield x


def mixed_term_witness(B_coeffs: dict, seed: int = 42, max_samples: int = 10_000,
                         threshold: float = 1e-6) -> Witness:
    """A state where the mixed term moves ``M12`` or ``M34``.

    Tries the direct state ``M_ij = 1`` plus the bracket partner of ``p_k``
    for every nonzero ``B_ijk`` first, then seeded random states.
    """
    B_coeffs = {k: v for k, v in B_coeffs.items()}
    for k in B_coeffs:
        if _parse_e4_name(k)[3] != "B":
            raise PreconditionError(f"{k} is not a mixed coefficient")
    if all(complex(v) == 0 for v in B_coeffs.values()):
        raise PreconditionError("all B coefficients are zero")
    tried = 0
    rng = np.random.default_rng(seed)

    def states():
        yield from _candidates(B_coeffs)
        while True:
            yield rng.standard_normal(10) + 1j * rng.standard_normal(10)

    for x in states():
        if tried >= max_samples:
            break
        tried += 1
        rates = mixed_term_rates(B_coeffs, x)
        if max(abs(r) for r in rates.values()) > threshold:
            return Witness(True, PhaseState.from_vector(E4, x), rates, tried, B_coeffs)
    return Witness(False, None, {}, tried, B_coeffs)


# ---------------------------------------------------------------------------
# Chaplygin invariant relations


def invariant_relation_brackets(model: KirchhoffModel, x) -> dict[str, complex]:
    """``{M12, H}`` and ``{M34, H}`` at ``x``."""
    v = field_vector(model.K, E4, _as_vector(x, E4))
    return {"M12": complex(v[0]), "M34": complex(v[5])}


def submanifold_states(n: int, seed: int = 42, scale: float = 1.0, complex_: bool = True) -> np.ndarray:
    x = random_states(n, seed, scale, complex_)
    x[:, 0] = 0
    x[:, 5] = 0
    return x


@dataclass(frozen=True, eq=False)
class InvariantCheck:
    drifts: list
    max_drift: float
    max_bracket: float
    threshold: float
    passes: bool
    seed: int

    def to_json(self) -> dict:
        return {
            "drifts": self.drifts,
            "max_drift": self.max_drift,
            "max_bracket": self.max_bracket,
            "threshold": self.threshold,
            "passes": self.passes,
            "seed": self.seed,
        }


def chaplygin4_invariant_check(model: KirchhoffModel, tol: float = 1e-10, n_starts: int = 10,
                               seed: int = 42, duration: float = 1.0, n_points: int = 1000,
                               starts=None) -> InvariantCheck:
    """Drift of ``M12, M34`` from starts on ``M12 = M34 = 0`` plus pointwise brackets there.

    Trajectory starts are real with entries of size about 1/2 so that the
    unit-time flow stays away from complex-time singularities.
    """
    if model.kind != E4:
        raise PreconditionError("chaplygin4_invariant_check needs an e(4) model")
    if starts is None:
        starts = submanifold_states(n_starts, seed, 0.5, complex_=False)
    drifts = []
    for x0 in starts:
        x0 = _as_vector(x0, E4)
        if abs(x0[0]) > 1e-14 or abs(x0[5]) > 1e-14:
            raise PreconditionError("start must satisfy M12 = M34 = 0")
        traj = integrate(model, x0, TimePath.line(0.0, duration), tol)
        drifts.append(float(np.max(np.abs(traj.xs[:, [0, 5]]))))
    worst = 0.0
    for x in submanifold_states(n_points, seed + 1):
        worst = max(worst, max(abs(v) for v in invariant_relation_brackets(model, x).values()))
    threshold = 100 * tol
    max_drift = max(drifts, default=0.0)
    passes = max_drift <= threshold and worst <= INVOLUTION_TOL
    return InvariantCheck(drifts, max_drift, float(worst), threshold, passes, seed)
