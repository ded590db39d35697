"""Lie-Poisson structures of e(3)* and e(4)*, quadratic Hamiltonians and models.

Coordinates are flat complex vectors.  On e(3)* the layout is
``(M1, M2, M3, p1, p2, p3)``; on e(4)* it is
``(M12, M13, M14, M23, M24, M34, p1, p2, p3, p4)``.

Every Hamiltonian here is a quadratic form ``H = 1/2 x^T K x`` and the
equations of motion are always generated as ``x_i' = {x_i, H}`` from the
structure tensor, never transcribed by hand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, ModelValidationError

E3 = "E3"
E4 = "E4"

PAIRS4 = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))

COORDS = {
    E3: ("M1", "M2", "M3", "p1", "p2", "p3"),
    E4: tuple(f"M{i}{j}" for i, j in PAIRS4) + ("p1", "p2", "p3", "p4"),
}
DIM = {E3: 6, E4: 10}
M_SIZE = {E3: 3, E4: 6}


def _levi_civita():
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    return eps


def _structure_e3():
    # {M_i, M_j} = -eps_ijk M_k, {M_i, p_j} = -eps_ijk p_k, {p_i, p_j} = 0
    eps = _levi_civita()
    c = np.zeros((6, 6, 6))
    c[:3, :3, :3] = -eps
    c[:3, 3:, 3:] = -eps
    c[3:, :3, 3:] = eps.transpose(1, 0, 2)
    return c


def _m4(i, j):
    """Index and sign of M_ij in the e(4) storage, or None on the diagonal."""
    if i == j:
        return None
    if (i, j) in PAIRS4:
        return PAIRS4.index((i, j)), 1.0
    return PAIRS4.index((j, i)), -1.0


def _structure_e4():
    # {M_ij, M_kl} = d_ik M_jl + d_jl M_ik - d_il M_jk - d_jk M_il
    # {M_ij, p_k} = d_ik p_j - d_jk p_i
    c = np.zeros((10, 10, 10))

    def add(a, b, ij, sign):
        hit = _m4(*ij)
        if hit is not None:
            c[a, b, hit[0]] += sign * hit[1]

    for a, (i, j) in enumerate(PAIRS4):
        for b, (k, l) in enumerate(PAIRS4):
            if i == k:
                add(a, b, (j, l), 1.0)
            if j == l:
                add(a, b, (i, k), 1.0)
            if i == l:
                add(a, b, (j, k), -1.0)
            if j == k:
                add(a, b, (i, l), -1.0)
        for k in range(1, 5):
            if i == k:
                c[a, 5 + k, 5 + j] += 1.0
                c[5 + k, a, 5 + j] -= 1.0
            if j == k:
                c[a, 5 + k, 5 + i] -= 1.0
                c[5 + k, a, 5 + i] += 1.0
    return c


STRUCTURE = {E3: _structure_e3(), E4: _structure_e4()}


def poisson_tensor(kind: str, x) -> np.ndarray:
    """Matrix ``Pi(x)_ij = {x_i, x_j}``; works for complex and object arrays."""
    return np.tensordot(STRUCTURE[kind], x, axes=([2], [0]))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class PhaseState:
    """A point of e(3)* or e(4)*.

    For ``E4`` the moment ``M`` holds the six independent entries
    ``(M12, M13, M14, M23, M24, M34)``; :meth:`M_matrix` expands them.
    """

    kind: str
    M: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.kind not in DIM:
            raise DimensionMismatch(f"unknown dimension tag {self.kind!r}")
        M = np.asarray(self.M, dtype=complex).reshape(-1)
        p = np.asarray(self.p, dtype=complex).reshape(-1)
        if M.size != M_SIZE[self.kind] or p.size != DIM[self.kind] - M_SIZE[self.kind]:
            raise DimensionMismatch(
                f"{self.kind} state needs {M_SIZE[self.kind]} moment entries, got {M.size}/{p.size}"
            )
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(p))):
            raise ValueError("phase state entries must be finite")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, kind: str, x) -> "PhaseState":
        x = np.asarray(x, dtype=complex).reshape(-1)
        if x.size != DIM[kind]:
            raise DimensionMismatch(f"{kind} vector must have {DIM[kind]} entries, got {x.size}")
        m = M_SIZE[kind]
        return cls(kind, x[:m], x[m:])

    @classmethod
    def zero(cls, kind: str) -> "PhaseState":
        return cls.from_vector(kind, np.zeros(DIM[kind]))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.M, self.p])

    def M_matrix(self) -> np.ndarray:
        if self.kind == E3:
            m1, m2, m3 = self.M
            return np.array([[0, -m3, m2], [m3, 0, -m1], [-m2, m1, 0]], dtype=complex)
        out = np.zeros((4, 4), dtype=complex)
        for a, (i, j) in enumerate(PAIRS4):
            out[i - 1, j - 1] = self.M[a]
            out[j - 1, i - 1] = -self.M[a]
        return out

    def __getitem__(self, name: str) -> complex:
        return self.vector[COORDS[self.kind].index(name)]

    def __repr__(self):
        return f"PhaseState({self.kind}, M={self.M.tolist()}, p={self.p.tolist()})"


def _as_vector(x, kind: str | None = None) -> np.ndarray:
    if isinstance(x, PhaseState):
        if kind is not None and x.kind != kind:
            raise DimensionMismatch(f"state is {x.kind}, expected {kind}")
        return x.vector
    vec = np.asarray(x)
    if kind is not None and vec.shape != (DIM[kind],):
        raise DimensionMismatch(f"expected a {kind} vector of length {DIM[kind]}, got shape {vec.shape}")
    return vec


def _kind_of(x) -> str:
    if isinstance(x, PhaseState):
        return x.kind
    n = np.shape(x)[0]
    for kind, d in DIM.items():
        if d == n:
            return kind
    raise DimensionMismatch(f"no phase space of dimension {n}")


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Observable:
    """A function on phase space shipped with its analytic gradient.

    ``evaluate`` and ``gradient`` act on flat coordinate vectors; calling the
    observable also accepts a :class:`PhaseState`.
    """

    name: str
    kind: str
    evaluate: Callable[[np.ndarray], complex]
    gradient: Callable[[np.ndarray], np.ndarray]
    role: str = "function"

    def __call__(self, x) -> complex:
        return self.evaluate(_as_vector(x, self.kind))

    def grad(self, x) -> np.ndarray:
        return self.gradient(_as_vector(x, self.kind))


def coordinate(kind: str, name: str | int, role: str = "function") -> Observable:
    idx = COORDS[kind].index(name) if isinstance(name, str) else int(name)
    unit = np.zeros(DIM[kind])
    unit[idx] = 1.0
    return Observable(
        COORDS[kind][idx], kind, lambda x, i=idx: x[i], lambda x, u=unit: u.astype(np.asarray(x).dtype), role
    )


def quadratic(name: str, kind: str, S, role: str = "function") -> Observable:
    """Observable ``1/2 x^T S x`` for a symmetric ``S``."""
    S = np.asarray(S, dtype=complex)
    return Observable(name, kind, lambda x: 0.5 * (x @ (S @ x)), lambda x: S @ x, role)


def sum_of_squares(name: str, kind: str, terms, role: str = "function") -> Observable:
    """Observable ``sum_k w_k * q_k(x)^2`` where ``q_k = 1/2 x^T S_k x``."""
    terms = [(w, np.asarray(S, dtype=complex)) for w, S in terms]

    def evaluate(x):
        return sum(w * (0.5 * (x @ (S @ x))) ** 2 for w, S in terms)

    def gradient(x):
        return sum(2.0 * w * (0.5 * (x @ (S @ x))) * (S @ x) for w, S in terms)

    return Observable(name, kind, evaluate, gradient, role)


def bilinear_matrix(kind: str, monomials) -> np.ndarray:
    """Symmetric ``S`` with ``1/2 x^T S x = sum c * x_a * x_b`` over ``(c, a, b)``."""
    n = DIM[kind]
    S = np.zeros((n, n), dtype=complex)
    for coef, a, b in monomials:
        a = COORDS[kind].index(a) if isinstance(a, str) else a
        b = COORDS[kind].index(b) if isinstance(b, str) else b
        if a == b:
            S[a, a] += 2 * coef
        else:
            S[a, b] += coef
            S[b, a] += coef
    return S


def bracket(F: Observable, G: Observable, x) -> complex:
    """Lie-Poisson bracket ``{F, G}(x) = dF^T Pi(x) dG``."""
    kind = x.kind if isinstance(x, PhaseState) else _kind_of(x)
    if F.kind != kind or G.kind != kind:
        raise DimensionMismatch(f"bracket of {F.kind}/{G.kind} observables at an {kind} point")
    vec = _as_vector(x, kind)
    return F.gradient(vec) @ (poisson_tensor(kind, vec) @ G.gradient(vec))


# ---------------------------------------------------------------------------
# models

E3_CASES = ("generic_e3", "kirchhoff_e3", "chaplygin_e3")
E4_CASES = ("generic_e4", "kirchhoff_e4", "chaplygin_e4")

KIRCHHOFF_E4_KEYS = ("A1212", "A1313", "A3434", "A1234", "C11", "C33")
CHAPLYGIN_E4_EXTRA = (
    "A1213", "A1214", "A1223", "A1224", "A1334", "A1434", "A2334", "A2434",
    "B121", "B122", "B123", "B124", "B341", "B342", "B343", "B344",
)


@dataclass(frozen=True, eq=False)
class KirchhoffModel:
    """Quadratic Hamiltonian ``H = 1/2 x^T K x`` on e(3)* or e(4)* with a case tag.

    ``params`` keeps the case parameters exactly as supplied; ``K`` is derived.
    """

    kind: str
    case: str
    params: dict
    K: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return DIM[self.kind]

    @property
    def A(self) -> np.ndarray:
        return self.K[: M_SIZE[self.kind], : M_SIZE[self.kind]]

    @property
    def B(self) -> np.ndarray:
        return self.K[: M_SIZE[self.kind], M_SIZE[self.kind]:]

    @property
    def C(self) -> np.ndarray:
        return self.K[M_SIZE[self.kind]:, M_SIZE[self.kind]:]

    @property
    def epsilon(self) -> complex | None:
        """Small parameter of the perturbative split, if the case has one."""
        if self.case == "kirchhoff_e3":
            return self.params["b3"] - self.params["b1"]
        if self.case == "chaplygin_e3":
            return self.params["a13"]
        return None

    def split(self) -> tuple["KirchhoffModel", "KirchhoffModel", complex]:
        """Return ``(unperturbed, direction, eps)`` with ``H = H0 + eps * H1``.

        Kirchhoff: ``H1 = M3 p3`` (the ``b3 - b1`` part of the mixed term).
        Chaplygin: ``H1 = M1 M3`` (the ``a13`` cross term).
        """
        P = self.params
        if self.case == "kirchhoff_e3":
            base = build_model("kirchhoff_e3", a1=P["a1"], a3=P["a3"], b1=P["b1"], b3=P["b1"], c1=P["c1"], c3=P["c3"])
            direction = build_model("generic_e3", B=np.diag([0, 0, 1.0]))
        elif self.case == "chaplygin_e3":
            base = build_model("kirchhoff_e3", a1=P["a1"], a3=P["a3"], b1=P["b1"], b3=P["b3"], c1=P["c1"], c3=P["c3"])
            A = np.zeros((3, 3))
            A[0, 2] = A[2, 0] = 1.0
            direction = build_model("generic_e3", A=A)
        else:
            raise ModelValidationError(f"case {self.case} has no perturbative split")
        return base, direction, self.epsilon

    def hamiltonian(self) -> Observable:
        return quadratic("H", self.kind, self.K, role="hamiltonian")

    def to_dict(self) -> dict:
        return {"case": self.case, "params": {k: _encode_param(v) for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, data: dict) -> "KirchhoffModel":
        params = {k: _decode_param(v) for k, v in data.get("params", {}).items()}
        return build_model(data["case"], **params)


def _encode_param(v):
    if isinstance(v, np.ndarray) or isinstance(v, (list, tuple)):
        return [_encode_param(u) for u in np.asarray(v).tolist()]
    v = complex(v)
    return [v.real, v.imag]


def _decode_param(v):
    if isinstance(v, (int, float, complex)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(u, (int, float)) for u in v):
        return complex(v[0], v[1])
    if isinstance(v, list):
        return np.array([_decode_param(u) for u in v], dtype=complex)
    raise ModelValidationError(f"cannot decode parameter value {v!r}")


def _num(params, key, default=None):
    if key not in params:
        if default is None:
            raise ModelValidationError(f"missing parameter {key}")
        return complex(default)
    v = complex(params[key])
    if not np.isfinite(v):
        raise ModelValidationError(f"parameter {key} is not finite")
    return v


def _matrix(params, key):
    if key not in params or params[key] is None:
        return np.zeros((3, 3), dtype=complex)
    m = np.asarray(params[key], dtype=complex)
    if m.shape != (3, 3):
        raise ModelValidationError(f"{key} must be 3x3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ModelValidationError(f"{key} has non-finite entries")
    if not np.allclose(m, m.T, rtol=0, atol=1e-14):
        raise ModelValidationError(f"{key} must be symmetric")
    return m


def _e3_K(A, B, C):
    return np.block([[A, B], [B.T, C]]).astype(complex)


def _parse_e4_name(name: str):
    """Map a coefficient name to ``(index_a, index_b, weight)`` in ``K``.

    ``A{ij}{kl}`` and ``C{kl}`` are monomial coefficients of 2H; ``B{ij}{k}``
    is the coefficient of ``M_ij p_k`` in H (the general formula has 2 sum B).
    """
    head, digits = name[0], name[1:]
    if not digits.isdigit():
        raise ModelValidationError(f"bad e(4) coefficient name {name!r}")
    d = [int(ch) for ch in digits]
    try:
        if head == "A" and len(d) == 4:
            a, sa = _m4(d[0], d[1])
            b, sb = _m4(d[2], d[3])
            return a, b, sa * sb, "A"
        if head == "B" and len(d) == 3:
            a, sa = _m4(d[0], d[1])
            return a, 5 + d[2], sa, "B"
        if head == "C" and len(d) == 2 and all(1 <= k <= 4 for k in d):
            return 5 + d[0], 5 + d[1], 1.0, "C"
    except (TypeError, ValueError):
        pass
    raise ModelValidationError(f"bad e(4) coefficient name {name!r}")


def _e4_K(coeffs: dict) -> np.ndarray:
    K = np.zeros((10, 10), dtype=complex)
    for name, value in coeffs.items():
        a, b, sign, block = _parse_e4_name(name)
        value = complex(value) * sign
        if block == "B":
            K[a, b] += value
            K[b, a] += value
        elif a == b:
            K[a, a] += value
        else:
            K[a, b] += value / 2
            K[b, a] += value / 2
    return K


def build_model(case: str, **params) -> KirchhoffModel:
    """Build and validate a named model.

    E3 cases: ``generic_e3(A, B, C)``, ``kirchhoff_e3(a1, a3, b1, b3, c1, c3)``,
    ``chaplygin_e3(a1, a3, a13, b1, b3, c1, c3)`` (rotated basis with
    ``a1 = a2``).  E4 cases take coefficient names such as ``A1212`` or
    ``B121``; ``generic_e4`` accepts any of them.
    """
    if case == "generic_e3":
        A, B, C = (_matrix(params, k) for k in "ABC")
        return KirchhoffModel(E3, case, {"A": A, "B": B, "C": C}, _e3_K(A, B, C))
    if case in ("kirchhoff_e3", "chaplygin_e3"):
        keys = ["a1", "a3", "b1", "b3", "c1", "c3"] + (["a13"] if case == "chaplygin_e3" else [])
        _reject_unknown(case, params, keys)
        P = {k: _num(params, k, 0.0 if k in ("b1", "b3") else None) for k in keys}
        A = np.diag([P["a1"], P["a1"], P["a3"]])
        if case == "chaplygin_e3":
            if P["a13"] == 0:
                raise ModelValidationError("chaplygin_e3 requires a13 != 0 (a13 = 0 is the Kirchhoff case)")
            A[0, 2] = A[2, 0] = P["a13"]
        B = np.diag([P["b1"], P["b1"], P["b3"]])
        C = np.diag([P["c1"], P["c1"], P["c3"]])
        return KirchhoffModel(E3, case, P, _e3_K(A, B, C))
    if case == "generic_e4":
        P = {k: _num(params, k) for k in params}
        return KirchhoffModel(E4, case, P, _e4_K(P))
    if case == "kirchhoff_e4":
        extra = [k for k in params if k not in KIRCHHOFF_E4_KEYS]
        for k in extra:
            if not k.startswith("B"):
                raise ModelValidationError(f"kirchhoff_e4 does not take parameter {k}")
            _parse_e4_name(k)
            if complex(params[k]) != 0:
                raise ModelValidationError(
                    f"kirchhoff_e4 requires all B_ijk = 0 ({k} = {params[k]}): "
                    "M12 and M34 are first integrals only when every mixed coefficient B_ijk vanishes"
                )
        P = {k: _num(params, k, 0.0 if k == "A1234" else None) for k in KIRCHHOFF_E4_KEYS}
        return KirchhoffModel(E4, case, P, _e4_K(_kirchhoff_e4_monomials(P)))
    if case == "chaplygin_e4":
        keys = KIRCHHOFF_E4_KEYS + CHAPLYGIN_E4_EXTRA
        _reject_unknown(case, params, keys)
        P = {k: _num(params, k, 0.0 if (k == "A1234" or k in CHAPLYGIN_E4_EXTRA) else None) for k in keys}
        mono = _kirchhoff_e4_monomials(P)
        mono.update({k: P[k] for k in CHAPLYGIN_E4_EXTRA})
        return KirchhoffModel(E4, case, P, _e4_K(mono))
    raise ModelValidationError(f"unknown model case {case!r}")


def _reject_unknown(case, params, keys):
    for k in params:
        if k not in keys:
            raise ModelValidationError(f"{case} does not take parameter {k}")


def _kirchhoff_e4_monomials(P) -> dict:
    a = P["A1313"]
    return {
        "A1212": P["A1212"], "A1313": a, "A1414": a, "A2323": a, "A2424": a,
        "A3434": P["A3434"], "A1234": P["A1234"],
        "C11": P["C11"], "C22": P["C11"], "C33": P["C33"], "C44": P["C33"],
    }


# ---------------------------------------------------------------------------
# vector fields


def _check_kind(model: KirchhoffModel, x):
    kind = x.kind if isinstance(x, PhaseState) else _kind_of(x)
    if kind != model.kind:
        raise DimensionMismatch(f"{model.kind} model evaluated at an {kind} state")


def field_vector(K: np.ndarray, kind: str, x) -> np.ndarray:
    """``x' = Pi(x) K x`` on raw vectors (complex or mpmath object arrays)."""
    return poisson_tensor(kind, x) @ (K @ x)


def field_jacobian(K: np.ndarray, kind: str, x) -> np.ndarray:
    """Exact Jacobian of :func:`field_vector` with respect to ``x``."""
    c = STRUCTURE[kind]
    return np.tensordot(c, K @ x, axes=([1], [0])) + poisson_tensor(kind, x) @ K


def hamiltonian_field(model: KirchhoffModel, x) -> PhaseState:
    """Tangent vector ``x_i' = {x_i, H}`` in the same layout as the state."""
    _check_kind(model, x)
    vec = _as_vector(x)
    return PhaseState.from_vector(model.kind, field_vector(model.K, model.kind, vec))


def bilinear_field(model: KirchhoffModel, u, v) -> np.ndarray:
    """Symmetric bilinear form ``F`` with ``F(x, x)`` equal to the field at ``x``."""
    P_u = poisson_tensor(model.kind, u)
    P_v = poisson_tensor(model.kind, v)
    return 0.5 * (P_u @ (model.K @ v) + P_v @ (model.K @ u))


# ---------------------------------------------------------------------------
# invariants


def casimirs_e3():
    mp = bilinear_matrix(E3, [(1, f"M{i}", f"p{i}") for i in (1, 2, 3)])
    pp = bilinear_matrix(E3, [(1, f"p{i}", f"p{i}") for i in (1, 2, 3)])
    return [quadratic("<M,p>", E3, mp, role="casimir"), quadratic("<p,p>", E3, pp, role="casimir")]


def invariants_of(model: KirchhoffModel, binding: dict | None = None) -> list[Observable]:
    """Hamiltonian, Casimirs and the case-specific integrals or invariant relations."""
    out = [model.hamiltonian()]
    if model.kind == E3:
        out += casimirs_e3()
        if model.case == "kirchhoff_e3":
            out.append(coordinate(E3, "M3", role="integral"))
        elif model.case == "chaplygin_e3":
            out.append(coordinate(E3, "M3", role="invariant_relation"))
        return out
    from .dim4 import casimirs_e4, quadratic_integral_F5

    out += casimirs_e4()
    if model.case == "kirchhoff_e4":
        out.append(coordinate(E4, "M12", role="integral"))
        out.append(coordinate(E4, "M34", role="integral"))
        out.append(quadratic_integral_F5(model, binding))
    elif model.case == "chaplygin_e4":
        out.append(coordinate(E4, "M12", role="invariant_relation"))
        out.append(coordinate(E4, "M34", role="invariant_relation"))
    return out


# ---------------------------------------------------------------------------
# raw Chaplygin conditions and hand-written reference systems


def chaplygin_conditions(a, B, C, branch: int = 1, tol: float = 1e-12) -> dict:
    """Evaluate the two-branch family of Chaplygin conditions on raw ``A = diag(a)``.

    ``branch=+1`` takes the upper signs (``-+`` then ``+-``).  Returns the
    eight residuals and whether all vanish within ``tol``.
    """
    a1, a2, a3 = (complex(v) for v in a)
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    r21, r32 = np.sqrt(a2 - a1), np.sqrt(a3 - a2)
    s = 1 if branch > 0 else -1
    res = {
        "b13_1": B[0, 2] * r21 - s * (B[1, 1] - B[0, 0]) * r32,
        "b12": B[0, 1],
        "b13_2": B[0, 2] * r32 + s * (B[2, 2] - B[1, 1]) * r21,
        "b23": B[1, 2],
        "c13_1": C[0, 2] * r21 - s * (C[1, 1] - C[0, 0]) * r32,
        "c12": C[0, 1],
        "c13_2": C[0, 2] * r32 + s * (C[2, 2] - C[1, 1]) * r21,
        "c23": C[1, 2],
    }
    return {"residuals": res, "satisfied": all(abs(v) <= tol for v in res.values())}


def chaplygin_relation_raw(a, branch: int = 1) -> Observable:
    """``M1 sqrt(a2 - a1) -+ M3 sqrt(a3 - a2)`` for the unrotated basis."""
    a1, a2, a3 = (complex(v) for v in a)
    s = 1 if branch > 0 else -1
    g = np.zeros(6, dtype=complex)
    g[0], g[2] = np.sqrt(a2 - a1), -s * np.sqrt(a3 - a2)
    return Observable("F4_chaplygin_raw", E3, lambda x: g @ x, lambda x: g, role="invariant_relation")


def is_clebsch(a, c, tol: float = 1e-12) -> bool:
    """Clebsch condition ``(c2-c3)/a1 + (c3-c1)/a2 + (c1-c2)/a3 = 0`` for diagonal A, C."""
    a1, a2, a3 = a
    c1, c2, c3 = c
    return abs((c2 - c3) / a1 + (c3 - c1) / a2 + (c1 - c2) / a3) <= tol


def reference_field(model: KirchhoffModel, x) -> np.ndarray:
    """Hand-written right-hand sides of the perturbative Kirchhoff and Chaplygin systems.

    Used only as a test oracle for the generated field.  Both hand-written
    systems keep the classical form with ``(a1 - a3) M2 M3`` in the second equation.
    """
    if model.case not in ("kirchhoff_e3", "chaplygin_e3"):
        raise ModelValidationError("reference systems exist only for kirchhoff_e3 and chaplygin_e3")
    P = model.params
    a1, a3, c1, c3 = P["a1"], P["a3"], P["c1"], P["c3"]
    M1, M2, M3, p1, p2, p3 = _as_vector(x, E3)
    if model.case == "kirchhoff_e3":
        e = P["b3"] - P["b1"]
        return np.array([
            (a3 - a1) * M2 * M3 + e * (M2 * p3 + M3 * p2) + (c3 - c1) * p2 * p3,
            (a1 - a3) * M2 * M3 - e * (M1 * p3 + M3 * p1) + (c1 - c3) * p1 * p3,
            0,
            a3 * M3 * p2 - a1 * M2 * p3 + e * p2 * p3,
            a1 * M1 * p3 - a3 * M3 * p1 - e * p1 * p3,
            a1 * (p1 * M2 - p2 * M1),
        ], dtype=complex)
    e = P["a13"]
    return np.array([
        (a3 - a1) * M2 * M3 + (c3 - c1) * p2 * p3 + e * M1 * M2,
        (a1 - a3) * M2 * M3 + (c1 - c3) * p1 * p3 + e * (M3**2 - M1**2),
        -e * M2 * M3,
        a3 * M3 * p2 - a1 * M2 * p3 + e * M1 * p2,
        a1 * M1 * p3 - a3 * M3 * p1 + e * (M3 * p3 - M1 * p1),
        a1 * (p1 * M2 - p2 * M1) - e * M3 * p2,
    ], dtype=complex)


def reference_discrepancies(model: KirchhoffModel, x, rtol: float = 1e-12) -> list[dict]:
    """Coordinates where the hand-written system disagrees with the generated field."""
    gen = field_vector(model.K, E3, _as_vector(x, E3))
    shown = reference_field(model, x)
    out = []
    for name, g, s in zip(COORDS[E3], gen, shown):
        if abs(g - s) > rtol * (1 + abs(g)):
            out.append({"coordinate": name, "generated": complex(g), "reference": complex(s)})
    return out
