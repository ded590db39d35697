"""Adaptive integration along piecewise paths in complex time.

Each path segment is parameterized by arclength ``s`` so the embedded
Dormand-Prince 5(4) pair sees the real problem ``dx/ds = f(t(s), x) t'(s)``.
States may be complex128 arrays or, in extended precision, object arrays of
``mpmath.mpc``.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction as Fr
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import NonFinite, PreconditionError, StepCollapse
from .liepoisson import COORDS, KirchhoffModel, PhaseState, _as_vector, field_vector

EXTENDED_DPS = 34

# Dormand-Prince 5(4) tableau
_C = [Fr(0), Fr(1, 5), Fr(3, 10), Fr(4, 5), Fr(8, 9), Fr(1), Fr(1)]
_A = [
    [],
    [Fr(1, 5)],
    [Fr(3, 40), Fr(9, 40)],
    [Fr(44, 45), Fr(-56, 15), Fr(32, 9)],
    [Fr(19372, 6561), Fr(-25360, 2187), Fr(64448, 6561), Fr(-212, 729)],
    [Fr(9017, 3168), Fr(-355, 33), Fr(46732, 5247), Fr(49, 176), Fr(-5103, 18656)],
    [Fr(35, 384), Fr(0), Fr(500, 1113), Fr(125, 192), Fr(-2187, 6784), Fr(11, 84)],
]
_B5 = [Fr(35, 384), Fr(0), Fr(500, 1113), Fr(125, 192), Fr(-2187, 6784), Fr(11, 84), Fr(0)]
_B4 = [Fr(5179, 57600), Fr(0), Fr(7571, 16695), Fr(393, 640), Fr(-92097, 339200), Fr(187, 2100), Fr(1, 40)]
_E = [b5 - b4 for b5, b4 in zip(_B5, _B4)]


def _tableau(extended: bool):
    conv = (lambda q: mpmath.mpf(q.numerator) / q.denominator) if extended else float
    return (
        [conv(c) for c in _C],
        [[conv(a) for a in row] for row in _A],
        [conv(b) for b in _B5],
        [conv(e) for e in _E],
    )


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Line:
    z_from: complex
    z_to: complex

    @property
    def length(self) -> float:
        return abs(complex(self.z_to) - complex(self.z_from))

    def point(self, s):
        z0, z1 = complex(self.z_from), complex(self.z_to)
        return z0 + (z1 - z0) * (s / self.length)

    def velocity(self, s):
        z0, z1 = complex(self.z_from), complex(self.z_to)
        return (z1 - z0) / self.length

    def reversed(self) -> "Line":
        return Line(self.z_to, self.z_from)

    @property
    def start(self) -> complex:
        return complex(self.z_from)

    @property
    def end(self) -> complex:
        return complex(self.z_to)


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius * exp(i theta)``, theta from ``angle_from`` to ``angle_to``."""

    center: complex
    radius: float
    angle_from: float
    angle_to: float
    orientation: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError("arc radius must be positive")
        if self.orientation not in (1, -1):
            raise PreconditionError("arc orientation must be +1 or -1")
        sweep = self.angle_to - self.angle_from
        if sweep == 0 or (sweep > 0) != (self.orientation > 0):
            raise PreconditionError("arc orientation disagrees with its angle range")

    @property
    def length(self) -> float:
        return self.radius * abs(self.angle_to - self.angle_from)

    def _theta(self, s):
        return self.angle_from + self.orientation * s / self.radius

    def point(self, s):
        if isinstance(s, mpmath.mpf):
            return mpmath.mpc(self.center) + self.radius * mpmath.expj(self._theta(s))
        return complex(self.center) + self.radius * cmath.exp(1j * self._theta(s))

    def velocity(self, s):
        if isinstance(s, mpmath.mpf):
            return 1j * self.orientation * mpmath.expj(self._theta(s))
        return 1j * self.orientation * cmath.exp(1j * self._theta(s))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.angle_to, self.angle_from, -self.orientation)

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(self.length))


@dataclass(frozen=True)
class TimePath:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise PreconditionError("time path needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            if abs(a.end - b.start) > 1e-14 * max(1.0, abs(a.end)):
                raise PreconditionError(f"path segments are not contiguous at {a.end} -> {b.start}")
        total = sum(s.length for s in segs)
        if not (math.isfinite(total) and total > 0):
            raise PreconditionError("path length must be finite and positive")
        object.__setattr__(self, "segments", segs)

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    def reversed(self) -> "TimePath":
        return TimePath(tuple(s.reversed() for s in reversed(self.segments)))

    @classmethod
    def line(cls, z_from, z_to) -> "TimePath":
        return cls((Line(complex(z_from), complex(z_to)),))

    @classmethod
    def circle(cls, radius: float, center: complex = 0j, turns: int = 1) -> "TimePath":
        """Counterclockwise loop starting and ending at ``center + radius``."""
        return cls(tuple(Arc(center, radius, 2 * math.pi * k, 2 * math.pi * (k + 1), 1) for k in range(turns)))


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Integrated samples; ``xs[i]`` is the state at complex time ``ts[i]``."""

    ts: np.ndarray
    xs: np.ndarray
    kind: str | None = None
    model: KirchhoffModel | None = None
    tol: float = 1e-10
    steps: int = 0
    rejected: int = 0
    max_error: float = 0.0
    extended: bool = False
    raw_xs: tuple = field(default=(), repr=False)

    def __len__(self):
        return len(self.ts)

    @property
    def final(self) -> np.ndarray:
        return self.xs[-1]

    def states(self) -> list[PhaseState]:
        if self.kind is None:
            raise PreconditionError("trajectory of a raw system has no phase-space layout")
        return [PhaseState.from_vector(self.kind, x) for x in self.xs]

    def column_names(self) -> list[str]:
        if self.kind is not None:
            return list(COORDS[self.kind])
        return [f"x{i}" for i in range(self.xs.shape[1])]

    def to_csv(self, target=None) -> str:
        """CSV with columns ``t_re, t_im`` then interleaved re/im state coordinates."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["t_re", "t_im"]
        for name in self.column_names():
            header += [f"{name}_re", f"{name}_im"]
        writer.writerow(header)
        for t, x in zip(self.ts, self.xs):
            row = [repr(float(t.real)), repr(float(t.imag))]
            for v in x:
                row += [repr(float(v.real)), repr(float(v.imag))]
            writer.writerow(row)
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _err_norm(err, x_old, x_new, tol):
    scale = [tol * (1 + max(abs(a), abs(b))) for a, b in zip(x_old, x_new)]
    return max(float(abs(e) / s) for e, s in zip(err, scale))


def _finite(x) -> bool:
    if x.dtype == object:
        return all(mpmath.isfinite(v) for v in x)
    return bool(np.all(np.isfinite(x)))


def _hermite(x0, f0, x1, f1, h, theta):
    h00 = (1 + 2 * theta) * (1 - theta) ** 2
    h10 = theta * (1 - theta) ** 2
    h01 = theta**2 * (3 - 2 * theta)
    h11 = theta**2 * (theta - 1)
    return h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1


def integrate_field(
    rhs: Callable,
    x0,
    path: TimePath,
    tol: float = 1e-10,
    *,
    extended: bool = False,
    sample_ds: float | None = None,
    max_steps: int = 2_000_000,
    kind: str | None = None,
    model: KirchhoffModel | None = None,
) -> Trajectory:
    """Integrate ``dx/dt = rhs(t, x)`` along ``path``.

    Local error per accepted step is at most ``tol * (1 + |x|)`` componentwise.
    ``sample_ds`` switches from one sample per accepted step to equally
    spaced arclength samples obtained by cubic Hermite interpolation.
    """
    if not (1e-14 <= tol <= 1e-3):
        raise PreconditionError(f"tol={tol} outside [1e-14, 1e-3]")
    with mpmath.workdps(EXTENDED_DPS if extended else mpmath.mp.dps):
        return _integrate(rhs, x0, path, tol, extended, sample_ds, max_steps, kind, model)


def _integrate(rhs, x0, path, tol, extended, sample_ds, max_steps, kind, model):
    C, A, B5, E = _tableau(extended)
    if extended:
        x = np.array([mpmath.mpc(complex(v)) for v in np.asarray(x0, dtype=complex).reshape(-1)], dtype=object)
    else:
        x = np.array(x0, dtype=complex).reshape(-1)
    h_floor = 1e-12 * path.length
    ts = [complex(path.start)]
    xs = [x.copy()]
    steps = rejected = 0
    max_err = 0.0
    h = None
    for seg in path.segments:
        L = seg.length
        s = mpmath.mpf(0) if extended else 0.0

        def F(s_, x_, seg=seg):
            return rhs(seg.point(s_), x_) * seg.velocity(s_)

        f = F(s, x)
        if h is None:
            d0 = max(float(abs(v)) for v in x) if len(x) else 0.0
            d1 = max(float(abs(v)) for v in f) if len(f) else 0.0
            h = 0.1 * L if d1 < 1e-14 else 0.01 * (1 + d0) / d1
            h = min(max(h, 1e-6 * L), 0.1 * L)
        next_sample = sample_ds
        while L - float(s) > 1e-15 * L:
            h = min(h, L - float(s))
            if h < h_floor:
                raise StepCollapse(f"step {h:.3e} below floor near t = {complex(seg.point(s))}")
            hh = mpmath.mpf(h) if extended else h
            k = [f]
            for i in range(1, 7):
                xi = x + hh * sum(a * kj for a, kj in zip(A[i], k))
                k.append(F(s + C[i] * hh, xi))
            x_new = x + hh * sum(b * kj for b, kj in zip(B5, k))
            err = hh * sum(e * kj for e, kj in zip(E, k))
            if not _finite(x_new):
                if h <= h_floor * 10:
                    raise NonFinite(f"non-finite state near t = {complex(seg.point(s))}")
                h *= 0.2
                rejected += 1
                continue
            en = _err_norm(err, x, x_new, tol)
            if en <= 1.0:
                steps += 1
                max_err = max(max_err, en * tol)
                f_new = k[6]
                s_new = s + hh
                if sample_ds is None:
                    ts.append(complex(seg.point(s_new)))
                    xs.append(x_new.copy())
                else:
                    while next_sample is not None and next_sample < float(s_new) - 1e-15 * L:
                        theta = (next_sample - float(s)) / h
                        if extended:
                            theta = mpmath.mpf(theta)
                        ts.append(complex(seg.point(s + (hh * theta))))
                        xs.append(_hermite(x, f, x_new, f_new, hh, theta))
                        next_sample += sample_ds
                x, f, s = x_new, f_new, s_new
                if steps > max_steps:
                    raise StepCollapse("maximum number of steps exceeded")
            else:
                rejected += 1
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h *= fac
        if sample_ds is not None:
            ts.append(complex(seg.end))
            xs.append(x.copy())
    raw = tuple(xs) if extended else ()
    arr = np.array([[complex(v) for v in row] for row in xs], dtype=complex)
    return Trajectory(
        np.array(ts, dtype=complex), arr, kind, model, tol, steps, rejected, max_err, extended, raw
    )


def integrate(
    model: KirchhoffModel,
    x0,
    path: TimePath,
    tol: float = 1e-10,
    *,
    extended: bool = False,
    sample_ds: float | None = None,
) -> Trajectory:
    """Integrate the Hamiltonian flow of ``model`` along ``path``."""
    vec = _as_vector(x0, model.kind)
    K = model.K
    if extended:
        with mpmath.workdps(EXTENDED_DPS):
            K = np.array([[mpmath.mpc(complex(v)) for v in row] for row in model.K], dtype=object)
    kind = model.kind

    def rhs(t, x):
        return field_vector(K, kind, x)

    return integrate_field(rhs, vec, path, tol, extended=extended, sample_ds=sample_ds, kind=kind, model=model)


@dataclass(frozen=True)
class Drift:
    name: str
    absolute: float
    relative: float
    conserved: bool


def drift_report(traj: Trajectory, observables: Sequence, threshold: float | None = None) -> dict[str, Drift]:
    """Maximum deviation of each observable from its initial value over the samples.

    ``relative`` divides the absolute drift by ``max(1, |F(x0)|)``.  An
    observable counts as conserved when its relative drift stays below
    ``threshold`` (default ``100 * traj.tol``).
    """
    if len(traj) == 0:
        raise PreconditionError("empty trajectory")
    threshold = 100 * traj.tol if threshold is None else threshold
    out = {}
    for obs in observables:
        values = np.array([obs.evaluate(x) for x in traj.xs], dtype=complex)
        dev = float(np.max(np.abs(values - values[0])))
        rel = dev / max(1.0, float(abs(values[0])))
        out[obs.name] = Drift(obs.name, dev, rel, rel <= threshold)
    return out
