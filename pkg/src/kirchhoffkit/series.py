"""Finite log-Laurent series ``sum c[s, m] t**s * ln(t)**m``.

Coefficients may be ints, Fractions or complex numbers.  Rational input
stays rational under every operation, so identities can be checked exactly.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from math import factorial
from numbers import Number

PURGE = 1e-15


def _canon(terms: dict) -> dict:
    return {k: v for k, v in terms.items() if abs(v) > PURGE}


class LogLaurentSeries:
    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for (s, m), c in (terms or {}).items():
            if int(m) < 0:
                raise ValueError("log power must be non-negative")
            key = (int(s), int(m))
            clean[key] = clean.get(key, 0) + c
        self.terms = _canon(clean)

    @classmethod
    def monomial(cls, coef, s: int = 0, m: int = 0) -> "LogLaurentSeries":
        return cls({(s, m): coef})

    @classmethod
    def zero(cls) -> "LogLaurentSeries":
        return cls()

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = _lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LogLaurentSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return LogLaurentSeries({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return LogLaurentSeries({k: v * other for k, v in self.terms.items()})
        return series_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Number):
        if isinstance(other, int):
            other = Fraction(other)
        return self * (1 / other)

    def __eq__(self, other):
        if isinstance(other, Number):
            other = _lift(other)
        if not isinstance(other, LogLaurentSeries):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "LogLaurentSeries(0)"
        parts = [f"({c})*t^{s}*ln^{m}" for (s, m), c in sorted(self.terms.items())]
        return "LogLaurentSeries(" + " + ".join(parts) + ")"

    # queries ----------------------------------------------------------------

    def coef(self, s: int, m: int = 0):
        return self.terms.get((s, m), 0)

    @property
    def max_log(self) -> int:
        return max((m for _, m in self.terms), default=0)

    def has_log(self) -> bool:
        return any(m > 0 for _, m in self.terms)

    def isclose(self, other, tol: float = 1e-12) -> bool:
        diff = self - _lift(other)
        return all(abs(v) <= tol for v in diff.terms.values())

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def diff(self) -> "LogLaurentSeries":
        return series_diff(self)

    def antideriv(self) -> "LogLaurentSeries":
        return series_antideriv(self)

    def evaluate(self, t: complex, log_t: complex | None = None) -> complex:
        """Value at ``t``; ``log_t`` selects a branch of the logarithm (principal by default)."""
        L = cmath.log(t) if log_t is None else log_t
        return sum(complex(c) * t**s * L**m for (s, m), c in self.terms.items())

    def log_shift(self, t: complex, turns: int = 1) -> complex:
        """Jump of the value at ``t`` after continuation ``turns`` times around 0."""
        L = cmath.log(t)
        return self.evaluate(t, L + 2j * cmath.pi * turns) - self.evaluate(t, L)

    def to_triples(self) -> list:
        return [(s, m, [complex(c).real, complex(c).imag]) for (s, m), c in sorted(self.terms.items())]


def _lift(x) -> LogLaurentSeries:
    if isinstance(x, LogLaurentSeries):
        return x
    if isinstance(x, Number):
        return LogLaurentSeries({(0, 0): x})
    raise TypeError(f"cannot convert {type(x).__name__} to LogLaurentSeries")


def series_mul(a: LogLaurentSeries, b: LogLaurentSeries) -> LogLaurentSeries:
    """Cauchy product; exponents and log powers both add."""
    a, b = _lift(a), _lift(b)
    out: dict = {}
    for (s1, m1), c1 in a.terms.items():
        for (s2, m2), c2 in b.terms.items():
            key = (s1 + s2, m1 + m2)
            out[key] = out.get(key, 0) + c1 * c2
    return LogLaurentSeries(out)


def series_diff(a: LogLaurentSeries) -> LogLaurentSeries:
    out: dict = {}
    for (s, m), c in _lift(a).terms.items():
        if s != 0:
            out[(s - 1, m)] = out.get((s - 1, m), 0) + s * c
        if m > 0:
            out[(s - 1, m - 1)] = out.get((s - 1, m - 1), 0) + m * c
    return LogLaurentSeries(out)


def _inv(x):
    return Fraction(1, x) if isinstance(x, int) else 1 / x


def series_antideriv(a: LogLaurentSeries) -> LogLaurentSeries:
    """Termwise antiderivative with zero integration constant.

    ``t^-1 ln^m t`` integrates to ``ln^(m+1) t / (m+1)``; other powers use
    ``int t^s ln^m t = t^(s+1) sum_j (-1)^j m!/(m-j)! ln^(m-j) t / (s+1)^(j+1)``.
    """
    out: dict = {}
    for (s, m), c in _lift(a).terms.items():
        if s == -1:
            key = (0, m + 1)
            out[key] = out.get(key, 0) + c * _inv(m + 1)
            continue
        for j in range(m + 1):
            w = Fraction((-1) ** j * factorial(m) // factorial(m - j), (s + 1) ** (j + 1))
            key = (s + 1, m - j)
            out[key] = out.get(key, 0) + c * w
    return LogLaurentSeries(out)
