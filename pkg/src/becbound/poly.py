"""Polynomials in the erasure probability with a degree cap."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

DEFAULT_CAP = 32
LEADING_TOL = 1e-9


class CapMismatch(ValueError):
    pass


class LeadingTerm(NamedTuple):
    order: float  # math.inf for the zero polynomial
    multiplicity: float


class UnknownBeyond(NamedTuple):
    """Every coefficient up to ``cap`` vanished but higher degrees were dropped."""

    cap: int

    def __str__(self):
        return f"unknown beyond {self.cap}"


class TruncatedPoly:
    """Dense real coefficients for degrees 0..cap.

    Products that spill past ``cap`` are truncated and set ``truncated``;
    evaluation of a truncated polynomial is only exact below degree ``cap``.
    """

    __slots__ = ("coeffs", "cap", "truncated")

    def __init__(self, coeffs: Sequence[float] = (), cap: int = DEFAULT_CAP, truncated: bool = False):
        c = np.asarray(coeffs, dtype=float).ravel()
        if cap < 0:
            raise ValueError("cap must be non-negative")
        if len(c) > cap + 1:
            if np.any(c[cap + 1:] != 0):
                truncated = True
            c = c[:cap + 1]
        self.coeffs = _trim(c)
        self.cap = cap
        self.truncated = bool(truncated)

    @classmethod
    def constant(cls, value: float, cap: int = DEFAULT_CAP) -> "TruncatedPoly":
        return cls([value], cap)

    @classmethod
    def eps(cls, cap: int = DEFAULT_CAP) -> "TruncatedPoly":
        return cls([0.0, 1.0], cap)

    @classmethod
    def monomial(cls, degree: int, coeff: float = 1.0, cap: int = DEFAULT_CAP) -> "TruncatedPoly":
        if degree > cap:
            return cls([], cap, truncated=coeff != 0)
        c = np.zeros(degree + 1)
        c[degree] = coeff
        return cls(c, cap)

    @classmethod
    def bernoulli_weight(cls, ones: int, zeros: int, cap: int = DEFAULT_CAP) -> "TruncatedPoly":
        """eps**ones * (1 - eps)**zeros."""
        c = np.zeros(ones + zeros + 1)
        for k in range(zeros + 1):
            c[ones + k] = math.comb(zeros, k) * (-1) ** k
        return cls(c, cap)

    def _same_cap(self, other: "TruncatedPoly"):
        if other.cap != self.cap:
            raise CapMismatch(f"cap mismatch: {self.cap} vs {other.cap}")

    def _coerce(self, other) -> "TruncatedPoly":
        if isinstance(other, TruncatedPoly):
            self._same_cap(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return TruncatedPoly.constant(float(other), self.cap)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedPoly(_padd(self.coeffs, other.coeffs), self.cap,
                             self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPoly(-self.coeffs, self.cap, self.truncated)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        c, spilled = _pmul(self.coeffs, other.coeffs, self.cap)
        return TruncatedPoly(c, self.cap, self.truncated or other.truncated or spilled)

    __rmul__ = __mul__

    def scale(self, c: float) -> "TruncatedPoly":
        return TruncatedPoly(self.coeffs * float(c), self.cap, self.truncated)

    def or_combine(self, other: "TruncatedPoly") -> "TruncatedPoly":
        """p + q - p*q: OR of independent events (an upper bound under positive correlation)."""
        return self + other - self * other

    def __eq__(self, other):
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        return (self.cap == other.cap and self.truncated == other.truncated
                and np.array_equal(self.coeffs, other.coeffs))

    def allclose(self, other: "TruncatedPoly", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        a, b = self.coeffs, other.coeffs
        k = max(len(a), len(b))
        return bool(np.allclose(np.pad(a, (0, k - len(a))), np.pad(b, (0, k - len(b))),
                                rtol=rtol, atol=atol))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, eps):
        """Horner evaluation; accepts a scalar or an array of probabilities."""
        e = np.asarray(eps, dtype=float)
        if np.any((e < 0) | (e > 1)) or np.any(np.isnan(e)):
            raise ValueError("erasure probability must lie in [0, 1]")
        out = np.zeros_like(e)
        for c in self.coeffs[::-1]:
            out = out * e + c
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def leading_term(self, tol: float = LEADING_TOL) -> LeadingTerm | UnknownBeyond:
        c = self.coeffs
        scale = float(np.max(np.abs(c))) if len(c) else 0.0
        if scale > 0:
            nz = np.flatnonzero(np.abs(c) > tol * scale)
            if len(nz):
                k = int(nz[0])
                return LeadingTerm(k, float(c[k]))
        if self.truncated:
            return UnknownBeyond(self.cap)
        return LeadingTerm(math.inf, 0.0)

    def to_list(self) -> list[float]:
        return [float(x) for x in self.coeffs]

    def to_dict(self) -> dict:
        return {"coeffs": self.to_list(), "cap": self.cap, "truncated": self.truncated}

    @classmethod
    def from_dict(cls, d: dict) -> "TruncatedPoly":
        return cls(d["coeffs"], d["cap"], d["truncated"])

    def __repr__(self):
        terms = [f"{c:g}*e^{k}" for k, c in enumerate(self.coeffs) if c != 0]
        body = " + ".join(terms) or "0"
        return f"TruncatedPoly({body}{', truncated' if self.truncated else ''})"


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1].copy() if len(nz) else np.zeros(0)


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return out


def _pmul(a: np.ndarray, b: np.ndarray, cap: int) -> tuple[np.ndarray, bool]:
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0), False
    c = np.convolve(a, b)
    if len(c) > cap + 1:
        spilled = bool(np.any(c[cap + 1:] != 0))
        return c[: cap + 1], spilled
    return c, False


# module-level spellings of the operations

def add(p: TruncatedPoly, q: TruncatedPoly) -> TruncatedPoly:
    p._same_cap(q)
    return p + q


def mul(p: TruncatedPoly, q: TruncatedPoly) -> TruncatedPoly:
    p._same_cap(q)
    return p * q


def scale(p: TruncatedPoly, c: float) -> TruncatedPoly:
    return p.scale(c)


def or_combine(p: TruncatedPoly, q: TruncatedPoly) -> TruncatedPoly:
    p._same_cap(q)
    return p.or_combine(q)


def evaluate(p: TruncatedPoly, eps):
    return p.evaluate(eps)


def leading_term(p: TruncatedPoly, tol: float = LEADING_TOL):
    return p.leading_term(tol)


def from_int_coeffs(coeffs: Sequence[int], cap: int = DEFAULT_CAP) -> TruncatedPoly:
    return TruncatedPoly([float(c) for c in coeffs], cap)
