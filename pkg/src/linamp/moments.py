"""Exact ordered-product algebra: symmetric products, factorial moments,
number-operator powers, Stirling tables, added-noise numbers, and the
noise-moment input-output relation.

All combinatorial transforms run over exact rationals (Fractions); floating
point enters only when moments of concrete states are taken.  Sequences are
1-based with the 0th element implicitly 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fock import FockOperator, AncillaState

__all__ = [
    "MomentKind",
    "MomentSequence",
    "StirlingTable",
    "stirling_first",
    "stirling_second",
    "sym_product_operator",
    "sym_product_diagonal",
    "added_noise_numbers",
    "number_moments",
    "factorial_moments",
    "ml_from_ak",
    "ak_from_ml",
    "moment_io",
    "coherent_noise_moments",
    "thermal_noise_moments",
    "symmetric_noise_moment",
    "mean_field",
]

_ORDER_GUARD = 64


class MomentKind:
    ADDED_NOISE = "added_noise"
    NUMBER = "number"
    FACTORIAL = "factorial"


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _fraction_to_string(v: Fraction) -> str:
    """Exact decimal string when the denominator is 2^a 5^b, else 'p/q'."""
    q = v.denominator
    two = five = 0
    while q % 2 == 0:
        q //= 2
        two += 1
    while q % 5 == 0:
        q //= 5
        five += 1
    if q != 1:
        return f"{v.numerator}/{v.denominator}"
    shift = max(two, five)
    scaled = v * Fraction(10) ** shift
    digits = str(abs(int(scaled))).rjust(shift + 1, "0")
    sign = "-" if v < 0 else ""
    if shift == 0:
        return sign + digits
    return f"{sign}{digits[:-shift] or '0'}.{digits[-shift:]}"


def _parse_value(text: str):
    try:
        return Fraction(text.strip())
    except ValueError:
        return float(text)


@dataclass(frozen=True)
class MomentSequence:
    """1-based moment list with a declared kind; index 0 (=1) is implicit."""

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in (MomentKind.ADDED_NOISE, MomentKind.NUMBER, MomentKind.FACTORIAL):
            raise ValueError(f"unknown moment kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int):
        """k-th moment, with the implicit 0th element equal to 1."""
        if k == 0:
            return Fraction(1) if self.is_exact else 1.0
        return self.values[k - 1]

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(v) for v in self.values)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def to_json(self) -> str:
        vals = [
            _fraction_to_string(Fraction(v)) if _is_exact(v) else repr(float(v))
            for v in self.values
        ]
        return json.dumps({"kind": self.kind, "K": self.order, "values": vals})

    @classmethod
    def from_json(cls, text: str) -> "MomentSequence":
        doc = json.loads(text)
        vals = [_parse_value(str(v)) for v in doc["values"]]
        return cls(kind=doc["kind"], values=tuple(vals))


# ---------------------------------------------------------------------------
# Stirling numbers
# ---------------------------------------------------------------------------

def stirling_first(k: int) -> list:
    """Signed Stirling numbers of the first kind: row S_k^(l), l = 0..k.

    These are the coefficients of the falling factorial as a polynomial,
    x(x-1)...(x-k+1) = sum_l S_k^(l) x^l.
    """
    if k < 0:
        raise ValueError("order must be nonnegative")
    if k > _ORDER_GUARD:
        raise OverflowError(f"Stirling order {k} beyond guard {_ORDER_GUARD}")
    row = [1]
    for j in range(1, k + 1):
        # p_j(x) = p_(j-1)(x) * (x - j + 1)
        new = [0] * (j + 1)
        for l, c in enumerate(row):
            new[l + 1] += c
            new[l] -= (j - 1) * c
        row = new
    return row


def stirling_second(l: int) -> list:
    """Stirling numbers of the second kind: row S2_l^(k), k = 0..l."""
    if l < 0:
        raise ValueError("order must be nonnegative")
    if l > _ORDER_GUARD:
        raise OverflowError(f"Stirling order {l} beyond guard {_ORDER_GUARD}")
    row = [1]
    for j in range(1, l + 1):
        new = [0] * (j + 1)
        for k, c in enumerate(row):
            new[k] += k * c
            new[k + 1] += c
        row = new
    return row


@dataclass(frozen=True)
class StirlingTable:
    """Triangular table of exact Stirling numbers up to max_order."""

    kind: str                      # "first_signed" | "second"
    max_order: int
    rows: tuple

    @classmethod
    def build(cls, kind: str, max_order: int) -> "StirlingTable":
        if kind == "first_signed":
            rows = tuple(tuple(stirling_first(k)) for k in range(max_order + 1))
        elif kind == "second":
            rows = tuple(tuple(stirling_second(l)) for l in range(max_order + 1))
        else:
            raise ValueError("kind must be first_signed or second")
        return cls(kind=kind, max_order=max_order, rows=rows)

    def entry(self, upper: int, lower: int) -> int:
        if lower > upper:
            return 0
        return self.rows[upper][lower]


# ---------------------------------------------------------------------------
# symmetric products |b|^2k
# ---------------------------------------------------------------------------

def sym_product_diagonal(k: int, n: int) -> Fraction:
    """Exact <n| |b|^2k |n> = (k!/2^k) sum_m C(k,m) 2^m/m! n!/(n-m)!."""
    total = Fraction(0)
    for m in range(0, min(k, n) + 1):
        ff = math.prod(range(n - m + 1, n + 1))   # n!/(n-m)!
        total += Fraction(math.comb(k, m) * 2**m, math.factorial(m)) * ff
    return Fraction(math.factorial(k), 2**k) * total


def sym_product_operator(k: int, dim: int) -> FockOperator:
    """Matrix of the symmetric product |b|^2k (diagonal in the number basis)."""
    if 2 * k >= dim:
        raise ValueError("need 2k < dim")
    diag = [float(sym_product_diagonal(k, n)) for n in range(dim)]
    return FockOperator(np.diag(np.array(diag, dtype=complex)))


def added_noise_numbers(sigma: AncillaState, K: int, dim: int) -> MomentSequence:
    """A_k = <|b|^2k>_sigma for k = 1..K.

    Diagonal sigma with exact weights gives exact Fractions; a float or
    full-matrix sigma gives floats through operator traces.
    """
    if sigma.is_diagonal:
        if len(sigma.weights) > dim:
            tail = sum(abs(float(w)) for w in sigma.weights[dim:])
            if tail > 1e-14:
                warnings.warn(f"ancilla tail mass {tail:.2e} beyond dim={dim} ignored")
        exact = all(_is_exact(w) for w in sigma.weights)
        vals = []
        for k in range(1, K + 1):
            if exact:
                a = sum(Fraction(w) * sym_product_diagonal(k, n)
                        for n, w in enumerate(sigma.weights[:dim]))
                vals.append(a)
            else:
                a = sum(float(w) * float(sym_product_diagonal(k, n))
                        for n, w in enumerate(sigma.weights[:dim]))
                vals.append(a)
        return MomentSequence(kind=MomentKind.ADDED_NOISE, values=tuple(vals))
    dense = sigma.dense(dim)
    vals = []
    for k in range(1, K + 1):
        op = sym_product_operator(k, dim)
        vals.append(float(np.real(np.trace(dense @ op.matrix))))
    return MomentSequence(kind=MomentKind.ADDED_NOISE, values=tuple(vals))


def number_moments(sigma: AncillaState, K: int) -> MomentSequence:
    """M_l = <(b'b)^l>_sigma = sum_n lambda_n n^l, exact for exact weights."""
    if not sigma.is_diagonal:
        raise ValueError("number moments need a diagonal sigma")
    exact = all(_is_exact(w) for w in sigma.weights)
    vals = []
    for l in range(1, K + 1):
        if exact:
            vals.append(sum(Fraction(w) * n**l for n, w in enumerate(sigma.weights)))
        else:
            vals.append(float(sum(float(w) * n**l for n, w in enumerate(sigma.weights))))
    return MomentSequence(kind=MomentKind.NUMBER, values=tuple(vals))


def factorial_moments(sigma: AncillaState, K: int) -> MomentSequence:
    """<(b')^k b^k>_sigma = sum_n lambda_n n!/(n-k)!."""
    if not sigma.is_diagonal:
        raise ValueError("factorial moments need a diagonal sigma")
    exact = all(_is_exact(w) for w in sigma.weights)
    vals = []
    for k in range(1, K + 1):
        terms = [
            (Fraction(w) if exact else float(w)) * math.prod(range(n - k + 1, n + 1))
            for n, w in enumerate(sigma.weights)
            if n >= k
        ]
        zero = Fraction(0) if exact else 0.0
        vals.append(sum(terms, zero))
    return MomentSequence(kind=MomentKind.FACTORIAL, values=tuple(vals))


# ---------------------------------------------------------------------------
# exact transforms between A_k and M_l
# ---------------------------------------------------------------------------

def _ml_from_ak_coeff(l: int, m: int) -> Fraction:
    """Coefficient of A_m in M_l: sum_k (-1/2)^(k-m) k!/m! C(k,m) S2_l^(k)."""
    s2 = stirling_second(l)
    total = Fraction(0)
    for k in range(m, l + 1):
        total += (Fraction(-1, 2) ** (k - m)
                  * Fraction(math.factorial(k), math.factorial(m))
                  * math.comb(k, m) * s2[k])
    return total


def _ak_from_ml_coeff(k: int, l: int) -> Fraction:
    """Coefficient of M_l in A_k: (k!/2^k) sum_m C(k,m) 2^m/m! S1_m^(l)."""
    total = Fraction(0)
    for m in range(l, k + 1):
        s1 = stirling_first(m)
        total += Fraction(math.comb(k, m) * 2**m, math.factorial(m)) * s1[l]
    return Fraction(math.factorial(k), 2**k) * total


def ml_from_ak(a: MomentSequence) -> MomentSequence:
    """Number moments from added-noise numbers (exact Stirling transform)."""
    if a.kind != MomentKind.ADDED_NOISE:
        raise ValueError("expected added-noise numbers")
    exact = a.is_exact
    out = []
    for l in range(1, a.order + 1):
        coeffs = [_ml_from_ak_coeff(l, m) for m in range(0, l + 1)]
        if exact:
            val = sum(c * Fraction(a[m]) for m, c in enumerate(coeffs))
        else:
            val = float(sum(float(c) * float(a[m]) for m, c in enumerate(coeffs)))
        out.append(val)
    return MomentSequence(kind=MomentKind.NUMBER, values=tuple(out))


def ak_from_ml(m: MomentSequence) -> MomentSequence:
    """Added-noise numbers from number moments (exact Stirling transform)."""
    if m.kind != MomentKind.NUMBER:
        raise ValueError("expected number moments")
    exact = m.is_exact
    out = []
    for k in range(1, m.order + 1):
        coeffs = [_ak_from_ml_coeff(k, l) for l in range(0, k + 1)]
        if exact:
            val = sum(c * Fraction(m[l]) for l, c in enumerate(coeffs))
        else:
            val = float(sum(float(c) * float(m[l]) for l, c in enumerate(coeffs)))
        out.append(val)
    return MomentSequence(kind=MomentKind.ADDED_NOISE, values=tuple(out))


# ---------------------------------------------------------------------------
# noise-moment input-output relation
# ---------------------------------------------------------------------------

def coherent_noise_moments(K: int) -> MomentSequence:
    """Symmetric noise moments of a coherent state: <|da|^2k> = k!/2^k."""
    vals = tuple(Fraction(math.factorial(k), 2**k) for k in range(1, K + 1))
    return MomentSequence(kind=MomentKind.ADDED_NOISE, values=vals)


def thermal_noise_moments(nbar, K: int) -> MomentSequence:
    """Symmetric noise moments of a thermal state: k!(nbar + 1/2)^k."""
    if _is_exact(nbar):
        base = Fraction(nbar) + Fraction(1, 2)
        vals = tuple(math.factorial(k) * base**k for k in range(1, K + 1))
    else:
        vals = tuple(math.factorial(k) * (float(nbar) + 0.5) ** k for k in range(1, K + 1))
    return MomentSequence(kind=MomentKind.ADDED_NOISE, values=vals)


def moment_io(input_moments: MomentSequence, a: MomentSequence, g, K: int) -> MomentSequence:
    """Output symmetric noise moments of the amplifier channel.

    <|da_out|^2k> = sum_m C(k,m)^2 g^(2(k-m)) (g^2-1)^m <|da_in|^2(k-m)> A_m.
    Both phase-insensitive inputs are indexed with the implicit 0th moment 1.
    """
    if input_moments.kind != MomentKind.ADDED_NOISE:
        raise ValueError("input moments must be symmetric noise moments (added_noise kind)")
    if a.kind != MomentKind.ADDED_NOISE:
        raise ValueError("A must be added-noise numbers")
    exact = input_moments.is_exact and a.is_exact and _is_exact(g)
    g2 = (Fraction(g) ** 2) if exact else float(g) ** 2
    out = []
    for k in range(1, K + 1):
        if exact:
            total = Fraction(0)
            for m in range(0, k + 1):
                total += (Fraction(math.comb(k, m)) ** 2 * g2 ** (k - m)
                          * (g2 - 1) ** m * Fraction(input_moments[k - m]) * Fraction(a[m]))
        else:
            total = 0.0
            for m in range(0, k + 1):
                total += (math.comb(k, m) ** 2 * g2 ** (k - m) * (g2 - 1.0) ** m
                          * float(input_moments[k - m]) * float(a[m]))
        out.append(total)
    return MomentSequence(kind=MomentKind.ADDED_NOISE, values=tuple(out))


# ---------------------------------------------------------------------------
# direct state expectations
# ---------------------------------------------------------------------------

def mean_field(state: FockOperator) -> complex:
    dim = state.dim
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    return complex(np.trace(state.matrix @ a))


def symmetric_noise_moment(state: FockOperator, k: int) -> float:
    """<|d a|^2k> computed directly on a state.

    Uses the normal-ordered expansion of the symmetric product applied to the
    displaced operator da = a - <a> (which keeps [da, da'] = 1).
    """
    dim = state.dim
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    da = a - np.trace(state.matrix @ a) * np.eye(dim)
    acc = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim, dtype=complex)          # da^m
    for m in range(0, k + 1):
        if m > 0:
            power = da @ power
        coeff = float(Fraction(math.comb(k, m) * 2**m, math.factorial(m)))
        acc += coeff * (power.conj().T @ power)
    acc *= float(Fraction(math.factorial(k), 2**k))
    return float(np.real(np.trace(state.matrix @ acc)))
