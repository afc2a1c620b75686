"""Truncated Fock-space operator algebra for a single bosonic mode.

Everything here works on dense complex matrices in the number basis
{|0>, ..., |N-1>}.  The two-mode squeezing channel is applied through the
factored form of the squeeze operator,

    S(r) = g^-(n_a+n_b+1)/2  exp(-c a'b')  exp(c ab)  g^-(n_a+n_b+1)/2,

with g = cosh r and c = sqrt(g^2-1) = sinh r, so the full two-mode generator
is never exponentiated.  Both exponential factors act as shift-and-scale
passes over the number indices; the raising one terminates exactly on the
truncated space and the lowering one is summed to machine precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import TruncationOverflowError

__all__ = [
    "FockOperator",
    "KrausSet",
    "SqueezeParams",
    "AncillaState",
    "laguerre",
    "mode_ops",
    "displacement_matrix",
    "two_mode_squeeze_apply",
    "squeeze_kraus_vacuum",
    "squeeze_kraus_general",
    "apply_kraus",
    "vacuum_state",
    "coherent_vector",
    "coherent_state",
    "number_state",
    "thermal_state",
    "truncation_certificate",
]


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the truncated number basis of one mode."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("FockOperator needs a square matrix")
        if m.shape[0] < 2:
            raise ValueError("truncation dimension must be at least 2")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def expect(self, op: "FockOperator | np.ndarray") -> complex:
        """tr(self . op); for a density matrix this is <op>."""
        other = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
        return complex(np.trace(self.matrix @ other))

    def __matmul__(self, other):
        other = other.matrix if isinstance(other, FockOperator) else other
        return FockOperator(self.matrix @ other)

    def __add__(self, other):
        other = other.matrix if isinstance(other, FockOperator) else other
        return FockOperator(self.matrix + other)

    def __sub__(self, other):
        other = other.matrix if isinstance(other, FockOperator) else other
        return FockOperator(self.matrix - other)

    def __mul__(self, scalar):
        return FockOperator(self.matrix * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class KrausSet:
    """Ordered Kraus decomposition of a channel.

    For a physical ancilla the channel is sum_i E_i rho E_i'.  When the
    ancilla carries negative weights the set is kept with signs in
    ``weights`` (the elements absorb |weight|^(1/2)) and flagged as not
    completely positive; the completeness invariant is waived then.
    """

    elements: tuple
    label: str
    weights: tuple = None
    completely_positive: bool = True

    def __post_init__(self):
        if self.weights is None:
            object.__setattr__(self, "weights", tuple(1.0 for _ in self.elements))

    def completeness_defect(self, interior: int | None = None) -> float:
        """Max column norm of sum_i s_i E_i' E_i - 1 on the first `interior` levels."""
        dim = self.elements[0].dim
        acc = np.zeros((dim, dim), dtype=complex)
        for s, e in zip(self.weights, self.elements):
            acc += s * (e.matrix.conj().T @ e.matrix)
        acc -= np.eye(dim)
        if interior is None:
            interior = dim
        cols = acc[:, :interior]
        return float(np.max(np.linalg.norm(cols, axis=0)))


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze parameter r and amplitude gain g = cosh r."""

    r: float
    g: float

    @classmethod
    def from_gain(cls, g: float) -> "SqueezeParams":
        if g < 1.0:
            raise ValueError("gain must satisfy g >= 1")
        return cls(r=float(np.arccosh(g)), g=float(g))

    @classmethod
    def from_r(cls, r: float) -> "SqueezeParams":
        return cls(r=float(r), g=float(np.cosh(r)))

    def __post_init__(self):
        if self.g < 1.0:
            raise ValueError("gain must satisfy g >= 1")
        if not np.isclose(np.cosh(self.r), self.g, rtol=1e-12, atol=1e-12):
            raise ValueError("g = cosh r violated")

    @property
    def c(self) -> float:
        """sinh r = sqrt(g^2 - 1), the off-diagonal coupling."""
        return math.sqrt(max(self.g * self.g - 1.0, 0.0))


class AncillaState:
    """Ancilla "state" sigma: diagonal weights or a full Hermitian matrix.

    Physicality is deliberately not assumed; negative diagonal weights are
    accepted so unphysical amplifiers can be explored.  Diagonal weights may
    be exact (int/Fraction) so the moment machinery can stay exact.
    """

    def __init__(self, weights=None, matrix=None):
        if (weights is None) == (matrix is None):
            raise ValueError("give exactly one of weights or matrix")
        if weights is not None:
            self.weights = tuple(weights)
            self.matrix = None
        else:
            m = np.asarray(matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("sigma matrix must be square")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise ValueError("sigma must be Hermitian")
            self.weights = None
            self.matrix = m

    # -- constructors -------------------------------------------------
    @classmethod
    def diagonal(cls, weights) -> "AncillaState":
        return cls(weights=weights)

    @classmethod
    def vacuum(cls) -> "AncillaState":
        return cls(weights=(1,))

    @classmethod
    def number(cls, n: int) -> "AncillaState":
        return cls(weights=(0,) * n + (1,))

    @classmethod
    def thermal(cls, nbar: float, cutoff: int = 80) -> "AncillaState":
        p = nbar / (1.0 + nbar)
        w = [(1.0 - p) * p**n for n in range(cutoff)]
        return cls(weights=w)

    @classmethod
    def from_matrix(cls, matrix) -> "AncillaState":
        return cls(matrix=matrix)

    # -- queries ------------------------------------------------------
    @property
    def is_diagonal(self) -> bool:
        return self.weights is not None

    @property
    def levels(self) -> int:
        return len(self.weights) if self.is_diagonal else self.matrix.shape[0]

    def trace(self) -> float:
        if self.is_diagonal:
            return float(sum(float(w) for w in self.weights))
        return float(np.trace(self.matrix).real)

    def weights_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights], dtype=float)

    def mean_quanta(self) -> float:
        if self.is_diagonal:
            return float(sum(n * float(w) for n, w in enumerate(self.weights)))
        n = np.arange(self.matrix.shape[0])
        return float(np.real(np.sum(n * np.diag(self.matrix))))

    def dense(self, dim: int) -> np.ndarray:
        """Embed sigma as a dim x dim density matrix."""
        out = np.zeros((dim, dim), dtype=complex)
        if self.is_diagonal:
            w = self.weights_float()
            if len(w) > dim and np.max(np.abs(w[dim:])) > 1e-14:
                warnings.warn("ancilla weights truncated at dim with non-negligible tail")
            k = min(len(w), dim)
            out[:k, :k] = np.diag(w[:k])
        else:
            k = min(self.matrix.shape[0], dim)
            out[:k, :k] = self.matrix[:k, :k]
        return out


# ---------------------------------------------------------------------------
# special functions and basic operators
# ---------------------------------------------------------------------------

def laguerre(n: int, x):
    """Laguerre polynomial L_n(x) by the upward three-term recurrence.

    Stable for the x >= 0 arguments that arise here (|beta|^2).  Accepts
    scalars or arrays in x.
    """
    if n < 0 or n != int(n):
        raise ValueError("n must be a nonnegative integer")
    if n > 200:
        raise ValueError("n beyond the supported range (n <= 200)")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def mode_ops(dim: int):
    """Annihilation, creation, and number operators at truncation dim."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    adag = a.conj().T
    num = adag @ a
    return FockOperator(a), FockOperator(adag), FockOperator(num)


def displacement_matrix(alpha: complex, dim: int, unitarity_tol: float = 1e-10) -> FockOperator:
    """D(alpha) = exp(alpha a' - alpha* a) by exponentiating the truncated generator.

    The caller is responsible for keeping the displaced support inside the
    truncation; a warning is emitted when |alpha|^2 exceeds dim/4 or when the
    interior column-norm defect of unitarity exceeds `unitarity_tol`.
    """
    if abs(alpha) ** 2 > dim / 4.0:
        warnings.warn("displacement support may exceed truncation (|alpha|^2 > dim/4)")
    a, adag, _ = mode_ops(dim)
    gen = alpha * adag.matrix - np.conj(alpha) * a.matrix
    d = expm(gen)
    interior = max(dim // 2, 1)
    defect = d.conj().T @ d - np.eye(dim)
    col = float(np.max(np.linalg.norm(defect[:, :interior], axis=0)))
    if col > unitarity_tol:
        warnings.warn(f"displacement unitarity defect {col:.2e} on interior columns")
    return FockOperator(d)


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def vacuum_state(dim: int) -> FockOperator:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return FockOperator(rho)


def coherent_vector(beta: complex, dim: int) -> np.ndarray:
    """Normalized coherent-state amplitudes e^(-|b|^2/2) b^n / sqrt(n!)."""
    n = np.arange(dim)
    logfact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    if beta == 0:
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        return v
    logmag = n * np.log(np.abs(beta)) - 0.5 * logfact - 0.5 * abs(beta) ** 2
    phase = np.exp(1j * n * np.angle(beta))
    return np.exp(logmag) * phase


def coherent_state(beta: complex, dim: int) -> FockOperator:
    v = coherent_vector(beta, dim)
    return FockOperator(np.outer(v, v.conj()))


def number_state(n: int, dim: int) -> FockOperator:
    if n >= dim:
        raise ValueError("number state outside truncation")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return FockOperator(rho)


def thermal_state(nbar: float, dim: int) -> FockOperator:
    p = nbar / (1.0 + nbar)
    w = (1.0 - p) * p ** np.arange(dim)
    return FockOperator(np.diag(w).astype(complex))


def truncation_certificate(state: FockOperator, top_fraction: float = 0.1) -> dict:
    """Trace defect and population of the top levels of a channel output."""
    pop = np.real(np.diag(state.matrix))
    dim = state.dim
    top = max(1, int(math.ceil(top_fraction * dim)))
    return {
        "trace_defect": float(abs(1.0 - np.sum(pop))),
        "top_level_population": float(np.sum(pop[dim - top:])),
        "top_levels": int(top),
    }


# ---------------------------------------------------------------------------
# factored two-mode squeeze machinery
# ---------------------------------------------------------------------------

def _sqrt_ff_table(dim: int, kmax: int) -> list:
    """sqrt((n+k)!/n!) for n = 0..dim-1-k, one array per k."""
    out = [np.ones(dim)]
    for k in range(1, kmax + 1):
        n = np.arange(dim - k, dtype=float)
        out.append(out[k - 1][: dim - k] * np.sqrt(n + k))
    return out


def _pair_lower_exp(t, c, axes):
    """Apply exp(c ab) to the index pair `axes` of tensor t (ket or bra side).

    out[.., n, m, ..] = sum_k c^k/k! sqrt((n+k)!/n! (m+k)!/m!) t[.., n+k, m+k, ..].
    The series runs through the full truncation depth; terms vanish once the
    shifts run off the top of the space.
    """
    da, db = t.shape[axes[0]], t.shape[axes[1]]
    kmax = min(da, db) - 1
    wa = _sqrt_ff_table(da, kmax)
    wb = _sqrt_ff_table(db, kmax)
    out = t.copy()
    coef = 1.0
    for k in range(1, kmax + 1):
        coef *= c / k
        sl = [slice(None)] * t.ndim
        sl[axes[0]] = slice(k, None)
        sl[axes[1]] = slice(k, None)
        term = t[tuple(sl)]
        sh = [1] * t.ndim
        sh[axes[0]] = da - k
        term = term * wa[k].reshape(sh)
        sh = [1] * t.ndim
        sh[axes[1]] = db - k
        term = term * wb[k].reshape(sh)
        dst = [slice(None)] * t.ndim
        dst[axes[0]] = slice(0, da - k)
        dst[axes[1]] = slice(0, db - k)
        out[tuple(dst)] += coef * term
    return out


def _pair_raise_exp(t, c, axes):
    """Apply exp(c a'b') to the index pair `axes` of tensor t.

    out[.., n, m, ..] = sum_k c^k/k! sqrt(n!/(n-k)! m!/(m-k)!) t[.., n-k, m-k, ..].
    Terminates exactly: (a'b')^k vanishes once k reaches the truncation.
    """
    da, db = t.shape[axes[0]], t.shape[axes[1]]
    kmax = min(da, db) - 1
    wa = _sqrt_ff_table(da, kmax)
    wb = _sqrt_ff_table(db, kmax)
    out = t.copy()
    coef = 1.0
    for k in range(1, kmax + 1):
        coef *= c / k
        sl = [slice(None)] * t.ndim
        sl[axes[0]] = slice(0, da - k)
        sl[axes[1]] = slice(0, db - k)
        term = t[tuple(sl)]
        sh = [1] * t.ndim
        sh[axes[0]] = da - k
        term = term * wa[k].reshape(sh)   # weight indexed by target n = src + k
        sh = [1] * t.ndim
        sh[axes[1]] = db - k
        term = term * wb[k].reshape(sh)
        dst = [slice(None)] * t.ndim
        dst[axes[0]] = slice(k, None)
        dst[axes[1]] = slice(k, None)
        out[tuple(dst)] += coef * term
    return out


def _diag_scale(t, g, axes):
    """Multiply by g^-(n_a + n_b + 1)/2 over the index pair `axes`."""
    da, db = t.shape[axes[0]], t.shape[axes[1]]
    ua = g ** (-0.5 * np.arange(da))
    ub = g ** (-0.5 * np.arange(db))
    sh = [1] * t.ndim
    sh[axes[0]] = da
    t = t * ua.reshape(sh)
    sh = [1] * t.ndim
    sh[axes[1]] = db
    t = t * ub.reshape(sh)
    return t * g**-0.5


def two_mode_squeeze_apply(rho_a: FockOperator, sigma: AncillaState, p: SqueezeParams,
                           dims: tuple, defect_tol: float = 1e-6) -> FockOperator:
    """tr_b( S rho (x) sigma S' ) through the factored squeeze operator.

    The joint state lives as a 4-index tensor [n_a, n_b, m_a, m_b]; the four
    factors of S are applied to the ket pair and their adjoints to the bra
    pair, then mode b is traced out.  Raises TruncationOverflowError when the
    output trace defect exceeds `defect_tol`.
    """
    dim_a, dim_b = dims
    if rho_a.dim > dim_a:
        raise ValueError("rho does not fit the requested primary dim")
    rho = np.zeros((dim_a, dim_a), dtype=complex)
    rho[: rho_a.dim, : rho_a.dim] = rho_a.matrix
    sig = sigma.dense(dim_b)

    t = np.einsum("ik,jl->ijkl", rho, sig)   # [n_a, n_b, m_a, m_b]
    c = p.c
    ket, bra = (0, 1), (2, 3)

    t = _diag_scale(_diag_scale(t, p.g, ket), p.g, bra)
    t = _pair_lower_exp(t, c, ket)
    t = _pair_lower_exp(t, c, bra)
    t = _pair_raise_exp(t, -c, ket)
    t = _pair_raise_exp(t, -c, bra)
    t = _diag_scale(_diag_scale(t, p.g, ket), p.g, bra)

    out = np.einsum("injn->ij", t)
    defect = abs(1.0 - float(np.trace(out).real))
    if defect > defect_tol:
        raise TruncationOverflowError(
            f"output trace defect {defect:.3e} exceeds {defect_tol:.1e}; raise dims",
            defect=defect,
        )
    return FockOperator(out)


# ---------------------------------------------------------------------------
# Kraus decompositions
# ---------------------------------------------------------------------------

def squeeze_kraus_vacuum(p: SqueezeParams, n_max: int, dim: int) -> KrausSet:
    """Number-basis Kraus operators of the vacuum-ancilla (ideal) channel.

    A_n = (-1)^n/g (g^2-1)^(n/2)/sqrt(n!) g^-a'a (a')^n, n = 0..n_max.
    """
    g = p.g
    c2 = g * g - 1.0
    damp = g ** (-np.arange(dim, dtype=float))
    logfact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    ops = []
    for n in range(n_max + 1):
        m = np.zeros((dim, dim), dtype=complex)
        if n < dim:
            j = np.arange(dim - n)
            # <j+n| g^-a'a (a')^n |j> = g^-(j+n) sqrt((j+n)!/j!)
            amp = np.exp(0.5 * (logfact[j + n] - logfact[j]))
            pref = (-1.0) ** n / g * c2 ** (n / 2.0) * math.exp(-0.5 * math.lgamma(n + 1))
            m[j + n, j] = pref * damp[j + n] * amp
        ops.append(FockOperator(m))
    return KrausSet(elements=tuple(ops), label="number-basis")


def _squeeze_slice(p: SqueezeParams, m: int, n_levels: int, dim: int) -> np.ndarray:
    """X[i, n, j] = <i| <n|S|m> |j>: partial matrix elements of S over mode b.

    Computed by applying the factored form of S to the tensor
    delta(n_b, m) delta(n_a, j) with the input a-index j left free.
    """
    nb_dim = n_levels + m + 1
    x = np.zeros((dim, nb_dim, dim), dtype=complex)
    x[np.arange(dim), m, np.arange(dim)] = 1.0
    ket = (0, 1)
    x = _diag_scale(x, p.g, ket)
    x = _pair_lower_exp(x, p.c, ket)
    x = _pair_raise_exp(x, -p.c, ket)
    x = _diag_scale(x, p.g, ket)
    return x[:, : n_levels + 1, :]


def squeeze_kraus_general(p: SqueezeParams, sigma: AncillaState, n_max: int, dim: int) -> KrausSet:
    """Kraus elements sqrt(lambda_m) <n|S|m> for a diagonal ancilla.

    Negative weights are accepted (unphysical-amplifier exploration); the
    resulting set carries signs and is flagged non-completely-positive.
    """
    if not sigma.is_diagonal:
        raise ValueError("general Kraus construction needs a diagonal sigma")
    ops, signs = [], []
    cp = True
    for m, w in enumerate(sigma.weights):
        w = float(w)
        if w == 0.0:
            continue
        if w < 0.0:
            cp = False
        x = _squeeze_slice(p, m, n_max, dim)
        root = math.sqrt(abs(w))
        for n in range(n_max + 1):
            ops.append(FockOperator(root * x[:, n, :]))
            signs.append(1.0 if w >= 0 else -1.0)
    return KrausSet(elements=tuple(ops), label="number-basis-general",
                    weights=tuple(signs), completely_positive=cp)


def apply_kraus(kset: KrausSet, rho: FockOperator) -> FockOperator:
    """sum_i s_i E_i rho E_i' (signs only matter for non-CP sets)."""
    dim = kset.elements[0].dim
    r = np.zeros((dim, dim), dtype=complex)
    r[: rho.dim, : rho.dim] = rho.matrix
    out = np.zeros_like(r)
    for s, e in zip(kset.weights, kset.elements):
        out += s * (e.matrix @ r @ e.matrix.conj().T)
    return FockOperator(out)
