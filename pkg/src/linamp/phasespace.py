"""s-ordered characteristic functions, quasidistributions, and added-noise functions.

Conventions, fixed once and asserted by tests:

    Phi^(s)(beta) = tr(rho D(beta)) e^(s|beta|^2/2)
    W^(s)(alpha)  = (1/pi^2) int d2beta Phi^(s)(beta) e^(alpha beta* - alpha* beta)
    d2beta        = dbeta_R dbeta_I

The forward grid transform maps samples on a beta grid to samples on the
Fourier-dual alpha grid (spacing pi/2B, same step count); the inverse maps
back exactly.  Added-noise functions follow the ancilla-state correspondence

    tildePi^(s)(beta) = Phi_sigma^(s)(sqrt(g^2-1) beta*)
    Pi^(s)(alpha)     = W_sigma^(s)(-alpha*/sqrt(g^2-1)) / (g^2-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ExtentMismatchError
from .fock import FockOperator, AncillaState, laguerre

__all__ = [
    "SOrder",
    "NORMAL",
    "SYMMETRIC",
    "ANTINORMAL",
    "PhaseGrid",
    "PhaseFunction",
    "char_fn",
    "quasidist",
    "added_noise_char",
    "added_noise_fn",
    "char_to_quasi",
    "quasi_to_char",
    "state_from_char",
]


@dataclass(frozen=True)
class SOrder:
    """Operator-ordering parameter: +1 normal, 0 symmetric, -1 antinormal."""

    s: float

    def __post_init__(self):
        if not -1.0 <= self.s <= 1.0:
            raise ValueError("s must lie in [-1, +1]")


NORMAL = SOrder(+1.0)
SYMMETRIC = SOrder(0.0)
ANTINORMAL = SOrder(-1.0)


def _s_of(order) -> float:
    return order.s if isinstance(order, SOrder) else float(order)


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform square sampling of the phase plane.

    Points run over b_j = -extent + j*spacing, j = 0..steps-1, on both axes,
    so the origin is a sample (steps is even) and the quadrature weights
    spacing^2 sum to (2*extent)^2.  The measure convention d2beta =
    dbeta_R dbeta_I is part of the type.
    """

    extent: float
    steps: int
    convention: str = "d2 = dRe dIm"

    def __post_init__(self):
        if self.extent <= 0:
            raise ValueError("extent must be positive")
        if self.steps % 2 or self.steps < 4:
            raise ValueError("steps must be even and at least 4")

    @classmethod
    def default(cls) -> "PhaseGrid":
        return cls(extent=6.0, steps=256)

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.steps

    @property
    def weight(self) -> float:
        return self.spacing**2

    def axis(self) -> np.ndarray:
        return -self.extent + self.spacing * np.arange(self.steps)

    def mesh(self) -> np.ndarray:
        """Complex samples; index [i, j] is axis[i] + 1i*axis[j]."""
        ax = self.axis()
        return ax[:, None] + 1j * ax[None, :]

    def dual(self) -> "PhaseGrid":
        """Fourier-conjugate grid (an involution: g.dual().dual() == g)."""
        dual_spacing = math.pi / (2.0 * self.extent)
        return PhaseGrid(extent=0.5 * self.steps * dual_spacing, steps=self.steps,
                         convention=self.convention)


@dataclass(frozen=True)
class PhaseFunction:
    """Sampled characteristic function or quasidistribution on a PhaseGrid."""

    grid: PhaseGrid
    values: np.ndarray
    kind: str                      # "characteristic" | "quasidistribution"
    order: SOrder
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.steps
        if v.shape != (n, n):
            raise ValueError("values must be steps x steps")
        object.__setattr__(self, "values", v)
        if self.kind not in ("characteristic", "quasidistribution"):
            raise ValueError("kind must be characteristic or quasidistribution")

    def value_at_origin(self) -> complex:
        h = self.grid.steps // 2
        return complex(self.values[h, h])

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.grid.weight)

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at complex points inside the grid."""
        pts = np.asarray(points, dtype=complex)
        x = (pts.real + self.grid.extent) / self.grid.spacing
        y = (pts.imag + self.grid.extent) / self.grid.spacing
        n = self.grid.steps
        if np.any(x < -1e-9) or np.any(y < -1e-9) or np.any(x > n - 1 + 1e-9) or np.any(y > n - 1 + 1e-9):
            raise ExtentMismatchError("requested points exceed the sampled grid")
        x = np.clip(x, 0.0, n - 1.0)
        y = np.clip(y, 0.0, n - 1.0)
        i0 = np.clip(np.floor(x).astype(int), 0, n - 2)
        j0 = np.clip(np.floor(y).astype(int), 0, n - 2)
        fx = x - i0
        fy = y - j0
        v = self.values
        return ((1 - fx) * (1 - fy) * v[i0, j0] + fx * (1 - fy) * v[i0 + 1, j0]
                + (1 - fx) * fy * v[i0, j0 + 1] + fx * fy * v[i0 + 1, j0 + 1])

    # -- CSV interface -------------------------------------------------
    def to_csv(self, path) -> None:
        mesh = self.grid.mesh()
        with open(path, "w") as fh:
            fh.write(f"# kind={self.kind}\n")
            fh.write(f"# s={_s_of(self.order)!r}\n")
            fh.write(f"# extent={self.grid.extent!r}\n")
            fh.write(f"# steps={self.grid.steps}\n")
            fh.write(f"# convention={self.grid.convention}\n")
            if self.flags:
                fh.write(f"# flags={';'.join(self.flags)}\n")
            fh.write("alpha_re,alpha_im,value_re,value_im\n")
            for i in range(self.grid.steps):
                for j in range(self.grid.steps):
                    z = mesh[i, j]
                    v = self.values[i, j]
                    fh.write(f"{z.real:.17g},{z.imag:.17g},{v.real:.17g},{v.imag:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "PhaseFunction":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = val.strip()
                elif not line.startswith("alpha_re"):
                    rows.append([float(t) for t in line.split(",")])
        steps = int(meta["steps"])
        grid = PhaseGrid(extent=float(meta["extent"]), steps=steps)
        data = np.asarray(rows)
        values = (data[:, 2] + 1j * data[:, 3]).reshape(steps, steps)
        flags = tuple(t for t in meta.get("flags", "").split(";") if t)
        return cls(grid=grid, values=values, kind=meta["kind"],
                   order=SOrder(float(meta["s"])), flags=flags)


# ---------------------------------------------------------------------------
# displacement expectation values
# ---------------------------------------------------------------------------

def _support_dim(rho: np.ndarray, tol: float = 1e-16) -> int:
    pop = np.abs(np.diag(rho))
    colmax = np.max(np.abs(rho), axis=0)
    keep = np.maximum(pop, colmax) > tol * max(np.max(pop), 1e-300)
    nz = np.nonzero(keep)[0]
    if nz.size == 0:
        return 1
    return min(int(nz[-1]) + 2, rho.shape[0])


def _genlaguerre_seq(d: int, x: np.ndarray, nmax: int):
    """Yield L_n^(d)(x) arrays for n = 0..nmax by the three-term recurrence."""
    prev = np.ones_like(x)
    yield prev
    if nmax == 0:
        return
    cur = 1.0 + d - x
    yield cur
    for n in range(1, nmax):
        prev, cur = cur, ((2 * n + 1 + d - x) * cur - (n + d) * prev) / (n + 1)
        yield cur


def _disp_expect(rho: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """tr(rho D(beta)) vectorized over an array of beta values.

    Uses the closed-form matrix elements
    <n+d|D|n> = sqrt(n!/(n+d)!) beta^d e^(-|beta|^2/2) L_n^(d)(|beta|^2)
    and Hermiticity of rho to fold the lower triangle.
    """
    betas = np.asarray(betas, dtype=complex)
    shape = betas.shape
    b = betas.ravel()
    x = np.abs(b) ** 2
    env = np.exp(-0.5 * x)
    dim = _support_dim(rho)
    out = np.zeros(b.shape, dtype=complex)
    lg = gammaln(np.arange(dim + 1) + 1.0)
    for d in range(dim):
        if d == 0:
            coup = np.diag(rho)[:dim]
        else:
            coup = np.array([rho[n + d, n] for n in range(dim - d)])
        if not np.any(coup):
            continue
        bd_env = b**d * env
        for n, lag in enumerate(_genlaguerre_seq(d, x, dim - d - 1)):
            c = coup[n]
            if c == 0:
                continue
            ratio = math.exp(0.5 * (lg[n] - lg[n + d]))
            dmn = ratio * bd_env * lag            # <n+d|D(b)|n>
            if d == 0:
                out += c.real * dmn
            else:
                # rho[n,n+d] D[n+d,n] + rho[n+d,n] D[n,n+d]
                w = np.conj(c) * dmn
                out += w + (-1.0) ** d * np.conj(w)
    return out.reshape(shape)


def char_fn(state: FockOperator, order, beta):
    """s-ordered characteristic function tr(rho D(beta)) e^(s|beta|^2/2)."""
    s = _s_of(order)
    betas = np.asarray(beta, dtype=complex)
    vals = _disp_expect(state.matrix, betas) * np.exp(0.5 * s * np.abs(betas) ** 2)
    if vals.ndim == 0:
        return complex(vals)
    return vals


# ---------------------------------------------------------------------------
# grid Fourier transforms
# ---------------------------------------------------------------------------

def _alternating(n: int) -> np.ndarray:
    return (-1.0) ** np.arange(n)


def char_to_quasi(pf: PhaseFunction) -> PhaseFunction:
    """W(alpha) = (1/pi^2) int d2beta Phi(beta) e^(alpha beta* - alpha* beta).

    Input samples live on pf.grid (beta plane); output samples live on
    pf.grid.dual() (alpha plane).  With beta = bR + i bI and alpha = p + i q
    the kernel is e^(2i(q bR - p bI)), which the FFT pair below implements
    exactly on the dual grid.
    """
    if pf.kind != "characteristic":
        raise ValueError("char_to_quasi expects a characteristic function")
    n = pf.grid.steps
    h = pf.grid.spacing
    sgn = _alternating(n)
    pre = pf.values * sgn[:, None] * sgn[None, :]
    t = np.fft.ifft(pre, axis=0) * n      # over bR -> index u (q axis)
    t = np.fft.fft(t, axis=1)             # over bI -> index v (p axis)
    t = t * sgn[:, None] * sgn[None, :]
    w = (h * h / math.pi**2) * t.T        # reorder to [p index, q index]
    flags = pf.flags
    return PhaseFunction(grid=pf.grid.dual(), values=w, kind="quasidistribution",
                         order=pf.order, flags=flags)


def quasi_to_char(pf: PhaseFunction) -> PhaseFunction:
    """Exact inverse of char_to_quasi (quadrature of the inverse kernel)."""
    if pf.kind != "quasidistribution":
        raise ValueError("quasi_to_char expects a quasidistribution")
    n = pf.grid.steps
    dual = pf.grid.dual()
    sgn = _alternating(n)
    t = pf.values.T / (dual.spacing**2 / math.pi**2)
    t = t * sgn[:, None] * sgn[None, :]
    t = np.fft.ifft(t, axis=1)
    t = np.fft.fft(t, axis=0) / n
    phi = t * sgn[:, None] * sgn[None, :]
    return PhaseFunction(grid=dual, values=phi, kind="characteristic",
                         order=pf.order, flags=pf.flags)


def char_function(state: FockOperator, order, grid: PhaseGrid,
                  boundary_tol: float = 1e-10) -> PhaseFunction:
    """Characteristic function sampled on a grid, flagged if its tail has not
    decayed below `boundary_tol` at the boundary."""
    phi = char_fn(state, order, grid.mesh())
    edge = max(np.max(np.abs(phi[0, :])), np.max(np.abs(phi[-1, :])),
               np.max(np.abs(phi[:, 0])), np.max(np.abs(phi[:, -1])))
    flags = ("distributional: unconverged tail",) if edge > boundary_tol else ()
    return PhaseFunction(grid=grid, values=phi, kind="characteristic",
                         order=SOrder(_s_of(order)), flags=flags)


def quasidist(state: FockOperator, order, grid: PhaseGrid,
              boundary_tol: float = 1e-10) -> PhaseFunction:
    """s-ordered quasidistribution as the grid Fourier transform of char_fn.

    `grid` samples the characteristic function; the result lives on
    grid.dual().  When the characteristic function has not decayed below
    `boundary_tol` at the grid boundary (P functions of nonclassical states),
    the result is still returned but flagged distributional.
    """
    return char_to_quasi(char_function(state, order, grid, boundary_tol))


# ---------------------------------------------------------------------------
# added-noise functions
# ---------------------------------------------------------------------------

def _sigma_char_sym_arg(sigma: AncillaState, z: np.ndarray, s: float) -> np.ndarray:
    """Phi_sigma^(s)(z) for the ancilla state, vectorized over z."""
    z = np.asarray(z, dtype=complex)
    x = np.abs(z) ** 2
    if sigma.is_diagonal:
        w = sigma.weights_float()
        acc = np.zeros(z.shape, dtype=float)
        for nlev, wn in enumerate(w):
            if wn == 0.0:
                continue
            acc = acc + wn * laguerre(nlev, x)
        return acc * np.exp(0.5 * (s - 1.0) * x)
    return _disp_expect(sigma.matrix, z) * np.exp(0.5 * s * x)


def added_noise_char(sigma: AncillaState, g: float, order, beta):
    """tildePi^(s)(beta) = Phi_sigma^(s)(sqrt(g^2-1) beta*).

    Degenerate g = 1 carries no added noise and returns 1 identically.
    """
    s = _s_of(order)
    betas = np.asarray(beta, dtype=complex)
    if g < 1.0:
        raise ValueError("gain must satisfy g >= 1")
    if g == 1.0:
        ones = np.ones(betas.shape, dtype=complex)
        return complex(ones) if ones.ndim == 0 else ones
    z = math.sqrt(g * g - 1.0) * np.conj(betas)
    vals = _sigma_char_sym_arg(sigma, z, s)
    vals = np.asarray(vals, dtype=complex)
    if vals.ndim == 0:
        return complex(vals)
    return vals


def _number_quasi(nlev: int, s: float, x: np.ndarray) -> np.ndarray:
    """W_n^(s) at squared radius x = |z|^2 (real-valued for every s < 1)."""
    if s >= 1.0:
        raise ValueError("P function of a number state is distributional")
    if s == -1.0:
        # Husimi Q of |n>: e^-x x^n / (pi n!)
        return np.power(x, nlev) * np.exp(-x) / (math.pi * math.factorial(nlev))
    pref = 2.0 / (math.pi * (1.0 - s)) * ((s + 1.0) / (s - 1.0)) ** nlev
    return pref * np.exp(-2.0 * x / (1.0 - s)) * laguerre(nlev, 4.0 * x / (1.0 - s * s))


def sigma_quasi_values(sigma: AncillaState, s: float, z: np.ndarray) -> np.ndarray:
    """W_sigma^(s)(z) for a diagonal sigma by the number-state series."""
    x = np.abs(np.asarray(z, dtype=complex)) ** 2
    w = sigma.weights_float()
    acc = np.zeros(x.shape, dtype=float)
    for nlev, wn in enumerate(w):
        if wn == 0.0:
            continue
        acc = acc + wn * _number_quasi(nlev, s, x)
    return acc


def added_noise_fn(sigma: AncillaState, g: float, order, grid: PhaseGrid) -> PhaseFunction:
    """Pi^(s)(alpha) = W_sigma^(s)(-alpha*/sqrt(g^2-1)) / (g^2-1) on `grid`.

    Diagonal sigma uses the number-state series directly; a full-matrix sigma
    goes through the grid Fourier transform of the added-noise characteristic
    function sampled on grid.dual().
    """
    s = _s_of(order)
    if g <= 1.0:
        raise ValueError("added-noise function needs g > 1")
    if sigma.is_diagonal:
        c2 = g * g - 1.0
        z = -np.conj(grid.mesh()) / math.sqrt(c2)
        vals = sigma_quasi_values(sigma, s, z) / c2
        flags = ()
        w = sigma.weights_float()
        if w.size > 1 and abs(w[-1]) > 1e-12:
            flags = ("series tail: sigma weights end above tolerance",)
        return PhaseFunction(grid=grid, values=vals.astype(complex),
                             kind="quasidistribution", order=SOrder(s), flags=flags)
    beta_grid = grid.dual()
    tp = added_noise_char(sigma, g, order, beta_grid.mesh())
    pf = PhaseFunction(grid=beta_grid, values=tp, kind="characteristic", order=SOrder(s))
    return char_to_quasi(pf)


# ---------------------------------------------------------------------------
# state reconstruction from characteristic samples
# ---------------------------------------------------------------------------

def state_from_char(pf: PhaseFunction, dim: int) -> FockOperator:
    """rho = int d2beta/pi Phi^(0)(beta) D'(beta), quadrature on pf.grid.

    Works for any s by first removing the ordering factor.  Matrix elements
    of D are evaluated in closed form, so no operator exponentials appear.
    """
    if pf.kind != "characteristic":
        raise ValueError("state_from_char expects a characteristic function")
    s = _s_of(pf.order)
    mesh = pf.grid.mesh()
    b = mesh.ravel()
    x = np.abs(b) ** 2
    phi0 = pf.values.ravel() * np.exp(-0.5 * s * x)
    wgt = pf.grid.weight / math.pi
    env = np.exp(-0.5 * x)
    lg = gammaln(np.arange(dim + 1) + 1.0)
    rho = np.zeros((dim, dim), dtype=complex)
    # rho[m, n] = sum w Phi(b) conj(<n|D(b)|m>), with <n|D|n+d> = (-1)^d conj(<n+d|D|n>)
    for d in range(dim):
        bd_env = b**d * env
        for n, lag in enumerate(_genlaguerre_seq(d, x, dim - d - 1)):
            ratio = math.exp(0.5 * (lg[n] - lg[n + d]))
            dmn = ratio * bd_env * lag                           # <n+d|D(b)|n>
            rho[n, n + d] = wgt * np.sum(phi0 * np.conj(dmn))
            if d:
                rho[n + d, n] = wgt * np.sum(phi0 * (-1.0) ** d * dmn)
    return FockOperator(rho)
