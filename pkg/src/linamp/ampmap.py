"""The amplifier channel E = B o A in its equivalent forms.

Forms covered: displacement-basis superoperator action, characteristic-
function input-output, quasidistribution convolution, two-mode-squeeze Kraus
realization, master-equation evolution, and the measurement-based model.
Cross-form equivalence is the module's main test surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExtentMismatchError, TruncationOverflowError
from .fock import (
    FockOperator,
    AncillaState,
    SqueezeParams,
    coherent_vector,
    mode_ops,
    truncation_certificate,
    two_mode_squeeze_apply,
    _squeeze_slice,
)
from .phasespace import (
    PhaseFunction,
    PhaseGrid,
    SOrder,
    _s_of,
    added_noise_char,
    char_fn,
    char_to_quasi,
    quasi_to_char,
)

__all__ = [
    "AmplifierSpec",
    "MasterEqParams",
    "map_A_on_displacement",
    "map_B_on_displacement",
    "char_io",
    "quasidist_io",
    "parametric_apply",
    "master_evolve",
    "measurement_model_apply",
    "arthurs_kelly_weights",
    "mixture_moments",
    "output_variance_from_char",
    "trace_distance",
]


@dataclass(frozen=True)
class AmplifierSpec:
    """Gain g > 1 plus the ancilla state; fully determines the channel."""

    g: float
    sigma: AncillaState

    def __post_init__(self):
        if not self.g > 1.0:
            raise ValueError("amplifier gain must satisfy g > 1")
        if abs(self.sigma.trace() - 1.0) > 1e-9:
            raise ValueError("sigma must have unit trace")

    @property
    def squeeze(self) -> SqueezeParams:
        return SqueezeParams.from_gain(self.g)


@dataclass(frozen=True)
class MasterEqParams:
    """Amplification rate gamma and duration t; g(t) = e^(gamma t / 2)."""

    gamma: float
    t: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @property
    def gain(self) -> float:
        return math.exp(0.5 * self.gamma * self.t)


# ---------------------------------------------------------------------------
# superoperators on the displacement basis
# ---------------------------------------------------------------------------

def map_A_on_displacement(beta: complex, g: float):
    """A(D(beta)) = coeff D(beta/g) with coeff = e^((g^2-1)|beta|^2/2g^2)/g^2."""
    if not g > 1.0:
        raise ValueError("g must exceed 1")
    coeff = math.exp((g * g - 1.0) * abs(beta) ** 2 / (2.0 * g * g)) / (g * g)
    return coeff, beta / g


def map_B_on_displacement(beta: complex, spec: AmplifierSpec) -> complex:
    """Eigenvalue tildePi^(-1)*(beta) by which B scales D(beta)."""
    return complex(np.conj(added_noise_char(spec.sigma, spec.g, SOrder(-1.0), beta)))


# ---------------------------------------------------------------------------
# characteristic-function and quasidistribution I/O
# ---------------------------------------------------------------------------

def char_io(input_char: PhaseFunction, spec: AmplifierSpec, order,
            out_grid: PhaseGrid | None = None) -> PhaseFunction:
    """Phi_out^(s)(beta) = tildePi^(-s)(beta) Phi_in^(s)(g beta).

    With no out_grid the output lives on the input grid shrunk by 1/g (same
    step count), which lands every g*beta exactly on an input node.  A custom
    out_grid resamples the input by bilinear interpolation and fails with an
    extent mismatch when g*beta leaves the input grid.
    """
    if input_char.kind != "characteristic":
        raise ValueError("char_io expects a characteristic-kind input")
    s = _s_of(order)
    if abs(s - _s_of(input_char.order)) > 1e-12:
        raise ValueError("order must match the input samples")
    g = spec.g
    n = input_char.grid.steps
    if out_grid is None:
        out_grid = PhaseGrid(extent=input_char.grid.extent / g, steps=n)
        phi_in_at_g = input_char.values
    else:
        if out_grid.extent * g > input_char.grid.extent + 1e-12:
            raise ExtentMismatchError(
                "g * (output extent) exceeds the input grid; resample the input")
        phi_in_at_g = input_char.interpolate(g * out_grid.mesh())
    tp = added_noise_char(spec.sigma, g, SOrder(-s), out_grid.mesh())
    vals = tp * phi_in_at_g
    return PhaseFunction(grid=out_grid, values=vals, kind="characteristic",
                         order=SOrder(s), flags=input_char.flags)


def quasidist_io(input_qd: PhaseFunction, spec: AmplifierSpec, order) -> PhaseFunction:
    """W_out^(s) = Pi^(-s) * [W_in^(s)(./g)/g^2] via the characteristic domain.

    The convolution is a pointwise product of characteristic samples; the
    output quasidistribution lives on the dual of the gain-shrunk beta grid
    (a wider, coarser alpha grid, as suits an amplified state).
    """
    if input_qd.kind != "quasidistribution":
        raise ValueError("quasidist_io expects a quasidistribution input")
    phi_in = quasi_to_char(input_qd)
    phi_out = char_io(phi_in, spec, order)
    return char_to_quasi(phi_out)


# ---------------------------------------------------------------------------
# parametric (Kraus / two-mode) realization
# ---------------------------------------------------------------------------

def _apply_diagonal_kraus(rho: np.ndarray, p: SqueezeParams, sigma: AncillaState,
                          dim: int, n_max: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    for m, w in enumerate(sigma.weights):
        w = float(w)
        if w == 0.0:
            continue
        x = _squeeze_slice(p, m, n_max, dim)        # [i, n, j] = <i|<n|S|m>|j>
        y = np.einsum("inj,jk->ink", x, rho)
        out += w * np.einsum("ink,lnk->il", y, x.conj())
    return out


def parametric_apply(rho: FockOperator, spec: AmplifierSpec, dims: tuple,
                     defect_tol: float = 1e-6) -> FockOperator:
    """Channel output tr_b(S rho (x) sigma S').

    Diagonal sigma goes through the number-basis Kraus contraction; a full
    matrix sigma through the explicit two-mode factored application.  The
    truncation certificate is enforced: trace defect above `defect_tol`
    raises TruncationOverflowError.
    """
    dim_a, dim_b = dims
    p = spec.squeeze
    r = np.zeros((dim_a, dim_a), dtype=complex)
    r[: rho.dim, : rho.dim] = rho.matrix
    if spec.sigma.is_diagonal:
        out = _apply_diagonal_kraus(r, p, spec.sigma, dim_a, n_max=dim_a - 1)
        defect = abs(1.0 - float(np.trace(out).real))
        if defect > defect_tol:
            raise TruncationOverflowError(
                f"output trace defect {defect:.3e} exceeds {defect_tol:.1e}; raise dim",
                defect=defect)
        return FockOperator(out)
    return two_mode_squeeze_apply(rho, spec.sigma, p, dims, defect_tol=defect_tol)


# ---------------------------------------------------------------------------
# master equation
# ---------------------------------------------------------------------------

def master_evolve(rho: FockOperator, p: MasterEqParams, dim: int,
                  step_tol: float = 1e-9, defect_tol: float = 1e-6) -> FockOperator:
    """Integrate drho/dt = (gamma/2)(2 a'rho a - a a'rho - rho a a').

    Classic fourth-order steps with halving-based error control: each step is
    accepted when the full step and two half steps agree within `step_tol`
    in Frobenius norm.
    """
    a, adag, _ = mode_ops(dim)
    am, adm = a.matrix, adag.matrix
    aad = am @ adm
    gam = p.gamma

    def rhs(r):
        return 0.5 * gam * (2.0 * (adm @ r @ am) - aad @ r - r @ aad)

    def rk4(r, h):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        return r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    r = np.zeros((dim, dim), dtype=complex)
    r[: rho.dim, : rho.dim] = rho.matrix
    t = 0.0
    h = min(0.05 / gam, p.t) if p.t > 0 else 0.0
    min_h = 1e-12 / gam
    while t < p.t - 1e-15:
        h = min(h, p.t - t)
        full = rk4(r, h)
        half = rk4(rk4(r, 0.5 * h), 0.5 * h)
        err = float(np.linalg.norm(full - half))
        if err > step_tol and h > min_h:
            h *= 0.5
            if h < min_h:
                raise TruncationOverflowError("step-size underflow in master_evolve")
            continue
        r = half
        t += h
        if err < step_tol / 32.0:
            h *= 2.0
    defect = abs(1.0 - float(np.trace(r).real))
    if defect > defect_tol:
        raise TruncationOverflowError(
            f"master-equation trace defect {defect:.3e}; raise dim", defect=defect)
    return FockOperator(r)


# ---------------------------------------------------------------------------
# measurement-based model
# ---------------------------------------------------------------------------

def arthurs_kelly_weights(rho: FockOperator, g: float, grid: PhaseGrid) -> np.ndarray:
    """Mixture weights q(alpha) = Q_rho(alpha/g)/g^2 sampled on `grid`.

    Q is evaluated directly as <alpha/g|rho|alpha/g>/pi; the weights are the
    exact integrand of the measurement-based output map.
    """
    pts = (grid.mesh() / g).ravel()
    vecs = _coherent_columns(pts, rho.dim)
    q = np.real(np.einsum("ip,ij,jp->p", vecs.conj(), rho.matrix, vecs)) / math.pi
    return (q / (g * g)).reshape(grid.steps, grid.steps)


def _coherent_columns(pts: np.ndarray, dim: int) -> np.ndarray:
    """Matrix whose columns are coherent-state amplitudes at the given points."""
    n = np.arange(dim)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim)))))
    absb = np.abs(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        logabs = np.where(absb > 0, np.log(np.where(absb > 0, absb, 1.0)), -np.inf)
        logmag = (n[:, None] * logabs[None, :] - 0.5 * logfact[:, None]
                  - 0.5 * absb[None, :] ** 2)
        mags = np.exp(logmag)
    vecs = np.where(np.isfinite(mags), mags, 0.0) \
        * np.exp(1j * n[:, None] * np.angle(pts)[None, :])
    vecs[0, absb == 0] = 1.0
    return vecs


def mixture_moments(q: np.ndarray, grid: PhaseGrid) -> dict:
    """Mean field and symmetric variance of a coherent-state mixture.

    For rho = int q(a) |a><a| the antinormal moments are plain quadratures:
    <a> = int q a, <a'a> = int q |a|^2, and <|da|^2> = <a'a> + 1/2 - |<a>|^2.
    """
    mesh = grid.mesh()
    w = grid.weight
    norm = float(np.sum(q) * w)
    mean = complex(np.sum(q * mesh) * w)
    n_mean = float(np.sum(q * np.abs(mesh) ** 2) * w)
    return {
        "norm": norm,
        "mean_field": mean,
        "mean_quanta": n_mean,
        "sym_variance": n_mean + 0.5 - abs(mean) ** 2,
    }


def measurement_model_apply(rho: FockOperator, g: float, variant: str,
                            grid: PhaseGrid, dim: int,
                            norm_tol: float = 1e-6) -> FockOperator:
    """Output state of the measurement-based amplifier.

    'arthurs_kelly' evaluates E(rho) = int d2a Q_rho(a/g)/g^2 |a><a| on the
    grid; 'ideal' applies the parametric channel with vacuum ancilla, which
    the squeeze choice e^2r = 2(g-1)/(g+1) of the coherent circuit
    reproduces.  A grid too small to hold the mixture fails the
    normalization check.
    """
    if variant == "ideal":
        spec = AmplifierSpec(g=g, sigma=AncillaState.vacuum())
        return parametric_apply(rho, spec, dims=(dim, dim))
    if variant != "arthurs_kelly":
        raise ValueError("variant must be 'arthurs_kelly' or 'ideal'")
    q = arthurs_kelly_weights(rho, g, grid)
    w = grid.weight
    norm = float(np.sum(q) * w)
    if abs(norm - 1.0) > norm_tol:
        raise TruncationOverflowError(
            f"mixture normalization defect {abs(norm - 1.0):.3e}; enlarge the grid")
    pts = grid.mesh().ravel()
    amps = np.sqrt(np.abs(q.ravel()) * w)
    out = np.zeros((dim, dim), dtype=complex)
    chunk = 4096
    for lo in range(0, pts.size, chunk):
        hi = min(lo + chunk, pts.size)
        v = _coherent_columns(pts[lo:hi], dim) * amps[None, lo:hi]
        out += v @ v.conj().T
    return FockOperator(out)


# ---------------------------------------------------------------------------
# moment extraction helpers
# ---------------------------------------------------------------------------

def output_variance_from_char(rho_in: FockOperator, spec: AmplifierSpec,
                              probe: float = 0.15) -> float:
    """Symmetric output variance read off characteristic-function samples.

    The mean-field factor of a symmetric characteristic function is a pure
    phase, so for a Gaussian phase-insensitive output |Phi_out^(0)(beta)| =
    e^(-Sigma^2 |beta|^2) and one radial probe determines Sigma^2.  The input
    samples come from the state; the added-noise factor from sigma.
    """
    b = probe
    phi_in = char_fn(rho_in, SOrder(0.0), spec.g * b)
    tp = added_noise_char(spec.sigma, spec.g, SOrder(0.0), b)
    mag = abs(tp * phi_in)
    return -math.log(mag) / b**2


def trace_distance(x: FockOperator, y: FockOperator) -> float:
    """(1/2)||x - y||_1 over the common truncation."""
    dim = max(x.dim, y.dim)
    a = np.zeros((dim, dim), dtype=complex)
    b = np.zeros((dim, dim), dtype=complex)
    a[: x.dim, : x.dim] = x.matrix
    b[: y.dim, : y.dim] = y.matrix
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
