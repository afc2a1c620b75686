"""Command-line front end: channel runs, figure-data reproduction, moment
digests, and physicality verdicts for measured moment files.

Exit codes: 0 success, 2 configuration error, 3 truncation-certificate
failure, 4 gate verdict "unphysical".  Every emitted file is deterministic
for a fixed config; run metadata lives in a sidecar JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .ampmap import AmplifierSpec, parametric_apply
from .errors import ConfigError, LinampError, TruncationOverflowError
from .fock import (
    AncillaState,
    FockOperator,
    coherent_state,
    number_state,
    thermal_state,
    truncation_certificate,
    vacuum_state,
)
from .gate import (
    UNPHYSICAL,
    closed_form_limits,
    lambda_family,
    sigma_eigen_check,
    stieltjes_classify,
)
from .moments import (
    MomentKind,
    MomentSequence,
    added_noise_numbers,
    factorial_moments,
    mean_field,
    ml_from_ak,
    number_moments,
    symmetric_noise_moment,
)
from .phasespace import PhaseFunction, PhaseGrid, SOrder, quasidist, sigma_quasi_values

_FIG_GAIN = 4.0
_FIG_BETA = 1.0
_FIG5_LAMBDAS = {"ideal": None, "lam_p0.5": 0.5, "lam_0": 0.0,
                 "lam_m0.5": -0.5, "lam_m1.0": -1.0}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "gain": 2.0,
    "ancilla": {"kind": "vacuum"},
    "input": {"kind": "vacuum"},
    "dim": 60,
    "ancilla_dim": 40,
    "grid": {"extent": 6.0, "steps": 256},
    "defect_tol": 1e-6,
    "write_quasidists": False,
    "out_dir": ".",
}

_ANCILLA_KEYS = {
    "vacuum": set(),
    "thermal": {"nbar"},
    "lambda_family": {"lam"},
    "weights": {"weights"},
}
_INPUT_KEYS = {
    "vacuum": set(),
    "coherent": {"beta"},
    "thermal": {"nbar"},
    "number": {"n"},
}


@dataclass(frozen=True)
class RunConfig:
    gain: float = 2.0
    ancilla: dict = field(default_factory=lambda: {"kind": "vacuum"})
    input: dict = field(default_factory=lambda: {"kind": "vacuum"})
    dim: int = 60
    ancilla_dim: int = 40
    grid: dict = field(default_factory=lambda: dict(_DEFAULTS["grid"]))
    defect_tol: float = 1e-6
    write_quasidists: bool = False
    out_dir: str = "."

    @classmethod
    def from_document(cls, doc: dict) -> "RunConfig":
        unknown = set(doc) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {**_DEFAULTS, **doc}
        for section, allowed in (("ancilla", _ANCILLA_KEYS), ("input", _INPUT_KEYS)):
            spec = merged[section]
            if not isinstance(spec, dict) or "kind" not in spec:
                raise ConfigError(f"{section} must be an object with a 'kind'")
            kind = spec["kind"]
            if kind not in allowed:
                raise ConfigError(f"unknown {section} kind {kind!r}")
            extra = set(spec) - allowed[kind] - {"kind"}
            if extra:
                raise ConfigError(f"unknown keys in {section}: {sorted(extra)}")
        gspec = merged["grid"]
        if set(gspec) - {"extent", "steps"}:
            raise ConfigError(f"unknown keys in grid: {sorted(set(gspec) - {'extent', 'steps'})}")
        if merged["gain"] <= 1.0:
            raise ConfigError("gain must exceed 1")
        return cls(**merged)

    def phase_grid(self) -> PhaseGrid:
        g = {**_DEFAULTS["grid"], **self.grid}
        return PhaseGrid(extent=float(g["extent"]), steps=int(g["steps"]))

    def ancilla_state(self) -> AncillaState:
        spec = self.ancilla
        kind = spec["kind"]
        if kind == "vacuum":
            return AncillaState.vacuum()
        if kind == "thermal":
            return AncillaState.thermal(float(spec["nbar"]), cutoff=self.ancilla_dim)
        if kind == "lambda_family":
            lam = spec["lam"]
            if isinstance(lam, str):
                lam = Fraction(lam)
            return lambda_family(lam)
        return AncillaState.diagonal(tuple(spec["weights"]))

    def input_state(self, dim: int) -> FockOperator:
        spec = self.input
        kind = spec["kind"]
        if kind == "vacuum":
            return vacuum_state(dim)
        if kind == "coherent":
            b = spec["beta"]
            beta = complex(b[0], b[1]) if isinstance(b, (list, tuple)) else complex(b)
            return coherent_state(beta, dim)
        if kind == "thermal":
            return thermal_state(float(spec["nbar"]), dim)
        return number_state(int(spec["n"]), dim)


def _load_config(path: str | None, dim=None, tol=None, out=None) -> RunConfig:
    doc = {}
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if dim is not None:
        doc["dim"] = dim
    if tol is not None:
        doc["defect_tol"] = tol
    if out is not None:
        doc["out_dir"] = out
    return RunConfig.from_document(doc)


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _sidecar(out_dir: Path, command: str, config: RunConfig) -> None:
    meta = {
        "tool": "linamp",
        "version": __version__,
        "command": command,
        "config": {
            "gain": config.gain,
            "ancilla": config.ancilla,
            "input": config.input,
            "dim": config.dim,
            "ancilla_dim": config.ancilla_dim,
            "grid": config.grid,
            "defect_tol": config.defect_tol,
        },
    }
    _write_json(out_dir / f"{command}.meta.json", meta)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_amplify(config: RunConfig) -> int:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sigma = config.ancilla_state()
    rho_in = config.input_state(config.dim)
    spec = AmplifierSpec(g=config.gain, sigma=sigma)
    try:
        rho_out = parametric_apply(rho_in, spec, dims=(config.dim, config.ancilla_dim),
                                   defect_tol=config.defect_tol)
    except TruncationOverflowError as exc:
        print(f"truncation certificate failed: {exc} (raise dim)", file=sys.stderr)
        return 3
    cert = truncation_certificate(rho_out)
    diag = {
        "gain": config.gain,
        "mean_field": [mean_field(rho_out).real, mean_field(rho_out).imag],
        "symmetric_variances": {
            f"k{k}": symmetric_noise_moment(rho_out, k) for k in range(1, 5)
        },
        "truncation_certificate": cert,
    }
    _write_json(out_dir / "amplify.json", diag)
    if config.write_quasidists:
        grid = config.phase_grid()
        for s, tag in ((-1.0, "Q"), (0.0, "W"), (1.0, "P")):
            pf = quasidist(rho_out, SOrder(s), grid)
            pf.to_csv(out_dir / f"amplify_{tag}.csv")
    _sidecar(out_dir, "amplify", config)
    return 0


def _pi_minus_on_axis(sigma: AncillaState, g: float, alpha: np.ndarray, center: float) -> np.ndarray:
    z = (alpha - center) / math.sqrt(g * g - 1.0)
    return sigma_quasi_values(sigma, -1.0, z) / (g * g - 1.0)


def cmd_figure(which: str, config: RunConfig) -> int:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    g = _FIG_GAIN
    center = g * _FIG_BETA
    if which == "fig5":
        grid = PhaseGrid(extent=20.0, steps=config.phase_grid().steps)
        mesh = grid.mesh()
        for tag, lam in _FIG5_LAMBDAS.items():
            sigma = AncillaState.vacuum() if lam is None else lambda_family(lam)
            z = (mesh - center) / math.sqrt(g * g - 1.0)
            vals = sigma_quasi_values(sigma, -1.0, z) / (g * g - 1.0)
            pf = PhaseFunction(grid=grid, values=vals.astype(complex),
                               kind="quasidistribution", order=SOrder(1.0))
            pf.to_csv(out_dir / f"fig5_{tag}.csv")
    elif which == "fig6":
        alpha = np.linspace(-8.0, 16.0, 1201)
        lams = [0.5 - 0.025 * i for i in range(81)]       # 0.5 down to -1.5
        columns = {"ideal": _pi_minus_on_axis(AncillaState.vacuum(), g, alpha, center)}
        for lam in lams:
            curve = _pi_minus_on_axis(lambda_family(lam), g, alpha, center)
            columns[f"lam_{lam:+.3f}"] = curve
        with open(out_dir / "fig6.csv", "w") as fh:
            fh.write("# output P functions on the real axis, each scaled to max 1\n")
            fh.write(f"# gain={g} beta={_FIG_BETA}\n")
            fh.write("alpha," + ",".join(columns) + "\n")
            scaled = {k: v / np.max(v) if np.max(v) > 0 else v for k, v in columns.items()}
            for i, a in enumerate(alpha):
                row = ",".join(f"{scaled[k][i]:.12g}" for k in columns)
                fh.write(f"{a:.12g},{row}\n")
    else:
        raise ConfigError(f"unknown figure {which!r}")
    _sidecar(out_dir, f"figure_{which}", config)
    return 0


def cmd_gate(moments_file: str, kind: str, K: int, zero_tol: float,
             out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        seq = MomentSequence.from_json(Path(moments_file).read_text())
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot parse moments file: {exc}") from exc
    doc = {}
    if kind == "ak":
        if seq.kind != MomentKind.ADDED_NOISE:
            raise ConfigError("file does not hold added-noise numbers")
        ml = ml_from_ak(seq)
        doc["converted_number_moments"] = json.loads(ml.to_json())
        if seq.order >= 4:
            doc["closed_form_limits"] = [
                {"index": c.index, "satisfied": c.satisfied, "boundary": c.boundary,
                 "note": c.note}
                for c in closed_form_limits(seq, zero_tol=zero_tol)
            ]
        seq = ml
    elif seq.kind != MomentKind.NUMBER:
        raise ConfigError("file does not hold number moments")
    kmax = min(K, (seq.order - 1) // 2)
    if kmax < 0:
        raise ConfigError("not enough moments for any Hankel order")
    verdict = stieltjes_classify(seq, K=kmax, zero_tol=zero_tol)
    doc.update(json.loads(verdict.to_json()))
    _write_json(out / "gate_verdict.json", doc)
    print(verdict.status)
    return 4 if verdict.status == UNPHYSICAL else 0


def cmd_moments(config: RunConfig, K: int) -> int:
    if K > 8:
        raise ConfigError("K above the default guard of 8")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sigma = config.ancilla_state()
    ak = added_noise_numbers(sigma, K, dim=config.ancilla_dim)
    ml = number_moments(sigma, K)
    fm = factorial_moments(sigma, K)
    doc = {
        "added_noise_numbers": json.loads(ak.to_json()),
        "number_moments": json.loads(ml.to_json()),
        "factorial_moments": json.loads(fm.to_json()),
    }
    if K >= 4:
        doc["closed_form_limits"] = [
            {"index": c.index, "satisfied": c.satisfied, "boundary": c.boundary,
             "note": c.note}
            for c in closed_form_limits(ak)
        ]
    if sigma.is_diagonal and len(sigma.weights) > config.ancilla_dim:
        tail = sum(abs(float(w)) for w in sigma.weights[config.ancilla_dim:])
        doc["tail_mass_warning"] = tail
    (out_dir / "moments.json").write_text(ak.to_json() + "\n")
    _write_json(out_dir / "moments_full.json", doc)
    _sidecar(out_dir, "moments", config)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linamp",
                                 description="phase-preserving linear amplifier toolbox")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--dim", type=int, help="primary-mode truncation override")
    ap.add_argument("--tol", type=float, help="truncation defect tolerance override")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("amplify", help="run the channel and write diagnostics")

    fig = sub.add_parser("figure", help="emit figure data")
    fig.add_argument("--which", choices=("fig5", "fig6"), required=True)

    gate = sub.add_parser("gate", help="classify a measured moment file")
    gate.add_argument("--moments-file", required=True)
    gate.add_argument("--kind", choices=("ak", "ml"), default="ml")
    gate.add_argument("--K", type=int, default=4)
    gate.add_argument("--zero-tol", type=float, default=1e-9)

    mom = sub.add_parser("moments", help="moment digest of the configured ancilla")
    mom.add_argument("--K", type=int, default=4)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "gate":
            return cmd_gate(args.moments_file, args.kind, args.K, args.zero_tol,
                            out_dir=args.out or ".")
        config = _load_config(args.config, dim=args.dim, tol=args.tol, out=args.out)
        if args.command == "amplify":
            return cmd_amplify(config)
        if args.command == "figure":
            return cmd_figure(args.which, config)
        if args.command == "moments":
            return cmd_moments(config, args.K)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except TruncationOverflowError as exc:
        print(f"truncation certificate failed: {exc} (raise dim)", file=sys.stderr)
        return 3
    except LinampError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
