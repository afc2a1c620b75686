"""Physicality gate: Stieltjes Hankel tests on number moments, closed-form
limits on added-noise numbers, direct eigenvalue checks, and the three-level
ancilla family used throughout the examples.

The gate walks the interleaved determinant list

    det Q_0^(0), det Q_0^(1), det Q_1^(0), det Q_1^(1), ...

and classifies: all positive -> physical with (apparently) infinite support;
a positive prefix followed by nothing but zeros -> physical with finite
support; any negative determinant, or an exact zero followed by a nonzero
-> unphysical.  With inexact moments a tolerance-zero followed by a clearly
positive determinant cannot be resolved and is reported indeterminate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InsufficientMomentsError
from .fock import AncillaState
from .moments import MomentKind, MomentSequence, _fraction_to_string, _is_exact

__all__ = [
    "HankelPair",
    "GateVerdict",
    "ConstraintCheck",
    "hankel_pair",
    "stieltjes_classify",
    "closed_form_limits",
    "sigma_eigen_check",
    "lambda_family",
]

PHYSICAL_INFINITE = "physical_infinite_support"
PHYSICAL_FINITE = "physical_finite_support"
UNPHYSICAL = "unphysical"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class HankelPair:
    """Hankel matrices Q_k^(0) (moments M_0..M_2k) and Q_k^(1) (M_1..M_2k+1)."""

    k: int
    q0: tuple
    q1: tuple


@dataclass(frozen=True)
class GateVerdict:
    status: str
    first_violation: tuple | None = None      # (k, "Q0"|"Q1") or (level, "eigenvalue")
    determinants: tuple = field(default_factory=tuple)
    horizon: int | None = None

    def to_json(self) -> str:
        def enc(v):
            if _is_exact(v):
                return _fraction_to_string(Fraction(v))
            return repr(float(v))

        doc = {
            "status": self.status,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "determinants": [[label, enc(v)] for label, v in self.determinants],
            "horizon": self.horizon,
        }
        return json.dumps(doc, indent=2)


def _moment_list(m: MomentSequence, upto: int):
    """[M_0, ..., M_upto] with M_0 = 1, preserving exactness."""
    if m.kind != MomentKind.NUMBER:
        raise ValueError("the Stieltjes gate needs number moments")
    if m.order < upto:
        raise InsufficientMomentsError(
            f"need moments through M_{upto}, have {m.order}")
    exact = m.is_exact
    head = Fraction(1) if exact else 1.0
    vals = [head] + [Fraction(v) if exact else float(v) for v in m.values[:upto]]
    return vals, exact


def hankel_pair(m: MomentSequence, k: int) -> HankelPair:
    """Exact Hankel pair at order k (needs moments through M_2k+1)."""
    vals, _ = _moment_list(m, 2 * k + 1)
    q0 = tuple(tuple(vals[i + j] for j in range(k + 1)) for i in range(k + 1))
    q1 = tuple(tuple(vals[i + j + 1] for j in range(k + 1)) for i in range(k + 1))
    return HankelPair(k=k, q0=q0, q1=q1)


def _det_exact(rows) -> Fraction:
    """Fraction-exact determinant by Gaussian elimination with row swaps."""
    a = [[Fraction(v) for v in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            f = a[r][col] / inv
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return det


def _det_float(rows) -> tuple:
    """(det, scale) where scale is a Hadamard-type magnitude for tolerances."""
    m = np.array([[float(v) for v in row] for row in rows], dtype=float)
    det = float(np.linalg.det(m))
    norms = np.linalg.norm(m, axis=1)
    scale = float(np.prod(np.where(norms > 0, norms, 1.0)))
    return det, max(scale, 1.0)


def _det_sequence(m: MomentSequence, K: int):
    """Interleaved det list [(label, value, exact_flag)] through order K."""
    vals, exact = _moment_list(m, 2 * K + 1)
    out = []
    for k in range(K + 1):
        hp = hankel_pair(m, k)
        for label, rows in (("Q0", hp.q0), ("Q1", hp.q1)):
            if exact:
                out.append((k, label, _det_exact(rows), True, 1.0))
            else:
                det, scale = _det_float(rows)
                out.append((k, label, det, False, scale))
    return out


def stieltjes_classify(m: MomentSequence, K: int, zero_tol: float = 1e-9) -> GateVerdict:
    """Decide physical / unphysical / boundary from number moments.

    Walks k = 0..K through both Hankel determinant sequences, interleaved in
    the order the quantum limits are listed.  `zero_tol` is the relative
    threshold below which a floating determinant counts as zero; exact
    rational moments ignore it.
    """
    seq = _det_sequence(m, K)
    dets = tuple((f"{label}[{k}]", d) for k, label, d, _, _ in seq)
    in_tail = False
    tail_exact_zero = True
    for idx, (k, label, d, exact, scale) in enumerate(seq):
        if exact:
            sign = 0 if d == 0 else (1 if d > 0 else -1)
            crisp = True
        else:
            if abs(d) <= zero_tol * scale:
                sign = 0
                crisp = False
            else:
                sign = 1 if d > 0 else -1
                crisp = True
        if not in_tail:
            if sign > 0:
                continue
            if sign < 0:
                return GateVerdict(status=UNPHYSICAL, first_violation=(k, label),
                                   determinants=dets, horizon=K)
            in_tail = True
            tail_exact_zero = exact and d == 0
        else:
            if sign == 0:
                tail_exact_zero = tail_exact_zero and exact and d == 0
                continue
            if sign < 0:
                return GateVerdict(status=UNPHYSICAL, first_violation=(k, label),
                                   determinants=dets, horizon=K)
            # zero followed by a positive determinant
            if tail_exact_zero:
                return GateVerdict(status=UNPHYSICAL, first_violation=(k, label),
                                   determinants=dets, horizon=K)
            return GateVerdict(status=INDETERMINATE, first_violation=(k, label),
                               determinants=dets, horizon=K)
    status = PHYSICAL_FINITE if in_tail else PHYSICAL_INFINITE
    return GateVerdict(status=status, determinants=dets, horizon=K)


# ---------------------------------------------------------------------------
# closed-form limits in terms of added-noise numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    """Outcome of one closed-form quantum limit.

    `satisfied` is the strict inequality; `boundary` marks an exact equality
    or a guarded denominator hit (case (ii) territory).
    """

    index: int
    satisfied: bool
    boundary: bool
    margin: object                 # lhs - rhs, exact when inputs are exact
    note: str = ""


def closed_form_limits(a: MomentSequence, zero_tol: float = 0.0) -> list:
    """The four printed quantum limits on A_1..A_4.

    A denominator that is exactly zero reports that constraint as boundary
    ("see case (ii)") instead of failing with a division error.
    """
    if a.kind != MomentKind.ADDED_NOISE:
        raise ValueError("closed-form limits need added-noise numbers")
    if a.order < 4:
        raise InsufficientMomentsError("need A_1..A_4")
    exact = a.is_exact
    if exact:
        a1, a2, a3, a4 = (Fraction(a[k]) for k in range(1, 5))
        half, quarter = Fraction(1, 2), Fraction(1, 4)
    else:
        a1, a2, a3, a4 = (float(a[k]) for k in range(1, 5))
        half, quarter = 0.5, 0.25

    def check(index, lhs, rhs, note=""):
        margin = lhs - rhs
        if exact:
            return ConstraintCheck(index=index, satisfied=margin > 0,
                                   boundary=margin == 0, margin=margin, note=note)
        boundary = abs(margin) <= zero_tol
        return ConstraintCheck(index=index, satisfied=margin > 0 and not boundary,
                               boundary=boundary, margin=margin, note=note)

    def zeroish(v):
        return v == 0 if exact else abs(v) <= zero_tol

    out = [check(1, a1, half), check(2, a2, a1 * a1 + quarter)]

    d3 = a1 - half
    if zeroish(d3):
        out.append(ConstraintCheck(index=3, satisfied=False, boundary=True,
                                   margin=None, note="boundary: see case (ii)"))
    else:
        rhs3 = (3 * a2 + a1 - half) / 2 + (a2 - a1) ** 2 / d3
        out.append(check(3, a3, rhs3))

    d4 = a2 - a1 * a1 - quarter
    if zeroish(d4):
        out.append(ConstraintCheck(index=4, satisfied=False, boundary=True,
                                   margin=None, note="boundary: see case (ii)"))
    else:
        num = ((a2 - a1) ** 3
               + (4 * a3 - 6 * a2 - 2 * a1 + 1)
               * (8 * a1 * (a1 - a2) + 4 * a3 - 2 * a2 - 6 * a1 + 1) / 16)
        rhs4 = 2 * (a3 + a2 - a1) + num / d4
        out.append(check(4, a4, rhs4))
    return out


# ---------------------------------------------------------------------------
# direct checks and the example family
# ---------------------------------------------------------------------------

def sigma_eigen_check(sigma: AncillaState, tol: float = 1e-12) -> GateVerdict:
    """Directly decide physicality of sigma from its spectrum.

    Diagonal: all weights >= -tol; general: smallest eigenvalue >= -tol and
    unit trace within tol.  The determinants field carries the spectrum.
    """
    if sigma.is_diagonal:
        spectrum = [(f"lambda[{n}]", w) for n, w in enumerate(sigma.weights)]
        for n, w in enumerate(sigma.weights):
            wf = float(w)
            if wf < -tol:
                return GateVerdict(status=UNPHYSICAL, first_violation=(n, "eigenvalue"),
                                   determinants=tuple(spectrum))
        trace = sigma.trace()
    else:
        eig = np.linalg.eigvalsh(sigma.matrix)
        spectrum = [(f"eig[{n}]", float(v)) for n, v in enumerate(eig)]
        if float(eig[0]) < -tol:
            return GateVerdict(status=UNPHYSICAL, first_violation=(0, "eigenvalue"),
                               determinants=tuple(spectrum))
        trace = float(np.trace(sigma.matrix).real)
    if abs(trace - 1.0) > max(tol, 1e-10):
        return GateVerdict(status=UNPHYSICAL, first_violation=(-1, "trace"),
                           determinants=tuple(spectrum))
    return GateVerdict(status=PHYSICAL_FINITE, determinants=tuple(spectrum))


def lambda_family(lam) -> AncillaState:
    """Three-level family (1/2 - lam)|0><0| + lam|1><1| + 1/2|2><2|.

    Unphysical lam is deliberately allowed.  Exact lam (int/Fraction) keeps
    the weights exact for the moment machinery.
    """
    if _is_exact(lam):
        lam = Fraction(lam)
        return AncillaState.diagonal((Fraction(1, 2) - lam, lam, Fraction(1, 2)))
    lam = float(lam)
    return AncillaState.diagonal((0.5 - lam, lam, 0.5))
