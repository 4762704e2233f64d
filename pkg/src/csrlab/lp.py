"""Linear programs with dual values, plus LP-format text export.

Problems are stated in maximize orientation: max c@x subject to
A_eq x = b_eq, A_ub x <= b_ub, and per-variable bounds.  Solving delegates to
scipy's HiGHS backend; duals are reoriented so that a positive dual means the
objective rises when the corresponding right-hand side rises
(d(value)/d(rhs) = dual).  Infeasible and unbounded problems raise distinct
errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "LinearProgram",
    "LpSolution",
    "InfeasibleError",
    "UnboundedError",
    "solve_with_duals",
    "write_lp_text",
]


class InfeasibleError(Exception):
    """The constraint system admits no solution."""


class UnboundedError(Exception):
    """The objective can be improved without limit."""


@dataclass
class LinearProgram:
    """max c@x s.t. A_eq x = b_eq, A_ub x <= b_ub, bounds[i] = (lo, hi).

    ``None`` in a bound means unbounded on that side.  Empty constraint
    blocks may be passed as empty arrays of matching column count.
    """

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    bounds: list[tuple[float | None, float | None]]

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        self.a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        self.b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        if self.a_eq.shape[0] != self.b_eq.shape[0]:
            raise ValueError("a_eq and b_eq row counts differ")
        if self.a_ub.shape[0] != self.b_ub.shape[0]:
            raise ValueError("a_ub and b_ub row counts differ")
        if len(self.bounds) != n:
            raise ValueError("bounds length must match variable count")


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    value: float
    eq_duals: np.ndarray
    ub_duals: np.ndarray


def solve_with_duals(lp: LinearProgram) -> LpSolution:
    """Solve to optimality and return primal, value, and oriented duals."""
    res = linprog(
        -lp.c,
        A_eq=lp.a_eq if lp.a_eq.size else None,
        b_eq=lp.b_eq if lp.a_eq.size else None,
        A_ub=lp.a_ub if lp.a_ub.size else None,
        b_ub=lp.b_ub if lp.a_ub.size else None,
        bounds=lp.bounds,
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleError("linear program is infeasible")
    if res.status == 3:
        # scipy flags unboundedness of the minimized form, i.e. of max c@x.
        raise UnboundedError("linear program is unbounded")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed with status {res.status}: {res.message}")
    eq_duals = -res.eqlin.marginals if lp.a_eq.size else np.zeros(0)
    ub_duals = -res.ineqlin.marginals if lp.a_ub.size else np.zeros(0)
    return LpSolution(np.asarray(res.x), float(-res.fun), eq_duals, ub_duals)


def _term(coef: float, name: str, first: bool) -> str:
    sign = "- " if coef < 0 else ("" if first else "+ ")
    mag = abs(coef)
    if mag == 1.0:
        return f"{sign}{name}"
    return f"{sign}{mag:.12g} {name}"


def _row(coefs: np.ndarray, names: list[str]) -> str:
    parts = []
    first = True
    for coef, name in zip(coefs, names):
        if coef == 0.0:
            continue
        parts.append(_term(coef, name, first))
        first = False
    return " ".join(parts) if parts else "0 " + names[0]


def write_lp_text(
    lp: LinearProgram,
    binary_idx: tuple[int, ...] = (),
    var_names: list[str] | None = None,
    name: str = "problem",
) -> str:
    """Render the problem in the conventional LP text format.

    The output is accepted by common external solvers, which treats the
    objective as a maximization.  Binary variables are listed in a Binaries
    section and need no explicit bounds.
    """
    n = lp.c.shape[0]
    names = var_names or [f"x{i}" for i in range(n)]
    if len(names) != n:
        raise ValueError("var_names length must match variable count")
    binaries = set(binary_idx)
    out = [f"\\ {name}", "Maximize", f" obj: {_row(lp.c, names)}", "Subject To"]
    for i, (row, b) in enumerate(zip(lp.a_eq, lp.b_eq)):
        out.append(f" eq{i}: {_row(row, names)} = {b:.12g}")
    for i, (row, b) in enumerate(zip(lp.a_ub, lp.b_ub)):
        out.append(f" ub{i}: {_row(row, names)} <= {b:.12g}")
    out.append("Bounds")
    for i, (lo, hi) in enumerate(lp.bounds):
        if i in binaries:
            continue
        if lo is None and hi is None:
            out.append(f" {names[i]} free")
        elif hi is None:
            out.append(f" {lo:.12g} <= {names[i]}")
        elif lo is None:
            out.append(f" -inf <= {names[i]} <= {hi:.12g}")
        else:
            out.append(f" {lo:.12g} <= {names[i]} <= {hi:.12g}")
    if binaries:
        out.append("Binaries")
        out.append(" " + " ".join(names[i] for i in sorted(binaries)))
    out.append("End")
    return "\n".join(out) + "\n"
