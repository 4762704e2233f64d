"""Mixed-binary maximization by LP-relaxation branch and bound.

Node selection is best-bound first with deeper nodes breaking ties; branching
picks the most fractional binary.  Children are evaluated eagerly so the heap
always carries true LP bounds, which lets the search stop as soon as the best
remaining bound cannot beat the incumbent.  A configurable node limit guards
against runaway instances; hitting it raises an error that still carries the
best bound and incumbent found.

Callers with problem structure can restrict branching to a subset of the
binaries (``branch_idx``) and supply a ``complete`` callback that solves a
node exactly once those variables are integral.  The callback receives the
node's LP solution and returns ``(value, x)`` for the node optimum, ``-inf``
with ``None`` when the node is infeasible, or ``None`` to fall back to
generic branching over the remaining binaries.

A ``subtree`` callback extends this to whole subtrees: it is offered every
child node (bounds plus the current incumbent value) before the child's LP
is solved, and may close it outright by returning the subtree's exact
optimum ``(value, x)`` — or ``-inf`` with ``None`` when nothing in it can
beat the incumbent — or ``None`` to let the normal search continue.  The
returned ``x`` must be feasible for the full problem, but need not respect
the child's own bounds: any solution the closure misses because of that is
then covered by a sibling, so pruning stays exact.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .lp import InfeasibleError, LinearProgram, LpSolution, solve_with_duals

__all__ = ["MilpResult", "NodeLimitError", "solve_milp"]

DEFAULT_NODE_LIMIT = 1_000_000


@dataclass(frozen=True)
class MilpResult:
    x: np.ndarray
    value: float
    nodes: int  # LP relaxations solved
    bound: float  # proof bound on the optimum


class NodeLimitError(Exception):
    """Search exceeded the node limit before closing the gap."""

    def __init__(self, bound: float, incumbent_value: float, incumbent_x: np.ndarray | None):
        super().__init__(
            f"node limit reached; best bound {bound:.9g}, incumbent "
            f"{incumbent_value if incumbent_x is not None else None}"
        )
        self.bound = bound
        self.incumbent_value = incumbent_value
        self.incumbent_x = incumbent_x


def _solve_node(lp: LinearProgram, bounds) -> LpSolution | None:
    node_lp = LinearProgram(lp.c, lp.a_eq, lp.b_eq, lp.a_ub, lp.b_ub, bounds)
    try:
        return solve_with_duals(node_lp)
    except InfeasibleError:
        return None


def _fractionality(x: np.ndarray, binary_idx: np.ndarray) -> np.ndarray:
    vals = x[binary_idx]
    return np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)


def solve_milp(
    lp: LinearProgram,
    binary_idx,
    node_limit: int = DEFAULT_NODE_LIMIT,
    int_tol: float = 1e-6,
    gap_tol: float = 1e-9,
    branch_idx=None,
    complete=None,
    subtree=None,
) -> MilpResult:
    """Maximize with the variables in ``binary_idx`` restricted to {0, 1}.

    ``branch_idx`` (default: all binaries) limits which variables the search
    branches on; ``complete(sol)`` may then close a node exactly once every
    branch variable is integral, and ``subtree(bounds, incumbent)`` may close
    a child node before its LP is even solved (see the module docstring).

    Raises InfeasibleError if no integral solution exists, UnboundedError if
    the relaxation is unbounded, and NodeLimitError past ``node_limit`` LP
    relaxations.
    """
    binary_idx = np.asarray(sorted(binary_idx), dtype=int)
    branch = binary_idx if branch_idx is None else np.asarray(sorted(branch_idx), dtype=int)
    bounds0 = list(lp.bounds)
    for j in binary_idx:
        lo = 0.0 if bounds0[j][0] is None else max(0.0, bounds0[j][0])
        hi = 1.0 if bounds0[j][1] is None else min(1.0, bounds0[j][1])
        bounds0[j] = (lo, hi)

    root = _solve_node(lp, bounds0)
    nodes = 1
    if root is None:
        raise InfeasibleError("MILP is infeasible")
    if binary_idx.size == 0:
        return MilpResult(root.x, root.value, nodes, root.value)

    best_x: np.ndarray | None = None
    best_val = -np.inf

    def consider(sol: LpSolution) -> bool:
        """Record an integral solution; returns True if it was integral."""
        nonlocal best_x, best_val
        frac = _fractionality(sol.x, binary_idx)
        if np.all(frac <= int_tol):
            if sol.value > best_val:
                best_val = sol.value
                best_x = sol.x.copy()
                best_x[binary_idx] = np.round(best_x[binary_idx])
            return True
        return False

    def record(value: float, x) -> None:
        nonlocal best_x, best_val
        if x is not None and value > best_val:
            best_val = value
            best_x = np.asarray(x, dtype=float)

    def most_fractional(sol: LpSolution, vars_: np.ndarray) -> int | None:
        if vars_.size == 0:
            return None
        frac = _fractionality(sol.x, vars_)
        j = int(np.argmax(frac))
        return int(vars_[j]) if frac[j] > int_tol else None

    # Diving pass: round the most fractional branch variable onto its nearest
    # value until integral or infeasible, to seed the incumbent cheaply.
    dive_bounds = list(bounds0)
    dive_sol = root
    while dive_sol is not None and not consider(dive_sol):
        if nodes >= node_limit:
            break
        frac = _fractionality(dive_sol.x, branch) if branch.size else np.zeros(0)
        if branch.size == 0 or frac[int(np.argmax(frac))] <= int_tol:
            if complete is not None:
                res = complete(dive_sol)
                if res is not None:
                    record(*res)
            break
        j = int(branch[int(np.argmax(frac))])
        fix = float(np.round(dive_sol.x[j]))
        dive_bounds = list(dive_bounds)
        dive_bounds[j] = (fix, fix)
        dive_sol = _solve_node(lp, dive_bounds)
        nodes += 1

    counter = 0
    heap: list = []
    if not consider(root):
        heapq.heappush(heap, (-root.value, 0, counter, bounds0, root))

    proof = best_val
    while heap:
        neg_bound, neg_depth, _, bounds, sol = heapq.heappop(heap)
        bound = -neg_bound
        if bound <= best_val + gap_tol:
            proof = bound  # best-first: nothing left can improve
            break
        j = most_fractional(sol, branch)
        if j is None and complete is not None:
            # All branch variables integral here.  The completion solves this
            # particular assignment exactly; that closes the node only if it
            # meets the node's LP bound or the bounds pin every branch
            # variable (so no other assignment lives in this subtree).
            # Otherwise record the incumbent and split on an unfixed branch
            # variable at its current integral value.
            res = complete(sol)
            if res is not None:
                value, _ = res
                record(*res)
                pinned = all(bounds[v][0] == bounds[v][1] for v in branch)
                if pinned or value >= bound - gap_tol:
                    continue
                j = next(int(v) for v in branch if bounds[v][0] != bounds[v][1])
        if j is None:
            # Completion declined (or absent): branch on any fractional binary.
            j = most_fractional(sol, binary_idx)
        if j is None:
            continue  # fully integral; consider() already recorded it
        for fix in (float(np.round(sol.x[j])), 1.0 - float(np.round(sol.x[j]))):
            if nodes >= node_limit:
                raise NodeLimitError(bound, best_val, best_x)
            child_bounds = list(bounds)
            child_bounds[j] = (fix, fix)
            if subtree is not None:
                res = subtree(child_bounds, best_val)
                if res is not None:
                    record(*res)
                    continue
            child = _solve_node(lp, child_bounds)
            nodes += 1
            if child is None or child.value <= best_val + gap_tol:
                continue
            if not consider(child):
                counter += 1
                heapq.heappush(
                    heap, (-child.value, neg_depth - 1, counter, child_bounds, child)
                )

    if best_x is None:
        raise InfeasibleError("no integral solution found")
    return MilpResult(best_x, best_val, nodes, max(proof, best_val))
