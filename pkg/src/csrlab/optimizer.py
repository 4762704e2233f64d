"""Schedule bounds by column generation over transmission sets.

A transmission set is a feasible joint transmission (active APs, one station
each, powers, modes) with the per-station data rates it yields.  A schedule
mixes transmission sets with convex time shares.  The master LP maximizes
either the worst station throughput (fairness mode) or the aggregate
throughput; its duals drive a pricing problem that searches all remaining
sets for one with positive reduced cost, solved as a mixed-binary program by
the built-in branch and bound.  Rates live in Mb/s, powers in mW inside the
pricing model, and SINR thresholds as linear ratios.

Dual orientation: with station rows written "R_s - sum_t r(t,s) w_t = 0",
the reduced cost of a candidate set is sum_s beta_s r_s - alpha in fairness
mode and sum_s (1 + beta_s) r_s - alpha in throughput mode, where beta are
the station-row duals net of the direct objective contribution of R_s.
"""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .lp import InfeasibleError, LinearProgram, solve_with_duals, write_lp_text
from .milp import DEFAULT_NODE_LIMIT, solve_milp
from .network import Network, sinr_db
from .radio import ChannelParams, McsTable, PowerConfig, dbm_to_mw, mw_to_dbm
from .txop import TransmissionConfig

__all__ = [
    "TransmissionSet",
    "Schedule",
    "DualValues",
    "PricingInstance",
    "MODES",
    "big_m",
    "seed_sets",
    "solve_main",
    "solve_pricing",
    "column_generation",
    "brute_force_schedule",
]

MODES = ("fairness", "throughput")
SUPPORT_EPS = 1e-9
# Largest number of AP-to-station assignments a pricing search node may hold
# before subtree enumeration gives way to LP-guided branching.
SUBTREE_ENUM_LIMIT = 512


@dataclass
class TransmissionSet:
    """One feasible joint transmission and its per-station rates.

    ``rates`` maps station id to Mb/s (stations absent deliver 0).  The
    provenance fields record the pricing/enumeration solution behind it:
    active APs, links, transmit powers in dBm, and the MCS index per link.
    """

    rates: dict[int, float]
    active_aps: tuple[int, ...]
    links: tuple[tuple[int, int], ...]
    powers_dbm: dict[int, float]
    modes: dict[tuple[int, int], int]

    def rates_key(self, stations: tuple[int, ...], digits: int = 9) -> tuple:
        return tuple(round(self.rates.get(s, 0.0), digits) for s in stations)

    def to_config(self) -> TransmissionConfig:
        entries = tuple(sorted((a, s, self.powers_dbm[a]) for a, s in self.links))
        return TransmissionConfig(entries)


@dataclass
class Schedule:
    """Convex mix of transmission sets with the resulting station rates."""

    mode: str
    sets: tuple[TransmissionSet, ...]
    shares: tuple[float, ...]
    station_rates: dict[int, float]
    min_rate: float
    iterations: int = 0
    wall_time_s: float = 0.0
    status: str = "optimal"
    objective_trace: tuple[float, ...] = ()
    duals: DualValues | None = None

    @property
    def total_rate(self) -> float:
        return sum(self.station_rates.values())

    @property
    def objective_value(self) -> float:
        return self.min_rate if self.mode == "fairness" else self.total_rate

    def support(self) -> list[tuple[TransmissionSet, float]]:
        return [(t, w) for t, w in zip(self.sets, self.shares) if w > SUPPORT_EPS]

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "objective_value": self.objective_value,
            "min_rate_mbps": self.min_rate,
            "total_rate_mbps": self.total_rate,
            "station_rates_mbps": {str(s): r for s, r in sorted(self.station_rates.items())},
            "iterations": self.iterations,
            "wall_time_s": self.wall_time_s,
            "status": self.status,
            "sets": [
                {
                    "share": w,
                    "links": [list(l) for l in t.links],
                    "powers_dbm": {str(a): p for a, p in sorted(t.powers_dbm.items())},
                    "modes": {f"{a}:{s}": m for (a, s), m in sorted(t.modes.items())},
                    "rates_mbps": {str(s): r for s, r in sorted(t.rates.items())},
                }
                for t, w in zip(self.sets, self.shares)
            ],
        }


@dataclass(frozen=True)
class DualValues:
    """Master-LP duals: alpha from the convexity row, beta per station row.

    beta is reported net of any direct objective weight on the station rate
    variable, so the reduced-cost formulas in the module docstring hold with
    these values in both modes.
    """

    alpha: float
    beta: dict[int, float]


@dataclass(frozen=True)
class PricingInstance:
    """Everything the pricing search needs for one network and dual vector."""

    net: Network
    ch: ChannelParams
    mcs: McsTable
    power: PowerConfig
    duals: DualValues
    mode: str
    grid: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not np.all(self.net.loss > 0):
            raise ValueError("loss matrix must be strictly positive")
        if self.power.min_power_dbm > self.power.max_power_dbm:
            raise ValueError("power bounds are inverted")

    @property
    def max_power_dbm(self) -> float:
        if self.grid:
            return max(self.power.discrete_levels_dbm)
        return self.power.max_power_dbm


def _participants(net: Network) -> tuple[tuple[int, ...], tuple[int, ...]]:
    aps = net.coordinated_ap_ids
    stations = tuple(s for a in aps for s in net.sta_ids_by_ap[a])
    return aps, stations


def big_m(link: tuple[int, int], mode_idx: int, inst: PricingInstance) -> float:
    """Constant deactivating one link-mode SINR row, in mW.

    Worst-case interference puts every other participating AP at max power:
    M = loss(link) * threshold(mode) * (sum_c Pmax/loss(c, s) + noise).
    """
    net, ch = inst.net, inst.ch
    aps, _ = _participants(net)
    a, s = link
    p_max_mw = dbm_to_mw(inst.max_power_dbm)
    worst = ch.noise_floor_mw + sum(p_max_mw / net.loss[c, s] for c in aps if c != a)
    return net.loss[a, s] * inst.mcs.min_sinr_linear()[mode_idx] * worst


def seed_sets(
    net: Network, ch: ChannelParams, mcs: McsTable, max_power_dbm: float
) -> list[TransmissionSet]:
    """One single-link set per association link at max power.

    A link that supports no mode even alone yields a rate-0 set; it is kept
    so every station appears in the initial family.
    """
    from .radio import best_mcs

    aps, _ = _participants(net)
    out = []
    for a in aps:
        for s in net.sta_ids_by_ap[a]:
            snr = sinr_db((a, s), {a: max_power_dbm}, net, ch)
            m = best_mcs(snr, mcs)
            rate = mcs.rates_mbps[m] if m is not None else 0.0
            out.append(
                TransmissionSet(
                    rates={s: rate},
                    active_aps=(a,),
                    links=((a, s),),
                    powers_dbm={a: max_power_dbm},
                    modes={(a, s): m} if m is not None else {},
                )
            )
    return out


def _main_lp(
    sets: list[TransmissionSet], stations: tuple[int, ...], mode: str
) -> LinearProgram:
    n_sets, n_sta = len(sets), len(stations)
    fair = mode == "fairness"
    n = n_sets + n_sta + (1 if fair else 0)
    c = np.zeros(n)
    if fair:
        c[-1] = 1.0  # objective: the floor rate
    else:
        c[n_sets : n_sets + n_sta] = 1.0  # objective: sum of station rates

    a_eq = np.zeros((1 + n_sta, n))
    b_eq = np.zeros(1 + n_sta)
    a_eq[0, :n_sets] = 1.0
    b_eq[0] = 1.0
    for i, s in enumerate(stations):
        a_eq[1 + i, n_sets + i] = 1.0
        for t, ts in enumerate(sets):
            a_eq[1 + i, t] = -ts.rates.get(s, 0.0)

    if fair:
        a_ub = np.zeros((n_sta, n))
        b_ub = np.zeros(n_sta)
        for i in range(n_sta):
            a_ub[i, -1] = 1.0
            a_ub[i, n_sets + i] = -1.0
    else:
        a_ub = np.zeros((0, n))
        b_ub = np.zeros(0)

    bounds = [(0.0, None)] * n
    return LinearProgram(c, a_eq, b_eq, a_ub, b_ub, bounds)


def solve_main(
    sets: list[TransmissionSet],
    stations: tuple[int, ...],
    mode: str,
    export_path: str | Path | None = None,
) -> tuple[Schedule, DualValues]:
    """Optimal time shares over a fixed family of transmission sets."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not sets:
        raise ValueError("the set family must not be empty")
    lp = _main_lp(sets, stations, mode)
    if export_path is not None:
        names = [f"w{t}" for t in range(len(sets))] + [f"r{s}" for s in stations]
        if mode == "fairness":
            names.append("floor")
        Path(export_path).write_text(write_lp_text(lp, var_names=names, name=f"main_{mode}"))
    sol = solve_with_duals(lp)
    n_sets = len(sets)
    shares = tuple(max(0.0, float(v)) for v in sol.x[:n_sets])
    station_rates = {
        s: float(sol.x[n_sets + i]) for i, s in enumerate(stations)
    }
    min_rate = min(station_rates.values()) if station_rates else 0.0
    # In throughput mode each R_s carries objective weight 1; subtracting it
    # reports beta in the convention of the documented reduced-cost formulas.
    shift = 1.0 if mode == "throughput" else 0.0
    duals = DualValues(
        alpha=float(sol.eq_duals[0]),
        beta={s: float(sol.eq_duals[1 + i]) - shift for i, s in enumerate(stations)},
    )
    schedule = Schedule(
        mode=mode,
        sets=tuple(sets),
        shares=shares,
        station_rates=station_rates,
        min_rate=min_rate,
    )
    return schedule, duals


@dataclass(frozen=True)
class _PricingModel:
    lp: LinearProgram
    binary_idx: tuple[int, ...]
    aps: tuple[int, ...]
    links: tuple[tuple[int, int], ...]
    link_modes: tuple[tuple[int, ...], ...]
    stations: tuple[int, ...]
    x0: int
    y0: int
    u_index: dict[tuple[int, int], int]  # (link index, mode) -> column
    p0: int
    r0: int
    var_names: tuple[str, ...]


def _build_pricing(inst: PricingInstance) -> _PricingModel:
    net, ch, mcs, power, grid = inst.net, inst.ch, inst.mcs, inst.power, inst.grid
    aps, stations = _participants(net)
    links = tuple((a, s) for a in aps for s in net.sta_ids_by_ap[a])
    n_ap, n_sta, n_link = len(aps), len(stations), len(links)
    ap_pos = {a: i for i, a in enumerate(aps)}
    sta_pos = {s: i for i, s in enumerate(stations)}

    p_max_mw = dbm_to_mw(power.max_power_dbm)
    p_min_mw = dbm_to_mw(power.min_power_dbm)
    levels_mw = tuple(dbm_to_mw(p) for p in power.discrete_levels_dbm)
    if grid:
        p_max_mw = max(levels_mw)
        p_min_mw = min(levels_mw)
    noise_mw = ch.noise_floor_mw
    thresholds = mcs.min_sinr_linear()
    # Reduced-cost coefficient on each station rate; the throughput master
    # contributes an extra unit on top of the station-row dual.
    shift = 1.0 if inst.mode == "throughput" else 0.0
    coef = {s: inst.duals.beta.get(s, 0.0) + shift for s in stations}

    # Modes that survive even with zero interference at max power.
    link_modes = []
    for a, s in links:
        cap = p_max_mw / (net.loss[a, s] * noise_mw)
        link_modes.append(tuple(m for m, th in enumerate(thresholds) if th <= cap))
    link_modes = tuple(link_modes)

    x0 = 0
    y0 = x0 + n_ap
    u_index: dict[tuple[int, int], int] = {}
    col = y0 + n_link
    for e, modes_e in enumerate(link_modes):
        for m in modes_e:
            u_index[(e, m)] = col
            col += 1
    v0 = col
    n_v = n_ap * len(levels_mw) if grid else 0
    p0 = v0 + n_v
    r0 = p0 + n_ap
    n = r0 + n_sta

    c = np.zeros(n)
    for s, b in coef.items():
        c[r0 + sta_pos[s]] = b

    bounds: list[tuple[float | None, float | None]] = [(0.0, 1.0)] * (y0 + n_link)
    for e, modes_e in enumerate(link_modes):
        if not modes_e:
            bounds[y0 + e] = (0.0, 0.0)  # link unusable even alone
    bounds += [(0.0, 1.0)] * len(u_index)
    bounds += [(0.0, 1.0)] * n_v
    bounds += [(0.0, p_max_mw)] * n_ap
    bounds += [(0.0, mcs.rates_mbps[-1])] * n_sta

    eq_rows, eq_rhs = [], []
    ub_rows, ub_rhs = [], []

    def row() -> np.ndarray:
        return np.zeros(n)

    # Each AP is active exactly when one of its links is.
    for i, a in enumerate(aps):
        r = row()
        r[x0 + i] = 1.0
        for e, (la, _) in enumerate(links):
            if la == a:
                r[y0 + e] = -1.0
        eq_rows.append(r)
        eq_rhs.append(0.0)

    # An active link uses exactly one mode.
    for e, modes_e in enumerate(link_modes):
        r = row()
        r[y0 + e] = -1.0
        for m in modes_e:
            r[u_index[(e, m)]] = 1.0
        eq_rows.append(r)
        eq_rhs.append(0.0)

    # Station rate equals the rate of its chosen link mode.
    for j, s in enumerate(stations):
        r = row()
        r[r0 + j] = 1.0
        for e, (_, ls) in enumerate(links):
            if ls == s:
                for m in link_modes[e]:
                    r[u_index[(e, m)]] = -mcs.rates_mbps[m]
        eq_rows.append(r)
        eq_rhs.append(0.0)

    if grid:
        for i in range(n_ap):
            r = row()
            r[x0 + i] = -1.0
            for k in range(len(levels_mw)):
                r[v0 + i * len(levels_mw) + k] = 1.0
            eq_rows.append(r)
            eq_rhs.append(0.0)
            r = row()
            r[p0 + i] = 1.0
            for k, lv in enumerate(levels_mw):
                r[v0 + i * len(levels_mw) + k] = -lv
            eq_rows.append(r)
            eq_rhs.append(0.0)
    else:
        for i in range(n_ap):
            r = row()
            r[p0 + i] = -1.0
            r[x0 + i] = p_min_mw
            ub_rows.append(r)
            ub_rhs.append(0.0)
            r = row()
            r[p0 + i] = 1.0
            r[x0 + i] = -p_max_mw
            ub_rows.append(r)
            ub_rhs.append(0.0)

    # SINR feasibility per usable link mode, big-M deactivated.
    for e, (a, s) in enumerate(links):
        l_e = net.loss[a, s]
        for m in link_modes[e]:
            th = thresholds[m]
            m_const = big_m((a, s), m, inst)
            r = row()
            r[p0 + ap_pos[a]] = -1.0
            for c_ap in aps:
                if c_ap != a:
                    r[p0 + ap_pos[c_ap]] = l_e * th / net.loss[c_ap, s]
            r[u_index[(e, m)]] = m_const
            ub_rows.append(r)
            ub_rhs.append(m_const - l_e * th * noise_mw)

    lp = LinearProgram(
        c,
        np.array(eq_rows).reshape(-1, n),
        np.array(eq_rhs),
        np.array(ub_rows).reshape(-1, n),
        np.array(ub_rhs),
        bounds,
    )
    binary_idx = tuple(range(x0, y0 + n_link)) + tuple(u_index.values()) + tuple(
        range(v0, v0 + n_v)
    )
    names = [f"x_{a}" for a in aps]
    names += [f"y_{a}_{s}" for a, s in links]
    names += [f"u_{links[e][0]}_{links[e][1]}_m{m}" for (e, m) in u_index]
    if grid:
        names += [f"v_{a}_{k}" for a in aps for k in range(len(levels_mw))]
    names += [f"p_{a}" for a in aps]
    names += [f"r_{s}" for s in stations]
    return _PricingModel(
        lp, binary_idx, aps, links, link_modes, stations, x0, y0, u_index, p0, r0, tuple(names)
    )


def _power_fixed_point(
    g: np.ndarray,
    w: np.ndarray,
    noise_mw: float,
    p_min_mw: float,
    p_max_mw: float,
    max_iter: int = 300,
) -> np.ndarray | None:
    """Minimal power vector meeting SINR targets inside the box, or None.

    ``g[j]`` is direct_loss(j) * threshold(j), ``w[j, i]`` the inverse cross
    loss from transmitter i into receiver j (zero diagonal), so feasibility
    means p >= g * (noise + w @ p) componentwise.  The map max(floor, target)
    is monotone, so iterating from the floor either converges to the minimal
    feasible point or provably escapes the ceiling.  If the loop budget runs
    out before either happens, an exact feasibility LP decides.
    """
    p = np.full(g.size, p_min_mw)
    ceiling = p_max_mw * (1.0 + 1e-9)
    for _ in range(max_iter):
        p_new = np.maximum(p_min_mw, g * (noise_mw + w @ p))
        if np.any(p_new > ceiling):
            return None
        if np.max(np.abs(p_new - p)) <= 1e-12 * p_max_mw:
            return np.minimum(p_new, p_max_mw)
        p = p_new
    k = g.size
    a_ub = g[:, None] * w - np.eye(k)
    b_ub = -g * noise_mw
    feas = LinearProgram(
        np.zeros(k),
        np.zeros((0, k)),
        np.zeros(0),
        a_ub,
        b_ub,
        [(p_min_mw, p_max_mw)] * k,
    )
    try:
        return solve_with_duals(feas).x
    except InfeasibleError:
        return None


def _make_node_hooks(model: _PricingModel, inst: PricingInstance):
    """Exact node completion and subtree closure for the pricing search.

    Once the branch-and-bound has fixed which APs transmit and on which
    links, the remaining problem (one mode per link plus powers) decomposes:
    with discrete levels the best mode per link follows directly from each
    candidate power combination, and with continuous power a small
    depth-first search over mode vectors with monotone feasibility pruning
    closes the node.  Either path returns the same optimum the generic
    branch and bound would reach, orders of magnitude faster.

    The subtree hook goes one step further: when the activity/link bounds of
    a node leave only a modest number of AP-to-station assignments, it
    enumerates them all through the same per-assignment solver and closes
    the node without any LP work.  An interference-free cap per link (best
    coefficient-weighted rate achievable even with no competing
    transmitters) prunes assignments — and whole nodes — that cannot beat
    the incumbent.
    """
    net, ch, mcs = inst.net, inst.ch, inst.mcs
    lp = model.lp
    n = lp.c.size
    aps, links, stations = model.aps, model.links, model.stations
    n_ap, n_link = len(aps), len(links)
    sta_pos = {s: j for j, s in enumerate(stations)}
    thresholds = np.asarray(mcs.min_sinr_linear())
    rates = np.asarray(mcs.rates_mbps)
    noise_mw = ch.noise_floor_mw
    if inst.grid:
        levels_mw = tuple(dbm_to_mw(p) for p in inst.power.discrete_levels_dbm)
        p_min_mw, p_max_mw = min(levels_mw), max(levels_mw)
        n_levels = len(levels_mw)
        v0 = model.p0 - n_ap * n_levels
    else:
        levels_mw, n_levels, v0 = (), 0, model.p0
        p_min_mw = dbm_to_mw(inst.power.min_power_dbm)
        p_max_mw = dbm_to_mw(inst.power.max_power_dbm)
    # Assignment results keyed by (active AP positions, chosen links); each
    # entry remembers the floor it was pruned against so a later call with a
    # lower floor re-evaluates instead of trusting a stale prune.
    cache: dict[tuple, tuple[float, np.ndarray | None, float] | None] = {}
    missing = object()

    def lookup(key, active_pos, chosen, floor):
        entry = cache.get(key, missing)
        if entry is None:
            return None  # solver declined this assignment before
        if entry is not missing:
            value, xv, old_floor = entry
            if xv is not None or old_floor <= floor:
                return value, xv
        res = solve_assignment(active_pos, chosen, floor)
        cache[key] = None if res is None else (res[0], res[1], floor)
        return res

    ap_pos = {a: i for i, a in enumerate(aps)}
    link_range: list[list[int]] = [[] for _ in range(n_ap)]
    for e, (a, _) in enumerate(links):
        link_range[ap_pos[a]].append(e)
    # Best contribution each link can make with zero interference; an upper
    # bound on its contribution in any transmission set.  A non-positive
    # coefficient is maximized by the least demanding (lowest-rate) mode.
    link_cap = np.full(n_link, -np.inf)
    for e, (_, s) in enumerate(links):
        mods = model.link_modes[e]
        if mods:
            co = lp.c[model.r0 + sta_pos[s]]
            link_cap[e] = co * rates[mods[-1] if co > 0.0 else mods[0]]

    def assemble(active_pos, chosen, mode_by_link, p_mw, level_idx):
        x = np.zeros(n)
        value = 0.0
        for j, i in enumerate(active_pos):
            x[model.x0 + i] = 1.0
            x[model.p0 + i] = p_mw[j]
            if inst.grid:
                x[v0 + i * n_levels + level_idx[j]] = 1.0
        for j, e in enumerate(chosen):
            _, s = links[e]
            m = mode_by_link[j]
            x[model.y0 + e] = 1.0
            x[model.u_index[(e, m)]] = 1.0
            x[model.r0 + sta_pos[s]] = rates[m]
            value += lp.c[model.r0 + sta_pos[s]] * rates[m]
        return value, x

    def solve_assignment(active_pos, chosen, floor=-np.inf):
        # ``floor`` prunes: the caller only cares about values strictly above
        # it, so anything at or below comes back as (-inf, None).
        k = len(chosen)
        link_aps = tuple(links[e][0] for e in chosen)
        recv = tuple(links[e][1] for e in chosen)
        l_dir = np.array([net.loss[a, s] for (a, s) in (links[e] for e in chosen)])
        w = np.zeros((k, k))
        for j in range(k):
            for i in range(k):
                if i != j:
                    w[j, i] = 1.0 / net.loss[link_aps[i], recv[j]]
        coefs = np.array([lp.c[model.r0 + sta_pos[s]] for s in recv])
        # A zero or negative rate coefficient makes the least demanding mode
        # optimal for that link, so its candidate list collapses to one entry.
        cand = []
        for j, e in enumerate(chosen):
            mods = model.link_modes[e]
            if not mods:
                return -np.inf, None
            cand.append(list(mods) if coefs[j] > 0.0 else [mods[0]])

        if inst.grid:
            if n_levels**k * k > 2_000_000:
                return None  # too large to enumerate; generic search instead
            combos = np.array(
                list(itertools.product(range(n_levels), repeat=k)), dtype=np.int64
            )
            p_all = np.asarray(levels_mw)[combos]
            sinr = (p_all / l_dir) / (noise_mw + p_all @ w.T)
            score = np.zeros(len(combos))
            picks = np.zeros((len(combos), k), dtype=np.int64)
            valid = np.ones(len(combos), dtype=bool)
            for j in range(k):
                th_j = thresholds[cand[j]]
                pos = np.searchsorted(th_j, sinr[:, j] * (1.0 + 1e-12), side="right") - 1
                valid &= pos >= 0
                pos = np.clip(pos, 0, None)
                mode_ids = np.asarray(cand[j])[pos]
                picks[:, j] = mode_ids
                score += coefs[j] * rates[mode_ids]
            if not np.any(valid):
                return -np.inf, None
            score[~valid] = -np.inf
            best = int(np.argmax(score))
            if score[best] <= floor:
                return -np.inf, None
            return assemble(
                active_pos,
                chosen,
                tuple(int(m) for m in picks[best]),
                tuple(levels_mw[c] for c in combos[best]),
                tuple(int(c) for c in combos[best]),
            )

        # Continuous powers: depth-first search over mode vectors.  Links in
        # a prefix keep their thresholds; the rest are relaxed to zero, which
        # underestimates interference, so prefix infeasibility prunes safely.
        if k > 10:
            return None  # mode search would be too deep; generic search instead
        caps = (p_max_mw / l_dir) / (noise_mw + p_min_mw * (w @ np.ones(k)))
        for j in range(k):
            cand[j] = [m for m in cand[j] if thresholds[m] <= caps[j] * (1.0 + 1e-9)]
            if not cand[j]:
                return -np.inf, None
        scores = [[float(coefs[j] * rates[m]) for m in cand[j]] for j in range(k)]
        order = sorted(range(k), key=lambda j: -max(scores[j]))
        suffix = np.zeros(k + 1)
        for d in range(k - 1, -1, -1):
            suffix[d] = suffix[d + 1] + max(scores[order[d]])
        ordered = []
        for j in order:
            by_score = sorted(zip(scores[j], cand[j]), key=lambda t: -t[0])
            ordered.append(by_score)
        best = {"value": floor, "modes": None, "powers": None}
        t_cur = np.zeros(k)

        def dfs(depth: int, acc: float, modes_sel: list) -> None:
            if acc + suffix[depth] <= best["value"]:
                return
            j = order[depth]
            for sc, m in ordered[depth]:
                if acc + sc + suffix[depth + 1] <= best["value"]:
                    break  # candidates are score-sorted: nothing below helps
                t_cur[j] = thresholds[m]
                p = _power_fixed_point(l_dir * t_cur, w, noise_mw, p_min_mw, p_max_mw)
                if p is None:
                    t_cur[j] = 0.0
                    continue
                modes_sel.append(m)
                if depth + 1 == k:
                    best["value"] = acc + sc
                    best["modes"] = list(modes_sel)
                    best["powers"] = p
                else:
                    dfs(depth + 1, acc + sc, modes_sel)
                modes_sel.pop()
                t_cur[j] = 0.0

        dfs(0, 0.0, [])
        if best["modes"] is None:
            return -np.inf, None
        mode_by_link = [0] * k
        for d, j in enumerate(order):
            mode_by_link[j] = best["modes"][d]
        return assemble(active_pos, chosen, tuple(mode_by_link), tuple(best["powers"]), ())

    def complete(sol):
        xv = sol.x
        active_pos = tuple(i for i in range(n_ap) if xv[model.x0 + i] > 0.5)
        chosen = tuple(e for e in range(n_link) if xv[model.y0 + e] > 0.5)
        active_aps = tuple(aps[i] for i in active_pos)
        if tuple(sorted(links[e][0] for e in chosen)) != tuple(sorted(active_aps)):
            return None  # inconsistent rounding; let the generic search handle it
        if not active_pos:
            return 0.0, np.zeros(n)
        return lookup((active_pos, chosen), active_pos, chosen, -np.inf)

    def subtree(bounds, incumbent):
        # Assignment options left open by this node's bounds, one slot per
        # AP: None for staying silent, else the link it transmits on.
        opts: list[list[int | None]] = []
        total = 1
        ub = 0.0
        for i in range(n_ap):
            x_lo, x_hi = bounds[model.x0 + i]
            forced = None
            allowed: list[int | None] = []
            for e in link_range[i]:
                lo, hi = bounds[model.y0 + e]
                if lo > 0.5:
                    if forced is not None:
                        return -np.inf, None  # two links pinned on: empty node
                    forced = e
                elif hi > 0.5:
                    allowed.append(e)
            if forced is not None:
                if x_hi < 0.5:
                    return -np.inf, None  # AP pinned off, link pinned on
                o: list[int | None] = [forced]
            elif x_hi < 0.5:
                o = [None]
            elif x_lo > 0.5:
                if not allowed:
                    return -np.inf, None  # AP pinned on, every link pinned off
                o = allowed
            else:
                o = [None] + allowed
            opts.append(o)
            total *= len(o)
            ub += max(0.0 if e is None else link_cap[e] for e in o)
        if ub <= incumbent:
            return -np.inf, None  # even interference-free it cannot win
        if total > SUBTREE_ENUM_LIMIT:
            return None  # too many assignments; keep branching
        best_v, best_x = -np.inf, None
        for combo in itertools.product(*opts):
            chosen = tuple(e for e in combo if e is not None)
            if not chosen:
                if 0.0 > best_v:
                    best_v, best_x = 0.0, np.zeros(n)
                continue
            floor = max(incumbent, best_v)
            if sum(link_cap[e] for e in chosen) <= floor:
                continue
            active_pos = tuple(i for i, e in enumerate(combo) if e is not None)
            res = lookup((active_pos, chosen), active_pos, chosen, floor)
            if res is None:
                return None  # per-assignment solver declined; fall back
            v, xv = res
            if xv is not None and v > best_v:
                best_v, best_x = v, xv
        if best_x is None:
            return -np.inf, None
        return best_v, best_x

    return complete, subtree


def solve_pricing(
    inst: PricingInstance,
    tol: float = 1e-6,
    node_limit: int = DEFAULT_NODE_LIMIT,
    export_path: str | Path | None = None,
) -> tuple[TransmissionSet | None, float]:
    """Best-reduced-cost transmission set under the instance's duals.

    Returns (set, reduced_cost); the set is None when no candidate beats
    ``tol``.  Raises NodeLimitError (carrying the best bound) if the search
    cannot finish within ``node_limit`` nodes.
    """
    model = _build_pricing(inst)
    if export_path is not None:
        Path(export_path).write_text(
            write_lp_text(model.lp, model.binary_idx, list(model.var_names), name="pricing")
        )
    # Branch only on activity and link-choice binaries; mode and power-level
    # binaries are closed exactly per node by the completion callback, and
    # nodes with few remaining assignments are closed by direct enumeration.
    structural = tuple(range(model.x0, model.y0 + len(model.links)))
    complete, subtree = _make_node_hooks(model, inst)
    res = solve_milp(
        model.lp,
        model.binary_idx,
        node_limit=node_limit,
        branch_idx=structural,
        complete=complete,
        subtree=subtree,
    )
    reduced = res.value - inst.duals.alpha
    if reduced <= tol:
        return None, reduced

    x = res.x
    mcs = inst.mcs
    active = tuple(a for i, a in enumerate(model.aps) if x[model.x0 + i] > 0.5)
    links = []
    modes: dict[tuple[int, int], int] = {}
    rates: dict[int, float] = {}
    for e, (a, s) in enumerate(model.links):
        if x[model.y0 + e] <= 0.5:
            continue
        links.append((a, s))
        chosen = [m for m in model.link_modes[e] if x[model.u_index[(e, m)]] > 0.5]
        if len(chosen) != 1:
            raise RuntimeError("pricing solution selects an invalid mode combination")
        modes[(a, s)] = chosen[0]
        rates[s] = mcs.rates_mbps[chosen[0]]
    ap_pos = {a: i for i, a in enumerate(model.aps)}
    powers = {}
    for a in active:
        p_mw = float(x[model.p0 + ap_pos[a]])
        p_dbm = mw_to_dbm(max(p_mw, 1e-12))
        if inst.grid:
            p_dbm = min(inst.power.discrete_levels_dbm, key=lambda lv: abs(lv - p_dbm))
        powers[a] = p_dbm
    ts = TransmissionSet(rates, active, tuple(links), powers, modes)
    return ts, reduced


def column_generation(
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    power: PowerConfig,
    mode: str,
    grid: bool = False,
    tol: float = 1e-6,
    max_iterations: int = 500,
    node_limit: int = DEFAULT_NODE_LIMIT,
    export_dir: str | Path | None = None,
) -> Schedule:
    """Iterate master and pricing until no set has positive reduced cost.

    The family starts from one single-link set per association link.  A
    priced set whose rate vector duplicates an existing member is rejected;
    two consecutive rejections terminate with status "stalled" (the master
    proved those duals optimal for the family anyway, so the result is still
    the incumbent schedule).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    start = time.perf_counter()
    _, stations = _participants(net)
    family = seed_sets(net, ch, mcs, power.max_power_dbm)
    seen_keys = {ts.rates_key(stations) for ts in family}
    export_dir = Path(export_dir) if export_dir is not None else None
    if export_dir is not None:
        export_dir.mkdir(parents=True, exist_ok=True)

    status = "iteration_limit"
    rejections = 0
    iterations = 0
    trace: list[float] = []
    last_duals: DualValues | None = None
    for it in range(max_iterations):
        iterations = it + 1
        main_path = export_dir / f"main_{it:03d}.lp" if export_dir else None
        schedule, duals = solve_main(family, stations, mode, export_path=main_path)
        trace.append(schedule.objective_value)
        last_duals = duals
        inst = PricingInstance(net, ch, mcs, power, duals, mode, grid)
        pricing_path = export_dir / f"pricing_{it:03d}.lp" if export_dir else None
        candidate, _ = solve_pricing(
            inst, tol=tol, node_limit=node_limit, export_path=pricing_path
        )
        if candidate is None:
            status = "optimal"
            break
        key = candidate.rates_key(stations)
        if key in seen_keys:
            rejections += 1
            if rejections >= 2:
                warnings.warn(
                    "column generation stalled on duplicate transmission sets",
                    RuntimeWarning,
                )
                status = "stalled"
                break
            continue
        rejections = 0
        seen_keys.add(key)
        family.append(candidate)

    schedule, _ = solve_main(family, stations, mode)
    trace.append(schedule.objective_value)
    return replace(
        schedule,
        iterations=iterations,
        wall_time_s=time.perf_counter() - start,
        status=status,
        objective_trace=tuple(trace),
        duals=last_duals,
    )


def brute_force_schedule(
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    power_levels: tuple[float, ...],
    mode: str,
) -> Schedule:
    """Exact reference: enumerate every set on the power grid, solve once.

    Guarded to at most 4 coordinated APs and 12 of their stations; beyond
    that the enumeration is no longer a sensible oracle.
    """
    from .radio import best_mcs

    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    aps, stations = _participants(net)
    if len(aps) > 4 or len(stations) > 12:
        raise ValueError("brute force oracle limited to 4 APs and 12 stations")
    start = time.perf_counter()

    family = seed_sets(net, ch, mcs, max(power_levels))
    for size in range(1, len(aps) + 1):
        for subset in itertools.combinations(aps, size):
            station_choices = [net.sta_ids_by_ap[a] for a in subset]
            for receivers in itertools.product(*station_choices):
                for powers in itertools.product(power_levels, repeat=size):
                    active = dict(zip(subset, powers))
                    rates: dict[int, float] = {}
                    modes: dict[tuple[int, int], int] = {}
                    for a, s in zip(subset, receivers):
                        val = sinr_db((a, s), active, net, ch)
                        m = best_mcs(val, mcs)
                        rates[s] = mcs.rates_mbps[m] if m is not None else 0.0
                        if m is not None:
                            modes[(a, s)] = m
                    family.append(
                        TransmissionSet(
                            rates, subset, tuple(zip(subset, receivers)), dict(active), modes
                        )
                    )

    schedule, duals = solve_main(family, stations, mode)
    return replace(
        schedule,
        iterations=1,
        wall_time_s=time.perf_counter() - start,
        status="optimal",
        duals=duals,
    )
