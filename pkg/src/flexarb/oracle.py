"""Brute-force dynamic-programming oracle for small storage instances.

Discretises the state of charge onto a uniform grid between b_min and b_max
and finds the exact optimum of the discretised problem by forward value
iteration.  Every grid trajectory satisfies the capacity, swing, and
ramp-rate constraints exactly, so the discretised feasible set is contained
in the LP's and the oracle value can never undercut the LP optimum; as the
grid is refined (nested grids: doubling the interval count) the value
converges to it from above.

The start level b_0 is used exactly even when it falls between grid points;
only the levels after the first step are gridded.

Used to cross-check the simplex solver, not for production sizing.
"""

from __future__ import annotations

import numpy as np

from .pricing import PriceSignal
from .storage import (StorageParams, StorageSchedule, consumed_power,
                      step_cost_segments)

#: Cap on the number of elementary DP operations (state x action x step).
DEFAULT_BUDGET = 500_000_000


class OracleBudgetError(ValueError):
    pass


def _transition_cost(delta, p_buy, p_sell, eta_ch_star, eta_dis_star):
    """True transaction cost of an energy change, no epigraph involved."""
    return (p_buy * np.maximum(0.0, delta) / eta_ch_star
            - p_sell * eta_dis_star * np.maximum(0.0, -delta))


def solve_storage_oracle(params: StorageParams, prices: PriceSignal,
                         grid_points: int = 201,
                         budget: int = DEFAULT_BUDGET):
    """Exact optimum of the SoC-gridded problem; returns (objective, schedule).

    A plain level-state DP suffices while the ramp-rate bounds sit at the
    swing limits and consecutive swings cannot reach them; otherwise the
    state is the (previous level, current level) pair so the step-to-step
    change is available to constrain the next move.
    """
    if grid_points < 11:
        raise ValueError(f"grid_points must be >= 11, got {grid_points}")
    n = len(prices)
    h = prices.h
    params.validate(h)
    x_min, x_max = params.ramp_energy_bounds(h)
    t_min, t_max = params.ramp_rate_bounds(h)
    usable = params.usable_capacity

    # ramp-rate bookkeeping is pointless when no feasible pair of steps can
    # violate it: the worst swing is bounded by both 2*usable and the X span
    worst_swing = min(2.0 * usable, x_max - x_min)
    rate_active = n > 1 and (t_min > -worst_swing + 1e-12
                             or t_max < worst_swing - 1e-12)

    g = int(grid_points)
    ops = n * g * g * (g if rate_active else 1)
    if ops > budget:
        raise OracleBudgetError(
            f"state-action space needs ~{ops:.2e} operations, over the "
            f"budget of {budget:.2e}; shrink N or grid_points")

    if usable > 0:
        levels = np.linspace(params.b_min, params.b_max, g)
    else:
        levels = np.full(g, params.b_min)
    e_ch, e_dis = params.eta_ch_star, params.eta_dis_star

    # step 1 from the exact b_0
    d0 = levels - params.b_0
    ok0 = (d0 >= x_min - 1e-12) & (d0 <= x_max + 1e-12)
    v = np.where(ok0, _transition_cost(d0, prices.p_buy[0], prices.p_sell[0],
                                       e_ch, e_dis), np.inf)
    if not rate_active:
        # value per current level
        dmat = levels[None, :] - levels[:, None]  # [from, to]
        okm = (dmat >= x_min - 1e-12) & (dmat <= x_max + 1e-12)
        pos = np.maximum(0.0, dmat) / e_ch
        neg = e_dis * np.maximum(0.0, -dmat)
        choice = np.empty((n, g), dtype=np.int64)
        choice[0] = -1
        for i in range(1, n):
            cost = prices.p_buy[i] * pos - prices.p_sell[i] * neg
            total = np.where(okm, v[:, None] + cost, np.inf)
            choice[i] = np.argmin(total, axis=0)
            v = total[choice[i], np.arange(g)]
        best_end = int(np.argmin(v))
        objective = float(v[best_end])
        path = np.empty(n, dtype=np.int64)
        path[-1] = best_end
        for i in range(n - 1, 0, -1):
            path[i - 1] = choice[i][path[i]]
        soc = levels[path]
        x = np.diff(np.concatenate([[params.b_0], soc]))
    else:
        # value per (previous level, current level) pair
        dmat = levels[None, :] - levels[:, None]  # [cur, next]
        okm = (dmat >= x_min - 1e-12) & (dmat <= x_max + 1e-12)
        pos = np.maximum(0.0, dmat) / e_ch
        neg = e_dis * np.maximum(0.0, -dmat)
        # pair value after the second step; rate_active guarantees n >= 2
        choice = np.full((n, g, g), -1, dtype=np.int64)
        c2 = prices.p_buy[1] * pos - prices.p_sell[1] * neg
        swing1 = dmat - d0[:, None]  # change between step-2 and step-1 deltas
        ok1 = okm & (swing1 >= t_min - 1e-12) & (swing1 <= t_max + 1e-12)
        vp = np.where(ok1, v[:, None] + c2, np.inf)
        for i in range(2, n):
            ci = prices.p_buy[i] * pos - prices.p_sell[i] * neg
            vnew = np.full((g, g), np.inf)
            for nxt in range(g):
                # move cur -> nxt; previous move was prv -> cur
                step = dmat[:, nxt]          # per cur
                swing = step[None, :] - dmat  # [prv, cur]
                ok = (okm[:, nxt][None, :]
                      & (swing >= t_min - 1e-12) & (swing <= t_max + 1e-12))
                cand = np.where(ok, vp, np.inf)
                best_prev = np.argmin(cand, axis=0)
                vals = cand[best_prev, np.arange(g)] + ci[:, nxt]
                vnew[:, nxt] = vals
                choice[i][:, nxt] = best_prev
            vp = vnew
        flat = int(np.argmin(vp))
        cur, nxt = divmod(flat, g)
        objective = float(vp[cur, nxt])
        path = np.empty(n, dtype=np.int64)
        path[-1] = nxt
        path[-2] = cur
        for i in range(n - 1, 1, -1):
            prv = choice[i][path[i - 1], path[i]]
            path[i - 2] = prv
        soc = levels[path]
        x = np.diff(np.concatenate([[params.b_0], soc]))

    return _finish(objective, x, soc, params, prices)


def _finish(objective, x, soc, params, prices):
    if not np.isfinite(objective):
        raise ValueError(
            "no feasible grid trajectory: the grid is too coarse for the "
            "swing limits (increase grid_points)")
    power = consumed_power(x, prices.h, params.eta_ch_star,
                           params.eta_dis_star)
    cost = step_cost_segments(x, prices, params)
    return objective, StorageSchedule(x, soc, power, cost)
