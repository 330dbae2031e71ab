"""Compiled inner loops shared by dispatch, evaluation and the oracle.

Every cost or feasibility number the package reports goes through these
functions, so the solvers, the checker and the exhaustive oracle agree to the
last bit on identical inputs.
"""
import numpy as np
from numba import njit

TOL = 1e-6
_RESERVE_TOL = 1e-9


@njit(cache=True, nogil=True)
def _supply(g, h, w, lam, right):
    s = 0.0
    for j in range(g.shape[0]):
        if w[j] <= 0.0:
            continue
        if h[j] > 0.0:
            x = (lam - g[j]) / h[j]
            if x > w[j]:
                x = w[j]
            elif x < 0.0:
                x = 0.0
            s += x
        elif lam > g[j] or (right and lam == g[j]):
            s += w[j]
    return s


@njit(cache=True, nogil=True)
def _respond(g, h, w, lam, out):
    for j in range(g.shape[0]):
        if w[j] <= 0.0:
            out[j] = 0.0
        elif h[j] > 0.0:
            x = (lam - g[j]) / h[j]
            if x > w[j]:
                x = w[j]
            elif x < 0.0:
                x = 0.0
            out[j] = x
        elif lam > g[j]:
            out[j] = w[j]
        else:
            out[j] = 0.0


@njit(cache=True, nogil=True)
def fill_pieces(g, h, w, need, out):
    """Split ``need`` MW over pieces at a common marginal price.

    Piece ``j`` supplies ``x`` in ``[0, w[j]]`` at marginal cost
    ``g[j] + h[j] * x``.  Total supply is piecewise linear in the price, so the
    clearing price is found exactly by a search over the sorted breakpoints and
    one linear interpolation.  Linear pieces (``h == 0``) priced exactly at the
    clearing price are filled in index order.
    """
    n = g.shape[0]
    total = 0.0
    for j in range(n):
        out[j] = 0.0
        if w[j] > 0.0:
            total += w[j]
    if need <= 0.0 or n == 0:
        return
    if need >= total:
        for j in range(n):
            out[j] = max(w[j], 0.0)
        return

    cand = np.empty(2 * n)
    for j in range(n):
        cand[2 * j] = g[j]
        cand[2 * j + 1] = g[j] + h[j] * max(w[j], 0.0)
    cand.sort()

    k_lo = 0
    k_hi = 2 * n - 1
    while k_lo < k_hi:
        mid = (k_lo + k_hi) // 2
        if _supply(g, h, w, cand[mid], True) >= need:
            k_hi = mid
        else:
            k_lo = mid + 1
    lam = cand[k_lo]
    s_left = _supply(g, h, w, lam, False)

    if s_left >= need and k_lo > 0:
        lam_prev = cand[k_lo - 1]
        s_prev = _supply(g, h, w, lam_prev, True)
        if s_left > s_prev:
            lam = lam_prev + (need - s_prev) * (lam - lam_prev) / (s_left - s_prev)
        _respond(g, h, w, lam, out)
    else:
        _respond(g, h, w, lam, out)
        residual = need - s_left
        for j in range(n):
            if residual <= 0.0:
                break
            if h[j] == 0.0 and g[j] == lam and w[j] > 0.0:
                take = min(w[j], residual)
                out[j] = take
                residual -= take

    # absorb rounding so the pieces sum to ``need`` exactly
    s = 0.0
    for j in range(n):
        s += out[j]
    r = need - s
    if r != 0.0:
        target = -1
        for j in range(n):
            if 0.0 < out[j] < w[j] and 0.0 <= out[j] + r <= w[j]:
                target = j
                break
        if target < 0:
            for j in range(n):
                if 0.0 <= out[j] + r <= w[j]:
                    target = j
                    break
        if target >= 0:
            out[target] += r


@njit(cache=True, nogil=True)
def reserve_up(pmax, rres, p):
    s = 0.0
    for j in range(p.shape[0]):
        s += min(pmax[j] - p[j], rres[j])
    return s


@njit(cache=True, nogil=True)
def reserve_down(pmin, rres, p):
    s = 0.0
    for j in range(p.shape[0]):
        s += min(p[j] - pmin[j], rres[j])
    return s


@njit(cache=True, nogil=True)
def _split_dispatch(b, c, lo, split, hi, lower_total, upper_total, p):
    # units fill [lo, split] from the lower budget and [split, hi] from the upper one
    n = b.shape[0]
    h = 2.0 * c
    g1 = b + h * lo
    w1 = split - lo
    g2 = b + h * split
    w2 = hi - split
    x1 = np.empty(n)
    x2 = np.empty(n)
    fill_pieces(g1, h, w1, lower_total, x1)
    fill_pieces(g2, h, w2, upper_total, x2)
    for j in range(n):
        p[j] = lo[j] + x1[j] + x2[j]


@njit(cache=True, nogil=True)
def dispatch_hour(b, c, lo, hi, pmin, pmax, rres, demand, sr_up, sr_dn, p):
    """Least-cost allocation for one hour; returns (shortfall, overgeneration).

    Plain equal-marginal-cost dispatch first.  If that leaves the up (down)
    spinning-reserve requirement short, the binding reserve constraint is
    solved exactly by splitting every unit at the output where its reserve
    contribution starts to shrink and dispatching both halves with the reserve
    budget as a second balance.
    """
    n = b.shape[0]
    sum_lo = 0.0
    sum_hi = 0.0
    for j in range(n):
        sum_lo += lo[j]
        sum_hi += hi[j]
    if demand >= sum_hi:
        for j in range(n):
            p[j] = hi[j]
        return demand - sum_hi, 0.0
    if demand <= sum_lo:
        for j in range(n):
            p[j] = lo[j]
        return 0.0, sum_lo - demand

    need = demand - sum_lo
    h = 2.0 * c
    x = np.empty(n)
    fill_pieces(b + h * lo, h, hi - lo, need, x)
    for j in range(n):
        p[j] = lo[j] + x[j]

    if sr_up > 0.0 and reserve_up(pmax, rres, p) < sr_up - _RESERVE_TOL:
        split = np.empty(n)
        fixed = 0.0
        sum_split = 0.0
        room = 0.0
        total_r = 0.0
        for j in range(n):
            k = pmax[j] - rres[j]
            split[j] = min(max(k, lo[j]), hi[j])
            fixed += max(0.0, lo[j] - k)
            sum_split += split[j]
            room += hi[j] - split[j]
            total_r += rres[j]
        upper = total_r - sr_up - fixed
        upper = min(max(upper, max(0.0, demand - sum_split)), min(room, need))
        _split_dispatch(b, c, lo, split, hi, need - upper, upper, p)
    elif sr_dn > 0.0 and reserve_down(pmin, rres, p) < sr_dn - _RESERVE_TOL:
        split = np.empty(n)
        fixed = 0.0
        bottom_room = 0.0
        rest_room = 0.0
        total_r = 0.0
        for j in range(n):
            a = pmin[j] + rres[j]
            split[j] = min(max(a, lo[j]), hi[j])
            fixed += max(0.0, a - hi[j])
            bottom_room += split[j] - lo[j]
            rest_room += hi[j] - split[j]
            total_r += rres[j]
        bottom = bottom_room + fixed - (total_r - sr_dn)
        bottom = min(max(bottom, max(0.0, need - rest_room)), min(bottom_room, need))
        _split_dispatch(b, c, lo, split, hi, bottom, need - bottom, p)
    return 0.0, 0.0


@njit(cache=True, nogil=True)
def dispatch_schedule(b, c, pmin, pmax, ru, rd, rres, init_state, init_power,
                      demand, up_frac, dn_frac, bits,
                      power, shortfall, overgen, rup_short, rdn_short):
    n_units, horizon = bits.shape
    idx = np.empty(n_units, np.int64)
    for t in range(horizon):
        m = 0
        for i in range(n_units):
            if bits[i, t] != 0:
                idx[m] = i
                m += 1
        sb = np.empty(m)
        sc = np.empty(m)
        slo = np.empty(m)
        shi = np.empty(m)
        smin = np.empty(m)
        smax = np.empty(m)
        sr = np.empty(m)
        for k in range(m):
            i = idx[k]
            if t == 0:
                prev_on = init_state[i] > 0
                prev = init_power[i]
            else:
                prev_on = bits[i, t - 1] != 0
                prev = power[i, t - 1]
            if prev_on:
                slo[k] = max(pmin[i], prev - rd[i])
                shi[k] = min(pmax[i], prev + ru[i])
            else:
                slo[k] = pmin[i]
                shi[k] = pmax[i]
            sb[k] = b[i]
            sc[k] = c[i]
            smin[k] = pmin[i]
            smax[k] = pmax[i]
            sr[k] = rres[i]
        for i in range(n_units):
            power[i, t] = 0.0
        p = np.empty(m)
        d = demand[t]
        short, over = dispatch_hour(sb, sc, slo, shi, smin, smax, sr,
                                    d, up_frac * d, dn_frac * d, p)
        for k in range(m):
            power[idx[k], t] = p[k]
        shortfall[t] = short
        overgen[t] = over
        rup_short[t] = max(0.0, up_frac * d - reserve_up(smax, sr, p))
        rdn_short[t] = max(0.0, dn_frac * d - reserve_down(smin, sr, p))


@njit(cache=True, nogil=True)
def evaluate_schedule(a, b, c, pmin, pmax, ru, rd, rres, min_up, min_down, cold,
                      su_hot, su_cold, sd_cost, init_state, init_power,
                      demand, up_frac, dn_frac, weight, exact, bits, power,
                      bal, cap, ramp, mud, rup, rdn):
    """Cost and violation magnitudes of one dispatched schedule.

    Violation arrays are overwritten; entries at or below ``TOL`` are zeroed.
    Returns (fuel, startup, shutdown, penalty, n_violations, n_startups).
    """
    n_units, horizon = bits.shape
    fuel = 0.0
    startup = 0.0
    shutdown = 0.0
    n_starts = 0

    for i in range(n_units):
        state = init_state[i] > 0
        run = abs(init_state[i])
        for t in range(horizon):
            on = bits[i, t] != 0
            p = power[i, t]
            cap[i, t] = 0.0
            ramp[i, t] = 0.0
            mud[i, t] = 0.0
            if on:
                fuel += a[i] + b[i] * p + c[i] * p * p
                if p < pmin[i]:
                    cap[i, t] = pmin[i] - p
                elif p > pmax[i]:
                    cap[i, t] = p - pmax[i]
                if t == 0:
                    prev_on = init_state[i] > 0
                    prev = init_power[i]
                else:
                    prev_on = bits[i, t - 1] != 0
                    prev = power[i, t - 1]
                if prev_on:
                    ramp[i, t] = max(0.0, p - prev - ru[i], prev - p - rd[i])
            elif p > 0.0:
                cap[i, t] = p

            if on == state:
                run += 1
                continue
            need = min_up[i] if state else min_down[i]
            if run < need:
                mud[i, t] = need - run
            if on:
                n_starts += 1
                if run <= min_down[i] + cold[i]:
                    startup += su_hot[i]
                else:
                    startup += su_cold[i]
            else:
                shutdown += sd_cost[i]
            state = on
            run = 1

    for t in range(horizon):
        total = 0.0
        up = 0.0
        dn = 0.0
        for i in range(n_units):
            if bits[i, t] != 0:
                p = power[i, t]
                total += p
                up += min(pmax[i] - p, rres[i])
                dn += min(p - pmin[i], rres[i])
        if exact:
            bal[t] = abs(total - demand[t])
        else:
            bal[t] = max(0.0, demand[t] - total)
        rup[t] = max(0.0, up_frac * demand[t] - up)
        rdn[t] = max(0.0, dn_frac * demand[t] - dn)

    acc = 0.0
    count = 0
    for t in range(horizon):
        if bal[t] > TOL:
            acc += bal[t]
            count += 1
        else:
            bal[t] = 0.0
    for grid in (cap, ramp, mud):
        for i in range(n_units):
            for t in range(horizon):
                if grid[i, t] > TOL:
                    acc += grid[i, t]
                    count += 1
                else:
                    grid[i, t] = 0.0
    for vec in (rup, rdn):
        for t in range(horizon):
            if vec[t] > TOL:
                acc += vec[t]
                count += 1
            else:
                vec[t] = 0.0
    return fuel, startup, shutdown, weight * acc, count, n_starts


@njit(cache=True, nogil=True)
def total_cost(a, b, c, pmin, pmax, ru, rd, rres, min_up, min_down, cold,
               su_hot, su_cold, sd_cost, init_state, init_power,
               demand, up_frac, dn_frac, weight, exact, bits):
    n_units, horizon = bits.shape
    power = np.empty((n_units, horizon))
    short = np.empty(horizon)
    over = np.empty(horizon)
    rups = np.empty(horizon)
    rdns = np.empty(horizon)
    dispatch_schedule(b, c, pmin, pmax, ru, rd, rres, init_state, init_power,
                      demand, up_frac, dn_frac, bits, power, short, over, rups, rdns)
    bal = np.empty(horizon)
    cap = np.empty((n_units, horizon))
    ramp = np.empty((n_units, horizon))
    mud = np.empty((n_units, horizon))
    rup = np.empty(horizon)
    rdn = np.empty(horizon)
    fuel, su, sd, pen, count, _ = evaluate_schedule(
        a, b, c, pmin, pmax, ru, rd, rres, min_up, min_down, cold,
        su_hot, su_cold, sd_cost, init_state, init_power,
        demand, up_frac, dn_frac, weight, exact, bits, power,
        bal, cap, ramp, mud, rup, rdn)
    return fuel + su + sd + pen, count


@njit(cache=True, nogil=True)
def enumerate_range(a, b, c, pmin, pmax, ru, rd, rres, min_up, min_down, cold,
                    su_hot, su_cold, sd_cost, init_state, init_power,
                    demand, up_frac, dn_frac, weight, exact, n_units, horizon,
                    start, stop):
    """Best commitment code in ``[start, stop)``; lowest code wins ties.

    Code bit ``n_bits - 1 - (i * horizon + t)`` is unit ``i`` at hour ``t``,
    so reading the matrix row-major gives the binary digits most significant
    first.
    """
    n_bits = n_units * horizon
    bits = np.zeros((n_units, horizon), np.uint8)
    best_code = -1
    best_total = np.inf
    best_count = 0
    for code in range(start, stop):
        for k in range(n_bits):
            bits[k // horizon, k % horizon] = (code >> (n_bits - 1 - k)) & 1
        tot, count = total_cost(a, b, c, pmin, pmax, ru, rd, rres, min_up, min_down, cold,
                                su_hot, su_cold, sd_cost, init_state, init_power,
                                demand, up_frac, dn_frac, weight, exact, bits)
        if tot < best_total:
            best_total = tot
            best_code = code
            best_count = count
    return best_code, best_total, best_count
