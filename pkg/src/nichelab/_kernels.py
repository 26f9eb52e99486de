"""Numba kernels for the (mu+1) EA with clearing.

Two simulation backends share one structure:

- _gt_run: general engine on packed uint64 genotypes (any landscape variant,
  genotypic or phenotypic distance).
- _cls_run: exact ones-count-class engine for phenotypic clearing on
  unitation-type landscapes. Fitness, distance, the mutation class
  transition, and 0^n/1^n target detection all factor through ones counts,
  so the class chain has exactly the same law as the genotype chain.

Shared conventions:

- RNG is xoshiro256++ on a uint64[4] state array, bitmask-rejection randint,
  (u >> 11) * 2^-53 uniforms. Must stay word-identical to core.RngHandle.
- The population lives in rows 0..mu of fixed arrays; one row (scratch_row)
  is the offspring slot and the other mu rows are members. by_age lists
  member rows oldest first (the reference implementation's list order), and
  age_pos is its inverse. Uniform parent and worst-member draws index by_age
  so they match the pure-Python reference draw-for-draw.
- order[] holds all mu+1 rows sorted by (fitness rank desc, seq asc), with
  the current offspring's seq treated as -1 so it precedes equal-fitness
  incumbents. It is repaired by insertion sort each generation (the previous
  order is nearly sorted, so this is O(mu) amortized).
- out_state slots: 0 gen, 1 seq_counter, 2 potential, 3 status, 4 trace_len,
  5 zero_raw_members, 6 f1_tie_breaks, 7 steps_done, 8 scratch_row,
  9 niche_violation_gen, 10 all_classes_gen, 11 winner_class_mask.
  status: 0 running, 1 success, 2 generation cap, 3 all classes occupied.
"""

import numpy as np
from numba import njit

U64 = np.uint64

_M1 = U64(0x5555555555555555)
_M2 = U64(0x3333333333333333)
_M4 = U64(0x0F0F0F0F0F0F0F0F)
_H01 = U64(0x0101010101010101)

STATUS_RUNNING = 0
STATUS_SUCCESS = 1
STATUS_CAP = 2
STATUS_ALL_CLASSES = 3


@njit(cache=True)
def _popcnt(x):
    x = x - ((x >> U64(1)) & _M1)
    x = (x & _M2) + ((x >> U64(2)) & _M2)
    x = (x + (x >> U64(4))) & _M4
    return np.int64((x * _H01) >> U64(56))


@njit(cache=True)
def rng_next(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    t0 = s0 + s3
    result = ((t0 << U64(23)) | (t0 >> U64(41))) + s0
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << U64(45)) | (s3 >> U64(19))
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(cache=True)
def rng_uniform(s):
    return np.float64(rng_next(s) >> U64(11)) * (2.0**-53)


@njit(cache=True)
def rng_randint(s, bound):
    # bitmask rejection; bound is a positive int64
    m = U64(bound - 1)
    m |= m >> U64(1)
    m |= m >> U64(2)
    m |= m >> U64(4)
    m |= m >> U64(8)
    m |= m >> U64(16)
    m |= m >> U64(32)
    ub = U64(bound)
    while True:
        r = rng_next(s) & m
        if r < ub:
            return np.int64(r)


@njit(cache=True)
def _row_hamming(pop, i, j, W):
    d = np.int64(0)
    for w in range(W):
        d += _popcnt(pop[i, w] ^ pop[j, w])
    return d


@njit(cache=True)
def _row_eq_words(pop, i, words, W):
    for w in range(W):
        if pop[i, w] != words[w]:
            return False
    return True


@njit(cache=True)
def _value_rank(cand, v):
    lo = 0
    hi = cand.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if cand[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return np.int64(lo)


@njit(cache=True)
def _sort_order(order, m, rank, seq, scratch_row):
    """Insertion sort ascending by key = -(rank << 41) + seq_eff, where the
    scratch row's seq counts as -1. Nearly sorted input makes this O(m)."""
    for i in range(1, m):
        v = order[i]
        sv = np.int64(-1) if v == scratch_row else seq[v]
        kv = -(rank[v] << 41) + sv
        j = i - 1
        while j >= 0:
            u = order[j]
            su = np.int64(-1) if u == scratch_row else seq[u]
            ku = -(rank[u] << 41) + su
            if ku <= kv:
                break
            order[j + 1] = u
            j -= 1
        order[j + 1] = v


@njit(cache=True)
def _collect_zpool(by_age, mu, cleared, raw, rank, zpool, any_zero_eff, min_rank):
    """Fill zpool with member rows of minimum effective fitness, in age
    order (matching the reference members-list indexing). If any member is
    cleared or has raw <= 0 the minimum effective fitness is 0; otherwise
    it is the minimum raw fitness, identified by min_rank."""
    npool = 0
    if any_zero_eff:
        for q in range(mu):
            row = by_age[q]
            if cleared[row] == 1 or raw[row] <= 0.0:
                zpool[npool] = row
                npool += 1
    else:
        for q in range(mu):
            row = by_age[q]
            if rank[row] == min_rank:
                zpool[npool] = row
                npool += 1
    return npool


@njit(cache=True)
def _remove_member(by_age, age_pos, mu, zrow, new_row):
    """Drop zrow from the age list and append new_row as the youngest."""
    p = age_pos[zrow]
    for q in range(p, mu - 1):
        row = by_age[q + 1]
        by_age[q] = row
        age_pos[row] = q
    by_age[mu - 1] = new_row
    age_pos[new_row] = mu - 1
    age_pos[zrow] = -1


@njit(cache=True)
def _order_remove(order, m, row):
    idx = 0
    while order[idx] != row:
        idx += 1
    for q in range(idx, m - 1):
        order[q] = order[q + 1]


# ---------------------------------------------------------------------------
# genotype-level engine


@njit(cache=True)
def _gt_eval(pop, ones, srow, n, W, land_kind, table, rank_table,
             pk_words, pk_a, pk_b, cand, tie_scratch, rng_s, out_state):
    """Evaluate the genotype in row srow. Returns (value, rank)."""
    if land_kind == 0:
        u = ones[srow]
        return table[u], rank_table[u]
    P = pk_a.shape[0]
    if land_kind == 1:  # max over peaks
        best = -1.0
        for p in range(P):
            g = n - _row_hamming_peak(pop, srow, pk_words, p, W)
            v = pk_a[p] * g + pk_b[p]
            if v > best:
                best = v
        return best, _value_rank(cand, best)
    # nearest peak, ties by value then uniformly at random
    dmin = np.int64(n + 1)
    for p in range(P):
        d = _row_hamming_peak(pop, srow, pk_words, p, W)
        tie_scratch[p] = d
        if d < dmin:
            dmin = d
    ntie = 0
    for p in range(P):
        if tie_scratch[p] == dmin:
            tie_scratch[P + ntie] = p
            ntie += 1
    if ntie > 1:
        vmax = -1.0
        for q in range(ntie):
            p = tie_scratch[P + q]
            v = pk_a[p] * (n - dmin) + pk_b[p]
            if v > vmax:
                vmax = v
        nv = 0
        for q in range(ntie):
            p = tie_scratch[P + q]
            v = pk_a[p] * (n - dmin) + pk_b[p]
            if v == vmax:
                tie_scratch[P + nv] = p
                nv += 1
        ntie = nv
    if ntie == 1:
        p = tie_scratch[P]
    else:
        p = tie_scratch[P + rng_randint(rng_s, ntie)]
        out_state[6] += 1
    val = pk_a[p] * (n - tie_scratch[p]) + pk_b[p]
    return val, _value_rank(cand, val)


@njit(cache=True)
def _row_hamming_peak(pop, i, pk_words, p, W):
    d = np.int64(0)
    for w in range(W):
        d += _popcnt(pop[i, w] ^ pk_words[p, w])
    return d


@njit(cache=True)
def _gt_sweep(pop, ones, raw, order, cleared, m, W, sigma, kappa, dist_kind):
    """Clearing sweep over all m rows in sorted order. Returns the number of
    cleared rows (members and scratch alike)."""
    for i in range(m):
        cleared[order[i]] = 0
    ncleared = 0
    for ii in range(m):
        r = order[ii]
        if cleared[r] == 1 or raw[r] <= 0.0:
            continue
        winners = 1
        for jj in range(ii + 1, m):
            r2 = order[jj]
            if cleared[r2] == 1 or raw[r2] <= 0.0:
                continue
            if dist_kind == 0:
                d = np.float64(_row_hamming(pop, r, r2, W))
            else:
                d = np.float64(abs(ones[r] - ones[r2]))
            if d < sigma:
                if winners < kappa:
                    winners += 1
                else:
                    cleared[r2] = 1
                    ncleared += 1
    return ncleared


@njit(cache=True)
def _gt_run(n, mu, W,
            pop, ones, raw, rank, seq, order, cleared, by_age, age_pos,
            target_tag, winner_tag, h_ref, wag,
            land_kind, table, rank_table, pk_words, pk_a, pk_b, cand,
            clearing_on, sigma, kappa, dist_kind,
            binom_cdf, chosen, zpool, tie_scratch,
            targets_words, target_count, first_hit,
            potential_on, pot_ref_words, age_on, winner_on, winner_words,
            trace_every, trace,
            gen_cap, max_steps,
            rng_s, out_state):
    m = mu + 1
    gen = out_state[0]
    seq_counter = out_state[1]
    potential = out_state[2]
    trace_len = out_state[4]
    zero_members = out_state[5]
    scratch_row = out_state[8]
    ntargets = target_count.shape[0]
    status = STATUS_RUNNING
    steps = np.int64(0)

    while steps < max_steps:
        if gen >= gen_cap:
            status = STATUS_CAP
            break
        gen += 1
        steps += 1

        # parent and offspring
        prow = by_age[rng_randint(rng_s, mu)]
        for w in range(W):
            pop[scratch_row, w] = pop[prow, w]
        u = rng_uniform(rng_s)
        k = 0
        while u > binom_cdf[k]:
            k += 1
        delta = np.int64(0)
        for idx in range(k):
            while True:
                pos = rng_randint(rng_s, n)
                dup = False
                for q in range(idx):
                    if chosen[q] == pos:
                        dup = True
                        break
                if not dup:
                    break
            chosen[idx] = pos
            wz = pos >> 6
            bit = U64(1) << U64(pos & 63)
            pop[scratch_row, wz] ^= bit
            if pop[scratch_row, wz] & bit:
                delta += 1
            else:
                delta -= 1
        ones[scratch_row] = ones[prow] + delta
        val, rk = _gt_eval(pop, ones, scratch_row, n, W, land_kind, table,
                           rank_table, pk_words, pk_a, pk_b, cand,
                           tie_scratch, rng_s, out_state)
        raw[scratch_row] = val
        rank[scratch_row] = rk

        tag = np.int64(-1)
        for t in range(ntargets):
            if _row_eq_words(pop, scratch_row, targets_words[t], W):
                tag = t
                break
        target_tag[scratch_row] = tag
        if potential_on:
            d = np.int64(0)
            for w in range(W):
                d += _popcnt(pop[scratch_row, w] ^ pot_ref_words[w])
            h_ref[scratch_row] = d
        if winner_on:
            if _row_eq_words(pop, scratch_row, winner_words, W):
                winner_tag[scratch_row] = 1
            else:
                winner_tag[scratch_row] = 0
        if age_on:
            if winner_tag[scratch_row] == 1:
                wag[scratch_row] = gen
            elif winner_tag[prow] == 1:
                wag[scratch_row] = gen - 1
            else:
                wag[scratch_row] = wag[prow]

        # sort all m rows and clear
        order[mu] = scratch_row
        _sort_order(order, m, rank, seq, scratch_row)
        ncleared = 0
        if clearing_on:
            ncleared = _gt_sweep(pop, ones, raw, order, cleared, m, W,
                                 sigma, kappa, dist_kind)
        else:
            for i in range(m):
                cleared[order[i]] = 0

        # worst member selection (effective fitness, age order)
        cleared_members = ncleared
        if cleared[scratch_row] == 1:
            cleared_members -= 1
        any_zero_eff = cleared_members > 0 or zero_members > 0
        min_rank = np.int64(-1)
        if not any_zero_eff:
            jj = m - 1
            if order[jj] == scratch_row:
                jj -= 1
            min_rank = rank[order[jj]]
        npool = _collect_zpool(by_age, mu, cleared, raw, rank, zpool,
                               any_zero_eff, min_rank)
        zrow = zpool[rng_randint(rng_s, npool)]

        eff_y = 0.0
        if cleared[scratch_row] == 0 and raw[scratch_row] > 0.0:
            eff_y = raw[scratch_row]
        eff_z = 0.0
        if cleared[zrow] == 0 and raw[zrow] > 0.0:
            eff_z = raw[zrow]

        if eff_y >= eff_z:
            # offspring replaces z
            if raw[zrow] <= 0.0:
                zero_members -= 1
            if raw[scratch_row] <= 0.0:
                zero_members += 1
            tz = target_tag[zrow]
            if tz >= 0:
                target_count[tz] -= 1
            if tag >= 0:
                target_count[tag] += 1
                if first_hit[tag] < 0 and target_count[tag] > 0:
                    first_hit[tag] = gen
            if potential_on:
                potential += h_ref[scratch_row] - h_ref[zrow]
            seq[scratch_row] = seq_counter
            seq_counter += 1
            _remove_member(by_age, age_pos, mu, zrow, scratch_row)
            _order_remove(order, m, zrow)
            scratch_row = zrow
        else:
            _order_remove(order, m, scratch_row)

        if ntargets > 0:
            ok = True
            for t in range(ntargets):
                if target_count[t] <= 0:
                    ok = False
                    break
            if ok:
                status = STATUS_SUCCESS
        if trace_every > 0 and (status == STATUS_SUCCESS or gen % trace_every == 0):
            mn = np.int64(n)
            mx = np.int64(0)
            nw = np.int64(0)
            nc = np.int64(0)
            for q in range(mu):
                row = by_age[q]
                if ones[row] < mn:
                    mn = ones[row]
                if ones[row] > mx:
                    mx = ones[row]
                if cleared[row] == 1:
                    nc += 1
                elif raw[row] > 0.0:
                    nw += 1
            trace[trace_len, 0] = gen
            trace[trace_len, 1] = raw[order[0]]
            trace[trace_len, 2] = mn
            trace[trace_len, 3] = mx
            trace[trace_len, 4] = potential
            trace[trace_len, 5] = nw
            trace[trace_len, 6] = nc
            trace_len += 1
        if status == STATUS_SUCCESS:
            break

    out_state[0] = gen
    out_state[1] = seq_counter
    out_state[2] = potential
    out_state[3] = status
    out_state[4] = trace_len
    out_state[5] = zero_members
    out_state[7] = steps
    out_state[8] = scratch_row
    return status


@njit(cache=True)
def _gt_drift_trials(n, mu, W,
                     pop0, ones0, raw0, rank0, seq0, order0, cleared0,
                     by_age0, age_pos0, target_tag0, winner_tag0, h_ref0, wag0,
                     pop, ones, raw, rank, seq, order, cleared, by_age,
                     age_pos, target_tag, winner_tag, h_ref, wag,
                     land_kind, table, rank_table, pk_words, pk_a, pk_b, cand,
                     sigma, kappa, dist_kind,
                     binom_cdf, chosen, zpool, tie_scratch,
                     targets_words, target_count, first_hit,
                     pot_ref_words, winner_words,
                     state0, rng_s, trials, dphi, new_winner):
    """Repeat single steps from a fixed start population, recording the
    potential change and whether a winner with a different genotype emerged."""
    trace = np.zeros((1, 7))
    out_state = np.zeros(12, dtype=np.int64)
    for t in range(trials):
        pop[:, :] = pop0
        ones[:] = ones0
        raw[:] = raw0
        rank[:] = rank0
        seq[:] = seq0
        order[:] = order0
        cleared[:] = cleared0
        by_age[:] = by_age0
        age_pos[:] = age_pos0
        target_tag[:] = target_tag0
        winner_tag[:] = winner_tag0
        h_ref[:] = h_ref0
        wag[:] = wag0
        out_state[:] = state0
        target_count[0] = 0
        first_hit[0] = -1
        pot_before = out_state[2]
        _gt_run(n, mu, W,
                pop, ones, raw, rank, seq, order, cleared, by_age, age_pos,
                target_tag, winner_tag, h_ref, wag,
                land_kind, table, rank_table, pk_words, pk_a, pk_b, cand,
                np.int64(1), sigma, kappa, dist_kind,
                binom_cdf, chosen, zpool, tie_scratch,
                targets_words, target_count, first_hit,
                np.int64(1), pot_ref_words, np.int64(0), np.int64(1),
                winner_words,
                np.int64(0), trace,
                np.int64(1 << 60), np.int64(1),
                rng_s, out_state)
        dphi[t] = np.float64(out_state[2] - pot_before)
        bad = np.uint8(0)
        for q in range(mu):
            row = by_age[q]
            if cleared[row] == 0 and raw[row] > 0.0 and winner_tag[row] == 0:
                bad = np.uint8(1)
                break
        new_winner[t] = bad


# ---------------------------------------------------------------------------
# ones-count-class engine (phenotypic distance, unitation landscapes)


@njit(cache=True)
def _cls_sweep(cls, raw, order, cleared, m, kappa, dmax,
               n, csr_count, csr_start, csr_pos, ptr, cnt_after, memo):
    """Clearing sweep on ones-count classes.

    Per-class suffix counts of not-yet-cleared positive rows let a center
    skip its scan when the remaining window holds at most kappa-1 rows
    (counting winners has no side effect); the window sum only shrinks along
    the sweep, so one short-circuit per class is final (memo). kappa == 1
    scans walk per-class position lists (everything touched is cleared);
    kappa > 1 scans walk the global order. Returns cleared-row count.
    """
    for i in range(m):
        cleared[order[i]] = 0
    for v in range(n + 1):
        csr_count[v] = 0
        memo[v] = 0
    for pos in range(m):
        row = order[pos]
        if raw[row] > 0.0:
            csr_count[cls[row]] += 1
    acc = np.int64(0)
    for v in range(n + 1):
        csr_start[v] = acc
        ptr[v] = acc
        cnt_after[v] = csr_count[v]
        acc += csr_count[v]
        csr_count[v] = csr_start[v]  # reuse as fill cursor
    csr_start[n + 1] = acc
    for pos in range(m):
        row = order[pos]
        if raw[row] > 0.0:
            v = cls[row]
            csr_pos[csr_count[v]] = pos
            csr_count[v] += 1

    ncleared = np.int64(0)
    for ii in range(m):
        r = order[ii]
        v = cls[r]
        if cleared[r] == 1:
            continue
        if raw[r] <= 0.0:
            continue
        cnt_after[v] -= 1
        if memo[v] == 1:
            continue
        lo = v - dmax
        if lo < 0:
            lo = 0
        hi = v + dmax
        if hi > n:
            hi = n
        S = np.int64(0)
        for w in range(lo, hi + 1):
            S += cnt_after[w]
        if S <= kappa - 1:
            memo[v] = 1
            continue
        if kappa == 1:
            # clear every later positive row in the window, per-class lists
            for w in range(lo, hi + 1):
                end = csr_start[w + 1]
                p = ptr[w]
                while p < end:
                    pos = csr_pos[p]
                    if pos <= ii:
                        p += 1
                        continue
                    row2 = order[pos]
                    if cleared[row2] == 0:
                        cleared[row2] = 1
                        ncleared += 1
                        cnt_after[w] -= 1
                    p += 1
                ptr[w] = p
        else:
            winners = np.int64(1)
            for jj in range(ii + 1, m):
                row2 = order[jj]
                if cleared[row2] == 1 or raw[row2] <= 0.0:
                    continue
                w = cls[row2]
                if w < lo or w > hi:
                    continue
                if winners < kappa:
                    winners += 1
                else:
                    cleared[row2] = 1
                    ncleared += 1
                    cnt_after[w] -= 1
    return ncleared


@njit(cache=True)
def _cls_run(n, mu,
             cls, raw, rank, seq, order, cleared, by_age, age_pos, wag, hist,
             table, rank_table,
             clearing_on, sigma, kappa,
             binom_cdf, zpool,
             target_cls, first_hit,
             potential_on, pot_ref_cls, age_on, winner_on, winner_cls,
             monitor_on, stop_all_classes,
             csr_count, csr_start, csr_pos, ptr, cnt_after, memo,
             trace_every, trace,
             gen_cap, max_steps,
             rng_s, out_state):
    m = mu + 1
    gen = out_state[0]
    seq_counter = out_state[1]
    potential = out_state[2]
    trace_len = out_state[4]
    zero_members = out_state[5]
    scratch_row = out_state[8]
    winner_mask = U64(out_state[11])
    ntargets = target_cls.shape[0]
    dmax = np.int64(np.ceil(sigma)) - 1
    status = STATUS_RUNNING
    steps = np.int64(0)

    while steps < max_steps:
        if gen >= gen_cap:
            status = STATUS_CAP
            break
        gen += 1
        steps += 1

        prow = by_age[rng_randint(rng_s, mu)]
        u0 = cls[prow]
        u = rng_uniform(rng_s)
        k = 0
        while u > binom_cdf[k]:
            k += 1
        rem_ones = u0
        rem = n
        a = np.int64(0)
        for _ in range(k):
            if rng_randint(rng_s, rem) < rem_ones:
                a += 1
                rem_ones -= 1
            rem -= 1
        uy = u0 - a + (k - a)
        cls[scratch_row] = uy
        raw[scratch_row] = table[uy]
        rank[scratch_row] = rank_table[uy]
        if age_on:
            if winner_on and uy == winner_cls:
                wag[scratch_row] = gen
            elif winner_on and u0 == winner_cls:
                wag[scratch_row] = gen - 1
            else:
                wag[scratch_row] = wag[prow]

        order[mu] = scratch_row
        _sort_order(order, m, rank, seq, scratch_row)
        ncleared = 0
        if clearing_on:
            ncleared = _cls_sweep(cls, raw, order, cleared, m, kappa, dmax,
                                  n, csr_count, csr_start, csr_pos, ptr,
                                  cnt_after, memo)
        else:
            for i in range(m):
                cleared[order[i]] = 0

        cleared_members = ncleared
        if cleared[scratch_row] == 1:
            cleared_members -= 1
        any_zero_eff = cleared_members > 0 or zero_members > 0
        min_rank = np.int64(-1)
        if not any_zero_eff:
            jj = m - 1
            if order[jj] == scratch_row:
                jj -= 1
            min_rank = rank[order[jj]]
        npool = _collect_zpool(by_age, mu, cleared, raw, rank, zpool,
                               any_zero_eff, min_rank)
        zrow = zpool[rng_randint(rng_s, npool)]

        eff_y = 0.0
        if cleared[scratch_row] == 0 and raw[scratch_row] > 0.0:
            eff_y = raw[scratch_row]
        eff_z = 0.0
        if cleared[zrow] == 0 and raw[zrow] > 0.0:
            eff_z = raw[zrow]

        if eff_y >= eff_z:
            if raw[zrow] <= 0.0:
                zero_members -= 1
            if raw[scratch_row] <= 0.0:
                zero_members += 1
            hist[cls[zrow]] -= 1
            hist[uy] += 1
            if potential_on:
                hy = uy if pot_ref_cls == 0 else n - uy
                hz = cls[zrow] if pot_ref_cls == 0 else n - cls[zrow]
                potential += hy - hz
            seq[scratch_row] = seq_counter
            seq_counter += 1
            _remove_member(by_age, age_pos, mu, zrow, scratch_row)
            _order_remove(order, m, zrow)
            scratch_row = zrow
            for t in range(ntargets):
                if first_hit[t] < 0 and hist[target_cls[t]] > 0:
                    first_hit[t] = gen
        else:
            _order_remove(order, m, scratch_row)

        # with the all-classes stop the targets are tracked but do not stop
        # the run; the caller labels the outcome from the final membership
        if ntargets > 0 and stop_all_classes == 0:
            ok = True
            for t in range(ntargets):
                if hist[target_cls[t]] <= 0:
                    ok = False
                    break
            if ok:
                status = STATUS_SUCCESS

        if monitor_on:
            mask = U64(0)
            for q in range(mu):
                row = by_age[q]
                if cleared[row] == 0 and raw[row] > 0.0:
                    mask |= U64(1) << U64(cls[row])
            if (winner_mask & ~mask) != U64(0) and out_state[9] < 0:
                out_state[9] = gen
            winner_mask = mask
            if _popcnt(mask) == n + 1:
                if out_state[10] < 0:
                    out_state[10] = gen
                if stop_all_classes and status == STATUS_RUNNING:
                    status = STATUS_ALL_CLASSES

        if trace_every > 0 and (status != STATUS_RUNNING or gen % trace_every == 0):
            mn = np.int64(n)
            mx = np.int64(0)
            for v in range(n + 1):
                if hist[v] > 0:
                    mn = v
                    break
            for v in range(n, -1, -1):
                if hist[v] > 0:
                    mx = v
                    break
            nw = np.int64(0)
            nc = np.int64(0)
            for q in range(mu):
                row = by_age[q]
                if cleared[row] == 1:
                    nc += 1
                elif raw[row] > 0.0:
                    nw += 1
            trace[trace_len, 0] = gen
            trace[trace_len, 1] = raw[order[0]]
            trace[trace_len, 2] = mn
            trace[trace_len, 3] = mx
            trace[trace_len, 4] = potential
            trace[trace_len, 5] = nw
            trace[trace_len, 6] = nc
            trace_len += 1
        if status == STATUS_SUCCESS or status == STATUS_ALL_CLASSES:
            break

    out_state[0] = gen
    out_state[1] = seq_counter
    out_state[2] = potential
    out_state[3] = status
    out_state[4] = trace_len
    out_state[5] = zero_members
    out_state[7] = steps
    out_state[8] = scratch_row
    out_state[11] = np.int64(winner_mask)
    return status
