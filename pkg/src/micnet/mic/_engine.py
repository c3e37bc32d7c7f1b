"""Compiled kernels behind the grid-partition MIC estimators.

Everything here works on integer codes rather than raw values:

* ``ugrp`` -- tie-group id of each point once the sample is sorted along the
  column axis (non-decreasing, starting at 0);
* ``vcode`` -- dense rank code of the row-axis value of each point, listed in
  column-axis order;
* ``vcnt`` -- number of points carrying each row-axis code.

A row partition is an increasing array of *code cuts*: cut ``j`` sends every
code ``< j`` below the boundary, so equal values can never be split.

Mutual information values that leave this module are evaluated through
:func:`mi_exact`, which reduces the count table to a prime-exponent vector
before taking logarithms.  Two tables with mathematically equal mutual
information therefore always produce bit-identical floats, which is what
lets the DP, the refinement and the brute-force oracle be compared with
``==``.
"""

import math

import numpy as np
from numba import njit

NEG_INF = -np.inf


# ---------------------------------------------------------------- tables


@njit(cache=True, nogil=True)
def smallest_prime_factors(n):
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            for j in range(i, n + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@njit(cache=True, nogil=True)
def plogp_table(n):
    g = np.zeros(n + 1, dtype=np.float64)
    for m in range(2, n + 1):
        g[m] = m * math.log2(m)
    return g


@njit(cache=True, nogil=True)
def _add_power(expo, spf, m, mult):
    # expo += mult * factorisation(m)
    while m > 1:
        p = spf[m]
        expo[p] += mult
        m //= p


@njit(cache=True, nogil=True)
def mi_exact(counts, spf):
    """Mutual information (bits) of a 2-D count table, canonically rounded."""
    ncol, nrow = counts.shape
    total = 0
    for i in range(ncol):
        for j in range(nrow):
            total += counts[i, j]
    if total == 0:
        return 0.0
    expo = np.zeros(total + 1, dtype=np.int64)
    _add_power(expo, spf, total, total)
    for i in range(ncol):
        s = 0
        for j in range(nrow):
            c = counts[i, j]
            s += c
            if c > 1:
                _add_power(expo, spf, c, c)
        if s > 1:
            _add_power(expo, spf, s, -s)
    for j in range(nrow):
        s = 0
        for i in range(ncol):
            s += counts[i, j]
        if s > 1:
            _add_power(expo, spf, s, -s)
    acc = 0.0
    for p in range(2, total + 1):
        if expo[p] != 0:
            acc += expo[p] * math.log2(p)
    value = acc / total
    if value < 0.0:
        value = 0.0
    return value


# ------------------------------------------------------------ partitions


@njit(cache=True, nogil=True)
def equip_cuts(cnt, k, open_on_tie=True):
    """Cut positions (in code space) of a near-equal split of ``cnt`` into ``k`` bins.

    Tie groups are placed greedily: a group opens a new bin unless adding it
    to the current one brings the bin size closer to the target.  When both
    choices are equally close, ``open_on_tie`` decides.
    """
    m = cnt.shape[0]
    n = 0
    for c in range(m):
        n += cnt[c]
    cuts = np.empty(max(k - 1, 0), dtype=np.int64)
    ncut = 0
    if k < 2:
        return cuts[:0]
    desired = n / k
    cur = 0
    assigned = 0
    row = 0
    for c in range(m):
        s = cnt[c]
        grow, keep = abs(cur + s - desired), abs(cur - desired)
        if cur != 0 and row < k - 1 and (grow > keep or (open_on_tie and grow == keep)):
            cuts[ncut] = c
            ncut += 1
            row += 1
            cur = 0
            desired = (n - assigned) / (k - row)
        cur += s
        assigned += s
    return cuts[:ncut]


@njit(cache=True, nogil=True)
def rows_from_cuts(vcode, cuts):
    n = vcode.shape[0]
    rows = np.empty(n, dtype=np.int64)
    for i in range(n):
        rows[i] = np.searchsorted(cuts, vcode[i], side="right")
    return rows


@njit(cache=True, nogil=True)
def clump_bounds_into(ugrp, rows, bounds):
    """Write clump boundaries (point positions, 0 and n included) into ``bounds``.

    Returns how many entries were written.  A tie group whose points sit in
    different rows becomes a clump of its own; otherwise consecutive groups
    sharing a row are merged.
    """
    n = ugrp.shape[0]
    nb = 1
    bounds[0] = 0
    prev = np.int64(-(n + 10))
    mixed_label = np.int64(-1)
    i = 0
    while i < n:
        j = i
        lab = rows[i]
        mixed = False
        while j < n and ugrp[j] == ugrp[i]:
            if rows[j] != lab:
                mixed = True
            j += 1
        if mixed:
            lab = mixed_label
            mixed_label -= 1
        if i > 0 and lab != prev:
            bounds[nb] = i
            nb += 1
        prev = lab
        i = j
    bounds[nb] = n
    return nb + 1


@njit(cache=True, nogil=True)
def clump_bounds(ugrp, rows):
    bounds = np.empty(ugrp.shape[0] + 1, dtype=np.int64)
    return bounds[:clump_bounds_into(ugrp, rows, bounds)]


@njit(cache=True, nogil=True)
def superclump_bounds(bounds, max_clumps):
    k = bounds.shape[0] - 1
    if k <= max_clumps:
        return bounds
    sizes = np.empty(k, dtype=np.int64)
    for t in range(k):
        sizes[t] = bounds[t + 1] - bounds[t]
    # earlier superclumps take the extra clump when the split is uneven
    cuts = equip_cuts(sizes, max_clumps, False)
    out = np.empty(cuts.shape[0] + 2, dtype=np.int64)
    out[0] = 0
    for i in range(cuts.shape[0]):
        out[i + 1] = bounds[cuts[i]]
    out[cuts.shape[0] + 1] = bounds[k]
    return out


@njit(cache=True, nogil=True)
def candidate_bounds(ugrp, rows, max_clumps):
    return superclump_bounds(clump_bounds(ugrp, rows), max_clumps)


# -------------------------------------------------------------------- DP


@njit(cache=True, nogil=True)
def dp_fill(rows, nrows, bounds, k, max_x, g, cum, w, v, par, ivals,
            track=True):
    """Column DP over the first ``k + 1`` entries of ``bounds`` into given buffers.

    ``ivals[l]`` receives the float mutual information of the best ``l``-column
    partition (entries past ``L = min(max_x, k)`` repeat the value at ``L``);
    ``par`` holds the back-pointers unless ``track`` is false, in which case
    a branch-free maximum is used and ``par`` is left untouched.  Returns ``L``.
    """
    n = rows.shape[0]
    for r in range(nrows):
        cum[0, r] = 0
    for t in range(1, k + 1):
        for r in range(nrows):
            cum[t, r] = cum[t - 1, r]
        for i in range(bounds[t - 1], bounds[t]):
            cum[t, rows[i]] += 1
    big_l = min(max_x, k)
    if big_l <= 2:
        # two columns need only the prefix and suffix segments
        for t in range(1, k + 1):
            acc = -g[bounds[t] - bounds[0]]
            for r in range(nrows):
                acc += g[cum[t, r] - cum[0, r]]
            v[1, t] = acc
        if big_l == 2:
            best = NEG_INF
            arg = 1
            for s in range(1, k):
                acc = -g[bounds[k] - bounds[s]]
                for r in range(nrows):
                    acc += g[cum[k, r] - cum[s, r]]
                cand = v[1, s] + acc
                if cand > best:
                    best = cand
                    arg = s
            v[2, k] = best
            if track:
                par[2, k] = arg
    else:
        for s in range(k):
            for t in range(s + 1, k + 1):
                w[s, t] = -g[bounds[t] - bounds[s]]
            for r in range(nrows):
                base = cum[s, r]
                for t in range(s + 1, k + 1):
                    w[s, t] += g[cum[t, r] - base]
        for t in range(1, k + 1):
            v[1, t] = w[0, t]
    for l in range(2 if big_l > 2 else big_l + 1, big_l + 1):
        t_lo = k if l == big_l else l
        for t in range(t_lo, k + 1):
            best = NEG_INF
            if track:
                arg = l - 1
                for s in range(l - 1, t):
                    cand = v[l - 1, s] + w[s, t]
                    if cand > best:
                        best = cand
                        arg = s
                par[l, t] = arg
            else:
                for s in range(l - 1, t):
                    best = max(best, v[l - 1, s] + w[s, t])
            v[l, t] = best
    const = g[n]
    for r in range(nrows):
        const -= g[cum[k, r]]
    for l in range(1, max_x + 1):
        if l <= big_l:
            ivals[l] = (v[l, k] + const) / n
        else:
            ivals[l] = ivals[big_l]
    return big_l


@njit(cache=True, nogil=True)
def column_dp(rows, nrows, bounds, max_x, g):
    """Allocating wrapper around :func:`dp_fill`; returns ``(ivals, par, L)``."""
    k = bounds.shape[0] - 1
    big_l = min(max_x, k)
    cum = np.empty((k + 1, nrows), dtype=np.int64)
    w = np.empty((k + 1, k + 1), dtype=np.float64)
    v = np.empty((big_l + 1, k + 1), dtype=np.float64)
    par = np.zeros((big_l + 1, k + 1), dtype=np.int64)
    ivals = np.zeros(max(max_x, 1) + 1, dtype=np.float64)
    dp_fill(rows, nrows, bounds, k, max_x, g, cum, w, v, par, ivals)
    return ivals, par, big_l


@njit(cache=True, nogil=True)
def best_columns(ivals, x, big_l):
    """Column count ``<= x`` achieving the float running maximum."""
    best_l = 1
    top = ivals[1]
    for l in range(2, min(x, big_l) + 1):
        if ivals[l] > top:
            top = ivals[l]
            best_l = l
    return best_l


@njit(cache=True, nogil=True)
def backtrack(par, bounds, l):
    k = bounds.shape[0] - 1
    cuts = np.empty(l - 1, dtype=np.int64)
    t = k
    for level in range(l, 1, -1):
        s = par[level, t]
        cuts[level - 2] = bounds[s]
        t = s
    return cuts


@njit(cache=True, nogil=True)
def counts_for(rows, nrows, xcuts):
    n = rows.shape[0]
    counts = np.zeros((xcuts.shape[0] + 1, nrows), dtype=np.int64)
    col = 0
    for i in range(n):
        while col < xcuts.shape[0] and i >= xcuts[col]:
            col += 1
        counts[col, rows[i]] += 1
    return counts


@njit(cache=True, nogil=True)
def exact_row(rows, nrows, bounds, max_x, g, spf):
    """Canonical I* for x = 0..max_x, the column cuts achieving each, and the
    float DP values they were selected from."""
    ivals, par, big_l = column_dp(rows, nrows, bounds, max_x, g)
    exact = np.zeros(max_x + 1, dtype=np.float64)
    xcuts = np.full((max_x + 1, max(max_x - 1, 1)), -1, dtype=np.int64)
    for x in range(2, max_x + 1):
        l = best_columns(ivals, x, big_l)
        cuts = backtrack(par, bounds, l)
        exact[x] = mi_exact(counts_for(rows, nrows, cuts), spf)
        for i in range(cuts.shape[0]):
            xcuts[x, i] = cuts[i]
    return exact, xcuts, ivals


# --------------------------------------------------------------- search
#
# Successive parabolic interpolation over integer positions, written as an
# ask/tell state machine so that compiled callers and plain Python callables
# drive the very same code.  State layout (float64 slots):

_LO, _HI, _START, _ITERS, _TOL = 0, 1, 2, 3, 4
_A, _M, _B, _FA, _FM, _FB = 5, 6, 7, 8, 9, 10
_BEST_POS, _BEST, _PHASE, _DONE_IT, _PENDING, _CURSOR = 11, 12, 13, 14, 15, 16
_FSTART = 17
_STATE_SIZE = 18


@njit(cache=True, nogil=True)
def search_init(lo, hi, start, max_iters, tol):
    st = np.empty(_STATE_SIZE, dtype=np.float64)
    search_reset(st, lo, hi, start, max_iters, tol)
    return st


@njit(cache=True, nogil=True)
def search_reset(st, lo, hi, start, max_iters, tol):
    for i in range(_STATE_SIZE):
        st[i] = 0.0
    st[_LO] = lo
    st[_HI] = hi
    st[_START] = start
    st[_ITERS] = max_iters
    st[_TOL] = tol
    st[_BEST_POS] = start
    st[_PHASE] = 0.0


@njit(cache=True, nogil=True)
def _next_candidate(st):
    # next interior probe of the bracket; the flag is True when finished
    a = int(st[_A])
    m = int(st[_M])
    b = int(st[_B])
    if st[_DONE_IT] >= st[_ITERS] or b - a <= 2:
        return 0, True
    fa = st[_FA]
    fm = st[_FM]
    fb = st[_FB]
    d1 = (m - a) * (fm - fb)
    d2 = (m - b) * (fm - fa)
    curv = (fb - fm) / (b - m) - (fm - fa) / (m - a)
    v = m
    if curv < 0.0:
        den = 2.0 * (d1 - d2)
        if den != 0.0:
            vx = m - ((m - a) * d1 - (m - b) * d2) / den
            v = int(math.floor(vx + 0.5))
            if v <= a:
                v = a + 1
            if v >= b:
                v = b - 1
    if v == m:
        if curv < 0.0:
            # fitted model peaks at m: confirm against the neighbours
            if m - 1 > a:
                v = m - 1
            elif m + 1 < b:
                v = m + 1
            else:
                return 0, True
        elif m - a >= b - m:
            v = (a + m) // 2
        else:
            v = (m + b + 1) // 2
    return v, False


@njit(cache=True, nogil=True)
def search_ask(st):
    """Next position to evaluate; ``done`` is True once the search has ended."""
    phase = int(st[_PHASE])
    lo = int(st[_LO])
    hi = int(st[_HI])
    start = int(st[_START])
    if phase == 0:
        return start, False
    if phase == 1:
        k = int(st[_CURSOR])
        if k == start:
            k += 1
        if k > hi:
            return 0, True
        st[_CURSOR] = k
        return k, False
    if phase == 2:
        return lo, False
    if phase == 3:
        return hi, False
    if phase == 4:
        return (lo + hi) // 2, False
    v, done = _next_candidate(st)
    if not done:
        st[_PENDING] = v
    return v, done


@njit(cache=True, nogil=True)
def search_tell(st, value):
    phase = int(st[_PHASE])
    tol = st[_TOL]
    lo = int(st[_LO])
    hi = int(st[_HI])
    start = int(st[_START])
    if phase == 0:
        st[_BEST] = value
        st[_FSTART] = value
        if hi - lo < 2:
            st[_PHASE] = 1
            st[_CURSOR] = lo
        else:
            st[_PHASE] = 2
        return
    if phase == 1:
        k = int(st[_CURSOR])
        if value > st[_BEST] + tol:
            st[_BEST] = value
            st[_BEST_POS] = k
        st[_CURSOR] = k + 1
        return
    pos = lo
    if phase == 3:
        pos = hi
    elif phase == 4:
        pos = (lo + hi) // 2
    elif phase == 5:
        pos = int(st[_PENDING])
    if value > st[_BEST] + tol:
        st[_BEST] = value
        st[_BEST_POS] = pos
    if phase == 2:
        st[_A] = lo
        st[_FA] = value
        st[_PHASE] = 3
        return
    if phase == 3:
        st[_B] = hi
        st[_FB] = value
        if lo < start < hi:
            st[_M] = start
            st[_FM] = st[_FSTART]
            st[_PHASE] = 5
        else:
            st[_PHASE] = 4
        return
    if phase == 4:
        st[_M] = pos
        st[_FM] = value
        st[_PHASE] = 5
        return
    # phase 5: bracket update after an interior probe
    st[_DONE_IT] += 1
    m = int(st[_M])
    fm = st[_FM]
    if value > fm:
        if pos < m:
            st[_B] = m
            st[_FB] = fm
        else:
            st[_A] = m
            st[_FA] = fm
        st[_M] = pos
        st[_FM] = value
    elif pos < m:
        st[_A] = pos
        st[_FA] = value
    else:
        st[_B] = pos
        st[_FB] = value


# ------------------------------------------------------------ refinement


@njit(cache=True, nogil=True)
def _row_objective(ugrp, vcode, cuts, max_x, max_clumps, g, xstar,
                   best_vals, best_cuts, lut, rows, bbuf, cum, w, v, par,
                   ivals):
    # float I* at xstar for the current row cuts; records per-x bests
    n = vcode.shape[0]
    r = 0
    for c in range(lut.shape[0]):
        while r < cuts.shape[0] and cuts[r] <= c:
            r += 1
        lut[c] = r
    for i in range(n):
        rows[i] = lut[vcode[i]]
    nrows = cuts.shape[0] + 1
    bounds = superclump_bounds(bbuf[:clump_bounds_into(ugrp, rows, bbuf)],
                               max_clumps)
    k = bounds.shape[0] - 1
    dp_fill(rows, nrows, bounds, k, max_x, g, cum, w, v, par, ivals, False)
    run = ivals[1]
    at_star = 0.0
    for x in range(2, max_x + 1):
        if ivals[x] > run:
            run = ivals[x]
        if run > best_vals[x]:
            best_vals[x] = run
            for i in range(cuts.shape[0]):
                best_cuts[x, i] = cuts[i]
        if x == xstar:
            at_star = run
    return at_star


@njit(cache=True, nogil=True)
def refine_row(ugrp, vcode, ndistinct, cuts0, max_x, max_clumps, g, xstar,
               base_vals, max_iters, tol, stop_at=np.inf):
    """Coordinate-wise parabolic refinement of the row cuts at column ``xstar``.

    ``base_vals`` holds the running-max float I* of the starting cuts.  Returns,
    per column count, the best float I* met anywhere in the search together
    with the row cuts producing it.  The search is abandoned as soon as some
    normalised value exceeds ``stop_at``.
    """
    y = cuts0.shape[0] + 1
    cuts = cuts0.copy()
    best_vals = base_vals.copy()
    best_cuts = np.empty((max_x + 1, cuts.shape[0]), dtype=np.int64)
    for x in range(max_x + 1):
        for i in range(cuts.shape[0]):
            best_cuts[x, i] = cuts0[i]
    current = base_vals[xstar]
    ncut = cuts.shape[0]
    n = vcode.shape[0]
    kcap = min(n, max_clumps)
    lut = np.empty(ndistinct, dtype=np.int64)
    rows = np.empty(n, dtype=np.int64)
    bbuf = np.empty(n + 1, dtype=np.int64)
    cum = np.empty((kcap + 1, ncut + 1), dtype=np.int64)
    w = np.empty((kcap + 1, kcap + 1), dtype=np.float64)
    v = np.empty((min(max_x, kcap) + 1, kcap + 1), dtype=np.float64)
    par = np.empty((min(max_x, kcap) + 1, kcap + 1), dtype=np.int64)
    ivals = np.zeros(max_x + 1, dtype=np.float64)
    # a cut is searched again only after another cut of the row has moved
    dirty = np.ones(ncut, dtype=np.bool_)
    st = np.empty(_STATE_SIZE, dtype=np.float64)
    for _ in range(max_iters):
        moved = False
        for j in range(ncut):
            if not dirty[j]:
                continue
            dirty[j] = False
            lo = cuts[j - 1] + 1 if j > 0 else 1
            hi = cuts[j + 1] - 1 if j < ncut - 1 else ndistinct - 1
            if lo >= hi:
                continue
            origin = cuts[j]
            search_reset(st, lo, hi, origin, max_iters, tol)
            search_ask(st)
            search_tell(st, current)
            while True:
                pos, done = search_ask(st)
                if done:
                    break
                cuts[j] = pos
                search_tell(st, _row_objective(ugrp, vcode, cuts, max_x,
                                               max_clumps, g, xstar,
                                               best_vals, best_cuts, lut,
                                               rows, bbuf, cum, w, v, par,
                                               ivals))
                if stop_at < np.inf:
                    for x in range(2, max_x + 1):
                        if best_vals[x] / math.log2(min(x, y)) > stop_at:
                            return best_vals, best_cuts
            pos = int(st[_BEST_POS])
            if st[_BEST] > current + tol and pos != origin:
                cuts[j] = pos
                current = st[_BEST]
                moved = True
                for i in range(ncut):
                    if i != j:
                        dirty[i] = True
            else:
                cuts[j] = origin
        if not moved:
            break
    return best_vals, best_cuts


# ---------------------------------------------------------- orientation


@njit(cache=True, nogil=True)
def prepare(u, v):
    """Integer codes for the orientation 'columns along u, rows along v'."""
    n = u.shape[0]
    order = np.argsort(u, kind="mergesort")
    ugrp = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        ugrp[i] = ugrp[i - 1] + (1 if u[order[i]] != u[order[i - 1]] else 0)
    vorder = np.argsort(v, kind="mergesort")
    code = np.zeros(n, dtype=np.int64)
    d = 0
    for i in range(1, n):
        if v[vorder[i]] != v[vorder[i - 1]]:
            d += 1
        code[vorder[i]] = d
    vcnt = np.zeros(d + 1, dtype=np.int64)
    for i in range(n):
        vcnt[code[i]] += 1
    vcode = np.empty(n, dtype=np.int64)
    for i in range(n):
        vcode[i] = code[order[i]]
    return ugrp, vcode, vcnt


@njit(cache=True, nogil=True)
def _row_score(ivals, y):
    best = 0.0
    for c in range(2, ivals.shape[1]):
        if ivals[y, c] >= 0.0:
            score = ivals[y, c] / math.log2(min(y, c))
            if score > 1.0:
                score = 1.0
            if score > best:
                best = score
    return best


@njit(cache=True, nogil=True)
def baseline_row(ugrp, vcode, vcnt, y, budget, clump_factor, g, spf, ivals,
                 xcuts, ycuts):
    """Fill row ``y`` of the orientation tables from the equipartitioned cuts.

    Returns the running-max float I* per column count (the refinement seed);
    empty when the row admits no grid.
    """
    max_x = int(math.floor(budget / y))
    if max_x < 2:
        return np.empty(0, dtype=np.float64)
    cuts = equip_cuts(vcnt, y)
    rows = rows_from_cuts(vcode, cuts)
    bounds = candidate_bounds(ugrp, rows, clump_factor * max_x)
    exact, xc, base = exact_row(rows, cuts.shape[0] + 1, bounds, max_x, g, spf)
    for x in range(2, max_x + 1):
        ivals[y, x] = exact[x]
        for i in range(max_x - 1):
            xcuts[y, x, i] = xc[x, i]
        for i in range(cuts.shape[0]):
            ycuts[y, x, i] = cuts[i]
    for x in range(3, max_x + 1):
        if base[x] < base[x - 1]:
            base[x] = base[x - 1]
    return base


@njit(cache=True, nogil=True)
def refine_entries(ugrp, vcode, vcnt, y, budget, clump_factor, max_iters, tol,
                   g, spf, ivals, xcuts, ycuts, base, threshold=np.inf):
    """Improve row ``y`` (already filled by :func:`baseline_row`) by refinement.

    With a finite ``threshold`` only the decision "does the row reach it" is
    kept exact: the search stops once a float value clears the threshold, and
    exact re-evaluation is skipped when the float optimum stays clearly below.
    """
    ndist = vcnt.shape[0]
    xtop = ivals.shape[1] - 1
    max_x = int(math.floor(budget / y))
    cuts = equip_cuts(vcnt, y)
    if max_x < 2 or cuts.shape[0] == 0:
        return
    max_clumps = clump_factor * max_x
    nrows = cuts.shape[0] + 1
    xstar = 2
    top = -1.0
    for x in range(2, max_x + 1):
        score = ivals[y, x] / math.log2(min(x, y))
        if score > top:
            top = score
            xstar = x
    best_vals, best_cuts = refine_row(ugrp, vcode, ndist, cuts, max_x,
                                      max_clumps, g, xstar, base,
                                      max_iters, tol, threshold + 1e-9)
    if threshold < np.inf:
        # the exact values only matter when the float optimum comes close
        top = 0.0
        for x in range(2, max_x + 1):
            top = max(top, best_vals[x] / math.log2(min(x, y)))
        if top < threshold - 1e-9:
            return
    # column counts sharing refined cuts share one exact evaluation
    have = 0
    rc = cuts
    rexact = np.zeros(1, dtype=np.float64)
    rxc = np.zeros((1, 1), dtype=np.int64)
    for x in range(max_x, 1, -1):
        if best_vals[x] <= base[x]:
            continue
        same = have >= x
        if same:
            for i in range(rc.shape[0]):
                if rc[i] != best_cuts[x, i]:
                    same = False
                    break
        if not same:
            rc = best_cuts[x].copy()
            rrows = rows_from_cuts(vcode, rc)
            rbounds = candidate_bounds(ugrp, rrows, max_clumps)
            rexact, rxc, _ = exact_row(rrows, nrows, rbounds, x, g, spf)
            have = x
        if rexact[x] > ivals[y, x]:
            ivals[y, x] = rexact[x]
            for i in range(xtop):
                xcuts[y, x, i] = -1
            for i in range(x - 1):
                xcuts[y, x, i] = rxc[x, i]
            for i in range(rc.shape[0]):
                ycuts[y, x, i] = rc[i]


@njit(cache=True, nogil=True)
def orientation(u, v, budget, clump_factor, refine, max_iters, tol, g, spf):
    """Unnormalised canonical I* for every (rows, cols) grid in one orientation.

    Returns ``(ivals, xcuts, ycuts)`` indexed by ``[rows, cols]``; ``ivals`` is
    -1 where a grid was not evaluated.  ``xcuts`` are point positions in
    u-sorted order, ``ycuts`` are code cuts along v.
    """
    ugrp, vcode, vcnt = prepare(u, v)
    ymax = int(math.floor(budget / 2.0))
    xtop = max(int(math.floor(budget / 2.0)), 2)
    ivals = np.full((ymax + 1, xtop + 1), -1.0)
    xcuts = np.full((ymax + 1, xtop + 1, xtop), -1, dtype=np.int64)
    ycuts = np.full((ymax + 1, xtop + 1, max(ymax, 1)), -1, dtype=np.int64)
    ndist = vcnt.shape[0]
    if ndist < 2 or ugrp[ugrp.shape[0] - 1] == 0:
        return ivals, xcuts, ycuts
    for y in range(2, ymax + 1):
        base = baseline_row(ugrp, vcode, vcnt, y, budget, clump_factor, g, spf,
                            ivals, xcuts, ycuts)
        if refine and base.shape[0] > 0:
            refine_entries(ugrp, vcode, vcnt, y, budget, clump_factor,
                           max_iters, tol, g, spf, ivals, xcuts, ycuts, base)
    return ivals, xcuts, ycuts


@njit(cache=True, nogil=True)
def grid_budget(n, alpha):
    return max(n ** alpha, 4.0)


@njit(cache=True, nogil=True)
def mic_value(a, b, alpha, clump_factor, refine, max_iters, tol):
    """MIC of (a, b) over both orientations; 0 for a constant axis."""
    n = a.shape[0]
    budget = grid_budget(n, alpha)
    g = plogp_table(n)
    spf = smallest_prime_factors(n)
    best = 0.0
    for side in range(2):
        if side == 0:
            iv, _, _ = orientation(a, b, budget, clump_factor, refine,
                                   max_iters, tol, g, spf)
        else:
            iv, _, _ = orientation(b, a, budget, clump_factor, refine,
                                   max_iters, tol, g, spf)
        for r in range(2, iv.shape[0]):
            for c in range(2, iv.shape[1]):
                if iv[r, c] >= 0.0:
                    score = iv[r, c] / math.log2(min(r, c))
                    if score > 1.0:
                        score = 1.0
                    if score > best:
                        best = score
    return best


@njit(cache=True, nogil=True)
def permuted_mic_values(a, b, perms, alpha, clump_factor, refine, max_iters,
                        tol):
    out = np.empty(perms.shape[0], dtype=np.float64)
    for p in range(perms.shape[0]):
        out[p] = mic_value(a, b[perms[p]], alpha, clump_factor, refine,
                           max_iters, tol)
    return out


@njit(cache=True, nogil=True)
def _split_bound(ugrp, vcode, ndistinct, max_x, g):
    # best float MI of at most l columns against every distinct row value
    ivals = column_dp(vcode, ndistinct, clump_bounds(ugrp, vcode), max_x, g)[0]
    for x in range(2, max_x + 1):
        ivals[x] = max(ivals[x], ivals[x - 1])
    return ivals


@njit(cache=True, nogil=True)
def mic_reaches(a, b, threshold, alpha, clump_factor, refine, max_iters, tol,
                g, spf):
    """Whether the MIC of (a, b) is at least ``threshold``.

    Gives the same answer as comparing :func:`mic_value` with ``threshold``.
    Every baseline row of both orientations is scored first, and a row is
    refined only when no baseline (a lower bound on the refined score)
    reaches the threshold already.  A row is also skipped when an upper bound
    on any of its grids falls short: rows are a function of the row variable,
    so a grid never carries more information than its columns do about the
    full row variable, and symmetrically for its rows.
    """
    n = a.shape[0]
    budget = grid_budget(n, alpha)
    ymax = int(math.floor(budget / 2.0))
    xtop = max(ymax, 2)
    ivals = np.full((2, ymax + 1, xtop + 1), -1.0)
    xcuts = np.full((ymax + 1, xtop + 1, xtop), -1, dtype=np.int64)
    ycuts = np.full((ymax + 1, xtop + 1, max(ymax, 1)), -1, dtype=np.int64)
    bases = np.full((2, ymax + 1, xtop + 1), -1.0)
    u0, v0, c0 = prepare(a, b)
    u1, v1, c1 = prepare(b, a)
    if c0.shape[0] < 2 or c1.shape[0] < 2:
        return 0.0 >= threshold
    for side in range(2):
        ugrp, vcode, vcnt = (u0, v0, c0) if side == 0 else (u1, v1, c1)
        for y in range(2, ymax + 1):
            base = baseline_row(ugrp, vcode, vcnt, y, budget, clump_factor, g,
                                spf, ivals[side], xcuts, ycuts)
            for x in range(base.shape[0]):
                bases[side, y, x] = base[x]
            if _row_score(ivals[side], y) >= threshold:
                return True
    if not refine:
        return False
    # best l-part split of each variable against the other one in full
    fa = _split_bound(u0, v0, c0.shape[0], xtop, g)
    fb = _split_bound(u1, v1, c1.shape[0], xtop, g)
    for side in range(2):
        ugrp, vcode, vcnt = (u0, v0, c0) if side == 0 else (u1, v1, c1)
        fcol, frow = (fa, fb) if side == 0 else (fb, fa)
        for y in range(2, ymax + 1):
            max_x = int(math.floor(budget / y))
            if max_x < 2:
                continue
            bound = 0.0
            for x in range(2, max_x + 1):
                bound = max(bound, min(fcol[x], frow[y]) / math.log2(min(x, y)))
            if bound < threshold - 1e-9:
                continue
            refine_entries(ugrp, vcode, vcnt, y, budget, clump_factor,
                           max_iters, tol, g, spf, ivals[side], xcuts, ycuts,
                           bases[side, y, :max_x + 1].copy(), threshold)
            if _row_score(ivals[side], y) >= threshold:
                return True
    return False


@njit(cache=True, nogil=True)
def permutation_hits(a, b, perms, threshold, alpha, clump_factor, refine,
                     max_iters, tol, stop_at=-1):
    """How many permutations ``b[perm]`` reach an MIC of ``threshold``.

    With ``stop_at >= 0`` counting ends once that many hits are found.
    """
    n = a.shape[0]
    g = plogp_table(n)
    spf = smallest_prime_factors(n)
    hits = 0
    for p in range(perms.shape[0]):
        if mic_reaches(a, b[perms[p]], threshold, alpha, clump_factor, refine,
                       max_iters, tol, g, spf):
            hits += 1
            if hits == stop_at:
                break
    return hits
