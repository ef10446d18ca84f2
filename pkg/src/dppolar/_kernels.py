"""Compiled list-decoding kernel.

Per-path state layout (length-n rows): the LLRs of the node at depth
d >= 1 live at ``[n >> d, 2 * (n >> d))`` and, at the same offsets, the
codeword of the most recently finished left child at that depth. Depth 0
is the channel LLR vector, shared by every path.
"""
import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _boxplus(a, b, exact):
    s = 1.0 if (a >= 0) == (b >= 0) else -1.0
    r = s * min(abs(a), abs(b))
    if exact:
        r += np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))
    return r


@njit(cache=True, inline="always")
def _penalty(llr, bit, exact):
    x = llr if bit == 0 else -llr
    p = -x if x < 0 else 0.0
    if exact:
        p += np.log1p(np.exp(-abs(x)))
    return p


@njit(cache=True)
def _update_llrs(root, llr_row, cl_row, i, m, n, exact):
    if i == 0:
        d0 = 1
    else:
        t = 0
        while (i >> t) & 1 == 0:
            t += 1
        d0 = m - t
    for d in range(d0, m + 1):
        h = n >> d
        if d == 1:
            for j in range(h):
                a = root[j]
                b = root[j + h]
                if d == d0 and i != 0:
                    llr_row[h + j] = b + (1.0 - 2.0 * cl_row[h + j]) * a
                else:
                    llr_row[h + j] = _boxplus(a, b, exact)
        else:
            p = 2 * h
            for j in range(h):
                a = llr_row[p + j]
                b = llr_row[p + h + j]
                if d == d0:
                    llr_row[h + j] = b + (1.0 - 2.0 * cl_row[h + j]) * a
                else:
                    llr_row[h + j] = _boxplus(a, b, exact)


@njit(cache=True)
def _propagate(cl_row, bit, i, m, cur, tmp):
    cur[0] = bit
    d = m
    h = 1
    while d > 0 and (i >> (m - d)) & 1 == 1:
        for j in range(h):
            tmp[j] = cl_row[h + j] ^ cur[j]
            tmp[h + j] = cur[j]
        for j in range(2 * h):
            cur[j] = tmp[j]
        d -= 1
        h *= 2
    if d > 0:
        for j in range(h):
            cl_row[h + j] = cur[j]


@njit(cache=True)
def _parity_ok(u_row, info_idx, parity, k):
    lc = parity.shape[0]
    for r in range(lc):
        acc = 0
        for j in range(k):
            if parity[r, j]:
                acc ^= u_row[info_idx[j]]
        if acc != u_row[info_idx[k + r]]:
            return False
    return True


@njit(cache=True)
def _workspace(L, n):
    return (np.zeros((L, n)), np.zeros((L, n), np.uint8),
            np.zeros((n, L), np.uint8), np.zeros((n, L), np.int32),
            np.zeros(L, np.int64), np.zeros(L, np.int64), np.zeros(L), np.zeros(2 * L),
            np.zeros(L, np.int64), np.zeros(L, np.bool_), np.zeros(n, np.uint8), np.zeros(n, np.uint8))


@njit(cache=True)
def _depth0(i, m):
    # first depth whose LLRs change when moving to bit i
    if i == 0:
        return 1
    t = 0
    while (i >> t) & 1 == 0:
        t += 1
    return m - t


@njit(cache=True, nogil=True)
def _run_list(root, info_mask, L, exact, ws):
    """Decode one frame; returns (pm, npaths). Path decisions stay in the
    workspace as per-bit (bit, parent position) records for backtracking.

    List positions are ordered; storage slots are reused in place so only
    the second child of a fork is copied, and only the LLR depths still
    needed by the next bit.
    """
    llr, cl, bits, par, slot, slot2, pm, cand, child, claimed, cur, tmp = ws
    n = root.size
    m = 0
    while (1 << m) < n:
        m += 1
    npaths = 1
    slot[0] = 0
    pm[0] = 0.0
    for i in range(n):
        for p in range(npaths):
            _update_llrs(root, llr[slot[p]], cl[slot[p]], i, m, n, exact)
        if not info_mask[i]:
            for p in range(npaths):
                s = slot[p]
                pm[p] += _penalty(llr[s, 1], 0, exact)
                bits[i, p] = 0
                par[i, p] = p
                _propagate(cl[s], 0, i, m, cur, tmp)
            continue
        nc = 2 * npaths
        for p in range(npaths):
            lam = llr[slot[p], 1]
            cand[2 * p] = pm[p] + _penalty(lam, 0, exact)
            cand[2 * p + 1] = pm[p] + _penalty(lam, 1, exact)
        # stable sort: equal metrics keep (parent position, fork bit) order
        order = np.argsort(cand[:nc], kind="mergesort")
        keep = min(nc, L)
        for p in range(npaths):
            claimed[p] = False
        for j in range(keep):
            p = order[j] >> 1
            if not claimed[p]:
                claimed[p] = True
                slot2[j] = slot[p]
            else:
                slot2[j] = -1
        # slots of parents with no surviving child, then never-used slots
        nfree = 0
        for p in range(npaths):
            if not claimed[p]:
                child[nfree] = slot[p]
                nfree += 1
        for s in range(npaths, L):
            child[nfree] = s
            nfree += 1
        lo = n >> (_depth0(i + 1, m) - 1) if i + 1 < n else n
        f = 0
        for j in range(keep):
            if slot2[j] < 0:
                src = slot[order[j] >> 1]
                dst = child[f]
                f += 1
                llr[dst, lo:] = llr[src, lo:]
                cl[dst, :] = cl[src, :]
                slot2[j] = dst
        for j in range(keep):
            c = order[j]
            bit = c & 1
            bits[i, j] = bit
            par[i, j] = c >> 1
            _propagate(cl[slot2[j]], bit, i, m, cur, tmp)
        for j in range(keep):
            slot[j] = slot2[j]
            pm[j] = cand[order[j]]
        npaths = keep
    return pm, npaths


@njit(cache=True)
def _backtrack(bits, par, pos, out):
    n = bits.shape[0]
    for i in range(n - 1, -1, -1):
        out[i] = bits[i, pos]
        pos = par[i, pos]


@njit(cache=True, nogil=True)
def scl_batch(llrs, info_mask, L, parity, exact, out_u, out_ok, out_metric):
    """List-decode every row of ``llrs``.

    ``parity`` is an (lc, k) 0/1 matrix over the first k information bits
    checked against the last lc; lc == 0 disables CRC selection.
    """
    B, n = llrs.shape
    info_idx = np.nonzero(info_mask)[0]
    lc = parity.shape[0]
    k = info_idx.size - lc
    ws = _workspace(L, n)
    bits = ws[2]
    par = ws[3]
    row = np.zeros(n, np.uint8)
    for b in range(B):
        pm, npaths = _run_list(llrs[b], info_mask, L, exact, ws)
        order = np.argsort(pm[:npaths], kind="mergesort")
        chosen = order[0]
        ok = True
        if lc > 0:
            ok = False
            for j in range(npaths):
                _backtrack(bits, par, order[j], row)
                if _parity_ok(row, info_idx, parity, k):
                    chosen = order[j]
                    ok = True
                    break
        _backtrack(bits, par, chosen, row)
        out_u[b, :] = row
        out_ok[b] = ok
        out_metric[b] = pm[chosen]


@njit(cache=True, nogil=True)
def scl_list(root, info_mask, L, exact):
    """Single frame; the final list sorted by metric (stable)."""
    n = root.size
    ws = _workspace(L, n)
    pm, npaths = _run_list(root, info_mask, L, exact, ws)
    order = np.argsort(pm[:npaths], kind="mergesort")
    u = np.zeros((npaths, n), np.uint8)
    metrics = np.zeros(npaths)
    for j in range(npaths):
        _backtrack(ws[2], ws[3], order[j], u[j])
        metrics[j] = pm[order[j]]
    return u, metrics
