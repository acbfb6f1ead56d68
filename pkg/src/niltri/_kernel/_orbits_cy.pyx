# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit BFS kernel.

Mirror of _orbits_py (same state codes, move set, move ids, traversal
order); see that module for the move semantics.  This one exists because a
full partition at n = 4, q = 13 walks ~5M states times ~100 moves each.
"""

import numpy as np

from .moves import f_move, p_move, q_move  # noqa: F401  (parity reference)

DEF NDMAX = 21
DEF NMAX = 7
DEF QMAX = 64


cdef struct Spc:
    int n
    int q
    int nd
    long long size
    int idx[NMAX + 1][NMAX + 1]
    int inv[QMAX]


cdef int _init_spc(Spc* sp, int n, int q) except -1:
    cdef int r, c, a
    if n < 2 or n > NMAX:
        raise ValueError(f"kernel supports 2 <= n <= {NMAX}, got {n}")
    if q < 3 or q >= QMAX:
        raise ValueError(f"kernel supports odd primes 3 <= q < {QMAX}, got {q}")
    sp.n = n
    sp.q = q
    sp.nd = n * (n - 1) // 2
    sp.size = 1
    for r in range(sp.nd):
        sp.size *= q
    for r in range(2, n + 1):
        for c in range(1, r):
            sp.idx[r][c] = (r - 1) * (r - 2) // 2 + (c - 1)
    sp.inv[0] = 0
    for a in range(1, q):
        sp.inv[a] = _powmod(a, q - 2, q)
    return 0


cdef int _powmod(int b, int e, int q) noexcept nogil:
    cdef long long acc = 1, bb = b
    while e:
        if e & 1:
            acc = acc * bb % q
        bb = bb * bb % q
        e >>= 1
    return <int> acc


cdef inline void _decode(Spc* sp, long long code, int* t) noexcept nogil:
    cdef int i
    for i in range(sp.nd):
        t[i] = <int> (code % sp.q)
        code //= sp.q


cdef inline long long _encode(Spc* sp, int* t) noexcept nogil:
    cdef long long code = 0
    cdef int i
    for i in range(sp.nd - 1, -1, -1):
        code = code * sp.q + t[i]
    return code


cdef inline int _visit(long long sc, int mid, long long code, int lab,
                       int* labels, long long* queue, long long* tail,
                       long long* pprev, int* pmove) noexcept nogil:
    if labels[sc] == -1:
        labels[sc] = lab
        queue[tail[0]] = sc
        tail[0] += 1
        if pprev != NULL:
            pprev[sc] = code
            pmove[sc] = mid
        return 0
    return 1 if labels[sc] != lab else 0


cdef long long _bfs(Spc* sp, long long seed, int lab, int* labels,
                    long long* queue, long long* pprev, int* pmove) noexcept nogil:
    """BFS closure from seed; returns visit count, or -1 on an orbit leak."""
    cdef long long head = 0, tail = 0, code, sc
    cdef int t[NDMAX]
    cdef int s[NDMAX]
    cdef int n = sp.n, q = sp.q, nd = sp.nd
    cdef int r, a, ainv, c, rr, i, j, r1, r2, b, k0, tki, d, forced, bad, mid
    labels[seed] = lab
    queue[tail] = seed
    tail += 1
    while head < tail:
        code = queue[head]
        head += 1
        _decode(sp, code, t)

        # P moves: scale row r by 1/a and column r by a  (a = 1 skipped)
        for r in range(1, n + 1):
            for a in range(2, q):
                ainv = sp.inv[a]
                for i in range(nd):
                    s[i] = t[i]
                for c in range(1, r):
                    i = sp.idx[r][c]
                    s[i] = s[i] * ainv % q
                for rr in range(r + 1, n + 1):
                    i = sp.idx[rr][r]
                    s[i] = s[i] * a % q
                sc = _encode(sp, s)
                if _visit(sc, (1 << 24) | (r << 16) | a, code, lab,
                          labels, queue, &tail, pprev, pmove):
                    return -1

        # F moves: simultaneous row/column swap under the zero conditions
        for r1 in range(1, n):
            for r2 in range(r1 + 1, n + 1):
                bad = 0
                for j in range(r1, r2):
                    if t[sp.idx[r2][j]] != 0:
                        bad = 1
                        break
                if not bad:
                    for rr in range(r1 + 1, r2 + 1):
                        if t[sp.idx[rr][r1]] != 0:
                            bad = 1
                            break
                if bad:
                    continue
                for r in range(2, n + 1):
                    for c in range(1, r):
                        i = r2 if r == r1 else (r1 if r == r2 else r)
                        j = r2 if c == r1 else (r1 if c == r2 else c)
                        s[sp.idx[r][c]] = t[sp.idx[i][j]] if i > j else 0
                sc = _encode(sp, s)
                if _visit(sc, (2 << 24) | (r1 << 16) | r2, code, lab,
                          labels, queue, &tail, pprev, pmove):
                    return -1

        # Q moves: shear column k0 by beta * column r0, for every site k0
        # bounding the support of row r0 (r1 plays r0 here)
        for r1 in range(2, n + 1):
            c = 0
            for j in range(r1 - 1, 0, -1):
                if t[sp.idx[r1][j]] != 0:
                    c = j
                    break
            k0 = c if c > 1 else 1
            while k0 < r1:
                if k0 == 1:
                    for b in range(1, q):
                        _shear(sp, t, s, r1, 1, b)
                        sc = _encode(sp, s)
                        if _visit(sc, (3 << 24) | (r1 << 20) | (1 << 16) | b, code,
                                  lab, labels, queue, &tail, pprev, pmove):
                            return -1
                    k0 += 1
                    continue
                forced = -1
                bad = 0
                for i in range(1, k0):
                    tki = t[sp.idx[k0][i]]
                    d = (t[sp.idx[r1][i]] + t[sp.idx[r1][k0]] * tki) % q
                    if tki != 0:
                        b = d * sp.inv[tki] % q
                        if b == 0 or (forced != -1 and b != forced):
                            bad = 1
                            break
                        forced = b
                    elif d != 0:
                        bad = 1
                        break
                if bad:
                    k0 += 1
                    continue
                if forced != -1:
                    _shear(sp, t, s, r1, k0, forced)
                    sc = _encode(sp, s)
                    if _visit(sc, (3 << 24) | (r1 << 20) | (k0 << 16) | forced, code,
                              lab, labels, queue, &tail, pprev, pmove):
                        return -1
                else:
                    for b in range(1, q):
                        _shear(sp, t, s, r1, k0, b)
                        sc = _encode(sp, s)
                        if _visit(sc, (3 << 24) | (r1 << 20) | (k0 << 16) | b, code,
                                  lab, labels, queue, &tail, pprev, pmove):
                            return -1
                k0 += 1
    return tail


cdef inline void _shear(Spc* sp, int* t, int* s, int r0, int k0, int b) noexcept nogil:
    cdef int i, j, rr, q = sp.q
    for i in range(sp.nd):
        s[i] = t[i]
    i = sp.idx[r0][k0]
    s[i] = ((t[i] - 2 * b) % q + q) % q
    for rr in range(r0 + 1, sp.n + 1):
        j = sp.idx[rr][k0]
        s[j] = (t[j] + b * t[sp.idx[rr][r0]]) % q


def successors(int n, int q, long long code):
    """All (move_id, successor_code) pairs from one state (parity with the twin)."""
    from . import _orbits_py
    return _orbits_py.successors(n, q, code)


def partition(int n, int q):
    cdef Spc sp
    _init_spc(&sp, n, q)
    labels_np = np.full(sp.size, -1, dtype=np.int32)
    queue_np = np.empty(sp.size, dtype=np.int64)
    cdef int[::1] labels = labels_np
    cdef long long[::1] queue = queue_np
    cdef long long seed, got
    cdef int lab = 0
    reps = []
    for seed in range(sp.size):
        if labels[seed] != -1:
            continue
        with nogil:
            got = _bfs(&sp, seed, lab, &labels[0], &queue[0], NULL, NULL)
        if got < 0:
            raise RuntimeError(
                f"orbit of state {seed} leaks into an earlier orbit: "
                "ETO reachability is not symmetric here"
            )
        reps.append(seed)
        lab += 1
    return labels_np, np.array(reps, dtype=np.int64)


def orbit_codes(int n, int q, long long seed):
    cdef Spc sp
    _init_spc(&sp, n, q)
    labels_np = np.full(sp.size, -1, dtype=np.int32)
    queue_np = np.empty(sp.size, dtype=np.int64)
    cdef int[::1] labels = labels_np
    cdef long long[::1] queue = queue_np
    cdef long long got
    with nogil:
        got = _bfs(&sp, seed, 0, &labels[0], &queue[0], NULL, NULL)
    out = queue_np[:got].copy()
    out.sort()
    return out


def orbit_with_parents(int n, int q, long long seed):
    cdef Spc sp
    _init_spc(&sp, n, q)
    labels_np = np.full(sp.size, -1, dtype=np.int32)
    queue_np = np.empty(sp.size, dtype=np.int64)
    prev_np = np.full(sp.size, -1, dtype=np.int64)
    move_np = np.full(sp.size, -1, dtype=np.int32)
    cdef int[::1] labels = labels_np
    cdef long long[::1] queue = queue_np
    cdef long long[::1] prev = prev_np
    cdef int[::1] move = move_np
    cdef long long got
    with nogil:
        got = _bfs(&sp, seed, 0, &labels[0], &queue[0], &prev[0], &move[0])
    out = queue_np[:got].copy()
    out.sort()
    return out, prev_np, move_np
