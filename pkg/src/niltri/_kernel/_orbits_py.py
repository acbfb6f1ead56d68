"""Pure-Python orbit BFS over strictly lower matrices modulo an odd prime.

States are base-q integer codes of the sub-diagonal entries in row-major
order (t21, t31, t32, t41, ...).  This module is the readable twin of the
compiled kernel: identical encoding, move set, move ids, and traversal
order, so the two can be cross-checked state by state.

Move semantics (P scaling, F constrained swap, Q leader shear) mirror the
public FieldElement-level operations in niltri.eto; legality rules:

  * P_r(alpha): always legal for alpha != 0.  alpha = 1 is the identity and
    is skipped here (it never changes closures).
  * F_(r1,r2): row r2 zero on columns [r1, r2) and column r1 zero on rows
    (r1, r2].
  * Q at (r0, k0): the site must bound the support of row r0 (t_{r0,k} = 0
    for k > k0; the attained leader is the generic case, zero rows admit
    every site).  For k0 = 1 beta ranges over all units; for k0 > 1 beta
    must satisfy t_{r0,i} + t_{r0,k0} t_{k0,i} = beta t_{k0,i} for every
    i < k0, which forces a single beta, leaves it free, or rules the move
    out.  With sites read this way every move is undone by a single move
    (P by P, F by F, Q by Q with -beta), so breadth-first closure computes
    genuine equivalence classes; the partition routine still guards this.
"""

from __future__ import annotations

import numpy as np

from .moves import f_move, p_move, q_move


class _Space:
    def __init__(self, n, q):
        self.n = n
        self.q = q
        self.nd = n * (n - 1) // 2
        self.size = q**self.nd
        self.inv = [0] * q
        for a in range(1, q):
            self.inv[a] = pow(a, q - 2, q)
        self.idx = [[0] * (n + 1) for _ in range(n + 1)]
        for r in range(2, n + 1):
            for c in range(1, r):
                self.idx[r][c] = (r - 1) * (r - 2) // 2 + (c - 1)

    def decode(self, code):
        q = self.q
        t = [0] * self.nd
        for i in range(self.nd):
            t[i] = code % q
            code //= q
        return t

    def encode(self, t):
        code = 0
        for i in range(self.nd - 1, -1, -1):
            code = code * self.q + t[i]
        return code

    def entry(self, t, r, c):
        return t[self.idx[r][c]] if r > c else 0

    def successors(self, t):
        """Yield (move_id, successor_digits) in the canonical move order."""
        n, q, idx = self.n, self.q, self.idx
        for r in range(1, n + 1):
            for a in range(2, q):
                ainv = self.inv[a]
                s = t[:]
                for c in range(1, r):
                    i = idx[r][c]
                    s[i] = s[i] * ainv % q
                for rr in range(r + 1, n + 1):
                    i = idx[rr][r]
                    s[i] = s[i] * a % q
                yield p_move(r, a), s
        for r1 in range(1, n):
            for r2 in range(r1 + 1, n + 1):
                if any(t[idx[r2][j]] for j in range(r1, r2)):
                    continue
                if any(t[idx[rr][r1]] for rr in range(r1 + 1, r2 + 1)):
                    continue
                s = [0] * self.nd
                for r in range(2, n + 1):
                    for c in range(1, r):
                        x = r2 if r == r1 else r1 if r == r2 else r
                        y = r2 if c == r1 else r1 if c == r2 else c
                        s[idx[r][c]] = self.entry(t, x, y)
                yield f_move(r1, r2), s
        for r0 in range(2, n + 1):
            c = 0
            for cc in range(r0 - 1, 0, -1):
                if t[idx[r0][cc]]:
                    c = cc
                    break
            for k0 in range(max(c, 1), r0):
                if k0 == 1:
                    for b in range(1, q):
                        yield q_move(r0, 1, b), self._shear(t, r0, 1, b)
                    continue
                betas = self._q_betas(t, r0, k0)
                if betas == "free":
                    for b in range(1, q):
                        yield q_move(r0, k0, b), self._shear(t, r0, k0, b)
                elif betas is not None:
                    yield q_move(r0, k0, betas), self._shear(t, r0, k0, betas)

    def _q_betas(self, t, r0, k0):
        """Admissible beta set at a k0 > 1 site: 'free', a forced unit, or None."""
        q, idx = self.q, self.idx
        forced = None
        for i in range(1, k0):
            tki = t[idx[k0][i]]
            d = (t[idx[r0][i]] + t[idx[r0][k0]] * tki) % q
            if tki:
                b = d * self.inv[tki] % q
                if b == 0 or (forced is not None and b != forced):
                    return None
                forced = b
            elif d:
                return None
        return forced if forced is not None else "free"

    def _shear(self, t, r0, k0, b):
        q, idx = self.q, self.idx
        s = t[:]
        i0 = idx[r0][k0]
        s[i0] = (s[i0] - 2 * b) % q
        for rr in range(r0 + 1, self.n + 1):
            j = idx[rr][k0]
            s[j] = (s[j] + b * t[idx[rr][r0]]) % q
        return s


def successors(n, q, code):
    """All (move_id, successor_code) pairs from one state."""
    sp = _Space(n, q)
    t = sp.decode(code)
    return [(mid, sp.encode(s)) for mid, s in sp.successors(t)]


def _bfs(sp, seed, lab, labels, queue, parents):
    """BFS one orbit; returns the list of discovered codes.

    Raises if the frontier touches a state claimed by an earlier orbit:
    that would mean ETO reachability is not symmetric, which the whole
    orbit/partition machinery relies on.
    """
    labels[seed] = lab
    queue.clear()
    queue.append(seed)
    head = 0
    while head < len(queue):
        code = queue[head]
        head += 1
        t = sp.decode(code)
        for mid, s in sp.successors(t):
            sc = sp.encode(s)
            l2 = labels[sc]
            if l2 == -1:
                labels[sc] = lab
                queue.append(sc)
                if parents is not None:
                    parents[sc] = (code, mid)
            elif l2 != lab:
                raise RuntimeError(
                    f"orbit of state {seed} leaks into orbit {l2}: "
                    "ETO reachability is not symmetric here"
                )
    return list(queue)


def partition(n, q):
    """Label every state with its orbit id.  Returns (labels, reps)."""
    sp = _Space(n, q)
    labels = [-1] * sp.size
    queue = []
    reps = []
    for seed in range(sp.size):
        if labels[seed] == -1:
            _bfs(sp, seed, len(reps), labels, queue, None)
            reps.append(seed)
    return np.array(labels, dtype=np.int32), np.array(reps, dtype=np.int64)


def orbit_codes(n, q, seed):
    sp = _Space(n, q)
    labels = [-1] * sp.size
    codes = _bfs(sp, seed, 0, labels, [], None)
    codes.sort()
    return np.array(codes, dtype=np.int64)


def orbit_with_parents(n, q, seed):
    """Single orbit plus parent pointers for witness traces.

    Returns (codes sorted, prev_code int64 array, move_id int32 array); the
    parent arrays are indexed by state code, -1 where unvisited.
    """
    sp = _Space(n, q)
    labels = [-1] * sp.size
    parents = {}
    codes = _bfs(sp, seed, 0, labels, [], parents)
    prev = np.full(sp.size, -1, dtype=np.int64)
    move = np.full(sp.size, -1, dtype=np.int32)
    for sc, (pc, mid) in parents.items():
        prev[sc] = pc
        move[sc] = mid
    codes.sort()
    return np.array(codes, dtype=np.int64), prev, move
