"""Elementary triangular operations, replayable traces, and orbit enumeration.

Three operations generate the equivalence "~ by ETOs" on strictly lower
triangular matrices:

  * P_r(alpha):   scale row r by alpha^-1 and column r by alpha (alpha != 0);
  * F_(r1,r2):    exchange rows and columns r1, r2, legal only when the
                  entries that would land on or above the diagonal vanish;
  * Q_(r0,k0)(beta): subtract 2*beta at (r0,k0) and add beta * column r0 to
                  column k0 below row r0.

Q is anchored at a site (r0, k0) that bounds the support of row r0, i.e.
t_{r0,k} = 0 for every k > k0.  The attained leader is the generic site;
zero rows admit every site (the standard reduction sequences do shear zero
rows, e.g. Q_(2,1) applied to forms whose second row vanishes).  For k0 = 1
beta is any unit; for k0 > 1 beta must satisfy

    Delta^(1)_{i,k0,r0} = beta * t_{k0,i}   for every 1 <= i < k0,

which forces beta, leaves it free, or forbids the move.  Reading the site
as a support bound (rather than insisting the anchor entry be nonzero) is
what makes every operation undoable by a single operation -- Q_(r0,k0)(beta)
by Q_(r0,k0)(-beta) even when the shear kills the anchor -- so equivalence
by ETOs really is an equivalence relation, move by move.

Over a finite field the moves are exhaustively enumerable, and breadth-first
closure computes the full equivalence class of a matrix; that closure is the
ground-truth oracle behind the n = 4 classification tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernel
from .fields import FieldElement
from .tmatrix import Slt, is_2ref, leader, delta


class EtoError(ValueError):
    """An operation's precondition failed, or an unsupported request was made."""


class FiniteFieldRequired(EtoError):
    """Orbit enumeration was requested over an infinite field."""


@dataclass(frozen=True)
class POp:
    r: int
    alpha: FieldElement

    def __str__(self):
        return f"P {self.r} {self.alpha}"


@dataclass(frozen=True)
class FOp:
    r1: int
    r2: int

    def __str__(self):
        return f"F {self.r1} {self.r2}"


@dataclass(frozen=True)
class QOp:
    r0: int
    k0: int
    beta: FieldElement

    def __str__(self):
        return f"Q {self.r0} {self.k0} {self.beta}"


class EtoTrace:
    """A finite sequence of operations, replayable with stepwise checking."""

    __slots__ = ("ops",)

    def __init__(self, ops=()):
        self.ops = tuple(ops)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def __getitem__(self, i):
        return self.ops[i]

    def __add__(self, other):
        return EtoTrace(self.ops + tuple(other))

    def __eq__(self, other):
        return isinstance(other, EtoTrace) and self.ops == other.ops

    def __repr__(self):
        return f"EtoTrace({', '.join(str(op) for op in self.ops)})"

    def to_text(self):
        return "".join(str(op) + "\n" for op in self.ops)

    @classmethod
    def from_text(cls, field, text):
        ops = []
        for ln in text.strip().splitlines():
            toks = ln.split()
            if not toks:
                continue
            if toks[0] == "P" and len(toks) == 3:
                ops.append(POp(int(toks[1]), field.parse(toks[2])))
            elif toks[0] == "F" and len(toks) == 3:
                ops.append(FOp(int(toks[1]), int(toks[2])))
            elif toks[0] == "Q" and len(toks) == 4:
                ops.append(QOp(int(toks[1]), int(toks[2]), field.parse(toks[3])))
            else:
                raise EtoError(f"bad trace line {ln!r}")
        return cls(ops)


def apply_p(T, r1, alpha):
    """Scale row r1 by alpha^-1 and column r1 by alpha."""
    alpha = T.field.of(alpha)
    if alpha.is_zero():
        raise EtoError("P requires alpha != 0")
    if not 1 <= r1 <= T.n:
        raise EtoError(f"P row {r1} outside [1,{T.n}]")
    ainv = alpha.inv()
    out = []
    for r in range(2, T.n + 1):
        for c in range(1, r):
            e = T.entry(r, c)
            if r == r1:
                e = e * ainv
            elif c == r1:
                e = e * alpha
            out.append(e)
    return Slt(T.field, T.n, out)


def f_precondition(T, r1, r2):
    """None if F_(r1,r2) is legal, else a message naming the failing entry."""
    if not 1 <= r1 < r2 <= T.n:
        return f"need 1 <= r1 < r2 <= n, got ({r1},{r2})"
    for j in range(r1, r2):
        if not T.entry(r2, j).is_zero():
            return f"entry t[{r2},{j}] must be zero"
    for r in range(r1 + 1, r2 + 1):
        if not T.entry(r, r1).is_zero():
            return f"entry t[{r},{r1}] must be zero"
    return None


def apply_f(T, r1, r2):
    """Exchange rows and columns r1 and r2 (a transposition conjugation)."""
    why = f_precondition(T, r1, r2)
    if why is not None:
        raise EtoError(f"F({r1},{r2}) illegal: {why}")

    def swp(x):
        return r2 if x == r1 else r1 if x == r2 else x

    out = []
    for r in range(2, T.n + 1):
        for c in range(1, r):
            out.append(T.entry(swp(r), swp(c)))
    return Slt(T.field, T.n, out)


def q_site_ok(T, r0, k0):
    """None if (r0, k0) anchors a Q move on T, else a message."""
    if not 1 <= k0 < r0 <= T.n:
        return f"({r0},{k0}) is not a sub-diagonal position"
    c = leader(T, r0).col
    if c > k0:
        return f"row {r0} has support beyond column {k0} (leader at {c})"
    return None


def q_beta_constraint(T, r0, k0):
    """Admissible beta set at a valid Q site: 'free', a forced unit, or None.

    For k0 = 1 beta is always free.  For k0 > 1 the constraint
    Delta^(1)_{i,k0,r0} = beta * t_{k0,i} (all i < k0) may force one value,
    hold for every beta, or be unsatisfiable.
    """
    if k0 == 1:
        return "free"
    one = T.field.one
    forced = None
    for i in range(1, k0):
        tki = T.entry(k0, i)
        d = delta(T, i, k0, r0, one)
        if not tki.is_zero():
            b = d / tki
            if b.is_zero() or (forced is not None and b != forced):
                return None
            forced = b
        elif not d.is_zero():
            return None
    return forced if forced is not None else "free"


def apply_q(T, r0, k0, beta):
    """Shear column k0 by beta times column r0, adjusting the anchor entry."""
    beta = T.field.of(beta)
    if beta.is_zero():
        raise EtoError("Q requires beta != 0")
    why = q_site_ok(T, r0, k0)
    if why is not None:
        raise EtoError(f"Q({r0},{k0}) illegal: {why}")
    if k0 > 1:
        one = T.field.one
        for i in range(1, k0):
            if delta(T, i, k0, r0, one) != beta * T.entry(k0, i):
                raise EtoError(
                    f"Q({r0},{k0}) illegal: Delta^(1)_{{{i},{k0},{r0}}} != "
                    f"beta * t[{k0},{i}]"
                )
    two_beta = beta.double()
    out = []
    for r in range(2, T.n + 1):
        for c in range(1, r):
            e = T.entry(r, c)
            if (r, c) == (r0, k0):
                e = e - two_beta
            elif c == k0 and r > r0:
                e = e + beta * T.entry(r, r0)
            out.append(e)
    return Slt(T.field, T.n, out)


def apply(T, op):
    if isinstance(op, POp):
        return apply_p(T, op.r, op.alpha)
    if isinstance(op, FOp):
        return apply_f(T, op.r1, op.r2)
    if isinstance(op, QOp):
        return apply_q(T, op.r0, op.k0, op.beta)
    raise EtoError(f"not an ETO: {op!r}")


def apply_trace(T, trace):
    """Replay a trace, enforcing each precondition; reports the failing step."""
    cur = T
    for k, op in enumerate(trace):
        try:
            cur = apply(cur, op)
        except EtoError as exc:
            raise EtoError(f"step {k} ({op}): {exc}") from None
    return cur


def enumerate_moves(T):
    """All legal single moves from T over a finite field, as (op, image) pairs.

    Deterministic order: P by (row, alpha), then F by (r1, r2), then Q by
    (row, beta).  Identity scalings P_r(1) are included; the compiled kernel
    skips them as an optimization, which never changes closures.
    """
    if not T.field.is_finite:
        raise FiniteFieldRequired("move enumeration needs a finite field")
    out = []
    for r in range(1, T.n + 1):
        for a in T.field.units():
            out.append((POp(r, a), apply_p(T, r, a)))
    for r1 in range(1, T.n):
        for r2 in range(r1 + 1, T.n + 1):
            if f_precondition(T, r1, r2) is None:
                out.append((FOp(r1, r2), apply_f(T, r1, r2)))
    for r0 in range(2, T.n + 1):
        for k0 in range(max(leader(T, r0).col, 1), r0):
            betas = q_beta_constraint(T, r0, k0)
            if betas == "free":
                for b in T.field.units():
                    out.append((QOp(r0, k0, b), apply_q(T, r0, k0, b)))
            elif betas is not None:
                out.append((QOp(r0, k0, betas), apply_q(T, r0, k0, betas)))
    return out


class Orbit:
    """The ETO-equivalence class of a matrix over a finite field.

    Behaves as a set of Slt: membership, size, sorted iteration.  Members
    are stored as integer codes and decoded lazily.
    """

    def __init__(self, field, n, codes):
        self.field = field
        self.n = n
        self.codes = codes  # sorted int64 array
        self._set = set(int(c) for c in codes)

    def __len__(self):
        return len(self.codes)

    def __contains__(self, M):
        if isinstance(M, Slt):
            if M.field != self.field or M.n != self.n:
                return False
            return M.encode() in self._set
        return int(M) in self._set

    def __iter__(self):
        for c in self.codes:
            yield Slt.decode(self.field, self.n, int(c))

    def contains_code(self, code):
        return int(code) in self._set

    def __repr__(self):
        return f"Orbit(n={self.n}, field={self.field.name}, size={len(self)})"


def _require_finite(T):
    if not T.field.is_finite:
        raise FiniteFieldRequired("orbit enumeration needs a finite field")


def orbit(T, cap=None):
    """BFS closure of T under all legal moves."""
    _require_finite(T)
    codes = _kernel.orbit_codes(T.n, T.field.order(), T.encode(), cap=cap)
    return Orbit(T.field, T.n, codes)


def _op_from_move_id(field, mid):
    decoded = _kernel.decode_move(mid)
    if decoded[0] == "P":
        return POp(decoded[1], field.of(decoded[2]))
    if decoded[0] == "F":
        return FOp(decoded[1], decoded[2])
    return QOp(decoded[1], decoded[2], field.of(decoded[3]))


def _walk_trace(field, prev, move, seed_code, target_code):
    mids = []
    cur = int(target_code)
    while cur != seed_code:
        pc = int(prev[cur])
        if pc < 0:
            raise EtoError("broken parent chain (kernel bug)")
        mids.append(int(move[cur]))
        cur = pc
    mids.reverse()
    return EtoTrace([_op_from_move_id(field, m) for m in mids])


def same_orbit(T, S, cap=None):
    """Whether S is reachable from T; on success also a replayable witness trace."""
    _require_finite(T)
    if T.field != S.field or T.n != S.n:
        raise EtoError("matrices live over different fields or sizes")
    if T == S:
        return True, EtoTrace()
    seed = T.encode()
    codes, prev, move = _kernel.orbit_with_parents(T.n, T.field.order(), seed, cap=cap)
    tgt = S.encode()
    idx = codes.searchsorted(tgt)
    if idx >= len(codes) or int(codes[idx]) != tgt:
        return False, None
    return True, _walk_trace(T.field, prev, move, seed, tgt)


def reduce_to_2ref(T, cap=None):
    """Some 2-REF member of the class of T, with a witness trace.

    Already-reduced matrices come back unchanged.  Over infinite fields no
    general reduction is attempted (the BFS oracle needs a finite field), so
    anything not already in 2-REF is rejected.
    """
    if is_2ref(T):
        return T, EtoTrace()
    if not T.field.is_finite:
        raise EtoError(
            "reduction over an infinite field is only supported for matrices "
            "already in 2-REF"
        )
    seed = T.encode()
    codes, prev, move = _kernel.orbit_with_parents(T.n, T.field.order(), seed, cap=cap)
    for c in codes:
        M = Slt.decode(T.field, T.n, int(c))
        if is_2ref(M):
            return M, _walk_trace(T.field, prev, move, seed, int(c))
    raise EtoError("orbit contains no 2-REF member (theory violation)")
