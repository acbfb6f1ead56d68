"""Strictly lower triangular matrices and their structural invariants.

A matrix T = [t_ij] of size n stores only the sub-diagonal entries t_ij with
i > j (row-major); everything else is implicitly zero.  On top of that shape
the module implements the combinatorics the classification rests on: row
leaders, the scalars Delta, the first and second reduced echelon forms, the
wall and brick decomposition of a 1-REF matrix, the measure sequence of a
2-REF matrix, and the normalized-form predicate.

Indices are 1-based, matching the usual matrix conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fields import FieldElement, FieldError, field_by_name


class NotReducedError(ValueError):
    """An invariant was requested from a matrix not in the required echelon form."""


class Slt:
    """Strictly lower triangular n x n matrix over a fixed field.

    Immutable and hashable (entries are canonical field values), so matrices
    can be used directly as states in orbit enumeration.
    """

    __slots__ = ("n", "field", "entries")

    def __init__(self, field, n, entries):
        if n < 2:
            raise ValueError(f"matrix size must be >= 2, got {n}")
        entries = tuple(entries)
        if len(entries) != n * (n - 1) // 2:
            raise ValueError(f"expected {n * (n - 1) // 2} entries, got {len(entries)}")
        for e in entries:
            if not isinstance(e, FieldElement) or e.field != field:
                raise FieldError("all entries must belong to the matrix field")
        self.field = field
        self.n = n
        self.entries = entries

    @classmethod
    def zeros(cls, field, n):
        z = field.zero
        return cls(field, n, (z,) * (n * (n - 1) // 2))

    @classmethod
    def from_rows(cls, field, rows, n=None):
        """Build from per-row entry lists: rows[k] holds t_{k+2,1..k+1}.

        Entries may be ints or FieldElements.  Trailing rows may be omitted
        when n is given explicitly; missing entries are zero.
        """
        if n is None:
            n = len(rows) + 1
        ent = []
        for r in range(2, n + 1):
            row = rows[r - 2] if r - 2 < len(rows) else []
            if len(row) > r - 1:
                raise ValueError(f"row {r} takes at most {r - 1} entries")
            ent.extend(field.of(x) for x in row)
            ent.extend([field.zero] * (r - 1 - len(row)))
        return cls(field, n, ent)

    @staticmethod
    def _idx(r, c):
        return (r - 1) * (r - 2) // 2 + (c - 1)

    def entry(self, r, c):
        """t_{rc}; entries on or above the diagonal read as zero."""
        if not (1 <= r <= self.n and 1 <= c <= self.n):
            raise IndexError(f"position ({r},{c}) outside [1,{self.n}]^2")
        if r <= c:
            return self.field.zero
        return self.entries[self._idx(r, c)]

    def with_entry(self, r, c, x):
        if not (1 <= c < r <= self.n):
            raise IndexError(f"({r},{c}) is not a sub-diagonal position")
        ent = list(self.entries)
        ent[self._idx(r, c)] = self.field.of(x)
        return Slt(self.field, self.n, ent)

    def row(self, r):
        """The stored part of row r: entries t_{r,1..r-1}."""
        return tuple(self.entries[self._idx(r, 1) : self._idx(r, 1) + r - 1])

    def row_is_zero(self, r):
        return all(e.is_zero() for e in self.row(r))

    def is_zero(self):
        return all(e.is_zero() for e in self.entries)

    def encode(self):
        """Canonical base-q integer code (finite prime fields only)."""
        q = self.field.order()
        code = 0
        for e in reversed(self.entries):
            code = code * q + e.value
        return code

    @classmethod
    def decode(cls, field, n, code):
        q = field.order()
        ent = []
        for _ in range(n * (n - 1) // 2):
            ent.append(FieldElement(field, code % q))
            code //= q
        return cls(field, n, ent)

    def __eq__(self, other):
        return (
            isinstance(other, Slt)
            and self.field == other.field
            and self.n == other.n
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.field, self.n, self.entries))

    def __repr__(self):
        rows = ["0" * 0]
        body = []
        for r in range(1, self.n + 1):
            vals = [str(self.entry(r, c)) for c in range(1, self.n + 1)]
            body.append(" ".join(vals))
        return "[" + "; ".join(body) + "]"

    # -- text and JSON formats -------------------------------------------

    def to_text(self):
        lines = [f"n {self.n} field {self.field.name}"]
        for r in range(2, self.n + 1):
            lines.append(" ".join(str(e) for e in self.row(r)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        head = lines[0].split()
        if len(head) != 4 or head[0] != "n" or head[2] != "field":
            raise ValueError(f"bad matrix header {lines[0]!r}")
        n = int(head[1])
        field = field_by_name(head[3])
        if len(lines) != n:
            raise ValueError(f"expected {n - 1} row lines, got {len(lines) - 1}")
        rows = []
        for r in range(2, n + 1):
            toks = lines[r - 1].split()
            if len(toks) != r - 1:
                raise ValueError(f"row {r} needs {r - 1} entries, got {len(toks)}")
            rows.append([field.parse(t) for t in toks])
        return cls.from_rows(field, rows, n=n)

    def to_json_dict(self):
        return {
            "n": self.n,
            "field": self.field.name,
            "rows": [[str(e) for e in self.row(r)] for r in range(2, self.n + 1)],
        }

    @classmethod
    def from_json_dict(cls, d):
        field = field_by_name(d["field"])
        rows = [[field.parse(t) for t in row] for row in d["rows"]]
        return cls.from_rows(field, rows, n=d["n"])


@dataclass(frozen=True)
class LeaderPos:
    """Position (r, c) of the rightmost nonzero entry of row r; c = 0 for a zero row."""

    row: int
    col: int


@dataclass(frozen=True)
class Wall:
    """Block-start rows (r_1, ..., r_h) of a reduced matrix, or the sentinel (0)."""

    entries: tuple

    def __post_init__(self):
        e = self.entries
        if e == (0,):
            return
        if not e or any(e[i] > e[i + 1] for i in range(len(e) - 1)) or e[0] < 3:
            raise ValueError(f"not a wall: {e}")

    def is_sentinel(self):
        return self.entries == (0,)

    def __str__(self):
        return "(" + ",".join(str(r) for r in self.entries) + ")"


@dataclass(frozen=True)
class MeasureBlock:
    """One 2 x k block [r_j1 ... r_jk ; mu_j1 ... mu_jk] of a measure sequence."""

    rows: tuple
    measures: tuple

    def __str__(self):
        return "[" + " ".join(map(str, self.rows)) + "; " + " ".join(map(str, self.measures)) + "]"


@dataclass(frozen=True)
class MeasureSequence:
    blocks: tuple

    def __str__(self):
        return "(" + ", ".join(str(b) for b in self.blocks) + ")"


def leader(T, r):
    """Leader position of row r of T."""
    row = T.row(r)
    for c in range(r - 1, 0, -1):
        if not row[c - 1].is_zero():
            return LeaderPos(r, c)
    return LeaderPos(r, 0)


def delta(T, i, j, k, alpha):
    """The scalar Delta^(alpha)_{i,j,k}(T) = alpha * t_ki + t_kj * t_ji."""
    if not (1 <= i < j < k <= T.n):
        raise IndexError(f"need 1 <= i < j < k <= n, got ({i},{j},{k}) with n={T.n}")
    alpha = T.field.of(alpha)
    return alpha * T.entry(k, i) + T.entry(k, j) * T.entry(j, i)


def measure(M):
    """Number of nonzero entries of a matrix, view, or row."""
    if isinstance(M, Slt):
        return sum(1 for e in M.entries if not e.is_zero())
    if isinstance(M, FieldElement):
        return 0 if M.is_zero() else 1
    return sum(measure(x) for x in M)


def submatrix(T, rows, cols):
    """The view T^I_J for inclusive intervals I = rows, J = cols.

    Returned as a tuple of row tuples; an empty interval yields no rows/cols.
    """
    rlo, rhi = rows
    clo, chi = cols
    if rlo < 1 or chi > T.n or clo < 1 or rhi > T.n:
        raise IndexError(f"interval outside [1,{T.n}]: rows={rows} cols={cols}")
    return tuple(
        tuple(T.entry(r, c) for c in range(clo, chi + 1)) for r in range(rlo, rhi + 1)
    )


def _zero_rows_on_top(T):
    seen_nonzero = False
    count = 0
    for r in range(1, T.n + 1):
        if T.row_is_zero(r):
            if seen_nonzero:
                return None
            count += 1
        else:
            seen_nonzero = True
    return count


def _leader_delta_ok(T, r, c):
    """1-REF condition on the leader (r, c): c > 1 and some Delta^(2)_{i,c,r} != 0."""
    if c <= 1:
        return False
    two = T.field.of(2)
    return any(not delta(T, i, c, r, two).is_zero() for i in range(1, c))


def is_1ref(T):
    """First reduced echelon form.

    Zero rows on top; every leader (r, c) has c > 1 and admits an i < c with
    Delta^(2)_{i,c,r} nonzero; leader columns weakly increase down the rows.
    The zero matrix is in 1-REF by definition.
    """
    if T.is_zero():
        return True
    z = _zero_rows_on_top(T)
    if z is None:
        return False
    prev = 0
    for r in range(z + 1, T.n + 1):
        c = leader(T, r).col
        if not _leader_delta_ok(T, r, c):
            return False
        if c < prev:
            return False
        prev = c
    return True


def wall_of_ref(S):
    """The wall W(S) of a matrix in 1-REF.

    Recursion: r_1 is the first nonzero row; given r_j, the next block starts
    at the least row r > r_j whose leader column satisfies c_r >= r_j.  (The
    comparison is >=: with a strict one no 4 x 4 matrix could have wall (3,4),
    emptying a class the theory requires to be nonempty.)  W(0_n) = (0).
    """
    if S.is_zero():
        return Wall((0,))
    if not is_1ref(S):
        raise NotReducedError("wall_of_ref requires a matrix in 1-REF")
    r1 = next(r for r in range(1, S.n + 1) if not S.row_is_zero(r))
    walls = [r1]
    while True:
        rj = walls[-1]
        nxt = None
        for r in range(rj + 1, S.n + 1):
            if leader(S, r).col >= rj:
                nxt = r
                break
        if nxt is None:
            return Wall(tuple(walls))
        walls.append(nxt)


def bricks(S):
    """The brick decomposition B_1(S), ..., B_h(S) of a nonzero 1-REF matrix.

    With r_0 = 1 and r_{h+1} = n + 1, brick j is the view with rows
    [r_j, r_{j+1}) and columns [r_{j-1}, r_j).
    """
    if S.is_zero():
        raise NotReducedError("the zero matrix has no bricks")
    w = wall_of_ref(S).entries
    bounds = (1,) + w + (S.n + 1,)
    return [
        submatrix(S, (bounds[j], bounds[j + 1] - 1), (bounds[j - 1], bounds[j] - 1))
        for j in range(1, len(w) + 1)
    ]


def _row_measure_in_cols(T, r, clo, chi):
    return sum(1 for c in range(clo, chi + 1) if not T.entry(r, c).is_zero())


def is_2ref(T):
    """Second reduced echelon form.

    On top of 1-REF: exactly r_1 - 1 zero rows; each leader column lies in
    the column range [r_{j-1}, r_j) of its wall block; within every block the
    row measures over the block's columns weakly increase downwards.  The
    zero matrix is in 2-REF.
    """
    if T.is_zero():
        return True
    if not is_1ref(T):
        return False
    w = wall_of_ref(T).entries
    bounds = (1,) + w + (T.n + 1,)
    if _zero_rows_on_top(T) != w[0] - 1:
        return False
    for j in range(1, len(w) + 1):
        clo, chi = bounds[j - 1], bounds[j] - 1
        for r in range(bounds[j], bounds[j + 1]):
            c = leader(T, r).col
            if not (clo <= c <= chi):
                return False
        for r in range(bounds[j], bounds[j + 1] - 1):
            if _row_measure_in_cols(T, r, clo, chi) > _row_measure_in_cols(
                T, r + 1, clo, chi
            ):
                return False
    return True


def measure_sequence(T):
    """The measure sequence M(T) = (M_1, ..., M_h) of a nonzero 2-REF matrix.

    Within block j the recursion records the rows where the measure over the
    block's columns [r_{j-1}, r_j) strictly increases, together with those
    measures.
    """
    if T.is_zero():
        raise NotReducedError("the zero matrix has no measure sequence")
    if not is_2ref(T):
        raise NotReducedError("measure_sequence requires a matrix in 2-REF")
    w = wall_of_ref(T).entries
    bounds = (1,) + w + (T.n + 1,)
    blocks = []
    for j in range(1, len(w) + 1):
        clo, chi = bounds[j - 1], bounds[j] - 1
        rjk = bounds[j]
        mujk = _row_measure_in_cols(T, rjk, clo, chi)
        rs, mus = [rjk], [mujk]
        for r in range(rjk + 1, bounds[j + 1]):
            m = _row_measure_in_cols(T, r, clo, chi)
            if m > mus[-1]:
                rs.append(r)
                mus.append(m)
        blocks.append(MeasureBlock(tuple(rs), tuple(mus)))
    return MeasureSequence(tuple(blocks))


def is_normalized(U):
    """Normalized form: 2-REF, entries of the first wall row in {0, 1}, and
    every leader from that row on equal to 1.  The zero matrix is normalized."""
    if U.is_zero():
        return True
    if not is_2ref(U):
        return False
    one = U.field.one
    r1 = wall_of_ref(U).entries[0]
    if any(not e.is_zero() and e != one for e in U.row(r1)):
        return False
    for r in range(r1, U.n + 1):
        pos = leader(U, r)
        if pos.col and U.entry(r, pos.col) != one:
            return False
    return True
