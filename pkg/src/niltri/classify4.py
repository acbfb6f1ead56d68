"""The n = 4 classification: simplified forms, equivalence criteria, canonical
representatives, class counts, and the infinite-family generator.

Every 4 x 4 strictly lower triangular matrix is equivalent to exactly one of
five simplified shapes, sorted by the wall invariant:

    wall (0):    the zero matrix
    wall (4):    B  (last row 1 1 0 0)  or  B' (last row 1 1 1 0),
                 separated by the measure sequence
    wall (3):    D_u  (rows (1,1), (u,1)),  u a unit;  D_u ~ D_v  iff  u/v
                 is a square
    wall (3,4):  C_a  (rows (1,1), (a,0,1));  C_a ~ C_a'  iff  a = a', or
                 2a+1 is a nonzero square and a' = -a/(2a+1)

Over a finite field F_q this yields the closed count

    N_4(F_q) = (3q+23)/4  if q = 3 (mod 4),    (3q+25)/4  if q = 1 (mod 4),

which the orbit oracle reproduces exactly.  Over an infinite field the
C-parameters fall into infinitely many classes; the greedy generator at the
bottom of this module emits arbitrarily many pairwise inequivalent ones.

The Gaussian-rational field plays the role of the complex numbers here: the
involution f(z) = -z/(2z+1) exchanges the inside and outside of the disk
|z + 1/2| <= 1/2, and the disk (with its upper boundary) indexes the C-classes
canonically.  All region tests are exact rational comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _kernel, eto
from .algebra import GammaMatrix
from .eto import EtoTrace, FOp, POp, QOp, apply_trace
from .fields import (
    FieldElement,
    GaussianRationals,
    PrimeField,
    Rationals,
    _rat_sqrt,
    prime_field,
)
from .tmatrix import (
    Slt,
    Wall,
    is_2ref,
    is_normalized,
    leader,
    measure_sequence,
    wall_of_ref,
)


class ClassifyError(ValueError):
    """Unsupported field/input combination for a classification request."""


class UnresolvedReduction(ClassifyError):
    """The constructive reduction does not settle this input (both shear
    parameters sit at -1/2); over finite fields the orbit oracle takes over."""


@dataclass(frozen=True)
class SimplifiedForm:
    """One of the five representative shapes: kind in {zero, B, Bprime, D, C}."""

    kind: str
    param: FieldElement | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "B", "Bprime", "D", "C"):
            raise ClassifyError(f"unknown simplified form kind {self.kind!r}")
        if self.kind == "D" and (self.param is None or self.param.is_zero()):
            raise ClassifyError("D forms require a nonzero parameter")
        if self.kind == "C" and self.param is None:
            raise ClassifyError("C forms require a parameter")

    def label(self):
        if self.kind == "zero":
            return "0"
        if self.kind == "B":
            return "B"
        if self.kind == "Bprime":
            return "B'"
        return f"{self.kind}_{self.param}"

    def wall(self):
        return {
            "zero": Wall((0,)),
            "B": Wall((4,)),
            "Bprime": Wall((4,)),
            "D": Wall((3,)),
            "C": Wall((3, 4)),
        }[self.kind]

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class ClassId:
    wall: Wall
    canonical: SimplifiedForm

    def __str__(self):
        return f"wall {self.wall} rep {self.canonical}"


def materialize(field, form):
    """The exact 4 x 4 matrix of a simplified form."""
    if form.kind == "zero":
        return Slt.zeros(field, 4)
    if form.kind == "B":
        return Slt.from_rows(field, [[0], [0, 0], [1, 1, 0]])
    if form.kind == "Bprime":
        return Slt.from_rows(field, [[0], [0, 0], [1, 1, 1]])
    if form.kind == "D":
        u = field.of(form.param)
        return Slt.from_rows(field, [[0], [1, 1], [u, 1, 0]])
    a = field.of(form.param)
    return Slt.from_rows(field, [[0], [1, 1], [a, 0, 1]])


def v_matrix(field, u, v):
    """The two-parameter normalized shape with rows (1,1) and (u,v,1)."""
    return Slt.from_rows(field, [[0], [1, 1], [field.of(u), field.of(v), 1]])


def as_v_shape(T):
    """(u, v) if T is exactly the two-parameter shape, else None."""
    if T.n != 4:
        return None
    one = T.field.one
    z = T.field.zero
    if (
        T.row(2) == (z,)
        and T.row(3) == (one, one)
        and T.entry(4, 3) == one
    ):
        return T.entry(4, 1), T.entry(4, 2)
    return None


def as_simplified(T):
    """The SimplifiedForm T literally equals, or None."""
    if T.n != 4:
        return None
    f = T.field
    if T.is_zero():
        return SimplifiedForm("zero")
    if T == materialize(f, SimplifiedForm("B")):
        return SimplifiedForm("B")
    if T == materialize(f, SimplifiedForm("Bprime")):
        return SimplifiedForm("Bprime")
    vs = as_v_shape(T)
    if vs is not None and vs[1].is_zero():
        return SimplifiedForm("C", vs[0])
    u = T.entry(4, 1)
    if not u.is_zero() and T == materialize(f, SimplifiedForm("D", u)):
        return SimplifiedForm("D", u)
    return None


# -- equivalence criteria ---------------------------------------------------


def d_equivalent(u, v):
    """D_u ~ D_v iff u/v is a square."""
    if u.is_zero() or v.is_zero():
        raise ClassifyError("D parameters must be nonzero")
    ok, _ = (u / v).is_square()
    return ok


def d_witness_gamma(u, v, eps):
    """The explicit isomorphism matrix for D_u -> D_v given eps^2 = u/v."""
    if eps * eps != u / v:
        raise ClassifyError("eps^2 != u/v")
    f = u.field
    half = f.inv2
    g14 = (u - v * eps) * half
    g24 = (f.one - eps) * half
    return GammaMatrix(
        f,
        [
            [f.one, f.zero, f.zero, g14],
            [f.zero, f.one, f.zero, g24],
            [f.zero, f.zero, f.one, f.zero],
            [f.zero, f.zero, f.zero, eps],
        ],
    )


def mobius_shift(a):
    """The involution a -> -a/(2a+1) pairing equivalent C-parameters."""
    s = a.double() + a.field.one
    return -a / s


def c_equivalent(a, a2):
    """C_a ~ C_a' iff a = a', or 2a+1 is a nonzero square and a' = -a/(2a+1)."""
    if a == a2:
        return True
    s = a.double() + a.field.one
    if s.is_zero():
        return False
    ok, _ = s.is_square()
    return ok and a2 == mobius_shift(a)


# -- constructive reductions ------------------------------------------------


def normalize_by_scaling(S):
    """Scale a 2-REF matrix into normalized form by P-operations only.

    First every nonzero entry of the first wall row is scaled to 1 through
    its column, then each later row's leader is scaled to 1; identity
    scalings are skipped so the trace is minimal.
    """
    if not is_2ref(S):
        raise ClassifyError("normalization requires a matrix in 2-REF")
    trace = []
    cur = S
    if S.is_zero():
        return S, EtoTrace()
    r1 = wall_of_ref(S).entries[0]
    one = S.field.one
    for j in range(1, r1):
        e = cur.entry(r1, j)
        if not e.is_zero() and e != one:
            op = POp(j, e.inv())
            cur = eto.apply(cur, op)
            trace.append(op)
    for r in range(r1, cur.n + 1):
        pos = leader(cur, r)
        if pos.col:
            e = cur.entry(r, pos.col)
            if e != one:
                op = POp(r, e)
                cur = eto.apply(cur, op)
                trace.append(op)
    assert is_normalized(cur)
    return cur, EtoTrace(trace)


def shear_reduction_trace(field, eps):
    """The scaling/shear sequence turning the (u, v) shape into another one.

    For any unit eps this consists of Q_(2,1)(eps), Q_(3,2)((eps-1)/2eps),
    P_2(eps), Q_(2,1)(-1), P_1(1/eps), F_(1,2); applied to the shape with
    parameters (u, v) it lands on the shape with parameters
    ((2v+1)eps - 1)/2 and (2u+1-eps)/(2eps).  A zero shear coefficient
    (eps = 1) contributes the identity and is omitted.
    """
    eps = field.of(eps)
    if eps.is_zero():
        raise ClassifyError("the reduction needs a nonzero eps")
    one = field.one
    beta = (eps - one) * (eps.double()).inv()
    ops = [QOp(2, 1, eps)]
    if not beta.is_zero():
        ops.append(QOp(3, 2, beta))
    ops.extend(
        [POp(2, eps), QOp(2, 1, -one), POp(1, eps.inv()), FOp(1, 2)]
    )
    return EtoTrace(ops)


def v_to_c_trace(u, v):
    """Trace carrying the (u, v) shape onto C_{2uv+u+v}; needs 2u+1 != 0."""
    field = u.field
    eps = u.double() + field.one
    if eps.is_zero():
        raise UnresolvedReduction(
            "2u+1 = 0: the shear reduction is undefined for this parameter"
        )
    return shear_reduction_trace(field, eps)


def c_param_of(u, v):
    return u.double() * v + u + v


def d_to_d_trace(u, v):
    """Trace carrying D_u onto D_v; needs a square root of u/v in the field.

    The same scaling/shear sequence as the C-reduction, finished by scaling
    the last row instead of swapping the first two columns.
    """
    field = u.field
    ok, eps = (u / v).is_square()
    if not ok:
        raise ClassifyError("u/v must be a square in the field")
    one = field.one
    beta = (eps - one) * (eps.double()).inv()
    ops = [QOp(2, 1, eps)]
    if not beta.is_zero():
        ops.append(QOp(3, 2, beta))
    ops.extend([POp(2, eps), QOp(2, 1, -one), POp(1, eps.inv()), POp(4, eps)])
    return EtoTrace(ops)


def c_canonical_trace(a, a2):
    """Trace carrying C_a onto C_a' when 2a+1 is a square with root in the field.

    Runs the shear reduction on C_a = V(a, 0) with eps the square root of
    2a+1, landing on the symmetric shape V(w, w), then reduces that shape.
    """
    field = a.field
    s = a.double() + field.one
    ok, eps = s.is_square()
    if not ok or s.is_zero():
        raise ClassifyError("2a+1 must be a nonzero square in the field")
    if a2 != mobius_shift(a):
        raise ClassifyError("target parameter is not -a/(2a+1)")
    first = shear_reduction_trace(field, eps)
    w = (eps - field.one) * field.inv2
    return first + v_to_c_trace(w, w)


# -- canonical parameters per field -----------------------------------------


def _height(x):
    fr = Fraction(x) if not isinstance(x, Fraction) else x
    return max(abs(fr.numerator), fr.denominator)


def _rat_key(a):
    return (_height(a.value), a.value)


def _squarefree_part(fr):
    """Squarefree integer s with fr / s a rational square (sign preserved)."""
    n = fr.numerator * fr.denominator
    s = -1 if n < 0 else 1
    n = abs(n)
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
        if n % p == 0:
            s *= p
            n //= p
        p += 1
    return s * n


def canonical_d_param(u):
    """Deterministic representative of the square-class of u."""
    f = u.field
    if u.is_zero():
        raise ClassifyError("D parameters must be nonzero")
    if isinstance(f, PrimeField):
        if u.is_square()[0]:
            return f.one
        return next(x for x in f.units() if not x.is_square()[0])
    if isinstance(f, Rationals):
        return f.of(_squarefree_part(u.value))
    if isinstance(f, GaussianRationals):
        # complex semantics: every unit is a square
        return f.one
    raise ClassifyError(f"unsupported field {f}")


def canonical_c_param(a):
    """Deterministic representative of the pair {a, -a/(2a+1)} when paired."""
    f = a.field
    if isinstance(f, GaussianRationals):
        return complex_canonical(a)
    s = a.double() + f.one
    if s.is_zero() or not s.is_square()[0]:
        return a
    b = mobius_shift(a)
    if isinstance(f, PrimeField):
        return a if a.value <= b.value else b
    return a if _rat_key(a) <= _rat_key(b) else b


# -- the disk region over the Gaussian rationals ----------------------------


def in_region_u(z):
    """Membership in the closed-upper-boundary disk |z + 1/2| <= 1/2.

    Interior points belong; boundary points belong iff Im(z) >= 0.  The
    complement (with the lower boundary) is the outside region, and the two
    meet exactly at 0 and -1.
    """
    f = z.field
    if not isinstance(f, GaussianRationals):
        raise ClassifyError("region tests live over the Gaussian rationals")
    re, im = z.value
    d = (re + Fraction(1, 2)) ** 2 + im * im
    if d < Fraction(1, 4):
        return True
    if d == Fraction(1, 4):
        return im >= 0
    return False


def complex_canonical(z):
    """The canonical member of {z, -z/(2z+1)} lying in the disk region.

    Fixed points 0 and -1 and the pole -1/2 map to themselves; everything
    outside the region is pulled in by the involution.
    """
    if in_region_u(z):
        return z
    return mobius_shift(z)


class CRegionFamily:
    """The lazily-indexed family {C_z : z in the disk region} over Q(i)."""

    def __init__(self, field):
        if not isinstance(field, GaussianRationals):
            raise ClassifyError("the region family lives over the Gaussian rationals")
        self.field = field

    def contains_param(self, z):
        return in_region_u(z)

    def canonical_param(self, z):
        return complex_canonical(z)

    def matrix(self, z):
        return materialize(self.field, SimplifiedForm("C", self.field.of(z)))

    def __repr__(self):
        return "{C_z : |z+1/2| < 1/2, or |z+1/2| = 1/2 with Im(z) >= 0}"


# -- canonical representative of an arbitrary matrix ------------------------


def _finite_canonical(T, cap=None):
    q = T.field.order()
    seed = T.encode()
    codes, prev, move = _kernel.orbit_with_parents(4, q, seed, cap=cap)
    member = set(int(c) for c in codes)
    f = T.field

    def probe(form):
        M = materialize(f, form)
        return M.encode() in member

    matches = []
    if probe(SimplifiedForm("zero")):
        matches.append(SimplifiedForm("zero"))
    for kind in ("B", "Bprime"):
        if probe(SimplifiedForm(kind)):
            matches.append(SimplifiedForm(kind))
    d_members = [u for u in f.units() if probe(SimplifiedForm("D", u))]
    c_members = [a for a in f.elements() if probe(SimplifiedForm("C", a))]

    if matches and (d_members or c_members):
        raise ClassifyError("orbit meets two simplified families (theory violation)")
    if len(matches) > 1 or (d_members and c_members):
        raise ClassifyError("orbit meets two simplified families (theory violation)")

    if matches:
        form = matches[0]
    elif d_members:
        form = SimplifiedForm("D", canonical_d_param(d_members[0]))
        if not probe(form):
            raise ClassifyError("canonical D member escaped its orbit")
    elif c_members:
        form = SimplifiedForm("C", min(c_members, key=lambda a: a.value))
    else:
        raise ClassifyError("orbit contains no simplified form (theory violation)")

    rep_code = materialize(f, form).encode()
    trace = eto._walk_trace(f, prev, move, seed, rep_code)
    return ClassId(form.wall(), form), trace


def canonical_rep(T, cap=None):
    """Wall and canonical simplified form of the class of T, with a witness.

    Over finite fields any 4 x 4 input is classified through the orbit
    oracle and the returned trace replays T onto the canonical matrix.
    Over Q the input must be a simplified form or in 2-REF (the scaling and
    shear reductions then apply); over Q(i) the classification follows the
    complex semantics (every D collapses to D_1, C-parameters canonicalize
    into the disk region), where the witness may require square roots that
    the subfield lacks, so no trace is returned for the C/D cases there.
    """
    if T.n != 4:
        raise ClassifyError("canonical_rep is the n = 4 classifier")
    f = T.field
    if f.is_finite:
        return _finite_canonical(T, cap=cap)

    gaussian = isinstance(f, GaussianRationals)

    form = as_simplified(T)
    trace = EtoTrace() if form is not None else None
    if form is None:
        if not is_2ref(T):
            raise ClassifyError(
                "over an infinite field only simplified forms and 2-REF inputs "
                "are classifiable"
            )
        U, trace = normalize_by_scaling(T)
        w = wall_of_ref(U).entries
        if w == (4,):
            U, f_ops = _sort_last_row(U)
            trace = trace + f_ops
            form = as_simplified(U)
        elif w == (3,):
            form = SimplifiedForm("D", U.entry(4, 1))
        elif w == (3, 4):
            u, v = as_v_shape(U)
            if not (u.double() + f.one).is_zero():
                tail = v_to_c_trace(u, v)
            elif not (v.double() + f.one).is_zero():
                swap = FOp(1, 2)
                U = eto.apply(U, swap)
                trace = trace + EtoTrace([swap])
                u, v = v, u
                tail = v_to_c_trace(u, v)
            else:
                raise UnresolvedReduction(
                    "both shear parameters equal -1/2: not settled by the "
                    "constructive reduction over an infinite field"
                )
            endpoint = apply_trace(U, tail)
            trace = trace + tail
            form = SimplifiedForm("C", endpoint.entry(4, 1))
        else:
            raise ClassifyError(f"unexpected wall {w} at n = 4")
        if form is None:
            raise ClassifyError("normalization did not reach a simplified form")

    if form.kind == "D":
        cu = canonical_d_param(form.param)
        if cu != form.param:
            if gaussian:
                return ClassId(form.wall(), SimplifiedForm("D", cu)), None
            tail = d_to_d_trace(form.param, cu)
            base = materialize(f, form)
            assert apply_trace(base, tail) == materialize(f, SimplifiedForm("D", cu))
            trace = (trace + tail) if trace is not None else None
            form = SimplifiedForm("D", cu)
        return ClassId(form.wall(), form), trace
    if form.kind == "C":
        ca = canonical_c_param(form.param)
        if ca != form.param:
            if gaussian:
                return ClassId(form.wall(), SimplifiedForm("C", ca)), None
            tail = c_canonical_trace(form.param, ca)
            base = materialize(f, form)
            assert apply_trace(base, tail).entry(4, 1) == ca
            trace = (trace + tail) if trace is not None else None
            form = SimplifiedForm("C", ca)
        return ClassId(form.wall(), form), trace
    return ClassId(form.wall(), form), trace


def _sort_last_row(U):
    """Move the support of the last row of a wall-(4) matrix to the left
    using the freely legal swaps among the all-zero first three rows."""
    ops = []
    cur = U
    for target in range(1, 4):
        if cur.entry(4, target).is_zero():
            src = next(
                (j for j in range(target + 1, 4) if not cur.entry(4, j).is_zero()),
                None,
            )
            if src is not None:
                op = FOp(target, src)
                cur = eto.apply(cur, op)
                ops.append(op)
    return cur, EtoTrace(ops)


# -- counting ----------------------------------------------------------------


def n4_formula(q):
    if q % 4 == 3:
        return (3 * q + 23) // 4
    return (3 * q + 25) // 4


def c_class_partition(field):
    """Partition of all C-parameters of a finite field under c_equivalent."""
    classes = []
    done = set()
    for a in field.elements():
        if a.value in done:
            continue
        members = [a.value]
        done.add(a.value)
        s = a.double() + field.one
        if not s.is_zero() and s.is_square()[0]:
            b = mobius_shift(a)
            if b != a:
                members.append(b.value)
                done.add(b.value)
        classes.append(sorted(members))
    classes.sort()
    return classes


def count_n4(q):
    """Closed-form and constructive class counts at n = 4 over F_q.

    Returns (formula, constructive, per_wall, c_classes); the two counts are
    computed independently and both are reported.
    """
    try:
        field = prime_field(q)
    except Exception as exc:
        raise ClassifyError(f"counting needs an odd prime q: {exc}") from None
    classes = c_class_partition(field)
    per_wall = {"0": 1, "4": 2, "3": 2, "(3,4)": len(classes)}
    constructive = sum(per_wall.values())
    return n4_formula(q), constructive, per_wall, classes


def orbit_count_n4(q, cap=None):
    """Number of ETO-orbits of the full 4 x 4 space over F_q (the oracle side)."""
    _, reps = _kernel.partition(4, q, cap=cap)
    return len(reps)


def count_report(q, include_orbits=True, cap=None):
    """The machine-readable counting report for one prime."""
    formula, constructive, per_wall, classes = count_n4(q)
    report = {
        "q": q,
        "n4_formula": formula,
        "n4_constructive": constructive,
        "n4_orbits": orbit_count_n4(q, cap=cap) if include_orbits else None,
        "per_wall": per_wall,
        "c_classes": classes,
    }
    report["agree"] = (formula == constructive) and (
        report["n4_orbits"] in (None, formula)
    )
    return report


@dataclass(frozen=True)
class RepresentativeSet:
    matrices: tuple
    c_region: CRegionFamily | None = None

    def __len__(self):
        return len(self.matrices)


def representatives_n4(field):
    """A complete, pairwise inequivalent list of class representatives.

    Finite fields: all five families instantiated at canonical parameters.
    Gaussian rationals (complex semantics): the four sporadic matrices plus
    the lazily-indexed disk family.  The rationals are rejected: no finite
    list covers the D- and C-parameters there.
    """
    if isinstance(field, PrimeField):
        mats = [
            materialize(field, SimplifiedForm("zero")),
            materialize(field, SimplifiedForm("B")),
            materialize(field, SimplifiedForm("Bprime")),
            materialize(field, SimplifiedForm("D", field.one)),
            materialize(
                field,
                SimplifiedForm(
                    "D", next(x for x in field.units() if not x.is_square()[0])
                ),
            ),
        ]
        for cls in c_class_partition(field):
            mats.append(materialize(field, SimplifiedForm("C", field.of(cls[0]))))
        return RepresentativeSet(tuple(mats))
    if isinstance(field, GaussianRationals):
        mats = (
            materialize(field, SimplifiedForm("zero")),
            materialize(field, SimplifiedForm("B")),
            materialize(field, SimplifiedForm("Bprime")),
            materialize(field, SimplifiedForm("D", field.one)),
        )
        return RepresentativeSet(mats, CRegionFamily(field))
    raise ClassifyError(
        "complete representative sets exist over finite fields and Q(i) only"
    )


# -- the general C family for n > 4 ------------------------------------------


def c_form(field, a, n):
    """The size-n C-shape: ones in rows 3..n-1, columns 1..2; row n = (a,0,1,0,...)."""
    if n <= 4:
        raise ClassifyError("the general C family starts at n = 5; use C_a for n = 4")
    a = field.of(a)
    rows = []
    for r in range(2, n + 1):
        row = [0] * (r - 1)
        if 3 <= r <= n - 1:
            row[0] = row[1] = 1
        if r == n:
            row[0] = a
            row[2] = 1
        rows.append(row)
    rows = [[field.of(x) if not isinstance(x, FieldElement) else x for x in row] for row in rows]
    return Slt.from_rows(field, rows)


def c_form_necessary(a, a2, n):
    """Necessary (not sufficient for n > 4) condition for C_{a,n} ~ C_{a',n}."""
    if n <= 4:
        raise ClassifyError("use c_equivalent for n = 4")
    if a == a2:
        raise ClassifyError("the necessary condition applies to distinct parameters")
    s = a.double() + a.field.one
    if s.is_zero():
        return False
    ok, _ = s.is_square()
    return ok and a2 == mobius_shift(a)


# -- infinitude over Q --------------------------------------------------------


def _rationals_by_height():
    """All rationals, enumerated by ascending height then value."""
    h = 1
    while True:
        vals = set()
        for den in range(1, h + 1):
            for num in range(-h, h + 1):
                fr = Fraction(num, den)
                if max(abs(fr.numerator), fr.denominator) == h:
                    vals.add(fr)
        yield from sorted(vals)
        h += 1


def infinite_family(field, k):
    """k pairwise inequivalent C-parameters over Q, greedily accumulated.

    Each accepted parameter closes its class under the pairing involution
    (added when 2a+1 is a nonzero rational square), so later picks can never
    collide with earlier classes.  Deterministic by the height enumeration.
    """
    if not isinstance(field, Rationals):
        raise ClassifyError("the infinite family generator runs over Q")
    if k < 1:
        raise ClassifyError("need k >= 1")
    out = []
    blocked = set()
    for fr in _rationals_by_height():
        if fr in blocked:
            continue
        a = field.of(fr)
        out.append(a)
        blocked.add(fr)
        s = 2 * fr + 1
        if s != 0 and _rat_sqrt(s) is not None:
            blocked.add(-fr / s)
        if len(out) == k:
            return out
    raise AssertionError("unreachable")
