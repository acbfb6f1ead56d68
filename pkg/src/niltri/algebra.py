"""The graded algebra attached to a triangular matrix, and isomorphism testing.

A matrix T = [t_ij] encodes the commutative algebra A(T) on generators
X_1, ..., X_n (each of degree 2) subject to

    X_i^2 = sum_{j < i} t_ij X_j X_i        (so X_1^2 = 0).

The square-free monomials form a basis of dimension 2^n; products are
computed by rewriting repeated generators through the relations, highest
index first.

An invertible scalar matrix Gamma = [g_ij] induces the degree-preserving map
X_j -> sum_i g_ij Y_i into A(S).  Two independent routes decide whether that
map is an isomorphism:

  * gamma_system_holds checks the closed-form polynomial system obtained by
    expanding the relations (one equation per (r, i < k));
  * gamma_as_homomorphism maps the generators into A(S) and normalizes the
    relations of A(T) there directly.

They must agree everywhere; the test suite enforces this.  iso_search then
looks for such a Gamma between two matrices in second reduced echelon form,
pruning first by the wall and measure-sequence invariants and then by the
block structure any isomorphism matrix must carry (block upper triangular
with permutation-supported diagonal blocks respecting the measure
refinement).
"""

from __future__ import annotations

from itertools import permutations

from .fields import FieldElement
from .tmatrix import NotReducedError, Slt, is_2ref, measure_sequence, wall_of_ref


class GammaError(ValueError):
    """Bad isomorphism-matrix input (wrong shape, or not invertible)."""


class SearchCapExceeded(RuntimeError):
    """iso_search ran out of its candidate budget: verdict inconclusive."""


def mask_str(mask, n):
    if mask == 0:
        return "1"
    return "*".join(f"X{i + 1}" for i in range(n) if mask >> i & 1)


class AlgebraElement:
    """Element of A(T) as a sparse map {monomial mask: coefficient}."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra, coeffs):
        self.algebra = algebra
        self.coeffs = {m: c for m, c in coeffs.items() if not c.is_zero()}

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra.T != self.algebra.T:
            raise ValueError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out[m] + c if m in out else c
        return AlgebraElement(self.algebra, out)

    def __neg__(self):
        return AlgebraElement(self.algebra, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            return self.scale(other)
        self._check(other)
        alg = self.algebra
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                c12 = c1 * c2
                for m, c in alg.mul_basis(m1, m2).items():
                    prod = c12 * c
                    out[m] = out[m] + prod if m in out else prod
        return AlgebraElement(alg, out)

    def __rmul__(self, other):
        if isinstance(other, FieldElement):
            return self.scale(other)
        return NotImplemented

    def scale(self, c):
        c = self.algebra.field.of(c)
        return AlgebraElement(self.algebra, {m: c * v for m, v in self.coeffs.items()})

    def is_zero(self):
        return not self.coeffs

    def degree(self):
        """Degree when homogeneous (each generator has degree 2); None for 0."""
        if not self.coeffs:
            return None
        degs = {2 * bin(m).count("1") for m in self.coeffs}
        if len(degs) > 1:
            raise ValueError("element is not homogeneous")
        return degs.pop()

    def is_homogeneous(self):
        return len({bin(m).count("1") for m in self.coeffs}) <= 1

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and self.algebra.T == other.algebra.T
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        if not self.coeffs:
            return "0"
        n = self.algebra.n
        return " + ".join(
            f"({c})*{mask_str(m, n)}" for m, c in sorted(self.coeffs.items())
        )


class Algebra:
    """A(T) with multiplication memoized on basis-monomial pairs."""

    def __init__(self, T):
        self.T = T
        self.field = T.field
        self.n = T.n
        # X_i^2 rewrites to sum of (mask of {j, i}) with coefficient t_ij
        self._sq = {}
        for i in range(1, T.n + 1):
            self._sq[i] = [
                (j, T.entry(i, j)) for j in range(1, i) if not T.entry(i, j).is_zero()
            ]
        self._words = {}
        self._pairs = {}

    def zero(self):
        return AlgebraElement(self, {})

    def one(self):
        return AlgebraElement(self, {0: self.field.one})

    def gen(self, i):
        if not 1 <= i <= self.n:
            raise IndexError(f"generator index {i} outside [1,{self.n}]")
        return AlgebraElement(self, {1 << (i - 1): self.field.one})

    def element(self, coeffs):
        return AlgebraElement(self, {m: self.field.of(c) for m, c in coeffs.items()})

    def _reduce_word(self, word):
        """Normal form of a sorted generator word (repeats allowed)."""
        if word in self._words:
            return self._words[word]
        rep = 0
        seen = set()
        for i in word:
            if i in seen:
                rep = max(rep, i)
            seen.add(i)
        if rep == 0:
            mask = 0
            for i in word:
                mask |= 1 << (i - 1)
            out = {mask: self.field.one}
        else:
            rest = list(word)
            rest.remove(rep)
            rest.remove(rep)
            out = {}
            for j, c in self._sq[rep]:
                sub = tuple(sorted(rest + [j, rep]))
                for m, cc in self._reduce_word(sub).items():
                    v = c * cc
                    out[m] = out[m] + v if m in out else v
            out = {m: c for m, c in out.items() if not c.is_zero()}
        self._words[word] = out
        return out

    def normal_form(self, word):
        """Reduce a product of generators (a sequence of indices) to the basis."""
        word = tuple(sorted(word))
        for i in word:
            if not 1 <= i <= self.n:
                raise IndexError(f"generator index {i} outside [1,{self.n}]")
        return AlgebraElement(self, dict(self._reduce_word(word)))

    def mul_basis(self, m1, m2):
        """Product of two basis monomials as a {mask: coeff} map."""
        key = (m1, m2) if m1 <= m2 else (m2, m1)
        if key in self._pairs:
            return self._pairs[key]
        if m1 & m2 == 0:
            out = {m1 | m2: self.field.one}
        else:
            word = []
            for i in range(1, self.n + 1):
                b = 1 << (i - 1)
                if m1 & b:
                    word.append(i)
                if m2 & b:
                    word.append(i)
            out = self._reduce_word(tuple(word))
        self._pairs[key] = out
        return out

    def dimension_check(self):
        """Confluence of the rewriting on the 2^n basis.

        Verifies associativity on all generator triples and on the length-4
        overlaps (X_i X_i)(X_j X_j); any failure would contradict the basis
        having full rank 2^n for this T.
        """
        gens = [self.gen(i) for i in range(1, self.n + 1)]
        for a in gens:
            for b in gens:
                ab = a * b
                for c in gens:
                    if (ab * c) != (a * (b * c)):
                        return False
        for a in gens:
            aa = a * a
            for b in gens:
                bb = b * b
                if (aa * bb) != ((aa * b) * b):
                    return False
        return True


class GammaMatrix:
    """An n x n scalar matrix, candidate for inducing an isomorphism."""

    __slots__ = ("field", "n", "rows")

    def __init__(self, field, rows):
        rows = tuple(tuple(field.of(x) for x in row) for row in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise GammaError("matrix must be square")
        self.field = field
        self.n = n
        self.rows = rows

    @classmethod
    def identity(cls, field, n):
        return cls(
            field, [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        )

    def entry(self, i, j):
        return self.rows[i - 1][j - 1]

    def __matmul__(self, other):
        if self.field != other.field or self.n != other.n:
            raise GammaError("size or field mismatch in product")
        z = self.field.zero
        rows = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                acc = z
                for k in range(self.n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            rows.append(row)
        return GammaMatrix(self.field, rows)

    def _elimination(self):
        """Gauss-Jordan over the field; returns (rank, inverse rows or None)."""
        n = self.n
        f = self.field
        a = [list(r) for r in self.rows]
        inv = [[f.one if i == j else f.zero for j in range(n)] for i in range(n)]
        rank = 0
        for col in range(n):
            piv = next((r for r in range(rank, n) if not a[r][col].is_zero()), None)
            if piv is None:
                continue
            a[rank], a[piv] = a[piv], a[rank]
            inv[rank], inv[piv] = inv[piv], inv[rank]
            scale = a[rank][col].inv()
            a[rank] = [x * scale for x in a[rank]]
            inv[rank] = [x * scale for x in inv[rank]]
            for r in range(n):
                if r != rank and not a[r][col].is_zero():
                    factor = a[r][col]
                    a[r] = [x - factor * y for x, y in zip(a[r], a[rank])]
                    inv[r] = [x - factor * y for x, y in zip(inv[r], inv[rank])]
            rank += 1
        return rank, (inv if rank == n else None)

    def is_invertible(self):
        return self._elimination()[0] == self.n

    def inverse(self):
        rank, inv = self._elimination()
        if inv is None:
            raise GammaError("matrix is singular")
        return GammaMatrix(self.field, inv)

    def __eq__(self, other):
        return isinstance(other, GammaMatrix) and self.rows == other.rows and self.field == other.field

    def to_text(self):
        return "\n".join(" ".join(str(x) for x in row) for row in self.rows) + "\n"

    @classmethod
    def from_text(cls, field, text):
        rows = [
            [field.parse(tok) for tok in ln.split()]
            for ln in text.strip().splitlines()
            if ln.strip()
        ]
        return cls(field, rows)

    def __repr__(self):
        return "GammaMatrix:\n" + self.to_text()


def _check_pair(T, S, G):
    if T.field != S.field or T.n != S.n:
        raise GammaError("matrices live over different fields or sizes")
    if G.field != T.field or G.n != T.n:
        raise GammaError("gamma matrix does not match the matrices")
    if not G.is_invertible():
        raise GammaError("gamma matrix is not invertible")


def _system_equation(T, S, G, r, i, k):
    two = T.field.of(2)
    gir, gkr = G.entry(i, r), G.entry(k, r)
    ski = S.entry(k, i)
    lhs = two * gir * gkr + gkr * gkr * ski
    rhs = T.field.zero
    for j in range(1, r):
        trj = T.entry(r, j)
        if trj.is_zero():
            continue
        gkj, gij = G.entry(k, j), G.entry(i, j)
        rhs = rhs + trj * (gkj * gkr * ski + gkj * gir + gij * gkr)
    return lhs == rhs


def gamma_system_holds(T, S, G, ordered_pairs=False):
    """Whether G satisfies the full polynomial system linking T to S.

    The system has one equation per (r, i < k); with ordered_pairs=True the
    (i, k) loop runs over all ordered pairs but substitutes the sorted pair,
    a bookkeeping variant that must never change the verdict.
    """
    _check_pair(T, S, G)
    n = T.n
    for r in range(1, n + 1):
        for i in range(1, n + 1):
            for k in range(1, n + 1):
                if i == k or (not ordered_pairs and i > k):
                    continue
                lo, hi = (i, k) if i < k else (k, i)
                if not _system_equation(T, S, G, r, lo, hi):
                    return False
    return True


def gamma_as_homomorphism(T, S, G):
    """Independent oracle: push the generators through G and normalize.

    Maps X_j to sum_i g_ij Y_i inside A(S) and checks every defining
    relation of A(T) on the images.
    """
    _check_pair(T, S, G)
    AS = Algebra(S)
    img = [None]
    for j in range(1, T.n + 1):
        img.append(
            AlgebraElement(
                AS,
                {
                    1 << (i - 1): G.entry(i, j)
                    for i in range(1, T.n + 1)
                    if not G.entry(i, j).is_zero()
                },
            )
        )
    for i in range(1, T.n + 1):
        lhs = img[i] * img[i]
        rhs = AS.zero()
        for j in range(1, i):
            tij = T.entry(i, j)
            if not tij.is_zero():
                rhs = rhs + (img[j] * img[i]).scale(tij)
        if lhs != rhs:
            return False
    return True


def eto_gamma(T, op):
    """The isomorphism matrix of a single elementary operation.

    Maps A(T) into A(op(T)): scaling r by alpha sends X_r to alpha Y_r, a
    swap permutes the generators, and a shear at (r0, k0) sends X_r0 to
    Y_r0 + beta Y_k0.
    """
    from .eto import FOp, POp, QOp  # local import to avoid a cycle

    G = [[T.field.one if i == j else T.field.zero for j in range(T.n)] for i in range(T.n)]
    if isinstance(op, POp):
        G[op.r - 1][op.r - 1] = T.field.of(op.alpha)
    elif isinstance(op, FOp):
        z, o = T.field.zero, T.field.one
        G[op.r1 - 1][op.r1 - 1] = z
        G[op.r2 - 1][op.r2 - 1] = z
        G[op.r2 - 1][op.r1 - 1] = o
        G[op.r1 - 1][op.r2 - 1] = o
    elif isinstance(op, QOp):
        G[op.k0 - 1][op.r0 - 1] = T.field.of(op.beta)
    else:
        raise ValueError(f"not an ETO: {op!r}")
    return GammaMatrix(T.field, G)


def trace_gamma(T, trace):
    """Compose the per-step isomorphism matrices along a trace.

    Returns (endpoint matrix, Gamma) with Gamma inducing A(T) -> A(endpoint).
    """
    from .eto import apply  # local import to avoid a cycle

    G = GammaMatrix.identity(T.field, T.n)
    cur = T
    for op in trace:
        G = eto_gamma(cur, op) @ G
        cur = apply(cur, op)
    return cur, G


def _blocks_of(T):
    """Wall blocks of a nonzero 2-REF matrix as half-open intervals, plus the
    measure-sequence refinement that any isomorphism's permutation respects."""
    w = wall_of_ref(T).entries
    bounds = (1,) + w + (T.n + 1,)
    blocks = [(bounds[j], bounds[j + 1]) for j in range(len(bounds) - 1)]
    ms = measure_sequence(T)
    domains = [blocks[0]]
    for j, blk in enumerate(ms.blocks):
        lo, hi = blocks[j + 1]
        cuts = list(blk.rows) + [hi]
        domains.extend((cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1))
    return blocks, [d for d in domains if d[1] > d[0]]


def iso_search(T, S, cap=10**8, stats=None):
    """Search for a Gamma inducing an isomorphism A(T) -> A(S).

    Both matrices must be in 2-REF over a finite field.  Returns a verified
    GammaMatrix, or None when the constrained space is exhausted (a genuine
    absence certificate).  Differing walls or measure sequences short-circuit
    to absence without enumerating anything.  The candidate budget is
    enforced strictly; running out raises SearchCapExceeded rather than
    guessing.
    """
    if T.field != S.field or T.n != S.n:
        raise GammaError("matrices live over different fields or sizes")
    if not T.field.is_finite:
        raise GammaError("iso_search requires a finite field")
    if not is_2ref(T) or not is_2ref(S):
        raise NotReducedError("iso_search requires both matrices in 2-REF")
    if stats is None:
        stats = {}
    stats.setdefault("candidates", 0)
    stats.setdefault("filtered_by", None)

    if T.is_zero() or S.is_zero():
        if T.is_zero() and S.is_zero():
            return GammaMatrix.identity(T.field, T.n)
        stats["filtered_by"] = "wall"
        return None
    if wall_of_ref(T) != wall_of_ref(S):
        stats["filtered_by"] = "wall"
        return None
    if measure_sequence(T) != measure_sequence(S):
        stats["filtered_by"] = "measure"
        return None

    n = T.n
    field = T.field
    blocks, domains = _blocks_of(T)
    block_of = [None] * (n + 1)
    for b, (lo, hi) in enumerate(blocks):
        for i in range(lo, hi):
            block_of[i] = b

    units = field.units()
    elems = field.elements()
    zero = field.zero
    t_rows = {
        r: [(j, T.entry(r, j)) for j in range(1, r) if not T.entry(r, j).is_zero()]
        for r in range(1, n + 1)
    }

    def equations_ok(G, r, k):
        two = field.of(2)
        gkr = G[k][r]
        for i in range(1, k):
            gir = G[i][r]
            ski = S.entry(k, i)
            if gkr.is_zero() and gir.is_zero():
                continue
            lhs = two * gir * gkr + gkr * gkr * ski
            rhs = zero
            for j, trj in t_rows[r]:
                if j >= r:
                    break
                rhs = rhs + trj * (G[k][j] * gkr * ski + G[k][j] * gir + G[i][j] * gkr)
            if lhs != rhs:
                return False
        return True

    budget = [cap]

    def dfs(G, rho, r, k):
        if r > n:
            return True
        if k > n:
            return dfs(G, rho, r + 1, 1)
        bk, br = block_of[k], block_of[r]
        if bk > br:
            choices = (zero,)
        elif bk == br:
            choices = units if rho[k] == r else (zero,)
        else:
            choices = elems
        for v in choices:
            budget[0] -= 1
            if budget[0] < 0:
                raise SearchCapExceeded(f"iso_search exceeded {cap} candidates")
            stats["candidates"] += 1
            G[k][r] = v
            if equations_ok(G, r, k) and dfs(G, rho, r, k + 1):
                return True
        G[k][r] = zero
        return False

    perm_sets = [list(permutations(range(lo, hi))) for lo, hi in domains]

    def rho_candidates(idx, rho):
        if idx == len(domains):
            yield tuple(rho)
            return
        lo, hi = domains[idx]
        for p in perm_sets[idx]:
            for i, tgt in zip(range(lo, hi), p):
                rho[i] = tgt
            yield from rho_candidates(idx + 1, rho)

    G = [[zero] * (n + 1) for _ in range(n + 1)]
    for rho in rho_candidates(0, [0] * (n + 1)):
        if dfs(G, rho, 1, 1):
            rows = [[G[i][j] for j in range(1, n + 1)] for i in range(1, n + 1)]
            return GammaMatrix(field, rows)
    return None
