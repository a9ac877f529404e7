"""Exact rational linear algebra.

Matrices are immutable row-major grids of ``gmpy2.mpq`` entries.  Subspaces
are kept in canonical form (the reduced row-echelon form of a basis), so
equality of subspaces is equality of their bases.
"""

import contextvars
import random
from contextlib import contextmanager
from fractions import Fraction

from gmpy2 import mpq

Rational = mpq

ZERO = mpq(0)
ONE = mpq(1)


class DimensionError(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


def to_q(x):
    """Coerce an int, Fraction, mpq or "p/q" string to a reduced rational."""
    if isinstance(x, type(ZERO)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/", 1)
            p, q = int(p), int(q)
            if q == 0:
                raise ValueError("zero denominator in %r" % x)
            return mpq(p, q)
        return mpq(int(s))
    raise TypeError("cannot read %r as a rational" % (x,))


def q_to_json(x):
    x = to_q(x)
    if x.denominator == 1:
        return int(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


class Matrix:
    __slots__ = ("rows", "cols", "a", "_hash")

    def __init__(self, data, cols=None):
        a = [[to_q(x) for x in row] for row in data]
        if cols is None:
            if not a:
                raise DimensionError("give cols for a matrix with no rows")
            cols = len(a[0])
        for row in a:
            if len(row) != cols:
                raise DimensionError("ragged matrix")
        self.rows = len(a)
        self.cols = cols
        self.a = a
        self._hash = None

    @classmethod
    def _raw(cls, a, rows, cols):
        m = cls.__new__(cls)
        m.a = a
        m.rows = rows
        m.cols = cols
        m._hash = None
        return m

    @classmethod
    def zeros(cls, rows, cols):
        return cls._raw([[ZERO] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n):
        a = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            a[i][i] = ONE
        return cls._raw(a, n, n)

    @classmethod
    def diag(cls, values):
        n = len(values)
        a = [[ZERO] * n for _ in range(n)]
        for i, v in enumerate(values):
            a[i][i] = to_q(v)
        return cls._raw(a, n, n)

    @classmethod
    def from_columns(cls, columns, rows):
        columns = [list(c) for c in columns]
        a = [[to_q(c[i]) for c in columns] for i in range(rows)]
        return cls._raw(a, rows, len(columns))

    @classmethod
    def selection(cls, indices, n):
        """Rows e_i^T for i in indices: picks those coordinates."""
        a = [[ZERO] * n for _ in indices]
        for r, i in enumerate(indices):
            a[r][i] = ONE
        return cls._raw(a, len(indices), n)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def tolist(self):
        return [list(r) for r in self.a]

    def to_json(self):
        return [[q_to_json(x) for x in r] for r in self.a]

    def __getitem__(self, ij):
        i, j = ij
        return self.a[i][j]

    def row(self, i):
        return list(self.a[i])

    def col(self, j):
        return [r[j] for r in self.a]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and self.a == other.a

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, tuple(tuple(r) for r in self.a)))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.a)
        return "Matrix(%dx%d: [%s])" % (self.rows, self.cols, body)

    def __add__(self, other):
        _same_shape(self, other)
        return Matrix._raw([[x + y for x, y in zip(r, s)] for r, s in zip(self.a, other.a)],
                           self.rows, self.cols)

    def __sub__(self, other):
        _same_shape(self, other)
        return Matrix._raw([[x - y for x, y in zip(r, s)] for r, s in zip(self.a, other.a)],
                           self.rows, self.cols)

    def __neg__(self):
        return Matrix._raw([[-x for x in r] for r in self.a], self.rows, self.cols)

    def scale(self, c):
        c = to_q(c)
        return Matrix._raw([[c * x for x in r] for r in self.a], self.rows, self.cols)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionError("cannot multiply %dx%d by %dx%d"
                                 % (self.rows, self.cols, other.rows, other.cols))
        b = other.a
        n = other.cols
        out = []
        for r in self.a:
            acc = [ZERO] * n
            for k, x in enumerate(r):
                if x:
                    bk = b[k]
                    for j in range(n):
                        y = bk[j]
                        if y:
                            acc[j] += x * y
            out.append(acc)
        return Matrix._raw(out, self.rows, n)

    def apply(self, v):
        v = [to_q(x) for x in v]
        if len(v) != self.cols:
            raise DimensionError("vector length %d, expected %d" % (len(v), self.cols))
        return [sum((x * y for x, y in zip(r, v)), ZERO) for r in self.a]

    @property
    def T(self):
        if self.rows == 0:
            return Matrix.zeros(self.cols, 0)
        return Matrix._raw([list(c) for c in zip(*self.a)], self.cols, self.rows)

    def submatrix(self, rows=None, cols=None):
        rs = range(self.rows) if rows is None else rows
        cs = range(self.cols) if cols is None else cols
        cs = list(cs)
        return Matrix._raw([[self.a[i][j] for j in cs] for i in rs], len(list(rs)), len(cs))

    def is_zero(self):
        return all(not x for r in self.a for x in r)

    def is_identity(self):
        return self.rows == self.cols and self == Matrix.identity(self.rows)

    def rank(self):
        return len(rref(self)[1])


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError("shape mismatch %s vs %s" % (a.shape, b.shape))


def hstack(*ms):
    rows = ms[0].rows
    for m in ms:
        if m.rows != rows:
            raise DimensionError("hstack row mismatch")
    a = [sum((m.a[i] for m in ms), []) for i in range(rows)]
    return Matrix._raw(a, rows, sum(m.cols for m in ms))


def vstack(*ms):
    cols = ms[0].cols
    for m in ms:
        if m.cols != cols:
            raise DimensionError("vstack column mismatch")
    a = [list(r) for m in ms for r in m.a]
    return Matrix._raw(a, len(a), cols)


def block_diag(*ms):
    rows = sum(m.rows for m in ms)
    cols = sum(m.cols for m in ms)
    a = [[ZERO] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in ms:
        for i in range(m.rows):
            a[r0 + i][c0:c0 + m.cols] = m.a[i]
        r0 += m.rows
        c0 += m.cols
    return Matrix._raw(a, rows, cols)


def power_sum(m, k):
    """The k-fold direct sum of a matrix with itself."""
    return block_diag(*([m] * k))


def rref(m):
    """Reduced row-echelon form and pivot columns.  Zero rows are kept at the bottom."""
    a = [list(r) for r in m.a]
    rows, cols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = None
        for i in range(r, rows):
            if a[i][c]:
                p = i
                break
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pr = a[r]
        inv = 1 / pr[c]
        if inv != 1:
            pr = [x * inv for x in pr]
            a[r] = pr
        for i in range(rows):
            if i != r:
                f = a[i][c]
                if f:
                    ai = a[i]
                    a[i] = [x - f * y if y else x for x, y in zip(ai, pr)]
        pivots.append(c)
        r += 1
    return Matrix._raw(a, rows, cols), pivots


def rank(m):
    return len(rref(m)[1])


class Subspace:
    """A subspace of Q^n in canonical form: RREF basis rows and their pivots."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim, basis, pivots):
        self.ambient_dim = ambient_dim
        self.basis = basis
        self.pivots = tuple(pivots)

    @classmethod
    def from_rows(cls, rows_matrix):
        r, piv = rref(rows_matrix)
        basis = r.submatrix(rows=range(len(piv)))
        return cls(rows_matrix.cols, basis, piv)

    @classmethod
    def span(cls, columns_matrix):
        """Column span of a matrix."""
        return cls.from_rows(columns_matrix.T)

    @classmethod
    def zero(cls, n):
        return cls(n, Matrix.zeros(0, n), ())

    @classmethod
    def full(cls, n):
        return cls(n, Matrix.identity(n), range(n))

    @property
    def rank(self):
        return len(self.pivots)

    dim = rank

    def incl(self):
        """Basis vectors as columns: carrier coordinates to ambient."""
        return self.basis.T

    def coords(self):
        """Pivot-coordinate selection; a left inverse of incl()."""
        return Matrix.selection(self.pivots, self.ambient_dim)

    def contains(self, m):
        """True if every column of m lies in the subspace."""
        if m.rows != self.ambient_dim:
            raise DimensionError("ambient mismatch")
        if m.cols == 0:
            return True
        return self.incl() @ (self.coords() @ m) == m

    def __contains__(self, v):
        return self.contains(Matrix.from_columns([v], self.ambient_dim))

    def is_subspace_of(self, other):
        return other.contains(self.incl())

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient_dim == other.ambient_dim and self.pivots == other.pivots
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient_dim, self.pivots, self.basis))

    def __add__(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient mismatch")
        return Subspace.from_rows(vstack(self.basis, other.basis))

    def intersect(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient mismatch")
        a, b = self.incl(), other.incl()
        k = kernel(hstack(a, -b))
        return Subspace.span(a @ k.incl().submatrix(rows=range(a.cols)))

    def __repr__(self):
        return "Subspace(dim %d in Q^%d, basis=%r)" % (self.rank, self.ambient_dim, self.basis.tolist())


def kernel(f):
    """Kernel of a matrix (as a map), in canonical form."""
    r, piv = rref(f)
    n = f.cols
    pset = set(piv)
    free = [c for c in range(n) if c not in pset]
    vecs = []
    for c in free:
        v = [ZERO] * n
        v[c] = ONE
        for i, p in enumerate(piv):
            v[p] = -r.a[i][c]
        vecs.append(v)
    if not vecs:
        return Subspace.zero(n)
    return Subspace.from_rows(Matrix._raw(vecs, len(vecs), n))


def image(f):
    return Subspace.span(f)


def is_injective(f):
    return rank(f) == f.cols


def is_surjective(f):
    return rank(f) == f.rows


def inverse(m):
    if m.rows != m.cols:
        raise DimensionError("inverse of a non-square matrix")
    n = m.rows
    r, piv = rref(hstack(m, Matrix.identity(n)))
    if piv[:n] != list(range(n)):
        raise CompatibilityError("matrix is singular")
    return r.submatrix(cols=range(n, 2 * n))


def solve(a, b):
    """Some X with a @ X = b, or None when no solution exists."""
    if a.rows != b.rows:
        raise DimensionError("row mismatch in solve")
    n = a.cols
    r, piv = rref(hstack(a, b))
    x = [[ZERO] * b.cols for _ in range(n)]
    for i, p in enumerate(piv):
        if p >= n:
            return None
        x[p] = list(r.a[i][n:])
    return Matrix._raw(x, n, b.cols)


def left_inverse(a):
    """L with L @ a = I, for an injective a."""
    _, piv = rref(a.T)
    if len(piv) != a.cols:
        raise CompatibilityError("left inverse of a non-injective matrix")
    return inverse(a.submatrix(rows=piv)) @ Matrix.selection(piv, a.rows)


def right_inverse(a):
    """R with a @ R = I, for a surjective a."""
    _, piv = rref(a)
    if len(piv) != a.rows:
        raise CompatibilityError("right inverse of a non-surjective matrix")
    return Matrix.selection(piv, a.cols).T @ inverse(a.submatrix(cols=piv))


# Quotients ---------------------------------------------------------------

_section_rng = contextvars.ContextVar("section_rng", default=None)


@contextmanager
def random_sections(seed):
    """Within this block, quotients use seeded random complements instead of
    the coordinate complement.  Used to probe dependence on section choices.
    The same subspace always gets the same section inside one block."""
    token = _section_rng.set((random.Random(seed), {}))
    try:
        yield
    finally:
        _section_rng.reset(token)


class QuotientPresentation:
    __slots__ = ("ambient_dim", "sub", "dim", "projection", "section")

    def __init__(self, ambient_dim, sub, projection, section):
        self.ambient_dim = ambient_dim
        self.sub = sub
        self.dim = ambient_dim - sub.rank
        self.projection = projection
        self.section = section

    quotient_dim = property(lambda self: self.dim)

    def __repr__(self):
        return "QuotientPresentation(Q^%d / dim %d)" % (self.ambient_dim, self.sub.rank)


def quotient(ambient_dim, sub):
    if sub.ambient_dim != ambient_dim:
        raise DimensionError("subspace lives in Q^%d, not Q^%d" % (sub.ambient_dim, ambient_dim))
    n = ambient_dim
    piv = set(sub.pivots)
    comp = [c for c in range(n) if c not in piv]
    sel_c = Matrix.selection(comp, n)
    proj = sel_c @ (Matrix.identity(n) - sub.incl() @ sub.coords())
    section = sel_c.T
    state = _section_rng.get()
    if state is not None and comp and sub.rank:
        rng, cache = state
        key = (n, sub)
        if key not in cache:
            # shift the coordinate complement by a random map into sub
            shift = Matrix([[rng.randint(-2, 2) for _ in comp] for _ in range(sub.rank)])
            a = [[rng.randint(-2, 2) if j > i else int(i == j) for j in range(len(comp))]
                 for i in range(len(comp))]
            cache[key] = (shift, Matrix(a))
        shift, change = cache[key]
        section = (section + sub.incl() @ shift) @ change
        proj = inverse(change) @ proj
    return QuotientPresentation(n, sub, proj, section)


def induced_quotient_map(phi, q1, q2):
    """The map E1/F1 -> E2/F2 induced by phi; phi must carry q1.sub into q2.sub."""
    if phi.cols != q1.ambient_dim or phi.rows != q2.ambient_dim:
        raise DimensionError("map does not fit the quotient presentations")
    if not q2.sub.contains(phi @ q1.sub.incl()):
        raise CompatibilityError("map does not preserve the subspaces")
    return q2.projection @ phi @ q1.section


def induced_map(p, g):
    """The unique R with R @ p = g, for a surjective p; None if g does not factor."""
    r = g @ right_inverse(p)
    if r @ p != g:
        return None
    return r


def fiber_product(f, g):
    """Fiber product of a cospan A -f-> C <-g- B as a subspace of A + B."""
    if f.rows != g.rows:
        raise DimensionError("cospan codomains differ: %d vs %d" % (f.rows, g.rows))
    a, b = f.cols, g.cols
    p = kernel(hstack(f, -g))
    incl = p.incl()
    pr1 = incl.submatrix(rows=range(a))
    pr2 = incl.submatrix(rows=range(a, a + b))
    return p, pr1, pr2


def fiber_product_factor(f, g, u, v):
    """Factor a cone (u, v) over the cospan (f, g) through its fiber product."""
    if f @ u != g @ v:
        raise CompatibilityError("cone does not commute")
    p, _, _ = fiber_product(f, g)
    return p.coords() @ vstack(u, v)


def is_exact_at(f, g):
    if f.rows != g.cols:
        raise DimensionError("maps are not composable")
    return image(f) == kernel(g)
