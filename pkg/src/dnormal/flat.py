"""Flat coordinates for iterated constructions.

Every space built from M, TM and TTM factors by fiber products and tangents
embeds in a product of named blocks.  Canonical identifications between two
such constructions are then block maps (permutations, possibly with the
canonical involution of TTM) restricted to the carriers.

Block kinds and their coordinate layout, for a block of base dimension n:
  M    x
  TM   (x, u)                 u the fiber coordinate
  TTM  (x, xdot, u, udot)     point (x, u) of TM, tangent (xdot, udot)
"""

from .linalg import Matrix, CompatibilityError, DimensionError, block_diag, left_inverse

MULT = {"M": 1, "TM": 2, "TTM": 4}
RAISE = {"M": "TM", "TM": "TTM"}


class Flat:
    __slots__ = ("blocks", "matrix", "_linv")

    def __init__(self, blocks, matrix):
        blocks = tuple(tuple(b) for b in blocks)
        names = [b[0] for b in blocks]
        if len(set(names)) != len(names):
            raise ValueError("duplicate block names %s" % names)
        if matrix.rows != flat_dim(blocks):
            raise DimensionError("flat matrix has %d rows for blocks of size %d"
                                 % (matrix.rows, flat_dim(blocks)))
        self.blocks = blocks
        self.matrix = matrix
        self._linv = None

    @classmethod
    def block(cls, name, kind, n):
        b = ((name, kind, n),)
        return cls(b, Matrix.identity(MULT[kind] * n))

    def names(self):
        return [b[0] for b in self.blocks]

    def left_inv(self):
        if self._linv is None:
            self._linv = left_inverse(self.matrix)
        return self._linv

    def product(self, other):
        if set(self.names()) & set(other.names()):
            return None
        return Flat(self.blocks + other.blocks, block_diag(self.matrix, other.matrix))

    def restrict_to(self, incl):
        return Flat(self.blocks, self.matrix @ incl)

    def tangent(self):
        """Flat embedding of the tangent space: blocks raise one kind."""
        new_blocks = []
        for name, kind, n in self.blocks:
            if kind not in RAISE:
                raise ValueError("no tangent for a %s block" % kind)
            new_blocks.append((name, RAISE[kind], n))
        d = flat_dim(self.blocks)
        # source coordinates: point copy [0, d), tangent copy [d, 2d)
        perm = []
        off = 0
        for name, kind, n in self.blocks:
            if kind == "M":
                perm += list(range(off, off + n)) + list(range(d + off, d + off + n))
            else:
                x = list(range(off, off + n))
                u = list(range(off + n, off + 2 * n))
                perm += x + [d + i for i in x] + u + [d + i for i in u]
            off += MULT[kind] * n
        sel = Matrix.selection(perm, 2 * d)
        return Flat(new_blocks, sel @ block_diag(self.matrix, self.matrix))


def flat_dim(blocks):
    return sum(MULT[k] * n for _, k, n in blocks)


def kappa(n):
    """Canonical involution of TTM: swaps xdot and u."""
    idx = list(range(n)) + list(range(2 * n, 3 * n)) + list(range(n, 2 * n)) + list(range(3 * n, 4 * n))
    return Matrix.selection(idx, 4 * n)


def lift(kind, f):
    """The map induced on a block of the given kind by a linear map f."""
    return block_diag(*([f] * MULT[kind]))


def offsets(blocks):
    out = {}
    off = 0
    for name, kind, n in blocks:
        out[name] = (off, kind, n)
        off += MULT[kind] * n
    return out


def block_map(src, tgt, entries):
    """Assemble a flat map from {(target_name, source_name): matrix}."""
    so, to = offsets(src), offsets(tgt)
    a = Matrix.zeros(flat_dim(tgt), flat_dim(src)).tolist()
    for (tn, sn), m in entries.items():
        t0, tk, tnn = to[tn]
        s0, sk, snn = so[sn]
        if m.shape != (MULT[tk] * tnn, MULT[sk] * snn):
            raise DimensionError("block (%s <- %s) has shape %s" % (tn, sn, m.shape))
        for i in range(m.rows):
            row = a[t0 + i]
            for j, x in enumerate(m.a[i]):
                if x:
                    row[s0 + j] += x
    return Matrix._raw(a, flat_dim(tgt), flat_dim(src))


def permutation(src, tgt, kappa_on=()):
    """Block permutation between two flat layouts with the same named blocks,
    applying the TTM involution on the named blocks in kappa_on."""
    sb = {b[0]: b for b in src}
    entries = {}
    for name, kind, n in tgt:
        if name not in sb or sb[name][1:] != (kind, n):
            raise CompatibilityError("block %s does not match" % name)
        if name in kappa_on:
            if kind != "TTM":
                raise CompatibilityError("involution only acts on TTM blocks")
            entries[(name, name)] = kappa(n)
        else:
            entries[(name, name)] = Matrix.identity(MULT[kind] * n)
    if set(sb) != set(b[0] for b in tgt):
        raise CompatibilityError("block sets differ")
    return block_map(src, tgt, entries)


def restrict(x_flat, y_flat, a):
    """The map R with y.matrix @ R = a @ x.matrix, if it exists."""
    target = a @ x_flat.matrix
    r = y_flat.left_inv() @ target
    if y_flat.matrix @ r != target:
        raise CompatibilityError("flat map does not carry the source carrier into the target")
    return r


def restrict_perm(x, y, kappa_on=()):
    """Restriction of a block permutation between two spaces with flats."""
    return restrict(x.flat, y.flat, permutation(x.flat.blocks, y.flat.blocks, kappa_on))
