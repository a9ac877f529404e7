"""Polynomial maps over Q with exact Jacobians, and linearization of a
commuting square of polynomial immersions at a rational point."""

from .linalg import Matrix, ZERO, to_q, q_to_json, is_injective
from .symmetry import ImmersionSquare, SquareError


class PolyError(ValueError):
    pass


class ArityError(PolyError):
    pass


class NotCommuting(PolyError):
    pass


class ImmersionFailure(PolyError):
    pass


def _clean(terms):
    return {e: c for e, c in terms.items() if c != 0}


def _add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, ZERO) + c
    return _clean(out)


def _mul(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, ZERO) + c1 * c2
    return _clean(out)


class PolyMap:
    """Each component is a dict {exponent tuple: coefficient}."""

    def __init__(self, arity, components):
        self.arity = arity
        comps = []
        for comp in components:
            terms = {}
            for e, c in dict(comp).items():
                e = tuple(int(k) for k in e)
                if len(e) != arity:
                    raise ArityError("monomial %s has %d exponents, expected %d" % (e, len(e), arity))
                if any(k < 0 for k in e):
                    raise PolyError("negative exponent in %s" % (e,))
                terms[e] = terms.get(e, ZERO) + to_q(c)
            comps.append(_clean(terms))
        self.components = comps

    @property
    def output_arity(self):
        return len(self.components)

    @classmethod
    def linear(cls, m):
        comps = []
        for i in range(m.rows):
            comps.append({tuple(int(k == j) for k in range(m.cols)): m[i, j]
                          for j in range(m.cols)})
        return cls(m.cols, comps)

    @classmethod
    def variable(cls, arity, k):
        return {tuple(int(i == k) for i in range(arity)): to_q(1)}

    def __eq__(self, other):
        return (isinstance(other, PolyMap) and self.arity == other.arity
                and self.components == other.components)

    __hash__ = None

    def __repr__(self):
        return "PolyMap(%d -> %d)" % (self.arity, self.output_arity)

    def to_json(self):
        return [[{"coefficient": q_to_json(c), "exponents": list(e)} for e, c in sorted(comp.items())]
                for comp in self.components]

    @classmethod
    def from_json(cls, arity, doc):
        try:
            return cls(arity, [{tuple(t["exponents"]): t["coefficient"] for t in comp} for comp in doc])
        except (KeyError, TypeError) as exc:
            raise PolyError("malformed polynomial: %s" % exc) from None


def _check_point(p, point):
    if len(point) != p.arity:
        raise ArityError("point has %d coordinates, map takes %d" % (len(point), p.arity))
    return [to_q(x) for x in point]


def _monomial(e, x):
    v = to_q(1)
    for xi, k in zip(x, e):
        if k:
            v *= xi ** k
    return v


def evaluate(p, point):
    x = _check_point(p, point)
    return [sum((c * _monomial(e, x) for e, c in comp.items()), ZERO) for comp in p.components]


def derivative(comp, k):
    out = {}
    for e, c in comp.items():
        if e[k]:
            d = e[:k] + (e[k] - 1,) + e[k + 1:]
            out[d] = out.get(d, ZERO) + c * e[k]
    return _clean(out)


def jacobian(p, point):
    x = _check_point(p, point)
    rows = []
    for comp in p.components:
        rows.append([sum((c * _monomial(e, x) for e, c in derivative(comp, k).items()), ZERO)
                     for k in range(p.arity)])
    return Matrix(rows, p.arity)


def is_immersion_at(p, point):
    return is_injective(jacobian(p, point))


def compose(q, p):
    """q after p, as a polynomial map."""
    if q.arity != p.output_arity:
        raise ArityError("cannot compose: %d outputs into %d inputs" % (p.output_arity, q.arity))
    one = {(0,) * p.arity: to_q(1)}
    comps = []
    for comp in q.components:
        total = {}
        for e, c in comp.items():
            term = {k: v * c for k, v in one.items()}
            for pk, k in zip(p.components, e):
                for _ in range(k):
                    term = _mul(term, pk)
            total = _add(total, term)
        comps.append(total)
    return PolyMap(p.arity, comps)


def linearize_square_at(i1, i2, j1, j2, point):
    """i1: M1 -> M2, j1: M1 -> N1, j2: M2 -> N2, i2: N1 -> N2, and a point of M1."""
    if i1.arity != j1.arity or j2.arity != i1.output_arity or i2.arity != j1.output_arity:
        raise ArityError("maps do not fit a square")
    if i2.output_arity != j2.output_arity:
        raise ArityError("maps do not land in the same space")
    if compose(i2, j1) != compose(j2, i1):
        raise NotCommuting("square does not commute as polynomials")
    x = _check_point(i1, point)
    at = {"i1": (i1, x), "j1": (j1, x), "j2": (j2, evaluate(i1, x)), "i2": (i2, evaluate(j1, x))}
    lin = {}
    for name, (p, y) in at.items():
        lin[name] = jacobian(p, y)
        if not is_injective(lin[name]):
            raise ImmersionFailure("%s is not an immersion at %s" % (name, [q_to_json(v) for v in y]))
    try:
        return ImmersionSquare(lin["i1"], lin["i2"], lin["j1"], lin["j2"])
    except SquareError as exc:
        raise PolyError(str(exc)) from None


def poly_square_from_json(doc):
    """Read the polynomial square format; returns the four maps and the point."""
    try:
        spaces, maps, point = doc["spaces"], doc["maps"], doc["point"]
        m1, m2, n1 = int(spaces["M1"]), int(spaces["M2"]), int(spaces["N1"])
        ms = {"i1": PolyMap.from_json(m1, maps["i1"]), "j1": PolyMap.from_json(m1, maps["j1"]),
              "j2": PolyMap.from_json(m2, maps["j2"]), "i2": PolyMap.from_json(n1, maps["i2"])}
        n2 = int(spaces["N2"])
    except KeyError as exc:
        raise PolyError("missing field %s" % exc) from None
    expect = {"i1": m2, "j1": n1, "j2": n2, "i2": n2}
    for k, n in expect.items():
        if ms[k].output_arity != n:
            raise ArityError("map %s has %d components, expected %d" % (k, ms[k].output_arity, n))
    return ms["i1"], ms["i2"], ms["j1"], ms["j2"], [to_q(v) for v in point]
