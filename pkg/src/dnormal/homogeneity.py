"""Scaling actions stored as weight-graded projection families, and vector
bundles in the linear model (a total space with a weight-{0,1} action)."""

from .linalg import (Matrix, CompatibilityError, DimensionError, ONE,
                     to_q, block_diag, fiber_product, image, is_injective,
                     left_inverse, quotient, vstack)


class ActionError(ValueError):
    pass


class ScalingAction:
    """lambda acts as sum_k lambda^k P_k."""

    def __init__(self, dim, projections, check=True):
        self.dim = dim
        self.projections = {int(k): p for k, p in projections.items() if not p.is_zero()}
        if check:
            self._check()

    def _check(self):
        n = self.dim
        total = Matrix.zeros(n, n)
        for k, p in self.projections.items():
            if k < 0:
                raise ActionError("negative weight %d" % k)
            if p.shape != (n, n):
                raise DimensionError("projection of weight %d has shape %s" % (k, p.shape))
            if p @ p != p:
                raise ActionError("weight-%d projection is not idempotent" % k)
            total = total + p
        for k in self.projections:
            for l in self.projections:
                if k < l and not (self.projections[k] @ self.projections[l]).is_zero():
                    raise ActionError("weights %d and %d are not orthogonal" % (k, l))
        if total != Matrix.identity(n):
            raise ActionError("projections do not sum to the identity")

    @classmethod
    def trivial(cls, n):
        return cls(n, {0: Matrix.identity(n)}, check=False)

    @classmethod
    def graded(cls, weights):
        """Diagonal action with the given weight on each coordinate."""
        n = len(weights)
        out = {}
        for k in set(weights):
            out[k] = Matrix.diag([1 if w == k else 0 for w in weights])
        return cls(n, out, check=False)

    @property
    def weights(self):
        return sorted(self.projections)

    def P(self, k):
        return self.projections.get(k, Matrix.zeros(self.dim, self.dim))

    def __eq__(self, other):
        if not isinstance(other, ScalingAction):
            return NotImplemented
        return self.dim == other.dim and self.projections == other.projections

    def __repr__(self):
        return "ScalingAction(dim=%d, weights=%s)" % (self.dim, self.weights)

    def conjugate(self, into, back):
        """Transport along an isomorphism: into: self -> new, back = into^-1."""
        return ScalingAction(into.rows, {k: into @ p @ back for k, p in self.projections.items()},
                             check=False)

    def restrict(self, incl, coords):
        """Restriction to an invariant subspace with inclusion incl and left inverse coords."""
        out = {}
        for k, p in self.projections.items():
            img = p @ incl
            r = coords @ img
            if incl @ r != img:
                raise ActionError("subspace is not invariant under weight %d" % k)
            out[k] = r
        return ScalingAction(incl.cols, out, check=False)

    def to_json(self):
        return {"dim": self.dim,
                "projections": {str(k): p.to_json() for k, p in sorted(self.projections.items())}}


def product_action(*actions):
    ws = set()
    for a in actions:
        ws.update(a.projections)
    return ScalingAction(sum(a.dim for a in actions),
                         {k: block_diag(*[a.P(k) for a in actions]) for k in ws}, check=False)


def evaluate(a, lam):
    lam = to_q(lam)
    out = Matrix.zeros(a.dim, a.dim)
    for k, p in a.projections.items():
        c = ONE if k == 0 else lam ** k
        if c:
            out = out + p.scale(c)
    return out


def recover_action(dim, sample_at_2, max_weight=32):
    """Rebuild the weight projections from the value of the action at 2."""
    a = sample_at_2
    if a.shape != (dim, dim):
        raise DimensionError("sample has shape %s, expected %dx%d" % (a.shape, dim, dim))
    found = {}
    total = 0
    for k in range(max_weight + 1):
        mu = ONE * 2 ** k
        d = dim - (a - Matrix.identity(dim).scale(mu)).rank()
        if d:
            found[k] = mu
            total += d
        if total == dim:
            break
    if total != dim:
        raise ActionError("not a homogeneity structure: spectrum is not a set of powers of two")
    projections = {}
    for k, mu in found.items():
        p = Matrix.identity(dim)
        for l, nu in found.items():
            if l != k:
                p = p @ (a - Matrix.identity(dim).scale(nu)).scale(1 / (mu - nu))
        projections[k] = p
    act = ScalingAction(dim, projections)
    if evaluate(act, 2) != a:
        raise ActionError("not a homogeneity structure: sample is not diagonalizable")
    return act


def is_equivariant(f, a, b):
    if f.cols != a.dim or f.rows != b.dim:
        raise DimensionError("map %s does not fit actions of dims %d, %d" % (f.shape, a.dim, b.dim))
    for k in set(a.projections) | set(b.projections):
        if f @ a.P(k) != b.P(k) @ f:
            return False
    return True


def is_equivariant_sampled(f, a, b, samples=None):
    """Equivariance tested on finitely many values of lambda."""
    if samples is None:
        top = max(a.weights + b.weights + [0])
        samples = [0] + list(range(2, top + 3))
    return all(f @ evaluate(a, s) == evaluate(b, s) @ f for s in samples)


class VBSpace:
    """A vector bundle in the linear model.

    ``zero_section`` is an injective map from base coordinates onto the
    weight-0 part; it fixes what "the base" means for base maps.
    """

    def __init__(self, action, zero_section=None, flat=None, name=None):
        if set(action.projections) - {0, 1}:
            raise ActionError("bundle actions have weights in {0, 1}")
        self.action = action
        self.dim = action.dim
        p0 = action.P(0)
        if zero_section is None:
            zero_section = image(p0).incl()
        else:
            if zero_section.rows != self.dim or not is_injective(zero_section):
                raise CompatibilityError("zero section must be injective into the total space")
            if image(zero_section) != image(p0):
                raise CompatibilityError("zero section must span the weight-0 part")
        self.zero_section = zero_section
        self.flat = flat
        self.name = name
        self._pi = None

    @property
    def base_dim(self):
        return self.zero_section.cols

    @property
    def rank(self):
        return self.dim - self.base_dim

    @property
    def p0(self):
        return self.action.P(0)

    @property
    def p1(self):
        return self.action.P(1)

    @property
    def base(self):
        return image(self.p0)

    @property
    def fiber(self):
        return image(self.p1)

    def projection(self):
        """Bundle projection onto base coordinates."""
        if self._pi is None:
            self._pi = left_inverse(self.zero_section) @ self.p0
        return self._pi

    def base_map(self, phi, target):
        return target.projection() @ phi @ self.zero_section

    def __repr__(self):
        return "VBSpace(%s: dim %d, base %d, rank %d)" % (self.name or "", self.dim,
                                                         self.base_dim, self.rank)


def trivial_bundle(n, flat=None, name=None):
    """Rank-zero bundle: the base seen as a bundle over itself."""
    return VBSpace(ScalingAction.trivial(n), Matrix.identity(n), flat=flat, name=name)


def product_bundle(base_dim, rank, name=None):
    """Q^base x Q^rank with coordinates (x, e)."""
    act = ScalingAction.graded([0] * base_dim + [1] * rank)
    z = vstack(Matrix.identity(base_dim), Matrix.zeros(rank, base_dim))
    return VBSpace(act, z, name=name)


def is_vb_map(phi, e, f):
    return is_equivariant(phi, e.action, f.action)


def pullback_action(h, e, base_flat=None):
    """Pullback bundle h^*E, carried by the fiber product of h and the bundle
    projection inside P + E.  Returns a VBSpace with a ``carrier`` attribute."""
    if h.rows != e.base_dim:
        raise DimensionError("map lands in Q^%d but the base has dimension %d" % (h.rows, e.base_dim))
    p = h.cols
    carrier, _, _ = fiber_product(h, e.projection())
    amb = product_action(ScalingAction.trivial(p), e.action)
    incl, coords = carrier.incl(), carrier.coords()
    act = amb.restrict(incl, coords)
    zs = coords @ vstack(Matrix.identity(p), e.zero_section @ h)
    flat = None
    if base_flat is not None and e.flat is not None:
        flat = base_flat.product(e.flat).restrict_to(incl)
    out = VBSpace(act, zs, flat=flat)
    out.carrier = carrier
    out.factor_dims = (p, e.dim)
    return out


def quotient_action(e, sub):
    """Quotient of a bundle by an action-invariant subspace.  Returns a
    VBSpace with the quotient presentation attached as ``presentation``."""
    if sub.ambient_dim != e.dim:
        raise DimensionError("subspace ambient mismatch")
    for k, p in e.action.projections.items():
        if not sub.contains(p @ sub.incl()):
            raise ActionError("subspace is not invariant under the weight-%d projection" % k)
    qp = quotient(e.dim, sub)
    proj = {k: qp.projection @ p @ qp.section for k, p in e.action.projections.items()}
    act = ScalingAction(qp.dim, proj, check=False)
    zs = qp.projection @ e.zero_section
    if not is_injective(zs):
        raise ActionError("subspace meets the base; quotient is not a bundle over the same base")
    out = VBSpace(act, zs)
    out.presentation = qp
    out.parent = e
    return out


def fiber_part(e, sub):
    """The weight-1 part of an invariant subspace."""
    return sub.intersect(e.fiber)
