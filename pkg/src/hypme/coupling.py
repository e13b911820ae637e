"""Discrete measure-equivalence couplings with exactly computable cocycles.

The ambient space is a finitely generated group G with counting measure.
The full group (the "gamma side") acts by left multiplication, a finite
index subgroup L (the "lambda side", with Schreier generators) acts on the
right by lambda * w = w lambda^-1, and the two actions commute.  The gamma
fundamental domain is a singleton {g0}; the lambda fundamental domain is a
left-coset transversal T, so mu(X_gamma) = 1 and mu(X_lambda) = [G : L].

To support the coboundedness-strengthening construction, every coupling is
stored in fibered form: the space is G x {0..m-1}, the gamma side is
G x Z/m (the finite factor permutes fibers cyclically), and the lambda
fundamental domain in fiber i is the translate T * f_i^-1 for an element
f_i of L.  A plain subgroup coupling is the m = 1 case with f_0 = e.

Cocycles are computed by coset lookup:

    alpha((gamma,k), (x,i)) = f_j * rep(gamma x)^-1 * (gamma x),  j = k+i mod m
    beta(lambda, (g0,i0))   = (g0 lambda g0^-1, 0)

where rep(g) is the transversal representative of the left coset g L.
Both are exact group elements; every integral in scope is a finite sum
over the finite fundamental domains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

from sympy.combinatorics.fp_groups import FpGroup, coset_enumeration_r
from sympy.combinatorics.free_groups import free_group
from sympy import Matrix

from .errors import BudgetError, ParseError, PreconditionError
from .groups import MarkedGroup, ball, parse_group
from .integrability import IntegrabilityFunction
from .rational import format_fraction

DEFAULT_COSET_BUDGET = 20_000
DEFAULT_LENGTH_BUDGET = 500_000


# ---------------------------------------------------------------------------
# coset machinery


@dataclass(frozen=True)
class SubgroupData:
    """Finite-index subgroup of a marked group, via its right-coset table."""

    group: MarkedGroup
    generator_words: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]  # row per coset; columns g1, g1^-1, g2, ...
    transversal: tuple  # BFS-minimal left-coset representatives, transversal[0] = e
    schreier_generators: tuple  # symmetric, deduplicated, identity-free

    @property
    def index(self) -> int:
        return len(self.table)

    def trace(self, start: int, g) -> int:
        """Apply g to a right coset index (right-multiplication action)."""
        c = start
        for letter in self.group.word_problem_letters(g):
            col = 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)
            c = self.table[c][col]
        return c

    def contains(self, g) -> bool:
        return self.trace(0, g) == 0

    def left_index(self, g) -> int:
        """Index of the left coset gL (an arbitrary but fixed numbering)."""
        return self.trace(0, self.group.inverse(g))

    def rep(self, g):
        """The transversal representative of gL."""
        return self.transversal[self.left_index(g)]


def _build_coset_table(group: MarkedGroup, words, max_cosets: int):
    names = ", ".join(group.letter(i) for i in range(group.num_generators))
    objs = free_group(names)
    fgroup, sym_gens = objs[0], list(objs[1:])

    def to_sympy(letters):
        w = fgroup.identity
        for letter in letters:
            gen = sym_gens[abs(letter) - 1]
            w = w * (gen if letter > 0 else gen**-1)
        return w

    relators = [to_sympy(rel) for rel in group.relators()]
    subgroup = [to_sympy(group.word_problem_letters(g)) for g in words]
    fp = FpGroup(fgroup, relators)
    try:
        table = coset_enumeration_r(fp, subgroup, max_cosets=max_cosets)
    except ValueError as exc:
        raise BudgetError(
            f"coset enumeration exceeded budget {max_cosets}: index may be infinite"
        ) from exc
    table.compress()
    table.standardize()
    return tuple(tuple(row) for row in table.table)


def subgroup_data(
    group: MarkedGroup,
    subgroup_gen_words: list[str],
    max_cosets: int = DEFAULT_COSET_BUDGET,
) -> SubgroupData:
    """Coset-enumerate the subgroup: transversal plus Schreier generators.

    An abelianization rank check rejects provably infinite-index inputs
    before enumeration is attempted.
    """
    gens = [group.parse_word(w) for w in subgroup_gen_words]
    rank = group.abelian_free_rank()
    if rank > 0:
        rows = [list(group.abelian_vector(g)) for g in gens]
        if not rows or Matrix(rows).rank() < rank:
            raise PreconditionError(
                "subgroup has infinite index: abelianized image has rank "
                f"{Matrix(rows).rank() if rows else 0} < {rank}"
            )
    table = _build_coset_table(group, gens, max_cosets)
    index = len(table)

    # temporary data object for tracing while we build the transversal
    probe = SubgroupData(
        group=group,
        generator_words=tuple(subgroup_gen_words),
        table=table,
        transversal=(),
        schreier_generators=(),
    )
    sym = [g for _, g in group.symmetric_generators()]
    reps: dict[int, object] = {probe.left_index(group.identity()): group.identity()}
    frontier = [group.identity()]
    while frontier and len(reps) < index:
        nxt = []
        for t in frontier:
            for s in sym:
                u = group.multiply(s, t)  # left cosets grow by left multiplication
                idx = probe.left_index(u)
                if idx not in reps:
                    reps[idx] = u
                    nxt.append(u)
        frontier = nxt
    if len(reps) != index:
        raise PreconditionError("coset table is not transitive; inconsistent input")
    transversal = tuple(reps[i] for i in range(index))
    if not group.is_identity(transversal[0]):
        raise PreconditionError("transversal must start at the identity coset")

    schreier = {}
    for t in transversal:
        for s in sym:
            st = group.multiply(s, t)
            lam = group.multiply(group.inverse(reps[probe.left_index(st)]), st)
            if not group.is_identity(lam):
                schreier.setdefault(lam, None)
    ordered = sorted(schreier, key=lambda g: (group.word_length(g), group.to_word(g)))
    return SubgroupData(
        group=group,
        generator_words=tuple(subgroup_gen_words),
        table=table,
        transversal=transversal,
        schreier_generators=tuple(ordered),
    )


# ---------------------------------------------------------------------------
# the coupling


@dataclass(frozen=True)
class Coupling:
    group: MarkedGroup
    sub: SubgroupData
    fibers: tuple  # elements f_i of the subgroup; plain coupling: (e,)
    x_gamma: tuple  # points (g, fiber_index); singleton by construction
    mu_scale: Fraction = Fraction(1)

    # --- basic structure ---------------------------------------------------

    @property
    def fiber_count(self) -> int:
        return len(self.fibers)

    @property
    def index(self) -> int:
        return self.sub.index

    def gamma_identity(self):
        return (self.group.identity(), 0)

    def gamma_multiply(self, p, q):
        return (self.group.multiply(p[0], q[0]), (p[1] + q[1]) % self.fiber_count)

    def gamma_inverse(self, p):
        return (self.group.inverse(p[0]), (-p[1]) % self.fiber_count)

    def gamma_length(self, p) -> int:
        """Word length over S_gamma plus the fiber group (all of K \\ {e})."""
        return self.group.word_length(p[0]) + (1 if p[1] % self.fiber_count else 0)

    def gamma_distance(self, p, q) -> int:
        return self.gamma_length(self.gamma_multiply(self.gamma_inverse(p), q))

    def gamma_volume(self, radius: int) -> int:
        """Ball sizes of the gamma side: Vol(r) + (m-1) Vol(r-1) for m fibers."""
        m = self.fiber_count
        if m == 1:
            return self.group.volume(radius)
        if radius == 0:
            return 1
        return self.group.volume(radius) + (m - 1) * self.group.volume(radius - 1)

    def gamma_ball(self, radius: int):
        base = ball(self.group, radius).elements
        out = [(g, 0) for g in base]
        if self.fiber_count > 1:
            inner = [g for g in base if self.group.word_length(g) <= radius - 1]
            for k in range(1, self.fiber_count):
                out.extend((g, k) for g in inner)
        return out

    # --- actions -------------------------------------------------------------

    def gamma_act(self, p, point):
        g, i = point
        return (self.group.multiply(p[0], g), (p[1] + i) % self.fiber_count)

    def lambda_act(self, lam, point):
        g, i = point
        return (self.group.multiply(g, self.group.inverse(lam)), i)

    # --- fundamental domains ---------------------------------------------------

    def x_lambda_points(self):
        out = []
        for i, f in enumerate(self.fibers):
            finv = self.group.inverse(f)
            for t in self.sub.transversal:
                out.append((self.group.multiply(t, finv), i))
        return out

    def x_lambda_rep(self, point):
        """Projection of a point's lambda orbit into X_lambda."""
        g, i = point
        t = self.sub.rep(g)
        return (self.group.multiply(t, self.group.inverse(self.fibers[i])), i)

    def in_x_lambda(self, point) -> bool:
        return point == self.x_lambda_rep(point)

    def in_x_gamma(self, point) -> bool:
        return point in self.x_gamma

    def x_gamma_in_x_lambda(self) -> bool:
        return all(self.in_x_lambda(p) for p in self.x_gamma)

    def mu_x_gamma(self) -> Fraction:
        return self.mu_scale * len(self.x_gamma)

    def mu_x_lambda(self) -> Fraction:
        return self.mu_scale * self.index * self.fiber_count

    def normalized(self) -> "Coupling":
        """Rescale the measure so mu(X_gamma) = 1 (exact rational reweighting)."""
        return replace(self, mu_scale=Fraction(1, len(self.x_gamma)))

    # --- cocycles ---------------------------------------------------------------

    def alpha(self, p, point):
        """The unique subgroup element returning p * point to X_lambda."""
        if not isinstance(p, tuple) or len(p) != 2 or not isinstance(p[1], int):
            p = (p, 0)
        if not self.in_x_lambda(point):
            raise PreconditionError("alpha requires a point of X_lambda")
        g, i = point
        target = self.group.multiply(p[0], g)
        j = (p[1] + i) % self.fiber_count
        t = self.sub.rep(target)
        return self.group.multiply(
            self.fibers[j], self.group.multiply(self.group.inverse(t), target)
        )

    def induced_gamma(self, p, point):
        """gamma . x: the shadow of the gamma action on X_lambda."""
        if not isinstance(p, tuple) or len(p) != 2 or not isinstance(p[1], int):
            p = (p, 0)
        if not self.in_x_lambda(point):
            raise PreconditionError("induced action requires a point of X_lambda")
        g, i = point
        target = self.group.multiply(p[0], g)
        j = (p[1] + i) % self.fiber_count
        return (
            self.group.multiply(self.sub.rep(target), self.group.inverse(self.fibers[j])),
            j,
        )

    def beta(self, lam, point):
        """The unique gamma-side element returning lambda * point to X_gamma."""
        if not self.sub.contains(lam):
            raise PreconditionError("beta requires a subgroup element")
        if not self.in_x_gamma(point):
            raise PreconditionError("beta requires a point of X_gamma")
        g, i = point
        base, i0 = self.x_gamma[0]
        moved = self.group.multiply(g, self.group.inverse(lam))
        gamma = self.group.multiply(base, self.group.inverse(moved))
        k = (i0 - i) % self.fiber_count
        return (gamma, k)

    def induced_lambda(self, lam, point):
        if not self.in_x_gamma(point):
            raise PreconditionError("induced action requires a point of X_gamma")
        return self.x_gamma[0]  # X_gamma is a singleton

    def b_map(self, lam, point):
        """b_x(lambda) = beta(lambda^-1, x)^-1."""
        return self.gamma_inverse(self.beta(self.group.inverse(lam), point))

    # --- subgroup metric -----------------------------------------------------------

    def lambda_lengths(
        self, targets, max_elements: int = DEFAULT_LENGTH_BUDGET
    ) -> dict:
        """Word lengths over the Schreier generators, by BFS until resolved."""
        pending = set(targets)
        for t in pending:
            if not self.sub.contains(t):
                raise PreconditionError(
                    f"length target {self.group.describe(t)} is not in the subgroup"
                )
        out = {}
        seen = {self.group.identity()}
        frontier = [self.group.identity()]
        if self.group.identity() in pending:
            out[self.group.identity()] = 0
            pending.discard(self.group.identity())
        depth = 0
        while pending:
            depth += 1
            nxt = set()
            for g in frontier:
                for s in self.sub.schreier_generators:
                    h = self.group.multiply(g, s)
                    if h not in seen:
                        seen.add(h)
                        nxt.add(h)
            if not nxt:
                raise PreconditionError(
                    "targets unreachable over Schreier generators (not in subgroup?)"
                )
            if len(seen) > max_elements:
                raise BudgetError(
                    f"subgroup length BFS exceeded {max_elements} elements at radius {depth}"
                )
            for h in nxt:
                if h in pending:
                    out[h] = depth
                    pending.discard(h)
            frontier = sorted(nxt, key=self.group.to_word)
        return out

    def lambda_ball(self, radius: int, max_elements: int = DEFAULT_LENGTH_BUDGET):
        """All subgroup elements of Schreier-length <= radius, with lengths."""
        lengths = {self.group.identity(): 0}
        frontier = [self.group.identity()]
        for depth in range(1, radius + 1):
            nxt = set()
            for g in frontier:
                for s in self.sub.schreier_generators:
                    h = self.group.multiply(g, s)
                    if h not in lengths and h not in nxt:
                        nxt.add(h)
            if len(lengths) + len(nxt) > max_elements:
                raise BudgetError(
                    f"subgroup ball exceeded {max_elements} elements at radius {depth}"
                )
            for h in nxt:
                lengths[h] = depth
            frontier = sorted(nxt, key=self.group.to_word)
        return lengths

    # --- serialization ----------------------------------------------------------

    def summary_dict(self) -> dict:
        g = self.group
        return {
            "group": g.name,
            "subgroup_generators": list(self.sub.generator_words),
            "index": self.index,
            "transversal": [g.describe(t) for t in self.sub.transversal],
            "schreier_generators": [g.describe(s) for s in self.sub.schreier_generators],
            "fibers": [g.describe(f) for f in self.fibers],
            "x_gamma": [[g.describe(p[0]), p[1]] for p in self.x_gamma],
            "mu_scale": format_fraction(self.mu_scale),
            "mu_x_gamma": format_fraction(self.mu_x_gamma()),
            "mu_x_lambda": format_fraction(self.mu_x_lambda()),
            "x_gamma_in_x_lambda": self.x_gamma_in_x_lambda(),
        }


def subgroup_coupling(
    group: MarkedGroup,
    subgroup_gen_words: list[str],
    x_gamma_word: str = "e",
    max_cosets: int = DEFAULT_COSET_BUDGET,
) -> Coupling:
    """The coupling of a group with a finite-index subgroup.

    The group acts on itself by left translations, the subgroup by right
    translations; fundamental domains are {x_gamma} and a BFS-minimal
    Schreier transversal.
    """
    sub = subgroup_data(group, subgroup_gen_words, max_cosets=max_cosets)
    g0 = group.parse_word(x_gamma_word)
    return Coupling(
        group=group,
        sub=sub,
        fibers=(group.identity(),),
        x_gamma=((g0, 0),),
    )


def coupling_from_spec(spec: dict | str, max_cosets: int = DEFAULT_COSET_BUDGET) -> Coupling:
    """Build from the JSON spec {"group", "subgroup_generators", "x_gamma"}."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    if "group" not in spec or "subgroup_generators" not in spec:
        raise ParseError("coupling spec needs 'group' and 'subgroup_generators'")
    group = parse_group(spec["group"])
    return subgroup_coupling(
        group,
        list(spec["subgroup_generators"]),
        x_gamma_word=spec.get("x_gamma", "e"),
        max_cosets=max_cosets,
    )


def cocycle(c: Coupling, side: str, g, x):
    """Exact cocycle value: alpha(gamma, x) or beta(lambda, x) by coset lookup."""
    if side == "alpha":
        return c.alpha(g, x)
    if side == "beta":
        return c.beta(g, x)
    raise PreconditionError(f"side must be 'alpha' or 'beta', got {side!r}")


# ---------------------------------------------------------------------------
# exhaustive identity checks


@dataclass(frozen=True)
class CheckReport:
    name: str
    cases: int
    violations: tuple
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "check": self.name,
            "cases": self.cases,
            "violations": len(self.violations),
            "passed": self.passed,
            **self.details,
        }


def check_cocycle_identity(c: Coupling, radius: int) -> CheckReport:
    """alpha(g'g, x) == alpha(g', g.x) alpha(g, x) for all |g|,|g'| <= radius."""
    if radius < 1:
        return CheckReport("cocycle_identity", 0, ())
    ballg = c.gamma_ball(radius)
    points = c.x_lambda_points()
    cases = 0
    bad = []
    for x in points:
        alpha_x = {p: c.alpha(p, x) for p in ballg}
        moved = {p: c.induced_gamma(p, x) for p in ballg}
        for p in ballg:
            ax = alpha_x[p]
            mx = moved[p]
            for q in ballg:
                cases += 1
                left = c.alpha(c.gamma_multiply(q, p), x)
                right = c.group.multiply(c.alpha(q, mx), ax)
                if left != right:
                    bad.append((q, p, x))
    return CheckReport("cocycle_identity", cases, tuple(bad), {"radius": radius})


def check_inverse_relation(c: Coupling, radius: int) -> CheckReport:
    """alpha(beta(lam, x), x) == lam for |lam|_{S_lambda} <= radius, x in X_gamma."""
    if not c.x_gamma_in_x_lambda():
        raise PreconditionError(
            "inverse relation requires X_gamma inside X_lambda; "
            "run strengthen_coboundedness first"
        )
    lengths = c.lambda_ball(radius)
    cases = 0
    bad = []
    for x in c.x_gamma:
        for lam in lengths:
            cases += 1
            if c.alpha(c.beta(lam, x), x) != lam:
                bad.append((lam, x))
    return CheckReport("inverse_relation", cases, tuple(bad), {"radius": radius})


def check_b_identity(c: Coupling, radius: int) -> CheckReport:
    """b_x(u)^-1 b_x(v) == beta(v^-1 u, u^-1 . x)^-1 over the lambda ball."""
    lengths = c.lambda_ball(radius)
    elems = sorted(lengths, key=c.group.to_word)
    cases = 0
    bad = []
    inv = c.group.inverse
    for x in c.x_gamma:
        b_of = {u: c.b_map(u, x) for u in elems}
        for u in elems:
            bu_inv = c.gamma_inverse(b_of[u])
            ux = c.induced_lambda(inv(u), x)
            for v in elems:
                cases += 1
                left = c.gamma_multiply(bu_inv, b_of[v])
                right = c.gamma_inverse(c.beta(c.group.multiply(inv(v), u), ux))
                if left != right:
                    bad.append((u, v, x))
    return CheckReport("b_identity", cases, tuple(bad), {"radius": radius})


def check_actions_commute(c: Coupling, radius: int, samples: int, seed: int) -> CheckReport:
    """(gamma * w) lambda^-1 == gamma * (w lambda^-1) on sampled triples."""
    import random

    rng = random.Random(seed)
    ballg = c.gamma_ball(radius)
    lams = sorted(c.lambda_ball(radius), key=c.group.to_word)
    points = [(p[0], i) for p in ballg for i in range(c.fiber_count)]
    cases = 0
    bad = []
    for _ in range(samples):
        p = rng.choice(ballg)
        lam = rng.choice(lams)
        w = rng.choice(points)
        cases += 1
        one = c.lambda_act(lam, c.gamma_act(p, w))
        two = c.gamma_act(p, c.lambda_act(lam, w))
        if one != two:
            bad.append((p, lam, w))
    return CheckReport("actions_commute", cases, tuple(bad), {"radius": radius})


def check_fundamental_domains(c: Coupling, radius: int) -> CheckReport:
    """Ball-truncated fundamental-domain axioms for both actions.

    Injectivity: (group element, domain point) pairs hit distinct points.
    Coverage: every point with small enough base coordinate is hit, where
    "small enough" subtracts the largest word length appearing in the domain
    and translate data.  Transversal uniqueness is re-verified by direct
    membership tests rather than through the coset index.
    """
    g = c.group
    bad = []
    cases = 0

    base_ball = ball(g, radius).elements
    # transversal: each sampled element lies in exactly one t L
    for w in base_ball:
        cases += 1
        hits = [
            t for t in c.sub.transversal if c.sub.contains(g.multiply(g.inverse(t), w))
        ]
        if len(hits) != 1:
            bad.append(("transversal", w, len(hits)))

    # gamma side: injectivity and coverage (fiber moves cost one letter)
    c_gamma = max(g.word_length(p[0]) for p in c.x_gamma)
    if c.fiber_count > 1:
        c_gamma += 1
    seen = {}
    for p in c.gamma_ball(radius):
        for x in c.x_gamma:
            cases += 1
            pt = c.gamma_act(p, x)
            if pt in seen:
                bad.append(("gamma_injective", p, x))
            seen[pt] = (p, x)
    for w in base_ball:
        if g.word_length(w) > radius - c_gamma:
            continue
        for i in range(c.fiber_count):
            cases += 1
            if (w, i) not in seen:
                bad.append(("gamma_cover", w, i))

    # lambda side: round-trip projection and injectivity over a lambda ball
    lam_lengths = c.lambda_ball(radius)
    seen_l = {}
    for lam in lam_lengths:
        for x in c.x_lambda_points():
            cases += 1
            pt = c.lambda_act(lam, x)
            if pt in seen_l:
                bad.append(("lambda_injective", lam, x))
            seen_l[pt] = (lam, x)
    c_lambda = max(
        g.word_length(p[0]) for p in c.x_lambda_points()
    )
    for w in base_ball:
        for i in range(c.fiber_count):
            cases += 1
            x = c.x_lambda_rep((w, i))
            lam = g.multiply(g.inverse(w), x[0])  # x lam^-1 == w
            pt = c.lambda_act(lam, x)
            if pt != (w, i) or not c.sub.contains(lam):
                bad.append(("lambda_cover", w, i))
    return CheckReport(
        "fundamental_domains",
        cases,
        tuple(bad),
        {"radius": radius, "c_gamma": c_gamma, "c_lambda": c_lambda},
    )


# ---------------------------------------------------------------------------
# projections between fundamental domains


def projection_and_similarity(
    c: Coupling, side: str, X1: list[str], X2: list[str], phi: IntegrabilityFunction
) -> dict:
    """Materialize pi_{X1,X2} and integrate phi of the displacement.

    X1, X2 are fundamental domains for the same action, given as words:
    transversals for the lambda side, singletons for the gamma side.  The
    report carries the finite correction set (so the two domains are
    L-infinity-equivalent exactly when it is finite, which is automatic
    here) and the exact similarity integral when phi allows it.
    """
    g = c.group
    if c.fiber_count != 1:
        raise PreconditionError("projections are defined for plain couplings")
    elems1 = [g.parse_word(w) for w in X1]
    elems2 = [g.parse_word(w) for w in X2]
    if side == "lambda":
        for name, elems in (("X1", elems1), ("X2", elems2)):
            idxs = {c.sub.left_index(e) for e in elems}
            if len(elems) != c.index or len(idxs) != c.index:
                raise PreconditionError(f"{name} is not a transversal")
        by_idx2 = {c.sub.left_index(e): e for e in elems2}
        pairs = []
        corrections = []
        for x in elems1:
            x2 = by_idx2[c.sub.left_index(x)]
            lam = g.multiply(g.inverse(x2), x)  # pi(x) = x lam^-1
            corrections.append(lam)
            pairs.append((x, x2))
        lengths = c.lambda_lengths(set(corrections))
        dists = [lengths[lam] for lam in corrections]
    elif side == "gamma":
        if len(elems1) != 1 or len(elems2) != 1:
            raise PreconditionError("gamma fundamental domains are singletons")
        pairs = [(elems1[0], elems2[0])]
        corrections = [g.multiply(elems2[0], g.inverse(elems1[0]))]
        dists = [g.word_length(corrections[0])]
    else:
        raise PreconditionError("side must be 'lambda' or 'gamma'")

    exact = phi.is_exact()
    if exact:
        integral = sum(
            (phi.eval_exact(Fraction(d)) * c.mu_scale for d in dists), Fraction(0)
        )
        integral_repr = format_fraction(integral)
    else:
        lo = sum((phi.eval_bounds(Fraction(d))[0] for d in dists), Fraction(0))
        hi = sum((phi.eval_bounds(Fraction(d))[1] for d in dists), Fraction(0))
        integral_repr = [format_fraction(lo * c.mu_scale), format_fraction(hi * c.mu_scale)]
    correction_words = sorted({g.describe(lam) for lam in corrections})
    return {
        "side": side,
        "projection": [[g.describe(a), g.describe(b)] for a, b in pairs],
        "correction_set": correction_words,
        "linf_equivalent": True,  # correction set is finite by construction
        "displacements": dists,
        "phi": phi.describe(),
        "integral": integral_repr,
        "exact": exact,
    }


# ---------------------------------------------------------------------------
# integrability functionals


@dataclass(frozen=True)
class IntegrabilityReport:
    phi: str
    psi: str
    k_constant: Fraction | tuple[Fraction, Fraction]
    l_constant: Fraction | tuple[Fraction, Fraction]
    beta_sup: int
    alpha_max_length: int
    exact: bool

    def to_json_dict(self) -> dict:
        def enc(v):
            if isinstance(v, tuple):
                return [format_fraction(v[0]), format_fraction(v[1])]
            return format_fraction(v)

        return {
            "phi": self.phi,
            "psi": self.psi,
            "K": enc(self.k_constant),
            "L": enc(self.l_constant),
            "beta_ess_sup": self.beta_sup,
            "alpha_max_length": self.alpha_max_length,
            "exact": self.exact,
        }


def integrability_report(
    c: Coupling, phi: IntegrabilityFunction, psi: IntegrabilityFunction
) -> IntegrabilityReport:
    """K = max_s integral of phi(|alpha(s,.)|) over X_lambda, and
    L = max_t integral of psi(|beta(t,.)|) over X_gamma, as exact finite sums.

    Also reports the essential sup of |beta(t,.)| (the L-infinity constant;
    finite here because the domain is finite).
    """
    g = c.group
    gamma_gens = [((e, 0)) for _, e in g.symmetric_generators()]
    for k in range(1, c.fiber_count):
        gamma_gens.append((g.identity(), k))
    points = c.x_lambda_points()
    alpha_values = {}
    targets = set()
    for s in gamma_gens:
        vals = [c.alpha(s, x) for x in points]
        alpha_values[s] = vals
        targets.update(vals)
    lengths = c.lambda_lengths(targets)
    alpha_max = max((lengths[v] for vals in alpha_values.values() for v in vals), default=0)

    lambda_gens = list(c.sub.schreier_generators)
    beta_lengths = {}
    for t in lambda_gens:
        beta_lengths[t] = [c.gamma_length(c.beta(t, x)) for x in c.x_gamma]
    beta_sup = max((d for ds in beta_lengths.values() for d in ds), default=0)

    exact = phi.is_exact() and psi.is_exact()

    def integral(fn, dist_lists, weight):
        best = None
        for dists in dist_lists:
            if fn.is_exact():
                val = sum((fn.eval_exact(Fraction(d)) * weight for d in dists), Fraction(0))
            else:
                val = (
                    sum((fn.eval_bounds(Fraction(d))[0] * weight for d in dists), Fraction(0)),
                    sum((fn.eval_bounds(Fraction(d))[1] * weight for d in dists), Fraction(0)),
                )
            key = val if not isinstance(val, tuple) else val[1]
            if best is None or key > (best if not isinstance(best, tuple) else best[1]):
                best = val
        return best if best is not None else Fraction(0)

    K = integral(phi, [[lengths[v] for v in alpha_values[s]] for s in gamma_gens], c.mu_scale)
    L = integral(psi, [beta_lengths[t] for t in lambda_gens], c.mu_scale)
    return IntegrabilityReport(
        phi=phi.describe(),
        psi=psi.describe(),
        k_constant=K,
        l_constant=L,
        beta_sup=beta_sup,
        alpha_max_length=alpha_max,
        exact=exact,
    )


# ---------------------------------------------------------------------------
# coboundedness


def coboundedness_witness(c: Coupling):
    """The minimal finite F in the subgroup with X_gamma inside F * X_lambda.

    Each gamma-domain point determines a unique translate, so the minimal
    witness is exactly the set of those translates (sorted by word length,
    then lexicographically).
    """
    g = c.group
    out = {}
    for point in c.x_gamma:
        x, i = point
        f = g.multiply(
            g.inverse(x), g.multiply(c.sub.rep(x), g.inverse(c.fibers[i]))
        )
        out.setdefault(f, None)
    return sorted(out, key=lambda e: (g.word_length(e), g.to_word(e)))


def required_translate(c: Coupling, point):
    """The unique f with point in f * X_lambda."""
    g = c.group
    x, i = point
    return g.multiply(g.inverse(x), g.multiply(c.sub.rep(x), g.inverse(c.fibers[i])))


def strengthen_coboundedness(c: Coupling, F) -> Coupling:
    """Product coupling on Omega x F making the gamma domain sit inside the
    lambda domain.

    The new gamma side is Gamma x K with K cyclic of order |F| permuting the
    (fixed) enumeration of F; generating set S_gamma plus the nontrivial
    elements of K, so points differing only in fiber are at distance <= 1.
    Postconditions (both domains are genuine fundamental domains, the
    inclusion, the step bound, and the growth comparison) are re-checked by
    validate_strengthened via the standard check functions.
    """
    g = c.group
    F = list(F)
    if not F:
        raise PreconditionError("witness set F must be nonempty")
    for f in F:
        if not c.sub.contains(f):
            raise PreconditionError("witness elements must lie in the subgroup")
    positions = {f: idx for idx, f in enumerate(F)}
    if len(positions) != len(F):
        raise PreconditionError("witness set F has repeated elements")

    m_old = c.fiber_count
    new_fibers = []
    for f in F:
        for fi in c.fibers:
            new_fibers.append(g.multiply(f, fi))

    new_x_gamma = []
    for point in c.x_gamma:
        f_hat = required_translate(c, point)
        if f_hat not in positions:
            raise PreconditionError(
                f"F is not a coboundedness witness: point needs translate "
                f"{g.describe(f_hat)}"
            )
        x, i = point
        new_x_gamma.append((x, positions[f_hat] * m_old + i))
    out = Coupling(
        group=g,
        sub=c.sub,
        fibers=tuple(new_fibers),
        x_gamma=tuple(new_x_gamma),
        mu_scale=c.mu_scale,
    )
    if not out.x_gamma_in_x_lambda():
        raise PreconditionError("strengthening failed to achieve the inclusion")
    return out


def check_step_bound(c: Coupling) -> CheckReport:
    """d((x,f), (x,f')) <= 1 for gamma-domain base points across fibers."""
    cases = 0
    bad = []
    for x, _ in c.x_gamma:
        for i in range(c.fiber_count):
            for j in range(c.fiber_count):
                cases += 1
                dist = c.gamma_distance((x, i), (x, j))
                if dist > 1:
                    bad.append((x, i, j, dist))
    return CheckReport("step_bound", cases, tuple(bad))


def check_growth_comparison(c: Coupling, radius: int) -> CheckReport:
    """Vol_{S_gamma-tilde}(r) <= |K| * Vol_{S_gamma}(r), with the left side
    enumerated by BFS on the product group."""
    from .groups import Cyclic, DirectProduct, bfs_growth_table

    g = c.group
    m = c.fiber_count
    bad = []
    cases = 0
    if m == 1:
        for r in range(radius + 1):
            cases += 1
        return CheckReport("growth_comparison", cases, (), {"radius": radius})
    prod = DirectProduct([g, Cyclic(m)])
    gens = []
    for i in range(g.num_generators):
        base = g.generator(i)
        gens.append((base, 0))
        gens.append((g.inverse(base), 0))
    for k in range(1, m):
        gens.append((g.identity(), k))
    table = bfs_growth_table(prod, radius, gens=gens)
    for r in range(radius + 1):
        cases += 1
        lhs = table.values[r]
        rhs = m * g.volume(r)
        if lhs > rhs:
            bad.append((r, lhs, rhs))
        expected = c.gamma_volume(r)
        if lhs != expected:
            bad.append((r, lhs, "formula", expected))
    return CheckReport("growth_comparison", cases, tuple(bad), {"radius": radius})


def validate_strengthened(c: Coupling, radius: int = 3, growth_radius: int = 6) -> dict:
    """All postcondition checks of the product construction, as one report."""
    reports = [
        check_fundamental_domains(c, radius),
        check_step_bound(c),
        check_growth_comparison(c, growth_radius),
    ]
    inclusion = c.x_gamma_in_x_lambda()
    return {
        "x_gamma_in_x_lambda": inclusion,
        "checks": [r.to_json_dict() for r in reports],
        "passed": inclusion and all(r.passed for r in reports),
    }


# ---------------------------------------------------------------------------
# the measure bound


@dataclass(frozen=True)
class ClaimBoundReport:
    u: str
    v: str
    R: int
    d_lambda: int
    measured: Fraction
    bound: Fraction | tuple[Fraction, Fraction]
    k_constant: Fraction | tuple[Fraction, Fraction]
    identity_cases: int
    identity_violations: int
    degenerate: bool
    passed: bool

    def to_json_dict(self) -> dict:
        def enc(v):
            if isinstance(v, tuple):
                return [format_fraction(v[0]), format_fraction(v[1])]
            return format_fraction(v)

        return {
            "u": self.u,
            "v": self.v,
            "R": self.R,
            "d_lambda": self.d_lambda,
            "measured": format_fraction(self.measured),
            "bound": enc(self.bound),
            "K": enc(self.k_constant),
            "identity_cases": self.identity_cases,
            "identity_violations": self.identity_violations,
            "degenerate": self.degenerate,
            "passed": self.passed,
        }


def _k_constant(c: Coupling, phi: IntegrabilityFunction):
    rep = integrability_report(c, phi, phi)
    return rep.k_constant


def claim_bound_check(
    c: Coupling,
    u,
    v,
    R: int,
    phi: IntegrabilityFunction,
    k_constant=None,
    d_lambda: int | None = None,
) -> ClaimBoundReport:
    """mu({x : d(b_x(u), b_x(v)) <= R}) <= K R Vol(R) / phi(d_lambda(u,v)/R).

    Exact on both sides for exactly evaluable phi; u == v is degenerate
    (phi(0) may vanish) and is reported as skipped rather than asserted.
    The displacement identity b_x(u)^-1 b_x(v) == beta(v^-1 u, u^-1 . x)^-1
    is re-verified on every gamma-domain point along the way.
    """
    g = c.group
    if not c.x_gamma_in_x_lambda():
        raise PreconditionError(
            "the measure bound requires X_gamma inside X_lambda; "
            "run strengthen_coboundedness first"
        )
    if R < 1:
        raise PreconditionError("R must be a positive integer")
    for w in (u, v):
        if not c.sub.contains(w):
            raise PreconditionError("u and v must be subgroup elements")
    # measure normalized so mu(X_gamma) = 1: exact rational reweighting
    weight = Fraction(1, len(c.x_gamma))

    w = g.multiply(g.inverse(u), v)
    degenerate = g.is_identity(w)

    identity_cases = 0
    identity_bad = 0
    measured = Fraction(0)
    winv = g.multiply(g.inverse(v), u)
    for x in c.x_gamma:
        bu = c.b_map(u, x)
        bv = c.b_map(v, x)
        diff = c.gamma_multiply(c.gamma_inverse(bu), bv)
        identity_cases += 1
        ux = c.induced_lambda(g.inverse(u), x)
        rhs = c.gamma_inverse(c.beta(winv, ux))
        if diff != rhs:
            identity_bad += 1
        if c.gamma_length(diff) <= R:
            measured += weight

    if degenerate:
        return ClaimBoundReport(
            u=g.describe(u), v=g.describe(v), R=R, d_lambda=0,
            measured=measured, bound=Fraction(0), k_constant=Fraction(0),
            identity_cases=identity_cases, identity_violations=identity_bad,
            degenerate=True, passed=identity_bad == 0,
        )

    if d_lambda is None:
        d_lambda = c.lambda_lengths({w})[w]
    if k_constant is None:
        k_constant = _k_constant(c, phi)
    vol = c.gamma_volume(R)
    arg = Fraction(d_lambda, R)
    if phi.is_exact():
        denom = phi.eval_exact(arg)
        if denom == 0:
            raise PreconditionError("phi vanishes at d/R; bound undefined")
        bound = k_constant * R * vol / denom
        passed = measured <= bound and identity_bad == 0
    else:
        lo, hi = phi.eval_bounds(arg)
        if lo <= 0:
            raise PreconditionError("phi lower bound vanishes at d/R")
        k_lo, k_hi = (k_constant, k_constant) if not isinstance(k_constant, tuple) else k_constant
        bound = (k_lo * R * vol / hi, k_hi * R * vol / lo)
        passed = measured <= bound[0] and identity_bad == 0
    return ClaimBoundReport(
        u=g.describe(u), v=g.describe(v), R=R, d_lambda=d_lambda,
        measured=measured, bound=bound, k_constant=k_constant,
        identity_cases=identity_cases, identity_violations=identity_bad,
        degenerate=False, passed=passed,
    )


def claim_bound_sweep(
    c: Coupling, lambda_radius: int, R_values, phis
) -> dict:
    """Check the measure bound for every pair u != v in the lambda ball.

    The two sides depend on the pair only through w = u^-1 v (the metric is
    left-invariant), so each distinct w is evaluated once and multiplicities
    are accumulated; pairs whose measured side is zero satisfy the bound
    trivially and are counted without evaluating phi.
    """
    g = c.group
    if len(c.x_gamma) != 1:
        raise PreconditionError("sweep assumes a singleton gamma domain")
    lengths = c.lambda_ball(lambda_radius)
    elems = sorted(lengths, key=g.to_word)
    max_R = max(R_values)

    # group pairs by w = u^-1 v
    w_multiplicity: dict = {}
    for u in elems:
        uinv = g.inverse(u)
        for v in elems:
            if u == v:
                continue
            w = g.multiply(uinv, v)
            w_multiplicity[w] = w_multiplicity.get(w, 0) + 1

    # only w with gamma-side displacement <= max R can have measured > 0
    base, i0 = c.x_gamma[0]
    need_lambda_length = set()
    w_disp = {}
    for w in w_multiplicity:
        disp = c.gamma_length(
            (g.multiply(base, g.multiply(w, g.inverse(base))), 0)
        )
        w_disp[w] = disp
        if disp <= max_R:
            need_lambda_length.add(w)
    lam_len = c.lambda_lengths(need_lambda_length) if need_lambda_length else {}

    k_constants = {phi.describe(): _k_constant(c, phi) for phi in phis}
    failures = []
    checked_pairs = 0
    evaluated = 0
    for phi in phis:
        kc = k_constants[phi.describe()]
        for R in R_values:
            vol = c.gamma_volume(R)
            for w, mult in w_multiplicity.items():
                checked_pairs += mult
                if w_disp[w] > R:
                    continue  # measured side is 0 <= bound
                evaluated += 1
                d_lam = lam_len[w]
                arg = Fraction(d_lam, R)
                denom = phi.eval_exact(arg) if phi.is_exact() else phi.eval_bounds(arg)[1]
                if denom == 0:
                    failures.append((g.describe(w), R, phi.describe(), "phi=0"))
                    continue
                bound = kc * R * vol / denom if not isinstance(kc, tuple) else kc[0] * R * vol / denom
                if Fraction(1) > bound:
                    failures.append((g.describe(w), R, phi.describe(), str(bound)))
    return {
        "lambda_radius": lambda_radius,
        "R_values": list(R_values),
        "phis": [phi.describe() for phi in phis],
        "ball_size": len(elems),
        "pair_checks": checked_pairs,
        "nontrivial_evaluations": evaluated,
        "K": {k: format_fraction(v) if not isinstance(v, tuple) else
              [format_fraction(v[0]), format_fraction(v[1])] for k, v in k_constants.items()},
        "failures": failures,
        "passed": not failures,
    }
