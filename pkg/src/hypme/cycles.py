"""Bi-Lipschitz embedded cycles and the hyperbolicity obstruction.

A cycle embedding is a map from the n-cycle into a host graph together with
its tight bi-Lipschitz constants (a, b), computed as exact rationals over
all vertex pairs.  In a delta-hyperbolic host the lower constant of a long
cycle is obstructed: a <= (4*delta*log2(b*n) + 4 + 2*b)/n for even n, and
asymptotically a < 6*delta*log(n)/n once n is large enough relative to b.
Finding a single verified embedding that beats the bound therefore
certifies non-hyperbolicity at that delta.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, PreconditionError
from .graphs import DistanceMatrix, Graph, direct_image_path
from .rational import format_fraction, ln_lower, ln_upper, log2_upper

DEFAULT_SEARCH_BUDGET = 10_000_000
EXHAUSTIVE_VERTEX_LIMIT = 40


@dataclass(frozen=True)
class CycleEmbedding:
    n: int
    images: tuple[int, ...]
    a: Fraction
    b: Fraction

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "images": list(self.images),
            "a": format_fraction(self.a),
            "b": format_fraction(self.b),
        }


def cycle_distance(n: int, i: int, j: int) -> int:
    k = abs(i - j)
    return min(k, n - k)


def verify_embedding(host_d: DistanceMatrix, images: list[int]) -> CycleEmbedding:
    """Tight constants: a = min over pairs of d_host/d_cycle, b = max.

    Repeated image vertices force a = 0 (the map cannot be injective).
    """
    n = len(images)
    if n < 3:
        raise PreconditionError("cycle length must be >= 3")
    d = host_d.d
    a_num, a_den = None, None  # running min of host/cycle as an int pair
    b_num, b_den = 0, 1
    for i in range(n):
        di = d[images[i]]
        for j in range(i + 1, n):
            dc = cycle_distance(n, i, j)
            dh = int(di[images[j]])
            if a_num is None or dh * a_den < a_num * dc:
                a_num, a_den = dh, dc
            if dh * b_den > b_num * dc:
                b_num, b_den = dh, dc
    return CycleEmbedding(
        n=n, images=tuple(images), a=Fraction(a_num, a_den), b=Fraction(b_num, b_den)
    )


def obstruction_bound(delta: Fraction, b: Fraction, n: int) -> Fraction:
    """(4*delta*log2(b*n) + 4 + 2*b) / n, rounded conservatively upward.

    log2 is exact when b*n is a power of two, otherwise upper-rounded at
    2**-32 so that "consistent" verdicts are never produced by rounding.
    """
    if b < 1:
        raise PreconditionError("upper bi-Lipschitz constant must be >= 1")
    if n < 2 or n % 2 != 0:
        raise PreconditionError("cycle length must be even and >= 2")
    if delta < 0:
        raise PreconditionError("delta must be >= 0")
    return (4 * delta * log2_upper(b * n) + 4 + 2 * b) / n


_N0_CACHE: dict[Fraction, int] = {}


def asymptotic_onset(b: Fraction) -> int:
    """Smallest even n >= 4 with 4*log2(b*n) + 4 + 2*b <= 6*ln(n).

    From that point on (and for any delta >= 1) the asymptotic form
    6*delta*log(n)/n dominates the even-cycle bound, so it is a valid
    relaxation.  Certified with directed rounding; values grow like
    exp(26) for b = 1, hence computed by doubling plus bisection.
    """
    if b < 1:
        raise PreconditionError("b must be >= 1")
    if b in _N0_CACHE:
        return _N0_CACHE[b]

    def holds(n: int) -> bool:
        lhs = 4 * log2_upper(b * n) + 4 + 2 * b
        return lhs <= 6 * ln_lower(Fraction(n))

    hi = 4
    while not holds(hi):
        hi *= 2
        if hi > 1 << 62:
            raise PreconditionError(f"no asymptotic onset below 2^62 for b={b}")
    lo = hi // 2
    while lo + 2 < hi:
        mid = 2 * ((lo + hi) // 4)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    _N0_CACHE[b] = hi
    return hi


@dataclass(frozen=True)
class ObstructionReport:
    delta: Fraction
    a: Fraction
    b: Fraction
    n: int
    n_even: int
    bound_prop: Fraction
    bound_cor: Fraction | None
    cor_applicable: bool
    verdict: str  # "consistent" | "violation"

    def to_json_dict(self) -> dict:
        return {
            "delta": format_fraction(self.delta),
            "a": format_fraction(self.a),
            "b": format_fraction(self.b),
            "n": self.n,
            "n_even": self.n_even,
            "bound_prop": format_fraction(self.bound_prop),
            "bound_cor": format_fraction(self.bound_cor) if self.bound_cor is not None else None,
            "cor_applicable": self.cor_applicable,
            "verdict": self.verdict,
        }


def check_obstruction(e: CycleEmbedding, delta: Fraction) -> ObstructionReport:
    """Compare the embedding's lower constant against the even-cycle bound.

    Odd-length embeddings are checked at 2*floor(n/2): restricting to an even
    sub-cycle changes constants by at most the adjacent-step distortion, which
    the report carries via (a, b).  The verdict is driven by the even-cycle
    bound alone; the asymptotic form is evaluated when delta >= 1 and n is
    past its onset, and reported for information.
    """
    n_even = 2 * (e.n // 2)
    b_eff = max(e.b, Fraction(1))
    bound = obstruction_bound(delta, b_eff, n_even)
    cor_ok = delta >= 1 and e.n >= asymptotic_onset(b_eff)
    bound_cor = 6 * delta * ln_upper(Fraction(e.n)) / e.n if cor_ok else None
    return ObstructionReport(
        delta=delta,
        a=e.a,
        b=e.b,
        n=e.n,
        n_even=n_even,
        bound_prop=bound,
        bound_cor=bound_cor,
        cor_applicable=cor_ok,
        verdict="violation" if e.a > bound else "consistent",
    )


def enumerate_simple_cycles(g: Graph, budget: int = DEFAULT_SEARCH_BUDGET):
    """Yield every simple cycle exactly once, as a canonical vertex list.

    Canonical form: starts at the cycle's smallest vertex, and the second
    vertex is smaller than the last.  Raises BudgetError after `budget`
    candidate extensions.
    """
    adj = g.adjacency()
    spent = 0
    for root in range(g.n):
        stack = [(root, [root], {root})]
        while stack:
            x, path, onpath = stack.pop()
            for y in adj[x]:
                spent += 1
                if spent > budget:
                    raise BudgetError(f"cycle enumeration exceeded budget {budget}")
                if y == root and len(path) >= 3 and path[1] < path[-1]:
                    yield list(path)
                elif y > root and y not in onpath:
                    stack.append((y, path + [y], onpath | {y}))


@dataclass(frozen=True)
class FatCycleResult:
    embedding: CycleEmbedding | None
    outcome: str  # "found" | "proven_absent" | "budget_exhausted" | "not_found"
    nodes_used: int

    def to_json_dict(self) -> dict:
        return {
            "embedding": self.embedding.to_json_dict() if self.embedding else None,
            "outcome": self.outcome,
            "nodes_used": self.nodes_used,
        }


def _closed_walk_images(dm: DistanceMatrix, corners: list[int]) -> list[int] | None:
    loop = list(corners) + [corners[0]]
    if any(dm[a, b] == 0 for a, b in zip(loop, loop[1:])):
        return None
    path = direct_image_path(dm, loop)
    return list(path.vertices[:-1])


def _greedy_tour(dm: DistanceMatrix, pts: list[int]) -> list[int]:
    rest = sorted(pts)
    tour = [rest.pop(0)]
    while rest:
        rest.sort(key=lambda x: (dm[tour[-1], x], x))
        tour.append(rest.pop(0))
    return tour


def _heuristic_candidates(g: Graph, dm: DistanceMatrix, seed: int, extra: int = 40):
    """Deterministic corner quadruples: eccentricity extremes, far pairs with
    spread midpoints, then seeded random quadruples."""
    n = g.n
    d = dm.d
    ecc = d.max(axis=1)
    corners = [int(v) for v in np.nonzero(ecc == ecc.max())[0]]
    if 3 <= len(corners) <= 12:
        yield _greedy_tour(dm, corners)
    order = np.argsort(d, axis=None)[::-1]
    seen_pairs = set()
    far_pairs = []
    for flat in order:
        u, v = int(flat) // n, int(flat) % n
        key = (min(u, v), max(u, v))
        if u == v or key in seen_pairs:
            continue
        seen_pairs.add(key)
        far_pairs.append(key)
        if len(far_pairs) >= 5:
            break
    for u, v in far_pairs:
        spread = np.minimum(d[u], d[v])
        w_order = sorted(range(n), key=lambda x: (-int(spread[x]), int(abs(d[u, x] - d[v, x])), x))
        for w in w_order[:3]:
            if w in (u, v):
                continue
            z_order = sorted(
                range(n), key=lambda x: (-int(d[w, x]), -int(spread[x]), x)
            )
            for z in z_order[:2]:
                if z in (u, v, w):
                    continue
                yield [u, w, v, z]
    rng = random.Random(seed)
    for _ in range(extra):
        if n >= 4:
            yield rng.sample(range(n), 4)


def _improve_locally(
    g: Graph, dm: DistanceMatrix, images: list[int], budget: int
) -> tuple[list[int], int]:
    """Vertex swaps that keep consecutive images adjacent and raise a."""
    adj = g.adjacency()
    spent = 0
    current = verify_embedding(dm, images)
    improved = True
    while improved and spent < budget:
        improved = False
        for i in range(len(images)):
            prev_v = images[(i - 1) % len(images)]
            next_v = images[(i + 1) % len(images)]
            for y in adj[images[i]]:
                spent += 1
                if spent >= budget:
                    return images, spent
                if dm[prev_v, y] != 1 or dm[next_v, y] != 1:
                    continue
                trial = images[:i] + [y] + images[i + 1 :]
                cand = verify_embedding(dm, trial)
                if cand.a > current.a:
                    images, current, improved = trial, cand, True
                    break
            if improved:
                break
    return images, spent


def find_fat_cycle(
    g: Graph,
    dm: DistanceMatrix,
    min_a: Fraction,
    min_n: int,
    mode: str = "auto",
    budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int = 0,
) -> FatCycleResult:
    """Search for a verified cycle embedding with n >= min_n and a >= min_a.

    Graph cycles are 1-Lipschitz, so found witnesses have b = 1.  Exhaustive
    enumeration (small hosts, or mode="exhaustive") can prove absence;
    the heuristic reports "not_found" when its candidates are spent and
    "budget_exhausted" when the node budget trips.
    """
    if min_n < 3:
        raise PreconditionError("min_n must be >= 3")
    if mode not in ("auto", "exhaustive", "heuristic"):
        raise PreconditionError(f"unknown search mode {mode!r}")
    if g.m == g.n - 1:  # a connected graph with n-1 edges is a tree
        if min_a > 0:
            return FatCycleResult(None, "proven_absent", 0)
        if g.m >= 1:
            u, v = min(g.edges)
            n = min_n + (min_n % 2)
            images = [u, v] * (n // 2)
            return FatCycleResult(verify_embedding(dm, images), "found", 0)
    exhaustive = mode == "exhaustive" or (mode == "auto" and g.n <= EXHAUSTIVE_VERTEX_LIMIT)
    spent = 0
    if exhaustive:
        try:
            for cyc in enumerate_simple_cycles(g, budget):
                spent += len(cyc)
                if len(cyc) < min_n:
                    continue
                emb = verify_embedding(dm, cyc)
                if emb.a >= min_a:
                    return FatCycleResult(emb, "found", spent)
            return FatCycleResult(None, "proven_absent", spent)
        except BudgetError:
            return FatCycleResult(None, "budget_exhausted", budget)
    best: CycleEmbedding | None = None
    for corners in _heuristic_candidates(g, dm, seed):
        if spent >= budget:
            return FatCycleResult(None, "budget_exhausted", spent)
        images = _closed_walk_images(dm, corners)
        spent += 1 if images is None else len(images)
        if images is None or len(images) < max(min_n, 3):
            continue
        emb = verify_embedding(dm, images)
        if emb.a >= min_a and emb.n >= min_n:
            return FatCycleResult(emb, "found", spent)
        if best is None or emb.a > best.a:
            best = emb
    if best is not None and best.a > 0 and spent < budget:
        images, extra = _improve_locally(g, dm, list(best.images), budget - spent)
        spent += extra
        emb = verify_embedding(dm, images)
        if emb.a >= min_a and emb.n >= min_n:
            return FatCycleResult(emb, "found", spent)
    outcome = "budget_exhausted" if spent >= budget else "not_found"
    return FatCycleResult(None, outcome, spent)
