"""Plan synthesis: build a coupling for (n, k, loop mode) when the shipped
methods reach it, and report achievability.

A Plan is an expression tree over base constructions (hypercube family,
cluster composite, single walker, held triangle) and combinators
(product, sum, lift, wave strip), annotated bottom-up with n, k, loop
mode, and capability flags.  ``evaluate`` turns a Plan into a coupling
process and checks that the built flags match the annotations.

Looped targets go through three routes: a direct base when n is 2^(d+1)
or 2^(d+1)+1, then a binary-piece decomposition (write n in binary and
realize each low set bit i as a piece of size 2^(d+2)+2^i, a product of
two bases, leaving a remainder divisible by 2^(d+1) covered by copies of
the 2^(d+1) base; everything is glued by cluster sums), then a dynamic
programming closure of base and product sizes under addition.  Unlooped
targets try the direct base, the two-walker composite, sums of the
17- and 33-vertex bases for up to 8 walkers, a sum closure over odd
bases 2^c+1, and finally wave-stripping a waves-flagged looped plan.

Failure raises InfeasibleWithMethod, which is an exhaustion report for
these methods, never a nonexistence claim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, log2

from .composite import build_composite, build_composite_min_entropy
from .errors import InfeasibleWithMethod
from .graphs import complete, complete_looped
from .hypercube import (LOOPED_PLUS1, LOOPED_POW2, UNLOOPED_PLUS1,
                        HypercubeParams, build_hypercube, wave_strip)
from .k3 import build_k3_markovian, build_k3_nonmarkovian
from .bernoulli import lift
from .combinators import product, sum_couplings
from .process import build_single_walker


@dataclass(frozen=True)
class Plan:
    kind: str
    params: tuple  # sorted (key, value) pairs, JSON-safe values
    children: tuple
    n: int
    k: int
    looped: bool
    markovian: bool
    waves: bool
    min_entropy: bool
    provenance: str = ""

    @property
    def param_dict(self):
        return dict(self.params)

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "children": [c.to_dict() for c in self.children],
            "n": self.n, "k": self.k, "looped": self.looped,
            "markovian": self.markovian, "waves": self.waves,
            "min_entropy": self.min_entropy,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            params=_freeze_params(d.get("params", {})),
            children=tuple(cls.from_dict(c) for c in d.get("children", [])),
            n=d["n"], k=d["k"], looped=d["looped"],
            markovian=d["markovian"], waves=d["waves"],
            min_entropy=d["min_entropy"],
            provenance=d.get("provenance", ""),
        )

    def to_json(self, **kw):
        return json.dumps({"format": "avoidance-plan", "version": 1,
                           "plan": self.to_dict()}, **kw)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("format") != "avoidance-plan":
            raise ValueError("not an avoidance plan file")
        return cls.from_dict(doc["plan"])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=2))
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()


def _freeze_params(params: dict) -> tuple:
    items = []
    for key in sorted(params):
        v = params[key]
        if isinstance(v, list):
            v = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        items.append((key, v))
    return tuple(items)


# -- leaf plans ----------------------------------------------------------------


def _choose_walkers(d: int, k: int):
    """k walker indices containing 0 and the top walker.

    Powers of two are preferred; once they are exhausted the smallest
    remaining indices fill in, which keeps every revealed sign decodable
    and hence keeps the construction Markovian.
    """
    omega = (1 << d) - 1
    if not 2 <= k <= 1 << d:
        raise ValueError(f"cannot keep {k} of {1 << d} walkers")
    ids = {0, omega}
    for i in range(d):
        if len(ids) >= k:
            break
        ids.add(1 << i)
    filler = 1
    while len(ids) < k:
        ids.add(filler)
        filler += 1
    return tuple(sorted(ids))


def _hypercube_markovian(d: int, walkers) -> bool:
    powers = {1 << i for i in range(d)}
    rest = set(walkers) - {0, (1 << d) - 1}
    return powers <= set(walkers) or rest <= powers


def _hypercube_plan(d: int, variant: str, k: int, provenance="") -> Plan:
    walkers = _choose_walkers(d, k)
    n = (1 << (d + 1)) + (0 if variant == LOOPED_POW2 else 1)
    full = k == 1 << d
    return Plan(
        kind="hypercube",
        params=_freeze_params({"d": d, "variant": variant,
                               "walkers": list(walkers)}),
        children=(), n=n, k=k, looped=variant != UNLOOPED_PLUS1,
        markovian=_hypercube_markovian(d, walkers),
        waves=variant == LOOPED_PLUS1, min_entropy=full,
        provenance=provenance,
    )


def _single_plan(n: int, looped: bool, provenance="") -> Plan:
    return Plan(kind="single", params=_freeze_params({"n": n,
                                                      "looped": looped}),
                children=(), n=n, k=1, looped=looped, markovian=True,
                waves=looped, min_entropy=True, provenance=provenance)


def _composite_plan(a: int, b: int, looped: bool, provenance="") -> Plan:
    return Plan(kind="composite",
                params=_freeze_params({"a": a, "b": b, "looped": looped}),
                children=(), n=a * b, k=2, looped=looped, markovian=True,
                waves=False, min_entropy=(a == 2 and not looped),
                provenance=provenance)


def _product_keep(r: int, s: int, k: int):
    mandatory = sorted({(i, 0) for i in range(r)} | {(0, j) for j in range(s)})
    if len(mandatory) > k:
        raise ValueError("keep smaller than the mandatory cross")
    extra = [(i, j) for i in range(r) for j in range(s)
             if (i, j) not in set(mandatory)]
    keep = sorted(mandatory + extra[:k - len(mandatory)])
    return keep


def _product_plan(left: Plan, right: Plan, k: int, provenance="") -> Plan:
    keep = _product_keep(left.k, right.k, k)
    return Plan(
        kind="product",
        params=_freeze_params({"keep": [list(p) for p in keep]}),
        children=(left, right), n=left.n * right.n, k=k, looped=True,
        markovian=left.markovian and right.markovian,
        waves=left.waves and right.waves,
        min_entropy=left.min_entropy and right.min_entropy,
        provenance=provenance,
    )


def _sum_plan(left: Plan, right: Plan, provenance="") -> Plan:
    assert left.k == right.k and left.looped == right.looped
    return Plan(
        kind="sum", params=(), children=(left, right),
        n=left.n + right.n, k=left.k, looped=left.looped,
        markovian=left.markovian and right.markovian,
        waves=left.waves and right.waves and left.looped,
        min_entropy=False, provenance=provenance,
    )


def _strip_plan(inner: Plan, provenance="") -> Plan:
    assert inner.waves and inner.looped
    return Plan(
        kind="wave_strip", params=(), children=(inner,),
        n=inner.n, k=inner.k, looped=False, markovian=inner.markovian,
        waves=False, min_entropy=inner.min_entropy,
        provenance=provenance,
    )


def _fold_sum(pieces, provenance="") -> Plan:
    """Balanced sum tree over the pieces (minimal depth, deterministic)."""
    pieces = sorted(pieces, key=lambda p: (-p.n, p.kind, p.provenance))
    while len(pieces) > 1:
        nxt = [_sum_plan(pieces[i], pieces[i + 1])
               for i in range(0, len(pieces) - 1, 2)]
        if len(pieces) % 2:
            nxt.append(pieces[-1])
        pieces = nxt
    out = pieces[0]
    if provenance:
        out = _with_provenance(out, provenance)
    return out


def _with_provenance(plan: Plan, provenance: str) -> Plan:
    return Plan(kind=plan.kind, params=plan.params, children=plan.children,
                n=plan.n, k=plan.k, looped=plan.looped,
                markovian=plan.markovian, waves=plan.waves,
                min_entropy=plan.min_entropy, provenance=provenance)


# -- evaluation ----------------------------------------------------------------


def evaluate(plan: Plan):
    """Build the coupling a plan describes; flags must match annotations."""
    proc = _build(plan)
    got = (proc.graph.n, proc.k, proc.graph.is_looped, proc.markovian,
           proc.waves, proc.min_entropy)
    want = (plan.n, plan.k, plan.looped, plan.markovian, plan.waves,
            plan.min_entropy)
    if got != want:
        raise AssertionError(
            f"built process disagrees with plan annotations: "
            f"{got} != {want} for {plan.kind}")
    return proc


def _build(plan: Plan):
    p = plan.param_dict
    kind = plan.kind
    if kind == "hypercube":
        return build_hypercube(HypercubeParams(
            d=p["d"], variant=p["variant"], walkers=tuple(p["walkers"])))
    if kind == "single":
        g = complete_looped(p["n"]) if p["looped"] else complete(p["n"])
        return build_single_walker(g)
    if kind == "composite":
        return build_composite(p["a"], p["b"], p["looped"])
    if kind == "composite_min_entropy":
        return build_composite_min_entropy(p["a"], p["b"])
    if kind == "k3_nonmarkovian":
        return build_k3_nonmarkovian(Fraction(p["s"]))
    if kind == "k3_markovian":
        return build_k3_markovian(Fraction(p["s"]))
    if kind == "product":
        left = _build(plan.children[0])
        right = _build(plan.children[1])
        keep = [tuple(pair) for pair in p["keep"]]
        return product(left, right, keep)
    if kind == "sum":
        return sum_couplings(_build(plan.children[0]),
                             _build(plan.children[1]))
    if kind == "lift":
        return lift(_build(plan.children[0]), v=p.get("v", 1))
    if kind == "wave_strip":
        return wave_strip(_build(plan.children[0]))
    raise ValueError(f"unknown plan kind {kind!r}")


# -- product side catalogue ------------------------------------------------------


@dataclass(frozen=True)
class _Side:
    size: int
    min_w: int
    max_w: int
    waves: bool
    kind: str  # "single" | "pow2" | "plus1"
    d: int = 0

    def make(self, walkers: int) -> Plan:
        if self.kind == "single":
            return _single_plan(self.size, looped=True)
        variant = LOOPED_POW2 if self.kind == "pow2" else LOOPED_PLUS1
        return _hypercube_plan(self.d, variant, walkers)


def _split_walkers(k, left: _Side, right: _Side):
    """Per-side walker counts with r+s-1 <= k <= r*s, or None."""
    for r in range(left.min_w, left.max_w + 1):
        s = max(right.min_w, ceil(k / r))
        if s <= right.max_w and r + s - 1 <= k <= r * s:
            return r, s
    return None


def _sides_upto(max_size: int, waves_only: bool):
    sides = [_Side(2, 1, 1, True, "single"), _Side(3, 1, 1, True, "single")]
    d = 1
    while (1 << (d + 1)) <= max_size:
        if not waves_only:
            sides.append(_Side(1 << (d + 1), 2, 1 << d, False, "pow2", d))
        if (1 << (d + 1)) + 1 <= max_size:
            sides.append(_Side((1 << (d + 1)) + 1, 2, 1 << d, True,
                               "plus1", d))
        d += 1
    return sides


# -- generators and the additive closure -----------------------------------------


@dataclass(frozen=True)
class _Generator:
    size: int
    est: int  # rough state-count estimate, for deterministic tie-breaks
    label: str
    make: object = field(compare=False)


def _looped_generators(k: int, limit: int, waves_only: bool):
    gens = {}

    def offer(size, est, label, make):
        if size > limit:
            return
        best = gens.get(size)
        if best is None or (est, label) < (best.est, best.label):
            gens[size] = _Generator(size, est, label, make)

    d = 1
    while (1 << (d + 1)) <= limit:
        n_pow2, n_plus1 = 1 << (d + 1), (1 << (d + 1)) + 1
        if k <= 1 << d:
            if not waves_only:
                offer(n_pow2, n_pow2 << d, f"base:pow2[{d}]",
                      lambda d=d: _hypercube_plan(d, LOOPED_POW2, k))
            offer(n_plus1, n_plus1 << d, f"base:plus1[{d}]",
                  lambda d=d: _hypercube_plan(d, LOOPED_PLUS1, k))
        d += 1
    if k == 2 and not waves_only:
        for n in range(4, limit + 1):
            a = _smallest_factor(n)
            if a < n:
                offer(n, n * n, f"base:composite[{a}x{n // a}]",
                      lambda a=a, n=n: _composite_plan(a, n // a, True))
    sides = _sides_upto(limit, waves_only)
    for left in sides:
        for right in sides:
            size = left.size * right.size
            if size > limit:
                continue
            if left.kind == "pow2" and right.kind == "pow2":
                continue  # a power-of-two base already covers this size
            if left.kind == "single" and right.kind == "single":
                continue
            if waves_only and not (left.waves and right.waves):
                continue
            split = _split_walkers(k, left, right)
            if split is None:
                continue
            r, s = split
            offer(size, left.size * right.size * (1 << (left.d + right.d)),
                  f"product:{left.size}x{right.size}",
                  lambda left=left, right=right, r=r, s=s:
                  _product_plan(left.make(r), right.make(s), k))
    return sorted(gens.values(), key=lambda g: (g.size, g.label))


def _unlooped_generators(k: int, limit: int):
    gens = []
    d = 1
    while (1 << (d + 1)) + 1 <= limit:
        n = (1 << (d + 1)) + 1
        if k <= 1 << d:
            gens.append(_Generator(n, n << d, f"base:odd[{d}]",
                                   lambda d=d: _hypercube_plan(
                                       d, UNLOOPED_PLUS1, k)))
        d += 1
    if k == 2:
        for n in range(4, limit + 1):
            a = _smallest_factor(n)
            if a < n:
                gens.append(_Generator(n, n * n, f"base:composite[{a}x{n//a}]",
                                       lambda a=a, n=n: _composite_plan(
                                           a, n // a, False)))
    return sorted(gens, key=lambda g: (g.size, g.label))


def _smallest_factor(n):
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


class AchievabilitySet:
    """Closure of generator sizes under addition, with provenance.

    Fewest-pieces decompositions are preferred (smallest sum-tree depth),
    then generators with smaller state estimates; both deterministic.
    """

    def __init__(self, generators, limit: int):
        self.generators = list(generators)
        self.limit = limit
        order = sorted(range(len(self.generators)),
                       key=lambda i: (self.generators[i].est,
                                      self.generators[i].size))
        inf = limit + 2
        count = [inf] * (limit + 1)
        choice = [-1] * (limit + 1)
        count[0] = 0
        for v in range(1, limit + 1):
            for gi in order:
                g = self.generators[gi]
                if g.size <= v and count[v - g.size] + 1 < count[v]:
                    count[v] = count[v - g.size] + 1
                    choice[v] = gi
        self._count = count
        self._choice = choice

    def achievable(self, n: int) -> bool:
        return 0 < n <= self.limit and self._choice[n] >= 0

    def pieces(self, n: int):
        if not self.achievable(n):
            return None
        out = []
        while n:
            g = self.generators[self._choice[n]]
            out.append(g)
            n -= g.size
        return out

    def provenance(self, n: int) -> str:
        pieces = self.pieces(n)
        return " + ".join(g.label for g in pieces) if pieces else ""


_DP_CACHE: dict = {}


def _closure(k: int, limit: int, looped: bool, waves_only: bool
             ) -> AchievabilitySet:
    key = (k, looped, waves_only)
    cached = _DP_CACHE.get(key)
    if cached is not None and cached.limit >= limit:
        return cached
    limit = max(limit, 1024)
    if looped:
        gens = _looped_generators(k, limit, waves_only)
    else:
        gens = _unlooped_generators(k, limit)
    out = AchievabilitySet(gens, limit)
    _DP_CACHE[key] = out
    return out


def _dp_plan(n: int, k: int, looped: bool, waves_only: bool):
    dp = _closure(k, n, looped, waves_only)
    pieces = dp.pieces(n)
    if pieces is None:
        return None
    plans = [g.make() for g in pieces]
    prov = f"additive closure: {dp.provenance(n)}"
    if len(plans) == 1:
        return _with_provenance(plans[0], prov)
    return _fold_sum(plans, prov)


# -- the binary-piece decomposition ----------------------------------------------


def _binary_decomposition(n: int, k: int):
    """Pieces 2^(d+2)+2^i for the low set bits of n plus a remainder of
    2^(d+1)-sized chunks, glued by sums; smallest workable d wins."""
    dmin = max(1, (k - 1).bit_length())
    for d in range(dmin, max(dmin + 1, n.bit_length())):
        piece_sizes = [(1 << (d + 2)) + (1 << i)
                       for i in range(d + 1) if n >> i & 1]
        total = sum(piece_sizes)
        r = n - total
        if r < 0:
            continue
        assert r % (1 << (d + 1)) == 0
        pieces = []
        ok = True
        for i in range(d + 1):
            if not n >> i & 1:
                continue
            if i == 0:
                if k > 1 << d:
                    ok = False
                    break
                pieces.append(_hypercube_plan(d + 1, LOOPED_PLUS1, k))
                continue
            if i == 1:
                left = _Side(2, 1, 1, True, "single")
            else:
                left = _Side(1 << i, 2, 1 << (i - 1), False, "pow2", i - 1)
            right_d = d - i + 1
            right = _Side((1 << (right_d + 1)) + 1, 2, 1 << right_d, True,
                          "plus1", right_d)
            split = _split_walkers(k, left, right)
            if split is None:
                ok = False
                break
            pieces.append(_product_plan(left.make(split[0]),
                                        right.make(split[1]), k))
        if not ok:
            continue
        chunk = 1 << (d + 1)
        if r and k > 1 << d:
            continue
        for _ in range(r // chunk):
            pieces.append(_hypercube_plan(d, LOOPED_POW2, k))
        if not pieces:
            continue
        prov = (f"binary pieces at d={d}: "
                + " + ".join(str(p.n) for p in pieces)
                + (f" (remainder {r})" if r else ""))
        if len(pieces) == 1:
            return _with_provenance(pieces[0], prov)
        return _fold_sum(pieces, prov)
    return None


# -- public planners -------------------------------------------------------------


def _validate_target(n, k):
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if k < 2:
        raise ValueError(f"planning starts at 2 walkers, got {k}")


def plan_looped(n: int, k: int) -> Plan:
    """A plan for >= k walkers on the looped n-vertex complete graph."""
    _validate_target(n, k)
    base = _direct_looped_base(n, k)
    if base is not None:
        return base
    plan = _binary_decomposition(n, k)
    if plan is not None:
        return plan
    plan = _dp_plan(n, k, looped=True, waves_only=False)
    if plan is not None:
        return plan
    raise InfeasibleWithMethod(
        f"no looped plan for n={n}, k={k} with the implemented methods "
        f"(this is not a nonexistence proof)")


def _direct_looped_base(n, k):
    for d in range(1, n.bit_length() + 1):
        if k > 1 << d:
            continue
        if n == 1 << (d + 1):
            return _hypercube_plan(d, LOOPED_POW2, k, provenance="direct base")
        if n == (1 << (d + 1)) + 1:
            return _hypercube_plan(d, LOOPED_PLUS1, k,
                                   provenance="direct base")
    return None


def plan_unlooped(n: int, k: int) -> Plan:
    """A plan for >= k walkers on the unlooped n-vertex complete graph."""
    _validate_target(n, k)
    for d in range(1, n.bit_length() + 1):
        if n == (1 << (d + 1)) + 1 and k <= 1 << d:
            return _hypercube_plan(d, UNLOOPED_PLUS1, k,
                                   provenance="direct base")
    if k == 2:
        a = _smallest_factor(n)
        if a < n:
            return _composite_plan(a, n // a, False,
                                   provenance="composite factorization")
    if k <= 8:
        plan = _seventeen_thirtythree(n, k)
        if plan is not None:
            return plan
    plan = _dp_plan(n, k, looped=False, waves_only=False)
    if plan is not None:
        return plan
    dp = _closure(k, n, looped=True, waves_only=True)
    if dp.achievable(n):
        inner = _dp_plan(n, k, looped=True, waves_only=True)
        return _strip_plan(inner,
                           provenance=f"wave-stripped: {inner.provenance}")
    raise InfeasibleWithMethod(
        f"no unlooped plan for n={n}, k={k} with the implemented methods "
        f"(this is not a nonexistence proof)")


def _seventeen_thirtythree(n, k):
    """n = 17a + 33b as a sum of the two odd bases, smallest a first."""
    for a in range(min(n // 17, 32) + 1):
        rest = n - 17 * a
        if rest >= 0 and rest % 33 == 0:
            b = rest // 33
            if a + b < 2:
                return None  # single bases are handled earlier
            pieces = [_hypercube_plan(3, UNLOOPED_PLUS1, k)] * a
            pieces += [_hypercube_plan(4, UNLOOPED_PLUS1, k)] * b
            return _fold_sum(pieces, f"17a+33b with a={a}, b={b}")
    return None


def plan_for(n: int, k: int, looped: bool) -> Plan:
    return plan_looped(n, k) if looped else plan_unlooped(n, k)


def hamming_bound(n: int) -> Fraction:
    """n over the Hamming weight of n: the ceiling on walker counts that
    sums and products of the power-of-two bases can reach."""
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(n, bin(n).count("1"))


def max_walkers(n: int, looped: bool):
    """Largest walker count the implemented methods achieve, with a plan.

    Falls back to (1, single-walker plan) when no multi-walker plan is
    found; never a nonexistence claim.
    """
    if n < 2:
        raise ValueError("need at least 2 vertices")
    for k in range(n // 2, 1, -1):
        try:
            return k, plan_for(n, k, looped)
        except InfeasibleWithMethod:
            continue
    return 1, _single_plan(n, looped, provenance="single walker fallback")


def guaranteed_walkers(n: int, looped: bool) -> int:
    """The proven lower-bound target: floor(n / (8 log2 n)) looped,
    floor(n / (56 log2 n)) unlooped."""
    denom = 8 if looped else 56
    return int(n / (denom * log2(n)))
