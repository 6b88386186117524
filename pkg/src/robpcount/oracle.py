"""Ground truth at desk scale.

* exhaustive_verify -- evaluate every input (vectorized, chunked).
* random_robp -- seeded program generator for property tests.
* frontier -- exact minimal binary-counting error at width w, by layered
  search over interval systems (sound and complete for the two-symbol
  case: programs induce systems, and systems convert back to programs).
* frontier_brute_force -- the same quantity by exhaustive enumeration of
  program behaviors; the independent cross-check for the frontier.
* system_to_robp -- the converse construction, one vertex per interval.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .labeling import minimal_error
from .robp import Alphabet, Robp

DEFAULT_MAX_INPUTS = 2**24
DEFAULT_FRONTIER_N = 12
DEFAULT_FRONTIER_W = 4


class BudgetError(ValueError):
    """Requested computation exceeds the configured search budget."""


def _true_counts(x: np.ndarray, problem: Alphabet) -> np.ndarray:
    """Per-input tracked counts, shape (inputs, arity)."""
    if problem.kind == "counter":
        return np.stack([(x == j).sum(axis=1) for j in range(problem.k)], axis=1)
    if problem.kind == "binary":
        return (x == 1).sum(axis=1)[:, None]
    return np.stack(
        [((x >> j) & 1).sum(axis=1) for j in range(problem.k)], axis=1
    )


def exhaustive_verify(
    p: Robp, problem: Alphabet, delta, *, max_inputs: int = DEFAULT_MAX_INPUTS
) -> bool:
    """Evaluate every input; True iff every output is within delta of the
    true counts. Inputs are enumerated lexicographically in chunks."""
    delta = Fraction(delta)
    if p.alphabet != problem:
        raise ValueError("program alphabet does not match problem")
    size = p.alphabet.size
    total = size**p.n
    if total > max_inputs:
        raise BudgetError(f"{total} inputs exceed budget {max_inputs}")
    out = p.outputs_table
    if out.shape[1] != problem.arity:
        raise ValueError("output arity does not match problem")
    num, den = out.num, out.den
    dn, dd = delta.numerator, delta.denominator
    if num.size and (
        int(den.max()) > 2**15
        or int(np.abs(num).max()) > 2**30
        or dd > 2**15
        or dn > 2**30
        or p.n > 2**15
    ):
        num, den = num.astype(object), den.astype(object)
    chunk = 1 << 20
    powers = np.array([size ** (p.n - 1 - t) for t in range(p.n)], dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        x = (idx[:, None] // powers[None, :]) % size if p.n else idx[:, None][:, :0]
        states = np.zeros(len(idx), dtype=np.int64)
        for t in range(p.n):
            states = p.edge_array(t)[states, x[:, t]]
        counts = _true_counts(x, problem)
        n_v, d_v = num[states], den[states]
        # |num/den - c| <= delta  <=>  |num - c*den| * dd <= dn * den
        if (np.abs(n_v - counts * d_v) * dd > dn * d_v).any():
            return False
    return True


def random_robp(n: int, alphabet: Alphabet, w: int, seed: int) -> Robp:
    """Seeded random valid program: random layer sizes (30% of layers forced
    to width 1 to exercise label merging), random edges, unreachable
    vertices pruned, outputs set to the label midpoints."""
    if w < 1:
        raise ValueError("w >= 1 required")
    rng = random.Random(seed)
    sizes = [1] + [
        1 if rng.random() < 0.3 else rng.randint(1, w) for _ in range(n)
    ]
    size = alphabet.size
    edges = [
        [[rng.randrange(sizes[t + 1]) for _ in range(size)] for _ in range(sizes[t])]
        for t in range(n)
    ]
    # prune unreachable vertices layer by layer, remapping targets
    reach = [0]
    for t in range(n):
        hit = sorted({edges[t][u][z] for u in reach for z in range(size)})
        remap = {old: new for new, old in enumerate(hit)}
        edges[t] = [[remap[edges[t][u][z]] for z in range(size)] for u in reach]
        if t + 1 < n:
            edges[t + 1] = [edges[t + 1][old] for old in hit]
        reach = list(range(len(hit)))
        sizes[t + 1] = len(hit)
    placeholder = [(Fraction(0),) * alphabet.arity] * sizes[n]
    p = Robp.build(alphabet, edges, placeholder)
    _, midpoints = minimal_error(p, alphabet)
    return Robp.build(alphabet, edges, midpoints)


# ---------------------------------------------------------------------------
# Interval systems and the exact width/error frontier (binary problem)
# ---------------------------------------------------------------------------

Interval = tuple[int, int]


@dataclass(frozen=True)
class IntervalSystem:
    """Per-layer antichains of intervals with containment witnesses.

    Layer 0 is {[0,0]}; each interval R in layer t names the layer-(t+1)
    interval containing R (witness0) and the one containing R+1 (witness1).
    """

    n: int
    layers: tuple[tuple[Interval, ...], ...]
    witness0: tuple[tuple[int, ...], ...]
    witness1: tuple[tuple[int, ...], ...]

    def check(self):
        if len(self.layers) != self.n + 1 or self.layers[0] != ((0, 0),):
            raise ValueError("layer 0 must be exactly {[0,0]}")
        for t, layer in enumerate(self.layers):
            for a, b in layer:
                if not 0 <= a <= b <= t:
                    raise ValueError(f"interval [{a},{b}] invalid at layer {t}")
            for i, (a, b) in enumerate(layer):
                for j, (c, d) in enumerate(layer):
                    if i != j and c <= a and b <= d:
                        raise ValueError(f"layer {t} is not an antichain")
        for t in range(self.n):
            for i, (a, b) in enumerate(self.layers[t]):
                for shift, wit in ((0, self.witness0[t][i]), (1, self.witness1[t][i])):
                    c, d = self.layers[t + 1][wit]
                    if not (c <= a + shift and b + shift <= d):
                        raise ValueError(
                            f"unwitnessed obligation at layer {t}, interval {i}, shift {shift}"
                        )

    @property
    def max_final_length(self) -> int:
        return max(b - a for a, b in self.layers[-1])


@dataclass(frozen=True)
class FrontierPoint:
    n: int
    w: int
    delta_star: Fraction
    witness: IntervalSystem


def _set_partitions(items: list, max_blocks: int):
    """All partitions of items into at most max_blocks nonempty blocks,
    in a deterministic order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, max_blocks):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        if len(part) < max_blocks:
            yield part + [[first]]


def _maximal_obligations(state: tuple[Interval, ...]) -> list[Interval]:
    obs = set()
    for a, b in state:
        obs.add((a, b))
        obs.add((a + 1, b + 1))
    return sorted(
        o
        for o in obs
        if not any(p != o and p[0] <= o[0] and o[1] <= p[1] for p in obs)
    )


def _antichain(intervals) -> tuple[Interval, ...]:
    uniq = sorted(set(intervals))
    return tuple(
        i
        for i in uniq
        if not any(j != i and j[0] <= i[0] and i[1] <= j[1] for j in uniq)
    )


def _prune_dominated(states: set) -> set:
    """Keep states not dominated by another: B dominates A when every
    interval of B fits inside some interval of A (smaller is never worse)."""
    keep = []
    items = sorted(states)
    for a in items:
        dominated = False
        for b in items:
            if b != a and all(
                any(c <= x and y <= d for c, d in a) for x, y in b  # b inside a
            ):
                dominated = True
                break
        if not dominated:
            keep.append(a)
    return set(keep)


def _feasible(n: int, w: int, limit: int, track: bool):
    """Is there an interval system with every length <= limit? Lengths never
    shrink along witness chains, so pruning long intervals is lossless."""
    start = ((0, 0),)
    frontier_states = {start}
    parents: list[dict] = [{} for _ in range(n + 1)]
    for t in range(n):
        nxt: dict[tuple, tuple] = {}
        for state in sorted(frontier_states):
            obs = _maximal_obligations(state)
            for part in _set_partitions(obs, w):
                hulls = _antichain(
                    (min(a for a, _ in blk), max(b for _, b in blk)) for blk in part
                )
                if any(b - a > limit for a, b in hulls):
                    continue
                if hulls not in nxt:
                    nxt[hulls] = state
        pruned = _prune_dominated(set(nxt))
        frontier_states = pruned
        if track:
            parents[t + 1] = {s: nxt[s] for s in pruned}
        if not frontier_states:
            return None
    if not track:
        return True
    chain = [min(frontier_states)]
    for t in range(n, 0, -1):
        chain.append(parents[t][chain[-1]])
    chain.reverse()
    return chain


def _system_from_chain(n: int, chain: list[tuple[Interval, ...]]) -> IntervalSystem:
    w0, w1 = [], []
    for t in range(n):
        cur, nxt = chain[t], chain[t + 1]

        def first_containing(a, b):
            for i, (c, d) in enumerate(nxt):
                if c <= a and b <= d:
                    return i
            raise ValueError("unwitnessed obligation in search chain")

        w0.append(tuple(first_containing(a, b) for a, b in cur))
        w1.append(tuple(first_containing(a + 1, b + 1) for a, b in cur))
    return IntervalSystem(n=n, layers=tuple(chain), witness0=tuple(w0), witness1=tuple(w1))


def frontier(
    n: int,
    w: int,
    *,
    max_n: int = DEFAULT_FRONTIER_N,
    max_w: int = DEFAULT_FRONTIER_W,
) -> FrontierPoint:
    """Exact minimum of minimal_error over width-<=w binary programs.

    Binary search on the maximal interval length: any program induces an
    interval system of its width, and system_to_robp converts systems back,
    so the system optimum equals the program optimum.
    """
    if n > max_n or w > max_w:
        raise BudgetError(f"frontier({n},{w}) over budget ({max_n},{max_w})")
    if n < 0 or w < 1:
        raise ValueError("need n >= 0, w >= 1")
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(n, w, mid, track=False):
            hi = mid
        else:
            lo = mid + 1
    chain = _feasible(n, w, lo, track=True)
    system = _system_from_chain(n, chain)
    system.check()
    return FrontierPoint(n=n, w=w, delta_star=Fraction(lo, 2), witness=system)


def system_to_robp(s: IntervalSystem) -> Robp:
    """One vertex per interval; symbol z routes to the witness for R+z.
    The program's reachable counts stay inside the intervals, so its
    minimal error is at most half the longest final interval."""
    s.check()
    from .robp import binary_alphabet

    edges = [
        [[int(s.witness0[t][i]), int(s.witness1[t][i])] for i in range(len(s.layers[t]))]
        for t in range(s.n)
    ]
    outputs = [
        (Fraction(a + b, 2),) for a, b in s.layers[-1]
    ]
    return Robp.build(binary_alphabet(), edges, outputs)


# ---------------------------------------------------------------------------
# Independent cross-check: exhaustive enumeration of program behaviors
# ---------------------------------------------------------------------------


def _surjective_maps(slots: int, targets: int) -> list[tuple[int, ...]]:
    out = []
    for m in np.ndindex(*([targets] * slots)):
        if len(set(m)) == targets:
            out.append(tuple(int(v) for v in m))
    return out


def frontier_brute_force(n: int, w: int) -> Fraction:
    """Minimal binary-counting error over ALL width-<=w programs, by direct
    enumeration of label configurations (every reachable configuration is
    realized by a program, and programs with the same configuration have the
    same minimal error)."""
    if w < 1 or n < 0:
        raise ValueError("need n >= 0, w >= 1")
    maps_cache = {
        (a, b): _surjective_maps(2 * a, b)
        for a in range(1, w + 1)
        for b in range(1, w + 1)
    }
    states = {((0, 0),)}
    for _ in range(n):
        nxt = set()
        for state in states:
            a = len(state)
            slots = [
                (state[v][0] + z, state[v][1] + z) for v in range(a) for z in (0, 1)
            ]
            for b in range(1, w + 1):
                for m in maps_cache[(a, b)]:
                    labels = []
                    for tgt in range(b):
                        los = [slots[i][0] for i in range(2 * a) if m[i] == tgt]
                        his = [slots[i][1] for i in range(2 * a) if m[i] == tgt]
                        labels.append((min(los), max(his)))
                    nxt.add(tuple(sorted(labels)))
        states = nxt
    best = min(max(b - a for a, b in state) for state in states)
    return Fraction(best, 2)
