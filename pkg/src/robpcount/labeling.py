"""Per-vertex rectangle labels and the exact verifier built on them.

The label of a vertex is the coordinatewise min/max of the per-symbol
counts over all input prefixes reaching it. Labels propagate forward:
the label of v is the min/max hull of label(u) + shift(z) over incoming
edges (u, z). Every endpoint is achieved by a concrete prefix, which is
what makes verify() an exact decision procedure rather than a bound:
a program computes its counting problem within delta iff every final
vertex's output sits within delta of both ends of its label, coordinate
by coordinate.

Label modes:
  full       one coordinate per tracked count (k for counter/parallel, 1
             for binary) -- what verification needs.
  potential  k-1 coordinates for counter-family programs (the last letter
             is not tracked) -- what the potential audits consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .robp import Alphabet, Robp, validate


@dataclass(frozen=True)
class RectLabel:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("malformed rectangle")

    @property
    def dims(self) -> int:
        return len(self.lo)

    def contains(self, x) -> bool:
        return all(a <= v <= b for a, v, b in zip(self.lo, x, self.hi))


def _shift_table(alphabet: Alphabet, mode: str) -> np.ndarray:
    k = alphabet.k
    if alphabet.kind == "counter":
        if mode == "full":
            return np.eye(k, dtype=np.int32)
        shifts = np.zeros((k, k - 1), dtype=np.int32)
        for i in range(k - 1):
            shifts[i, i] = 1
        return shifts
    if alphabet.kind == "binary":
        return np.array([[0], [1]], dtype=np.int32)
    if mode != "full":
        raise ValueError("parallel programs have only the full labeling")
    size = 2**k
    shifts = np.zeros((size, k), dtype=np.int32)
    for i in range(size):
        for j in range(k):
            shifts[i, j] = (i >> j) & 1
    return shifts


class LabeledRobp:
    """A program plus its per-vertex rectangle labels for every layer."""

    __slots__ = ("p", "mode", "dims", "potential_k", "lo", "hi")

    def __init__(self, p: Robp, mode: str, lo: list[np.ndarray], hi: list[np.ndarray]):
        self.p = p
        self.mode = mode
        self.dims = lo[0].shape[1]
        if p.alphabet.kind == "binary":
            self.potential_k = 2
        else:
            self.potential_k = p.alphabet.k
        self.lo = lo
        self.hi = hi

    def label(self, t: int, v: int) -> RectLabel:
        return RectLabel(
            tuple(int(x) for x in self.lo[t][v]),
            tuple(int(x) for x in self.hi[t][v]),
        )

    def layer_rectangles(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        return self.lo[t], self.hi[t]


def compute_labels(p: Robp, mode: str = "full") -> LabeledRobp:
    """Forward DP over layers; exact by induction on achieved prefixes."""
    if mode not in ("full", "potential"):
        raise ValueError(f"unknown label mode {mode!r}")
    report = validate(p)
    if not report.valid:
        raise ValueError(f"program is invalid: {report.violations[:3]}")
    shifts = _shift_table(p.alphabet, mode)
    d = shifts.shape[1]
    size = p.alphabet.size
    # counts fit int16 at desk scale; sentinel is the dtype max
    dtype = np.int16 if p.n <= 30_000 else np.int32
    sentinel = np.iinfo(dtype).max
    lo = [np.zeros((1, d), dtype=dtype)]
    hi = [np.zeros((1, d), dtype=dtype)]
    # lo and negated hi ride in one array so every step is a scatter-min
    shifts2 = np.concatenate([shifts, -shifts], axis=1).astype(dtype)
    state = np.zeros((1, 2 * d), dtype=dtype)
    for t in range(p.n):
        edges = p.edge_array(t)
        v_next = p.layer_sizes[t + 1]
        nxt = np.full((v_next, 2 * d), sentinel, dtype=dtype)
        for sym in range(size):
            tgt = edges[:, sym]
            cand = state + shifts2[sym]
            if np.bincount(tgt, minlength=v_next).max() <= 1:
                if sym == 0:
                    nxt[tgt] = cand
                else:
                    tmp = np.full((v_next, 2 * d), sentinel, dtype=dtype)
                    tmp[tgt] = cand
                    np.minimum(nxt, tmp, out=nxt)
            else:
                np.minimum.at(nxt, tgt, cand)
        state = nxt
        lo.append(state[:, :d].copy())
        hi.append(-state[:, d:])
    mode_name = {
        ("counter", "full"): "counter-full",
        ("counter", "potential"): "counter-potential",
        ("binary", "full"): "binary",
        ("binary", "potential"): "counter-potential",
        ("parallel", "full"): "parallel",
    }[(p.alphabet.kind, mode)]
    return LabeledRobp(p, mode_name, lo, hi)


def edge_monotone(lp: LabeledRobp) -> bool:
    """Per-edge label containment: label(u) + shift(z) inside label(v)."""
    p = lp.p
    shifts = _shift_table(p.alphabet, "full" if lp.mode != "counter-potential" else "potential")
    for t in range(p.n):
        edges = p.edge_array(t)
        for sym in range(p.alphabet.size):
            tgt = edges[:, sym]
            if (lp.lo[t] + shifts[sym] < lp.lo[t + 1][tgt]).any():
                return False
            if (lp.hi[t] + shifts[sym] > lp.hi[t + 1][tgt]).any():
                return False
    return True


@dataclass(frozen=True)
class VerifyCertificate:
    valid: bool
    delta: Fraction
    max_halfwidth: Fraction
    worst: tuple[int, int, Fraction] | None = None  # (final vertex, coord, excess)


def _check_problem(p: Robp, problem: Alphabet):
    if p.alphabet != problem:
        raise ValueError(
            f"program alphabet {p.alphabet.kind}/{p.alphabet.k} does not match "
            f"problem {problem.kind}/{problem.k}"
        )


def verify(p: Robp, problem: Alphabet, delta) -> VerifyCertificate:
    """Exact decision: does p solve the counting problem within delta?

    valid iff for every final vertex v and coordinate j both
    hi_j - out_j <= delta and out_j - lo_j <= delta; label endpoints are
    achieved, so this is equivalent to correctness on every input.
    """
    delta = Fraction(delta)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    _check_problem(p, problem)
    out = p.outputs_table
    if out.shape[1] != problem.arity:
        raise ValueError(
            f"output arity {out.shape[1]} does not match problem arity {problem.arity}"
        )
    lp = compute_labels(p, "full")
    lo = lp.lo[-1].astype(np.int64)
    hi = lp.hi[-1].astype(np.int64)
    num, den = out.num, out.den
    if num.size and (
        int(den.max()) > 2**15 or int(np.abs(num).max()) > 2**30 or p.n > 2**15
    ):
        # oversized rationals: do the arithmetic on Python ints
        num, den = num.astype(object), den.astype(object)
        lo, hi = lo.astype(object), hi.astype(object)
    # halfwidth numerators over per-element denominators
    m = np.maximum(hi * den - num, num - lo * den)
    max_hw = Fraction(0)
    for q in np.unique(den):
        sel = den == q
        max_hw = max(max_hw, Fraction(int(m[sel].max()), int(q)))
    valid = max_hw <= delta
    worst = None
    if not valid:
        hit = m * max_hw.denominator == max_hw.numerator * den
        v, j = np.argwhere(hit)[0]
        worst = (int(v), int(j), max_hw - delta)
    return VerifyCertificate(valid=valid, delta=delta, max_halfwidth=max_hw, worst=worst)


def minimal_error(p: Robp, problem: Alphabet):
    """Best achievable additive error for p's structure, with the outputs
    that achieve it (interval midpoints). Existing outputs are ignored."""
    _check_problem(p, problem)
    lp = compute_labels(p, "full")
    lo, hi = lp.lo[-1], lp.hi[-1]
    length = (hi.astype(np.int64) - lo).max() if lo.size else 0
    delta_star = Fraction(int(length), 2)
    optimal = [
        tuple(Fraction(int(a) + int(b), 2) for a, b in zip(lo[v], hi[v]))
        for v in range(lo.shape[0])
    ]
    return delta_star, optimal
