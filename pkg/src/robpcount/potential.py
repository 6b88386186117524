"""Layer potentials and the growth/final audits.

For counter-family programs the layer-t potential sums, over the grid of
count tuples with coordinate sum <= t, the largest clipped l1-distance from
the grid point to the top corner of a containing label rectangle. For
parallel programs the grid is the fixed box {0..floor(n/10)}**k, audited
from layer floor(n/10) on, and the distance is unclipped.

Grid points covered by no rectangle contribute 0. That convention cannot
flip any audit: contributions are nonnegative, so zeros neither weaken the
per-layer growth lower bound nor inflate the final-layer sum.

phi_counter/phi_parallel are the pointwise definitions; profiles are
computed by painting rectangles onto dense grids, which the tests check
against the pointwise form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iproduct

import numpy as np

from .bounds import gen_binom
from .labeling import LabeledRobp, verify
from .robp import binary_alphabet, counter_alphabet, parallel_alphabet

DEFAULT_MAX_BOX_CELLS = 40_000_000  # per-layer dense grid cells
DEFAULT_MAX_PAINT = 8_000_000_000  # total painted cells across all layers


class GridBudgetError(ValueError):
    """The potential grid would exceed the configured budget."""


def phi_counter(rectangles, x, t: int) -> int:
    """Pointwise potential: max over containing rectangles of
    min(sum(hi), t) - sum(x); 0 when nothing contains x."""
    total = sum(x)
    if total > t or any(v < 0 for v in x):
        raise ValueError("x outside the layer-t grid")
    best = 0
    for lo, hi in rectangles:
        if all(a <= v <= b for a, v, b in zip(lo, x, hi)):
            best = max(best, min(sum(hi), t) - total)
    return best


def phi_parallel(rectangles, x) -> int:
    """Pointwise parallel potential: unclipped corner distance."""
    total = sum(x)
    best = 0
    for lo, hi in rectangles:
        if all(a <= v <= b for a, v, b in zip(lo, x, hi)):
            best = max(best, sum(hi) - total)
    return best


@dataclass(frozen=True)
class PotentialProfile:
    phi_values: tuple[int, ...]  # Phi_t for t in the audited range
    grid_kind: str  # "simplex" | "box"
    audited_range: tuple[int, int]  # inclusive layer interval
    k: int  # potential parameter (counter k; parallel k)
    phi_tables: tuple[dict, ...] | None = None

    def phi(self, t: int) -> int:
        t0, t1 = self.audited_range
        if not t0 <= t <= t1:
            raise IndexError(f"layer {t} outside audited range {self.audited_range}")
        return self.phi_values[t - t0]


try:  # numba speeds the painting kernel ~10x; the numpy path is equivalent
    from numba import njit as _njit

    @_njit(cache=True)
    def _paint_loop(flat, starts, widths, vals, strides):  # pragma: no cover
        r_count, d = widths.shape
        idx = np.zeros(d, np.int64)
        for r in range(r_count):
            val = vals[r]
            pos = starts[r]
            for j in range(d):
                idx[j] = 0
            while True:
                if flat[pos] < val:
                    flat[pos] = val
                j = d - 1
                while j >= 0:
                    idx[j] += 1
                    pos += strides[j]
                    if idx[j] < widths[r, j]:
                        break
                    pos -= strides[j] * idx[j]
                    idx[j] = 0
                    j -= 1
                if j < 0:
                    break

except ImportError:  # pragma: no cover
    _paint_loop = None


def _paint_numpy(flat, starts, widths, vals, strides):
    """Shape-grouped scatter painting; used when numba is unavailable."""
    order = np.lexsort(widths.T[::-1])
    widths_sorted = widths[order]
    group_starts = np.flatnonzero(
        np.concatenate([[True], (np.diff(widths_sorted, axis=0) != 0).any(axis=1)])
    )
    for gi, g0 in enumerate(group_starts):
        g1 = group_starts[gi + 1] if gi + 1 < len(group_starts) else len(order)
        idx = order[g0:g1]
        w = widths_sorted[g0]
        offs = np.zeros(1, dtype=np.int64)
        for j in range(len(strides)):
            offs = (offs[:, None] + np.arange(w[j], dtype=np.int64) * strides[j]).ravel()
        vol = len(offs)
        chunk = max(1, 4_000_000 // vol)
        for c0 in range(0, len(idx), chunk):
            sel = idx[c0 : c0 + chunk]
            pos = (starts[sel][:, None] + offs[None, :]).ravel()
            painted = np.broadcast_to(vals[sel][:, None], (len(sel), vol)).ravel()
            np.maximum.at(flat, pos, painted)


def _paint(lo: np.ndarray, hi: np.ndarray, vals: np.ndarray, base, shape, budget):
    """Dense max-paint of value boxes onto a d-dimensional grid.

    Returns a flat int64 array over `shape` initialized to -1; cell x ends
    up holding max(vals[r]) over rectangles r containing x.
    """
    d = len(shape)
    cells = int(np.prod(shape))
    flat = np.full(cells, -1, dtype=np.int64)
    if len(lo) == 0:
        return flat
    strides = np.ones(d, dtype=np.int64)
    for j in range(d - 2, -1, -1):
        strides[j] = strides[j + 1] * shape[j + 1]
    rel = (lo - np.asarray(base, dtype=np.int64)).astype(np.int64)
    starts = rel @ strides
    widths = (hi - lo + 1).astype(np.int64)
    budget[0] -= int(widths.prod(axis=1).sum())
    if budget[0] < 0:
        raise GridBudgetError("painting budget exhausted; raise the limit")
    vals = np.ascontiguousarray(vals, dtype=np.int64)
    if _paint_loop is not None:
        _paint_loop(flat, starts, np.ascontiguousarray(widths), vals, strides)
    else:
        _paint_numpy(flat, starts, widths, vals, strides)
    return flat


def _coord_sums(base, shape) -> np.ndarray:
    total = np.zeros(shape, dtype=np.int64)
    d = len(shape)
    for j, (b, s) in enumerate(zip(base, shape)):
        view = [1] * d
        view[j] = s
        total = total + (np.arange(s, dtype=np.int64) + b).reshape(view)
    return total.ravel()


def _phi_sum_counter(lo: np.ndarray, hi: np.ndarray, t: int, budget, max_cells) -> int:
    lo64 = lo.astype(np.int64)
    hi64 = hi.astype(np.int64)
    vals = np.minimum(hi64.sum(axis=1), t)
    keep = vals > lo64.sum(axis=1)
    if not keep.any():
        return 0
    lo64, hi64, vals = lo64[keep], hi64[keep], vals[keep]
    base = lo64.min(axis=0)
    top = hi64.max(axis=0)
    shape = tuple(int(v) for v in (top - base + 1))
    if math.prod(shape) > max_cells:
        raise GridBudgetError(f"layer grid of {math.prod(shape)} cells over budget")
    flat = _paint(lo64, hi64, vals, base, shape, budget)
    sums = _coord_sums(base, shape)
    covered = (flat >= 0) & (sums <= t)
    return int((flat[covered] - sums[covered]).sum())


def profile_counter(
    lp: LabeledRobp,
    *,
    keep_tables: bool = False,
    max_cells: int = DEFAULT_MAX_BOX_CELLS,
    max_paint: int = DEFAULT_MAX_PAINT,
) -> PotentialProfile:
    """Phi_t for t = 0..n over the simplex grids (counter potential)."""
    if lp.mode != "counter-potential":
        raise ValueError("profile_counter needs labels in counter-potential mode")
    n = lp.p.n
    k = lp.potential_k
    budget = [max_paint]
    phis = []
    tables = [] if keep_tables else None
    for t in range(n + 1):
        lo, hi = lp.layer_rectangles(t)
        phis.append(_phi_sum_counter(lo, hi, t, budget, max_cells))
        if keep_tables is True:
            if math.comb(t + k - 1, k - 1) > max_cells:
                raise GridBudgetError("grid too large to tabulate")
            rects = [
                (tuple(int(v) for v in lo[i]), tuple(int(v) for v in hi[i]))
                for i in range(lo.shape[0])
            ]
            table = {}
            for x in _simplex_points(t, k - 1):
                table[x] = phi_counter(rects, x, t)
            tables.append(table)
    return PotentialProfile(
        phi_values=tuple(phis),
        grid_kind="simplex",
        audited_range=(0, n),
        k=k,
        phi_tables=tuple(tables) if tables is not None else None,
    )


def _simplex_points(t: int, d: int):
    if d == 0:
        yield ()
        return
    for head in range(t + 1):
        for rest in _simplex_points(t - head, d - 1):
            yield (head,) + rest


def profile_parallel(
    lp: LabeledRobp,
    *,
    keep_tables: bool = False,
    max_cells: int = DEFAULT_MAX_BOX_CELLS,
    max_paint: int = DEFAULT_MAX_PAINT,
) -> PotentialProfile:
    """Phi_t for t = floor(n/10)..n over the box grid (parallel potential)."""
    if lp.mode != "parallel":
        raise ValueError("profile_parallel needs parallel labels")
    n = lp.p.n
    k = lp.dims
    side = n // 10 + 1
    if side**k > max_cells:
        raise GridBudgetError(f"box of {side ** k} cells over budget")
    t0 = n // 10
    budget = [max_paint]
    base = (0,) * k
    shape = (side,) * k
    phis = []
    tables = [] if keep_tables else None
    for t in range(t0, n + 1):
        lo, hi = lp.layer_rectangles(t)
        lo64 = lo.astype(np.int64)
        hi64 = hi.astype(np.int64)
        vals = hi64.sum(axis=1)
        inside = (lo64 <= side - 1).all(axis=1)
        keep = inside & (vals > lo64.sum(axis=1))
        if keep.any():
            clipped_hi = np.minimum(hi64[keep], side - 1)
            flat = _paint(lo64[keep], clipped_hi, vals[keep], base, shape, budget)
            sums = _coord_sums(base, shape)
            covered = flat >= 0
            phis.append(int((flat[covered] - sums[covered]).sum()))
        else:
            phis.append(0)
        if keep_tables:
            rects = [
                (tuple(int(v) for v in lo[i]), tuple(int(v) for v in hi[i]))
                for i in range(lo.shape[0])
            ]
            table = {}
            for x in _iproduct(range(side), repeat=k):
                table[x] = phi_parallel(rects, x)
            tables.append(table)
    return PotentialProfile(
        phi_values=tuple(phis),
        grid_kind="box",
        audited_range=(t0, n),
        k=k,
        phi_tables=tuple(tables) if tables is not None else None,
    )


@dataclass(frozen=True)
class AuditRow:
    t: int
    lhs: Fraction | int
    rhs: Fraction | int
    slack: Fraction | int
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]
    kind: str

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[AuditRow]:
        return [r for r in self.rows if not r.passed]


def audit_growth_counter(
    lp: LabeledRobp, w: int, profile: PotentialProfile | None = None
) -> AuditReport:
    """Per-layer check Phi_{t+1} - Phi_t >= max(0, C(t+k-1, k-1) - w).

    Holds unconditionally for every valid program; a failure means the
    labels or the profile are computed wrong."""
    prof = profile if profile is not None else profile_counter(lp)
    k = lp.potential_k
    rows = []
    for t in range(lp.p.n):
        lhs = prof.phi(t + 1) - prof.phi(t)
        rhs = max(0, math.comb(t + k - 1, k - 1) - w)
        rows.append(AuditRow(t, lhs, rhs, lhs - rhs, lhs >= rhs))
    return AuditReport(tuple(rows), "growth-counter")


def _counter_problem(lp: LabeledRobp):
    if lp.p.alphabet.kind == "binary":
        return binary_alphabet()
    return counter_alphabet(lp.p.alphabet.k)


def audit_final_counter(
    lp: LabeledRobp,
    delta,
    profile: PotentialProfile | None = None,
    verified: bool | None = None,
) -> AuditReport:
    """Single-row check Phi_n <= C(n+k-1, k) - C(n-2(k-1)delta+k-1, k),
    valid for programs that compute their problem within delta."""
    delta = Fraction(delta)
    n, k = lp.p.n, lp.potential_k
    if delta > Fraction(n, 2 * (k - 1)):
        raise ValueError("final audit needs delta <= n/(2(k-1))")
    if verified is None:
        verified = verify(lp.p, _counter_problem(lp), delta).valid
    if not verified:
        raise ValueError("program does not verify at delta; final audit inapplicable")
    prof = profile if profile is not None else profile_counter(lp)
    lhs = prof.phi(n)
    rhs = Fraction(math.comb(n + k - 1, k)) - gen_binom(
        Fraction(n) - 2 * (k - 1) * delta + k - 1, k
    )
    row = AuditRow(n, lhs, rhs, rhs - lhs, lhs <= rhs)
    return AuditReport((row,), "final-counter")


def audit_growth_parallel(
    lp: LabeledRobp, w: int, profile: PotentialProfile | None = None
) -> AuditReport:
    """Per-layer parallel growth check from floor(n/10) on.

    The guaranteed increment is ceil(9k/10) * ((floor(n/10)+1)**k
    - w 2**k (floor(n/10)+1)**(ceil(9k/10)-1)); when that is negative the
    row falls back to the unconditional Phi_{t+1} >= Phi_t."""
    prof = profile if profile is not None else profile_parallel(lp)
    n, k = lp.p.n, lp.dims
    side = n // 10 + 1
    ck = -((-9 * k) // 10)  # ceil(9k/10)
    formula = ck * (side**k - w * 2**k * side ** (ck - 1))
    rhs = max(0, formula)
    rows = []
    for t in range(n // 10, n):
        lhs = prof.phi(t + 1) - prof.phi(t)
        rows.append(AuditRow(t, lhs, rhs, lhs - rhs, lhs >= rhs))
    return AuditReport(tuple(rows), "growth-parallel")


def audit_final_parallel(
    lp: LabeledRobp,
    profile: PotentialProfile | None = None,
    verified: bool | None = None,
) -> AuditReport:
    """Single-row check Phi_n <= (floor(n/10)+1)**k * 2kn/3 for programs
    solving the parallel problem at error n/3."""
    n, k = lp.p.n, lp.dims
    if verified is None:
        verified = verify(lp.p, parallel_alphabet(k), Fraction(n, 3)).valid
    if not verified:
        raise ValueError("program does not verify at n/3; final audit inapplicable")
    prof = profile if profile is not None else profile_parallel(lp)
    lhs = prof.phi(n)
    rhs = (n // 10 + 1) ** k * Fraction(2 * k * n, 3)
    row = AuditRow(n, lhs, rhs, rhs - lhs, lhs <= rhs)
    return AuditReport((row,), "final-parallel")
