"""Search engines minimizing the total segmentation cost.

All engines share one candidate convention: internal segment ends live on the
grid {jump, 2*jump, ...} intersected with [min_size, T - min_size], every
segment is at least min_size samples long, and T itself is always admissible
as the terminal end.  min_size is silently raised to the fitted cost's own
minimum segment length.

dynp() is exact for a fixed number of change points (full dynamic program);
pelt() is exact for a linear penalty and prunes candidates that can never win
again; binseg(), bottomup() and window() are greedy approximations that
accept any of the three stopping rules; solve_budget() finds the fewest
change points whose optimal cost fits a budget by growing the dynp table.

Segment costs are memoized per (fitted cost, min_size, jump), so repeated
calls on the same fitted cost reuse every earlier evaluation, and the dynp
value table is kept and extended instead of recomputed.  Ties are always
broken toward the smallest change point indices.
"""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass

import numpy as np

from .core import DetectionResult, validate_breakpoints
from .exceptions import (
    BadParamError,
    BudgetUnreachableError,
    InfeasibleError,
    WindowTooLargeError,
)


@dataclass(frozen=True)
class StoppingRule:
    """Exactly one of n_bkps (fixed count), penalty (per-change cost), or
    budget (total cost ceiling) must be set."""

    n_bkps: int | None = None
    penalty: float | None = None
    budget: float | None = None

    def __post_init__(self):
        given = [
            name
            for name, value in (
                ("n_bkps", self.n_bkps),
                ("penalty", self.penalty),
                ("budget", self.budget),
            )
            if value is not None
        ]
        if len(given) != 1:
            raise BadParamError(
                f"exactly one stopping rule must be set, got {given or 'none'}"
            )
        if self.n_bkps is not None:
            if isinstance(self.n_bkps, bool) or not isinstance(self.n_bkps, int) or self.n_bkps < 0:
                raise BadParamError(f"n_bkps must be an integer >= 0, got {self.n_bkps!r}")
        for name in ("penalty", "budget"):
            value = getattr(self, name)
            if value is not None:
                value = float(value)
                if not np.isfinite(value) or value < 0.0:
                    raise BadParamError(f"{name} must be finite and >= 0, got {value}")
                object.__setattr__(self, name, value)

    @property
    def kind(self) -> str:
        if self.n_bkps is not None:
            return "n_bkps"
        if self.penalty is not None:
            return "penalty"
        return "budget"

    @property
    def value(self):
        return getattr(self, self.kind)


@dataclass(frozen=True)
class SearchConfig:
    """Grid constraints shared by all engines.

    min_size is the smallest admissible segment length, jump the subsampling
    step for candidate ends, window_width the sliding-window width (only the
    window engine reads it, and it must be set there).
    """

    min_size: int = 1
    jump: int = 1
    window_width: int | None = None

    def __post_init__(self):
        for name in ("min_size", "jump"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise BadParamError(f"{name} must be an integer >= 1, got {value!r}")
        if self.window_width is not None:
            if (
                isinstance(self.window_width, bool)
                or not isinstance(self.window_width, int)
                or self.window_width < 2
            ):
                raise BadParamError(
                    f"window_width must be an integer >= 2, got {self.window_width!r}"
                )


def _grid(n_samples: int, min_size: int, jump: int) -> list[int]:
    """Admissible internal ends: multiples of jump in [min_size, T - min_size]."""
    start = ((min_size + jump - 1) // jump) * jump
    return list(range(start, n_samples - min_size + 1, jump))


def max_changes(n_samples: int, min_size: int, jump: int) -> int:
    """Largest number of change points placeable under the grid constraints."""
    count, last = 0, 0
    for pos in _grid(n_samples, min_size, jump):
        if pos - last >= min_size:
            count += 1
            last = pos
    return count


class _SegmentTable:
    """Memoized segment costs over {0, grid..., T}, shared by the engines.

    Cells are filled through fitted.cost() on first use; a lock makes the
    fill-on-miss safe when engine instances run on separate threads.
    """

    def __init__(self, fitted, min_size: int, jump: int):
        self.fitted = fitted
        self.min_size = min_size
        self.jump = jump
        n_samples = fitted.n_samples
        self.positions = [0] + _grid(n_samples, min_size, jump) + [n_samples]
        self.pos_index = {pos: i for i, pos in enumerate(self.positions)}
        count = len(self.positions)
        self.values = np.full((count, count), np.nan)
        self._lock = threading.Lock()
        self._all_filled = False
        self._matrix = None

    def seg(self, i: int, k: int) -> float:
        value = self.values[i, k]
        if np.isnan(value):
            with self._lock:
                value = self.values[i, k]
                if np.isnan(value):
                    value = self.fitted.cost(self.positions[i], self.positions[k])
                    self.values[i, k] = value
        return float(value)

    def fill_all(self) -> None:
        if self._all_filled:
            return
        with self._lock:
            if self._all_filled:
                return
            positions = self.positions
            for i, start in enumerate(positions):
                for k in range(i + 1, len(positions)):
                    if positions[k] - start >= self.min_size and np.isnan(self.values[i, k]):
                        self.values[i, k] = self.fitted.cost(start, positions[k])
            self._all_filled = True

    def matrix(self) -> np.ndarray:
        """Dense cost matrix with +inf on inadmissible pairs (fills everything)."""
        if self._matrix is None:
            self.fill_all()
            pos = np.asarray(self.positions)
            dense = self.values.copy()
            dense[(pos[None, :] - pos[:, None]) < self.min_size] = np.inf
            dense[np.isnan(dense)] = np.inf
            self._matrix = dense
        return self._matrix

    def total(self, ends) -> float:
        """Sum of memoized segment costs, accumulated left to right."""
        value = 0.0
        start_idx = 0
        for end in ends:
            end_idx = self.pos_index[int(end)]
            value += self.seg(start_idx, end_idx)
            start_idx = end_idx
        return value


def _prepare(fitted, config):
    cfg = config if config is not None else SearchConfig()
    if not isinstance(cfg, SearchConfig):
        raise BadParamError(f"expected a SearchConfig, got {type(cfg).__name__}")
    min_size = max(cfg.min_size, fitted.min_seg_len)
    jump = cfg.jump
    if fitted.n_samples < min_size:
        raise InfeasibleError(
            f"signal length {fitted.n_samples} below the minimum segment length {min_size}"
        )
    with fitted._state_lock:
        key = ("table", min_size, jump)
        table = fitted._search_state.get(key)
        if table is None:
            table = _SegmentTable(fitted, min_size, jump)
            fitted._search_state[key] = table
    return cfg, min_size, jump, table


def _result(fitted, ends, contrast, evals_before, n_pruned=0) -> DetectionResult:
    bkps = validate_breakpoints(ends, fitted.n_samples)
    return DetectionResult(
        bkps=bkps,
        contrast=contrast,
        n_cost_evals=fitted.eval_counter - evals_before,
        n_pruned=n_pruned,
    )


class _DynpState:
    """Value table of the dynamic program, grown one layer per change count.

    layers[k][i] is the best cost of cutting [0, positions[i]) into k + 1
    segments; paths[k][i] is the lexicographically smallest internal end tuple
    achieving it.  Both are retained across calls so a repeat or a smaller k
    costs nothing."""

    def __init__(self, table: _SegmentTable):
        self.table = table
        self.matrix = table.matrix()
        count = len(table.positions)
        first = self.matrix[0].copy()
        self.layers = [first]
        self.paths: list[list] = [
            [() if np.isfinite(first[i]) else None for i in range(count)]
        ]
        self.results: dict[int, tuple[tuple[int, ...], float]] = {}
        self.max_changes = max_changes(
            table.fitted.n_samples, table.min_size, table.jump
        )

    def _extend_to(self, n_layers: int) -> None:
        positions = self.table.positions
        count = len(positions)
        while len(self.layers) <= n_layers:
            prev = self.layers[-1]
            prev_paths = self.paths[-1]
            candidate = prev[:, None] + self.matrix
            layer = candidate.min(axis=0)
            layer_paths: list = [None] * count
            for i in range(count):
                best_value = layer[i]
                if not np.isfinite(best_value):
                    continue
                ties = np.flatnonzero(candidate[:, i] == best_value)
                best_path = None
                for s in ties:
                    prefix = prev_paths[s]
                    if prefix is None:
                        continue
                    path = prefix + (positions[s],)
                    if best_path is None or path < best_path:
                        best_path = path
                layer_paths[i] = best_path
            self.layers.append(layer)
            self.paths.append(layer_paths)

    def solve(self, n_bkps: int) -> tuple[tuple[int, ...], float]:
        if n_bkps in self.results:
            return self.results[n_bkps]
        if n_bkps > self.max_changes:
            raise InfeasibleError(
                f"{n_bkps} change points do not fit: the grid admits at most {self.max_changes}"
            )
        self._extend_to(n_bkps)
        terminal = len(self.table.positions) - 1
        value = self.layers[n_bkps][terminal]
        if not np.isfinite(value):
            raise InfeasibleError(f"no valid segmentation with {n_bkps} change points")
        ends = self.paths[n_bkps][terminal] + (self.table.positions[terminal],)
        contrast = self.table.total(ends)
        self.results[n_bkps] = (ends, contrast)
        return ends, contrast


def _dynp_state(fitted, min_size, jump, table) -> _DynpState:
    with fitted._state_lock:
        key = ("dynp", min_size, jump)
        state = fitted._search_state.get(key)
        if state is None:
            state = _DynpState(table)
            fitted._search_state[key] = state
    return state


def dynp(fitted, n_bkps: int, config: SearchConfig | None = None) -> DetectionResult:
    """Exact minimum-cost segmentation with a fixed number of change points.

    Solves the full dynamic program over the admissible grid.  The value
    table is cached on the fitted cost, so asking again (or for fewer change
    points) evaluates no new segment costs.  Ties go to the lexicographically
    smallest end sequence.  Raises InfeasibleError when n_bkps changes do not
    fit under the constraints.
    """
    if isinstance(n_bkps, bool) or not isinstance(n_bkps, int) or n_bkps < 0:
        raise BadParamError(f"n_bkps must be an integer >= 0, got {n_bkps!r}")
    evals_before = fitted.eval_counter
    _, min_size, jump, table = _prepare(fitted, config)
    state = _dynp_state(fitted, min_size, jump, table)
    ends, contrast = state.solve(n_bkps)
    return _result(fitted, ends, contrast, evals_before)


def solve_budget(fitted, budget: float, config: SearchConfig | None = None) -> DetectionResult:
    """Fewest change points whose exact optimal cost is at most `budget`.

    Grows the dynp table one change count at a time, so the work is shared
    with any earlier or later dynp call.  Raises BudgetUnreachableError when
    even the largest feasible number of change points stays above the budget.
    """
    budget = float(budget)
    if not np.isfinite(budget) or budget < 0.0:
        raise BadParamError(f"budget must be finite and >= 0, got {budget}")
    evals_before = fitted.eval_counter
    _, min_size, jump, table = _prepare(fitted, config)
    state = _dynp_state(fitted, min_size, jump, table)
    contrast = np.inf
    for k in range(state.max_changes + 1):
        ends, contrast = state.solve(k)
        if contrast <= budget:
            return _result(fitted, ends, contrast, evals_before)
    raise BudgetUnreachableError(
        f"optimal cost {contrast} with {state.max_changes} change points still exceeds budget {budget}"
    )


def _prefix_path(parent, positions, idx) -> tuple[int, ...]:
    """Internal ends of the partition encoded by the parent chain, idx included."""
    out = []
    while idx > 0:
        out.append(positions[idx])
        idx = parent[idx]
    out.reverse()
    return tuple(out)


def pelt(fitted, penalty: float, config: SearchConfig | None = None) -> DetectionResult:
    """Exact linearly penalized segmentation with candidate pruning.

    Minimizes total cost plus penalty per segment via F(t) = min over s of
    F(s) + c(s, t) + penalty.  A candidate with F(s) + c(s, t) > F(t) can
    never win again once t itself is old enough to act as a split, so it is
    dropped when the endpoint reaches t + min_size; dropping it at t
    directly would lose exactness for min_size > 1.  Superadditivity of the
    shipped costs is what makes the rule safe; fitting a CostSpec with
    superadditive=False disables pruning (n_pruned stays 0).
    """
    penalty = float(penalty)
    if not np.isfinite(penalty) or penalty < 0.0:
        raise BadParamError(f"penalty must be finite and >= 0, got {penalty}")
    evals_before = fitted.eval_counter
    _, min_size, jump, table = _prepare(fitted, config)
    positions = table.positions
    count = len(positions)
    values = np.full(count, np.inf)
    values[0] = 0.0
    parent = np.full(count, -1, dtype=np.int64)
    candidates: list[int] = []
    next_admission = 0
    n_pruned = 0
    prune = fitted.spec.superadditive
    doomed_from = np.full(count, np.inf)
    for end_idx in range(1, count):
        end_pos = positions[end_idx]
        while next_admission < count and positions[next_admission] + min_size <= end_pos:
            candidates.append(next_admission)
            next_admission += 1
        if prune:
            live = [s for s in candidates if doomed_from[s] > end_pos]
            n_pruned += len(candidates) - len(live)
            candidates = live
        best_value = np.inf
        best_idx = -1
        seg_costs = []
        for s in candidates:
            seg_cost = table.seg(s, end_idx)
            seg_costs.append(seg_cost)
            total = values[s] + seg_cost + penalty
            if total < best_value:
                best_value = total
                best_idx = s
            elif total == best_value and best_idx >= 0:
                # exact tie: keep the lexicographically smaller end sequence;
                # the shared end must take part, else a path that is a prefix
                # of another would win even when its next end comes later
                held = _prefix_path(parent, positions, best_idx) + (end_pos,)
                offered = _prefix_path(parent, positions, s) + (end_pos,)
                if offered < held:
                    best_idx = s
        values[end_idx] = best_value
        parent[end_idx] = best_idx
        if prune:
            for s, seg_cost in zip(candidates, seg_costs):
                if values[s] + seg_cost > best_value and not np.isfinite(doomed_from[s]):
                    doomed_from[s] = end_pos + min_size
    ends = _prefix_path(parent, positions, count - 1)
    contrast = table.total(ends)
    return _result(fitted, ends, contrast, evals_before, n_pruned=n_pruned)


def binseg(fitted, stop: StoppingRule, config: SearchConfig | None = None) -> DetectionResult:
    """Greedy top-down splitting: always take the split with the largest gain.

    The gain of splitting [a, b) at s is c(a, b) - c(a, s) - c(s, b).  Each
    unsplit segment's best split is computed once and cached.  Stops after
    n_bkps splits, when the best gain is at or below the penalty, or once the
    total cost fits the budget; ties go to the smallest split index.
    """
    if not isinstance(stop, StoppingRule):
        raise BadParamError(f"expected a StoppingRule, got {type(stop).__name__}")
    evals_before = fitted.eval_counter
    _, min_size, jump, table = _prepare(fitted, config)
    positions = table.positions
    terminal = len(positions) - 1
    ends_idx = [terminal]
    best_split: dict[tuple[int, int], tuple[float, int] | None] = {}

    def segment_best(a_idx: int, b_idx: int):
        key = (a_idx, b_idx)
        if key in best_split:
            return best_split[key]
        lo = int(np.searchsorted(positions, positions[a_idx] + min_size, side="left"))
        hi = int(np.searchsorted(positions, positions[b_idx] - min_size, side="right"))
        found = None
        if lo < hi:
            base = table.seg(a_idx, b_idx)
            for s in range(lo, hi):
                gain = base - (table.seg(a_idx, s) + table.seg(s, b_idx))
                if found is None or gain > found[0]:
                    found = (gain, s)
        best_split[key] = found
        return found

    def pick():
        chosen = None
        start_idx = 0
        for end_idx in ends_idx:
            info = segment_best(start_idx, end_idx)
            if info is not None and (chosen is None or info[0] > chosen[0]):
                chosen = info
            start_idx = end_idx
        return chosen

    def apply(split_idx: int) -> None:
        bisect.insort(ends_idx, split_idx)

    if stop.kind == "n_bkps":
        for _ in range(stop.n_bkps):
            chosen = pick()
            if chosen is None:
                raise InfeasibleError(
                    f"cannot place {stop.n_bkps} change points: no admissible split left"
                )
            apply(chosen[1])
    elif stop.kind == "penalty":
        while True:
            chosen = pick()
            if chosen is None or chosen[0] <= stop.penalty:
                break
            apply(chosen[1])
    else:
        while table.total(positions[i] for i in ends_idx) > stop.budget:
            chosen = pick()
            if chosen is None:
                raise BudgetUnreachableError(
                    f"total cost still above budget {stop.budget} with no admissible split left"
                )
            apply(chosen[1])
    ends = tuple(positions[i] for i in ends_idx)
    contrast = table.total(ends)
    return _result(fitted, ends, contrast, evals_before)


def _finest_grid(positions, min_size, terminal) -> list[int]:
    """Greedy leftmost packing of internal ends with gaps >= min_size."""
    picked = []
    last_pos = 0
    for idx in range(1, terminal):
        if positions[idx] - last_pos >= min_size:
            picked.append(idx)
            last_pos = positions[idx]
    return picked


def bottomup(fitted, stop: StoppingRule, config: SearchConfig | None = None) -> DetectionResult:
    """Greedy bottom-up merging from the finest admissible grid.

    Starts from the densest valid set of internal ends and repeatedly deletes
    the end whose removal raises the total cost least (smallest index on a
    tie).  Stops when n_bkps ends remain, when the smallest merge penalty
    exceeds the penalty value, or just before the total cost would exceed the
    budget.
    """
    if not isinstance(stop, StoppingRule):
        raise BadParamError(f"expected a StoppingRule, got {type(stop).__name__}")
    evals_before = fitted.eval_counter
    _, min_size, jump, table = _prepare(fitted, config)
    positions = table.positions
    terminal = len(positions) - 1
    internal = _finest_grid(positions, min_size, terminal)
    if stop.kind == "n_bkps" and stop.n_bkps > len(internal):
        raise InfeasibleError(
            f"{stop.n_bkps} change points requested but the finest grid has {len(internal)}"
        )
    merge_delta: dict[tuple[int, int, int], float] = {}

    def cheapest():
        best = None
        for pos_in_list, mid in enumerate(internal):
            left = internal[pos_in_list - 1] if pos_in_list > 0 else 0
            right = internal[pos_in_list + 1] if pos_in_list + 1 < len(internal) else terminal
            key = (left, mid, right)
            delta = merge_delta.get(key)
            if delta is None:
                delta = table.seg(left, right) - (table.seg(left, mid) + table.seg(mid, right))
                merge_delta[key] = delta
            if best is None or delta < best[0]:
                best = (delta, pos_in_list)
        return best

    def current_total() -> float:
        return table.total([positions[i] for i in internal] + [positions[terminal]])

    if stop.kind == "n_bkps":
        while len(internal) > stop.n_bkps:
            _, where = cheapest()
            internal.pop(where)
    elif stop.kind == "penalty":
        while internal:
            delta, where = cheapest()
            if delta > stop.penalty:
                break
            internal.pop(where)
    else:
        while internal:
            delta, where = cheapest()
            removed = internal[where]
            trial = internal[:where] + internal[where + 1 :]
            trial_total = table.total([positions[i] for i in trial] + [positions[terminal]])
            if trial_total > stop.budget:
                break
            internal = trial
    ends = tuple(positions[i] for i in internal) + (positions[terminal],)
    contrast = table.total(ends)
    return _result(fitted, ends, contrast, evals_before)


def window(fitted, stop: StoppingRule, config: SearchConfig | None = None) -> DetectionResult:
    """Sliding-window discrepancy: score each admissible t by how much a cut
    at t improves the cost of the window around it.

    Z(t) = c(t - w/2, t + w/2) - c(t - w/2, t) - c(t, t + w/2) over grid
    points with a half window on both sides.  Candidate change points are the
    local maxima of Z (plateaus keep their leftmost point); they are selected
    by decreasing score under a minimum separation of min_size.  Requires
    config.window_width; raises WindowTooLargeError when it exceeds the
    signal.
    """
    if not isinstance(stop, StoppingRule):
        raise BadParamError(f"expected a StoppingRule, got {type(stop).__name__}")
    evals_before = fitted.eval_counter
    cfg, min_size, jump, _table = _prepare(fitted, config)
    n_samples = fitted.n_samples
    width = cfg.window_width
    if width is None:
        raise BadParamError("window_width must be set for the window engine")
    if width > n_samples:
        raise WindowTooLargeError(f"window_width {width} exceeds signal length {n_samples}")
    if width < 2 * min_size:
        raise BadParamError(
            f"window_width {width} below twice the minimum segment length {min_size}"
        )
    half = width // 2
    memo: dict[tuple[int, int], float] = {}

    def seg_cost(a: int, b: int) -> float:
        key = (a, b)
        value = memo.get(key)
        if value is None:
            value = fitted.cost(a, b)
            memo[key] = value
        return value

    first = ((half + jump - 1) // jump) * jump
    grid = list(range(first, n_samples - half + 1, jump))
    scores = [
        seg_cost(t - half, t + half) - seg_cost(t - half, t) - seg_cost(t, t + half)
        for t in grid
    ]

    # local maxima with plateaus collapsing to their leftmost point
    peaks: list[tuple[int, float]] = []
    i = 0
    while i < len(grid):
        k = i
        while k + 1 < len(grid) and scores[k + 1] == scores[i]:
            k += 1
        left = scores[i - 1] if i > 0 else -np.inf
        right = scores[k + 1] if k + 1 < len(grid) else -np.inf
        if scores[i] > left and scores[i] > right:
            peaks.append((grid[i], scores[i]))
        i = k + 1
    ranked = sorted(peaks, key=lambda item: (-item[1], item[0]))

    def separated(t: int, chosen: list[int]) -> bool:
        return all(abs(t - u) >= min_size for u in chosen)

    chosen: list[int] = []
    if stop.kind == "n_bkps":
        for t, _score in ranked:
            if len(chosen) == stop.n_bkps:
                break
            if separated(t, chosen):
                chosen.append(t)
        if len(chosen) < stop.n_bkps:
            raise InfeasibleError(
                f"only {len(chosen)} separated score peaks, {stop.n_bkps} requested"
            )
    elif stop.kind == "penalty":
        for t, score in ranked:
            if score > stop.penalty and separated(t, chosen):
                chosen.append(t)
    else:

        def total_for(points: list[int]) -> float:
            value = 0.0
            start = 0
            for end in sorted(points) + [n_samples]:
                value += seg_cost(start, end)
                start = end
            return value

        total = total_for(chosen)
        for t, _score in ranked:
            if total <= stop.budget:
                break
            if separated(t, chosen):
                chosen.append(t)
                total = total_for(chosen)
        if total > stop.budget:
            raise BudgetUnreachableError(
                f"total cost above budget {stop.budget} even with every score peak used"
            )

    ends = tuple(sorted(chosen)) + (n_samples,)
    contrast = 0.0
    start = 0
    for end in ends:
        contrast += seg_cost(start, end)
        start = end
    return _result(fitted, ends, contrast, evals_before)
