"""Search for pivot-move sequences between configurations.

States are configurations deduplicated up to translation (canonical
form); a goal is reached when the shapes coincide, optionally also
matching cell kinds. Breadth-first search guarantees minimal plans; A*
with an admissible heuristic returns plans of the same length while
expanding fewer states. Both run on the same successor generator, which
a Planner instance memoizes so that repeated queries over one state
space (parameter sweeps, test batteries) stay cheap.

The exact-position heuristic is an optimal assignment between cell
positions under the lattice step metric (each move relocates one cell by
one step, so the matching cost never overestimates). For
translation-invariant matching an assignment at any fixed alignment can
overestimate the true quotient distance, so the heuristic instead uses a
translation-minimized per-axis relaxation, which is admissible and
consistent on the quotient; see the test suite for the counterexample
that rules out the aligned-assignment variant.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import IllegalMove, ValidationError
from .kinematics import PivotMove, apply_move, legal_moves
from .lattice import (
    Configuration,
    Pos,
    add,
    is_connected,
    lattice_distance,
    sub,
)


class Algorithm(Enum):
    BFS = "bfs"
    ASTAR = "astar"


class PlanStatus(Enum):
    SUCCESS = "success"
    NO_PATH = "no_path"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class PlannerOptions:
    max_states: int = 1_000_000
    algorithm: Algorithm = Algorithm.ASTAR
    match_up_to_translation: bool = True
    strict_stability: bool = False
    kind_sensitive: bool = False

    def __post_init__(self) -> None:
        if self.max_states < 1:
            raise ValidationError("max_states must be at least 1")


@dataclass(frozen=True)
class SearchStats:
    states_expanded: int
    frontier_peak: int
    wall_time: float


@dataclass(frozen=True)
class Plan:
    """A move sequence, replayable from the start configuration it was
    planned for, plus the goal criterion it was planned against."""

    moves: tuple[PivotMove, ...]
    stats: SearchStats
    goal: Configuration | None = None
    match_up_to_translation: bool = True
    kind_sensitive: bool = False

    def __len__(self) -> int:
        return len(self.moves)


@dataclass(frozen=True)
class PlanResult:
    status: PlanStatus
    plan: Plan | None = None
    reason: str | None = None
    stats: SearchStats = field(
        default_factory=lambda: SearchStats(0, 0, 0.0)
    )

    @property
    def ok(self) -> bool:
        return self.status is PlanStatus.SUCCESS


# --------------------------------------------------------------------------
# heuristics
# --------------------------------------------------------------------------


def _assignment_bound(a: tuple[Pos, ...], b: tuple[Pos, ...]) -> int:
    cost = np.array(
        [[lattice_distance(p, q) for q in b] for p in a], dtype=np.int64
    )
    ri, ci = linear_sum_assignment(cost)
    return int(cost[ri, ci].sum())


def _axis_bound(sa: list[int], ga: list[int]) -> int:
    """min over integer shifts of the optimal 1D matching cost.

    Sorted-to-sorted matching is optimal on a line, and the best shift of
    the sorted differences is their median.
    """
    d = sorted(s - g for s, g in zip(sa, ga))
    med = d[len(d) // 2]
    return sum(abs(x - med) for x in d)


def _translation_bound(a: tuple[Pos, ...], b: tuple[Pos, ...]) -> int:
    bounds = [
        _axis_bound(sorted(p[i] for p in a), sorted(q[i] for q in b))
        for i in range(3)
    ]
    total = bounds[0] + bounds[1] + bounds[2]
    return max(bounds[0], bounds[1], bounds[2], -(total // -2))


def heuristic(
    c: Configuration,
    goal: Configuration,
    match_up_to_translation: bool = False,
) -> int:
    """Admissible lower bound on the number of moves from c to goal.

    Exact-position mode pairs the cells by a minimum-cost assignment
    under the lattice step metric. Translation-invariant mode minimizes a
    per-axis matching relaxation over all alignments instead, because no
    single alignment's assignment is a valid lower bound on the
    translation quotient. Zero exactly when the goal criterion already
    holds.
    """
    if len(c) == 0 or len(goal) == 0:
        raise ValidationError("configurations must be nonempty")
    if len(c) != len(goal):
        raise ValidationError(
            f"configurations differ in size: {len(c)} vs {len(goal)}"
        )
    if match_up_to_translation:
        return _translation_bound(c.positions, goal.positions)
    return _assignment_bound(c.positions, goal.positions)


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------

_State = tuple  # sorted tuple of positions, or of (position, kind value)


class Planner:
    """Reusable search engine; memoizes successor expansion per state.

    One instance assumes a fixed strict_stability setting and a fixed
    kind sensitivity (taken from the options it is built with); the
    translation quotient is applied per plan() call.
    """

    def __init__(self, opts: PlannerOptions | None = None):
        self.opts = opts or PlannerOptions()
        self._succ: dict[_State, list[tuple[PivotMove, _State, Pos]]] = {}

    # -- state encoding ----------------------------------------------------

    def _to_state(self, positions, kinds) -> _State:
        if self.opts.kind_sensitive:
            return tuple(sorted(zip(positions, kinds)))
        return tuple(sorted(positions))

    def _state_positions(self, state: _State) -> tuple[Pos, ...]:
        if self.opts.kind_sensitive:
            return tuple(p for p, _ in state)
        return state

    def _canonical(self, state: _State) -> tuple[_State, Pos]:
        """Translate so the smallest position is the origin; returns the
        canonical state and the shift that was subtracted."""
        if not self.opts.match_up_to_translation:
            return state, (0, 0, 0)
        pos = self._state_positions(state)
        m = min(pos)
        if m == (0, 0, 0):
            return state, m
        if self.opts.kind_sensitive:
            moved = tuple(sorted((sub(p, m), k) for (p, k) in state))
        else:
            moved = tuple(sorted(sub(p, m) for p in pos))
        return moved, m

    def _config_state(self, c: Configuration) -> _State:
        return self._to_state(
            c.positions, tuple(cell.kind.value for cell in c.cells)
        )

    # -- successor generation ----------------------------------------------

    def _successors(self, state: _State) -> list[tuple[PivotMove, _State, Pos]]:
        """Successors of a canonical state: (move in this frame,
        successor canonical state, canonicalization shift)."""
        cached = self._succ.get(state)
        if cached is not None:
            return cached
        if self.opts.kind_sensitive:
            config = Configuration.from_positions([p for p, _ in state])
            kind_of = dict(state)
        else:
            config = Configuration.from_positions(state)
            kind_of = None
        out = []
        for move in legal_moves(config, self.opts.strict_stability):
            if kind_of is None:
                raw: tuple = tuple(
                    move.destination if p == move.mover else p for p in state
                )
                nxt = tuple(sorted(raw))
            else:
                nxt = tuple(
                    sorted(
                        ((move.destination if p == move.mover else p), k)
                        for p, k in state
                    )
                )
            canon, shift = self._canonical(nxt)
            out.append((move, canon, shift))
        self._succ[state] = out
        return out

    # -- goal handling -------------------------------------------------------

    def _heuristic(self, state: _State, goal_pos: tuple[Pos, ...]) -> int:
        pos = self._state_positions(state)
        if self.opts.match_up_to_translation:
            return _translation_bound(pos, goal_pos)
        return _assignment_bound(pos, goal_pos)

    # -- public entry -------------------------------------------------------

    def plan(self, start: Configuration, goal: Configuration) -> PlanResult:
        t0 = time.perf_counter()
        if len(start) == 0 or len(goal) == 0:
            raise ValidationError("start and goal must be nonempty")
        if not is_connected(start):
            raise ValidationError("start configuration is not connected")
        if not is_connected(goal):
            raise ValidationError("goal configuration is not connected")
        if len(start) != len(goal):
            return PlanResult(
                PlanStatus.NO_PATH,
                reason="size_mismatch",
                stats=SearchStats(0, 0, time.perf_counter() - t0),
            )

        start_state, start_shift = self._canonical(self._config_state(start))
        goal_state, _ = self._canonical(self._config_state(goal))
        goal_pos = self._state_positions(goal_state)

        astar = self.opts.algorithm is Algorithm.ASTAR
        budget = self.opts.max_states

        # parent map: state -> (parent state, move in parent frame, shift)
        parents: dict[_State, tuple[_State, PivotMove, Pos] | None] = {
            start_state: None
        }
        expanded = 0
        peak = 1

        if astar:
            h_cache: dict[_State, int] = {}

            def h(s: _State) -> int:
                v = h_cache.get(s)
                if v is None:
                    v = self._heuristic(s, goal_pos)
                    h_cache[s] = v
                return v

            counter = 0
            best_g: dict[_State, int] = {start_state: 0}
            open_heap: list = [(h(start_state), 0, 0, start_state)]
            closed: set[_State] = set()
            while open_heap:
                f, negg, _, state = heapq.heappop(open_heap)
                if state in closed:
                    continue
                g = -negg
                closed.add(state)
                expanded += 1
                if state == goal_state:
                    return self._emit(
                        start, start_state, start_shift, goal, state,
                        parents, expanded, peak, t0,
                    )
                if expanded >= budget:
                    return PlanResult(
                        PlanStatus.BUDGET_EXHAUSTED,
                        reason=f"expanded {expanded} states",
                        stats=SearchStats(
                            expanded, peak, time.perf_counter() - t0
                        ),
                    )
                for move, nxt, shift in self._successors(state):
                    if nxt in closed:
                        continue
                    g2 = g + 1
                    old = best_g.get(nxt)
                    if old is not None and old <= g2:
                        continue
                    best_g[nxt] = g2
                    parents[nxt] = (state, move, shift)
                    counter += 1
                    heapq.heappush(open_heap, (g2 + h(nxt), -g2, counter, nxt))
                peak = max(peak, len(open_heap))
        else:
            queue: deque[_State] = deque([start_state])
            while queue:
                state = queue.popleft()
                expanded += 1
                if state == goal_state:
                    return self._emit(
                        start, start_state, start_shift, goal, state,
                        parents, expanded, peak, t0,
                    )
                if expanded >= budget:
                    return PlanResult(
                        PlanStatus.BUDGET_EXHAUSTED,
                        reason=f"expanded {expanded} states",
                        stats=SearchStats(
                            expanded, peak, time.perf_counter() - t0
                        ),
                    )
                for move, nxt, shift in self._successors(state):
                    if nxt not in parents:
                        parents[nxt] = (state, move, shift)
                        queue.append(nxt)
                peak = max(peak, len(queue))

        return PlanResult(
            PlanStatus.NO_PATH,
            reason="state space exhausted",
            stats=SearchStats(expanded, peak, time.perf_counter() - t0),
        )

    def _emit(
        self, start, start_state, start_shift, goal, goal_state,
        parents, expanded, peak, t0,
    ) -> PlanResult:
        # walk back to the start, collecting moves in canonical frames
        chain: list[tuple[PivotMove, Pos]] = []
        state = goal_state
        while True:
            entry = parents[state]
            if entry is None:
                break
            state, move, shift = entry
            chain.append((move, shift))
        chain.reverse()

        # re-express each move in the original, evolving frame: the offset
        # maps the canonical frame back onto the caller's coordinates
        offset = start_shift
        moves = []
        for move, shift in chain:
            moves.append(
                PivotMove(
                    add(move.mover, offset),
                    add(move.substrate, offset),
                    move.from_dir,
                    move.to_dir,
                )
            )
            offset = add(offset, shift)
        stats = SearchStats(expanded, peak, time.perf_counter() - t0)
        plan = Plan(
            tuple(moves),
            stats,
            goal=goal,
            match_up_to_translation=self.opts.match_up_to_translation,
            kind_sensitive=self.opts.kind_sensitive,
        )
        return PlanResult(PlanStatus.SUCCESS, plan=plan, stats=stats)


def plan(
    start: Configuration, goal: Configuration, opts: PlannerOptions | None = None
) -> PlanResult:
    """One-shot planning entry point; see Planner for batch queries."""
    return Planner(opts).plan(start, goal)


def goal_matches(
    c: Configuration,
    goal: Configuration,
    match_up_to_translation: bool = True,
    kind_sensitive: bool = False,
) -> bool:
    """Does a configuration meet the goal criterion?"""

    def key(cfg: Configuration):
        items = [
            (cell.pos, cell.kind.value if kind_sensitive else "")
            for cell in cfg.cells
        ]
        if match_up_to_translation:
            m = min(p for p, _ in items)
            items = [(sub(p, m), k) for p, k in items]
        return tuple(sorted(items))

    return len(c) == len(goal) and key(c) == key(goal)


def replay(
    start: Configuration,
    p: Plan,
    strict_stability: bool = False,
) -> Configuration:
    """Apply a plan's moves to the start, failing fast on illegal moves.

    Raises IllegalMove (with the offending index) on any illegal step and
    ValidationError when the final configuration misses the plan's
    recorded goal criterion.
    """
    current = start
    for i, move in enumerate(p.moves):
        try:
            current = apply_move(current, move, strict_stability)
        except IllegalMove as exc:
            exc.index = i
            raise
    if p.goal is not None and not goal_matches(
        current, p.goal, p.match_up_to_translation, p.kind_sensitive
    ):
        raise ValidationError("replayed configuration does not match the plan goal")
    return current
