"""Hill-climbing refinement of an assignment.

Two refiners over the single-student move neighborhood:

* sahc: apply the globally best move while its gain stays strictly positive.
* fmhc: pass-based refinement. A pass tentatively moves every student once
  (best gain first, uphill allowed, movers locked), then commits the prefix
  of the move sequence with the largest summed gain if that sum clears the
  gain threshold; otherwise the pass is discarded and refinement stops.

The gain of moving student x from team s to team d is f(before) - f(after),
computed incrementally from cached team sums, benefit counts, and group
benefit sums. A move that empties its source team drops that team from the
objective's normalizer and from the destination set; no move may create a
new team. After refinement, post-processing removes empty slots and merges
singleton teams into whichever team yields the lowest objective, repeating
the climb if a merge opened new improving moves, so the final assignment is
single-move stable and singleton-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (Assignment, Instance, ObjectiveBreakdown, TaskSpec,
                   compact_assignment)
from .errors import ValidationError


@dataclass(frozen=True)
class RefineConfig:
    """gain_epsilon: smallest pass gain fmhc still commits (must be > 0).
    max_passes: optional safety cap (fmhc passes / sahc accepted moves)."""

    gain_epsilon: float = 1e-4
    max_passes: int | None = None

    def __post_init__(self):
        if not self.gain_epsilon > 0.0:
            raise ValidationError("gain_epsilon must be positive")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValidationError("max_passes must be at least 1 when set")


@dataclass(frozen=True)
class Move:
    student: int
    source: int
    dest: int


class GainEntry(NamedTuple):
    move: Move
    gain: float


def _deficiency(sums: np.ndarray, requirements: np.ndarray) -> np.ndarray:
    """Per-team squared shortfall, summed over skills. sums: (..., k)."""
    shortfall = np.clip(requirements - sums, 0.0, None)
    return (shortfall ** 2).sum(axis=-1)


class SolverState:
    """Mutable assignment plus every cache the gain formulas need.

    Team slots are fixed at construction; a slot that empties goes inactive
    and never comes back (moves into empty slots are not generated). The
    exposed assignment() compacts the surviving slots.
    """

    def __init__(self, instance: Instance, spec: TaskSpec, b: np.ndarray,
                 team_of: np.ndarray, n_slots: int):
        self.inst = instance
        self.spec = spec
        self.b = b
        self.bf = np.ascontiguousarray(b, dtype=np.float64)
        self.team_of = np.ascontiguousarray(team_of, dtype=np.int64).copy()
        self.n_slots = int(n_slots)
        self._group_one_hot = np.zeros((instance.n, instance.m))
        self._group_one_hot[np.arange(instance.n), instance.groups] = 1.0
        self._rebuild()

    @classmethod
    def from_assignment(cls, instance: Instance, spec: TaskSpec,
                        b: np.ndarray, assignment: Assignment) -> "SolverState":
        return cls(instance, spec, b, assignment.team_of, assignment.n_teams)

    def _rebuild(self):
        inst, n, s = self.inst, self.inst.n, self.n_slots
        self.sizes = np.bincount(self.team_of, minlength=s).astype(np.int64)
        self.active = self.sizes > 0
        self.n_active = int(self.active.sum())
        self.sums = np.zeros((s, inst.k))
        np.add.at(self.sums, self.team_of, inst.skills)
        self.defic = np.where(
            self.active, _deficiency(self.sums, self.spec.requirements), 0.0)
        self.defic_total = float(self.defic.sum())

        membership = np.zeros((n, s))
        membership[np.arange(n), self.team_of] = 1.0
        # benefit_vs_team[i, l]: teammates-of-l that student i benefits from
        self.benefit_vs_team = self.bf @ membership
        # benefit_to_team[i, l, q]: group-q members of team l benefiting from i
        self.benefit_to_team = np.einsum(
            "ji,jl,jq->ilq", self.bf, membership, self._group_one_hot,
            optimize=True)

        own = self.benefit_vs_team[np.arange(n), self.team_of]
        mates = self.sizes[self.team_of] - 1
        self.ind = np.where(mates > 0, own / np.maximum(mates, 1), 0.0)
        self.ind_total = float(self.ind.sum())
        self.group_counts = np.bincount(inst.groups, minlength=inst.m)
        self.group_sums = np.bincount(
            inst.groups, weights=self.ind, minlength=inst.m)
        # own_by_group[l, q]: sum of benefit_vs_team[j, l] over team-l members
        # of group q
        self.own_by_group = np.zeros((s, inst.m))
        np.add.at(self.own_by_group, (self.team_of, inst.groups), own)

    def clone(self) -> "SolverState":
        other = object.__new__(SolverState)
        other.inst, other.spec, other.b, other.bf = (
            self.inst, self.spec, self.b, self.bf)
        other.n_slots = self.n_slots
        other._group_one_hot = self._group_one_hot
        for name in ("team_of", "sizes", "active", "sums", "defic",
                     "benefit_vs_team", "benefit_to_team", "ind",
                     "group_sums", "own_by_group"):
            setattr(other, name, getattr(self, name).copy())
        other.n_active = self.n_active
        other.defic_total = self.defic_total
        other.ind_total = self.ind_total
        other.group_counts = self.group_counts
        return other

    def objective(self) -> ObjectiveBreakdown:
        inst, spec = self.inst, self.spec
        x = self.defic_total / (self.n_active * inst.k)
        y = self.ind_total / inst.n
        z = float((self.group_sums / self.group_counts).var())
        return ObjectiveBreakdown(x=x, y=y, z=z, f=x - spec.gamma * y + spec.delta * z)

    def assignment(self) -> Assignment:
        return compact_assignment(self.team_of)

    def gain_matrix(self, locked: np.ndarray | None = None) -> np.ndarray:
        """(N, n_slots) gains for every candidate move; -inf where invalid.

        Invalid: the student's own team, inactive slots, locked students.
        """
        inst, spec = self.inst, self.spec
        n, s, m, k = inst.n, self.n_slots, inst.m, inst.k
        rows = np.arange(n)
        src = self.team_of
        n_src = self.sizes[src]
        own_vs_src = self.benefit_vs_team[rows, src]
        sizes_safe = np.maximum(self.sizes, 1)

        # mover's new benefit in every destination
        new_ind_mover = self.benefit_vs_team / sizes_safe
        d_mover = new_ind_mover - self.ind[:, None]

        # teammates left behind, split by group (independent of destination)
        left_base = self.own_by_group[src] - self._group_one_hot * own_vs_src[:, None]
        old_src = left_base / np.maximum(n_src - 1, 1)[:, None]
        to_src = self.benefit_to_team[rows, src]
        new_src = (left_base - to_src) / np.maximum(n_src - 2, 1)[:, None]
        src_delta = np.where(
            (n_src >= 3)[:, None], new_src - old_src,
            np.where((n_src == 2)[:, None], -old_src, 0.0))

        # destination teammates gaining the mover, split by group
        old_dest = self.own_by_group / np.maximum(self.sizes - 1, 1)[:, None]
        new_dest = (self.own_by_group[None] + self.benefit_to_team) \
            / sizes_safe[None, :, None]
        dest_delta = new_dest - old_dest[None]

        d_group = (dest_delta + src_delta[:, None, :]
                   + self._group_one_hot[:, None, :] * d_mover[:, :, None])
        new_group_sums = self.group_sums[None, None, :] + d_group
        new_gben = new_group_sums / self.group_counts[None, None, :]
        z_new = new_gben.var(axis=2)
        y_new = (self.ind_total + d_group.sum(axis=2)) / n

        empties = n_src == 1
        def_src_new = np.where(
            empties, 0.0,
            _deficiency(self.sums[src] - inst.skills, spec.requirements))
        def_dest_new = _deficiency(
            self.sums[None, :, :] + inst.skills[:, None, :], spec.requirements)
        defic_new = (self.defic_total - self.defic[src][:, None]
                     - self.defic[None, :] + def_src_new[:, None] + def_dest_new)
        teams_after = self.n_active - empties.astype(np.int64)
        x_new = defic_new / (teams_after[:, None] * k)

        f_new = x_new - spec.gamma * y_new + spec.delta * z_new
        gains = self.objective().f - f_new

        gains[:, ~self.active] = -np.inf
        gains[rows, src] = -np.inf
        if locked is not None:
            gains[locked, :] = -np.inf
        return gains

    def gain(self, student: int, dest: int) -> float:
        """Single-move gain, same caches, scalar arithmetic."""
        inst, spec = self.inst, self.spec
        src = int(self.team_of[student])
        if dest == src:
            raise ValidationError("self-moves have no gain")
        if not (0 <= dest < self.n_slots) or not self.active[dest]:
            raise ValidationError(f"destination team {dest} does not exist")
        n_src = int(self.sizes[src])
        n_dest = int(self.sizes[dest])
        g = int(self.inst.groups[student])

        d_group = np.zeros(inst.m)
        d_group[g] += self.benefit_vs_team[student, dest] / n_dest - self.ind[student]

        left_base = self.own_by_group[src].copy()
        left_base[g] -= self.benefit_vs_team[student, src]
        if n_src >= 3:
            d_group += ((left_base - self.benefit_to_team[student, src]) / (n_src - 2)
                        - left_base / (n_src - 1))
        elif n_src == 2:
            d_group -= left_base

        if n_dest >= 2:
            d_group -= self.own_by_group[dest] / (n_dest - 1)
        d_group += (self.own_by_group[dest]
                    + self.benefit_to_team[student, dest]) / n_dest

        y_new = (self.ind_total + d_group.sum()) / inst.n
        z_new = float(((self.group_sums + d_group) / self.group_counts).var())

        def_src_new = 0.0 if n_src == 1 else float(
            _deficiency(self.sums[src] - inst.skills[student], spec.requirements))
        def_dest_new = float(
            _deficiency(self.sums[dest] + inst.skills[student], spec.requirements))
        teams_after = self.n_active - (1 if n_src == 1 else 0)
        x_new = (self.defic_total - self.defic[src] - self.defic[dest]
                 + def_src_new + def_dest_new) / (teams_after * inst.k)

        f_new = x_new - spec.gamma * y_new + spec.delta * z_new
        return self.objective().f - f_new

    def apply(self, student: int, dest: int):
        """Move the student and refresh every cache in O(N + team sizes)."""
        inst = self.inst
        src = int(self.team_of[student])
        if dest == src:
            raise ValidationError("self-moves are not applicable")
        if not self.active[dest]:
            raise ValidationError(f"destination team {dest} does not exist")
        g = int(inst.groups[student])

        self.sums[src] -= inst.skills[student]
        self.sums[dest] += inst.skills[student]
        self.sizes[src] -= 1
        self.sizes[dest] += 1
        self.defic_total -= self.defic[src] + self.defic[dest]
        if self.sizes[src] == 0:
            self.active[src] = False
            self.n_active -= 1
            self.sums[src] = 0.0
            self.defic[src] = 0.0
        else:
            self.defic[src] = float(
                _deficiency(self.sums[src], self.spec.requirements))
        self.defic[dest] = float(
            _deficiency(self.sums[dest], self.spec.requirements))
        self.defic_total += self.defic[src] + self.defic[dest]

        self.benefit_vs_team[:, src] -= self.bf[:, student]
        self.benefit_vs_team[:, dest] += self.bf[:, student]
        self.benefit_to_team[:, src, g] -= self.bf[student, :]
        self.benefit_to_team[:, dest, g] += self.bf[student, :]
        self.team_of[student] = dest

        for slot in (src, dest):
            members = np.flatnonzero(self.team_of == slot)
            own = self.benefit_vs_team[members, slot]
            old = self.ind[members]
            if members.size >= 2:
                new = own / (members.size - 1)
            else:
                new = np.zeros(members.size)
            self.ind[members] = new
            delta = new - old
            self.ind_total += float(delta.sum())
            np.add.at(self.group_sums, inst.groups[members], delta)
            row = np.zeros(inst.m)
            np.add.at(row, inst.groups[members], own)
            self.own_by_group[slot] = row


def move_gain(state: SolverState, move: Move) -> float:
    """Objective reduction for a move; positive means improvement."""
    if int(state.team_of[move.student]) != move.source:
        raise ValidationError("move source does not match the current state")
    return state.gain(move.student, move.dest)


class MoveQueue:
    """Max-priority structure over the candidate-move gains.

    Array-backed: rebuild stores a gain matrix, pop-max returns the best
    live entry (ties: lower student index, then lower destination id, which
    is exactly row-major first occurrence), remove-by-student retires a row.
    ops counts touched entries so complexity assertions can read it.
    """

    def __init__(self):
        self._gains = None
        self._live = None
        self.ops = 0

    def __len__(self) -> int:
        return 0 if self._live is None else int(self._live.sum())

    def rebuild(self, gain_matrix: np.ndarray):
        self._gains = gain_matrix
        self._live = np.isfinite(gain_matrix)
        self.ops += int(self._live.sum())

    def pop_max(self) -> GainEntry | None:
        if self._live is None or not self._live.any():
            return None
        masked = np.where(self._live, self._gains, -np.inf)
        flat = int(np.argmax(masked))
        student, dest = divmod(flat, masked.shape[1])
        self._live[student, dest] = False
        self.ops += 1
        return GainEntry(Move(student=student, source=-1, dest=dest),
                         float(masked[student, dest]))

    def remove_student(self, student: int):
        if self._live is not None:
            self.ops += int(self._live[student].sum())
            self._live[student] = False

    def entries(self) -> list[tuple[int, int, float]]:
        """Live (student, dest, gain) triples, for invariant checks."""
        if self._live is None:
            return []
        out = []
        for student, dest in zip(*np.nonzero(self._live)):
            out.append((int(student), int(dest),
                        float(self._gains[student, dest])))
        return out


def _merge_singletons(state: SolverState) -> bool:
    """Move each singleton's student to the team minimizing the objective.

    Lowest singleton slot goes first; destination ties break toward the
    lower slot id. Returns whether anything changed. A single remaining
    team is left alone.
    """
    changed = False
    while state.n_active >= 2:
        single = np.flatnonzero(state.active & (state.sizes == 1))
        if single.size == 0:
            break
        slot = int(single[0])
        student = int(np.flatnonzero(state.team_of == slot)[0])
        best_dest, best_gain = -1, None
        for dest in np.flatnonzero(state.active):
            if dest == slot:
                continue
            gain = state.gain(student, int(dest))
            if best_gain is None or gain > best_gain:
                best_dest, best_gain = int(dest), gain
        state.apply(student, best_dest)
        changed = True
    return changed


def postprocess(instance: Instance, spec: TaskSpec, b: np.ndarray,
                assignment) -> Assignment:
    """Drop empty team ids, then merge singletons into their best team.

    assignment may be an Assignment or a raw team-label vector (labels may
    be sparse). With a lone team, or no singletons, the partition is
    returned unchanged apart from label compaction.
    """
    team_of = assignment.team_of if isinstance(assignment, Assignment) \
        else np.asarray(assignment, dtype=np.int64)
    compacted = compact_assignment(team_of)
    state = SolverState.from_assignment(instance, spec, b, compacted)
    _merge_singletons(state)
    return state.assignment()


def _climb(state: SolverState, queue: MoveQueue, budget: list,
           stats: dict | None) -> None:
    """Steepest-descent loop: apply the best move while strictly improving."""
    while budget[0] != 0:
        queue.rebuild(state.gain_matrix())
        if stats is not None:
            stats["iterations"] = stats.get("iterations", 0) + 1
        top = queue.pop_max()
        if top is None or top.gain <= 0.0:
            break
        state.apply(top.move.student, top.move.dest)
        budget[0] -= 1
        if stats is not None:
            stats["moves"] = stats.get("moves", 0) + 1


def sahc(instance: Instance, spec: TaskSpec, b: np.ndarray,
         initial: Assignment, config: RefineConfig | None = None,
         stats: dict | None = None) -> Assignment:
    """Steepest-ascent hill climbing (on a minimized objective).

    Climb to a single-move local minimum, merge any singleton teams, and
    resume climbing if a merge opened new improving moves; merges only ever
    shrink the team count, so this terminates.
    """
    config = config or RefineConfig()
    state = SolverState.from_assignment(instance, spec, b, initial)
    queue = MoveQueue()
    if stats is not None:
        stats.setdefault("iterations", 0)
        stats.setdefault("moves", 0)
    budget = [-1 if config.max_passes is None else config.max_passes]
    while True:
        _climb(state, queue, budget, stats)
        if budget[0] == 0 or not _merge_singletons(state):
            break
    if stats is not None:
        stats["queue_ops"] = queue.ops
    return state.assignment()


def _fmhc_pass(state: SolverState, config: RefineConfig,
               stats: dict | None) -> bool:
    """One pass: tentatively move every student, commit the best prefix.

    Mutates state only when the prefix gain clears gain_epsilon; otherwise
    the pre-pass assignment is kept and False is returned.
    """
    work = state.clone()
    locked = np.zeros(state.inst.n, dtype=bool)
    queue = MoveQueue()
    queue.rebuild(work.gain_matrix(locked))
    sequence = []
    while (top := queue.pop_max()) is not None:
        student, dest = top.move.student, top.move.dest
        locked[student] = True
        queue.remove_student(student)
        work.apply(student, dest)
        sequence.append((student, dest, top.gain))
        queue.rebuild(work.gain_matrix(locked))
    if stats is not None:
        stats["queue_ops"] = stats.get("queue_ops", 0) + queue.ops
    if not sequence:
        return False
    cumulative = np.cumsum([gain for (_, _, gain) in sequence])
    best = int(np.argmax(cumulative))  # first max = shortest prefix on ties
    if cumulative[best] <= config.gain_epsilon:
        return False
    for student, dest, _ in sequence[:best + 1]:
        state.apply(student, dest)
    return True


def fmhc(instance: Instance, spec: TaskSpec, b: np.ndarray,
         initial: Assignment, config: RefineConfig | None = None,
         stats: dict | None = None) -> Assignment:
    """Pass-based refinement with uphill moves and prefix commits."""
    config = config or RefineConfig()
    state = SolverState.from_assignment(instance, spec, b, initial)
    if stats is not None:
        stats.setdefault("passes", 0)
        stats.setdefault("queue_ops", 0)
    passes = 0
    capped = False
    while True:
        while True:
            if config.max_passes is not None and passes >= config.max_passes:
                capped = True
                break
            progressed = _fmhc_pass(state, config, stats)
            passes += 1
            if stats is not None:
                stats["passes"] = passes
            if not progressed:
                break
        if not _merge_singletons(state) or capped:
            break
    return state.assignment()
