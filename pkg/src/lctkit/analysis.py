"""
Static checks and table transformations: completeness, overlap/shadowing,
don't-care expansion, canonicalization, and synthetic FSM generation.

All enumeration respects first-match row priority and is bounded by an
explicit assignment limit.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .model import (
    BitVector,
    CaseRow,
    Clocking,
    Constant,
    DONT_CARE,
    DontCare,
    Direction,
    ExprHeader,
    Lct,
    LctError,
    Port,
    PortMap,
    SignalHeader,
    SignalRef,
)
from . import sim

DEFAULT_ENUM_LIMIT = 1 << 20


class EnumLimitError(LctError):
    """The control space or expansion exceeds the configured limit."""


@dataclass
class CoverageReport:
    """Completeness and overlap findings for one table."""
    uncovered: List[dict] = field(default_factory=list)
    shadowed_rows: List[int] = field(default_factory=list)
    conflicts: List[tuple] = field(default_factory=list)  # (i, j, witness)
    warnings: List[str] = field(default_factory=list)
    possibly_infeasible: bool = False

    def render(self) -> str:
        lines = []
        for assignment in self.uncovered:
            pairs = " ".join(f"{k}={v}" for k, v in assignment.items())
            note = "  # possibly infeasible" if self.possibly_infeasible else ""
            lines.append(f"uncovered: {pairs}{note}")
        for row in self.shadowed_rows:
            lines.append(f"shadowed: row {row}")
        for i, j, witness in self.conflicts:
            pairs = " ".join(f"{k}={v}" for k, v in witness.items())
            lines.append(f"overlap: rows {i} and {j} disagree at {pairs}")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def _check_space(table: Lct, enum_limit: int) -> None:
    size = sim.control_space_size(table)
    if size > enum_limit:
        raise EnumLimitError(
            f"control space of {size} assignments exceeds limit {enum_limit}")


def _reset_warning(table: Lct) -> Optional[str]:
    # Heuristic only: a clocked table normally pins an rst*/reset* signal
    # in some row; its absence is worth flagging but is not an error.
    if table.clocking is not Clocking.CLOCKED:
        return None
    reset_cols = [i for i, h in enumerate(table.conditions)
                  if isinstance(h, SignalHeader)
                  and h.name.lower().startswith(("rst", "reset"))]
    if not reset_cols:
        return "clocked table has no rst*/reset* condition column"
    for row in table.rows:
        if any(isinstance(row.inputs[i], Constant) for i in reset_cols):
            return None
    return "clocked table never pins its reset condition (missing reset row?)"


def check_completeness(table: Lct,
                       enum_limit: int = DEFAULT_ENUM_LIMIT) -> CoverageReport:
    """List every control assignment matched by no row.  Expression
    columns are enumerated as independent booleans, so some uncovered
    entries may be infeasible combinations."""
    _check_space(table, enum_limit)
    compiled = sim.compile_rows(table)
    report = CoverageReport()
    report.possibly_infeasible = any(
        isinstance(h, ExprHeader) for h in table.conditions)
    for assignment in sim.enumerate_assignments(table):
        if sim.first_match(compiled, assignment) is None:
            report.uncovered.append(sim.assignment_dict(table, assignment))
    warning = _reset_warning(table)
    if warning:
        report.warnings.append(warning)
    return report


def check_overlap(table: Lct,
                  enum_limit: int = DEFAULT_ENUM_LIMIT) -> CoverageReport:
    """Find shadowed rows and row pairs that overlap with differing
    symbolic outputs.  Overlaps are warnings: first-match priority
    resolves them deterministically."""
    _check_space(table, enum_limit)
    compiled = sim.compile_rows(table)
    claimed = [False] * len(table.rows)
    seen_conflicts = set()
    report = CoverageReport()
    for assignment in sim.enumerate_assignments(table):
        matching = [i for i, constraints in enumerate(compiled)
                    if sim.row_matches(constraints, assignment)]
        if not matching:
            continue
        claimed[matching[0]] = True
        if len(matching) > 1:
            outputs = {}
            for i in matching:
                outputs[i] = tuple(
                    sim.resolve_cell(table, name, cell)
                    for name, cell in zip(table.results,
                                          table.rows[i].outputs))
            for a, b in itertools.combinations(matching, 2):
                if (a, b) in seen_conflicts:
                    continue
                if outputs[a] != outputs[b]:
                    seen_conflicts.add((a, b))
                    report.conflicts.append(
                        (a, b, sim.assignment_dict(table, assignment)))
    report.shadowed_rows = [i for i, hit in enumerate(claimed) if not hit]
    return report


# ---------------------------------------------------------------------------
# Don't-care expansion

def expand_dont_cares(table: Lct, columns: Optional[Sequence[str]] = None,
                      enum_limit: int = DEFAULT_ENUM_LIMIT) -> Lct:
    """Replace X cells in the selected condition columns by enumerated
    rows, inserted in place of the original so priority is preserved."""
    keys = [h.key for h in table.conditions]
    selected = set(keys if columns is None else columns)
    unknown = selected - set(keys)
    if unknown:
        raise LctError(f"unknown condition columns: {sorted(unknown)}")

    widths = [table.condition_width(h) for h in table.conditions]
    new_rows = []
    for row in table.rows:
        expand_at = [i for i, cell in enumerate(row.inputs)
                     if isinstance(cell, DontCare) and keys[i] in selected]
        if not expand_at:
            new_rows.append(row)
            continue
        count = 1
        for i in expand_at:
            count <<= widths[i]
        if len(new_rows) + count > enum_limit:
            raise EnumLimitError(
                f"expansion exceeds {enum_limit} rows")
        for combo in itertools.product(
                *(range(1 << widths[i]) for i in expand_at)):
            cells = list(row.inputs)
            for i, value in zip(expand_at, combo):
                cells[i] = Constant(BitVector(widths[i], value))
            new_rows.append(CaseRow(tuple(cells), row.outputs,
                                    label=row.label, comment=row.comment))
    return Lct(name=table.name, clocking=table.clocking,
               conditions=table.conditions, results=table.results,
               rows=tuple(new_rows), ports=table.ports,
               feedback=table.feedback)


# ---------------------------------------------------------------------------
# Canonical form

def _cell_sort_key(cell):
    if isinstance(cell, Constant):
        return (0, cell.bv.value, "")
    if isinstance(cell, DontCare):
        return (1, 0, "")
    return (2, 0, cell.name)


def _all_hold(table: Lct, row: CaseRow) -> bool:
    return all(isinstance(cell, SignalRef) and cell.name == name
               for name, cell in zip(table.results, row.outputs))


def shadowed_row_indices(table: Lct,
                         enum_limit: int = DEFAULT_ENUM_LIMIT) -> List[int]:
    """Rows never chosen by first-match over the full control space."""
    _check_space(table, enum_limit)
    compiled = sim.compile_rows(table)
    claimed = [False] * len(table.rows)
    for assignment in sim.enumerate_assignments(table):
        index = sim.first_match(compiled, assignment)
        if index is not None:
            claimed[index] = True
    return [i for i, hit in enumerate(claimed) if not hit]


def _droppable_hold_rows(table: Lct) -> set:
    """Pure-hold rows of a clocked table that no later row overlaps.

    Dropping such a row preserves semantics: every assignment it claims
    becomes unmatched, which also holds every register.  A pure-hold row
    that a later row overlaps must stay: it shadows that row.
    """
    compiled = sim.compile_rows(table)
    hold_rows = {i for i, row in enumerate(table.rows)
                 if _all_hold(table, row)}
    blocked = set()
    for assignment in sim.enumerate_assignments(table):
        matching = [i for i, constraints in enumerate(compiled)
                    if sim.row_matches(constraints, assignment)]
        if matching and matching[0] in hold_rows and len(matching) > 1:
            blocked.add(matching[0])
    return hold_rows - blocked


def _has_overlap(table: Lct) -> bool:
    compiled = sim.compile_rows(table)
    for assignment in sim.enumerate_assignments(table):
        if sum(1 for constraints in compiled
               if sim.row_matches(constraints, assignment)) > 1:
            return True
    return False


def canonicalize(table: Lct,
                 enum_limit: int = DEFAULT_ENUM_LIMIT) -> Lct:
    """Deterministic normal form: comments and feedback stripped,
    shadowed rows and redundant pure-hold rows removed, clocked don't-care
    outputs rewritten as hold cells, expression headers rewritten
    canonically, columns sorted by name, rows sorted by input cells,
    ports sorted.  Permutation variants of a non-overlapping table share
    one canonical form.

    Rows are left in priority order when any two rows overlap: sorting
    them could conflate tables that differ only in overlap priority.
    """
    if table.clocking is Clocking.CLOCKED:
        # A clocked don't-care output leaves the register alone, which is
        # exactly a hold; normalize to the hold spelling.
        rows = tuple(
            CaseRow(row.inputs,
                    tuple(SignalRef(name) if isinstance(cell, DontCare)
                          else cell
                          for name, cell in zip(table.results, row.outputs)),
                    label=row.label, comment=row.comment)
            for row in table.rows)
        table = Lct(name=table.name, clocking=table.clocking,
                    conditions=table.conditions, results=table.results,
                    rows=rows, ports=table.ports, feedback=table.feedback)

    def with_rows(rows):
        return Lct(name=table.name, clocking=table.clocking,
                   conditions=table.conditions, results=table.results,
                   rows=tuple(rows), ports=table.ports,
                   feedback=table.feedback)

    sort_rows = True
    try:
        shadowed = set(shadowed_row_indices(table, enum_limit))
    except EnumLimitError:
        shadowed = set()
    rows = [row for i, row in enumerate(table.rows) if i not in shadowed]

    if table.clocking is Clocking.CLOCKED:
        try:
            _check_space(with_rows(rows), enum_limit)
            droppable = _droppable_hold_rows(with_rows(rows))
        except EnumLimitError:
            droppable = set()
        rows = [row for i, row in enumerate(rows) if i not in droppable]

    # Sorting overlapping rows could conflate tables that differ only in
    # priority, so decide from the pruned rows (keeps the form stable
    # under re-canonicalization).
    try:
        _check_space(table, enum_limit)
        sort_rows = not _has_overlap(with_rows(rows))
    except EnumLimitError:
        sort_rows = False

    cond_order = sorted(range(len(table.conditions)),
                        key=lambda i: table.conditions[i].key)
    res_order = sorted(range(len(table.results)),
                       key=lambda i: table.results[i])

    conditions = []
    for i in cond_order:
        header = table.conditions[i]
        if isinstance(header, ExprHeader):
            header = ExprHeader(header.canonical)
        conditions.append(header)
    results = tuple(table.results[i] for i in res_order)

    new_rows = []
    for row in rows:
        inputs = tuple(row.inputs[i] for i in cond_order)
        outputs = tuple(row.outputs[i] for i in res_order)
        new_rows.append(CaseRow(inputs, outputs))
    if sort_rows:
        new_rows.sort(
            key=lambda r: tuple(_cell_sort_key(c) for c in r.inputs))

    ports = tuple(sorted(table.ports.entries,
                         key=lambda p: (p.direction.value, p.name)))
    return Lct(name=table.name, clocking=table.clocking,
               conditions=tuple(conditions), results=results,
               rows=tuple(new_rows), ports=PortMap(ports), feedback=())


# ---------------------------------------------------------------------------
# Synthetic FSM generation

def generate_fsm(states: int, conds_per_state: int, outputs: int,
                 seed: int) -> Lct:
    """Build a seeded synthetic FSM table: one reset row, one hold row
    for the all-conditions-false case, and one transition row per
    (state, condition) pair.  The state count must be a power of two so
    the state encoding is fully used."""
    if states < 2 or states & (states - 1):
        raise LctError(f"state count must be a power of two >= 2, "
                       f"got {states}")
    if conds_per_state < 1 or outputs < 0:
        raise LctError("need at least one condition and outputs >= 0")
    width = states.bit_length() - 1
    rng = random.Random(seed)

    cond_names = [f"cond{i}" for i in range(conds_per_state)]
    out_names = [f"out{i}" for i in range(outputs)]
    ports = [Port(Direction.INPUT, "rst_n", 1),
             Port(Direction.INPUT, "state", width)]
    ports += [Port(Direction.INPUT, name, 1) for name in cond_names]
    ports.append(Port(Direction.OUTPUT, "next_state", width))
    ports += [Port(Direction.OUTPUT, name, 1) for name in out_names]

    conditions = tuple([SignalHeader("rst_n"), SignalHeader("state")] +
                       [SignalHeader(name) for name in cond_names])
    results = tuple(["next_state"] + out_names)

    def const(width_, value):
        return Constant(BitVector(width_, value))

    zero_outputs = tuple([const(width, 0)] +
                         [const(1, 0) for _ in out_names])
    rows = [CaseRow((const(1, 0),) + (DONT_CARE,) * (1 + conds_per_state),
                    zero_outputs, comment="Reset")]
    hold_outputs = tuple([SignalRef("state")] +
                         [SignalRef(name) for name in out_names])
    rows.append(CaseRow(
        (const(1, 1), DONT_CARE) + tuple(const(1, 0) for _ in cond_names),
        hold_outputs, comment="Hold"))
    for state in range(states):
        for cond in range(conds_per_state):
            pattern = tuple(const(1, 1 if i == cond else 0)
                            for i in range(conds_per_state))
            target = rng.randrange(states)
            outs = tuple([const(width, target)] +
                         [const(1, rng.randrange(2)) for _ in out_names])
            rows.append(CaseRow(
                (const(1, 1), const(width, state)) + pattern, outs,
                comment=f"S{state} cond{cond}"))

    return Lct(name=f"fsm_{states}s_{conds_per_state}c_{seed}",
               clocking=Clocking.CLOCKED, conditions=conditions,
               results=results, rows=tuple(rows), ports=PortMap(tuple(ports)),
               feedback=(("next_state", "state"),))
