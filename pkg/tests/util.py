"""Shared test helpers: fixture loading and seeded random table
generators."""

from __future__ import annotations

import os
import random

from lctkit.model import (
    BitVector,
    CaseRow,
    Clocking,
    Constant,
    DONT_CARE,
    Direction,
    ExprHeader,
    Lct,
    Port,
    PortMap,
    SignalHeader,
    SignalRef,
)
from lctkit import analysis, sim, tableio

TABLES_DIR = os.path.join(os.path.dirname(__file__), "tables")


def load_fixture(name: str) -> Lct:
    return tableio.load_unit(os.path.join(TABLES_DIR, f"{name}.manifest")).lct


def _const(width: int, value: int) -> Constant:
    return Constant(BitVector(width, value))


def random_lct(seed: int, clocked: bool = None,
               max_control_bits: int = 12) -> Lct:
    """A seeded random table: random condition widths, optional
    expression column, don't-cares, pass-through and hold cells.  May be
    incomplete and may contain overlapping rows."""
    rng = random.Random(seed)
    if clocked is None:
        clocked = rng.random() < 0.5

    n_cond = rng.randint(1, 4)
    widths = []
    remaining = max_control_bits
    for _ in range(n_cond):
        width = rng.randint(1, min(3, remaining - (n_cond - len(widths) - 1)))
        widths.append(width)
        remaining -= width
    use_expr = remaining >= 1 and rng.random() < 0.3

    ports = [Port(Direction.INPUT, f"c{i}", w) for i, w in enumerate(widths)]
    conditions = [SignalHeader(f"c{i}") for i in range(n_cond)]
    if use_expr:
        ports.append(Port(Direction.INPUT, "ea", 1))
        ports.append(Port(Direction.INPUT, "eb", 1))
        conditions.append(ExprHeader(rng.choice(
            ["ea & eb", "ea | eb", "ea ^ eb", "ea && !eb"])))
    n_data = rng.randint(0, 2)
    data_names = [f"d{i}" for i in range(n_data)]
    ports += [Port(Direction.INPUT, name, 8) for name in data_names]
    n_res = rng.randint(1, 3)
    res_specs = [(f"r{i}", 8 if rng.random() < 0.5 else rng.randint(1, 4))
                 for i in range(n_res)]
    ports += [Port(Direction.OUTPUT, name, w) for name, w in res_specs]

    def input_cell(width):
        if rng.random() < 0.3:
            return DONT_CARE
        return _const(width, rng.randrange(1 << width))

    def output_cell(name, width):
        roll = rng.random()
        if clocked and roll < 0.15:
            return SignalRef(name)  # hold
        if width == 8 and data_names and roll < 0.35:
            return SignalRef(rng.choice(data_names))
        if roll < 0.45:
            return DONT_CARE
        return _const(width, rng.randrange(1 << width))

    cell_widths = widths + ([1] if use_expr else [])
    rows = []
    for _ in range(rng.randint(1, 8)):
        inputs = tuple(input_cell(w) for w in cell_widths)
        outputs = tuple(output_cell(name, w) for name, w in res_specs)
        rows.append(CaseRow(inputs, outputs))

    return Lct(name=f"rand_{seed}",
               clocking=Clocking.CLOCKED if clocked
               else Clocking.COMBINATIONAL,
               conditions=tuple(conditions),
               results=tuple(name for name, _ in res_specs),
               rows=tuple(rows), ports=PortMap(tuple(ports)))


def random_disjoint_lct(seed: int, clocked: bool = False) -> Lct:
    """A seeded random table that is complete and non-overlapping: one
    row per control assignment, constant outputs only.  Canonical-form
    properties (permutation invariance, textual matching) rely on
    this shape."""
    rng = random.Random(seed)
    n_cond = rng.randint(1, 3)
    widths = [rng.randint(1, 2) for _ in range(n_cond)]
    ports = [Port(Direction.INPUT, f"c{i}", w) for i, w in enumerate(widths)]
    n_res = rng.randint(1, 2)
    res_specs = [(f"r{i}", rng.randint(1, 4)) for i in range(n_res)]
    ports += [Port(Direction.OUTPUT, name, w) for name, w in res_specs]

    assignments = [[]]
    for width in widths:
        assignments = [prefix + [v] for prefix in assignments
                       for v in range(1 << width)]
    rng.shuffle(assignments)
    rows = []
    for assignment in assignments:
        inputs = tuple(_const(w, v) for w, v in zip(widths, assignment))
        outputs = tuple(_const(w, rng.randrange(1 << w))
                        for _, w in res_specs)
        rows.append(CaseRow(inputs, outputs))

    return Lct(name=f"disjoint_{seed}",
               clocking=Clocking.CLOCKED if clocked
               else Clocking.COMBINATIONAL,
               conditions=tuple(SignalHeader(f"c{i}") for i in range(n_cond)),
               results=tuple(name for name, _ in res_specs),
               rows=tuple(rows), ports=PortMap(tuple(ports)))


def mutate_output(table: Lct, rng: random.Random):
    """Flip one constant output cell of a reachable row to a different
    value.  Returns (mutated table, row index, result name).  The table
    must have at least one reachable row with a constant output."""
    compiled = sim.compile_rows(table)
    claimed = set()
    for assignment in sim.enumerate_assignments(table):
        index = sim.first_match(compiled, assignment)
        if index is not None:
            claimed.add(index)
    candidates = [
        (i, j) for i in sorted(claimed)
        for j, cell in enumerate(table.rows[i].outputs)
        if isinstance(cell, Constant)]
    if not candidates:
        raise ValueError("no reachable constant output cell to mutate")
    row_idx, col_idx = rng.choice(candidates)
    cell = table.rows[row_idx].outputs[col_idx]
    width = cell.bv.width
    new_value = (cell.bv.value + rng.randrange(1, 1 << width)) % (1 << width)
    rows = list(table.rows)
    outputs = list(rows[row_idx].outputs)
    outputs[col_idx] = _const(width, new_value)
    rows[row_idx] = CaseRow(rows[row_idx].inputs, tuple(outputs),
                            label=rows[row_idx].label,
                            comment=rows[row_idx].comment)
    import dataclasses
    return (dataclasses.replace(table, rows=tuple(rows)),
            row_idx, table.results[col_idx])
