"""
Semantic equivalence of two LCTs, decided by exhaustive enumeration of
the shared control space under first-match semantics.

Benign differences (row/column permutation, don't-care expansion,
numeric literal style, shadowed extra rows, signal-name aliases) all
collapse under this comparison without per-case rules.  Data inputs are
compared as opaque tokens: two tables agree only if they pass through
the same input under the same control assignment.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from . import analysis, expr as ex, sim, tableio
from .model import (
    CaseRow,
    Clocking,
    Constant,
    DontCare,
    ExprHeader,
    Lct,
    LctError,
    Port,
    PortMap,
    SignalHeader,
    SignalRef,
)


class AlignError(LctError):
    """Column/port sets cannot be made to correspond."""


class CompareError(LctError):
    """Tables are not comparable (clocking mismatch, space too large)."""


class Verdict(Enum):
    TEXTUALLY_IDENTICAL = "textually-identical"
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not-equivalent"

    @property
    def equivalent(self) -> bool:
        return self is not Verdict.NOT_EQUIVALENT


@dataclass(frozen=True)
class Counterexample:
    assignment: dict
    output: str
    value_a: str
    value_b: str

    def __str__(self):
        pairs = " ".join(f"{k}={v}" for k, v in self.assignment.items())
        return (f"at {pairs}: {self.output} = {self.value_a} "
                f"vs {self.value_b}")


@dataclass
class EquivResult:
    verdict: Verdict
    counterexample: Optional[Counterexample] = None
    normalizations: List[str] = field(default_factory=list)


def parse_aliases(text: str) -> Dict[str, str]:
    """Alias files map names in A to names in B, one 'a_name = b_name'
    per line."""
    aliases: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise AlignError(f"alias line {lineno}: expected a_name = b_name")
        a, b = (part.strip() for part in line.split("=", 1))
        aliases[a] = b
    return aliases


def _rename_tree(node, renames: Mapping[str, str]):
    if isinstance(node, ex.Ident):
        return ex.Ident(renames.get(node.name, node.name))
    if isinstance(node, ex.Num):
        return node
    if isinstance(node, ex.Unary):
        return ex.Unary(node.op, _rename_tree(node.arg, renames))
    if isinstance(node, ex.Binary):
        return ex.Binary(node.op, _rename_tree(node.lhs, renames),
                         _rename_tree(node.rhs, renames))
    if isinstance(node, ex.Ternary):
        return ex.Ternary(_rename_tree(node.cond, renames),
                          _rename_tree(node.then, renames),
                          _rename_tree(node.other, renames))
    if isinstance(node, ex.Concat):
        return ex.Concat(tuple(_rename_tree(p, renames)
                               for p in node.parts))
    raise AlignError(f"cannot rename {node!r}")


def _match_ports(a: Lct, b: Lct, aliases: Mapping[str, str]) -> Dict[str, str]:
    """Map each port name in b to its counterpart in a."""
    used_b = set()
    renames: Dict[str, str] = {}
    b_by_name = {p.name: p for p in b.ports.entries}
    b_by_fold = {}
    for p in b.ports.entries:
        b_by_fold.setdefault(p.name.lower(), p.name)
    if len(set(aliases.values())) != len(aliases):
        raise AlignError("alias map is not bijective")
    for port in a.ports.entries:
        candidates = [port.name, aliases.get(port.name),
                      b_by_fold.get(port.name.lower())]
        target = next((c for c in candidates
                       if c in b_by_name and c not in used_b), None)
        if target is None:
            raise AlignError(f"no counterpart for port {port.name}")
        other = b_by_name[target]
        if other.width != port.width:
            raise AlignError(
                f"port {port.name}: width {port.width} vs {other.width}")
        if other.direction != port.direction:
            raise AlignError(f"port {port.name}: direction mismatch")
        used_b.add(target)
        renames[target] = port.name
    leftover = set(b_by_name) - used_b
    if leftover:
        raise AlignError(f"unmatched ports in second table: "
                         f"{sorted(leftover)}")
    return renames


def _rename_table(table: Lct, renames: Mapping[str, str]) -> Lct:
    def rename_cell(cell, own: Optional[str]):
        if isinstance(cell, SignalRef):
            return SignalRef(renames.get(cell.name, cell.name))
        return cell

    conditions = []
    for header in table.conditions:
        if isinstance(header, SignalHeader):
            conditions.append(
                SignalHeader(renames.get(header.name, header.name)))
        else:
            conditions.append(
                ExprHeader(ex.render(_rename_tree(header.tree, renames))))
    results = tuple(renames.get(name, name) for name in table.results)
    rows = tuple(
        CaseRow(row.inputs,
                tuple(rename_cell(c, n)
                      for n, c in zip(results, row.outputs)),
                label=row.label, comment=row.comment)
        for row in table.rows)
    ports = PortMap(tuple(
        Port(p.direction, renames.get(p.name, p.name), p.width)
        for p in table.ports.entries))
    feedback = tuple((renames.get(r, r), renames.get(c, c))
                     for r, c in table.feedback)
    return dataclasses.replace(table, conditions=tuple(conditions),
                               results=results, rows=rows, ports=ports,
                               feedback=feedback)


def align(a: Lct, b: Lct,
          aliases: Optional[Mapping[str, str]] = None) -> Tuple[Lct, Lct]:
    """Rename b into a's namespace (exact names, then aliases, then
    case-insensitive matches) and reorder its columns to a's order."""
    renames = _match_ports(a, b, aliases or {})
    renamed = _rename_table(b, renames)

    b_keys = {h.key: i for i, h in enumerate(renamed.conditions)}
    cond_order = []
    for header in a.conditions:
        if header.key not in b_keys:
            raise AlignError(f"no counterpart for condition column "
                             f"{header.key}")
        cond_order.append(b_keys[header.key])
    if len(set(cond_order)) != len(renamed.conditions):
        extra = [h.key for i, h in enumerate(renamed.conditions)
                 if i not in set(cond_order)]
        raise AlignError(f"unmatched condition columns in second table: "
                         f"{extra}")

    b_results = {name: i for i, name in enumerate(renamed.results)}
    res_order = []
    for name in a.results:
        if name not in b_results:
            raise AlignError(f"no counterpart for result column {name}")
        res_order.append(b_results[name])
    if len(set(res_order)) != len(renamed.results):
        extra = [n for i, n in enumerate(renamed.results)
                 if i not in set(res_order)]
        raise AlignError(f"unmatched result columns in second table: "
                         f"{extra}")

    rows = tuple(
        CaseRow(tuple(row.inputs[i] for i in cond_order),
                tuple(row.outputs[i] for i in res_order),
                label=row.label, comment=row.comment)
        for row in renamed.rows)
    reordered = dataclasses.replace(
        renamed,
        conditions=tuple(renamed.conditions[i] for i in cond_order),
        results=tuple(renamed.results[i] for i in res_order),
        rows=rows)
    return a, reordered


def textual_match(a: Lct, b: Lct,
                  enum_limit: int = analysis.DEFAULT_ENUM_LIMIT) -> bool:
    """True iff the canonical serializations are byte-identical (unit
    names excluded)."""
    docs = []
    for table in (a, b):
        canonical = analysis.canonicalize(table, enum_limit)
        canonical = dataclasses.replace(canonical, name="unit")
        docs.append(tableio.serialize_unit_doc(canonical))
    return docs[0] == docs[1]


def _values_agree(va, vb) -> bool:
    # Unspecified behavior constrains nothing: a table that leaves an
    # assignment undefined agrees with any implementation choice there.
    if isinstance(va, sim.Unspecified) or isinstance(vb, sim.Unspecified):
        return True
    return va == vb


def compare(a: Lct, b: Lct, aliases: Optional[Mapping[str, str]] = None,
            enum_limit: int = analysis.DEFAULT_ENUM_LIMIT) -> EquivResult:
    """Decide equivalence by enumerating every control assignment and
    comparing symbolic outputs (holds and tokens included)."""
    if a.clocking is not b.clocking:
        raise CompareError(
            f"clocking mismatch: {a.clocking.value} vs {b.clocking.value}")
    normalizations = []
    a, b = align(a, b, aliases)
    if aliases:
        normalizations.append("alias-renaming")
    normalizations.append("canonicalization")

    if textual_match(a, b, enum_limit):
        return EquivResult(Verdict.TEXTUALLY_IDENTICAL,
                           normalizations=normalizations)

    size = sim.control_space_size(a)
    if size > enum_limit:
        raise CompareError(
            f"control space of {size} assignments exceeds limit {enum_limit}")
    normalizations.extend(["semantic-enumeration", "literal-normalization"])

    compiled_a = sim.compile_rows(a)
    compiled_b = sim.compile_rows(b)
    for assignment in sim.enumerate_assignments(a):
        outs_a = sim.symbolic_outputs(a, assignment, compiled_a)
        outs_b = sim.symbolic_outputs(b, assignment, compiled_b)
        for name, va, vb in zip(a.results, outs_a, outs_b):
            if not _values_agree(va, vb):
                counterexample = Counterexample(
                    sim.assignment_dict(a, assignment), name,
                    str(va), str(vb))
                return EquivResult(Verdict.NOT_EQUIVALENT, counterexample,
                                   normalizations)
    return EquivResult(Verdict.EQUIVALENT, normalizations=normalizations)
