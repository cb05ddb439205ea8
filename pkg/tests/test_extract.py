import pytest

from lctkit import codegen, equiv, extract, hdl
from lctkit.model import Clocking, DONT_CARE, SignalRef
from lctkit.roundtrip import schema_of
from .util import load_fixture, random_lct


def _roundtrip(table, style=codegen.STYLE_IF):
    text = codegen.gen_unit(table, style=style)
    return extract.hdl_text_to_lct(text, *schema_of(table), name=table.name)


def test_mux4_reconstructs_row_for_row():
    table = load_fixture("mux4")
    back = _roundtrip(table)
    assert back.clocking is Clocking.COMBINATIONAL
    assert equiv.compare(table, back).verdict.equivalent
    # the disabled row comes back first, with its don't-care intact
    assert back.rows[0].inputs[1] is DONT_CARE


def test_regmux2_hold_cells_recovered():
    table = load_fixture("regmux2")
    back = _roundtrip(table)
    backpress = back.rows[1]
    assert backpress.outputs == (SignalRef("valid_out"),
                                 SignalRef("data_out"))
    assert equiv.compare(table, back).verdict.equivalent


def test_fsm4_both_styles_reconstruct():
    table = load_fixture("fsm4")
    for style in (codegen.STYLE_IF, codegen.STYLE_CASE):
        back = _roundtrip(table, style)
        assert equiv.compare(table, back).verdict.equivalent


def test_clock_port_excluded_from_schema_ports():
    back = _roundtrip(load_fixture("regmux2"))
    assert back.ports.get("clk") is None


def test_empty_guarded_branch_still_shadows():
    """A clocked branch that assigns nothing must survive extraction:
    it blocks later branches for the assignments it covers."""
    text = """\
module shadow (
  input wire clk,
  input wire [1:0] c,
  output reg [3:0] q
);
always @(posedge clk) begin
  if (c == 2'b11) begin
  end else if (c == 2'b01) begin
    q <= 4'd5;
  end
end
endmodule
"""
    table = extract.hdl_text_to_lct(text, ["c"], ["q"])
    assert table.rows[0].outputs == (SignalRef("q"),)
    assert len(table.rows) == 2


def test_ternary_continuous_assign_extracts():
    text = """\
module pick (
  input wire sel,
  input wire [7:0] a,
  input wire [7:0] b,
  output wire [7:0] y
);
assign y = sel ? a : b;
endmodule
"""
    table = extract.hdl_text_to_lct(text, ["sel"], ["y"])
    assert table.clocking is Clocking.COMBINATIONAL
    assert [row.outputs[0] for row in table.rows] == \
        [SignalRef("a"), SignalRef("b")]


def test_sequential_assignments_last_write_wins():
    text = """\
module seq (
  input wire en,
  output reg [1:0] q
);
always @* begin
  q = 2'd0;
  if (en == 1'b1) begin
    q = 2'd2;
  end
end
endmodule
"""
    from lctkit import sim
    from lctkit.model import BitVector
    table = extract.hdl_text_to_lct(text, ["en"], ["q"])
    on = sim.eval_comb(table, {"en": BitVector(1, 1)})
    off = sim.eval_comb(table, {"en": BitVector(1, 0)})
    assert on["q"] == sim.Known(BitVector(2, 2))
    assert off["q"] == sim.Known(BitVector(2, 0))


def test_unconstrained_columns_become_dont_care():
    table = load_fixture("fsm4")
    back = _roundtrip(table)
    reset_row = back.rows[0]
    assert reset_row.inputs[1] is DONT_CARE  # state unconstrained under reset


def test_extra_condition_columns_appended_when_needed():
    text = """\
module extra (
  input wire a,
  input wire b,
  output reg q
);
always @* begin
  q = 1'b0;
  if ((a | b) == 1'b1) begin
    q = 1'b1;
  end
end
endmodule
"""
    table = extract.hdl_text_to_lct(text, ["a"], ["q"])
    assert len(table.conditions) > 1


def test_assignment_to_unknown_signal_rejected():
    text = """\
module bad (
  input wire a,
  output reg q
);
always @* begin
  q = 1'b0;
end
endmodule
"""
    with pytest.raises(extract.ExtractError):
        extract.hdl_text_to_lct(text, ["a"], ["missing"])


def test_multiple_processes_need_explicit_selection():
    text = """\
module two (
  input wire clk,
  input wire a,
  output reg q,
  output reg r
);
always @(posedge clk) begin
  q <= a;
end
always @(posedge clk) begin
  r <= a;
end
endmodule
"""
    module = hdl.parse_hdl(text)
    with pytest.raises(extract.ExtractError):
        extract.hdl_to_lct(module, ["a"], ["q"])
    table = extract.hdl_to_lct(module, ["a"], ["q"], process_index=0)
    assert table.results == ("q",)


def test_random_tables_roundtrip_equivalent():
    for seed in range(25):
        table = random_lct(seed)
        back = _roundtrip(table)
        assert equiv.compare(table, back).verdict.equivalent, seed
