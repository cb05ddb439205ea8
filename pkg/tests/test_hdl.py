import pytest

from lctkit import codegen, hdl
from lctkit.model import Clocking, Direction
from .util import load_fixture

COMB = """\
module blend (
  input wire [3:0] a,
  input wire [3:0] b,
  input wire sel,
  output reg [3:0] y
);
always @* begin
  y = 4'd0;
  if (sel == 1'b1) begin
    y = a;
  end else begin
    y = b;
  end
end
endmodule
"""


def test_parse_ansi_header_and_ports():
    module = hdl.parse_hdl(COMB)
    assert module.name == "blend"
    assert [p.name for p in module.ports] == ["a", "b", "sel", "y"]
    assert module.port("a").width == 4
    assert module.port("a").direction is Direction.INPUT
    assert module.port("y").direction is Direction.OUTPUT


def test_parse_combinational_process():
    module = hdl.parse_hdl(COMB)
    assert len(module.processes) == 1
    process = module.processes[0]
    assert process.kind is Clocking.COMBINATIONAL
    assert process.clocks == []


CLOCKED = """\
module tick (
  input wire clk,
  input wire rst_n,
  output reg [1:0] q
);
always @(posedge clk) begin
  if (rst_n == 1'b0) begin
    q <= 2'd0;
  end else begin
    q <= 2'd3;
  end
end
endmodule
"""


def test_parse_clocked_process():
    process = hdl.parse_hdl(CLOCKED).processes[0]
    assert process.kind is Clocking.CLOCKED
    assert process.clocks == ["clk"]
    assert process.body[0].then[0].nonblocking


def test_parse_async_reset_sensitivity():
    text = CLOCKED.replace("@(posedge clk)",
                           "@(posedge clk or negedge rst_n)")
    process = hdl.parse_hdl(text).processes[0]
    assert process.kind is Clocking.CLOCKED
    assert process.resets == ["rst_n"]


def test_mixed_edge_and_level_sensitivity_rejected():
    text = CLOCKED.replace("@(posedge clk)", "@(posedge clk or rst_n)")
    with pytest.raises(hdl.HdlError):
        hdl.parse_hdl(text)


def test_parse_casez_with_wildcards():
    text = codegen.gen_unit(load_fixture("fsm4"), style=codegen.STYLE_CASE)
    module = hdl.parse_hdl(text)
    case = module.processes[0].body[0]
    assert isinstance(case, hdl.HCase)
    assert case.wildcard
    pattern = case.arms[0].patterns[0]
    assert isinstance(pattern, hdl.CasePattern)
    assert pattern.bits == "0????"


def test_casex_rejected():
    text = codegen.gen_unit(load_fixture("fsm4"), style=codegen.STYLE_CASE)
    with pytest.raises(hdl.HdlError):
        hdl.parse_hdl(text.replace("casez", "casex"))


def test_continuous_assign_parsed():
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
    module = hdl.parse_hdl(text)
    assert len(module.assigns) == 1
    assert module.assigns[0].lhs == "y"


def test_sized_literal_value_styles_agree():
    bin_text = CLOCKED
    dec_text = CLOCKED.replace("2'd3", "2'b11")
    a = hdl.parse_hdl(bin_text).processes[0].body[0]
    b = hdl.parse_hdl(dec_text).processes[0].body[0]
    assert a.els[0].rhs.value == b.els[0].rhs.value == 3


def test_comments_ignored():
    commented = COMB.replace("always @* begin",
                             "// a comment\n/* block\ncomment */\n"
                             "always @* begin")
    assert hdl.parse_hdl(commented).name == "blend"


def test_internal_reg_declaration_recorded():
    text = COMB.replace("always @*",
                        "reg [2:0] scratch;\nalways @*")
    module = hdl.parse_hdl(text)
    assert module.nets["scratch"] == 3


@pytest.mark.parametrize("construct", [
    "for (i = 0; i < 4; i = i + 1) begin end",
    "initial begin end",
    "generate endgenerate",
])
def test_unsupported_constructs_named_in_error(construct):
    text = COMB.replace("always @* begin",
                        construct + "\nalways @* begin")
    with pytest.raises(hdl.HdlError) as err:
        hdl.parse_hdl(text)
    assert "unsupported construct" in str(err.value)


def test_error_carries_line_number():
    bad = COMB.replace("y = a;", "y = ;")
    with pytest.raises(hdl.HdlError) as err:
        hdl.parse_hdl(bad)
    assert err.value.line is not None


def test_generated_code_always_parses_back():
    for name in ("mux4", "regmux2", "fsm4"):
        for style in (codegen.STYLE_IF, codegen.STYLE_CASE):
            text = codegen.gen_unit(load_fixture(name), style=style)
            assert hdl.parse_hdl(text).name == name
