import logging

import pytest

from synrec.ast import (
    INT,
    POLYGEN,
    AdtType,
    FlexSwitch,
    FuncRef,
    Hole,
    walk,
)
from synrec.errors import ParseError, ResolveError
from synrec.parser import assert_resolution_total, load_library, parse_program
from synrec.prelude import prelude_text
from synrec.printer import pretty_print_program


def test_opcode_adt():
    p = parse_program("adt opcode{ AndOp{} OrOp{} LtOp{}}")
    (adt,) = p.adts
    assert adt.name == "opcode"
    assert [v.name for v in adt.variants] == ["AndOp", "OrOp", "LtOp"]
    assert all(v.fields == () for v in adt.variants)


def test_empty_adt_rejected():
    with pytest.raises(ParseError):
        parse_program("adt A{}")


def test_prelude_parses_to_three_polygens():
    p = parse_program(prelude_text())
    assert [f.name for f in p.functions] == ["recursiveReplacer", "rcons", "field"]
    assert all(f.kind == POLYGEN for f in p.functions)
    assert p.function("recursiveReplacer").type_params == ("T", "Q")
    assert p.function("rcons").type_params == ("T",)
    assert p.function("field").type_params == ("T", "S")


def test_prelude_shapes():
    p = parse_program(prelude_text())
    rr = p.function("recursiveReplacer")
    assert isinstance(rr.body, FlexSwitch)
    assert rr.body.scrutinee == "src"


def test_variant_field_types():
    p = parse_program("adt L { N {} C { int h; L t; } } int f(L l) { return 0; }")
    c = p.adts[0].variant("C")
    assert c.fields == (("h", INT), ("t", AdtType("L")))


def test_duplicate_function_rejected():
    with pytest.raises(ResolveError):
        parse_program("int f(int x) { return x; } int f(int y) { return y; }")


def test_duplicate_variant_rejected():
    with pytest.raises(ResolveError):
        parse_program("adt A { X {} } adt B { X {} }")


def test_unbound_identifier_rejected():
    with pytest.raises(ResolveError):
        parse_program("int f(int x) { return y; }")


def test_switch_scrutinee_must_be_variable():
    with pytest.raises((ParseError, ResolveError)):
        parse_program(
            "adt L { N {} } int f(L l) { switch (g(l)) { case N: return 0; } }"
        )


def test_function_passed_as_argument_resolves():
    p = parse_program(
        """
        adt L { N {} }
        int g(L x) { return 0; }
        int f(L l) { return h(l, g); }
        int h(L l, fun r) { return 1; }
        """
    )
    call = p.function("f").body
    assert isinstance(call.args[1], FuncRef)


def test_harness_flag_and_params():
    p = parse_program("adt L { N {} } harness void m(L l) { assert(1); }")
    (h,) = p.harnesses
    assert h.name == "m" and h.is_harness


def test_round_trip_simple():
    src = "int f(int x) { return x; }"
    p = parse_program(src)
    assert parse_program(pretty_print_program(p)) == p


def test_round_trip_corpus(lang_expected_text):
    p = parse_program(lang_expected_text)
    printed = pretty_print_program(p)
    assert parse_program(printed) == p
    # fixpoint: printing again is stable
    assert pretty_print_program(parse_program(printed)) == printed


def test_resolution_totality(lang_program):
    assert_resolution_total(lang_program)


def test_load_library_merges_prelude(lang_text):
    p = parse_program(lang_text)
    merged = load_library(p, prelude_text())
    assert merged.function("recursiveReplacer") is not None
    assert_resolution_total(merged)


def test_load_library_empty_is_identity(lang_expected_text):
    p = parse_program(lang_expected_text)
    assert load_library(p, "") == p


def test_user_shadows_library_with_warning(caplog):
    user = parse_program(
        """
        adt L { N {} }
        generator T field<T, S>(S e) { return (e.fields?)[0]; }
        harness void m(L l) { assert(1); }
        """
    )
    with caplog.at_level(logging.WARNING, logger="synrec"):
        merged = load_library(user, prelude_text())
    assert "shadows" in caplog.text
    body = merged.function("field").body
    # the user version indexes with 0, the library version with ??
    assert not any(isinstance(n, Hole) for n in walk(body))


def test_conflicting_adt_is_hard_error():
    user = parse_program("adt Pair { MkPair { int a; } } harness void m() { assert(1); }")
    with pytest.raises(ResolveError):
        load_library(user, "adt Pair { MkPair { int a; int b; } }")


def test_identical_adt_merges():
    user = parse_program("adt Pair { MkPair { int a; } } harness void m() { assert(1); }")
    merged = load_library(user, "adt Pair { MkPair { int a; } }")
    assert len([a for a in merged.adts if a.name == "Pair"]) == 1


def test_pscs_parse():
    p = parse_program(
        """
        adt L { N {} }
        generator T g<T>(L src) {
          switch (src) {
            case?: return new cons?(src.fields?, ??, choose(1, 2));
          }
        }
        """
    )
    body = p.function("g").body
    kinds = {type(n).__name__ for n in walk(body)}
    assert {"FlexSwitch", "UnknownCtor", "FieldsOf", "Hole", "Choice"} <= kinds


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_program("adt A { X {} }\nint f( { return 1; }")
    assert exc.value.span.line == 2


def test_unreachable_round_trips():
    src = "adt L { N {} } L f(L l) { return unreachable<L>; }"
    p = parse_program(src)
    assert parse_program(pretty_print_program(p)) == p
