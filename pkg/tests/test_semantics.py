import pytest

from offshore import corecalc as cc
from offshore.diagnostics import EvalError
from offshore.semantics import (Store, VBool, VInt, VLoc, VUnit, eval_corec, eval_corece,
                                eval_icaml)
from offshore.syntax import parse, parse_core

from conftest import EQ1


def ev(src):
    return eval_icaml(parse(src)).value


def test_eq1_in_icaml_is_42():
    assert ev(EQ1) == VInt(42)


def test_sum():
    assert ev("1 + 2") == VInt(3)


def test_nested_refs():
    r = eval_icaml(parse("let x = ref (ref 0) in !(!x)"))
    assert r.value == VInt(0)
    # inner cell first, then the outer cell pointing at it
    assert r.final_store.cells == [VInt(0), VLoc(0)]


def test_incr_and_unit():
    assert ev("let c = ref 1 in incr c; incr c; !c") == VInt(3)
    assert ev("let c = ref 1 in c := 5") == VUnit()
    assert ev("true") == VBool(True)


def test_let_binding_aliases_a_location():
    r = eval_icaml(parse("let x = ref 0 in let y = x in y"))
    assert r.value == VLoc(0)
    assert len(r.final_store.cells) == 1


def test_evaluation_is_left_to_right():
    src = "let c = ref 0 in (c := !c + 1; !c) + (c := !c + 10; !c)"
    assert ev(src) == VInt(1 + 11)


def test_naive_eq1_in_corec_is_1():
    e = cc.typecheck_corec(parse_core("int x = 0; int y = x; y := 41; x + 1"))
    assert eval_corec(e).value == VInt(1)


def test_self_assignment_is_a_no_op():
    r = eval_corec(cc.typecheck_corec(parse_core("int x = 0; x := x")))
    assert r.value == VUnit()
    assert r.final_store.cells == [VInt(0)]


def test_corec_declaration_value():
    assert eval_corec(parse_core("int x = 1 + 2; x + 3")).value == VInt(6)


def test_corece_running_example():
    r = eval_corece(parse_core("int x = 0; &x ← *&x + 1"))
    assert r.final_store.cells[0] == VInt(1)


def test_corece_extended_example():
    r = eval_corece(parse_core("int x = 0; const ptr int y = &x; y ← 41; &x ← *&x + 1"))
    assert r.final_store.cells[0] == VInt(42)


def test_deref_of_address_of():
    assert eval_corece(parse_core("int x = 5; *&x")).value == VInt(5)


def test_array_cell():
    r = eval_corece(parse_core("int z[1] = {7}; const ptr int x = z; x ← *x + 1; *x"))
    assert r.value == VInt(8)


def test_declaration_copies_the_initializer():
    src = "int x = 1; int y = x; y := 5; x"
    assert eval_corec(parse_core(src)).value == VInt(1)


def test_uninitialized_read_is_an_error():
    with pytest.raises(EvalError, match="uninitialized"):
        eval_corec(parse_core("int x; x + 1"))


def test_step_limit():
    with pytest.raises(EvalError, match="step limit"):
        eval_icaml(parse("1 + 2 + 3"), max_steps=3)


def test_initial_store_is_not_mutated():
    s = Store([VInt(0)])
    r = eval_icaml(parse("r := 9"), env={"r": VLoc(0)}, store=s)
    assert s.cells == [VInt(0)]
    assert r.final_store.cells == [VInt(9)]


def test_environment_maps_names_to_locations_in_c():
    s = Store([VInt(4)])
    assert eval_corec(parse_core("x := x + 1; x"), {"x": VLoc(0)}, s).value == VInt(5)


def test_bad_location():
    with pytest.raises(EvalError):
        Store().read(VLoc(3))
