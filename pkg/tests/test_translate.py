import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offshore import corecalc as cc
from offshore import icaml as ic
from offshore.base import INT
from offshore.corecalc import Mode, Ptr
from offshore.diagnostics import (DuplicateName, NonBindingRef, RestrictionViolation,
                                  Untranslatable)
from offshore.pipeline import compile_icaml, load
from offshore.semantics import VInt, eval_c, eval_corec, eval_corece, eval_icaml
from offshore.syntax import parse, parse_core
from offshore.testgen import GenConfig, generate
from offshore.translate import (FreshNames, PtrVariant, RefPolicy, Strategy, TransContext,
                                alpha_rename, is_lifted, lift_declarations, pointer_type,
                                translate, translate_extant, translate_final, translate_naive,
                                translate_ptr)

from conftest import EQ1, RUNNING


def show(src, strategy, lift=True, **kw):
    return cc.show(compile_icaml(load(src), strategy, lift=lift, **kw).target)


# naive

def test_naive_running_example():
    assert show(RUNNING, "naive") == "int x = 0; x := x + 1"


def test_naive_eq1_loses_the_alias():
    assert show(EQ1, "naive") == "int x = 0; int y = x; y := 41; x + 1"
    assert eval_corec(translate_naive(load(EQ1))).value == VInt(1)


@pytest.mark.parametrize("src", ["!(ref 0)", "let x = ref (ref 0) in !(!x)",
                                 "(let x = ref 0 in x) := 1"])
def test_naive_untranslatable(src):
    with pytest.raises(Untranslatable):
        translate_naive(load(src))


def test_translation_needs_types():
    with pytest.raises(ValueError):
        translate_naive(parse(RUNNING))


# extant

def test_extant_running_example():
    assert cc.show(translate_extant(load(RUNNING))) == "int x = 0; x := x + 1"


def test_extant_rejects_aliasing_let():
    with pytest.raises(RestrictionViolation) as info:
        translate_extant(load(EQ1))
    assert info.value.reason == RestrictionViolation.REF_LET


def test_extant_rejects_non_base_ref():
    with pytest.raises(RestrictionViolation) as info:
        translate_extant(load("let x = ref (ref 0) in !(!x)"))
    assert info.value.reason == RestrictionViolation.NON_BASE_REF


@pytest.mark.parametrize("src, code", [
    ("let u = () in 1", RestrictionViolation.UNIT_LET),
    ("!(ref 1)", RestrictionViolation.BARE_REF),
    ("let x = ref () in !x", RestrictionViolation.NON_BASE_REF),
])
def test_extant_reason_codes(src, code):
    with pytest.raises(RestrictionViolation) as info:
        translate_extant(load(src))
    assert code in info.value.codes


def test_extant_reports_every_violation():
    with pytest.raises(RestrictionViolation) as info:
        translate_extant(load("let u = () in let x = ref 0 in let y = x in !y"))
    assert info.value.codes == {"unit-let", "ref-let"}


# pointer translations

def test_array1_running_example():
    assert show(RUNNING, "ptr-array") == "int z[1] = {0}; const ptr int x = z; x ← *x + 1"


def test_array1_eq1():
    c = compile_icaml(load(EQ1), "ptr-array")
    assert cc.show(c.target) == (
        "int z[1] = {0}; const ptr int x = z; const ptr int y = x; y ← 41; *x + 1")
    assert eval_corece(c.target).value == VInt(42)


def test_alloca_running_example():
    assert show(RUNNING, "ptr-alloca") == "int z = 0; const ptr int x = &z; x ← *x + 1"


def test_ptr_fresh_names_avoid_program_names():
    e = load("let z = ref 1 in let z1 = ref 2 in !z + !z1")
    out = cc.show(translate_ptr(e, PtrVariant.ALLOCA))
    assert out == ("const ptr int z = (int z2 = 1; &z2); "
                   "const ptr int z1 = (int z3 = 2; &z3); *z + *z1")


def test_ptr_handles_bare_refs():
    e = load("!(ref 5) + 1")
    assert eval_corece(translate_ptr(e)).value == VInt(6)


# final

def test_final_running_example():
    assert show(RUNNING, "final") == "int x = 0; &x ← *&x + 1"


def test_final_extended_example():
    src = "let x = ref 0 in let y = x in y := 41; x := !x + 1"
    assert show(src, "final") == "int x = 0; const ptr int y = &x; y ← 41; &x ← *&x + 1"


def test_final_eq1_is_42():
    c = compile_icaml(load(EQ1), "final")
    assert eval_corece(c.target).value == VInt(42)


def test_final_plain_let_is_const():
    assert show("let a = 1 + 2 in a + a", "final") == "const int a = 1 + 2; a + a"


def test_final_inner_let_shadows_a_cell():
    e = load("let x = ref 1 in let x = 5 in x")
    out = translate_final(e)
    assert cc.show(out) == "int x = 1; const int x = 5; x"
    assert eval_corece(out).value == VInt(5)


def test_final_bare_ref_policy():
    e = load("!(ref 3)")
    with pytest.raises(NonBindingRef):
        translate_final(e)
    out = translate_final(e, ref_policy=RefPolicy.ALLOCA)
    assert cc.show(out) == "*(int z = 3; &z)"
    assert eval_corece(out).value == VInt(3)


def test_final_context_marks_free_cells():
    e = ic.typecheck_icaml(parse("c := !c + 1"), {"c": ic.Ref(INT)})
    out = translate_final(e, TransContext(mutable=frozenset({"c"})))
    assert cc.show(out) == "&c ← *&c + 1"


def test_final_preserves_types():
    e = load(EQ1)
    assert cc.typecheck_corece(translate_final(e)).ty == pointer_type(e.ty)
    assert pointer_type(ic.Ref(ic.Ref(INT))) == Ptr(Ptr(INT))


def test_dispatch():
    e = load(RUNNING)
    for s in Strategy:
        assert cc.typecheck(translate(e, s), s.target).ty is not None


def test_fresh_names():
    f = FreshNames({"z", "z2"})
    assert [f(), f(), f()] == ["z1", "z3", "z4"]


# alpha renaming

def test_rename_shadowed_cells():
    e = load("let x = ref 0 in let x = ref 1 in !x")
    r = alpha_rename(e)
    assert [n.name for n in ic.walk(r) if isinstance(n, ic.Let)] == ["x", "x_1"]
    assert eval_icaml(e).value == eval_icaml(r).value == VInt(1)


def test_rename_separates_inner_and_outer():
    e = load("let x = ref 0 in (let x = !x in x) + !x")
    r = alpha_rename(e)
    assert r.body.left.name == "x_1" and r.body.right.arg.name == "x"
    assert eval_icaml(r).value == VInt(0)


def test_rename_leaves_distinct_binders_alone():
    e = load(EQ1)
    assert alpha_rename(e) is e


def test_rename_avoids_reserved_names():
    r = alpha_rename(load("let int = 1 in int"), avoid={"int"})
    assert r.name == "int_1" and r.body.name == "int_1"


def test_rename_c_trees():
    e = parse_core("int x = 1; (int x = 2; x) + x")
    r = alpha_rename(e)
    assert cc.show(r) == "int x = 1; (int x_1 = 2; x_1) + x"


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_rename_preserves_meaning(seed):
    e = generate(GenConfig(max_depth=6, seed=seed))
    r = alpha_rename(e)
    binders = [n.name for n in ic.walk(r) if isinstance(n, ic.Let)]
    assert len(binders) == len(set(binders))
    assert eval_icaml(r).value == eval_icaml(e).value


# lifting

def test_lift_comma_shape():
    e = cc.typecheck_corec(parse_core("(int x = 1 + 2; x + 3) + 4"))
    lifted = lift_declarations(e)
    assert cc.show(lifted) == "int x; (x := 1 + 2; x + 3) + 4"
    assert eval_corec(lifted).value == eval_corec(e).value == VInt(10)


def test_lift_in_corece_uses_a_store():
    e = cc.typecheck_corece(parse_core("(const int x = 1 + 2; x + 3) + 4"))
    assert cc.show(lift_declarations(e)) == "int x; (&x ← 1 + 2; x + 3) + 4"


def test_lift_keeps_spine_initializers():
    e = translate_ptr(load(RUNNING))
    assert cc.show(e) == "const ptr int x = (int z[1] = {0}; z); x ← *x + 1"
    lifted = lift_declarations(e)
    assert cc.show(lifted) == "int z[1] = {0}; const ptr int x = z; x ← *x + 1"
    assert is_lifted(lifted) and not is_lifted(e)


def test_lift_nested_array_becomes_a_store():
    e = translate_ptr(load("1 + !(ref 2)"))
    lifted = lift_declarations(e)
    assert cc.show(lifted) == "int z[1]; 1 + *(z ← 2; z)"
    assert eval_corece(lifted).value == VInt(3)


def test_lift_is_a_fixpoint_on_lifted_programs():
    e = parse_core("int x = 0; const ptr int y = &x; y ← 41; &x ← *&x + 1")
    assert lift_declarations(e) == e


def test_lift_rejects_duplicate_binders():
    with pytest.raises(DuplicateName):
        lift_declarations(parse_core("(int x = 1; x) + (int x = 2; x)"))


def test_lift_mode_is_inferred():
    e = parse_core("(int x = 1; x) + 1")
    assert cc.show(lift_declarations(e)) == "int x; (x := 1; x) + 1"
    assert cc.show(lift_declarations(e, Mode.CORECE)) == "int x; (&x ← 1; x) + 1"


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), strategy=st.sampled_from(
    [Strategy.FINAL, Strategy.PTR_ARRAY, Strategy.PTR_ALLOCA]))
def test_lift_preserves_meaning_and_is_idempotent(seed, strategy):
    e = generate(GenConfig(max_depth=7, seed=seed, bare_ref_rate=0.2))
    c = compile_icaml(e, strategy, lift=False, ref_policy=RefPolicy.ALLOCA)
    once = lift_declarations(c.target, c.mode)
    assert is_lifted(once)
    assert lift_declarations(once, c.mode) == once
    assert eval_c(once, c.mode).value == eval_c(c.target, c.mode).value
