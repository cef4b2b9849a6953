import pytest

from ptskit.syntax import (
    BOX,
    CC,
    Context,
    FOMEGA,
    STAR,
    SortE,
    Var,
    parse_context,
    parse_expr,
    print_expr,
)
from ptskit.reduction import beta_eq
from ptskit.typecheck import check_type, infer_type, wf_context
from ptskit.translate import (
    ReservedNameError,
    TransEnv,
    canonical_inhabitant,
    check_canonical_inhabitants,
    check_reduction_preservation,
    check_subst_lemmas,
    check_translation,
    erase_kind,
    is_cc_kind,
    render_report,
    translate_context,
    translate_term,
    translate_type,
)

from generators import subst_instances, typed_pool_context, typed_terms


def P(text):
    return parse_expr(text)


def R(text):
    return parse_expr(text, allow_reserved=True)


def C(text):
    return parse_context(text)


def env_for(ctx_text=""):
    return TransEnv(C(ctx_text))


# ---------------------------------------------------------------------------
# The kind map


def test_erase_kind_examples():
    assert erase_kind(SortE(STAR)) == SortE(STAR)
    assert erase_kind(SortE(BOX)) == SortE(STAR)
    assert erase_kind(P("(x:*) -> *")) == P("* -> *")
    # dependency on a type-level domain is erased outright
    assert erase_kind(P("(x:N) -> *")) == SortE(STAR)
    assert erase_kind(P("(A:*) -> (x:A) -> *")) == P("* -> *")


def test_erase_kind_rejects_non_kinds():
    with pytest.raises(ValueError):
        erase_kind(Var("A"))
    with pytest.raises(ValueError):
        erase_kind(P("(x:*) -> x"))


def test_is_cc_kind():
    assert is_cc_kind(SortE(STAR))
    assert is_cc_kind(P("(x:*) -> *"))
    assert is_cc_kind(P("(x:N) -> *"))
    assert not is_cc_kind(SortE(BOX))
    assert not is_cc_kind(P("(x:*) -> x"))
    assert not is_cc_kind(Var("A"))


# ---------------------------------------------------------------------------
# The type translation


def test_translate_type_sorts_to_zero():
    assert translate_type(env_for(), SortE(STAR)) == Var("_0")


def test_translate_type_worked_shape_polymorphic_identity():
    # the doubled product: (x:*) -> x -> x becomes (x:*) -> _0 -> x -> x
    got = translate_type(env_for(), P("(x:*) -> x -> x"))
    assert got == R("(x:*) -> _0 -> x -> x"), print_expr(got)


def test_translate_type_worked_shape_dependent_arrow():
    got = translate_type(env_for("A : *"), P("A -> *"))
    assert got == R("A -> _0")


def test_translate_type_variable_clause():
    assert translate_type(env_for("A : *"), Var("A")) == Var("A")


def test_translate_type_drops_term_arguments():
    env = env_for("A : *\nP : A -> *\na : A")
    assert translate_type(env, P("P a")) == Var("P")


def test_translate_type_keeps_constructor_arguments():
    env = env_for("F : * -> *\nA : *")
    assert translate_type(env, P("F A")) == P("F A")


def test_translate_type_lambda_clauses():
    # kind-level binder is kept, term-level binder is dropped
    assert translate_type(env_for(), P(r"\A:*. A")) == P(r"\A:*. A")
    env = env_for("A : *")
    assert translate_type(env, P(r"\x:A. A")) == Var("A")


# ---------------------------------------------------------------------------
# Context translation


def test_translate_context_empty():
    tc = translate_context(Context())
    assert tc.bindings == (("_0", SortE(STAR)), ("_z", R("(x:*) -> x")))


def test_translate_context_kind_binding_is_doubled():
    tc = translate_context(C("A : *"))
    assert tc.bindings[2:] == (("A", SortE(STAR)), ("_w$A", Var("_0")))


def test_translate_context_type_binding_is_single():
    tc = translate_context(C("A : *\nx : A"))
    assert tc.bindings[4:] == (("x", Var("A")),)


def test_translate_context_is_fomega_well_formed():
    for text in ["", "A : *", "A : *\nx : A", "A : *\nP : A -> *\na : A\np : P a", "F : * -> *"]:
        wf_context(FOMEGA, translate_context(C(text)))


# ---------------------------------------------------------------------------
# Canonical inhabitants


def test_canonical_examples():
    env = env_for()
    assert canonical_inhabitant(env, SortE(STAR)) == Var("_0")
    assert canonical_inhabitant(env, Var("_0")) == R("_z _0")
    assert canonical_inhabitant(env, P("* -> *")) == R(r"\x:*. _0")


def test_canonical_inhabitants_typecheck():
    env = env_for("A : *")
    tctx = translate_context(C("A : *"))
    for b in [SortE(STAR), Var("_0"), P("* -> *"), Var("A"), R("A -> _0"), P("(* -> *) -> *")]:
        c = canonical_inhabitant(env, b)
        check_type(FOMEGA, tctx, c, b)


# ---------------------------------------------------------------------------
# Term translation


def test_translate_term_star():
    assert translate_term(env_for(), SortE(STAR)) == R("_z _0")


def test_translate_term_box_is_unreachable():
    with pytest.raises(ValueError):
        translate_term(env_for(), SortE(BOX))


def test_translate_term_variable_clauses():
    env = env_for("A : *\nx : A")
    assert translate_term(env, Var("A")) == Var("_w$A")  # kind-bound
    assert translate_term(env, Var("x")) == Var("x")  # type-bound


def test_translate_term_worked_shape_constructor_application():
    # <F A> = <F> [A] <A> with F a term of the polymorphic type
    env = env_for("F : (x:*) -> x -> x\nA : *")
    assert translate_term(env, P("F A")) == R("F A _w$A")


def test_translate_term_worked_shape_applied_lambda():
    # <(\x:A. B) a> = (\y:_0. \x:[A]. <B>) <A> <a> for types A, B and a term a
    env = env_for("A : *\nB : *\na : A")
    got = translate_term(env, P(r"(\x:A. B) a"))
    assert got == R(r"(\y:_0. \x:A. _w$B) _w$A a"), print_expr(got)


def test_translate_term_term_application_single():
    env = env_for("A : *\nf : A -> A\na : A")
    assert translate_term(env, P("f a")) == P("f a")


def test_translate_term_lambda_shape():
    # (\y:_0. \x:[A]. <b>) <A> for a type-level domain
    env = env_for("A : *")
    got = translate_term(env, P(r"\x:A. x"))
    assert got == R(r"(\y:_0. \x:A. x) _w$A")


def test_translate_term_kind_domain_lambda_shape():
    got = translate_term(env_for(), P(r"\A:*. \x:A. x"))
    assert got == R(r"(\y:_0. \A:*. \w:_0. (\y2:_0. \x:A. x) w) (_z _0)")


def test_translate_term_pi_subject():
    # a product as a subject becomes the c-function applied to both parts
    env = env_for("A : *")
    got = translate_term(env, P("A -> A"))
    assert got == R("_z (_0 -> _0 -> _0) _w$A _w$A"), print_expr(got)


def test_translate_term_dependent_pi_subject():
    # the codomain copy sees its binder replaced by a canonical inhabitant
    env = env_for("A : *\nP : A -> *")
    got = translate_term(env, P("(x:A) -> P x"))
    assert got == R("_z (_0 -> _0 -> _0) _w$A (_w$P (_z A))"), print_expr(got)


def test_translations_are_deterministic_up_to_alpha():
    env1 = env_for("A : *")
    env2 = env_for("A : *")
    t = P(r"\x:A. \y:A. x")
    assert translate_term(env1, t) == translate_term(env2, t)


def test_reserved_names_in_input_rejected():
    with pytest.raises(ReservedNameError):
        translate_term(env_for(), R("_0"))
    with pytest.raises(ReservedNameError):
        translate_type(env_for(), R("_w$A -> _0"))
    with pytest.raises(ReservedNameError):
        TransEnv(parse_context("_0 : *", allow_reserved=True))


def test_translation_rejects_sigma_forms():
    env = TransEnv(parse_context("A : *\nB : *\na : A\nb : B", sigma_enabled=True))
    pair = parse_expr("<a, b> : Sig x:A. B", sigma_enabled=True)
    with pytest.raises(ValueError):
        translate_term(env, pair)


# ---------------------------------------------------------------------------
# Soundness checks (the F-omega checker is the oracle)


def test_check_translation_examples():
    assert all(e.ok for e in check_translation(C("A : *\nx : A"), Var("x")))
    assert all(e.ok for e in check_translation(Context(), P(r"\A:*. \x:A. x")))
    assert all(e.ok for e in check_translation(Context(), SortE(STAR)))


def test_check_translation_star_judgement_shape():
    entries = check_translation(Context(), SortE(STAR))
    assert any("_z _0 : _0" in e.detail for e in entries)


def test_check_translation_report_lines_are_machine_grepable():
    entries = check_translation(Context(), P(r"\A:*. \x:A. x"))
    for line in render_report(entries).splitlines():
        assert line.startswith(("PASS ", "FAIL "))


def test_type_level_soundness_on_examples():
    # constructors land at the kind the kind map predicts
    cases = [
        ("", "(x:*) -> x -> x", STAR),
        ("A : *", "A -> *", BOX),
        ("", r"\A:*. A", None),
        ("A : *\nP : A -> *", "(x:A) -> P x", STAR),
    ]
    for ctx_text, text, _ in cases:
        ctx = C(ctx_text)
        a = P(text)
        ty = infer_type(CC, ctx, a)
        got = translate_type(TransEnv(ctx), a)
        check_type(FOMEGA, translate_context(ctx), got, erase_kind(ty))


def test_conversion_preservation():
    # beta-equal constructors translate to beta-equal types
    ctx = C("A : *")
    a1 = P(r"(\B:*. B -> B) A")
    a2 = P("A -> A")
    t1 = translate_type(TransEnv(ctx), a1)
    t2 = translate_type(TransEnv(ctx), a2)
    assert beta_eq(t1, t2) is True
    assert t1 != t2  # genuinely needed a reduction


def test_canonical_log_is_rechecked():
    # a product subject needs c at the function type and at the domain copy
    env = env_for("A : *")
    translate_term(env, P("A -> A"))
    entries = check_canonical_inhabitants(env)
    assert entries and all(e.ok for e in entries)


# ---------------------------------------------------------------------------
# Reduction preservation


def test_simulation_beta_step():
    entries = check_reduction_preservation(C("A : *\na : A"), P(r"(\x:A. x) a"))
    assert entries and all(e.ok for e in entries)


def test_simulation_annotation_step():
    entries = check_reduction_preservation(C("A : *\na : A"), P(r"\y:(\B:*. B) A. a"))
    assert entries and all(e.ok for e in entries)


def test_simulation_normal_form_is_vacuous():
    assert check_reduction_preservation(C("A : *"), Var("A")) == []


def test_simulation_type_level_step():
    entries = check_reduction_preservation(C("B : *"), P(r"(\F:* -> *. F B) (\A:*. A -> A)"))
    assert entries and all(e.ok for e in entries)


# ---------------------------------------------------------------------------
# Substitution lemmas


def test_subst_lemma_variable_clause():
    ctx = C("A : *\nX : *")
    entries = check_subst_lemmas(ctx, Var("X"), "X", Var("A"))
    assert all(e.ok for e in entries)


def test_subst_lemma_no_occurrence():
    ctx = C("A : *\nX : *")
    entries = check_subst_lemmas(ctx, P("A -> A"), "X", Var("A"))
    assert all(e.ok for e in entries)


def test_subst_lemma_with_redex_replacement():
    ctx = C("A : *\nN : *\nX : *")
    entries = check_subst_lemmas(ctx, P("X -> X"), "X", P(r"(\y:*. y) N"))
    assert all(e.ok for e in entries)


def test_subst_lemma_term_binding():
    ctx = C("A : *\nP : A -> *\nc : A\ny : A\nh : (x:A) -> P x")
    entries = check_subst_lemmas(ctx, P("h y"), "y", Var("c"))
    assert all(e.ok for e in entries)


def test_subst_lemma_rejects_bad_hypotheses():
    ctx = C("A : *\nX : *")
    entries = check_subst_lemmas(ctx, Var("X"), "nope", Var("A"))
    assert not entries[0].ok
    entries = check_subst_lemmas(ctx, Var("X"), "X", Var("X"))
    assert not entries[0].ok


def test_substitution_order_is_immaterial():
    # the two replacements in the product clause target distinct names,
    # so applying them in either order gives the same translated term
    from ptskit.syntax import subst
    from ptskit.translate import W_PREFIX

    ctx = C("A : *\nX : *")
    a = P(r"\v:X. v")
    b = Var("A")
    base = translate_term(TransEnv(ctx), a)
    tb_type = translate_type(TransEnv(ctx), b)
    tb_term = translate_term(TransEnv(ctx), b)
    one = subst(subst(base, W_PREFIX + "X", tb_term), "X", tb_type)
    two = subst(subst(base, "X", tb_type), W_PREFIX + "X", tb_term)
    assert one == two


def test_generated_subst_instances():
    for ctx, a, x, b in subst_instances(seed=5, count=20):
        entries = check_subst_lemmas(ctx, a, x, b)
        assert entries and all(e.ok for e in entries), render_report(entries)


# ---------------------------------------------------------------------------
# Generated corpus soundness


def test_translation_sound_on_generated_terms():
    ctx = typed_pool_context()
    for t in typed_terms(seed=21, count=40):
        entries = check_translation(ctx, t)
        assert entries and all(e.ok for e in entries), render_report(entries)
