import pytest

from ptskit.syntax import CC, FOMEGA, STLC, SYSTEM_F, ParseError, print_expr
from ptskit.reduction import beta_eq
from ptskit.typecheck import TypeCheckError, check_type, infer_type
from ptskit.translate import (
    TransEnv,
    check_canonical_inhabitants,
    render_report,
    translate_term,
)
from ptskit.corpus import (
    Judgement,
    judgement_uses_sigma,
    load_corpus_dir,
    parse_judgement,
    run_report,
)

CCS = CC.with_sigma()


@pytest.fixture(scope="module")
def cc_corpus():
    return load_corpus_dir("corpus/cc")


def test_parse_judgement_sections():
    j = parse_judgement("ctx:\nA : *\n\nterm:\nA\n\ntype:\n*\n", name="demo")
    assert j.ctx.bindings[0][0] == "A"
    assert print_expr(j.term) == "A"
    assert print_expr(j.ty) == "*"


def test_parse_judgement_multiline_term():
    j = parse_judgement("ctx:\n\nterm:\n\\A:*.\n\\x:A. x\n")
    assert print_expr(j.term) == r"\A:*. \x:A. x"
    assert j.ty is None


def test_parse_judgement_requires_term():
    with pytest.raises(ParseError):
        parse_judgement("ctx:\nA : *\n")


def test_corpus_sigma_detection(cc_corpus):
    assert not any(judgement_uses_sigma(j) for j in cc_corpus)
    sigma = load_corpus_dir("corpus/sigma", sigma_enabled=True)
    assert all(judgement_uses_sigma(j) for j in sigma)


def test_spec_monotonicity_over_corpus(cc_corpus):
    # rule sets are nested, so typeability only grows along the chain
    chain = [STLC, SYSTEM_F, FOMEGA, CC]
    for j in cc_corpus:
        typeable = []
        for spec in chain:
            try:
                infer_type(spec, j.ctx, j.term)
                typeable.append(True)
            except TypeCheckError:
                typeable.append(False)
        assert typeable[-1], j.name  # everything here is CC-typeable
        first = typeable.index(True)
        assert all(typeable[first:]), (j.name, typeable)


def test_inference_agreement_over_corpus(cc_corpus):
    # inferred types are themselves well-formed and check back
    for j in cc_corpus:
        ty = infer_type(CC, j.ctx, j.term)
        check_type(CC, j.ctx, j.term, ty)
        if j.ty is not None:
            assert beta_eq(ty, j.ty) is True, j.name


def test_canonical_inhabitants_over_corpus(cc_corpus):
    for j in cc_corpus:
        env = TransEnv(j.ctx)
        translate_term(env, j.term)
        entries = check_canonical_inhabitants(env)
        assert all(e.ok for e in entries), (j.name, render_report(entries))


def test_run_report_flags_bad_judgements(tmp_path):
    (tmp_path / "broken.judg").write_text("ctx:\n\nterm:\nmissing var\n")
    judgements = load_corpus_dir(str(tmp_path))
    entries = run_report(judgements)
    assert any(not e.ok for e in entries)


def test_run_report_skips_translation_for_sigma():
    sigma = load_corpus_dir("corpus/sigma", sigma_enabled=True)
    entries = run_report(sigma, CCS)
    assert all(e.ok for e in entries)
    assert not any(e.name in ("term-translation", "simulation") for e in entries)
