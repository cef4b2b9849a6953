"""A parameterized pure type system kernel.

Type-checks and normalizes terms of STLC, System F, F-omega and CC,
translates CC into F-omega with dependency erasure, and ships
executable checks for the metatheory the translation relies on.
"""

from .syntax import (
    BOX,
    BUILTIN_SPECS,
    CC,
    FOMEGA,
    STAR,
    STLC,
    SYSTEM_F,
    App,
    BVar,
    Context,
    Expr,
    Lam,
    Pair,
    ParseError,
    Pi,
    Proj1,
    Proj2,
    PtsSpec,
    Sigma,
    SortE,
    Var,
    alpha_eq,
    close_binder,
    free_vars,
    open_binder,
    parse_context,
    parse_expr,
    print_context,
    print_expr,
    subst,
)
from .reduction import (
    DEFAULT_FUEL,
    UNDETERMINED,
    FuelExhausted,
    StepTrace,
    beta_eq,
    is_base,
    joinable,
    key_redex_of,
    normalize,
    reachable,
    reduce_key_redex,
    step_all,
    trace,
    whnf,
)
from .typecheck import (
    Classification,
    ErrorKind,
    GammaConstructor,
    GammaTerm,
    Kind,
    TypeCheckError,
    check_type,
    classify,
    infer_type,
    load_spec_file,
    parse_spec_text,
    resolve_spec,
    wf_context,
)
from .translate import (
    CheckEntry,
    TransEnv,
    canonical_inhabitant,
    check_reduction_preservation,
    check_subst_lemmas,
    check_translation,
    erase_kind,
    translate_context,
    translate_term,
    translate_type,
)
from .labeled import (
    LabeledContext,
    LabeledExpr,
    LApp,
    LLam,
    LPi,
    LSort,
    LVar,
    erase,
    label_context,
    label_term,
    labeled_infer,
    parse_labeled,
    print_labeled,
    tight_step_all,
)
from .corpus import Judgement, load_corpus_dir, load_judgement_file, parse_judgement, run_report

__all__ = [name for name in dir() if not name.startswith("_")]
