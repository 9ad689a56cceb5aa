"""Finite semigroups, term functions, identification minors and term synthesis."""
from .errors import SgxError
from .functions import FiniteFunction, read_sgfn, write_sgfn
from .io import Catalog, dump_semigroup, load_semigroup
from .minors import (
    degree_lower_bound_probe,
    enumerate_imt_functions,
    exponent_vector,
    function_from_minors,
    has_imt,
    identification_minor,
    is_term_function,
)
from .semigroup import (
    FiniteSemigroup,
    Partition,
    adjoin_identity,
    adjoin_zero,
    build_free_nilpotent,
    congruence_closure,
    direct_product,
    from_table,
    nilpotency_profile,
    quotient_by_partition,
    rees_quotient,
    s_zero,
    zero_direct_union,
)
from .synthesis import synthesize, synthesize_term_4nilpotent, synthesize_term_nilpotent_free
from .terms import Term, eval_term, parse_term, term_to_function, terms_equivalent, word_function_closure

__version__ = "0.1.0"
