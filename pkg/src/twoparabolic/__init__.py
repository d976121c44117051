"""Exact computations with two-parabolic subgroups of SL2(Z[1/p]).

The group generated by A = [[1,0],[1,1]] and Q_{r/p} = [[1,r/p],[0,1]] is
compared with the congruence subgroup of matrices whose diagonal is 1 and
upper-right entry 0 mod r: identity checks, coset enumeration, searches for
triangular relation words and constructive reduction to words.
"""

from ._accel import JIT_ENABLED, backend_name
from .arith import NotReducibleError, Rational, format_rational, p_valuation, parse_rational, reduce_mod
from .fpgroups import (
    ConjectureReport,
    CosetTable,
    Presentation,
    PresentationError,
    behr_mennicke,
    embed_delta,
    load_presentation,
    todd_coxeter,
    verify_conjecture,
)
from .identities import VerificationReport, catalog, verify, verify_all
from .mat2 import A, B, M5, GenWord, Mat2, Q, U, eval_word, membership, triangular_class
from .numtheory import (
    APSearchSpec,
    discrete_log,
    find_prime_in_ap,
    is_prime,
    jacobi,
    jordan2,
    mult_order,
    sl2_order,
)
from .reduction import (
    ArtinSearchFailure,
    Certificate,
    NotInSubgroupError,
    ReductionError,
    reduce_to_word,
    strong_witness_to_diagonal,
)
from .search import SearchBounds, Witness, a_seq, pell_q, pell_witness_check, search_witness

__version__ = "0.1.0"

__all__ = [
    "A",
    "APSearchSpec",
    "ArtinSearchFailure",
    "B",
    "Certificate",
    "ConjectureReport",
    "CosetTable",
    "GenWord",
    "JIT_ENABLED",
    "M5",
    "Mat2",
    "NotInSubgroupError",
    "NotReducibleError",
    "Presentation",
    "PresentationError",
    "Q",
    "Rational",
    "ReductionError",
    "SearchBounds",
    "U",
    "VerificationReport",
    "Witness",
    "a_seq",
    "backend_name",
    "behr_mennicke",
    "catalog",
    "discrete_log",
    "embed_delta",
    "eval_word",
    "find_prime_in_ap",
    "format_rational",
    "is_prime",
    "jacobi",
    "jordan2",
    "load_presentation",
    "membership",
    "mult_order",
    "p_valuation",
    "parse_rational",
    "pell_q",
    "pell_witness_check",
    "reduce_mod",
    "reduce_to_word",
    "search_witness",
    "sl2_order",
    "strong_witness_to_diagonal",
    "todd_coxeter",
    "triangular_class",
    "verify",
    "verify_all",
    "verify_conjecture",
]
