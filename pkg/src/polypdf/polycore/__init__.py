"""Polynomial forms and their calculus."""

from .polynomial import (
    Interval,
    Polynomial,
    add,
    antiderivative,
    as_interval,
    definite_integral,
    derivative,
    evaluate,
    moment_integral,
    multiply,
    scale,
)
from .roots import closed_form_roots, numeric_roots, real_roots_in, roots, sturm_chain, sturm_count
from .forms import (
    FactoredPolynomial,
    RationalExpansion,
    form1_to_form2,
    form2_recursive_integral,
    form2_to_form1,
    form2_to_form3,
    form3_definite_integral,
    form3_moment,
)
from .transforms import char_function, mgf

__all__ = [
    "Interval",
    "Polynomial",
    "FactoredPolynomial",
    "RationalExpansion",
    "add",
    "antiderivative",
    "as_interval",
    "char_function",
    "closed_form_roots",
    "definite_integral",
    "derivative",
    "evaluate",
    "form1_to_form2",
    "form2_recursive_integral",
    "form2_to_form1",
    "form2_to_form3",
    "form3_definite_integral",
    "form3_moment",
    "mgf",
    "moment_integral",
    "multiply",
    "numeric_roots",
    "real_roots_in",
    "roots",
    "scale",
    "sturm_chain",
    "sturm_count",
]
