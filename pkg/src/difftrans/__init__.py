"""Exact and numeric tools for differential transcendence of elliptic difference equations."""

__version__ = "0.1.0"

from .exactgroup import (Monomial, PointClass, RelationLattice, case_lattice, kernel_lattice,
                         member_with_exponents, mono_mul, point_eq)
from .divisors import Divisor, degree, div_add, pullback, sigma_translate, weight
from .thetafield import (ThetaQuotient, build_hypergeometric, tq_div, tq_divisor, tq_mul, tq_normalize,
                         tq_sigma)
from .criteria import (RiccatiCandidate, Verdict, constant_solution_eliminated, general_riccati_enumerator,
                       riccati_constraint_search, telescoper_obstruction, transcendence_verdict)

__all__ = [
    "Monomial", "PointClass", "RelationLattice", "case_lattice", "kernel_lattice", "member_with_exponents",
    "mono_mul", "point_eq", "Divisor", "degree", "div_add", "pullback", "sigma_translate", "weight",
    "ThetaQuotient", "build_hypergeometric", "tq_div", "tq_divisor", "tq_mul", "tq_normalize", "tq_sigma",
    "RiccatiCandidate", "Verdict", "constant_solution_eliminated", "general_riccati_enumerator",
    "riccati_constraint_search", "telescoper_obstruction", "transcendence_verdict",
]
