"""Exact engine for formal exponential maps on graded coordinate charts."""

from .ring import (BASE, FIBER, FORM, ChartError, DegreeError, GradedChart,
                   Generator, ParseError, Series, frac, koszul_sign,
                   ring_morphism)
from .vecfield import (Derivation, canonical_delta, de_rham, eps_ht)
from .fexp import (ConsistencyError, Diffeo, FormalExpMap,
                   GrothendieckConnection, UnimodularityError, canonicalize,
                   check_flatness, fexp_from_grothendieck,
                   fexp_from_polynomial_exp, grothendieck_from_fexp,
                   transfer_diffeo, validate_fexp)
from .homotopy import (HomotopyData, build_zeta, cohomology_lift,
                       find_primitive, homotopy_from_connection, homotopy_h)
from .connection import (Connection, connection_from_fexp,
                         geodesic_taylor_oracle, hpt_complete,
                         nabla_superconnection)
from .qp import (LInftyPackage, QPStructure, check_cyclic, linearize_at_point,
                 validate_qp)

__all__ = [
    "BASE", "FORM", "FIBER", "ChartError", "DegreeError", "ParseError",
    "GradedChart", "Generator", "Series", "frac", "koszul_sign",
    "ring_morphism",
    "Derivation", "de_rham", "canonical_delta", "eps_ht",
    "ConsistencyError", "UnimodularityError", "FormalExpMap",
    "GrothendieckConnection", "Diffeo", "validate_fexp",
    "grothendieck_from_fexp", "fexp_from_grothendieck", "check_flatness",
    "canonicalize", "transfer_diffeo", "fexp_from_polynomial_exp",
    "HomotopyData", "build_zeta", "homotopy_from_connection", "homotopy_h",
    "cohomology_lift", "find_primitive",
    "Connection", "nabla_superconnection", "hpt_complete",
    "connection_from_fexp", "geodesic_taylor_oracle",
    "QPStructure", "LInftyPackage", "validate_qp", "linearize_at_point",
    "check_cyclic",
]
