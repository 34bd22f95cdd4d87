"""Return laws, disorder laws and the elementary functions built on them."""

from .custom_table import load_custom_table, save_custom_table
from .disorder import DisorderKind, DisorderLaw, annealed_exponent, h_m_curve, log_mgf
from .exceptions import (
    CopolymerLabError,
    CostGuardError,
    DomainError,
    HorizonError,
    LawFormatError,
    PreconditionError,
    UnsupportedModelError,
)
from .laws import (
    DEFAULT_N_MAX,
    LawKind,
    ReturnLaw,
    law_from_name,
    return_mass,
    return_tail,
)
from .spec import CouplingPoint, ModelSpec
from .special import LOG2, log_cosh, log_phi

__all__ = [
    "CopolymerLabError",
    "CostGuardError",
    "CouplingPoint",
    "DEFAULT_N_MAX",
    "DisorderKind",
    "DisorderLaw",
    "DomainError",
    "HorizonError",
    "LOG2",
    "LawFormatError",
    "LawKind",
    "ModelSpec",
    "PreconditionError",
    "ReturnLaw",
    "UnsupportedModelError",
    "annealed_exponent",
    "h_m_curve",
    "law_from_name",
    "load_custom_table",
    "log_cosh",
    "log_mgf",
    "log_phi",
    "return_mass",
    "return_tail",
    "save_custom_table",
]
