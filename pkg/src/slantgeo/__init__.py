"""Verification engine for slant-type submanifold geometry in flat R^(2n+1).

Parse a parametric immersion, compute the tangential/normal decomposition of
the ambient structure tensor, classify the submanifold by its slant
spectrum, and numerically verify the structural identities the framework
guarantees.
"""

from .ambient import metric_g, phi_apply, phi_matrix, verify_ambient_structure, xi_vector
from .decomp import (Classification, EigenError, SlantSpectrum, StructureOps, classify,
                     slant_spectrum, structure_ops, verify_declared_distributions,
                     verify_pointwise_identities)
from .connection import (covariant_ops_derivative, induced_nabla, lie_bracket,
                         normal_nabla, second_fundamental, shape_operator)
from .dsl import ImmersionSpec, SpecError, eval_constant_expr, eval_jet2, format_spec, parse_spec
from .immersion import (FramePoint, ImmersionError, frame_at, sample_points,
                        tangential_projector_jet)
from .jets import Jet2, JetDomainError
from .report import CheckReport, IdentityRecord, Tolerances
from .suites import SUITE_IDS, SuiteError, run_all, run_suite

__version__ = "0.1.0"

__all__ = [
    "CheckReport", "Classification", "EigenError", "FramePoint", "IdentityRecord",
    "ImmersionError", "ImmersionSpec", "Jet2", "JetDomainError", "SUITE_IDS",
    "SlantSpectrum", "SpecError", "StructureOps", "SuiteError", "Tolerances",
    "classify", "covariant_ops_derivative", "eval_constant_expr", "eval_jet2",
    "format_spec", "frame_at", "induced_nabla", "lie_bracket", "metric_g",
    "normal_nabla", "parse_spec", "phi_apply", "phi_matrix", "run_all", "run_suite",
    "sample_points", "second_fundamental", "shape_operator", "slant_spectrum",
    "structure_ops", "tangential_projector_jet", "verify_ambient_structure",
    "verify_declared_distributions", "verify_pointwise_identities", "xi_vector",
]
