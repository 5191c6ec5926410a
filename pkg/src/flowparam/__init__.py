"""Parametric flow representation of the massive phi^4 vertex functions in
four dimensions: explicit term construction, deformed-metric numerics, and
the large-parameter diagnostics behind the regulator-removal argument."""

from .evaluator import (EvalRequest, EvalResult, GrowthFit, ShellConfig,
                        ShellReport, bubble_oracle, continuity_scan,
                        domain_split_probe, evaluate_term, extrapolate_eps,
                        flow_derivative_onshell, growth_fit, loop_constant,
                        matching_constant, onshell_twopoint_value,
                        oracle_vertex_prediction, pinned_integrand_value,
                        predicted_growth_exponent, resonant_set_measure,
                        scan_momenta, vertex_value)
from .kinematics import (EpsMetricConfig, FourMomentum, ScaleWindow, eps_dot,
                         flowing_propagator, minkowski_dot, minkowski_sq,
                         p_sq_eps, propagator_derivative, renorm_point)
from .quadform import (ParamVector, QuadForm, decompose_scaling, gauss_reduce,
                       scale_params)
from .termbuilder import (MomentumPoly, ParametricTerm, RenormConditions,
                          ThetaConstraints, TwoPointInsertion,
                          build_gamma_terms, dump_terms, load_terms,
                          onshell_mass_constant)

__version__ = "0.1.0"

__all__ = [
    "EvalRequest", "EvalResult", "GrowthFit", "ShellConfig", "ShellReport",
    "bubble_oracle", "continuity_scan", "domain_split_probe", "evaluate_term",
    "extrapolate_eps", "flow_derivative_onshell", "growth_fit",
    "loop_constant", "matching_constant", "onshell_twopoint_value",
    "oracle_vertex_prediction", "pinned_integrand_value",
    "predicted_growth_exponent", "resonant_set_measure", "scan_momenta",
    "vertex_value",
    "EpsMetricConfig", "FourMomentum", "ScaleWindow", "eps_dot",
    "flowing_propagator", "minkowski_dot", "minkowski_sq", "p_sq_eps",
    "propagator_derivative", "renorm_point",
    "ParamVector", "QuadForm", "decompose_scaling", "gauss_reduce",
    "scale_params",
    "MomentumPoly", "ParametricTerm", "RenormConditions", "ThetaConstraints",
    "TwoPointInsertion", "build_gamma_terms", "dump_terms", "load_terms",
    "onshell_mass_constant",
    "__version__",
]
