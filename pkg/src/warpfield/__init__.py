"""Numerical tension-field hierarchy for maps between chart manifolds."""

from .catalog import (
    SCENARIOS,
    Scenario,
    interval_chart,
    scenario,
    scenario_names,
    standard_warped_trio,
    swpm_cosh,
    swpm_curved_fiber,
    swpm_exp,
    swpm_sphere,
)
from .conformal_analysis import (
    ConformalMap,
    NotConformal,
    conformal_inversion,
    conformal_isometry,
    conformal_metric_stretch,
    conformal_scaling,
    conformal_stereographic,
    conformal_tension_check,
    lambda_equals_f_criteria,
    lemma_451_check,
)
from .geometry_core import (
    ChartManifold,
    ScalarField,
    SingularMetric,
    TangentVector,
    christoffel,
    covariant_derivative_vf,
    flat_box,
    flat_torus,
    grad_scalar,
    hessian_scalar,
    hyperbolic_chart,
    laplacian_scalar,
    orthonormal_frame,
    ricci_apply,
    riemann,
    riemann_apply,
    sphere_chart,
)
from .map_calculus import (
    SmoothMap,
    WeightField,
    bi_f_tension,
    bi_tension,
    energy_density,
    f_bi_tension_direct,
    f_bi_tension_via_relation,
    f_tension,
    identity_map,
    jacobi_operator,
    pullback_connection,
    rough_laplacian,
    second_fundamental_form,
    tension,
)
from .special_maps import (
    ConditionReport,
    FormulaComparison,
    SpecialMapScenario,
    scenario_map,
)
from .variational import (
    FUNCTIONALS,
    EnergyReport,
    GridDomain,
    NoDescent,
    StepTooLarge,
    VariationField,
    displacement_map,
    energies,
    first_variation_check,
    gradient_flow,
    random_torus_map,
)
from .warped_product import (
    BlockVector,
    WarpedProduct,
    WrongKind,
    as_chart_manifold,
    closed_form_connection,
    closed_form_curvature,
    closed_form_curvature_grad_sq,
    closed_form_curvature_wedge,
)

__all__ = [
    "BlockVector",
    "ChartManifold",
    "ConditionReport",
    "ConformalMap",
    "EnergyReport",
    "FUNCTIONALS",
    "FormulaComparison",
    "GridDomain",
    "NoDescent",
    "NotConformal",
    "SCENARIOS",
    "ScalarField",
    "Scenario",
    "SingularMetric",
    "SmoothMap",
    "SpecialMapScenario",
    "StepTooLarge",
    "TangentVector",
    "VariationField",
    "WarpedProduct",
    "WeightField",
    "WrongKind",
    "as_chart_manifold",
    "bi_f_tension",
    "bi_tension",
    "christoffel",
    "closed_form_connection",
    "closed_form_curvature",
    "closed_form_curvature_grad_sq",
    "closed_form_curvature_wedge",
    "conformal_inversion",
    "conformal_isometry",
    "conformal_metric_stretch",
    "conformal_scaling",
    "conformal_stereographic",
    "conformal_tension_check",
    "covariant_derivative_vf",
    "displacement_map",
    "energies",
    "energy_density",
    "f_bi_tension_direct",
    "f_bi_tension_via_relation",
    "f_tension",
    "first_variation_check",
    "flat_box",
    "flat_torus",
    "grad_scalar",
    "gradient_flow",
    "hessian_scalar",
    "hyperbolic_chart",
    "identity_map",
    "interval_chart",
    "jacobi_operator",
    "lambda_equals_f_criteria",
    "laplacian_scalar",
    "lemma_451_check",
    "orthonormal_frame",
    "pullback_connection",
    "random_torus_map",
    "ricci_apply",
    "riemann",
    "riemann_apply",
    "rough_laplacian",
    "scenario",
    "scenario_map",
    "scenario_names",
    "second_fundamental_form",
    "sphere_chart",
    "standard_warped_trio",
    "swpm_cosh",
    "swpm_curved_fiber",
    "swpm_exp",
    "swpm_sphere",
    "tension",
]
