"""Named manifolds, warped products, and verification scenarios.

Everything the command line can run is registered here by name, and the test
suite drives the same builders, so a scenario name means the same thing in
both places.  Each :class:`Scenario` carries a zero-argument ``build``
callable returning the kind-specific payload:

========== ==================================================================
kind       payload
========== ==================================================================
warped     :class:`~warpfield.warped_product.WarpedProduct`
special    :class:`~warpfield.special_maps.SpecialMapScenario`
conformal  dict with ``map`` (ConformalMap) and ``weight`` (WeightField)
variation  dict of grid/seed/weight settings for the first-variation check
flow       dict of grid/weight/step settings for the descent flow
========== ==================================================================

Builders for the ``variation`` and ``flow`` kinds accept optional
``resolution`` and ``seed`` keywords so the command line can override the
grid without the registry losing its defaults.  ``expected`` records frozen
numeric facts about the scenario (curvatures, criticality readings, known
vanishing tensions) that downstream checks assert against; a corrupted
scenario — for example a warping exponent nudged off its catalog value —
must flip at least one of these from pass to fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import duals, geometry_core as geo
from . import map_calculus as mc
from .warped_product import WarpedProduct


def interval_chart(lo, hi, name="interval"):
    return geo.ChartManifold(1, ("t",), lambda p: [[1.0]], ((lo, hi),), (False,), name)


def swpm_sphere(cap=0.1, power=1.0) -> WarpedProduct:
    """(0, pi) x_{sin t} S^1: the unit two-sphere in polar coordinates.

    ``power`` raises the warping to ``sin^power``; anything other than 1.0
    leaves the chart well defined but destroys the round metric, which the
    negative-control checks rely on.
    """
    if power == 1.0:
        lam = lambda x: duals.sin(x[0])
        name = "sphere as warped product"
    else:
        lam = lambda x: duals.sin(x[0]) ** power
        name = f"sin^{power} pseudo-sphere"
    return WarpedProduct(
        base=interval_chart(cap, math.pi - cap, "polar interval"),
        fiber=geo.circle_chart(1.0),
        lam=lam,
        kind="singly_lambda",
        name=name,
    )


def swpm_exp(span=2.0) -> WarpedProduct:
    """R x_{e^t} R: hyperbolic-plane-like warped strip."""
    return WarpedProduct(
        base=interval_chart(-span, span, "line"),
        fiber=geo.ChartManifold(1, ("s",), lambda p: [[1.0]],
                                ((-span, span),), (False,), "line"),
        lam=lambda x: duals.exp(x[0]),
        kind="singly_lambda",
        name="exponential warp",
    )


def swpm_curved_fiber() -> WarpedProduct:
    """Interval base, round-sphere fiber, gentle warping; dim 3 total."""
    return WarpedProduct(
        base=interval_chart(-1.5, 1.5, "line"),
        fiber=geo.sphere_chart(),
        lam=lambda x: 1.1 + 0.3 * duals.sin(x[0]),
        kind="singly_lambda",
        name="warped sphere fiber",
    )


def swpm_cosh(span=1.2) -> WarpedProduct:
    """R x_{cosh t} S^1: constant sectional curvature -1."""
    return WarpedProduct(
        base=interval_chart(-span, span, "line"),
        fiber=geo.circle_chart(1.0),
        lam=lambda x: duals.cosh(x[0]),
        kind="singly_lambda",
        name="cosh warp",
    )


def standard_warped_trio():
    return (swpm_sphere(), swpm_exp(), swpm_curved_fiber())


# ---------------------------------------------------------------------------
# the scenario registry


@dataclass(frozen=True)
class Scenario:
    """A named, reproducible verification setup."""

    name: str
    kind: str  # warped | special | conformal | variation | flow
    description: str
    build: Callable[..., object] = field(repr=False)
    expected: Mapping[str, float] = field(default_factory=dict)

    KINDS = ("warped", "special", "conformal", "variation", "flow")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")


def _sphere_inclusion(t0, wavy=True, power=1.0):
    from . import special_maps as sp

    if wavy:
        weight = mc.WeightField(lambda y: 1.6 + 0.4 * duals.cos(y[0]),
                                "cosine weight")
    else:
        weight = mc.WeightField(lambda y: 1.0, "unit weight")
    return sp.SpecialMapScenario(
        warped=swpm_sphere(power=power), kind="inclusion_ix0",
        weight=weight, anchor=(t0,),
        name=f"sphere circle inclusion at {t0:.6g}")


def _pi1_exp_nontrivial():
    from . import special_maps as sp

    return sp.SpecialMapScenario(
        warped=swpm_exp(), kind="projection_pi1",
        weight=mc.WeightField(lambda p: duals.exp(-p[0]), "inverse exponential"),
        name="base projection, exp warp, inverse-exp weight")


def _iy0_flat_exp():
    from . import special_maps as sp

    W = WarpedProduct(base=interval_chart(-1.0, 1.0, "flat line"),
                      fiber=geo.circle_chart(),
                      lam=lambda x: duals.exp(x[0]),
                      name="exp over line")
    return sp.SpecialMapScenario(
        warped=W, kind="inclusion_iy0",
        weight=mc.WeightField(lambda x: duals.exp(x[0]), "exponential weight"),
        anchor=(1.0,), name="base leaf inclusion, exp warp and weight")


def _pi2_affine():
    from . import special_maps as sp

    return sp.SpecialMapScenario(
        warped=swpm_exp(), kind="projection_pi2",
        weight=mc.WeightField(lambda p: p[1] + 3.0, "affine fiber weight"),
        name="fiber projection, affine weight")


def _psi_winding():
    from . import special_maps as sp

    S = swpm_sphere()
    winding = mc.SmoothMap(S.fiber, S.fiber, lambda y: (2.0 * y[0],),
                           "double wind")
    return sp.SpecialMapScenario(
        warped=S, kind="product_into_warped_Id_x_psi",
        weight=mc.WeightField(lambda p: 1.6 + 0.4 * duals.cos(p[1]),
                              "cosine fiber weight"),
        psi=winding, name="doubled circle into the warped sphere")


def _product_identity_blocks():
    from . import special_maps as sp

    W = swpm_exp()
    return sp.SpecialMapScenario(
        warped=W, kind="product_phiM_x_phiN",
        weight=mc.WeightField(lambda p: duals.exp(-p[0]), "inverse exponential"),
        phi_m=mc.SmoothMap(W.base, W.base, lambda x: tuple(x), "base id"),
        phi_n=mc.SmoothMap(W.fiber, W.fiber, lambda y: tuple(y), "fiber id"),
        name="factor product of identities")


def _conformal_payload(maker, weight_fn, label):
    from . import conformal_analysis as ca

    return {"map": getattr(ca, maker)(),
            "weight": mc.WeightField(weight_fn, label)}


def _variation_payload(resolution=64, seed=42):
    from . import variational as va

    M = geo.flat_torus(1)
    return {
        "domain": va.GridDomain(M, resolution),
        "map": va.random_torus_map(M, M, seed, amplitude=0.2),
        "weight": mc.WeightField(lambda q: 2.0 + duals.cos(q[0]), "2 + cos"),
        "seed": seed,
        "amplitude": 0.2,
        "step": 1e-3,
    }


def _variation_torus2_payload(resolution=8, seed=42):
    from . import variational as va

    M = geo.flat_torus(2)
    return {
        "domain": va.GridDomain(M, resolution),
        "map": va.random_torus_map(M, M, seed, amplitude=0.15),
        "weight": mc.WeightField(
            lambda q: 1.5 + 0.3 * duals.cos(q[0]) * duals.sin(q[1]),
            "wavy plane weight"),
        "seed": seed,
        "amplitude": 0.15,
        "step": 1e-3,
    }


def _flow_payload(resolution=8, seed=0):
    from . import variational as va

    M = geo.flat_torus(1)
    return {
        "domain": va.GridDomain(M, resolution),
        "weight": mc.WeightField(lambda q: 2.0 + duals.cos(q[0]), "2 + cos"),
        "initial": lambda x: 0.3 * math.sin(x),
        "steps": 400,
        "eta0": 4e-3,
        "seed": seed,
    }


SCENARIOS = {
    s.name: s
    for s in (
        # warped products: oracle targets for the connection/curvature checks
        Scenario(
            "sphere_swpm", "warped",
            "unit two-sphere as (0, pi) x_{sin t} S^1",
            swpm_sphere,
            expected={"sectional_curvature": 1.0},
        ),
        Scenario(
            "exp_warp", "warped",
            "flat strip warped by e^t over a line fiber",
            swpm_exp,
            expected={"sectional_curvature": -1.0},
        ),
        Scenario(
            "curved_fiber_warp", "warped",
            "interval base with a gently warped round-sphere fiber",
            swpm_curved_fiber,
        ),
        Scenario(
            "cosh_warp", "warped",
            "hyperbolic surface as R x_{cosh t} S^1",
            swpm_cosh,
            expected={"sectional_curvature": -1.0},
        ),
        # special maps between warped products
        Scenario(
            "sphere_swpm_pi4", "special",
            "circle inclusion at the quarter latitude: the squared warping "
            "gradient is critical while the gradient itself has unit length",
            lambda: _sphere_inclusion(math.pi / 4.0),
            expected={"grad_gl2_sq_norm": 0.0, "gl2_norm": 1.0},
        ),
        Scenario(
            "sphere_swpm_3pi4", "special",
            "circle inclusion at the three-quarter latitude, mirror of the "
            "quarter-latitude criticality",
            lambda: _sphere_inclusion(3.0 * math.pi / 4.0),
            expected={"grad_gl2_sq_norm": 0.0, "gl2_norm": 1.0},
        ),
        Scenario(
            "sphere_swpm_equator", "special",
            "circle inclusion at the equator: harmonic, warping gradient zero",
            lambda: _sphere_inclusion(math.pi / 2.0, wavy=False),
            expected={"gl2_norm": 0.0, "tension_norm": 0.0},
        ),
        Scenario(
            "pi1_exp_warp_nontrivial_bif", "special",
            "base projection of the exponential warp with weight e^{-t}: "
            "f-bi-harmonic with nonvanishing plain tension",
            _pi1_exp_nontrivial,
            expected={"f_bi_tension_norm": 0.0, "tension_norm": 1.0},
        ),
        Scenario(
            "iy0_flat_exp_weight", "special",
            "base leaf inclusion with exponential warping and weight on a "
            "flat line",
            _iy0_flat_exp,
            expected={"tension_norm": 0.0},
        ),
        Scenario(
            "pi2_affine_fiber_weight", "special",
            "fiber projection of the exponential warp with an affine fiber "
            "weight: harmonic but not f-bi-harmonic",
            _pi2_affine,
            expected={"tension_norm": 0.0},
        ),
        Scenario(
            "psi_wind_into_warped", "special",
            "identity times circle-doubling into the warped sphere",
            _psi_winding,
        ),
        Scenario(
            "product_identity_blocks", "special",
            "factor product of identity maps on the exponential warp",
            _product_identity_blocks,
        ),
        # conformal maps
        Scenario(
            "conformal_inversion", "conformal",
            "Moebius inversion x/|x|^2 of a flat 3-box, dilation 1/|x|^2",
            lambda: _conformal_payload(
                "conformal_inversion",
                lambda p: 1.0 + 0.25 * duals.sin(p[0]), "wavy weight"),
        ),
        Scenario(
            "conformal_stretch", "conformal",
            "identity into an exponentially stretched 3-metric, dilation e^x",
            lambda: _conformal_payload(
                "conformal_metric_stretch",
                lambda p: 1.0 + 0.25 * duals.sin(p[0]), "wavy weight"),
        ),
        Scenario(
            "conformal_stereographic", "conformal",
            "inverse stereographic projection of a plane patch onto the "
            "round sphere (two-dimensional, hence harmonic)",
            lambda: _conformal_payload(
                "conformal_stereographic",
                lambda p: 1.0 + 0.1 * duals.sin(p[0]), "wavy weight"),
            expected={"tension_norm": 0.0},
        ),
        Scenario(
            "conformal_scaling", "conformal",
            "uniform scaling of the flat plane (two-dimensional, harmonic)",
            lambda: _conformal_payload(
                "conformal_scaling",
                lambda p: 1.0 + 0.1 * duals.sin(p[0]), "wavy weight"),
            expected={"tension_norm": 0.0},
        ),
        # variation and flow
        Scenario(
            "variation_seed42", "variation",
            "seeded wavy circle self-map, both weighted second-order "
            "functionals differentiated against their tension pairings",
            _variation_payload,
        ),
        Scenario(
            "variation_torus2_seed42", "variation",
            "seeded wavy two-torus self-map first-variation check",
            _variation_torus2_payload,
        ),
        Scenario(
            "circle_flow", "flow",
            "descent flow for the weighted bi-energy of circle-valued maps "
            "on the wavy circle with weight 2 + cos",
            _flow_payload,
        ),
    )
}


def scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise KeyError(f"unknown scenario {name!r}; known: {known}") from None


def scenario_names() -> tuple:
    return tuple(sorted(SCENARIOS))
