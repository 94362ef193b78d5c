"""Command-line front door: scenario loading, verification suites, reports.

Subcommands
-----------
``catalog``
    List the named scenarios with kinds and descriptions.
``curvature-check``
    Closed-form warped connection and curvature against the generic chart
    oracles, plus frozen sectional-curvature facts where the scenario
    records them.
``tension``
    Full tension hierarchy at sample points — closed form where cataloged,
    generic engine always — with every printed-formula comparison and
    harmonicity criterion the scenario carries.
``variation-check``
    Finite-difference first variation of both weighted second-order
    functionals against their tension-field pairings.
``flow``
    Descent flow for the weighted bi-energy, with a step CSV.

Scenario JSON
-------------
A scenario file either names a registry entry::

    {"catalog": "sphere_swpm_pi4"}

or builds one from the closed constructor vocabulary::

    {"manifolds": {"domain": {"type": "warped",
                              "base": {"type": "flat_box", "dim": 1,
                                       "bounds": [[0.1, 3.0415926535897933]]},
                              "fiber": {"type": "flat_torus", "dim": 1},
                              "lambda_expr": {"form": "sin"}}},
     "map": {"expr": "inclusion_ix0", "anchor": [0.7853981633974483]},
     "weight": {"expr": "cosine", "offset": 1.6, "amplitude": 0.4, "axis": 0},
     "checks": ["criticality_anchor"],
     "grid": {"resolution": 16, "seed": 7},
     "tolerances": {"criticality_anchor": 1e-9}}

Unknown keys anywhere in the document are rejected; there is no general
expression parser, only the constructor forms spelled out in the builders
below.  ``tolerances`` doubles as the numeric-knob channel for the flow
command (reserved names ``steps``, ``eta0``, ``stationary``), and ``map``
doubles as its initial condition (forms ``zero`` and ``sine``).

Reports
-------
Each command renders a report with one entry per executed check:
``{name, paper_eq, max_residual, tolerance, status}`` where status is
``pass``, ``fail``, or ``finding``.  A finding is reserved for mismatches
of verbatim printed formulas against the engine oracle (and for the
runtime-adjudicated variation sign); corrected closed forms and frozen
scenario facts fail outright when they miss.  Exit code 0 means all pass,
1 means at least one fail, 2 means findings only.  Reports are
deterministic: the same scenario and seed produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import catalog, duals, geometry_core as geo
from . import map_calculus as mc
from . import sampling
from . import special_maps as sp
from . import warped_product as wp


class SpecError(ValueError):
    """A scenario document failed strict validation."""


DEFAULT_TOLERANCES = {
    "warped_connection_closed_form": 1e-8,
    "warped_curvature_closed_form": 1e-8,
    "warped_curvature_printed_forms_agree": 1e-10,
    "sectional_curvature_frozen": 1e-8,
    "sphere_unit_curvature": 1e-8,
    "criticality_anchor": 1e-9,
    "warping_gradient_unit": 1e-9,
    "warping_gradient_zero": 1e-9,
    "harmonicity": 1e-9,
    "tension_norm_frozen": 1e-9,
    "f_bi_harmonicity": 1e-9,
    "second_form_identity": 1e-9,
    "two_dim_harmonic": 1e-9,
    "printed_criteria_mutual": 1e-9,
    "first_variation_E_2f": 1e-4,
    "first_variation_E_f2": 1e-4,
    "flow_energy_monotone": 0.0,
    "flow_tension_reduction": 0.5,
    "default": 1e-8,
}

_HIERARCHY = ("tau", "tau_f", "tau_2", "tau_f2", "tau_2f")


# ---------------------------------------------------------------------------
# strict scenario parsing


def _require_keys(node, allowed, where, required=()):
    if not isinstance(node, dict):
        raise SpecError(f"{where}: expected an object, got {type(node).__name__}")
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise SpecError(f"{where}: unknown keys {unknown}; allowed: "
                        f"{sorted(allowed)}")
    missing = sorted(set(required) - set(node))
    if missing:
        raise SpecError(f"{where}: missing required keys {missing}")


def _number(node, key, where, default=None):
    if key not in node:
        if default is None:
            raise SpecError(f"{where}: missing numeric key {key!r}")
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _lambda_expr(node, where):
    _require_keys(node, {"form", "power", "rate", "value", "offset",
                         "amplitude"}, where, required=("form",))
    form = node["form"]
    if form == "sin":
        return lambda x: duals.sin(x[0])
    if form == "sin_pow":
        power = _number(node, "power", where)
        return lambda x: duals.sin(x[0]) ** power
    if form == "exp":
        rate = _number(node, "rate", where, default=1.0)
        return lambda x: duals.exp(rate * x[0])
    if form == "cosh":
        return lambda x: duals.cosh(x[0])
    if form == "constant":
        value = _number(node, "value", where)
        if value <= 0.0:
            raise SpecError(f"{where}: warping constant must be positive")
        return lambda x: value
    if form == "offset_sin":
        offset = _number(node, "offset", where)
        amplitude = _number(node, "amplitude", where)
        return lambda x: offset + amplitude * duals.sin(x[0])
    raise SpecError(f"{where}.form: unknown warping form {form!r}")


def _build_manifold(node, where):
    _require_keys(node, {"type", "dim", "side", "bounds", "cap",
                         "base", "fiber", "lambda_expr"}, where,
                  required=("type",))
    kind = node["type"]
    if kind == "flat_torus":
        dim = int(_number(node, "dim", where))
        side = _number(node, "side", where, default=2.0 * math.pi)
        return geo.flat_torus(dim, side)
    if kind == "flat_box":
        dim = int(_number(node, "dim", where))
        bounds = node.get("bounds")
        if bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
            if len(bounds) != dim:
                raise SpecError(f"{where}.bounds: need {dim} intervals")
        return geo.flat_box(dim, bounds)
    if kind == "sphere_chart":
        return geo.sphere_chart(_number(node, "cap", where, default=0.1))
    if kind == "hyperbolic_chart":
        return geo.hyperbolic_chart()
    if kind == "warped":
        for key in ("base", "fiber", "lambda_expr"):
            if key not in node:
                raise SpecError(f"{where}: warped manifolds need {key!r}")
        base = _build_manifold(node["base"], where + ".base")
        fiber = _build_manifold(node["fiber"], where + ".fiber")
        if isinstance(base, wp.WarpedProduct) or isinstance(fiber, wp.WarpedProduct):
            raise SpecError(f"{where}: warped factors must be plain charts")
        lam = _lambda_expr(node["lambda_expr"], where + ".lambda_expr")
        return wp.WarpedProduct(base=base, fiber=fiber, lam=lam,
                                kind="singly_lambda", name="scenario warp")
    raise SpecError(f"{where}.type: unknown manifold type {kind!r}")


def _weight_field(node, where):
    _require_keys(node, {"expr", "value", "offset", "amplitude", "axis",
                         "rate", "slope"}, where, required=("expr",))
    expr = node["expr"]
    axis = int(_number(node, "axis", where, default=0.0))
    if expr == "constant":
        value = _number(node, "value", where)
        if value <= 0.0:
            raise SpecError(f"{where}: weights must be positive")
        return mc.WeightField(lambda p: value, f"constant {value}")
    if expr == "cosine":
        offset = _number(node, "offset", where)
        amplitude = _number(node, "amplitude", where)
        if offset - abs(amplitude) <= 0.0:
            raise SpecError(f"{where}: cosine weight can reach zero")
        return mc.WeightField(
            lambda p: offset + amplitude * duals.cos(p[axis]),
            f"{offset} + {amplitude} cos", )
    if expr == "exp":
        rate = _number(node, "rate", where, default=1.0)
        return mc.WeightField(lambda p: duals.exp(rate * p[axis]),
                              f"exp({rate} x{axis})")
    if expr == "affine":
        offset = _number(node, "offset", where)
        slope = _number(node, "slope", where, default=1.0)
        return mc.WeightField(lambda p: offset + slope * p[axis],
                              f"{offset} + {slope} x{axis}")
    raise SpecError(f"{where}.expr: unknown weight form {expr!r}")


def _map_expr(node, where):
    _require_keys(node, {"expr", "anchor", "amplitude", "frequency"},
                  where, required=("expr",))
    expr = node["expr"]
    known = {"identity", "inclusion_ix0", "inclusion_iy0",
             "projection_pi1", "projection_pi2", "zero", "sine"}
    if expr not in known:
        raise SpecError(f"{where}.expr: unknown map form {expr!r}")
    out = dict(node)
    if "anchor" in out:
        out["anchor"] = tuple(float(a) for a in out["anchor"])
    return out


def load_scenario_document(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise SpecError(f"cannot read scenario file: {err}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(f"scenario file is not valid JSON: {err}") from None
    _require_keys(doc, {"catalog", "manifolds", "map", "weight", "grid",
                        "checks", "tolerances"}, "scenario")
    if "grid" in doc:
        _require_keys(doc["grid"], {"resolution", "seed"}, "scenario.grid")
    if "checks" in doc and not (
            isinstance(doc["checks"], list)
            and all(isinstance(c, str) for c in doc["checks"])):
        raise SpecError("scenario.checks: expected a list of check names")
    if "tolerances" in doc:
        if not isinstance(doc["tolerances"], dict):
            raise SpecError("scenario.tolerances: expected an object")
        allowed = set(DEFAULT_TOLERANCES) | {"steps", "eta0", "stationary",
                                             "triples"}
        for k, v in doc["tolerances"].items():
            named_check = k.startswith(("formula_", "criterion_"))
            if k not in allowed and not named_check:
                raise SpecError(f"scenario.tolerances: unknown name {k!r}")
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SpecError(f"scenario.tolerances.{k}: expected a number")
    if "manifolds" in doc:
        _require_keys(doc["manifolds"], {"domain", "codomain"},
                      "scenario.manifolds", required=("domain",))
    if "catalog" in doc:
        if "manifolds" in doc:
            raise SpecError("scenario: give either catalog or manifolds, "
                            "not both")
        if doc["catalog"] not in catalog.SCENARIOS:
            known = ", ".join(catalog.scenario_names())
            raise SpecError(f"scenario.catalog: unknown name "
                            f"{doc['catalog']!r}; known: {known}")
    elif "manifolds" not in doc:
        raise SpecError("scenario: needs a catalog name or manifolds")
    if "map" in doc:
        doc = dict(doc, map=_map_expr(doc["map"], "scenario.map"))
    return doc


# ---------------------------------------------------------------------------
# check bookkeeping


class CheckSink:
    """Collects check rows and per-sample residuals for one command run."""

    def __init__(self, tolerances, selected=None):
        self._tols = dict(tolerances)
        self.selected = set(selected) if selected else None
        self.checks = []
        self.rows = []  # (check, sample, residual)

    def tolerance(self, name):
        if name in self._tols:
            return float(self._tols[name])
        if name in DEFAULT_TOLERANCES:
            return DEFAULT_TOLERANCES[name]
        return float(self._tols.get("default",
                                    DEFAULT_TOLERANCES["default"]))

    def wants(self, name):
        return self.selected is None or name in self.selected

    def wants_prefix(self, prefix):
        return self.selected is None or any(
            s.startswith(prefix) for s in self.selected)

    def add(self, name, paper_eq, residual, policy="strict", tolerance=None):
        """Record one check; policy picks the status on a miss.

        strict      -> fail
        printed     -> finding (verbatim catalog formula vs oracle)
        adjudicated -> finding on *success* (a runtime-resolved ambiguity)
        """
        if not self.wants(name):
            return
        tol = self.tolerance(name) if tolerance is None else float(tolerance)
        residual = float(residual)
        if policy == "adjudicated":
            status = "finding" if residual <= tol else "fail"
        elif residual <= tol:
            status = "pass"
        else:
            status = "finding" if policy == "printed" else "fail"
        self.checks.append({"name": name, "paper_eq": paper_eq,
                            "max_residual": residual, "tolerance": tol,
                            "status": status})

    def sample(self, name, index, residual):
        if self.wants(name):
            self.rows.append((name, int(index), float(residual)))

    def add_comparisons(self, groups):
        """Aggregate FormulaComparison lists keyed by (formula_id, variant)."""
        worst = {}
        for i, comps in enumerate(groups):
            for c in comps:
                key = (c.formula_id, c.variant)
                worst[key] = max(worst.get(key, 0.0), c.delta)
                self.sample(_formula_check_name(*key), i, c.delta)
        for (fid, variant), delta in sorted(worst.items()):
            name = _formula_check_name(fid, variant)
            policy = "printed" if variant.startswith("catalog") else "strict"
            self.add(name, fid, delta, policy=policy)

    def add_conditions(self, groups):
        worst = {}
        for comps in groups:
            for rep in comps:
                worst[rep.formula_id] = max(worst.get(rep.formula_id, 0.0),
                                            rep.max_residual)
        for fid, delta in sorted(worst.items()):
            self.add(f"criterion_{fid}", fid, delta, policy="printed")


def _formula_check_name(formula_id, variant):
    return f"formula_{formula_id}_{variant}"


def exit_code(checks):
    statuses = {c["status"] for c in checks}
    if "fail" in statuses:
        return 1
    if "finding" in statuses:
        return 2
    return 0


def render_report(command, sink, environment):
    return {
        "checks": sorted(sink.checks, key=lambda c: c["name"]),
        "command": command,
        "environment": environment,
    }


def _emit(report, fmt, out_dir, sink=None, flow_rows=None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "json":
        sys.stdout.write(text)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "paper_eq", "max_residual", "tolerance",
                         "status"])
        for c in report["checks"]:
            writer.writerow([c["name"], c["paper_eq"],
                             repr(c["max_residual"]), repr(c["tolerance"]),
                             c["status"]])
        sys.stdout.write(buf.getvalue())
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(text.encode("utf-8"))
    if sink is not None:
        with (out / "residuals.csv").open("w", encoding="utf-8",
                                          newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["check", "sample", "residual"])
            for name, index, residual in sink.rows:
                writer.writerow([name, index, repr(residual)])
    if flow_rows is not None:
        with (out / "flow.csv").open("w", encoding="utf-8",
                                     newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "E", "E_2f", "sup_residual", "eta"])
            for row in flow_rows:
                writer.writerow([row[0]] + [repr(v) for v in row[1:]])


# ---------------------------------------------------------------------------
# scenario resolution per command


def _resolve(doc, kinds, command):
    """Return (name, kind, payload, expected) for a scenario document."""
    if "catalog" in doc:
        scn = catalog.scenario(doc["catalog"])
        if scn.kind not in kinds:
            raise SpecError(f"{command}: scenario {scn.name!r} has kind "
                            f"{scn.kind!r}; this command accepts {kinds}")
        return scn.name, scn.kind, scn.build, dict(scn.expected)
    domain = _build_manifold(doc["manifolds"]["domain"],
                             "scenario.manifolds.domain")
    codomain = None
    if "codomain" in doc["manifolds"]:
        codomain = _build_manifold(doc["manifolds"]["codomain"],
                                   "scenario.manifolds.codomain")
        if isinstance(codomain, wp.WarpedProduct):
            raise SpecError("scenario.manifolds.codomain: must be a chart")
    return "inline", None, (domain, codomain), {}


def _inline_special(doc, domain):
    if not isinstance(domain, wp.WarpedProduct):
        raise SpecError("tension: inline scenarios need a warped domain")
    mp = doc.get("map")
    if mp is None:
        raise SpecError("tension: inline scenarios need a map")
    expr = mp["expr"]
    if expr not in ("inclusion_ix0", "inclusion_iy0", "projection_pi1",
                    "projection_pi2"):
        raise SpecError(f"tension: map form {expr!r} is not a special map")
    if "weight" not in doc:
        raise SpecError("tension: inline scenarios need a weight")
    weight = _weight_field(doc["weight"], "scenario.weight")
    anchor = mp.get("anchor")
    try:
        return sp.SpecialMapScenario(warped=domain, kind=expr, weight=weight,
                                     anchor=anchor, name="inline")
    except (wp.WrongKind, ValueError) as err:
        raise SpecError(f"tension: {err}") from None


# ---------------------------------------------------------------------------
# curvature-check


def _sectional(M, p):
    R = geo.riemann_apply(M, p, (1.0, 0.0), (0.0, 1.0), (0.0, 1.0))
    g = geo.metric_at(M, p)
    den = g[0][0] * g[1][1] - g[0][1] ** 2
    return geo.inner(M, p, R, (1.0, 0.0)) / den


def run_curvature_check(W, sink, seed, samples, expected):
    flat = wp.as_chart_manifold(W)
    rng = sampling.rng_for(seed, "cli-curvature:" + W.name)
    m, n = W.base.dim, W.fiber.dim
    conn = curv = mutual = frozen = 0.0
    for i in range(samples):
        p = sampling.random_point(rng, flat)
        X = wp.BlockVector(sampling.random_vector(rng, m),
                           sampling.random_vector(rng, n))
        Y = wp.BlockVector(sampling.random_vector(rng, m),
                           sampling.random_vector(rng, n))
        Z = wp.BlockVector(sampling.random_vector(rng, m),
                           sampling.random_vector(rng, n))
        Y1 = sampling.random_vector_field(rng, m)
        Y2 = sampling.random_vector_field(rng, n)

        def lifted(q, Y1=Y1, Y2=Y2):
            return tuple(Y1(q[:m])) + tuple(Y2(q[m:]))

        d = _max_abs(wp.closed_form_connection(W, X, (Y1, Y2), p).flat(),
                     geo.covariant_derivative_vf(flat, X.flat(), lifted, p))
        conn = max(conn, d)
        sink.sample("warped_connection_closed_form", i, d)

        hess = wp.closed_form_curvature(W, X, Y, Z, p).flat()
        d = _max_abs(hess, geo.riemann_apply(flat, p, X.flat(), Y.flat(),
                                             Z.flat()))
        curv = max(curv, d)
        sink.sample("warped_curvature_closed_form", i, d)

        grad_sq = wp.closed_form_curvature_grad_sq(W, X, Y, Z, p).flat()
        wedge = wp.closed_form_curvature_wedge(W, X, Y, Z, p).flat()
        d = max(_max_abs(hess, grad_sq), _max_abs(hess, wedge))
        mutual = max(mutual, d)
        sink.sample("warped_curvature_printed_forms_agree", i, d)

        frozen_requested = (
            "sectional_curvature" in expected
            or (sink.selected is not None
                and sink.wants("sphere_unit_curvature")))
        if flat.dim == 2 and frozen_requested:
            want = expected.get("sectional_curvature", 1.0)
            d = abs(_sectional(flat, p) - want)
            frozen = max(frozen, d)
            name = ("sectional_curvature_frozen"
                    if "sectional_curvature" in expected
                    else "sphere_unit_curvature")
            sink.sample(name, i, d)

    sink.add("warped_connection_closed_form", "5-6-1", conn)
    sink.add("warped_curvature_closed_form", "6-30-3", curv)
    sink.add("warped_curvature_printed_forms_agree", "5-6-3", mutual)
    if flat.dim == 2 and "sectional_curvature" in expected:
        sink.add("sectional_curvature_frozen", "6-30-3", frozen)
    elif flat.dim == 2 and sink.selected is not None \
            and sink.wants("sphere_unit_curvature"):
        sink.add("sphere_unit_curvature", "5-19-1", frozen)


def _max_abs(a, b):
    a = tuple(float(duals.value(x)) for x in a)
    b = tuple(float(duals.value(x)) for x in b)
    return max(abs(x - y) for x, y in zip(a, b)) if a else 0.0


# ---------------------------------------------------------------------------
# tension


def _hierarchy_rows(phi, weight, points, sink):
    if not sink.wants_prefix("hierarchy"):
        return
    for i, p in enumerate(points):
        N = phi.codomain
        q = phi(p)
        values = {
            "tau": mc.tension(phi, p),
            "tau_f": mc.f_tension(phi, weight, p),
            "tau_2": mc.bi_tension(phi, p),
            "tau_f2": mc.bi_f_tension(phi, weight, p),
            "tau_2f": mc.f_bi_tension_direct(phi, weight, p),
        }
        for key in _HIERARCHY:
            norm = math.sqrt(max(0.0, geo.norm_sq(N, q, values[key])))
            sink.sample(f"hierarchy_{key}_norm", i, norm)


def _special_points(scn, seed, count):
    """Sample points in the domain chart of the scenario's map."""
    phi = sp.scenario_map(scn)
    rng = sampling.rng_for(seed, "cli-tension:" + (scn.name or scn.kind))
    return phi, [sampling.random_point(rng, phi.domain) for _ in range(count)]


def run_special_tension(scn, sink, seed, samples, expected):
    phi, points = _special_points(scn, seed, samples)
    comparisons, conditions = [], []
    if sink.wants_prefix("formula") or sink.wants_prefix("criterion"):
        for p in points:
            if scn.kind == "inclusion_ix0":
                chain = sp.ix0_tension_chain(scn, p)
                comparisons.append(chain["comparisons"])
            elif scn.kind == "projection_pi1":
                out = sp.pi1_tension_chain(scn, p, samples=2)
                comparisons.append(out["comparisons"])
                conditions.append(out["conditions"])
            elif scn.kind == "projection_pi2":
                out = sp.pi2_tension_chain(scn, p, samples=2)
                comparisons.append(out["comparisons"])
                conditions.append(out["conditions"])
            elif scn.kind == "inclusion_iy0":
                comparisons.append(sp.iy0_formula_comparisons(scn, p))
            else:
                out = sp.product_map_tension(scn, p)
                comparisons.append(out["comparisons"])
                conditions.append(out.get("conditions", []))
        if scn.kind == "inclusion_ix0":
            conditions.append(list(sp.ix0_conditions(scn, samples=3)))
        elif scn.kind == "inclusion_iy0":
            conditions.append([sp.iy0_condition(scn)])
    sink.add_comparisons(comparisons)
    sink.add_conditions(conditions)
    _hierarchy_rows(phi, scn.weight, points, sink)
    expected = dict(expected)
    for check, key, value in (
            ("criticality_anchor", "grad_gl2_sq_norm", 0.0),
            ("warping_gradient_zero", "gl2_norm", 0.0),
            ("warping_gradient_unit", "gl2_norm", 1.0),
            ("harmonicity", "tension_norm", 0.0),
            ("f_bi_harmonicity", "f_bi_tension_norm", 0.0)):
        if sink.selected and check in sink.selected:
            expected.setdefault(key, value)
    _expected_special_checks(scn, phi, points, sink, expected)


def _expected_special_checks(scn, phi, points, sink, expected):
    paper_root = {"inclusion_ix0": "5-19-12c", "inclusion_iy0": "4.2.1-4",
                  "projection_pi1": "4.2.3-3",
                  "projection_pi2": "4.2.3-4"}.get(scn.kind, "5-20-2")
    if scn.kind == "inclusion_ix0":
        readings = sp.ix0_criticality_readings(scn)
        if "grad_gl2_sq_norm" in expected:
            sink.add("criticality_anchor", "5-19-12c",
                     abs(readings["grad_gl2_sq_norm"]
                         - expected["grad_gl2_sq_norm"]))
        if expected.get("gl2_norm", None) == 0.0:
            sink.add("warping_gradient_zero", "5-19-12c",
                     readings["gl2_norm"])
        elif "gl2_norm" in expected:
            sink.add("warping_gradient_unit", "5-19-12c",
                     abs(readings["gl2_norm"] - expected["gl2_norm"]))
    if "tension_norm" in expected:
        worst = 0.0
        N = phi.codomain
        for p in points:
            t = mc.tension(phi, p)
            norm = math.sqrt(max(0.0, geo.norm_sq(N, phi(p), t)))
            worst = max(worst, abs(norm - expected["tension_norm"]))
        name = ("harmonicity" if expected["tension_norm"] == 0.0
                else "tension_norm_frozen")
        sink.add(name, paper_root, worst)
    if "f_bi_tension_norm" in expected:
        worst = 0.0
        N = phi.codomain
        for p in points:
            t = mc.f_bi_tension_direct(phi, scn.weight, p)
            norm = math.sqrt(max(0.0, geo.norm_sq(N, phi(p), t)))
            worst = max(worst, abs(norm - expected["f_bi_tension_norm"]))
        sink.add("f_bi_harmonicity", "4.2.3-2aa", worst)


def run_conformal_tension(payload, sink, seed, samples):
    from . import conformal_analysis as ca

    c = payload["map"]
    weight = payload["weight"]
    phi = c.underlying
    M = phi.domain
    n = M.dim
    rng = sampling.rng_for(seed, "cli-tension:conformal")
    points = [sampling.random_point(rng, M) for _ in range(samples)]

    comparisons = []
    if sink.wants_prefix("formula"):
        comparisons.extend([ca.conformal_tension_check(c, p)]
                           for p in points)
    if sink.wants("second_form_identity"):
        lemma = 0.0
        for i, p in enumerate(points):
            for _ in range(2):
                X = sampling.random_vector(rng, n)
                Y = sampling.random_vector(rng, n)
                lemma = max(lemma, ca.lemma_451_check(c, p, X, Y))
            sink.sample("second_form_identity", i, lemma)
        sink.add("second_form_identity", "5-15-5", lemma)

    if n == 2:
        if sink.wants("two_dim_harmonic"):
            worst = 0.0
            for p in points:
                t = mc.tension(phi, p)
                worst = max(worst, math.sqrt(
                    max(0.0, geo.norm_sq(phi.codomain, phi(p), t))))
            sink.add("two_dim_harmonic", "5-14-3", worst)
    elif sink.wants_prefix("formula") or sink.wants("printed_criteria_mutual"):
        mutual = 0.0
        for i, p in enumerate(points):
            out = ca.bi_f_conformal_residual(c, weight, p)
            comparisons.append(out["comparisons"])
            out = ca.f_bi_conformal_residual(c, weight, p)
            comparisons.append(out["comparisons"])
            crit = ca.lambda_equals_f_criteria(c, p)
            comparisons.append(crit["comparisons"])
            mutual = max(mutual, crit["mutual_delta"])
            sink.sample("printed_criteria_mutual", i, crit["mutual_delta"])
        sink.add("printed_criteria_mutual", "5-16-2", mutual)
    sink.add_comparisons(comparisons)
    _hierarchy_rows(phi, weight, points, sink)


# ---------------------------------------------------------------------------
# variation and flow


def run_variation(payload, sink, seed, overrides):
    from . import variational as va

    dom = payload["domain"]
    weight = payload["weight"]
    M = dom.manifold
    codomain = payload["map"].codomain
    amplitude = payload["amplitude"]
    h = payload["step"]
    triples = int(overrides.get("triples", 3))
    worst = {"E_2f": 0.0, "E_f2": 0.0}
    for i in range(triples):
        phi = va.random_torus_map(M, codomain, seed + i, amplitude=amplitude)
        V = va.VariationField(phi, seed=seed + i + 1000)
        for fun in va.FUNCTIONALS:
            try:
                out = va.first_variation_check(phi, weight, V, dom, fun, h=h)
                residual = out.residual
            except va.StepTooLarge:
                residual = 1.0
            worst[fun] = max(worst[fun], residual)
            sink.sample(f"first_variation_{fun}", i, residual)
    sink.add("first_variation_E_2f", "5-11-11", worst["E_2f"])
    sink.add("first_variation_E_f2", "3-24-8", worst["E_f2"],
             policy="adjudicated")


def _flow_initial(doc, payload):
    mp = doc.get("map")
    if mp is None:
        return payload["initial"]
    if mp["expr"] == "zero":
        return lambda x: 0.0
    if mp["expr"] == "sine":
        amplitude = mp.get("amplitude", 0.3)
        frequency = mp.get("frequency", 1.0)
        return lambda x: amplitude * math.sin(frequency * x)
    raise SpecError("flow: initial map must be zero or sine")


def run_flow(payload, doc, sink, overrides):
    from . import variational as va

    dom = payload["domain"]
    weight = payload["weight"]
    steps = int(overrides.get("steps", payload["steps"]))
    eta0 = float(overrides.get("eta0", payload["eta0"]))
    stationary = float(overrides.get("stationary", 1e-9))
    u0 = _flow_initial(doc, payload)
    try:
        res = va.gradient_flow(dom, weight, u0, steps=steps, eta0=eta0,
                               tol=stationary)
    except va.NoDescent:
        sink.add("flow_energy_monotone", "5-11-11", 1.0, tolerance=0.0)
        return []
    traj = res.trajectory
    rows = [(r.step, float(r.report.E), float(r.report.E_2f),
             float(r.sup_tension), float(r.eta)) for r in traj]
    energies = [float(r.report.E_2f) for r in traj]
    jump = max([b - a for a, b in zip(energies, energies[1:])], default=0.0)
    sink.add("flow_energy_monotone", "5-11-11", max(0.0, jump))
    start, end = traj[0].sup_tension, traj[-1].sup_tension
    ratio = 0.0 if start <= stationary else end / start
    sink.add("flow_tension_reduction", "5-11-11", ratio)
    for i, r in enumerate(traj):
        sink.sample("flow_tension_reduction", i, r.sup_tension)
    return rows


# ---------------------------------------------------------------------------
# command drivers


def _parse_tols(pairs):
    out = {}
    for item in pairs or []:
        for piece in item.split(","):
            if not piece:
                continue
            if "=" not in piece:
                raise SpecError(f"--tol: expected name=value, got {piece!r}")
            k, v = piece.split("=", 1)
            try:
                out[k.strip()] = float(v)
            except ValueError:
                raise SpecError(f"--tol {k}: {v!r} is not a number") from None
    return out


def _environment(args, doc, scenario_name, resolution, tolerances):
    return {
        "resolution": resolution,
        "scenario": scenario_name,
        "seed": args.seed,
        "tolerances": {k: float(v) for k, v in sorted(tolerances.items())},
    }


def _load_doc(args):
    if args.scenario:
        return load_scenario_document(args.scenario)
    return {}


def _gather_tols(args, doc):
    tols = dict(doc.get("tolerances", {}))
    tols.update(_parse_tols(args.tol))
    return tols


def _checks_filter(args, doc):
    names = list(doc.get("checks", []))
    if args.check:
        for item in args.check:
            names.extend(c for c in item.split(",") if c)
    return names or None


def cmd_catalog(args):
    rows = [(s.name, s.kind, s.description)
            for s in (catalog.scenario(n) for n in catalog.scenario_names())]
    if args.format == "json":
        doc = {"count": len(rows),
               "scenarios": [{"description": d, "kind": k, "name": n}
                             for n, k, d in rows]}
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "kind", "description"])
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_curvature_check(args):
    doc = _load_doc(args)
    tols = _gather_tols(args, doc)
    name, kind, build, expected = _resolve(doc or {"catalog": "sphere_swpm"},
                                           ("warped",), "curvature-check")
    if name == "inline":
        domain, _ = build
        if not isinstance(domain, wp.WarpedProduct):
            raise SpecError("curvature-check: the domain must be warped")
        W = domain
    else:
        W = build()
    samples = args.grid or int(doc.get("grid", {}).get("resolution", 20))
    seed = args.seed if args.seed is not None else \
        int(doc.get("grid", {}).get("seed", 0))
    args.seed = seed
    sink = CheckSink(tols, _checks_filter(args, doc))
    run_curvature_check(W, sink, seed, samples, expected)
    report = render_report("curvature-check", sink,
                           _environment(args, doc, name, samples, tols))
    _emit(report, args.format, args.out, sink)
    return exit_code(report["checks"])


def cmd_tension(args):
    doc = _load_doc(args)
    if not doc:
        raise SpecError("tension: --scenario is required")
    tols = _gather_tols(args, doc)
    name, kind, build, expected = _resolve(
        doc, ("special", "conformal"), "tension")
    samples = args.grid or int(doc.get("grid", {}).get("resolution", 3))
    seed = args.seed if args.seed is not None else \
        int(doc.get("grid", {}).get("seed", 0))
    args.seed = seed
    sink = CheckSink(tols, _checks_filter(args, doc))
    if name == "inline":
        domain, _ = build
        scn = _inline_special(doc, domain)
        run_special_tension(scn, sink, seed, samples, expected)
    elif kind == "special":
        run_special_tension(build(), sink, seed, samples, expected)
    else:
        payload = build()
        count = min(samples, 2) if payload["map"].domain.dim >= 3 else samples
        run_conformal_tension(payload, sink, seed, count)
    report = render_report("tension", sink,
                           _environment(args, doc, name, samples, tols))
    _emit(report, args.format, args.out, sink)
    return exit_code(report["checks"])


def cmd_variation_check(args):
    doc = _load_doc(args)
    tols = _gather_tols(args, doc)
    name, kind, build, expected = _resolve(
        doc or {"catalog": "variation_seed42"}, ("variation",),
        "variation-check")
    if name == "inline":
        raise SpecError("variation-check: use a catalog scenario")
    resolution = args.grid or int(doc.get("grid", {}).get(
        "resolution", 0)) or None
    payload = build(resolution=resolution) if resolution else build()
    seed = args.seed if args.seed is not None else \
        int(doc.get("grid", {}).get("seed", payload["seed"]))
    args.seed = seed
    sink = CheckSink(tols, _checks_filter(args, doc))
    run_variation(payload, sink, seed, tols)
    report = render_report(
        "variation-check", sink,
        _environment(args, doc, name, payload["domain"].resolution, tols))
    _emit(report, args.format, args.out, sink)
    return exit_code(report["checks"])


def cmd_flow(args):
    doc = _load_doc(args)
    tols = _gather_tols(args, doc)
    name, kind, build, expected = _resolve(
        doc or {"catalog": "circle_flow"}, ("flow",), "flow")
    if name == "inline":
        raise SpecError("flow: use a catalog scenario")
    resolution = args.grid or int(doc.get("grid", {}).get(
        "resolution", 0)) or None
    payload = build(resolution=resolution) if resolution else build()
    seed = args.seed if args.seed is not None else \
        int(doc.get("grid", {}).get("seed", payload["seed"]))
    args.seed = seed
    sink = CheckSink(tols, _checks_filter(args, doc))
    rows = run_flow(payload, doc, sink, tols)
    report = render_report(
        "flow", sink,
        _environment(args, doc, name, payload["domain"].resolution, tols))
    _emit(report, args.format, args.out, sink, flow_rows=rows)
    return exit_code(report["checks"])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="warpfield",
        description="verification suites for weighted tension fields")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "catalog": cmd_catalog,
        "curvature-check": cmd_curvature_check,
        "tension": cmd_tension,
        "variation-check": cmd_variation_check,
        "flow": cmd_flow,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, metavar="DIR")
        if name == "catalog":
            continue
        p.add_argument("--scenario", default=None, metavar="FILE")
        p.add_argument("--check", action="append", default=None,
                       metavar="NAME[,NAME...]")
        p.add_argument("--tol", action="append", default=None,
                       metavar="NAME=VALUE[,...]")
        p.add_argument("--grid", type=int, default=None, metavar="N")
        p.add_argument("--seed", type=int, default=None, metavar="U64")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SpecError as err:
        sys.stderr.write(f"error: {err}\n")
        return 64


if __name__ == "__main__":
    raise SystemExit(main())
