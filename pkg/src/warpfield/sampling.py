"""Seeded random points, fields, and maps for verification scenarios.

Every randomized check in the package draws from here so that a scenario is
reproducible from (seed, label) alone.  Streams for different labels are
independent; the same pair always yields the same draws.
"""

from __future__ import annotations

import zlib

import numpy as np

from . import duals
from .geometry_core import ChartManifold


def rng_for(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


def random_point(rng, M: ChartManifold, margin=0.12):
    """Uniform point in the chart box, padded away from non-periodic edges."""
    p = []
    for (lo, hi), per in zip(M.bounds, M.periodic):
        if per:
            p.append(rng.uniform(lo, hi))
        else:
            pad = margin * (hi - lo)
            p.append(rng.uniform(lo + pad, hi - pad))
    return tuple(p)


def random_vector(rng, dim, scale=1.0):
    return tuple(float(c) for c in rng.uniform(-scale, scale, size=dim))


def trig_scalar(rng, dim, offset=0.0, amplitude=0.5, modes=2, max_freq=2):
    """Smooth scalar field offset + sum of a sin(k.p + phase) terms.

    Integer frequencies, so the field is 2pi-periodic on every axis and safe
    on torus charts.  The sum of |a| is bounded by `amplitude`.
    """
    ks = rng.integers(-max_freq, max_freq + 1, size=(modes, dim))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    raw = rng.uniform(-1.0, 1.0, size=modes)
    scale = amplitude / max(1e-12, np.abs(raw).sum())
    amps = raw * scale
    terms = [(amps[m], ks[m].astype(float), phases[m]) for m in range(modes)]

    def field(p):
        s = offset
        for a, k, ph in terms:
            arg = ph
            for kj, pj in zip(k, p):
                arg = arg + kj * pj
            s = s + a * duals.sin(arg)
        return s

    return field


def positive_weight(rng, dim, modes=2):
    """Weight field bounded below by about 1: offset in [1.6, 2.4], swing <= 0.5."""
    offset = float(rng.uniform(1.6, 2.4))
    return trig_scalar(rng, dim, offset=offset, amplitude=0.5, modes=modes)


def random_vector_field(rng, dim, amplitude=1.0, modes=2):
    comps = [trig_scalar(rng, dim, offset=float(rng.uniform(-0.5, 0.5)),
                         amplitude=amplitude, modes=modes)
             for _ in range(dim)]
    return lambda p: tuple(c(p) for c in comps)


def trig_map(rng, domain: ChartManifold, codomain: ChartManifold,
             amplitude=0.3, modes=2):
    """Random smooth map whose image stays inside the codomain box.

    Each output component oscillates around the codomain axis midpoint with a
    total swing of at most `amplitude` times the half-span of that axis.
    Periodic codomain axes get the full [lo, hi) range to land in.
    """
    comps = []
    for (lo, hi), per in zip(codomain.bounds, codomain.periodic):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        swing = amplitude * half if not per else 0.9 * half
        comps.append(trig_scalar(rng, domain.dim, offset=mid,
                                 amplitude=swing, modes=modes))

    def expr(p):
        return tuple(c(p) for c in comps)

    return expr


def random_map_scenario(seed: int, label="map-scenario"):
    """Seeded (map, weight, point) triple spanning flat, curved, and warped
    targets.  Used by the two-path and degeneration checks."""
    from . import catalog, geometry_core
    from .map_calculus import SmoothMap, WeightField
    from .warped_product import as_chart_manifold

    rng = rng_for(seed, label)
    domains = (
        geometry_core.flat_torus(1),
        geometry_core.flat_torus(2),
        geometry_core.flat_box(2, ((-2.0, 2.0), (-2.0, 2.0))),
    )
    codomains = (
        geometry_core.flat_torus(2),
        geometry_core.sphere_chart(),
        geometry_core.hyperbolic_chart(),
        as_chart_manifold(catalog.swpm_exp()),
        as_chart_manifold(catalog.swpm_curved_fiber()),
    )
    dom = domains[int(rng.integers(len(domains)))]
    cod = codomains[int(rng.integers(len(codomains)))]
    phi = SmoothMap(dom, cod, trig_map(rng, dom, cod), "seeded map")
    f = WeightField(positive_weight(rng, dom.dim), "seeded weight")
    p = random_point(rng, dom)
    return phi, f, p


def perturbed_metric_chart(rng, dim, amplitude=0.25, name="random chart"):
    """Chart with metric I + small smooth symmetric perturbation (kept SPD).

    The perturbation's total swing per entry is amplitude/dim, which keeps the
    matrix diagonally dominant hence positive definite everywhere.
    """
    per_entry = amplitude / dim
    entries = {}
    for i in range(dim):
        for j in range(i + 1):
            entries[(i, j)] = trig_scalar(rng, dim, offset=0.0,
                                          amplitude=per_entry, modes=2)

    def g(p):
        m = [[0.0] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i + 1):
                v = entries[(i, j)](p)
                if i == j:
                    m[i][j] = 1.0 + v
                else:
                    m[i][j] = v
                    m[j][i] = v
        return m

    return ChartManifold(dim, tuple(f"x{i}" for i in range(dim)), g,
                         ((-4.0, 4.0),) * dim, (False,) * dim, name)
