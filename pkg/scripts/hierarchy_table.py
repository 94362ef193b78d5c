"""Print the tension-field hierarchy for catalog scenarios.

For every special-map and conformal scenario in the catalog (or a chosen
one), samples points in the map's domain and prints the sup norm of each
field in the hierarchy: tau, tau_f, tau_2, tau_{f,2}, tau_{2,f}.  Zeros in
a column are the harmonicity-type statements the test suite pins down.

Usage:
    python3 scripts/hierarchy_table.py [--scenario NAME] [--samples N] [--seed S]
"""

import argparse
import math

from warpfield import catalog, geometry_core as geo, map_calculus as mc
from warpfield import sampling, special_maps as sp

FIELDS = (
    ("tau", lambda phi, f, p: mc.tension(phi, p)),
    ("tau_f", lambda phi, f, p: mc.f_tension(phi, f, p)),
    ("tau_2", lambda phi, f, p: mc.bi_tension(phi, p)),
    ("tau_f2", lambda phi, f, p: mc.bi_f_tension(phi, f, p)),
    ("tau_2f", lambda phi, f, p: mc.f_bi_tension_direct(phi, f, p)),
)


def map_and_weight(scn):
    payload = scn.build()
    if scn.kind == "special":
        return sp.scenario_map(payload), payload.weight
    if scn.kind == "conformal":
        return payload["map"].underlying, payload["weight"]
    raise ValueError(f"no single map attached to kind {scn.kind!r}")


def hierarchy_row(phi, weight, samples, seed):
    rng = sampling.rng_for(seed, "hierarchy-table:" + phi.name)
    points = [sampling.random_point(rng, phi.domain) for _ in range(samples)]
    N = phi.codomain
    sups = []
    for _, field in FIELDS:
        sups.append(max(
            math.sqrt(geo.norm_sq(N, phi(p), field(phi, weight, p)))
            for p in points))
    return sups


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", help="catalog scenario name (default: all)")
    ap.add_argument("--samples", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if args.scenario:
        names = [args.scenario]
    else:
        names = [n for n in catalog.scenario_names()
                 if catalog.scenario(n).kind in ("special", "conformal")]

    header = f"{'scenario':34s}" + "".join(f"{n:>12s}" for n, _ in FIELDS)
    print(header)
    print("-" * len(header))
    for name in names:
        scn = catalog.scenario(name)
        phi, weight = map_and_weight(scn)
        sups = hierarchy_row(phi, weight, args.samples, args.seed)
        print(f"{name:34s}" + "".join(f"{s:12.3e}" for s in sups))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
