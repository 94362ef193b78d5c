"""Survey every printed closed form against the derivative engine.

Walks the special-map and conformal catalog scenarios, evaluates each
catalog formula variant and its corrected twin, and prints the worst
engine delta per (formula, variant) together with its status.  Rows
marked FINDING are printed forms that disagree with the engine; the
corrected variants are expected to sit at rounding error.

Usage:
    python3 scripts/formula_survey.py [--samples N] [--seed S]
"""

import argparse
from collections import defaultdict

from warpfield import catalog, conformal_analysis as ca, sampling
from warpfield import special_maps as sp


def special_comparisons(scn, seed, samples):
    phi = sp.scenario_map(scn)
    rng = sampling.rng_for(seed, "survey:" + (scn.name or scn.kind))
    points = [sampling.random_point(rng, phi.domain) for _ in range(samples)]
    for p in points:
        if scn.kind == "inclusion_ix0":
            yield from sp.ix0_tension_chain(scn, p)["comparisons"]
        elif scn.kind == "projection_pi1":
            yield from sp.pi1_tension_chain(scn, p, samples=2)["comparisons"]
        elif scn.kind == "projection_pi2":
            yield from sp.pi2_tension_chain(scn, p, samples=2)["comparisons"]
        elif scn.kind == "inclusion_iy0":
            yield from sp.iy0_formula_comparisons(scn, p)
        else:
            yield from sp.product_map_tension(scn, p)["comparisons"]


def conformal_comparisons(payload, seed, samples):
    c = payload["map"]
    f = payload["weight"]
    rng = sampling.rng_for(seed, "survey:conformal")
    points = [sampling.random_point(rng, c.domain) for _ in range(samples)]
    for p in points:
        yield ca.conformal_tension_check(c, p)
        if c.domain.dim >= 3:
            yield from ca.bi_f_conformal_residual(c, f, p)["comparisons"]
            yield from ca.f_bi_conformal_residual(c, f, p)["comparisons"]
            yield from ca.lambda_equals_f_criteria(c, p)["comparisons"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    worst = defaultdict(float)
    for name in catalog.scenario_names():
        scn = catalog.scenario(name)
        if scn.kind == "special":
            rows = special_comparisons(scn.build(), args.seed, args.samples)
        elif scn.kind == "conformal":
            rows = conformal_comparisons(scn.build(), args.seed, args.samples)
        else:
            continue
        for cmp_ in rows:
            key = (cmp_.formula_id, cmp_.variant)
            worst[key] = max(worst[key], cmp_.delta)

    print(f"{'formula':16s} {'variant':28s} {'worst delta':>12s}  status")
    print("-" * 70)
    findings = 0
    for (fid, variant), delta in sorted(worst.items()):
        printed = variant.startswith("catalog")
        ok = delta <= sp.DEFAULT_TOL
        status = "agrees" if ok else ("FINDING" if printed else "FAIL")
        findings += status == "FINDING"
        print(f"{fid:16s} {variant:28s} {delta:12.3e}  {status}")
    print("-" * 70)
    print(f"{findings} printed-form findings; corrected variants "
          f"{'all agree' if all(d <= sp.DEFAULT_TOL for (f_, v), d in worst.items() if not v.startswith('catalog')) else 'DISAGREE'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
