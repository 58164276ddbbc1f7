"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times the hot kernels (wedge, contraction, the G2 bilinear form, compound
matrices) and one
full numeric Laplacian flow under each available backend, and checks that both
backends agree.
"""
import argparse
import timeit

import numpy as np

from g2flow import _backend, catalog
from g2flow.exterior import KForm, compound, contract, wedge
from g2flow.flow import integrate_flow
from g2flow.stability import g2_bilinear


def cases(rng):
    a = KForm(7, 3, rng.standard_normal(35))
    b = KForm(7, 2, rng.standard_normal(21))
    v = rng.standard_normal(7)
    M = rng.standard_normal((7, 7))
    phi = catalog.load("a57").warped(1.0).phi
    G = catalog.load("g6n3").warped(1.0)
    return {
        "wedge 2^3 (dim 7)": lambda: wedge(b, a),
        "contract i_v (3-form, dim 7)": lambda: contract(v, a),
        "g2 bilinear form": lambda: g2_bilinear(phi),
        "compound matrix, k = 3 (35x35)": lambda: compound(M, 3),
        "numeric flow g6n3, t in [0,1]": lambda: integrate_flow(G.phi, G.Lhat, 1.0, 1e-9),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    fns = cases(rng)
    backends = ["python"]
    try:
        _backend.use("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled backend not built; timing the numpy fallback only")
    results = {}
    outputs = {}
    for name in backends:
        _backend.use(name)
        outputs[name] = [np.asarray(getattr(r, "coeffs", r)) for r in (fns[k]() for k in list(fns)[:4])]
        for label, fn in fns.items():
            number = 1 if "flow" in label else 2000
            best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            results[(label, name)] = best
    if len(backends) == 2:
        diff = max(float(np.max(np.abs(x - y))) for x, y in zip(outputs["cython"], outputs["python"]))
        print(f"max difference between backends: {diff:.2e}")
    print(f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + ("   speed-up" if len(backends) == 2 else ""))
    for label in fns:
        row = f"{label:32s}" + "".join(f"{results[(label, b)] * 1e6:12.1f}us" for b in backends)
        if len(backends) == 2:
            row += f"   {results[(label, 'python')] / results[(label, 'cython')]:8.2f}x"
        print(row)


if __name__ == "__main__":
    main()
