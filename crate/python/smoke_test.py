"""Smoke test for the qmarkov_py extension.

Build and run from the repository root:

    cargo build --release -p qmarkov-py
    python3 python/smoke_test.py

The script looks for the built library under target/release unless
`qmarkov_py` is already importable.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys


def load():
    try:
        import qmarkov_py

        return qmarkov_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for name in ("libqmarkov_py.so", "libqmarkov_py.dylib", "qmarkov_py.dll"):
        path = root / "target" / "release" / name
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("qmarkov_py", str(path))
            spec = importlib.util.spec_from_file_location("qmarkov_py", path, loader=loader)
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            return mod
    sys.exit("qmarkov_py not built; run `cargo build --release -p qmarkov-py`")


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    q = load()
    failures = []

    def expect(name, ok):
        print(("ok   " if ok else "FAIL ") + name)
        if not ok:
            failures.append(name)

    mixed = q.State([[0.5, 0], [0, 0.5]])
    expect("maximally mixed qubit entropy is log 2", close(mixed.entropy(), math.log(2), 1e-12))

    rho = [[0.75, 0], [0, 0.25]]
    sigma = [[0.5, 0], [0, 0.5]]
    d = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
    expect("classical relative entropy", close(q.relative_entropy(rho, sigma), d, 1e-12))
    expect("measured equals Umegaki for commuting pair", close(q.measured_relative_entropy(rho, sigma), d, 1e-6))

    h1 = q.random_hermitian(3, seed=1)
    h2 = q.random_hermitian(3, seed=2)
    rep = q.check_gt2(h1, h2)
    expect("Golden-Thompson check passes", rep["pass"] and rep["margin"] >= -1e-9)

    state = q.random_density(8, shape=[2, 2, 2], seed=5)
    fr = q.fr_check(state)
    expect("recovery bound holds on a random tripartite state", all(c["pass"] for c in fr["checks"]))

    out = q.recover(state, "petz")
    expect("recovered state keeps its shape", out.shape == [2, 2, 2])

    try:
        q.State([[0.7, 0], [0, 0.7]])
        expect("unnormalized state rejected", False)
    except ValueError as e:
        expect("unnormalized state rejected", str(e).startswith("["))

    try:
        q.Channel([[[1, 0], [0, 1]], [[1, 0], [0, 0]]])
        expect("non-TPCP channel rejected", False)
    except ValueError as e:
        expect("non-TPCP channel rejected", "NOT_TPCP" in str(e))

    ch = q.Channel.identity(2)
    expect("identity channel", q.trace_distance(ch.apply(rho), rho) < 1e-14)

    a = q.appendix_a(n=10, p=0.5, q=0.0)
    expect("example A max-divergence is one bit", close(a["dmax_bits"], 1.0, 1e-12))

    s = q.slater(3)
    expect("Slater minimum CMI within bound", s["min_cmi"] <= s["bound"] + 1e-9)

    expect("beta_0(0) = pi/4", close(q.beta_density(0.0, 0.0), math.pi / 4, 1e-12))

    if failures:
        sys.exit(f"{len(failures)} smoke test(s) failed")
    print("all smoke tests passed")


if __name__ == "__main__":
    main()
