"""Smoke test for the Python bindings.

Build the extension first:

    cargo build -p sublap-python --release --features extension-module

The script imports ``sublap_py`` from the path if it is installed, otherwise
from ``target/release``.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load_module():
    try:
        import sublap_py

        return sublap_py
    except ImportError:
        pass
    for name in ("libsublap_py.so", "libsublap_py.dylib", "sublap_py.dll"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            suffix = ".pyd" if name.endswith(".dll") else ".so"
            target = pathlib.Path(tempfile.mkdtemp()) / ("sublap_py" + suffix)
            shutil.copy(built, target)
            spec = importlib.util.spec_from_file_location("sublap_py", target)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("sublap_py not found; build it with cargo build -p sublap-python --release --features extension-module")


def close(a, b, tol=1e-6):
    return abs(a - b) <= tol


def main():
    sl = load_module()
    T = sl.Transformation

    c4 = T.graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert (c4.n, c4.m, c4.degrees) == (4, 4, [2, 2, 2, 2])
    assert c4.evaluate([0, 1]) == [0.0, 1.0, 0.0, 1.0]
    assert close(c4.conductance([0, 1]), 0.5)
    lam, vec = c4.diffusion_eigenvalue(restarts=2, seed=1)
    assert close(lam, 1.0, 1e-3), lam
    assert close(c4.rayleigh(vec), lam, 1e-9)

    k4 = T.load(str(ROOT / "fixtures" / "k4.graph"))
    phi, best = k4.min_conductance()
    assert close(phi, 2 / 3) and len(best) == 2
    cert = k4.certify(seed=0)
    assert cert["holds"] and close(cert["lambda_tilde"] / 2, 2 / 3)
    res = k4.approx_eigenvalue("symmetric", eps=0.5, seed=0)
    assert res["sdp_value"] <= 4 / 3 + 1e-4 and res["lambda_hat"] >= res["sdp_value"] - 1e-6

    arc = T.digraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    point, norm_sq = arc.min_norm_point(0)
    assert norm_sq <= 1e-12 and len(point) == 2
    gen = arc.approx_eigenvalue("general", seed=3)
    phi, cut = arc.strong_sweep(gen["vector"])
    assert phi <= 2 * math.sqrt(gen["lambda_hat"]) + 1e-9

    ring = T.hypergraph(6, [[0, 1, 2], [3, 4, 5], [2, 3], [0, 5]])
    assert sorted(map(tuple, ring.extreme_points(2))) == [(-1.0, 1.0), (1.0, -1.0)]
    points, radius = ring.cover(0, 0.8)
    assert points and radius > 0
    assert ring.lovasz([0.0, 0.5, 1.0, 0.0, 0.0, 0.0])[0] == 1.0

    try:
        arc.approx_eigenvalue("symmetric")
    except ValueError:
        pass
    else:
        raise AssertionError("symmetric mode accepted a digraph")

    print(f"sublap_py {sl.__version__}: all checks passed")


if __name__ == "__main__":
    main()
