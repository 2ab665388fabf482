#!/usr/bin/env python3
"""Smoke test for the nkcheck_py extension module.

Builds nothing itself: run `cargo build -p nkcheck-py` first (or pass
--release and build in release mode). The script locates the compiled
cdylib under target/, stages it under an importable name, and checks a
few known geometric values through the Python API.
"""

import argparse
import json
import math
import shutil
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module(profile: str) -> Path:
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    lib = REPO / "target" / profile / "libnkcheck_py.so"
    if not lib.exists():
        sys.exit(
            f"{lib} not found — run `cargo build -p nkcheck-py"
            + (" --release`" if profile == "release" else "`")
        )
    stage = Path(tempfile.mkdtemp(prefix="nkcheck_py_"))
    shutil.copy2(lib, stage / f"nkcheck_py{suffix}")
    return stage


def approx(x, y, tol=1e-12):
    return all(abs(a - b) <= tol for a, b in zip(x, y)) if hasattr(x, "__len__") else abs(x - y) <= tol


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--release", action="store_true", help="use target/release")
    args = ap.parse_args()

    sys.path.insert(0, str(stage_module("release" if args.release else "debug")))
    import nkcheck_py as nk

    # J on a tangent vector at (1, 1): J(α, β) = ((2β−α)/√3, (β−2α)/√3).
    base = nk.SurfacePoint([1, 0, 0, 0], [1, 0, 0, 0])
    v = nk.TangentVector(base, [1, 0, 0], [0, 0, 0])
    jv = nk.apply_j(v)
    s3 = nk.SQRT3
    assert approx(jv.alpha, [-1 / s3, 0, 0]), jv.alpha
    assert approx(jv.beta, [-2 / s3, 0, 0]), jv.beta

    # J² = −Id and the metric value g(v, v) = 4/3 for this v.
    jjv = nk.apply_j(jv)
    assert approx(jjv.alpha, [-1, 0, 0]) and approx(jjv.beta, [0, 0, 0])
    assert approx(nk.metric_g(v, v), 4 / 3), nk.metric_g(v, v)
    assert approx(v.norm(), math.sqrt(4 / 3))

    # P swaps the two components; Q negates the first.
    w = nk.TangentVector(base, [1, 2, 3], [4, 5, 6])
    assert approx(nk.apply_p(w).alpha, [4, 5, 6]) and approx(nk.apply_p(w).beta, [1, 2, 3])
    assert approx(nk.apply_q(w).alpha, [-1, -2, -3]) and approx(nk.apply_q(w).beta, [4, 5, 6])

    # G is skew; curvature spot value R((i,0),(j,0),(j,0)) = (i,0).
    x = nk.TangentVector(base, [1, 0, 0], [0, 0, 0])
    y = nk.TangentVector(base, [0, 1, 0], [0, 0, 0])
    gxy = nk.tensor_g(x, y)
    gyx = nk.tensor_g(y, x)
    assert approx(gxy.alpha, [-a for a in gyx.alpha]) and approx(gxy.beta, [-b for b in gyx.beta])
    r = nk.curvature_r(x, y, y)
    assert approx(r.alpha, [1, 0, 0]) and approx(r.beta, [0, 0, 0]), (r.alpha, r.beta)

    # Charts: registry, evaluation lands on S³×S³, classification.
    ids = nk.chart_ids()
    assert len(ids) == 7 and "thm52" in ids, ids
    pt = nk.chart_point("thm42.f1", 0.1, -0.2, 0.3)
    assert approx(sum(c * c for c in pt.p), 1, 1e-10)
    assert approx(sum(c * c for c in pt.q), 1, 1e-10)

    ang = nk.chart_angles("thm52", 0.1, -0.2, 0.3)
    assert ang["p_class"] == "D1_PERP_SUBCASE_D2", ang
    assert approx(ang["theta"], math.pi / 2, 1e-6)
    assert approx(ang["a"], [1, 0, 0, 0], 1e-5)

    assert nk.chart_angles("thm42.f2", 0.1, 0.2, -0.1)["p_class"] == "D1_EQUALS_D1"
    assert approx(abs(nk.integrability_defect("cor.f1", 0.1, -0.2, 0.3)), 2 / s3, 1e-4)
    assert approx(nk.integrability_defect("thm52", 0.1, -0.2, 0.3), 0, 1e-4)

    # Suites through the bindings: JSON report, all green, deterministic.
    rep = json.loads(nk.run_suite("identities", seed=7, samples=50))
    assert rep["version"] == "report_v1" and rep["summary"]["fail"] == 0, rep["summary"]
    assert nk.run_suite("identities", seed=7, samples=50) == nk.run_suite(
        "identities", seed=7, samples=50
    )
    rep = json.loads(nk.run_suite("chart:cor.f2", grid=2))
    assert rep["summary"]["fail"] == 0, rep["summary"]

    # Errors surface as ValueError.
    for bad in (
        lambda: nk.SurfacePoint([0, 0, 0, 0], [1, 0, 0, 0]),
        lambda: nk.chart_point("nope", 0, 0, 0),
        lambda: nk.run_suite("nope"),
    ):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError(f"{bad} did not raise")

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
