#!/usr/bin/env python3
"""Smoke test for the banachfit_py extension module.

Builds nothing itself: run `cargo build -p banachfit-py` first (add
`--release` and set BANACHFIT_PROFILE=release to use the release artifact).
The script stages the cdylib under the import name `banachfit_py` and checks
the module against the built-in reference example.
"""

import json
import os
import shutil
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)


def stage_module() -> str:
    profile = os.environ.get("BANACHFIT_PROFILE", "debug")
    candidates = [
        os.path.join(ROOT, "target", profile, "libbanachfit_py.so"),
        os.path.join(ROOT, "target", profile, "libbanachfit_py.dylib"),
        os.path.join(ROOT, "target", profile, "banachfit_py.dll"),
    ]
    for built in candidates:
        if os.path.exists(built):
            staging = tempfile.mkdtemp(prefix="banachfit_py_")
            suffix = ".pyd" if built.endswith(".dll") else ".so"
            shutil.copy2(built, os.path.join(staging, "banachfit_py" + suffix))
            return staging
    sys.exit(
        "banachfit_py cdylib not found; run `cargo build -p banachfit-py` first"
    )


sys.path.insert(0, stage_module())
import banachfit_py  # noqa: E402

FAILURES = []
CHECKS = 0


def check(name, ok, detail=""):
    global CHECKS
    CHECKS += 1
    tag = "PASS" if ok else "FAIL"
    print(f"{tag} {name} {detail}")
    if not ok:
        FAILURES.append(name)


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


ctx = banachfit_py.KernelContext([2, 2, 1])
check("context.layers", ctx.layers == [2, 2, 1])
check("context.decay_exponent", ctx.decay_exponent == 3.0)
check("context.param_len", ctx.param_len() == 9)

theta1 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
check("param_norm(theta1)", ctx.param_norm(theta1) == 1.0)
check("forward selector", ctx.forward(theta1, [1.0, -1.0]) == [1.0])
check("kernel selector", ctx.kernel([1.0, -1.0], theta1) == [1.0])
check("xi(theta1)", ctx.xi(theta1) == 1.0)
check("xi decays", close(ctx.xi([2.0] + [0.0] * 8), 1.0 / 8.0))
check("input_bound", ctx.input_bound([2.0, -2.0]) == 2.0)

est = ctx.evaluation_sup_norm([1.0, -1.0])
check(
    "sup norm certified at 1",
    est["certified"] and est["lower"] == 1.0 and est["upper"] == 1.0,
)

bracket = banachfit_py.estimate_sup(
    ctx, [(1.0, [1.0, -1.0]), (-1.0, [-1.0, 0.0])], starts=48, iters=150
)
check(
    "difference bracket",
    bracket["upper"] == 1.0 and bracket["lower"] >= 1.0 - 1e-6,
    f"[{bracket['lower']}, {bracket['upper']}]",
)

inputs = [[1.0, -1.0], [-1.0, 0.0], [0.0, 1.0]]
table = banachfit_py.enumerate_admissible(ctx, inputs, starts=48, iters=150)
admissible = [row for row in table if row["verdict"] == "admissible"]
check("27 sign vectors", len(table) == 27)
check("13 admissible", len(admissible) == 13, f"got {len(admissible)}")
check(
    "is_admissible singleton",
    banachfit_py.is_admissible(ctx, inputs, [1, 0, 0], starts=16, iters=60)
    == "admissible",
)

report = banachfit_py.solve(
    ctx,
    inputs,
    [[2.0], [-3.0], [0.5]],
    seed=42,
    starts=64,
    iters=200,
    lambda0=0.1,
)
component = report["components"][0]
check("beta", component["beta"] == [2.0, -3.0, 0.5], json.dumps(component["beta"]))
check("norm bracket", component["norm_bracket"] == [5.0, 5.5])
check("status candidate", component["status"] == "candidate")
check("decision", component["decision"]["kind"] == "unregularized")
best = component["sweep"][0]
check(
    "best sweep row",
    best["sign"] == [1, -1, 0] and close(best["r_value"], 341.0 / 600.0, 1e-9),
    f"R = {best['r_value']}",
)

expansion = [
    (beta, anchor["theta"])
    for beta, anchor in zip(component["beta"], component["anchors"])
]
value = banachfit_py.evaluate_expansion(ctx, expansion, [1.0, -1.0])
check("expansion interpolates", close(value, 2.0, 1e-9), f"f(x1) = {value}")

certified = banachfit_py.solve(
    ctx,
    inputs,
    [[-1.0], [0.0], [1.0]],
    seed=42,
    starts=64,
    iters=200,
)
comp = certified["components"][0]
check(
    "certified minimal",
    comp["status"] == "certified-minimal"
    and comp["norm_bracket"] == [2.0, 2.0]
    and comp["witness_sign"] == [-1, 0, 1],
)

ctx3 = banachfit_py.KernelContext([2, 2, 3])
vector = banachfit_py.solve(
    ctx3,
    inputs,
    [[2.0, -1.0, 0.0], [-3.0, 0.5, 0.0], [0.5, 1.0, 0.0]],
    seed=7,
    starts=32,
    iters=120,
)
check("three components", len(vector["components"]) == 3)
check(
    "combined bracket adds",
    close(
        vector["combined"]["norm_bracket"][1],
        sum(c["norm_bracket"][1] for c in vector["components"]),
        1e-12,
    ),
)
check(
    "zero component is zero",
    vector["components"][2]["norm_bracket"] == [0.0, 0.0],
)

errored = False
try:
    banachfit_py.KernelContext([2])
except ValueError:
    errored = True
check("bad architecture raises ValueError", errored)

print()
if FAILURES:
    print(f"{len(FAILURES)} of {CHECKS} checks failed: {', '.join(FAILURES)}")
    sys.exit(1)
print(f"all {CHECKS} checks passed")
