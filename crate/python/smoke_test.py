#!/usr/bin/env python3
"""Smoke test for the mander extension module.

Builds the cdylib with cargo, loads it as `mander`, and exercises the
bound surface end to end: map and plan construction, validity, metrics,
enumeration, local search, both gadget families, and document round
trips. Exact values cross the boundary as "P/Q" strings, so checks use
fractions.Fraction rather than floats.

Run from anywhere: python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "mander-py", "--release"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libmander.so"
    stage = Path(tempfile.mkdtemp(prefix="mander-py-"))
    shutil.copy2(lib, stage / "mander.so")
    sys.path.insert(0, str(stage))
    import mander

    return mander


def expect_value_error(fn, label):
    try:
        fn()
    except ValueError:
        return
    raise AssertionError(f"{label}: expected ValueError")


def main():
    m = build_and_import()

    # Map construction and accessors.
    grid = m.Map.grid(2, 2, [(0, 0, 2, 1), (0, 1, 2, 1), (1, 0, 2, 0), (1, 1, 2, 2)], 2)
    assert grid.cell_count == 4
    assert grid.kappa == 2
    assert grid.scale == 1
    assert grid.total_pop == 8
    assert grid.total_party_a == 4
    assert grid.is_grid
    assert grid.edge_count == 4
    assert not grid.has_gadget
    assert grid.ids() == ["0,0", "0,1", "1,0", "1,1"]
    assert grid.cell("1,1") == (2, 2)
    assert sorted(grid.neighbors("0,0")) == ["0,1", "1,0"]

    planar = m.Map.planar(
        [("a", 3, 1), ("b", 3, 2), ("c", 3, 0), ("d", 3, 3)],
        [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        2,
    )
    assert not planar.is_grid
    assert planar.edge_count == 4

    # Plans and validity.
    rows = m.Plan.from_assignment(grid, {"0,0": 1, "0,1": 1, "1,0": 2, "1,1": 2})
    cols = m.Plan.from_assignment(grid, {"0,0": 1, "0,1": 2, "1,0": 1, "1,1": 2})
    report = m.validate(grid, rows, "strict")
    assert report["valid"] and report["connected_ok"] and report["balance_ok"]
    assert report["max_pop"] == report["min_pop"] == 4
    assert report["offending_districts"] == []

    lopsided = m.Plan.from_assignment(grid, {"0,0": 1, "0,1": 1, "1,0": 1, "1,1": 2})
    bad = m.validate(grid, lopsided, "strict")
    assert not bad["valid"] and not bad["balance_ok"] and bad["connected_ok"]
    assert {d["district"] for d in bad["offending_districts"]} == {1, 2}

    # District tallies and whole-plan metrics on a 1x4 path.
    path = m.Map.grid(1, 4, [(0, 0, 5, 4), (0, 1, 5, 3), (0, 2, 5, 2), (0, 3, 5, 2)], 2)
    halves = m.Plan.from_assignment(path, {"0,0": 1, "0,1": 1, "0,2": 2, "0,3": 2})
    stats = m.district_stats(path, halves)
    assert [s["pop"] for s in stats] == [10, 10]
    assert [s["party_a"] for s in stats] == [7, 4]
    assert [s["winner"] for s in stats] == ["A", "B"]
    for s in stats:
        assert s["wasted_a_x2"] + s["wasted_b_x2"] == s["pop"]

    sc = m.score(path, halves)
    assert sc["raw_seats_a"] == 1
    assert Fraction(sc["n_seat_c_a"]) == Fraction(1, 2)
    assert Fraction(sc["n_vote_c_a"]) == Fraction(11, 20)
    assert sc["effgap_x2"] == 4
    assert Fraction(sc["effgap_normalized"]) == Fraction(4, 2 * 20)
    assert sc["identity_residual"] is not None
    assert Fraction(sc["identity_residual"]) == 0

    # Partisan bias: uniform betas agree with the explicit alpha/kappa
    # split, and the mirror shift is exact.
    uniform = m.partisan_bias(path, halves)
    explicit = m.partisan_bias(path, halves, betas=["1/20", "1/20"])
    assert Fraction(uniform) == Fraction(explicit)
    expect_value_error(
        lambda: m.partisan_bias(path, halves, betas=["1/10", "1/10"]),
        "betas summing past alpha",
    )

    sv = m.seat_vote(path, halves, "1")
    assert sv["q"] >= 1
    assert Fraction(sv["pow_q"]) >= 0
    assert isinstance(sv["approx"], float)

    # Compactness: squares score 1/4 of pi, strips score lower.
    board = m.Map.grid(3, 4, [(r, c, 2, 1) for r in range(3) for c in range(4)], 2)
    square = m.polsby_popper(board, ["0,0", "0,1", "1,0", "1,1"])
    assert Fraction(square["pi_multiple"]) == Fraction(1, 4)
    strip = m.polsby_popper(board, ["0,0", "0,1", "0,2", "0,3"])
    assert Fraction(strip["pi_multiple"]) == Fraction(4, 25)
    plain = m.polsby_popper(board, ["0,0"], constant="1")
    assert Fraction(plain["value"]) == Fraction(1, 16)
    flags = m.compactness_check(grid, rows, "1/5", "1/3")
    assert flags == [True, True]

    # Enumeration: the 2x2 strict instance has exactly the two splits.
    res = m.enumerate(grid, "strict")
    assert res["count"] == 2 and res["exhausted"] and not res["truncated"]
    res = m.enumerate(grid, "strict", objective="effgap-min", max_best=4)
    assert res["count"] == 2
    assert res["best_value"] is not None
    assert len(res["best_plans"]) >= 1
    best_assignment = res["best_plans"][0]
    best = m.Plan.from_assignment(grid, best_assignment)
    assert m.validate(grid, best, "strict")["valid"]

    # Local search reaches the enumerated optimum on a small instance.
    opt = m.optimize(grid, "strict", "effgap-min", seed=7, restarts=4, iters=200)
    assert Fraction(opt["value"]) == Fraction(res["best_value"])
    assert opt["restarts_succeeded"] >= 1
    assert len(opt["trace"]) >= 1
    assert all(isinstance(t["accepted"], bool) for t in opt["trace"])
    opt_plan = m.Plan.from_assignment(grid, opt["plan"])
    assert m.validate(grid, opt_plan, "strict")["valid"]

    # Annealing accepts a schedule and still returns a valid plan.
    ann = m.optimize(
        grid, "strict", "effgap-min", seed=9, restarts=2, iters=100, anneal=("2", "9/10")
    )
    assert m.validate(grid, m.Plan.from_assignment(grid, ann["plan"]), "strict")["valid"]

    # Number-partitioning gadget: generate, round-trip with provenance,
    # verify completeness, and verify soundness on a no-instance.
    sv_map = m.gen_seatvote([2, 4, 6, 8], 2)
    assert sv_map.has_gadget
    doc = sv_map.to_json()
    again = m.Map.from_json(doc)
    assert again.to_json() == doc
    verdict = m.verify_gadget(again, "completeness:2,8")
    assert verdict["all_hold"]
    assert verdict["trivial_plan_valid"] and verdict["completeness_holds"]
    expect_value_error(
        lambda: m.verify_gadget(sv_map, "completeness:2,4"),
        "non-solution completeness claim",
    )

    no_inst = m.gen_seatvote([2, 4, 6, 10], 2)
    verdict = m.verify_gadget(no_inst, "soundness")
    assert verdict["soundness_holds"] is True
    assert verdict["all_hold"]

    # Independent-set gadget: builtin and explicit sources agree, the
    # wasted-vote identity holds, and upsilon steps by the affine rule.
    mis = m.gen_mis(builtin="k4")
    n = 4
    assert mis.cell_count == 19 * n // 2
    assert mis.edge_count == 10 * n
    assert mis.kappa == 9 * n // 2
    explicit_mis = m.gen_mis(
        n=4, edges=[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    )
    assert explicit_mis.to_json() == mis.to_json()

    verdict = m.verify_gadget(mis, "upsilon:0")
    assert verdict["completeness_holds"] is True
    assert verdict["soundness_holds"] is True
    expect_value_error(
        lambda: m.verify_gadget(mis, "upsilon:0,1"),
        "dependent set accepted",
    )

    eps, delta = Fraction(1, 4), Fraction(1, 6400)
    u0 = Fraction(m.upsilon(0, 4, "1/4", "1/6400"))
    u1 = Fraction(m.upsilon(1, 4, "1/4", "1/6400"))
    assert u0 - u1 == Fraction(-3) - Fraction(3, 2) * eps + 3 * delta

    # Documents round-trip through both directions and spot bad input.
    plan_doc = rows.to_json(grid)
    parsed = json.loads(plan_doc)
    assert parsed["assignment"] == {"0,0": 1, "0,1": 1, "1,0": 2, "1,1": 2}
    back = m.Plan.from_json(grid, plan_doc)
    assert back.assignment(grid) == rows.assignment(grid)

    grid_doc = grid.to_json()
    assert m.Map.from_json(grid_doc).to_json() == grid_doc
    planar_doc = planar.to_json()
    assert m.Map.from_json(planar_doc).to_json() == planar_doc

    expect_value_error(lambda: m.validate(grid, rows, "bogus"), "bad balance spec")
    expect_value_error(lambda: m.verify_gadget(grid, "soundness"), "gadget-free map")
    expect_value_error(
        lambda: m.Plan.from_assignment(grid, {"0,0": 1}), "partial assignment"
    )
    expect_value_error(lambda: m.Map.from_json("{}"), "malformed document")

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
