"""Smoke test for the dagp extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/dagp-*.whl
"""

import math
import tempfile

import dagp


def main():
    g = dagp.Graph.random(6, 0.3, seed=1)
    assert g.is_strongly_connected()
    assert all(abs(sum(row)) < 1e-12 for row in g.w)

    p = dagp.Problem.logcosh(6, 4, seed=2)
    out = dagp.solve_dagp(p, g, mu=0.03, rho=0.1, alpha=0.5, iterations=3000, seed=3, every=100)
    last = out["trace"][-1]
    print("logcosh gap", last["obj_gap"], "feas", last["feas_max"])
    assert last["iter"] == 3000
    assert abs(last["obj_gap"]) < 1e-3 and last["feas_max"] < 1e-4

    y = dagp.project_simplex([0.5, -1.0, 2.0], 1.0)
    assert abs(sum(y) - 1.0) < 1e-12 and min(y) >= 0.0
    h = dagp.project_halfspace([2.0, 2.0], [1.0, 0.0], 1.0)
    assert h == [1.0, 2.0]

    src, dst = [0.5, 0.5], [0.25, 0.75]
    cost = [[0.0, 1.0], [1.0, 0.0]]
    plan, value = dagp.transport_lp(src, dst, cost)
    assert abs(value - 0.25) < 1e-9
    sk = dagp.sinkhorn(src, dst, cost)
    assert abs(sum(map(sum, sk)) - 1.0) < 1e-6

    closed, roots = dagp.gd_roots(1.0, 0.5, 1.0)
    assert closed is not None
    assert abs(closed[0] - (2 - math.sqrt(3))) < 1e-12
    assert min(abs(r[0] - closed[0]) for r in roots) < 1e-8

    cfg = dagp.ExperimentConfig.from_toml('experiment = "gd_check"\ngd_pairs = 4\n')
    with tempfile.TemporaryDirectory() as d:
        cfg.output_dir = d
        summary, files = cfg.run()
        assert any(f.endswith("gd_check.csv") for f in map(str, files))
        print(summary.strip().splitlines()[-1])

    try:
        dagp.ExperimentConfig.from_toml("bogus = 1\n")
    except dagp.DagpError as e:
        print("rejected:", e)
    else:
        raise AssertionError("unknown key accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
