import json

import pytest

GOAL_HEADER = ("eps,m,residual,worst_side,worst_set,"
               "feasible_d0.9,feasible_d0.5,feasible_d0.1")


def write_goal_csv(path, rows):
    lines = ["# schema=roe-goal/1", GOAL_HEADER]
    for eps, m, residual in rows:
        flags = ",".join("1" if residual < d else "0" for d in (0.9, 0.5, 0.1))
        lines.append(f"{eps},{m},{residual},source,0|1,{flags}")
    path.write_text("\n".join(lines) + "\n")


def write_certificate(path, *, residual=0.0, closeness=0.0, truth=None,
                      failed=False):
    if failed:
        doc = {
            "schema": "roe-cert/1",
            "h": None,
            "params": {"strategy": "support", "delta": 0.5, "seed": 0},
            "verified": False,
            "failures": ["extraction failed at stage 'hall_forward'"],
            "failure": {"stage": "hall_forward",
                        "witness": {"deficiency": [0, 1], "neighborhood": [2]},
                        "attempts": []},
        }
    else:
        doc = {
            "schema": "roe-cert/1",
            "h": {"0": 0, "1": 1},
            "f_raw": {"0": 0, "1": 1},
            "g_raw": {"0": 0, "1": 1},
            "params": {"strategy": "support", "eps": 0.5, "m": 0.0,
                       "delta": 0.5, "seed": 0},
            "closeness_h_f": closeness,
            "goal_residual": residual,
            "goal_witness": {"side": "source", "set": [], "residual": residual},
            "expansion": {"1": 1.0, "2": 2.0},
            "expansion_inv": {"1": 1.0, "2": 2.0},
            "closeness_fg_id": 0.0,
            "closeness_gf_id": 0.0,
            "verified": True,
            "failures": [],
        }
        if truth is not None:
            doc["truth"] = truth
    path.write_text(json.dumps(doc))


def write_config(path, seed=0):
    path.write_text(json.dumps({
        "schema": "roe-config/1",
        "iso": "iso0",
        "strategy": "support",
        "eps_grid": [0.5, 0.3],
        "m_grid": [0, 1],
        "r_grid": [1],
        "delta": 0.5,
        "seed": seed,
        "provenance": {"kind": "perturbed", "radius": 1, "seed": seed},
    }))


@pytest.fixture
def synthetic_batch(tmp_path):
    """Three runs: two successes with sweeps and truth, one failure."""
    batch = tmp_path / "batch"
    for i, (residual, radius, close) in enumerate(
            [(0.1, 0.0, 0.0), (0.4, 1.0, 2.0)]):
        run = batch / f"run{i}"
        run.mkdir(parents=True)
        write_certificate(run / "certificate.json", residual=residual,
                          truth={"closeness_h_truth": close, "radius": radius,
                                 "seed": i})
        write_config(run / "config.json", seed=i)
        write_goal_csv(run / "goal.csv",
                       [(0.5, 0, residual), (0.5, 1, residual / 2),
                        (0.3, 0, residual / 2), (0.3, 1, residual / 4)])
    failed = batch / "run2"
    failed.mkdir(parents=True)
    write_certificate(failed / "certificate.json", failed=True)
    write_config(failed / "config.json", seed=2)
    return batch
