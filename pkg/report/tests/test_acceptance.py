"""Acceptance: report a real 10-run batch produced through the roe CLI.

The batch is built by invoking the core CLI as a subprocess, i.e. purely
through its public command and file interfaces. Skipped when the core
package is not installed in this environment.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from roe_report.cli import build, main

roekit_available = subprocess.run(
    [sys.executable, "-c", "import roekit"], capture_output=True).returncode == 0

pytestmark = pytest.mark.skipif(
    not roekit_available, reason="roekit CLI not installed")


def roe(*args):
    proc = subprocess.run([sys.executable, "-m", "roekit.cli", *args],
                          capture_output=True, text=True)
    return proc.returncode


@pytest.fixture(scope="module")
def real_batch(tmp_path_factory):
    root = tmp_path_factory.mktemp("batch")
    space = root / "grid.space.json"
    assert roe("gen", "grid", "4", "4", "--out", str(space)) == 0
    for seed in range(9):
        prefix = root / f"iso{seed}"
        assert roe("iso", "--space", str(space), "--random-bce", "1",
                   "--perturb", "1", "--seed", str(seed),
                   "--out", str(prefix)) == 0
        run_dir = root / f"run{seed}"
        assert roe("extract", "--iso", str(prefix),
                   "--out", str(run_dir)) == 0
        assert roe("goal", "--iso", str(prefix), "--eps", "0.5,0.3",
                   "--m", "0,1", "--out", str(run_dir)) == 0
    # tenth run: a full-diameter rotation at a high threshold fails
    prefix = root / "iso9"
    assert roe("iso", "--space", str(space), "--perturb", "6", "--seed", "9",
               "--out", str(prefix)) == 0
    assert roe("extract", "--iso", str(prefix), "--eps", "0.9", "--m", "0",
               "--out", str(root / "run9")) == 2
    return root


def test_ten_run_batch_renders(real_batch, tmp_path):
    out = tmp_path / "out"
    rc = main([str(real_batch), "--out", str(out)])
    assert rc == 0
    for name in ("goal_surface.svg", "recovery.svg", "index.html"):
        assert (out / name).exists(), f"{name} missing"
    html = (out / "index.html").read_text()
    assert html.count("run") >= 10
    print("PASS report renders heatmap, recovery chart, and summary "
          "for a 10-run batch")


def test_failure_row_rendered(real_batch, tmp_path):
    out = tmp_path / "out"
    main([str(real_batch), "--out", str(out)])
    html = (out / "index.html").read_text()
    assert 'class="failed"' in html
    assert "hall_" in html
    print("PASS failed run renders its failure row with stage and witness")


def test_rerun_byte_idempotent(real_batch, tmp_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    build(real_batch, out1)
    build(real_batch, out2)
    for name in ("goal_surface.svg", "recovery.svg", "index.html"):
        assert Path(out1 / name).read_bytes() == Path(out2 / name).read_bytes()
    print("PASS re-running the report is byte-idempotent")
