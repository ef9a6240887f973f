"""CLI drive: commands, exit codes, byte determinism, file formats."""

import json

import pytest

from roekit.cli import main


def run(args):
    return main(args)


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def gen_space(workdir, kind="grid", params=("4", "4"), name="s.space.json"):
    out = workdir / name
    assert run(["gen", kind, *params, "--out", str(out)]) == 0
    return out


class TestGen:
    def test_path_growth_output(self, workdir, capsys):
        out = gen_space(workdir, "path", ("5",), "p.space.json")
        printed = capsys.readouterr().out
        assert "growth(r=1) = 3" in printed
        doc = json.loads(out.read_text())
        assert doc["points"] == list(range(5))
        assert len(doc["edges"]) == 4

    def test_grid_growth(self, workdir, capsys):
        gen_space(workdir, "grid", ("3", "3"))
        assert "growth(r=1) = 5" in capsys.readouterr().out

    def test_cycle_too_small(self, workdir, capsys):
        assert run(["gen", "cycle", "1",
                    "--out", str(workdir / "c.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_tree_and_expander(self, workdir):
        gen_space(workdir, "tree", ("2", "3"), "t.json")
        gen_space(workdir, "expander-sample", ("10", "3"), "e.json")

    def test_random_geometric_seeded(self, workdir):
        out1 = gen_space(workdir, "random-geometric", ("12", "0.5"), "r1.json")
        out2 = gen_space(workdir, "random-geometric", ("12", "0.5"), "r2.json")
        assert out1.read_bytes() == out2.read_bytes()

    def test_byte_deterministic(self, workdir):
        a = gen_space(workdir, "grid", ("3", "3"), "a.json")
        b = gen_space(workdir, "grid", ("3", "3"), "b.json")
        assert a.read_bytes() == b.read_bytes()


class TestIso:
    def test_identity_iso(self, workdir):
        space = gen_space(workdir, "path", ("5",))
        assert run(["iso", "--space", str(space), "--bijection", "identity",
                    "--out", str(workdir / "id")]) == 0
        sidecar = json.loads((workdir / "id.iso.json").read_text())
        assert sidecar["schema"] == "roe-iso/1"
        assert sidecar["provenance"]["kind"] == "bijection"
        from roekit.cli import load_iso
        import numpy as np

        iso, _ = load_iso(str(workdir / "id"))
        assert np.array_equal(iso.u, np.eye(5))

    def test_random_bce_displacement_bound(self, workdir, capsys):
        space = gen_space(workdir, "grid", ("4", "4"))
        assert run(["iso", "--space", str(space), "--random-bce", "2",
                    "--seed", "7", "--out", str(workdir / "bce")]) == 0
        assert "expansion(r=1)" in capsys.readouterr().out
        from roekit import load_space

        doc = json.loads((workdir / "bce.iso.json").read_text())
        loaded = load_space(space)
        f = doc["provenance"]["f"]
        assert max(loaded.d(int(k), v) for k, v in f.items()) <= 2.0

    def test_perturbed_kind(self, workdir):
        space = gen_space(workdir, "grid", ("3", "3"))
        assert run(["iso", "--space", str(space), "--perturb", "1",
                    "--seed", "3", "--out", str(workdir / "pert")]) == 0
        doc = json.loads((workdir / "pert.iso.json").read_text())
        assert doc["provenance"]["kind"] == "perturbed"
        assert doc["provenance"]["radius"] == 1

    def test_seed_determinism(self, workdir):
        space = gen_space(workdir, "grid", ("3", "3"))
        for name in ("x", "y"):
            run(["iso", "--space", str(space), "--random-bce", "1",
                 "--perturb", "1", "--seed", "5",
                 "--out", str(workdir / name)])
        assert (workdir / "x.op").read_bytes() == (workdir / "y.op").read_bytes()
        docs = []
        for name in ("x", "y"):
            doc = json.loads((workdir / f"{name}.iso.json").read_text())
            doc.pop("matrix")  # sidecars name their own matrix file
            docs.append(doc)
        assert docs[0] == docs[1]


class TestExtract:
    def test_identity_certificate(self, workdir, capsys):
        space = gen_space(workdir, "path", ("6",))
        run(["iso", "--space", str(space), "--out", str(workdir / "id")])
        rc = run(["extract", "--iso", str(workdir / "id"),
                  "--out", str(workdir / "run")])
        assert rc == 0
        doc = json.loads((workdir / "run" / "certificate.json").read_text())
        assert doc["h"] == {str(i): i for i in range(6)}
        assert doc["closeness_h_f"] == 0
        assert doc["verified"] is True
        config = json.loads((workdir / "run" / "config.json").read_text())
        assert config["schema"] == "roe-config/1"

    def test_reversal_recovered(self, workdir):
        space = gen_space(workdir, "path", ("5",))
        run(["iso", "--space", str(space), "--bijection", "reversal",
             "--out", str(workdir / "rev")])
        run(["extract", "--iso", str(workdir / "rev"),
             "--out", str(workdir / "run")])
        doc = json.loads((workdir / "run" / "certificate.json").read_text())
        assert doc["h"] == {str(i): 4 - i for i in range(5)}
        assert doc["truth"]["closeness_h_truth"] == 0

    def test_corrupt_matrix_exits_one(self, workdir, capsys):
        space = gen_space(workdir, "path", ("5",))
        run(["iso", "--space", str(space), "--out", str(workdir / "id")])
        blob = (workdir / "id.op").read_bytes()
        (workdir / "id.op").write_bytes(blob[:-4])
        rc = run(["extract", "--iso", str(workdir / "id"),
                  "--out", str(workdir / "run")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_extraction_failure_exits_two(self, workdir, capsys):
        # a full-diameter rotation empties every 0.9-support set
        space = gen_space(workdir, "path", ("8",))
        run(["iso", "--space", str(space), "--perturb", "7", "--seed", "2",
             "--out", str(workdir / "rot")])
        rc = run(["extract", "--iso", str(workdir / "rot"),
                  "--eps", "0.9", "--m", "0",
                  "--out", str(workdir / "run")])
        assert rc == 2
        assert "failed" in capsys.readouterr().err
        doc = json.loads((workdir / "run" / "certificate.json").read_text())
        assert doc["h"] is None
        assert doc["verified"] is False
        assert doc["failure"]["stage"].startswith("hall_")

    def test_byte_deterministic(self, workdir):
        space = gen_space(workdir, "grid", ("3", "3"))
        run(["iso", "--space", str(space), "--random-bce", "1", "--seed", "4",
             "--perturb", "1", "--out", str(workdir / "i")])
        for name in ("r1", "r2"):
            run(["extract", "--iso", str(workdir / "i"), "--seed", "9",
                 "--out", str(workdir / name)])
        assert (workdir / "r1" / "certificate.json").read_bytes() \
            == (workdir / "r2" / "certificate.json").read_bytes()

    def test_json_format_stdout(self, workdir, capsys):
        space = gen_space(workdir, "path", ("4",))
        run(["iso", "--space", str(space), "--out", str(workdir / "id")])
        capsys.readouterr()  # drop output of the setup commands
        rc = run(["extract", "--iso", str(workdir / "id"), "--format", "json",
                  "--out", str(workdir / "run")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema"] == "roe-cert/1"


class TestGoal:
    def test_csv_schema_and_rows(self, workdir):
        space = gen_space(workdir, "path", ("6",))
        run(["iso", "--space", str(space), "--out", str(workdir / "id")])
        rc = run(["goal", "--iso", str(workdir / "id"),
                  "--eps", "0.5,0.3", "--m", "0,1",
                  "--out", str(workdir / "run")])
        assert rc == 0
        lines = (workdir / "run" / "goal.csv").read_text().splitlines()
        assert lines[0] == "# schema=roe-goal/1"
        assert lines[1].split(",")[:3] == ["eps", "m", "residual"]
        assert len(lines) == 2 + 4
        for line in lines[2:]:
            cells = line.split(",")
            assert cells[2] == "0"       # exact bijection: residual 0
            assert cells[5:8] == ["1", "1", "1"]

    def test_byte_deterministic(self, workdir):
        space = gen_space(workdir, "grid", ("3", "3"))
        run(["iso", "--space", str(space), "--perturb", "1", "--seed", "3",
             "--out", str(workdir / "p")])
        for name in ("g1.csv", "g2.csv"):
            run(["goal", "--iso", str(workdir / "p"), "--eps", "0.5,0.2",
                 "--m", "0,1", "--seed", "11", "--out", str(workdir / name)])
        assert (workdir / "g1.csv").read_bytes() == (workdir / "g2.csv").read_bytes()

    def test_residual_antitone_in_csv(self, workdir):
        space = gen_space(workdir, "grid", ("3", "3"))
        run(["iso", "--space", str(space), "--perturb", "1", "--seed", "5",
             "--out", str(workdir / "p")])
        run(["goal", "--iso", str(workdir / "p"), "--eps", "0.4",
             "--m", "0,1,2", "--out", str(workdir / "g.csv")])
        lines = (workdir / "g.csv").read_text().splitlines()[2:]
        residuals = [float(line.split(",")[2]) for line in lines]
        assert residuals == sorted(residuals, reverse=True)


class TestSelftest:
    def test_passes(self, capsys):
        assert run(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "22/22 checks passed" in out
