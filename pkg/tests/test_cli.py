import subprocess
import sys
import time

import pytest

from medkg.cli import run

SMALL = ["--n-users", "30", "--n-tweets", "20", "--mean-degree", "4",
         "--likes-per-user", "1.8", "--n-new-users", "1"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run(["generate", *SMALL, "--seed", "0", "--out", str(d / "g.tsv")]) == 0
    assert run(["split", "--data", str(d / "g.tsv"), "--out-dir", str(d)]) == 0
    return d


def _kv(path):
    out = {}
    for line in path.read_text().splitlines():
        if line and not line.startswith("#"):
            k, v = line.split("=", 1)
            out[k] = v
    return out


def test_generate_is_deterministic(tmp_path):
    out = tmp_path / "a.tsv"
    blobs = []
    for seed in ("4", "4", "5"):
        assert run(["generate", *SMALL, "--seed", seed, "--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    assert blobs[0] != blobs[2]


def test_generate_pattern_kind_writes_partition(tmp_path):
    out = tmp_path / "sym.tsv"
    assert run(["generate", "--kind", "symmetry", "--n-users", "20", "--mean-degree", "2",
                "--out", str(out)]) == 0
    train = (tmp_path / "sym.train.tsv").read_text().splitlines()
    test = (tmp_path / "sym.test.tsv").read_text().splitlines()
    body = lambda lines: [x for x in lines if not x.startswith("#")]  # noqa: E731
    assert len(body(train)) + len(body(test)) == len(body(out.read_text().splitlines()))


def test_split_partitions(workspace):
    lines = lambda p: [x for x in p.read_text().splitlines() if not x.startswith("#")]  # noqa: E731
    whole = lines(workspace / "g.tsv")
    tr, te = lines(workspace / "train.tsv"), lines(workspace / "test.tsv")
    assert sorted(tr + te) == sorted(whole)
    assert len(te) == round(0.2 * len(whole))


def test_full_pipeline(workspace, capsys):
    d = workspace
    start = time.perf_counter()
    data = ["--data", str(d / "g.tsv")]
    for model in ("transe", "mde"):
        assert run(["train", *data, "--train", str(d / "train.tsv"), "--model", model,
                    "--iterations", "50", "--checkpoint", str(d / f"{model}.npz"),
                    "--report", str(d / f"{model}.train.txt")]) == 0
        assert _kv(d / f"{model}.train.kv")["model"] == model
        assert run(["evaluate", *data, "--test", str(d / "test.tsv"), "--checkpoint",
                    str(d / f"{model}.npz"), "--mode", "filtered", "--kv",
                    str(d / f"{model}.eval.kv")]) == 0
        kv = _kv(d / f"{model}.eval.kv")
        assert 0.0 < float(kv[f"{model}.mrr"]) <= 1.0
    assert run(["recommend", *data, "--train", str(d / "train.tsv"), "--checkpoint",
                str(d / "mde.npz"), "--user", "user_0000", "-k", "3",
                "--kv", str(d / "rec.kv")]) == 0
    recs = _kv(d / "rec.kv")
    assert len(recs) == 3
    probs = [float(v.split("\t")[3]) for v in recs.values()]
    assert probs == sorted(probs, reverse=True)
    assert run(["cohorts", *data, "--checkpoint", str(d / "mde.npz"), "--hub-min-followers",
                "8", "--b-following", "1,6", "--similarity", "0.3",
                "--kv", str(d / "coh.kv")]) == 0
    assert "new_users.size" in _kv(d / "coh.kv")
    assert time.perf_counter() - start < 60
    out = capsys.readouterr().out
    assert "MRR" in out and "probability" in out


def test_reproduce_is_byte_identical(workspace):
    d = workspace
    args = ["reproduce", "--data", str(d / "g.tsv"), "--iterations", "20"]
    assert run([*args, "--out", str(d / "r1")]) == 0
    first = (d / "r1" / "report.kv").read_bytes()
    assert run([*args, "--out", str(d / "r1")]) == 0
    assert (d / "r1" / "report.kv").read_bytes() == first
    text = (d / "r1" / "report.txt").read_text()
    assert "TransE" in text and "MDE" in text and "reference on TW52" in text
    kv = _kv(d / "r1" / "report.kv")
    assert {"transe.mrr", "mde.mrr", "mde.hit@10", "transe.head.mr"} <= set(kv)


def test_config_file_precedence(workspace, tmp_path):
    d = workspace
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nmodel = mde\niterations = 3\ndim = 4\n")
    base = ["train", "--data", str(d / "g.tsv"), "--config", str(cfg)]
    assert run([*base, "--checkpoint", str(tmp_path / "a.npz"), "--kv", str(tmp_path / "a.kv")]) == 0
    header = (tmp_path / "a.kv").read_text()
    assert "# model = mde" in header and "# iterations = 3" in header and "# dim = 4" in header
    assert run([*base, "--dim", "6", "--checkpoint", str(tmp_path / "b.npz"),
                "--kv", str(tmp_path / "b.kv")]) == 0
    header = (tmp_path / "b.kv").read_text()
    assert "# dim = 6" in header and "# model = mde" in header


def test_exit_codes(workspace, tmp_path, capsys):
    data = ["--data", str(workspace / "g.tsv")]
    assert run(["evaluate", *data, "--test", str(workspace / "test.tsv")]) == 2
    assert "--checkpoint" in capsys.readouterr().err
    assert run(["train", *data, "--checkpoint", "x.npz", "--bogus"]) == 2
    assert run([]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 1\n")
    assert run(["train", *data, "--config", str(bad), "--checkpoint", "x.npz"]) == 2
    assert run(["train", "--data", str(tmp_path / "missing.tsv"), "--checkpoint", "x.npz"]) == 1
    broken = tmp_path / "broken.tsv"
    broken.write_text("a\tb\n")
    assert run(["train", "--data", str(broken), "--checkpoint", "x.npz"]) == 1
    assert "ParseError" in capsys.readouterr().err
    assert run(["recommend", *data, "--checkpoint", str(tmp_path / "none.npz"),
                "--user", "user_0000"]) == 1
    assert run(["generate", "--kind", "symmetry", "--n-users", "1", "--out",
                str(tmp_path / "x.tsv")]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "medkg", "--version"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("medkg ")
