import subprocess
import sys

import pytest

from mvdfq.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert run("synth", "--per-class", 6, "--classes", 3, "--n", 80, "--seed", 2, "--out", out) == 0
    return out / "manifest.tsv"


def read_tsv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split("\t")
    return [dict(zip(header, ln.split("\t"))) for ln in lines[1:]]


class TestPipelineEquivalence:
    KERNEL = ("--kernel", "mismatch", "--k", 3, "--m", 1, "--manifold")

    def test_manual_equals_cv_fold0(self, corpus, tmp_path):
        t = tmp_path
        assert run("cv", "--manifest", corpus, "--bins", 8, *self.KERNEL, "--folds", 3,
                   "--seed", 7, "--out", t / "report.tsv", "--predictions", t / "cv.tsv") == 0
        assert run("split", "--manifest", corpus, "--folds", 3, "--seed", 7, "--fold", 0,
                   "--out", t / "split") == 0
        assert run("fit-quantizer", "--manifest", t / "split/train.tsv", "--bins", 8, "--out", t / "q") == 0
        for part in ("train", "test"):
            assert run("discretize", "--manifest", t / f"split/{part}.tsv", "--model", t / "q",
                       "--out", t / f"{part}.d") == 0
        assert run("gram", "--discrete", t / "train.d", *self.KERNEL, "--out", t / "g") == 0
        assert run("cross-gram", "--test", t / "test.d", "--train", t / "train.d", *self.KERNEL,
                   "--out", t / "x") == 0
        assert run("train", "--gram", t / "g", "--discrete", t / "train.d", "--out", t / "m") == 0
        assert run("predict", "--model", t / "m", "--cross-gram", t / "x", "--out", t / "p.tsv") == 0

        cv = {r["id"]: r for r in read_tsv(t / "cv.tsv") if r["fold"] == "0"}
        manual = read_tsv(t / "p.tsv")
        assert len(manual) == len(cv) > 0
        for r in manual:
            assert r["label"] == cv[r["id"]]["predicted"]
            assert r["score"] == cv[r["id"]]["score"]

    def test_vq_pipeline(self, corpus, tmp_path):
        t = tmp_path
        assert run("fit-codebook", "--manifest", corpus, "--codebook-size", 16, "--out", t / "cb") == 0
        assert run("discretize", "--manifest", corpus, "--model", t / "cb", "--out", t / "d") == 0
        assert run("gram", "--discrete", t / "d", "--k", 2, "--out", t / "g") == 0
        assert (t / "g").read_text().startswith("gram v1 N=18\n")


class TestDeterminism:
    def test_cv_byte_identical(self, corpus, tmp_path):
        args = ("cv", "--manifest", corpus, "--bins", 6, "--k", 3, "--folds", 3, "--seed", 3)
        run(*args, "--out", tmp_path / "a", "--predictions", tmp_path / "pa")
        run(*args, "--out", tmp_path / "b", "--predictions", tmp_path / "pb")
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
        assert (tmp_path / "pa").read_bytes() == (tmp_path / "pb").read_bytes()

    def test_gram_threads(self, corpus, tmp_path):
        run("fit-quantizer", "--manifest", corpus, "--quantizer", "kmeans", "--bins", 5, "--out", tmp_path / "q")
        run("discretize", "--manifest", corpus, "--model", tmp_path / "q", "--out", tmp_path / "d")
        for n in (1, 4):
            run("gram", "--discrete", tmp_path / "d", "--kernel", "sssk", "--threads", n,
                "--out", tmp_path / f"g{n}")
        assert (tmp_path / "g1").read_bytes() == (tmp_path / "g4").read_bytes()


class TestCommands:
    def test_cv_stdout(self, corpus, capsys):
        assert run("cv", "--manifest", corpus, "--bins", 6, "--k", 2, "--folds", 3) == 0
        out = capsys.readouterr().out
        assert out.startswith("metric\tvalue\nn\t18\nerror_rate\t")

    def test_group_cv(self, corpus, capsys):
        assert run("cv", "--manifest", corpus, "--bins", 6, "--k", 2, "--group-cv") == 0
        assert "macro_f1" in capsys.readouterr().out

    def test_eval_roc50(self, tmp_path, capsys):
        (tmp_path / "s.tsv").write_text("id\tscore\tlabel\na\t0.9\t+1\nb\t0.8\t-1\nc\t0.7\t+1\nd\t0.6\t-1\n")
        assert run("eval-roc50", "--scores", tmp_path / "s.tsv") == 0
        assert capsys.readouterr().out == "metric\tvalue\nroc50\t0.75\n"

    def test_selftest(self, capsys):
        assert run("selftest") == 0
        assert "FAIL" not in capsys.readouterr().out

    def test_fasta_cv(self, tmp_path, capsys):
        seqs = {"p1": "ACDEFGHIK" * 4, "p2": "ACDEFGHIKL" * 4, "p3": "WWYYWWYY" * 5,
                "p4": "WYWYWWYYW" * 4}
        (tmp_path / "s.fa").write_text("".join(f">{k}\n{v}\n" for k, v in seqs.items()))
        (tmp_path / "l.tsv").write_text("p1\t+1\np2\t+1\np3\t-1\np4\t-1\n")
        assert run("cv", "--fasta", tmp_path / "s.fa", "--labels", tmp_path / "l.tsv",
                   "--bins", 4, "--k", 2, "--folds", 2) == 0
        assert "roc50" in capsys.readouterr().out


class TestErrors:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("gram", "--discrete", "x", "--out", "y", "--bogus")
        assert exc.value.code != 0
        assert "--bogus" in capsys.readouterr().err

    def test_bad_value_names_flag(self, capsys):
        with pytest.raises(SystemExit):
            run("cv", "--manifest", "m", "--bins", "zero")
        assert "--bins" in capsys.readouterr().err

    def test_missing_file_one_line(self, tmp_path, capsys):
        assert run("gram", "--discrete", tmp_path / "none", "--out", tmp_path / "g") == 1
        err = capsys.readouterr().err
        assert err.startswith("mvdfq: error:") and err.count("\n") == 1

    def test_bad_csv(self, tmp_path, capsys):
        (tmp_path / "a.csv").write_text("1,abc\n")
        (tmp_path / "m.tsv").write_text("a\tx\t\ta.csv\n")
        assert run("fit-quantizer", "--manifest", tmp_path / "m.tsv", "--out", tmp_path / "q") == 1
        assert "NonNumericCell" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "mvdfq", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("mvdfq ")
