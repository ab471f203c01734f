import numpy as np
import pytest

from evotfs.cli import main, parse_args
from evotfs.data import Dataset, format_ucr, load_ucr
from evotfs.errors import ConfigError
from evotfs.evaluation import REPORT_COLUMNS

FAST = ["--generations", "3", "--population-size", "8"]


@pytest.fixture()
def toy(tmp_path):
    rng = np.random.default_rng(0)
    x = np.vstack([rng.random((20, 30)), 2 + rng.random((5, 30))]) * 10
    d = Dataset(x, np.repeat([0, 1], [20, 5]), ("1", "2"))
    path = tmp_path / "train.tsv"
    path.write_text(format_ucr(d))
    return path, d


class TestParse:
    def test_no_arguments(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert main(["oversample", "--train", "x", "--out", "y", "--bogus"]) == 2

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("EVO_TFS_THREADS", raising=False)
        cfg = parse_args(["oversample", "--train", "a", "--out", "b"])
        assert (cfg.alpha, cfg.sigma_dtw, cfg.sigma_dft, cfg.seed, cfg.workers) == (0.5, 10.0, 10.0, 0, 1)
        assert cfg.gp.population_size is None and cfg.gp.generations == 50
        assert cfg.report.name == "b.provenance.tsv"
        assert cfg.overrides == {}

    def test_env_threads(self, monkeypatch):
        monkeypatch.setenv("EVO_TFS_THREADS", "3")
        assert parse_args(["oversample", "--train", "a", "--out", "b"]).workers == 3
        assert parse_args(["oversample", "--train", "a", "--out", "b", "--workers", "2"]).workers == 2

    def test_config_file_then_flags(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("# sweep\nalpha = 0.25\ngenerations=7\nsigma-dft=3\n")
        cfg = parse_args(["oversample", "--train", "a", "--out", "b", "--config", str(conf), "--generations", "9"])
        assert (cfg.alpha, cfg.gp.generations, cfg.sigma_dft) == (0.25, 9, 3.0)
        assert set(cfg.overrides) == {"alpha", "generations", "sigma_dft"}

    def test_config_file_errors(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour=blue\n")
        with pytest.raises(ConfigError):
            parse_args(["oversample", "--train", "a", "--out", "b", "--config", str(conf)])

    def test_term_toggles(self):
        assert parse_args(["oversample", "--train", "a", "--out", "b", "--no-dtw"]).alpha == 0.0
        assert parse_args(["oversample", "--train", "a", "--out", "b", "--no-dft"]).alpha == 1.0
        assert main(["oversample", "--train", "a", "--out", "b", "--no-dtw", "--no-dft"]) == 2

    @pytest.mark.parametrize("flags", [["--alpha", "1.5"], ["--sigma-dtw", "0"], ["--workers", "0"], ["--crossover-rate", "0.9"]])
    def test_invalid_values(self, flags):
        assert main(["oversample", "--train", "a", "--out", "b", *flags]) == 2

    def test_method_list(self):
        cfg = parse_args(["evaluate", "--train", "a", "--test", "b", "--method", "none,smote", "--method", "evotfs"])
        assert cfg.methods == ("none", "smote", "evotfs")


class TestOversample:
    def test_balances_and_writes_provenance(self, toy, tmp_path):
        path, raw = toy
        out = tmp_path / "out.tsv"
        assert main(["oversample", "--train", str(path), "--out", str(out), *FAST]) == 0
        d = load_ucr(out)
        assert len(d) == 40
        assert d.class_counts == {0: 20, 1: 20}
        np.testing.assert_array_equal(d.values[:25], raw.values)
        # synthetic rows come back on the raw scale
        norm = tmp_path / "norm.tsv"
        main(["oversample", "--train", str(path), "--out", str(norm), "--normalized", *FAST])
        lo, hi = raw.values.min(), raw.values.max()
        np.testing.assert_allclose(d.values[25:], lo + load_ucr(norm).values[25:] * (hi - lo), rtol=1e-12, atol=1e-9)
        lines = (tmp_path / "out.tsv.provenance.tsv").read_text().splitlines()
        header = [ln for ln in lines if ln.startswith("#")]
        assert "# generations=3 (override)" in header
        assert "# alpha=0.5" in header
        table = [ln for ln in lines if not ln.startswith("#")]
        assert table[0] == "class\ttarget_index\trank\tfitness\tseed"
        assert len(table) == 16
        assert {row.split("\t")[0] for row in table[1:]} == {"2"}

    def test_deterministic(self, toy, tmp_path):
        path, _ = toy
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        main(["oversample", "--train", str(path), "--out", str(a), *FAST])
        main(["oversample", "--train", str(path), "--out", str(b), *FAST])
        assert a.read_bytes() == b.read_bytes()

    def test_normalized_output(self, toy, tmp_path):
        path, _ = toy
        out = tmp_path / "n.tsv"
        assert main(["oversample", "--train", str(path), "--out", str(out), "--normalized", *FAST]) == 0
        d = load_ucr(out)
        assert d.values[:25].min() == 0.0 and d.values[:25].max() == 1.0

    def test_missing_file(self, tmp_path, capsys):
        assert main(["oversample", "--train", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_window(self, toy, tmp_path):
        path, _ = toy
        assert main(["oversample", "--train", str(path), "--out", str(tmp_path / "o"), "--window-len", "5"]) == 1


def test_evaluate_report_schema(toy, tmp_path):
    path, _ = toy
    rng = np.random.default_rng(1)
    test = Dataset(np.vstack([rng.random((6, 30)), 2 + rng.random((6, 30))]) * 10, np.repeat([0, 1], 6), ("1", "2"))
    tpath = tmp_path / "test.tsv"
    tpath.write_text(format_ucr(test))
    out = tmp_path / "report.tsv"
    rc = main(["evaluate", "--train", str(path), "--test", str(tpath), "--method", "none,duplicate,smote,evotfs",
               "--seeds", "2", "--out", str(out), *FAST])
    assert rc == 0
    rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert rows[0].split("\t") == list(REPORT_COLUMNS)
    assert [r.split("\t")[0] for r in rows[1:]] == ["none", "duplicate", "smote", "evotfs"]
    assert all(r.split("\t")[2] == "2" for r in rows[1:])


def test_inspect(toy, tmp_path, capsys):
    path, _ = toy
    dump = tmp_path / "pool.tsv"
    assert main(["inspect", "--train", str(path), "--dump-pool", str(dump), "--tree", "2", *FAST]) == 0
    text = capsys.readouterr().out
    assert "imbalance_ratio\t4.0000" in text
    assert "plan\t2\tN=5\tN_g=15\tN_p=5\tquota=3" in text
    assert "window_len\t10" in text
    assert sum(ln.startswith("tree\t") for ln in text.splitlines()) == 2
    assert len(load_ucr(dump)) == 25 * 21
