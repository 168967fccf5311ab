import subprocess
import sys

import pytest

from graphmark.cli import main
from graphmark.graph import read_edge_list_path


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run_cli(*args: str) -> int:
    return main(list(args))


def generate_graph(workdir, name="g.el", seed="7"):
    code = run_cli(
        "generate", "--model", "plg", "--n", "800", "--m", "150", "--w", "10",
        "--gamma", "2.75", "--seed", seed, "-o", name,
    )
    assert code == 0
    return workdir / name


class TestGenerate:
    def test_creates_edge_list_with_summary(self, workdir, capsys):
        path = generate_graph(workdir)
        out = capsys.readouterr().out
        assert "edges=" in out and "model=plg" in out
        g = read_edge_list_path(str(path))
        assert g.n == 800

    def test_er_model(self, workdir, capsys):
        assert run_cli("generate", "--model", "er", "--n", "100", "--p", "0.2",
                       "--seed", "3", "-o", "er.el") == 0
        assert "model=er" in capsys.readouterr().out

    def test_reruns_are_byte_identical(self, workdir):
        generate_graph(workdir, name="a.el")
        generate_graph(workdir, name="b.el")
        assert (workdir / "a.el").read_bytes() == (workdir / "b.el").read_bytes()

    def test_params_file(self, workdir, capsys):
        (workdir / "params.txt").write_text("model=er\nn=50\np=0.3\nseed=5\n")
        assert run_cli("generate", "--params", "params.txt", "-o", "p.el") == 0
        assert "seed=5" in capsys.readouterr().out

    def test_domain_error_exit_code(self, workdir, capsys):
        code = run_cli("generate", "--model", "plg", "--n", "100", "--m", "50",
                       "--w", "5", "--gamma", "3.5", "--seed", "1", "-o", "x.el")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exit_code(self, workdir):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("generate", "--model", "plg")
        assert excinfo.value.code == 2


class TestPipeline:
    def test_full_watermarking_flow(self, workdir, capsys):
        generate_graph(workdir)
        assert run_cli("analyze", "--input", "g.el", "--h", "10", "--medium", "30",
                       "--tune-medium") == 0
        out = capsys.readouterr().out
        assert "separated=" in out and "max_collision_free_medium=" in out

        assert run_cli("keygen", "--ell", "20", "--n", "800", "--x", "40",
                       "--t", "1", "--seed", "2", "-o", "key.txt") == 0
        assert run_cli("mark", "--graph", "g.el", "--key", "key.txt",
                       "--h", "10", "--medium", "30", "--seed", "3",
                       "-o", "marked.el", "--id-out", "id.txt") == 0
        out = capsys.readouterr().out
        assert "flips=" in out
        id_text = (workdir / "id.txt").read_text().strip()
        assert len(id_text) == 20 and set(id_text) <= {"0", "1"}

        assert run_cli("identify", "--original", "g.el", "--suspect", "marked.el",
                       "--key", "key.txt", "--ids", "id.txt",
                       "--h", "10", "--medium", "30") == 0
        out = capsys.readouterr().out
        assert "result=0" in out

        assert run_cli("attack", "--graph", "marked.el", "--attack", "uniform",
                       "--fraction", "0.0001", "--seed", "4", "-o", "attacked.el") == 0
        capsys.readouterr()
        assert run_cli("identify", "--original", "g.el", "--suspect", "attacked.el",
                       "--key", "key.txt", "--ids", "id.txt",
                       "--h", "10", "--medium", "30") == 0
        assert "result=0" in capsys.readouterr().out

    def test_identify_on_unmarked_graph_reports_closest(self, workdir, capsys):
        generate_graph(workdir)
        generate_graph(workdir, name="other.el", seed="8")
        run_cli("keygen", "--ell", "10", "--n", "800", "--x", "20", "--t", "1",
                "--seed", "2", "-o", "key.txt")
        (workdir / "ids.txt").write_text("\n".join(
            format(i * 97 % 1024, "010b") for i in range(10)
        ) + "\n")
        capsys.readouterr()
        assert run_cli("identify", "--original", "g.el", "--suspect", "other.el",
                       "--key", "key.txt", "--ids", "ids.txt",
                       "--h", "8", "--medium", "12") == 0
        out = capsys.readouterr().out
        assert "result=" in out and "distance=" in out

    def test_attack_config_file(self, workdir, capsys):
        generate_graph(workdir)
        (workdir / "attack.cfg").write_text("attack=uniform\npairs=25\nseed=6\n")
        assert run_cli("attack", "--graph", "g.el", "--config", "attack.cfg",
                       "-o", "a.el") == 0
        assert "flips=25" in capsys.readouterr().out

    def test_dk2_series_and_deviation(self, workdir, capsys):
        generate_graph(workdir)
        assert run_cli("dk2", "--graph", "g.el", "-o", "series.txt") == 0
        lines = (workdir / "series.txt").read_text().splitlines()
        assert all(len(line.split()) == 3 for line in lines)
        assert run_cli("attack", "--graph", "g.el", "--attack", "uniform",
                       "--pairs", "40", "--seed", "1", "-o", "b.el") == 0
        capsys.readouterr()
        assert run_cli("dk2", "--graph", "g.el", "--other", "b.el") == 0
        assert "deviation=" in capsys.readouterr().out

    def test_fit_from_graph(self, workdir, capsys):
        generate_graph(workdir)
        assert run_cli("fit", "--graph", "g.el", "--resamples", "100",
                       "--seed", "2") == 0
        out = capsys.readouterr().out
        assert "gamma=" in out and "pvalue=" in out

    def test_fit_requires_input(self, workdir):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("fit")
        assert excinfo.value.code == 2


class TestExperimentCommand:
    CONFIG = (
        "model=plg\nn=600\nm=120\nw=10\ngamma=2.75\nh=8\nmedium=24\n"
        "ell=16\nt=1\nk=3\nresample=constant:0.5\nmode=relaxed\n"
        "attack=uniform\nsweep=1e-4,1e-2\ntrials=3\nseed=11\n"
    )

    def test_writes_csv_and_figure(self, workdir, capsys):
        (workdir / "exp.cfg").write_text(self.CONFIG)
        assert run_cli("experiment", "--config", "exp.cfg", "-o", "out.csv") == 0
        out = capsys.readouterr().out
        assert "output=out.csv" in out and "plot=out.png" in out
        assert (workdir / "out.csv").exists()
        header = (workdir / "out.csv").read_text().splitlines()[0]
        assert header.startswith("attack_value,trials,successes")
        assert (workdir / "out.png").stat().st_size > 1000

    def test_no_plot_and_plot_data(self, workdir):
        (workdir / "exp.cfg").write_text(self.CONFIG)
        assert run_cli("experiment", "--config", "exp.cfg", "-o", "r.csv",
                       "--no-plot", "--plot-data") == 0
        assert not (workdir / "r.png").exists()
        dat = (workdir / "r.dat").read_text().splitlines()
        assert dat[0].startswith("#") and len(dat) == 3

    def test_csv_reruns_identical(self, workdir):
        (workdir / "exp.cfg").write_text(self.CONFIG)
        run_cli("experiment", "--config", "exp.cfg", "-o", "a.csv", "--no-plot")
        run_cli("experiment", "--config", "exp.cfg", "-o", "b.csv", "--no-plot")
        assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()

    def test_output_from_config(self, workdir):
        (workdir / "exp.cfg").write_text(self.CONFIG + "output=from_cfg.csv\n")
        assert run_cli("experiment", "--config", "exp.cfg", "--no-plot") == 0
        assert (workdir / "from_cfg.csv").exists()


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "graphmark.cli", "--help"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "generate" in result.stdout and "experiment" in result.stdout
