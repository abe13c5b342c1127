import json

import pytest

from fsm4d.cli import build_parser, build_spec, main


def test_capacity_cli(tmp_path, capsys):
    out = tmp_path / "cap.csv"
    assert main(["capacity", "--out", str(out)]) == 0
    assert out.exists() and (tmp_path / "cap.csv.json").exists()
    assert "86.88" in capsys.readouterr().out


def test_preset_and_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 512, "seed": 3, "grid": {"A": 2}, "scheme_params": {"B_cb": 8}, "schemes": ["fsm"]}))
    args = build_parser().parse_args(["corr-sweep", "--config", str(cfg), "--seed", "9"])
    spec = build_spec(args)
    assert spec.config.N == 512 and spec.config.n_t == 1024 and spec.config.n_mc == 16
    assert spec.config.seed == 9
    assert spec.grid == {"A": 2} and spec.scheme_params == {"B_cb": 8}
    assert spec.schemes == ("FSM",)
    full = build_spec(build_parser().parse_args(["corr_sweep", "--full", "--schemes", "ttd,ldma"]))
    assert (full.config.N, full.config.n_t, full.config.n_mc) == (4096, 4096, 64)
    assert full.schemes == ("TTD", "LDMA")


def test_detect_flags():
    spec = build_spec(build_parser().parse_args(["detect", "--A", "2", "--qam", "4", "--snr", "0,10", "--n-symbols", "50"]))
    assert spec.grid == {"A": 2, "qam_order": 4}
    assert spec.options == {"snr_db": [0.0, 10.0], "n_symbols": 50}


def test_bench_flags():
    spec = build_spec(build_parser().parse_args(["dfnt-bench", "--sizes", "64,128", "--repeats", "2", "--flops-rate", "1e12"]))
    assert spec.options == {"sizes": [64, 128], "repeats": 2, "flops_rate": 1e12}


@pytest.mark.parametrize(
    "doc",
    [{"bogus": 1}, {"N": 1000}, {"grid": [1]}, {"grid": {"Z": 1}}, {"schemes": ["warp"]}],
)
def test_config_errors_exit_1(tmp_path, doc, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["capacity", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 1
    assert "config error" in capsys.readouterr().err


def test_unreadable_config_exit_1(tmp_path):
    assert main(["capacity", "--config", str(tmp_path / "missing.json")]) == 1


def test_undersampled_time_grid_exit_1(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"N": 64, "n_t": 128}))
    assert main(["corr-sweep", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 1


def test_runtime_error_exit_2(tmp_path, capsys):
    assert main(["detect", "--A", "3", "--out", str(tmp_path / "d.csv")]) == 2
    assert "runtime error" in capsys.readouterr().err


def test_unknown_experiment_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["warp-drive"])
    assert exc.value.code == 2


def test_nf_spread_cli_with_kernel_bench(tmp_path, capsys):
    out = tmp_path / "nf.csv"
    assert main(["nf-spread", "--full", "--out", str(out), "--bench-kernels"]) == 0
    meta = json.loads((tmp_path / "nf.csv.json").read_text())
    assert "numpy" in meta["kernel_seconds"]
    assert meta["resolved"]["config"]["N"] == 4096
