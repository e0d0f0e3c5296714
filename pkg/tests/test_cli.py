import numpy as np
import pytest

from widthlab import ConfigError
from widthlab.cli import build_parser, main
from widthlab.config import SCHEMAS, parse_config, serialize
from widthlab.experiments import emit_csv
from widthlab.parallel import parallel_map

MINIMAL = {
    "fixed-b": "[fixed-b]\nd = 2\n",
    "variable-b": "[variable-b]\nd = 3\n",
    "upper-bound": "[upper-bound]\nd = 2\n",
    "rhs-invariance": "[rhs-invariance]\nd = 2\n",
    "convolution": "[convolution]\nd = 2\n",
    "rb-elliptic": "[rb-elliptic]\n",
    "svd-transport": "[svd-transport]\n",
    "riemann": "[riemann]\n",
}


def test_defaults_are_filled():
    cfg = parse_config(MINIMAL["fixed-b"], "fixed-b")
    assert cfg["d"] == 2
    assert cfg["h_values"] == (0.1, 0.05, 0.025)
    assert cfg["map"] == "identity"
    assert cfg["p"] == 2.0


def test_errors_name_the_offending_key():
    with pytest.raises(ConfigError, match="'frobnicate'"):
        parse_config("[riemann]\nfrobnicate = 1\n", "riemann")
    with pytest.raises(ConfigError, match="'d'"):
        parse_config("[fixed-b]\n", "fixed-b")
    with pytest.raises(ConfigError, match="'d'"):
        parse_config("[fixed-b]\nd = one\n", "fixed-b")
    with pytest.raises(ConfigError, match="'d'"):
        parse_config("[fixed-b]\nd = 1\n", "fixed-b")
    with pytest.raises(ConfigError, match="'h'"):
        parse_config("[rhs-invariance]\nd = 2\nh = 0.2\n", "rhs-invariance")
    with pytest.raises(ConfigError, match="'map'"):
        parse_config("[fixed-b]\nd = 2\nmap = spiral\n", "fixed-b")
    with pytest.raises(ConfigError, match="section"):
        parse_config("[riemann]\n", "fixed-b")
    with pytest.raises(ConfigError):
        parse_config("[riemann]\n", "no-such-kind")


def test_value_lists_parse_with_commas_or_spaces():
    a = parse_config("[fixed-b]\nd = 2\nh_values = 0.1, 0.05\n", "fixed-b")
    b = parse_config("[fixed-b]\nd = 2\nh_values = 0.1 0.05\n", "fixed-b")
    assert a["h_values"] == b["h_values"] == (0.1, 0.05)


def test_round_trip_every_kind():
    for kind, text in MINIMAL.items():
        cfg = parse_config(text, kind)
        again = parse_config(serialize(cfg), kind)
        assert again == cfg, kind


def test_parser_knows_every_kind():
    parser = build_parser()
    for kind in SCHEMAS:
        args = parser.parse_args([kind, "--config", "x.ini"])
        assert args.kind == kind
        assert args.out == "."
    with pytest.raises(SystemExit):
        parser.parse_args(["no-such-kind", "--config", "x.ini"])
    with pytest.raises(SystemExit):
        parser.parse_args(["riemann"])


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_cli_riemann_end_to_end(tmp_path, capsys):
    ini = write(tmp_path / "r.ini", "[riemann]\n")
    code = main(["riemann", "--config", ini, "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "wall time:" in out
    csv = (tmp_path / "riemann.csv").read_text(encoding="utf-8")
    assert csv.splitlines()[0] == "mu_true,mu_recovered,error"
    assert len(csv.splitlines()) == 6
    report = (tmp_path / "riemann-report.txt").read_text(encoding="utf-8")
    assert "PASS" in report and "result: PASS" in report
    assert "wall time" not in report


def test_cli_outputs_are_byte_deterministic(tmp_path):
    ini = write(tmp_path / "r.ini", "[riemann]\nmu_values = -0.3 0.1 0.7\n")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["riemann", "--config", ini, "--out", str(out_a)]) == 0
    assert main(["riemann", "--config", ini, "--out", str(out_b)]) == 0
    for name in ("riemann.csv", "riemann-report.txt"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_cli_bad_config_exits_one(tmp_path, capsys):
    ini = write(tmp_path / "bad.ini", "[fixed-b]\n")  # missing d
    code = main(["fixed-b", "--config", ini, "--out", str(tmp_path)])
    assert code == 1
    assert "error:" in capsys.readouterr().err
    code = main(["riemann", "--config", str(tmp_path / "absent.ini")])
    assert code == 1


def test_cli_failed_assertion_exits_two(tmp_path, capsys):
    # a zero tolerance no experiment can meet
    ini = write(tmp_path / "r.ini", "[riemann]\ntolerance = 0\n")
    code = main(["riemann", "--config", ini, "--out", str(tmp_path)])
    assert code == 2
    assert "FAIL" in capsys.readouterr().out
    report = (tmp_path / "riemann-report.txt").read_text(encoding="utf-8")
    assert "result: FAIL" in report


def test_csv_rendering(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv([(True, 1.0 / 3.0, 7, "abc")], ("flag", "x", "n", "name"), path)
    assert path.read_bytes() == b"flag,x,n,name\n1,0.33333333333333331,7,abc\n"
    emit_csv([], ("a", "b"), path)
    assert path.read_bytes() == b"a,b\n"
    with pytest.raises(ConfigError):
        emit_csv([(1, 2)], ("a",), path)


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("WIDTHLAB_THREADS", "4")
    got = parallel_map(lambda i: i * i, range(25))
    assert got == [i * i for i in range(25)]
    monkeypatch.setenv("WIDTHLAB_THREADS", "1")
    assert parallel_map(lambda i: -i, range(5)) == [0, -1, -2, -3, -4]
