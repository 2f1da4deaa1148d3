import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtml import config as cfgmod
from qtml.cli import main
from qtml.eigenform import SUPPORTED_WEIGHTS, cache_path, expected_cache_bytes


@given(st.sampled_from(SUPPORTED_WEIGHTS), st.integers(0, 500).map(lambda k: 2 * k + 1),
       st.floats(-0.1, 0.1), st.floats(-5, 5),
       st.lists(st.floats(10, 1e4), min_size=1, max_size=5, unique=True).map(lambda v: tuple(sorted(v))),
       st.integers(1, 16), st.booleans(), st.integers(0, 2**31))
@settings(max_examples=100, deadline=None)
def test_config_roundtrip(weight, ell, are, aim, grid, workers, deriv, seed):
    cfg = cfgmod.RunConfig(weight=weight, ell=ell, alpha_re=are, alpha_im=aim, x_grid=grid, workers=workers,
                           derivative=deriv, seed=seed)
    assert cfgmod.parse(cfg.emit()) == cfg


def test_config_errors():
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse("weight=12\nbogus=1\n")
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse("weight=13\n")
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse("x_grid=\n")


def test_coeffs_cache_hit_and_length(tmp_path, capsys):
    args = ["coeffs", "--weight", "12", "--n-max", "10000", "--cache-dir", str(tmp_path)]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    second = capsys.readouterr().out
    assert "cache hit" in second
    assert first.splitlines()[0] == second.splitlines()[0]
    assert cache_path(tmp_path, 12, 10000).stat().st_size == expected_cache_bytes(10000) == 28 + 8 * 10000


def test_unsupported_weight_exit_code(capsys):
    assert main(["coeffs", "--weight", "13"]) == 2
    assert "12, 16, 18, 20, 22, 26" in capsys.readouterr().err


def test_unknown_suite_and_empty_grid():
    assert main(["verify", "nonsense"]) == 2
    assert main(["moment", "--x-grid", ""]) == 2


def test_missing_subcommand():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_gauss_suite_passes(capsys):
    assert main(["verify", "gauss"]) == 0
    assert "300/300" in capsys.readouterr().out


def test_corrupted_cache_refused(tmp_path):
    assert main(["coeffs", "--weight", "12", "--n-max", "5000", "--cache-dir", str(tmp_path)]) == 0
    path = cache_path(tmp_path, 12, 5000)
    raw = bytearray(path.read_bytes())
    raw[200] ^= 1
    path.write_bytes(bytes(raw))
    assert main(["verify", "local", "--n-max", "5000", "--cache-dir", str(tmp_path)]) == 3


def test_moment_csv_is_deterministic(tmp_path, cache_dir):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    base = ["moment", "--weight", "12", "--x-grid", "40,60,80", "--n-max", "1000000",
            "--cache-dir", str(cache_dir)]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2), "--workers", "3"]) == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.startswith(b"# qtml v1\nX,M,MT,R,R_norm\n")


def test_derivative_moment_columns(tmp_path, cache_dir):
    out = tmp_path / "d"
    assert main(["moment", "--weight", "18", "--derivative", "--x-grid", "40", "--n-max", "1000000",
                 "--cache-dir", str(cache_dir), "--out", str(out)]) == 0
    text = (tmp_path / "d.json").read_text()
    assert "bracket" in text


def test_derivative_flag_needs_weight_2_mod_4():
    assert main(["moment", "--weight", "12", "--derivative", "--x-grid", "40"]) == 2


def test_constants_output(cache_dir, capsys):
    assert main(["constants", "--weight", "12", "--ell", "45", "--cache-dir", str(cache_dir)]) == 0
    out = capsys.readouterr().out
    assert "0.810569469139" in out
    assert "Z(1/2,45)/Z(1/2,1)" in out


def test_constants_stable_under_doubling_P(cache_dir, capsys):
    main(["constants", "--weight", "12", "--prime-cutoff", "500000", "--n-max", "1000000",
          "--cache-dir", str(cache_dir)])
    half = capsys.readouterr().out
    main(["constants", "--weight", "12", "--prime-cutoff", "1000000", "--cache-dir", str(cache_dir)])
    full = capsys.readouterr().out
    for name in ("Z*(0)", "Z*'(0)/Z*(0)", "L(1,sym^2 f)", "main constant"):
        pick = lambda text: next(l for l in text.splitlines() if l.startswith(name)).split()[1]  # noqa: E731
        assert pick(half) == pick(full)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "qtml.cli", "verify", "complic", "--n-max", "1000",
                          "--cache-dir", os.environ["QTML_CACHE_DIR"]], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
