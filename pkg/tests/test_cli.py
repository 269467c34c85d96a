"""Command-line interface: output formats, exit codes, cache behavior."""

import io
import json
import os

from divlab.cache import BasisCache
from divlab.cli import main


def run_cli(args, tmp_path, env_cache=None, monkeypatch=None):
    out = io.StringIO()
    import sys
    old = sys.stdout
    sys.stdout = out
    try:
        code = main(args + ["--cache-dir", str(tmp_path / "cache")])
    finally:
        sys.stdout = old
    return code, out.getvalue()


def test_dims_known_row(tmp_path):
    code, out = run_cli(["dims", "--n", "2", "--p", "2", "--m", "1"], tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert row["div_dim"] == 0 and row["invariant_dim"] == 0
    assert row["ambient_dim"] == 4


def test_dims_range_and_determinism(tmp_path):
    args = ["dims", "--n", "2..3", "--p", "2", "--m", "1..2"]
    code1, out1 = run_cli(args, tmp_path)
    code2, out2 = run_cli(args, tmp_path)
    assert code1 == code2 == 0
    assert out1 == out2
    rows = [json.loads(line) for line in out1.strip().splitlines()]
    assert len(rows) == 4
    by_key = {(r["n"], r["m"]): r for r in rows}
    assert by_key[(3, 1)]["div_dim"] == 9
    assert by_key[(3, 1)]["invariant_dim"] == 1
    assert by_key[(3, 2)]["div_dim"] == 0


def test_dims_odd_p_all_zero_invariants(tmp_path):
    code, out = run_cli(["dims", "--n", "2..3", "--p", "3", "--m", "1"],
                        tmp_path)
    assert code == 0
    for line in out.strip().splitlines():
        assert json.loads(line)["invariant_dim"] == 0


def test_dims_ceiling_refusal(tmp_path):
    code, out = run_cli(["dims", "--n", "5", "--p", "2", "--m", "2",
                         "--ceiling", "100"], tmp_path)
    assert code == 3


def test_dims_csv_format(tmp_path):
    code, out = run_cli(["dims", "--n", "2", "--p", "2", "--m", "1",
                         "--format", "csv"], tmp_path)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[0] == "ambient_dim"
    assert len(lines) == 2


def test_lovelock_divergence_free(tmp_path):
    code, out = run_cli(["lovelock", "--n", "4", "--k", "1", "--seed", "7"],
                        tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert row["div_residual"] == ["0/1"] * 4
    assert row["einstein_ok"] is True


def test_lovelock_k0_model_metric(tmp_path):
    code, out = run_cli(["lovelock", "--n", "4", "--k", "0", "--seed", "0",
                         "--signature", "3,1"], tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    entries = {(i, j): v for i, j, v in row["L_at_origin"]}
    assert entries == {(1, 1): "1/1", (2, 2): "1/1", (3, 3): "1/1",
                       (4, 4): "-1/1"}


def test_lovelock_k_out_of_range(tmp_path):
    code, _ = run_cli(["lovelock", "--n", "4", "--k", "2"], tmp_path)
    assert code == 2


def test_lovelock_n5_k2(tmp_path):
    code, out = run_cli(["lovelock", "--n", "5", "--k", "2", "--seed", "3"],
                        tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert all(x == "0/1" for x in row["div_residual"])


def test_graph_worked_example(tmp_path):
    code, out = run_cli(["graph", "121;1143;1212;6261", "--n", "6"], tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert sorted(map(tuple, row["graph"]["edges"])) == \
        [(1, 1), (1, 2), (1, 2), (1, 6), (2, 6), (3, 4)]
    assert row["jp_connected_to_cycle"] is True
    assert row["trace"] is not None


def test_graph_with_oracle_verdict(tmp_path):
    code, out = run_cli(["graph", "21;1123", "--n", "3"], tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert row["oracle"] is True
    # second run hits the cached basis and must agree byte for byte
    code2, out2 = run_cli(["graph", "21;1123", "--n", "3"], tmp_path)
    assert out2 == out


def test_graph_empty_quaterns(tmp_path):
    code, out = run_cli(["graph", "12", "--n", "3"], tmp_path)
    assert code == 0
    row = json.loads(out.strip())
    assert row["graph"]["edges"] == []
    assert row["trace"] is None
    assert row["jp_connected_to_cycle"] is False


def test_graph_parse_error_exit_2(tmp_path):
    code, _ = run_cli(["graph", "1x;1122", "--n", "3"], tmp_path)
    assert code == 2


def test_cache_corruption_is_recomputed(tmp_path):
    cache_dir = tmp_path / "cache"
    code, out = run_cli(["graph", "21;1123", "--n", "3"], tmp_path)
    assert code == 0
    # corrupt every cache file
    for root, _, files in os.walk(cache_dir):
        for name in files:
            path = os.path.join(root, name)
            with open(path, "r+", encoding="utf-8") as fh:
                blob = fh.read().replace('"payload"', '"tainted"', 1)
                fh.seek(0)
                fh.write(blob)
                fh.truncate()
    code2, out2 = run_cli(["graph", "21;1123", "--n", "3"], tmp_path)
    assert code2 == 0 and out2 == out


def test_cache_roundtrip_unit(tmp_path):
    cache = BasisCache(str(tmp_path / "c"))
    cache.put("k", {"a": 1})
    assert cache.get("k") == {"a": 1}
    assert cache.get("missing") is None


def test_env_var_overrides_cache_dir(tmp_path, monkeypatch):
    env_dir = tmp_path / "envcache"
    monkeypatch.setenv("DIVLAB_CACHE", str(env_dir))
    code, _ = run_cli(["graph", "21;1123", "--n", "3"], tmp_path)
    assert code == 0
    assert env_dir.exists()


def test_verify_all_tiny_ceiling_skips(tmp_path):
    out = io.StringIO()
    import sys
    old = sys.stdout
    sys.stdout = out
    try:
        code = main(["verify-all", "--ceiling", "10"])
    finally:
        sys.stdout = old
    assert code == 0
    text = out.getvalue()
    assert "SKIPPED" in text
    assert "FAIL" not in text


def test_usage_errors_exit_2(tmp_path):
    code, _ = run_cli(["dims", "--n", "3", "--p", "2", "--m", "1",
                       "--variant", "sym3"], tmp_path)
    assert code == 2        # sym3 needs p >= 3
    code, _ = run_cli(["dims", "--n", "3", "--p", "2", "--m", "1",
                       "--signature", "2,2"], tmp_path)
    assert code == 2        # signature does not sum to n


def test_threads_flag_accepted(tmp_path):
    code1, out1 = run_cli(["dims", "--n", "3", "--p", "2", "--m", "1"],
                          tmp_path)
    code2, out2 = run_cli(["dims", "--n", "3", "--p", "2", "--m", "1",
                           "--threads", "2"], tmp_path)
    assert code1 == code2 == 0
    assert out1 == out2
