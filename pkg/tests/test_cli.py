import json
import math
import struct
import subprocess
import sys

import numpy as np
import pytest

from crossmap import io as cio
from crossmap.cli import main, thread_count
from crossmap.targets import parse_target


def run(argv, capsys=None):
    code = main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def gen_bytes(tmp_path, name, *flags):
    path = tmp_path / name
    assert main(["gen", *flags, "-o", str(path)]) == 0
    return path.read_bytes()


# ---- targets --------------------------------------------------------------

def test_parse_target():
    assert parse_target("sphere:2").name == "S2"
    assert parse_target("op2").name == "OP2"
    assert parse_target("product:sphere:2+ball:3").dim == 5
    assert parse_target("hopf:1").ambient_dim == 4
    for bad in ("sphere", "sphere:0", "op2:1", "torus:2", "product:"):
        with pytest.raises(ValueError):
            parse_target(bad)


# ---- gen ------------------------------------------------------------------

def test_gen_fig1_grid(tmp_path):
    data = gen_bytes(tmp_path, "g.csv", "--target", "sphere:2", "--sampler", "grid:28",
                     "--format", "csv")
    text = data.decode()
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "x0,x1,x2" and len(lines) == 785
    rows = cio.from_csv(data)
    assert np.max(np.abs(np.linalg.norm(rows, axis=1) - 1)) <= 1e-12


def test_gen_csv_is_round_trip_exact(tmp_path):
    data = gen_bytes(tmp_path, "a.csv", "--target", "cp:1", "--count", "50", "--seed", "3")
    binary = gen_bytes(tmp_path, "a.bin", "--target", "cp:1", "--count", "50", "--seed", "3",
                       "--format", "bin")
    assert np.array_equal(cio.from_csv(data), cio.from_binary(binary))


def test_gen_halton_binary(tmp_path):
    data = gen_bytes(tmp_path, "h.bin", "--target", "cp:2", "--sampler", "halton",
                     "--count", "1000", "--format", "bin", "--verify")
    magic, ver, dim, count = struct.unpack_from("<4sIIQ", data)
    assert (magic, ver, dim, count) == (b"CMAP", 1, 6, 1000)
    assert len(data) == 20 + 8 * 6 * 1000
    rows = cio.from_binary(data)
    assert np.max(np.abs(np.linalg.norm(rows, axis=1) - 1)) <= 1e-12


def test_gen_jsonl(tmp_path):
    data = gen_bytes(tmp_path, "j.jsonl", "--target", "ball:3", "--count", "5",
                     "--format", "jsonl")
    lines = data.decode().splitlines()
    assert len(lines) == 5 and all(len(json.loads(ln)) == 3 for ln in lines)


def test_gen_determinism_runs(tmp_path):
    a = gen_bytes(tmp_path, "1.csv", "--target", "ball:3", "--count", "10", "--seed", "7")
    b = gen_bytes(tmp_path, "2.csv", "--target", "ball:3", "--count", "10", "--seed", "7")
    c = gen_bytes(tmp_path, "3.csv", "--target", "ball:3", "--count", "10", "--seed", "8")
    assert a == b and a != c


@pytest.mark.parametrize("target", ["sphere:2", "hp:1", "hopf:1", "product:sphere:2+cp:1"])
def test_gen_determinism_threads(tmp_path, target):
    flags = ["--target", target, "--count", "20000", "--seed", "5", "--format", "bin"]
    a = gen_bytes(tmp_path, "t1.bin", *flags, "--threads", "1")
    b = gen_bytes(tmp_path, "t8.bin", *flags, "--threads", "8")
    assert a == b


def test_thread_env_cap(monkeypatch):
    monkeypatch.setenv("CROSSMAP_THREADS", "2")
    assert thread_count(8) == 2 and thread_count(None) == 2
    monkeypatch.delenv("CROSSMAP_THREADS")
    assert thread_count(None) == 1 and thread_count(4) == 4


def test_gen_meta(tmp_path):
    meta = tmp_path / "m.json"
    gen_bytes(tmp_path, "x.csv", "--target", "rp:2", "--count", "4", "--meta", str(meta))
    m = json.loads(meta.read_text())
    assert m["count"] == 4 and m["dim_out"] == 3 and m["target"] == "rp:2"


def test_gen_stdout(capsys):
    code, out = run(["gen", "--target", "sphere:1", "--sampler", "grid:4"], capsys)
    assert code == 0
    rows = cio.from_csv(out.out.encode())
    want = [[-math.sin(2 * math.pi * x), -math.cos(2 * math.pi * x)]
            for x in (0.125, 0.375, 0.625, 0.875)]
    assert np.allclose(rows, want, atol=1e-15)


# ---- grid -----------------------------------------------------------------

def test_grid_polylines(tmp_path):
    path = tmp_path / "grid.csv"
    assert main(["grid", "--target", "sphere:2", "--k", "37", "--m", "16", "-o", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "polyline,vertex,x0,x1,x2"
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert len(np.unique(rows[:, 0])) == 2 * 38
    assert rows.shape[0] == 2 * 38 * 16
    assert np.allclose(np.linalg.norm(rows[:, 2:], axis=1), 1, atol=1e-12)


def test_grid_k1_and_lattice(tmp_path):
    path = tmp_path / "g1.csv"
    assert main(["grid", "--target", "ball:2", "--k", "1", "--m", "8", "-o", str(path)]) == 0
    rows = np.array([[float(v) for v in ln.split(",")]
                     for ln in path.read_text().splitlines()[1:]])
    assert rows.shape == (4 * 8, 4)
    # the boundary of the cube maps to the rim of the disc
    assert np.all(np.linalg.norm(rows[:, 2:], axis=1) > 0.99)
    path = tmp_path / "g3.csv"
    assert main(["grid", "--target", "sphere:3", "--k", "5", "-o", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 1 + 125


def test_grid_audit(tmp_path, capsys):
    path = tmp_path / "a.csv"
    code, out = run(["grid", "--target", "sphere:2", "--k", "10", "--audit", "-o", str(path)],
                    capsys)
    assert code == 0 and out.err.startswith("PASS\ttest=chi2-cells:S2:k=10")


# ---- rho ------------------------------------------------------------------

def test_rho_sphere(capsys):
    code, out = run(["rho", "--target", "sphere:2", "--r", "0,2"], capsys)
    assert code == 0
    rows = [ln.split("\t") for ln in out.out.splitlines()[1:]]
    assert float(rows[0][1]) == 0.0
    assert float(rows[1][1]) == pytest.approx(2 * math.acos(math.exp(-1)), abs=1e-14)
    assert all(float(r[2]) <= 1e-10 for r in rows)


def test_rho_op2_monotone(capsys):
    code, out = run(["rho", "--target", "op2", "--r-grid", "0:8:81", "--numeric"], capsys)
    assert code == 0
    rho = np.array([float(ln.split("\t")[1]) for ln in out.out.splitlines()[1:]])
    assert rho[0] == 0 and np.all(np.diff(rho) > 0) and rho[-1] < math.pi / 2


def test_rho_rejects_products(capsys):
    code, _ = run(["rho", "--target", "hopf:1"], capsys)
    assert code == 2


# ---- validate -------------------------------------------------------------

def test_validate_pass_and_fail(capsys):
    code, out = run(["validate", "--target", "sphere:3", "--test", "radial-ks", "--n", "100000",
                     "--seed", "1"], capsys)
    assert code == 0 and out.out.startswith("PASS")
    code, out = run(["validate", "--target", "sphere:3", "--test", "radial-ks", "--warp"], capsys)
    assert code == 1 and out.out.startswith("FAIL")
    code, out = run(["validate", "--target", "hp:1", "--test", "jacobian"], capsys)
    assert code == 0 and len(out.out.splitlines()) == 20


def test_validate_seed_list_and_other_tests(capsys):
    code, out = run(["validate", "--target", "sphere:2", "--test", "cap", "--n", "20000",
                     "--seed", "1,2,3"], capsys)
    assert code == 0 and len(out.out.splitlines()) == 3
    code, out = run(["validate", "--target", "hopf:1", "--test", "hopf-ks", "--n", "20000"], capsys)
    assert code == 0
    code, out = run(["validate", "--target", "hopf:2", "--test", "njac"], capsys)
    assert code == 0
    code, out = run(["validate", "--target", "sphere:2", "--test", "chi2", "--k", "5",
                     "--n", "10000"], capsys)
    assert code == 0


# ---- errors and config ----------------------------------------------------

def test_exit_codes(tmp_path, capsys):
    assert main(["gen", "--target", "torus:1", "--count", "3"]) == 2
    assert main(["gen", "--target", "sphere:2"]) == 2  # random needs --count
    assert main(["gen", "--target", "sphere:2", "--count", "3", "--format", "xml"]) == 2
    assert main(["nope"]) == 2
    bad = tmp_path / "missing" / "out.csv"
    assert main(["gen", "--target", "sphere:2", "--count", "3", "-o", str(bad)]) == 3
    assert main(["validate", "--target", "sphere:2", "--test", "chi2", "--k", "37",
                 "--n", "100"]) == 4
    assert main(["validate", "--target", "sphere:2", "--test", "hopf-ks"]) == 2
    capsys.readouterr()


def test_config_file(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("# defaults\ntarget = ball:2\ncount = 6\nseed = 4\nformat = jsonl\n")
    a = gen_bytes(tmp_path, "c1", "--config", str(cfg))
    assert len(a.decode().splitlines()) == 6
    b = gen_bytes(tmp_path, "c2", "--config", str(cfg), "--count", "2")
    assert b.decode().splitlines() == a.decode().splitlines()[:2]
    cfg.write_text("count = many\n")
    assert main(["gen", "--config", str(cfg), "--target", "ball:2"]) == 2
    cfg.write_text("colour = red\n")
    assert main(["gen", "--config", str(cfg), "--target", "ball:2"]) == 2
    assert main(["gen", "--config", str(tmp_path / "none.conf"), "--target", "ball:2"]) == 3


def test_console_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    cmd = [sys.executable, "-m", "crossmap", "gen", "--target", "sphere:2", "--count", "3",
           "-o", str(out)]
    assert subprocess.run(cmd).returncode == 0
    assert len(out.read_text().splitlines()) == 4
    r = subprocess.run([sys.executable, "-m", "crossmap", "gen", "--target", "x"],
                       capture_output=True)
    assert r.returncode == 2
