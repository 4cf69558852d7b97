import numpy as np
import pytest

from btensor import (
    BDFactors,
    bdifference,
    bproduct,
    frobenius_norm,
    ls_solve_general,
    read_btf,
    reconstruct,
    write_btf,
)
from btensor.cli import main
from btensor.tensor import DenseTensor


def write_tensor(path, arr):
    write_btf(DenseTensor(arr), path)


def test_ls_solve_matches_library(tmp_path):
    rng = np.random.default_rng(0)
    observed = DenseTensor(rng.standard_normal((4, 3, 5)))
    known = DenseTensor(rng.standard_normal((1, 3, 5)))
    write_btf(observed, tmp_path / "y.btf")
    write_btf(known, tmp_path / "z.btf")
    out = tmp_path / "w.btf"
    rc = main([
        "ls-solve",
        "--observed", str(tmp_path / "y.btf"),
        "--known", str(tmp_path / "z.btf"),
        "--unknown-shape", "4,3,1",
        "--out", str(out),
    ])
    assert rc == 0
    assert read_btf(out).equal(ls_solve_general(observed, known, (4, 3, 1)))


def test_decompose_bd_planted(tmp_path):
    rng = np.random.default_rng(1)
    f = BDFactors(
        DenseTensor(rng.standard_normal((5, 6, 1))),
        DenseTensor(rng.standard_normal((5, 1, 7))),
        DenseTensor(rng.standard_normal((1, 6, 7))),
    )
    y = reconstruct(f)
    write_btf(y, tmp_path / "y.btf")
    prefix = str(tmp_path / "fit")
    rc = main([
        "decompose", "--input", str(tmp_path / "y.btf"),
        "--model", "bd", "--seed", "0", "--out-prefix", prefix,
    ])
    assert rc == 0
    fitted = BDFactors(
        read_btf(prefix + "_t0_A.btf"),
        read_btf(prefix + "_t0_B.btf"),
        read_btf(prefix + "_t0_C.btf"),
    )
    res = frobenius_norm(bdifference(y, reconstruct(fitted))) / frobenius_norm(y)
    assert res < 1e-6

    trace_lines = (tmp_path / "fit_trace.csv").read_text().splitlines()
    assert trace_lines[0] == "iter,objective"
    objs = [float(l.split(",")[1]) for l in trace_lines[1:]]
    assert all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))


def test_decompose_sum_bd_writes_each_term(tmp_path):
    y = DenseTensor(np.random.default_rng(2).standard_normal((4, 4, 4)))
    write_btf(y, tmp_path / "y.btf")
    prefix = str(tmp_path / "fit")
    rc = main([
        "decompose", "--input", str(tmp_path / "y.btf"),
        "--model", "sum-bd", "--R", "2", "--max-iters", "30",
        "--out-prefix", prefix,
    ])
    assert rc == 0
    for t in (0, 1):
        for name in "ABC":
            assert (tmp_path / f"fit_t{t}_{name}.btf").exists()


@pytest.mark.parametrize(
    "method,rank,files",
    [
        ("cp", "2", ["U1", "U2", "U3"]),
        ("tucker", "2", ["core", "U1", "U2", "U3"]),
        ("tucker", "2,3,2", ["core", "U1", "U2", "U3"]),
    ],
)
def test_baseline_outputs(tmp_path, method, rank, files):
    y = DenseTensor(np.random.default_rng(3).standard_normal((5, 5, 5)))
    write_btf(y, tmp_path / "y.btf")
    prefix = str(tmp_path / "fit")
    rc = main([
        "baseline", "--method", method, "--input", str(tmp_path / "y.btf"),
        "--rank", rank, "--max-iters", "20", "--out-prefix", prefix,
    ])
    assert rc == 0
    for name in files:
        assert (tmp_path / f"fit_{name}.btf").exists()
    assert (tmp_path / "fit_trace.csv").exists()


def test_experiment_flags(tmp_path, capsys):
    out = tmp_path / "exp"
    rc = main([
        "experiment", "--dims", "4,4,4", "--sigma", "0.1", "--seeds", "0",
        "--bd-R", "1", "--cp-R", "1", "--tucker-r", "1",
        "--max-iters", "40", "--out", str(out),
    ])
    assert rc == 0
    assert "wrote 3 rows" in capsys.readouterr().out
    assert (out / "report.csv").exists()


def test_experiment_toml_config(tmp_path):
    out = tmp_path / "exp"
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        "dims = [4, 4, 4]\n"
        "sigma = 0.05\n"
        "seeds = [0, 1]\n"
        "bd_R_grid = [1]\n"
        "cp_R_grid = [1]\n"
        "tucker_rank_grid = [1]\n"
        f'output_dir = "{out}"\n'
        "[fit]\n"
        "max_iters = 40\n"
    )
    rc = main(["experiment", "--config", str(cfg)])
    assert rc == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert len(lines) == 1 + 3 * 2


def test_bad_shape_argument(tmp_path):
    with pytest.raises(SystemExit):
        main(["ls-solve", "--observed", "x", "--known", "y",
              "--unknown-shape", "4,zero", "--out", "w"])
