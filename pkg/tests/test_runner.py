import numpy as np
import pandas as pd
import pytest

from sampsmooth.config import default_config
from sampsmooth.data import ReportStorage
from sampsmooth.runner import close_client, get_client, run, run_suite, write_outputs

SMALL = {"ladder": [8, 16, 32, 64], "quadrature": {"panels": 16}}


@pytest.fixture(scope="module")
def bspline_step():
    """cor3Sr on the step function, computed once"""
    config = default_config("corollary", corollary_id="cor3Sr", zoo=["step"], **SMALL)
    storage = ReportStorage()
    return config, run_suite(config, storage=storage), storage


class Test_Corollary:
    def test_result(self, bspline_step):
        config, result, storage = bspline_step
        assert result.tag == "cor3Sr"
        assert result.passed
        assert list(result.tables) == ["cor3Sr"]
        assert storage.size == 4
        assert {t.name for t in result.rate_tables} >= {"err", "omega"}

    def test_outputs(self, bspline_step, tmp_path):
        config, result, _ = bspline_step
        written = write_outputs(result, config, tmp_path)
        names = {p.name for p in written}
        assert {"cor3Sr.csv", "cor3Sr_reports.csv", "cor3Sr_step_err.svg"} <= names
        table = pd.read_csv(tmp_path / "cor3Sr.csv", comment="#")
        assert list(table.columns[:4]) == ["function", "sigma", "err", "semidiscrete_k"]
        assert list(table["sigma"]) == ["8", "16", "32", "64", "alpha"]
        assert (tmp_path / "cor3Sr.csv").read_text().splitlines()[-1].startswith(f"# config_hash={config.hash}")

    def test_outputs_reproducible(self, bspline_step, tmp_path):
        config, result, _ = bspline_step
        first = write_outputs(result, config, tmp_path / "a")
        second = write_outputs(result, config, tmp_path / "b")
        for a, b in zip(first, second):
            assert a.name == b.name
            assert a.read_bytes() == b.read_bytes()


class Test_Properties:
    def test_run(self, tmp_path, capsys):
        config = default_config("properties", properties=["sinc", "partition"], out=str(tmp_path))
        assert run(config) == 0
        assert "partition-of-unity" in capsys.readouterr().out
        reports = pd.read_csv(tmp_path / "properties.csv", comment="#")
        assert list(reports["name"]) == ["partition-of-unity"] * 3 + ["sinc-orthonormality"]
        assert set(reports["verdict"]) == {"pass"}

    def test_dask_matches_inline(self):
        config = default_config("properties", properties=["sinc", "partition"])
        inline = run_suite(config)
        client = get_client(2)
        try:
            distributed = run_suite(config, client)
        finally:
            close_client(client)
        assert [r.name for r in distributed.reports] == [r.name for r in inline.reports]
        assert [r.function for r in distributed.reports] == [r.function for r in inline.reports]

    def test_member_tasks(self):
        config = default_config("properties", properties=["bernstein"], zoo=["step", "bump"],
                                quadrature={"panels": 16})
        inline = run_suite(config)
        client = get_client(2)
        try:
            distributed = run_suite(config, client)
        finally:
            close_client(client)
        assert [r.function for r in inline.reports] == ["bump", "step"]
        assert [r.function for r in distributed.reports] == ["bump", "step"]
        np.testing.assert_allclose([r.ratio_max for r in distributed.reports], [r.ratio_max for r in inline.reports])
