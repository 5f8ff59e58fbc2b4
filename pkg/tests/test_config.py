import json
from pathlib import Path

import pytest

import sampsmooth
from sampsmooth.config import SUITES, config_from_dict, default_config, load_config, with_overrides
from sampsmooth.errors import ConfigError

SHIPPED = sorted((Path(sampsmooth.__file__).parent / "share" / "suites").glob("*.json"))


def config_error(document):
    with pytest.raises(ConfigError) as err:
        config_from_dict(document)
    return str(err.value)


class Test_Defaults:
    @pytest.mark.parametrize("suite", SUITES)
    def test_every_suite(self, suite):
        config = default_config(suite)
        assert config.suite == suite
        assert config.tag == ("cor3S" if suite == "corollary" else suite)

    def test_kernels(self):
        assert default_config("direct").kernel == {"family": "bspline", "order": 3}
        assert default_config("inverse").kernel == {"family": "sinc"}
        assert default_config("smoothness_of_operator").kernel == {"family": "interpolation"}

    def test_corollary_resolution(self):
        config = default_config("corollary", corollary_id="cor3Sr")
        assert config.kernel == {"family": "bspline", "order": 3}
        assert config.s == 1.0 and config.r == 1
        assert config.tag == "cor3Sr"
        corha = default_config("corollary", corollary_id="corHa")
        assert corha.kernel == {"family": "interpolation"}
        assert corha.epsilon == 0.2 and corha.gamma == 0.29

    def test_operator_family(self):
        family = default_config("direct").operator_family()
        assert family.kernel.name == "bspline(3)"
        interpolation = default_config("smoothness_of_operator").operator_family()
        assert interpolation.interpolatory and interpolation.kernel is None

    @pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
    def test_shipped(self, path):
        config = load_config(path)
        assert config.suite in SUITES


class Test_Validation:
    def test_unknown_suite(self):
        msg = config_error({"suite": "everything"})
        assert msg.startswith("suite:")
        for suite in SUITES:
            assert suite in msg

    def test_unknown_field(self):
        assert config_error({"suite": "direct", "sigma": 8}).startswith("config:")

    def test_s_above_2r(self):
        msg = config_error({"suite": "direct", "s": 3, "r": 1})
        assert msg.startswith("s: s <= 2r is required")

    def test_s_below_1_over_p(self):
        assert config_error({"suite": "direct", "s": 0.4, "p": 2}).startswith("s:")
        assert default_config("properties", s=0.4).s == 0.4

    def test_corollary_fixes_s(self):
        assert config_error({"suite": "corollary", "corollary_id": "cor3S", "s": 1}).startswith("s:")
        assert default_config("corollary", corollary_id="cor3S", s=2).s == 2.0

    def test_corollary_fixes_kernel(self):
        msg = config_error({"suite": "corollary", "kernel": {"family": "sinc"}})
        assert msg.startswith("kernel:")

    def test_corollary_id(self):
        assert config_error({"suite": "corollary", "corollary_id": "cor9"}).startswith("corollary_id:")
        assert config_error({"suite": "direct", "corollary_id": "cor3S"}).startswith("corollary_id:")

    def test_p_only(self):
        assert config_error({"suite": "corollary", "corollary_id": "corHa", "p": 1}).startswith("p:")

    def test_p(self):
        assert config_error({"suite": "direct", "p": 0.5}).startswith("p:")
        assert config_error({"suite": "direct", "p": "two"}).startswith("p:")

    def test_epsilon(self):
        assert config_error({"suite": "direct", "epsilon": 0.1}).startswith("epsilon:")
        assert config_error({"suite": "direct", "epsilon": 0.3, "kernel": {"family": "interpolation"}}).startswith(
            "epsilon:")
        config = default_config("direct", epsilon=0.1, kernel={"family": "interpolation"})
        assert config.epsilon == 0.1

    def test_gamma(self):
        assert config_error({"suite": "direct", "gamma": 0.5}).startswith("gamma:")

    def test_kernel(self):
        assert config_error({"suite": "direct", "kernel": {"family": "wavelet"}}).startswith("kernel.family:")
        assert config_error({"suite": "direct", "kernel": {"family": "bspline", "order": 1}}).startswith(
            "kernel.order:")
        assert config_error({"suite": "direct", "kernel": {"family": "sinc", "width": 2}}).startswith("kernel:")
        assert config_error({"suite": "direct", "kernel": {"family": "riesz", "s": 0}}).startswith("kernel.s:")

    def test_smoothness_of_operator_family(self):
        msg = config_error({"suite": "smoothness_of_operator", "kernel": {"family": "bspline", "order": 3}})
        assert msg.startswith("kernel.family:")
        assert default_config("smoothness_of_operator", kernel={"family": "bspline", "order": 2}).kernel["order"] == 2

    @pytest.mark.parametrize(
        "ladder", [[8, 16, 32], [8, 16, 24, 32], [64, 32, 16, 8], [3, 6, 12, 24], [0.5, 1, 2, 4], "8:64"]
    )
    def test_ladder(self, ladder):
        assert config_error({"suite": "direct", "ladder": ladder}).startswith("ladder:")

    def test_zoo(self):
        config = default_config("direct", zoo=["step", "bump"])
        assert config.zoo == ("bump", "step")
        assert config_error({"suite": "direct", "zoo": ["square"]}).startswith("zoo:")
        assert config_error({"suite": "direct", "zoo": []}).startswith("zoo:")

    def test_quadrature(self):
        assert default_config("direct", quadrature={"panels": 16}).quadrature.panels == 16
        assert config_error({"suite": "direct", "quadrature": {"panels": 0}}).startswith("quadrature:")
        assert config_error({"suite": "direct", "quadrature": {"order": 4}}).startswith("quadrature:")

    def test_thresholds(self):
        assert default_config("direct", thresholds={"ratio_spread": 20}).thresholds.ratio_spread == 20
        assert config_error({"suite": "direct", "thresholds": 3}).startswith("thresholds:")

    def test_properties(self):
        config = default_config("properties", properties=["sinc", "moduli"])
        assert config.properties == ("moduli", "sinc")
        assert config_error({"suite": "properties", "properties": ["everything"]}).startswith("properties:")

    def test_property_grid(self):
        assert default_config("properties").property_grid == "default"
        assert default_config("properties", property_grid="full").property_grid == "full"
        assert config_error({"suite": "properties", "property_grid": "huge"}).startswith("property_grid:")

    def test_not_an_object(self):
        assert config_error([1, 2]).startswith("config:")

    def test_jobs_and_seed(self):
        assert config_error({"suite": "direct", "jobs": 0}).startswith("jobs:")
        assert config_error({"suite": "direct", "seed": -1}).startswith("seed:")
        assert config_error({"suite": "direct", "seed": 1.5}).startswith("seed:")


class Test_Hash:
    def test_out_and_jobs_ignored(self):
        a = default_config("direct", out="here", jobs=1)
        b = default_config("direct", out="there", jobs=4)
        assert a.hash == b.hash
        assert len(a.hash) == 16

    def test_seed_changes_hash(self):
        assert default_config("direct", seed=1).hash != default_config("direct", seed=2).hash

    def test_overrides(self):
        config = with_overrides(default_config("corollary", corollary_id="corHa"), ladder=[16, 32, 64, 128], jobs=2)
        assert config.ladder == (16.0, 32.0, 64.0, 128.0)
        assert config.jobs == 2
        assert config.epsilon == 0.2


class Test_Load:
    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(tmp_path / "nothing.json")
        assert str(err.value).startswith("config:")

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{suite: direct")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_overrides(self, tmp_path):
        path = tmp_path / "direct.json"
        path.write_text(json.dumps({"suite": "direct", "out": "a", "seed": 3}))
        config = load_config(path, out="b", seed=None, ladder=[16.0, 32.0, 64.0, 128.0], jobs=None)
        assert config.out == "b"
        assert config.seed == 3
        assert config.ladder == (16.0, 32.0, 64.0, 128.0)
