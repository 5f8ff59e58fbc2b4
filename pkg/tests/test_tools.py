import time

import pytest

from sampsmooth.tools import Timing, config_hash, dyadic_ladder, parse_ladder, row_blocks


class Test_Timing:
    def test_elapsed(self):
        with Timing("s") as dt:
            time.sleep(0.01)
        assert dt.dt >= 0.01
        assert str(dt).endswith("s")

    def test_not_entered(self):
        assert str(Timing()) == "nanms"


class Test_Ladder:
    def test_dyadic(self):
        assert dyadic_ladder(8, 64) == [8.0, 16.0, 32.0, 64.0]
        assert dyadic_ladder(1, 1) == [1.0]

    @pytest.mark.parametrize("low, high", [(3, 64), (8, 100), (0, 8), (64, 8)])
    def test_wrong_ends(self, low, high):
        with pytest.raises(ValueError):
            dyadic_ladder(low, high)

    def test_parse(self):
        assert parse_ladder("16:128") == [16.0, 32.0, 64.0, 128.0]

    @pytest.mark.parametrize("text", ["16", "16:128:256", "a:b", "16:24"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError, match="cannot parse ladder"):
            parse_ladder(text)


class Test_Blocks:
    def test_cover(self):
        blocks = list(row_blocks(10, 2**21))
        assert [(b.start, b.stop) for b in blocks] == [(i, i + 2) for i in range(0, 10, 2)]

    def test_single_block(self):
        assert list(row_blocks(5, 3)) == [slice(0, 5)]


class Test_Hash:
    def test_key_order(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})
        assert len(config_hash({})) == 16
