import numpy as np
import pytest

from mvrs.errors import MaskFormatError
from mvrs.refseg import RleMask, rle_decode, rle_encode


class TestEncode:
    def test_mixed_run_fixture(self):
        frame = np.array([[0, 0, 1, 1, 1, 0]], dtype=np.uint8)
        assert rle_encode(frame).counts == (2, 3, 1)

    def test_all_zero_is_single_run(self):
        assert rle_encode(np.zeros((2, 2), dtype=np.uint8)).counts == (4,)

    def test_leading_foreground_gets_zero_prefix(self):
        frame = np.array([[1, 0, 0, 1]], dtype=np.uint8)
        assert rle_encode(frame).counts == (0, 1, 2, 1)

    def test_all_ones(self):
        assert rle_encode(np.ones((3, 2), dtype=np.uint8)).counts == (0, 6)

    def test_row_major_scan(self):
        frame = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        assert rle_encode(frame).counts == (1, 2, 1)

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError):
            rle_encode(np.array([[0, 2]], dtype=np.uint8))


class TestDecode:
    def test_round_trip_identity_on_1000_random_masks(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            h = int(rng.integers(1, 12))
            w = int(rng.integers(1, 12))
            frame = (rng.random((h, w)) < rng.random()).astype(np.uint8)
            assert (rle_decode(rle_encode(frame)) == frame).all()

    def test_bad_sum_rejected(self):
        with pytest.raises(MaskFormatError):
            rle_decode(RleMask(height=2, width=2, counts=(3,)))

    def test_counts_must_total_pixels(self):
        mask = rle_encode(np.ones((4, 4), dtype=np.uint8))
        assert sum(mask.counts) == 16

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            RleMask(height=1, width=2, counts=(-1, 3))
