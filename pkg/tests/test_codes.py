"""CSS code constructions: parameters, commutation, logicals, distances."""

import numpy as np
import pytest

from shuttleqec import codes, gf2


def check_css(code):
    code.validate()
    # logicals commute with the opposite-type checks and pair symplectically
    assert not gf2.matmul(code.Hz, code.Lx.transpose()).entries
    assert not gf2.matmul(code.Hx, code.Lz.transpose()).entries
    pairing = gf2.matmul(code.Lx, code.Lz.transpose())
    assert np.array_equal(pairing.copy_array(), np.eye(code.k, dtype=np.uint8))


class TestSeeds:
    def test_repetition(self):
        C = codes.repetition_code(8)
        assert C.H.shape == (7, 8)
        assert all(w == 2 for w in C.H.copy_array().sum(axis=1))

    def test_seed_17_3_8(self):
        C = codes.appendix_b_code()
        assert C.H.shape == (14, 17)
        assert C.n - gf2.rank(C.H) == 3
        # average two ones per row keeps HGP stabilisers weight-4 on average
        assert C.H.copy_array().sum() / 14 == pytest.approx(2.0, abs=0.5)


class TestRotatedSurface:
    @pytest.mark.parametrize("d", [3, 5, 7])
    def test_parameters(self, d):
        code = codes.rotated_surface_code(d)
        assert (code.n, code.k) == (d * d, 1)
        assert code.d_estimate == d
        check_css(code)

    def test_check_weights_d3(self):
        code = codes.rotated_surface_code(3)
        # [DERIVED] 2 bulk weight-4 checks and 2 boundary weight-2 per sector
        assert sorted(code.Hx.copy_array().sum(1)) == [2, 2, 4, 4]
        assert sorted(code.Hz.copy_array().sum(1)) == [2, 2, 4, 4]


class TestWideSurface:
    @pytest.mark.parametrize("d", [3, 5])
    def test_parameters(self, d):
        code = codes.wide_surface_code(d)
        assert (code.n, code.k) == (2 * d * d, 1)
        check_css(code)
        # both logicals reach the shuttling boundary: dz=d, dx=2d
        assert min(code.Lz.copy_array().sum(1)) == d
        assert min(code.Lx.copy_array().sum(1)) == 2 * d


class TestHgp:
    def test_parameters(self):
        code = codes.get_code("hgp-234-3-8")
        assert (code.n, code.k) == (234, 3)
        check_css(code)
        # total qubits = data + one ancilla per check = (17+14)(8+7)
        total = code.n + code.Hx.rows + code.Hz.rows
        assert total == 465

    def test_distance_upper_bound(self):
        code = codes.get_code("hgp-234-3-8")
        r = codes.estimate_distance(code, trials=800, seed=2)
        assert r["distance"] == 8  # weight-8 logical, the design distance
        assert not r["exact"]

    def test_product_structure(self):
        A = codes.repetition_code(3)
        B = codes.repetition_code(4)
        code = codes.hgp(A, B)
        check_css(code)
        # repetition x repetition is a (rotated-family) surface-type code
        assert code.k == 1


class TestGeneralisedBicycle:
    def test_parameters(self):
        code = codes.get_code("gb-a2")
        assert (code.n, code.k) == (126, 28)
        check_css(code)

    def test_circulant(self):
        M = codes.circulant(5, [0, 2])
        arr = M.copy_array()
        assert arr.shape == (5, 5)
        for i in range(5):
            row = np.zeros(5, np.uint8)
            row[i % 5] = 1
            row[(i + 2) % 5] ^= 1
            assert np.array_equal(arr[i], row)


class TestRegistry:
    @pytest.mark.parametrize("name", ["rsc-d3", "rsc-d5", "wide-d3",
                                      "hgp-234-3-8", "gb-a2"])
    def test_lookup(self, name):
        code = codes.get_code(name)
        assert code.n > 0 and code.k >= 1

    def test_unknown(self):
        with pytest.raises((KeyError, ValueError)):
            codes.get_code("no-such-code")


class TestDistanceEstimator:
    def test_small_exact(self):
        r = codes.estimate_distance(codes.rotated_surface_code(3))
        assert r == {"distance": 3, "dx": 3, "dz": 3, "exact": True}

    def test_gb_upper_bound(self):
        code = codes.get_code("gb-a2")
        r = codes.estimate_distance(code, trials=300)
        assert r["distance"] == 8
        assert not r["exact"]
