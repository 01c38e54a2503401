import numpy as np
import pytest

from xraysegkit.imaging import (
    convolve2d,
    gamma_correct,
    gaussian_blur,
    gaussian_kernel,
    round_half_away,
    unsharp_sharpen,
)

from conftest import random_image
from oracles import naive_convolve


def test_round_half_away():
    assert round_half_away(0.5) == 1.0
    assert round_half_away(1.5) == 2.0
    assert round_half_away(2.5) == 3.0
    assert round_half_away(-0.5) == -1.0
    assert round_half_away(-1.5) == -2.0
    assert round_half_away(0.49) == 0.0


class TestConvolve2d:
    def test_identity_kernel(self, rng):
        img = random_image(rng, 16, 16)
        out = convolve2d(img, np.array([[1.0]]))
        assert np.array_equal(out, img.astype(np.float64))

    def test_sobel_step_response(self):
        patch = np.array([[0, 0, 255]] * 3, dtype=np.uint8)
        gx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
        out = convolve2d(patch, gx, "replicate")
        assert out[1, 1] == 1020.0

    @pytest.mark.parametrize("border", ["replicate", "zero"])
    def test_matches_naive_oracle(self, rng, border):
        for _ in range(5):
            img = random_image(rng, 32, 32)
            kernel = rng.integers(-4, 5, size=(3, 3)).astype(np.float64)
            ours = convolve2d(img, kernel, border)
            theirs = naive_convolve(img, kernel, border)
            assert np.array_equal(ours, theirs)

    def test_even_kernel_anchor_top_left(self, rng):
        img = random_image(rng, 8, 8)
        kernel = np.array([[1.0, 0.0], [0.0, -1.0]])
        out = convolve2d(img, kernel, "zero")
        expected = naive_convolve(img, kernel, "zero")
        assert np.array_equal(out, expected)
        # interior spot check: out[y,x] = img[y,x] - img[y+1,x+1]
        assert out[2, 3] == float(img[2, 3]) - float(img[3, 4])

    def test_kernel_larger_than_image(self):
        img = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ValueError, match="larger than image"):
            convolve2d(img, np.ones((3, 3)))

    def test_bad_border(self, rng):
        with pytest.raises(ValueError, match="border"):
            convolve2d(random_image(rng, 4, 4), np.ones((3, 3)), "wrap")


class TestGaussianKernel:
    def test_sigma_one_shape_and_sum(self):
        k = gaussian_kernel(1.0)
        assert k.shape == (7, 7)
        assert abs(k.sum() - 1.0) <= 1e-9

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 5.0])
    def test_positive_and_normalized(self, sigma):
        k = gaussian_kernel(sigma)
        assert np.all(k > 0)
        assert abs(k.sum() - 1.0) <= 1e-9

    def test_rotation_symmetry(self):
        k = gaussian_kernel(1.7)
        assert np.allclose(k, np.rot90(k))

    def test_constant_image_preserved(self):
        img = np.full((9, 9), 131, dtype=np.uint8)
        out = gaussian_blur(img, 1.0, "replicate")
        assert np.allclose(out, 131.0)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            gaussian_kernel(0.0)
        with pytest.raises(ValueError):
            gaussian_kernel(-1.0)


class TestGammaCorrect:
    def test_identity(self, rng):
        img = random_image(rng, 8, 8)
        assert np.array_equal(gamma_correct(img, 1.0), img)

    def test_midpoint(self):
        img = np.full((1, 1), 128, dtype=np.uint8)
        assert gamma_correct(img, 2.0)[0, 0] == 64

    def test_fixed_points(self, rng):
        img = np.array([[0, 255]], dtype=np.uint8)
        for gamma in (0.2, 0.7, 1.0, 2.4, 9.0):
            out = gamma_correct(img, gamma)
            assert out[0, 0] == 0 and out[0, 1] == 255

    def test_monotone(self):
        ramp = np.arange(256, dtype=np.uint8).reshape(1, 256)
        for gamma in (0.4, 1.0, 2.2):
            out = gamma_correct(ramp, gamma)[0].astype(int)
            assert np.all(np.diff(out) >= 0)

    def test_rejects_nonpositive(self, rng):
        with pytest.raises(ValueError):
            gamma_correct(random_image(rng, 2, 2), 0.0)


class TestUnsharp:
    def test_amount_zero_identity(self, rng):
        img = random_image(rng, 12, 12)
        assert np.array_equal(unsharp_sharpen(img, 1.0, 0.0), img)

    def test_constant_unchanged(self):
        img = np.full((20, 20), 99, dtype=np.uint8)
        assert np.array_equal(unsharp_sharpen(img, 2.0, 3.0), img)

    def test_step_edge_overshoot_matches_1d_oracle(self):
        # One row of a vertical step: every row identical, so the 2-D blur
        # reduces to the 1-D row convolution with the kernel's column sums.
        dark, bright = 50, 150
        width = 32
        row = np.array([dark] * (width // 2) + [bright] * (width // 2), dtype=np.uint8)
        img = np.tile(row, (9, 1))
        out = unsharp_sharpen(img, 1.0, 1.0)
        kernel = gaussian_kernel(1.0)
        col = kernel.sum(axis=0)
        radius = len(col) // 2
        padded = np.concatenate(
            [np.full(radius, dark), row.astype(np.float64), np.full(radius, bright)]
        )
        blurred = np.array(
            [float(np.dot(padded[i : i + len(col)], col)) for i in range(width)]
        )
        expected = np.clip(np.floor(row + (row - blurred) + 0.5), 0, 255).astype(np.uint8)
        assert np.array_equal(out[4], expected)
        edge = width // 2
        assert out[4, edge] > bright  # overshoot on the bright side
        assert out[4, edge - 1] < dark  # undershoot on the dark side

    def test_rejects_bad_params(self, rng):
        img = random_image(rng, 4, 4)
        with pytest.raises(ValueError):
            unsharp_sharpen(img, 0.0, 1.0)
        with pytest.raises(ValueError):
            unsharp_sharpen(img, 1.0, -0.5)
