import numpy as np
import pytest

from camwatch.images import PixelImage


def solid_image(width, height, rgb):
    arr = np.zeros((height, width, 3), np.uint8)
    arr[:, :] = rgb
    return PixelImage.from_array(arr)


def random_image(rng, width, height):
    arr = rng.integers(0, 256, size=(height, width, 3), dtype=np.int64).astype(np.uint8)
    return PixelImage.from_array(arr)


@pytest.fixture
def rng():
    return np.random.default_rng(20200401)
