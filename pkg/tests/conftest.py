import numpy as np
import pytest

from palettekit.data import toy_image


# 8x8 fixture frozen as literals so golden artifacts never drift.
FIXTURE_8x8 = np.array(
    [
        [[236, 93, 123], [229, 98, 120], [222, 103, 117], [215, 108, 114],
         [208, 113, 111], [201, 118, 108], [194, 123, 105], [187, 128, 102]],
        [[230, 97, 120], [223, 102, 117], [216, 107, 114], [209, 112, 111],
         [202, 117, 108], [195, 122, 105], [188, 127, 102], [181, 132, 99]],
        [[224, 101, 117], [217, 106, 114], [40, 40, 200], [40, 40, 200],
         [196, 121, 105], [189, 126, 102], [182, 131, 99], [175, 136, 96]],
        [[218, 105, 114], [211, 110, 111], [40, 40, 200], [40, 40, 200],
         [190, 125, 102], [183, 130, 99], [176, 135, 96], [169, 140, 93]],
        [[212, 109, 111], [205, 114, 108], [198, 119, 105], [191, 124, 102],
         [30, 160, 60], [30, 160, 60], [30, 160, 60], [163, 144, 90]],
        [[206, 113, 108], [199, 118, 105], [192, 123, 102], [185, 128, 99],
         [30, 160, 60], [30, 160, 60], [30, 160, 60], [157, 148, 87]],
        [[200, 117, 105], [193, 122, 102], [186, 127, 99], [179, 132, 96],
         [30, 160, 60], [30, 160, 60], [30, 160, 60], [151, 152, 84]],
        [[194, 121, 102], [187, 126, 99], [180, 131, 96], [173, 136, 93],
         [166, 141, 90], [159, 146, 87], [152, 151, 84], [145, 156, 81]],
    ],
    dtype=np.uint8,
)


@pytest.fixture
def fixture_8x8():
    return FIXTURE_8x8.copy()


@pytest.fixture
def toy_corpus_16():
    """100 small toy images for corpus-level properties."""
    return [toy_image(900, i, 16) for i in range(100)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
