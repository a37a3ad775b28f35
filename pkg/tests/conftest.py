import pytest

from levy_mmm import DoubleExpJumps, GaussianJumps, LevyModel, OneSidedExpJumps

BM = LevyModel(-0.5, 1.0)
SN = LevyModel(-0.25, 1.0, OneSidedExpJumps(-1, 1.0, 2.0))
SP = LevyModel(-1.0, 0.5, OneSidedExpJumps(1, 0.5, 3.0))
KOU = LevyModel(-0.3, 0.8, DoubleExpJumps(0.7, 0.4, 4.0, 3.0))
MERTON = LevyModel(-0.4, 0.6, GaussianJumps(0.5, -0.2, 0.09))

CATALOG = {"bm": BM, "sn": SN, "sp": SP, "kou": KOU, "merton": MERTON}
ONE_SIDED = {"bm": BM, "sn": SN, "sp": SP}


@pytest.fixture(params=sorted(CATALOG))
def any_model(request):
    return CATALOG[request.param]


@pytest.fixture(params=sorted(ONE_SIDED))
def one_sided_model(request):
    return ONE_SIDED[request.param]
