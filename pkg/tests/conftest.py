import numpy as np
import pytest

from kirchhoffkit.liepoisson import CHAPLYGIN_E4_EXTRA, build_model

KIRCHHOFF_PARAMS = dict(a1=1.0, a3=2.0, c1=1.0, c3=3.0)
CHAPLYGIN_PARAMS = dict(a1=1.0, a3=2.0, a13=0.3, c1=1.0, c3=3.0)
E4_PARAMS = dict(A1212=1.3, A1313=0.7, A3434=2.1, A1234=0.4, C11=1.1, C33=2.5)


def random_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def kirchhoff():
    return build_model("kirchhoff_e3", **KIRCHHOFF_PARAMS)


@pytest.fixture
def kirchhoff_b():
    return build_model("kirchhoff_e3", b3=0.1, **KIRCHHOFF_PARAMS)


@pytest.fixture
def chaplygin():
    return build_model("chaplygin_e3", **CHAPLYGIN_PARAMS)


@pytest.fixture
def kirchhoff4():
    return build_model("kirchhoff_e4", **E4_PARAMS)


@pytest.fixture
def chaplygin4():
    r = np.random.default_rng(7)
    extra = {k: float(r.uniform(-1, 1)) for k in CHAPLYGIN_E4_EXTRA}
    return build_model("chaplygin_e4", **E4_PARAMS, **extra)
