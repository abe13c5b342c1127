import pytest

from fsm4d.physics import SystemConfig, derive_geometry


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def geom(cfg):
    return derive_geometry(cfg)


@pytest.fixture(scope="session")
def small_cfg():
    # n_t must cover 8 samples per Doppler cycle at v_max
    return SystemConfig(N=256, n_t=768, n_mc=2)


@pytest.fixture(scope="session")
def small_geom(small_cfg):
    return derive_geometry(small_cfg)


@pytest.fixture(scope="session")
def cfg_c3e8():
    return SystemConfig(c_light=3e8)
