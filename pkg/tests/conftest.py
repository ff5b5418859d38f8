import numpy as np
import pytest

from deltashell.model import ModelParams, InitialState
from deltashell.tables import TABLE_RUN_SETTINGS
from deltashell.propagator import SeriesConfig, survival_series


@pytest.fixture(scope="session")
def table_series():
    """Survival series for the four benchmark lam values, computed once."""
    out = {}
    for lam, settings in TABLE_RUN_SETTINGS.items():
        lo, hi = settings["t_range"]
        scfg = SeriesConfig(t_min_tau0=lo, t_max_tau0=hi)
        out[lam] = survival_series(InitialState(1), ModelParams(lam=lam),
                                   series_cfg=scfg)
    return out


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
