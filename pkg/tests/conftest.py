import pytest

from blowuplab import params, profile, spectral

#: parameter points exercised throughout the suite
POINTS = [(7.0, 1), (8.0, 1), (9.0, 1), (12.0, 2)]


@pytest.fixture(scope="session")
def consts_at():
    cache = {}

    def get(d, k):
        if (d, k) not in cache:
            cache[(d, k)] = params.derive(params.ModelParams(d=d, k=k))
        return cache[(d, k)]

    return get


@pytest.fixture(scope="session")
def profile_at(consts_at):
    cache = {}

    def get(d, k):
        if (d, k) not in cache:
            cache[(d, k)] = profile.solve_profile(consts_at(d, k))
        return cache[(d, k)]

    return get


@pytest.fixture(scope="session")
def basis_at(consts_at):
    cache = {}

    def get(d, k, max_n=8):
        if (d, k, max_n) not in cache:
            cache[(d, k, max_n)] = spectral.build_basis(
                consts_at(d, k), max_n=max_n)
        return cache[(d, k, max_n)]

    return get
