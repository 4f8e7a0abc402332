import os

import pytest


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    # keep the pairing-count cache out of the user's home during tests
    old = os.environ.get("HERMCOK_CACHE")
    os.environ["HERMCOK_CACHE"] = str(tmp_path_factory.mktemp("cache"))
    yield
    if old is None:
        os.environ.pop("HERMCOK_CACHE", None)
    else:
        os.environ["HERMCOK_CACHE"] = old
