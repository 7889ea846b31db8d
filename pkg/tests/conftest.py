import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rips_euler._accel import ENV_VAR, HAVE_NUMBA  # noqa: E402

BACKENDS = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    monkeypatch.setenv(ENV_VAR, request.param)
    return request.param
