"""Engine values against the frozen extended-precision oracle outputs."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from oppwelfare import LOG, edei, optimal_weights, welfare_primal
from oppwelfare.persist import society_from_document

GOLDEN = json.loads((Path(__file__).parent / "fixtures" / "golden_oracle.json").read_text())


def _theta(x):
    return math.inf if x == "inf" else x


CASES = [(c["seed"], society_from_document(c["society"]), v) for c in GOLDEN["cases"] for v in c["values"]]


class TestGolden:
    @pytest.mark.parametrize("seed,society,row", CASES, ids=[f"seed{c[0]}-theta{c[2]['theta']}" for c in CASES])
    def test_values(self, seed, society, row):
        theta = _theta(row["theta"])
        v = welfare_primal(society, LOG, theta)
        assert abs(v - row["welfare"]) <= 1e-13 * max(1.0, abs(v))
        assert edei(society, LOG, theta) == pytest.approx(row["edei"], rel=1e-12)
        np.testing.assert_allclose(optimal_weights(society, LOG, theta).array, row["weights"], atol=1e-14)
