import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import asip

DATA = Path(os.environ.get("ASIP_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


def test_reference_variance():
    chain = asip.load_chain(str(DATA / "symmetric.json"))
    assert asip.variance(chain, 1, 2, np.ones(1)) == pytest.approx(3.0, abs=1e-12)
    cov = asip.covariance(chain, 1, 2)
    assert cov.shape == (1, 1)
    assert cov[0, 0] == pytest.approx(3.0, abs=1e-12)


def test_lp_routes_agree():
    chain = asip.battery_chain("symmetric-0.5")
    u = np.ones(1)
    a = asip.lp_norm(chain, 1, 12, u, 4.0)
    b = asip.lp_norm(chain, 1, 12, u, 4.0, moment_route=False)
    assert a["exact"] and b["exact"]
    assert a["value"] == pytest.approx(b["value"], rel=1e-10)
    l2 = asip.lp_norm(chain, 1, 12, u, 2.0)["value"]
    assert l2 == pytest.approx(math.sqrt(asip.variance(chain, 1, 12, u)), rel=1e-12)


def test_mixing_reference():
    ref = json.loads((DATA / "reference_coefficients.json").read_text())
    chain = asip.load_chain(str(DATA / "symmetric.json"))
    m = asip.mixing(chain, 4)
    assert m["alpha"][0] == pytest.approx(ref["alpha_1"], abs=1e-12)
    assert m["phi"][0] == pytest.approx(ref["phi_1"], abs=1e-12)
    assert all(a <= p + 1e-12 for a, p in zip(m["alpha"], m["phi"]))


def test_blocks_cover_horizon():
    chain = asip.battery_chain("iid-rademacher")
    blocks = asip.build_blocks(chain, np.ones(1), 9.0, 2, 60)
    assert blocks[0]["a"] == 1 and blocks[0]["b"] == 9
    assert blocks[-1]["i_last"] >= 60


def test_ks_curve_deterministic():
    chain = asip.battery_chain("symmetric-0.5")
    a = asip.ks_curve(chain, 50, 500, 42, [10, 50], np.ones(1))
    b = asip.ks_curve(chain, 50, 500, 42, [10, 50], np.ones(1))
    assert a == b
    assert all(0.0 <= pt["ks"] <= 1.0 for pt in a)


def test_errors_are_mapped():
    with pytest.raises(ValueError):
        asip.battery_chain("no-such-chain")
    with pytest.raises(ValueError):
        asip.load_chain(str(DATA / "malformed_kernel.json"))
