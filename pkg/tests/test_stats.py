import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snapvar.stats import GradStats, Moments, merge_all


def _central(x, p):
    return float(np.sum((x - x.mean()) ** p))


@settings(max_examples=60, deadline=None)
@given(
    xs=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=60),
    cut=st.integers(0, 60),
)
def test_merge_matches_direct(xs, cut):
    x = np.array(xs)
    cut = min(cut, x.size)
    m = Moments.from_batch(x[:cut]).merge(Moments.from_batch(x[cut:]))
    scale = max(1.0, float(np.max(np.abs(x))))
    assert m.n == x.size
    assert m.mean == pytest.approx(x.mean(), abs=1e-9 * scale)
    assert m.m2 == pytest.approx(_central(x, 2), abs=1e-8 * scale**2 * x.size)
    assert m.m3 == pytest.approx(_central(x, 3), abs=1e-7 * scale**3 * x.size)
    assert m.m4 == pytest.approx(_central(x, 4), abs=1e-7 * scale**4 * x.size)


def test_merge_all_many_chunks(rng):
    x = rng.standard_normal(10_007) * 1e-4 + 3.0
    parts = [Moments.from_batch(c) for c in np.array_split(x, 37)]
    m = merge_all(parts)
    assert m.mean == pytest.approx(x.mean(), rel=1e-14)
    assert m.m2 / (m.n - 1) == pytest.approx(x.var(ddof=1), rel=1e-10)


def test_empty_merge():
    m = Moments.from_batch([1.0, 2.0])
    assert Moments().merge(m) == m and m.merge(Moments()) == m
    assert merge_all([]) == Moments()


def test_gradstats_fields(rng):
    x = rng.standard_normal(5000) * 2
    s = GradStats.from_samples(x, master_seed=9)
    assert s.variance == pytest.approx(x.var(ddof=1))
    assert s.stderr_mean == pytest.approx(np.sqrt(s.variance / s.n_samples))
    assert s.master_seed == 9
    # normal data: stderr of the variance is about sigma^2 sqrt(2/n)
    assert s.stderr_variance == pytest.approx(4 * np.sqrt(2 / 5000), rel=0.1)


def test_gradstats_zero_samples():
    s = GradStats.from_samples(np.zeros(100))
    assert s.mean == 0 and s.variance == 0 and s.mean_z() == 0 and s.variance_z(0.0) == 0
    with pytest.raises(ValueError):
        GradStats.from_samples([1.0])


def test_variance_stderr_calibration():
    # z-scores of the variance against its known value are roughly standard normal
    zs = []
    for seed in range(200):
        x = np.random.default_rng(seed).uniform(-1, 1, 2000)
        zs.append((GradStats.from_samples(x).variance - 1 / 3) / GradStats.from_samples(x).stderr_variance)
    zs = np.array(zs)
    assert abs(zs.mean()) < 0.25
    assert 0.8 < zs.std() < 1.2
