import numpy as np

from snapvar import verify


def test_lemma_checks_pass_and_alt_variants_fail():
    for d in (2, 3):
        checks = verify.lemma_checks(d, 5, np.random.default_rng(d))
        for c in checks:
            if c.informational:
                assert c.max_abs_dev > 1e-6
            else:
                assert c.max_abs_dev <= 1e-12


def test_moment_checks():
    checks = verify.moment_checks(3, 20_000, 10, np.random.default_rng(0))
    assert len(checks) == 20
    assert sum(c.exact != 0 for c in checks) >= 10
    assert max(c.z for c in checks) < 5
