import math

import numpy as np
import pytest

from oppwelfare import LOG, AffineUtility, DomainError, NumericError, PowerUtility, TabulatedUtility, parse_utility


class TestLogUtility:
    def test_values_and_inverse(self):
        assert LOG(np.array([1.0, math.e]))[1] == pytest.approx(1.0)
        assert LOG.inverse(math.log(7.0)) == pytest.approx(7.0, rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            LOG(np.array([0.0]))

    def test_inverse_overflow(self):
        with pytest.raises(NumericError):
            LOG.inverse(1e4)

    def test_scale_invariant(self):
        assert LOG.is_scale_invariant


class TestPowerUtility:
    def test_identity_at_one(self):
        u = PowerUtility(1.0)
        assert u(np.array([3.5]))[0] == 3.5
        assert u.inverse(3.5) == 3.5

    def test_round_trip(self):
        u = PowerUtility(0.5)
        assert u.inverse(float(u(np.array([9.0]))[0])) == pytest.approx(9.0)

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf])
    def test_sigma_domain(self, sigma):
        with pytest.raises(DomainError):
            PowerUtility(sigma)

    def test_not_scale_invariant(self):
        assert not PowerUtility(0.5).is_scale_invariant


class TestAffineUtility:
    def test_shift(self):
        u = AffineUtility(LOG, 2.0, 1.0)
        assert u(np.array([1.0]))[0] == 1.0
        assert u.inverse(1.0) == pytest.approx(1.0)

    def test_needs_positive_slope(self):
        with pytest.raises(DomainError):
            AffineUtility(LOG, 0.0)


class TestTabulatedUtility:
    def test_lookup(self):
        u = TabulatedUtility.from_mapping({2.0: 1.0, 1.0: 0.0})
        assert list(u(np.array([1.0, 2.0]))) == [0.0, 1.0]

    def test_missing_income(self):
        u = TabulatedUtility((1.0,), (0.0,))
        with pytest.raises(DomainError, match="no entry"):
            u(np.array([3.0]))

    def test_must_increase(self):
        with pytest.raises(DomainError):
            TabulatedUtility((1.0, 2.0), (1.0, 1.0))

    def test_inverse_interpolates_and_refuses_extrapolation(self):
        u = TabulatedUtility((1.0, 3.0), (0.0, 1.0))
        assert u.inverse(0.5) == 2.0
        with pytest.raises(NumericError):
            u.inverse(2.0)


class TestParse:
    def test_known(self):
        assert parse_utility("log") is LOG
        assert parse_utility("power:0.5") == PowerUtility(0.5)

    @pytest.mark.parametrize("text", ["exp", "power:x", "power:-1"])
    def test_unknown(self, text):
        with pytest.raises(DomainError):
            parse_utility(text)
