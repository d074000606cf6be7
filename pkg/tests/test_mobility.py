import numpy as np
import pytest

from degench.errors import InvalidArgument
from degench.mobility import MobilityKind, potential, potential_prime, potential_second


@pytest.mark.parametrize(
    "name, kind",
    [
        ("quad-pos", MobilityKind.QUADRATIC_POSITIVE_PART),
        ("abs", MobilityKind.ABSOLUTE_VALUE),
        ("biquad-pos", MobilityKind.BIQUADRATIC_POSITIVE_PART),
        ("Quadratic_Positive_Part", MobilityKind.QUADRATIC_POSITIVE_PART),
        (MobilityKind.ABSOLUTE_VALUE, MobilityKind.ABSOLUTE_VALUE),
    ],
)
def test_parse(name, kind):
    assert MobilityKind.parse(name) is kind


def test_parse_rejects_unknown():
    with pytest.raises(InvalidArgument):
        MobilityKind.parse("linear")


def test_mobility_values():
    u = np.array([-1.2, -1.0, 0.0, 0.5, 1.0, 1.1])
    np.testing.assert_allclose(MobilityKind.QUADRATIC_POSITIVE_PART(u), [0, 0, 1, 0.75, 0, 0])
    np.testing.assert_allclose(MobilityKind.ABSOLUTE_VALUE(u), [0.44, 0, 1, 0.75, 0, 0.21], atol=1e-15)
    np.testing.assert_allclose(MobilityKind.BIQUADRATIC_POSITIVE_PART(u), [0, 0, 1, 0.5625, 0, 0])


def test_one_sided_derivative_at_minus_one():
    quad = MobilityKind.QUADRATIC_POSITIVE_PART
    assert quad.derivative(-1.0, side=+1) == pytest.approx(2.0)
    assert quad.derivative(-1.0, side=-1) == pytest.approx(0.0)
    assert MobilityKind.ABSOLUTE_VALUE.derivative(-1.0, side=-1) == pytest.approx(-2.0)
    assert MobilityKind.BIQUADRATIC_POSITIVE_PART.derivative(-1.0, side=+1) == pytest.approx(0.0)


def test_potential_family():
    u = np.linspace(-1.5, 1.5, 13)
    np.testing.assert_allclose(potential(u), 0.5 * (1 - u**2) ** 2)
    np.testing.assert_allclose(potential_prime(u), 2 * u**3 - 2 * u, atol=1e-14)
    np.testing.assert_allclose(potential_second(u), 6 * u**2 - 2)
    assert potential(1.0) == 0.0 and potential(-1.0) == 0.0
    assert potential_second(-1.0) == 4.0
