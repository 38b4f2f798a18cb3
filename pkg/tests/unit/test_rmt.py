import numpy as np
import pytest

from ethlab.errors import ArgumentError
from ethlab.rmt import (
    brody_spacings,
    goe_spectrum,
    haar_state,
    haar_states,
    poisson_spectrum,
    sample_goe,
    wigner_spacings,
)


def test_goe_is_symmetric_with_expected_variances(rng):
    """Дисперсия диагонали sigma^2, вне диагонали sigma^2 / 2"""
    samples = np.stack([sample_goe(40, rng, sigma=2.0) for _ in range(200)])

    assert np.array_equal(samples, np.transpose(samples, (0, 2, 1)))
    diagonal = samples[:, np.arange(40), np.arange(40)]
    off = samples[:, np.triu_indices(40, 1)[0], np.triu_indices(40, 1)[1]]
    assert diagonal.var() == pytest.approx(4.0, rel=0.05)
    assert off.var() == pytest.approx(2.0, rel=0.05)


def test_goe_rejects_empty_dimension():
    """dim = 0"""
    with pytest.raises(ArgumentError):
        sample_goe(0)


def test_goe_spectrum_is_sorted_and_seeded():
    """Одинаковый генератор дает одинаковый спектр"""
    a = goe_spectrum(64, np.random.default_rng(5))
    b = goe_spectrum(64, np.random.default_rng(5))

    assert np.array_equal(a, b)
    assert np.all(np.diff(a) >= 0)


def test_poisson_spectrum_unit_spacing(rng):
    """Среднее расстояние около 1"""
    assert np.diff(poisson_spectrum(50_000, rng)).mean() == pytest.approx(1.0, abs=0.02)


def test_wigner_spacings_unit_mean(rng):
    """Распределение Вигнера нормировано на единичное среднее"""
    s = wigner_spacings(50_000, rng)

    assert s.mean() == pytest.approx(1.0, abs=0.01)
    assert np.all(s >= 0)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
def test_brody_spacings_unit_mean(gamma, rng):
    """Выборка Броди имеет единичное среднее при любом gamma"""
    assert brody_spacings(50_000, gamma, rng).mean() == pytest.approx(1.0, abs=0.02)


def test_brody_gamma_range(rng):
    """gamma вне [0, 1]"""
    with pytest.raises(ArgumentError):
        brody_spacings(10, 1.5, rng)


def test_haar_states_are_normalized(rng):
    """Случайные состояния нормированы и комплексны"""
    states = haar_states(5, 64, rng)

    assert states.shape == (5, 64)
    assert np.allclose(np.linalg.norm(states, axis=1), 1.0)
    assert np.iscomplexobj(haar_state(8, rng))
