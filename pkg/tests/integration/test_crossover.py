import math

import numpy as np
import pytest
from scipy import stats

from ethlab.tables import read_table
from tests.conftest import CROSSOVER_H_VALUES, CROSSOVER_UJ_VALUES

pytestmark = [pytest.mark.integration, pytest.mark.slow]

OBSERVABLES = ("T", "O")


def xxz_table(out, family, h):
    return read_table(out / f"{family}_h={h:g}.csv")


def rows(table, **selection):
    mask = np.ones(table.n_rows, dtype=bool)
    for column, value in selection.items():
        mask &= np.asarray(table.columns[column]) == value
    return mask


def rising_decades(t, values, sigmas=2.0):
    """Декады log t, на которых наклон SFF положителен сверх шума"""
    found = []
    for k in range(int(math.floor(math.log10(t.min()))), int(math.ceil(math.log10(t.max())))):
        window = (t >= 10.0**k) & (t < 10.0 ** (k + 1))
        if window.sum() < 10:
            continue
        fit = stats.linregress(np.log10(t[window]), values[window])
        if fit.slope > sigmas * fit.stderr:
            found.append(k)
    return found


def test_hamiltonian_mean_ratio_crossover(crossover_results):
    """<r> гамильтониана: около Пуассона при h = 0.01, около GOE при h = 0.7"""
    low = xxz_table(crossover_results, "fig6_spacing_ratios", 0.01).metadata["mean_r_H"]
    high = xxz_table(crossover_results, "fig6_spacing_ratios", 0.7).metadata["mean_r_H"]

    assert 0.36 <= low <= 0.43
    assert 0.50 <= high <= 0.55


def test_brody_gamma_grows_with_field(crossover_results):
    """Параметр Броди растет вдоль сетки h"""
    gammas = [xxz_table(crossover_results, "fig2a_nnsd", h).metadata["brody_gamma"] for h in CROSSOVER_H_VALUES]

    assert np.all(np.diff(gammas) > 0), gammas


@pytest.mark.parametrize("h", [0.01, 0.7])
def test_block_ratio_histograms_follow_hamiltonian(crossover_results, h):
    """Гистограммы r блоков 21 x 21 наблюдаемых T и O совпадают с гистограммой H в sup-норме до 0.12"""
    table = xxz_table(crossover_results, "fig6_spacing_ratios", h)
    density = np.asarray(table.columns["density"])
    reference = density[rows(table, statistic="ratio", source="H")]

    for name in OBSERVABLES:
        blocks = density[rows(table, statistic="ratio", source=f"{name}_blocks_M21")]
        assert blocks.shape == reference.shape
        assert np.max(np.abs(blocks - reference)) < 0.12, name


def test_variance_ratio_limits(crossover_results):
    """Средний R блоков: около 2 при h = 0.7, больше 3 при h = 0.01"""
    chaotic = xxz_table(crossover_results, "variance_ratio", 0.7).metadata
    integrable = xxz_table(crossover_results, "variance_ratio", 0.01).metadata

    for name in OBSERVABLES:
        assert 1.6 <= chaotic[f"{name}_mean_ratio"] <= 2.5, name
        assert integrable[f"{name}_mean_ratio"] > 3, name


def test_gaussianity_ratio_crossover(crossover_results):
    """R(omega) на [1, 4]: в пределах 10% от pi/2 при h = 0.7, отклонение больше 20% при h = 0.01"""
    chaotic = xxz_table(crossover_results, "fig9_gaussianity_ratio", 0.7)
    integrable = xxz_table(crossover_results, "fig9_gaussianity_ratio", 0.01)
    omega = np.asarray(integrable.columns["omega"])
    ratio = np.asarray(integrable.columns["ratio"])
    band = (omega >= 1.0) & (omega <= 4.0)

    for name in OBSERVABLES:
        assert chaotic.metadata[f"{name}_mean_ratio_1_4"] == pytest.approx(math.pi / 2, rel=0.1), name
        selected = band & rows(integrable, observable=name)
        assert selected.any(), name
        assert np.max(np.abs(ratio[selected] / (math.pi / 2) - 1)) > 0.2, name


def test_decay_rate_is_positive_and_non_increasing(crossover_results):
    """eta > 0 при всех h и не растет вдоль сетки (с точностью до ошибок подгонки)"""
    metadata = [xxz_table(crossover_results, "fig5_variance_decay", h).metadata for h in CROSSOVER_H_VALUES]

    for name in OBSERVABLES:
        eta = np.array([m[f"{name}_eta"] for m in metadata])
        stderr = np.array([m[f"{name}_eta_stderr"] for m in metadata])
        assert np.all(eta > 0), (name, eta)
        assert np.all(np.diff(eta) <= stderr[:-1] + stderr[1:]), (name, eta, stderr)


def test_chaotic_sff_has_dip_and_plateau(crossover_results):
    """SFF окон спектра при h = 0.7: провал ниже 0.5 и плато 1 +- 0.1"""
    table = xxz_table(crossover_results, "fig7_sff", 0.7)
    mask = rows(table, source="H_windows_M512")
    t = np.asarray(table.columns["t"])[mask]
    values = np.asarray(table.columns["sff"])[mask]

    assert values.min() < 0.5
    assert values[t >= 100].mean() == pytest.approx(1.0, abs=0.1)


def test_integrable_sff_has_no_ramp(crossover_results):
    """SFF окон спектра при h = 0.01: ни одной декады с растущим наклоном"""
    table = xxz_table(crossover_results, "fig7_sff", 0.01)
    mask = rows(table, source="H_windows_M512")

    decades = rising_decades(np.asarray(table.columns["t"])[mask], np.asarray(table.columns["sff"])[mask])

    assert decades == []


def test_entropy_grows_with_field(crossover_results):
    """Кривая энтропии при h = 0.7 выше кривой при h = 0.01 для 2 <= L_A <= L/2"""
    curves = {}
    for h in (0.01, 0.7):
        table = xxz_table(crossover_results, "fig8_entropy", h)
        mask = rows(table, source="H")
        l_a = np.asarray(table.columns["L_A"])[mask]
        entropy = np.asarray(table.columns["entropy"])[mask]
        inner = (l_a >= 2) & (l_a <= 6)
        curves[h] = entropy[inner]

    assert curves[0.7].size == 5
    assert np.all(curves[0.7] > curves[0.01])


def test_bose_hubbard_reentrance(crossover_results):
    """Средний r блоков 50 x 50: Пуассон при U/J = 0.02, GOE в середине, снова Пуассон при U/J = 9"""
    mean_r = {
        uj: read_table(crossover_results / f"fig11_bh_spacing_ratios_uj={uj:g}.csv").metadata["mean_r_blocks"]
        for uj in CROSSOVER_UJ_VALUES
    }
    intermediate = [mean_r[uj] for uj in CROSSOVER_UJ_VALUES[1:-1]]

    assert mean_r[0.02] < 0.43
    assert max(intermediate) > 0.48
    assert mean_r[9.0] < 0.43


def test_all_writes_every_family_per_point(crossover_results):
    """all: таблица каждого семейства для каждой точки развертки"""
    names = {p.name for p in crossover_results.iterdir()}

    families = {name.rsplit("_", 1)[0] for name in names}
    assert families == {
        "fig2a_nnsd", "fig2b_numvar", "fig3_diagonals", "fig4_offdiag_hist_and_fits", "fig5_variance_decay",
        "fig9_gaussianity_ratio", "fig6_spacing_ratios", "variance_ratio", "fig1b_block_magnitude",
        "fig7_sff", "fig10_sff_single", "fig8_entropy", "fig11_bh_spacing_ratios",
    }
    assert len(names) == 12 * len(CROSSOVER_H_VALUES) + len(CROSSOVER_UJ_VALUES)
    assert "fig2a_nnsd_h=0.01.csv" in names
    assert "fig11_bh_spacing_ratios_uj=0.02.csv" in names
