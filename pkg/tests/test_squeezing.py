import math

import numpy as np
import pytest

from workreal import (
    InvalidParameterError,
    TruncationError,
    UnitaryPropagator,
    compose_propagators,
    entropic_k3_oscillator,
    jarzynski_deviation,
    oscillator_three_time,
    select_n_max,
    squeeze_matrix_closed_form,
    squeeze_matrix_exponential_oracle,
    squeeze_propagator,
    thermal_tail_mass,
    total_work_distribution,
    work_distribution,
)
from workreal.leggett_garg import k3_entropic
from workreal.squeezing import (
    SqueezeParams,
    golden_section_minimum,
    oscillator_entropy_reports,
    squeeze_matrix_legacy_transcription,
)

G00_HALF = 0.94171061583167571  # sech(1/2)^(1/2), frozen at 40 digits


class TestSqueezeParams:
    def test_bogoliubov_identity(self):
        params = SqueezeParams(0.8)
        assert params.mu ** 2 - params.nu ** 2 == pytest.approx(1.0, rel=1e-12)

    def test_negative_amplitude_rejected(self):
        with pytest.raises(InvalidParameterError):
            SqueezeParams(-0.1)

    def test_phase_not_supported(self):
        with pytest.raises(InvalidParameterError):
            SqueezeParams(0.1, phi=0.3)


class TestClosedForm:
    def test_zero_squeeze_is_identity(self):
        np.testing.assert_array_equal(squeeze_matrix_closed_form(0.0, 8).g, np.eye(9))

    def test_parity_zeros_are_structural(self):
        g = squeeze_matrix_closed_form(0.7, 31).g
        m, n = np.indices(g.shape)
        assert np.all(g[(m + n) % 2 == 1] == 0.0)

    def test_vacuum_overlap(self):
        g = squeeze_matrix_closed_form(0.5, 16).g
        assert g[0, 0] == pytest.approx(G00_HALF, rel=1e-14)
        assert g[0, 1] == 0.0

    def test_column_one_decouples_for_all_amplitudes(self):
        for r in (0.05, 0.4, 1.3):
            assert squeeze_matrix_closed_form(r, 12).g[0, 1] == 0.0

    def test_transpose_symmetry_up_to_parity_sign(self):
        g = squeeze_matrix_closed_form(0.3, 20).g
        for m in range(0, 20, 2):
            for n in range(m + 2, 20, 2):
                assert g[n, m] == pytest.approx((-1.0) ** ((n - m) // 2) * g[m, n],
                                                rel=1e-10, abs=1e-18)

    def test_oracle_gate(self):
        """The build gate: closed form against the matrix exponential on the
        low corner at weak, moderate, and strong squeezing."""
        for r in (0.02, 0.2, 1.0):
            closed = squeeze_matrix_closed_form(r, 240)
            oracle = squeeze_matrix_exponential_oracle(r, 240)
            assert np.abs(closed.g[:21, :21] - oracle.g[:21, :21]).max() < 1e-8

    def test_gate_block_is_mostly_pure_series(self):
        """The dual route stays honest: at the sweep-regime amplitudes every gate
        element comes straight from the series; at r = 1 only the deepest corner
        falls back to the eigendecomposition (which is still not the oracle)."""
        from workreal.squeezing import _series_blocks
        even = (np.indices((21, 21)).sum(axis=0) % 2) == 0
        for r in (0.02, 0.2):
            _, certified = _series_blocks(r, 41)
            assert certified[:21, :21][even].all()
        _, certified = _series_blocks(1.0, 41)
        assert certified[:21, :21][even].mean() > 0.95

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidParameterError):
            squeeze_matrix_closed_form(-0.2, 10)
        with pytest.raises(InvalidParameterError):
            squeeze_matrix_closed_form(0.2, 0)

    def test_column_defect_matches_independent_recount(self):
        """The reported defect of the truncated matrix must equal a direct
        arbitrary-precision recount of the same column norms."""
        import mpmath as mp
        matrix = squeeze_matrix_closed_form(0.5, 100)
        defects = matrix.column_defects
        worst = int(np.argmax(defects))
        mp.mp.dps = 40
        column = [mp.mpf(float(x)) for x in matrix.g[:, worst]]
        recount = abs(1 - mp.fsum(x * x for x in column))
        assert defects[worst] == pytest.approx(float(recount), rel=1e-10)

    def test_unitarity_deviation_matches_independent_recount(self):
        """validate_unitary on the truncated matrix reports the worst entry of
        G^T G - 1; recompute that entry in arbitrary precision."""
        import mpmath as mp
        from workreal import validate_unitary
        matrix = squeeze_matrix_closed_form(0.5, 100)
        reported = validate_unitary(matrix.g, tol=1.0)
        gram = matrix.g.T @ matrix.g - np.eye(101)
        a, b = np.unravel_index(np.abs(gram).argmax(), gram.shape)
        mp.mp.dps = 40
        entry = mp.fsum(mp.mpf(float(matrix.g[m, a])) * mp.mpf(float(matrix.g[m, b]))
                        for m in range(101)) - (1 if a == b else 0)
        assert reported == pytest.approx(abs(float(entry)), rel=1e-10)
        # the deviation concentrates where the truncation bites
        assert min(a, b) > 50


class TestExponentialOracle:
    def test_zero_squeeze(self):
        np.testing.assert_array_equal(squeeze_matrix_exponential_oracle(0.0, 5).g,
                                      np.eye(6))

    def test_unitarity_defect_inside_trusted_band(self):
        for r in (0.3, 1.0):
            matrix = squeeze_matrix_exponential_oracle(r, 128)
            band = matrix.g[:, :65]
            assert np.abs(band.T @ band - np.eye(65)).max() < 1e-10

    def test_two_truncations_agree_where_converged(self):
        small = squeeze_matrix_exponential_oracle(0.5, 96)
        large = squeeze_matrix_exponential_oracle(0.5, 192)
        assert np.abs(small.g[:33, :33] - large.g[:33, :33]).max() < 1e-10


def test_legacy_transcription_documents_the_discrepancy():
    """The mis-transcribed series loses the vacuum element entirely, which is the
    smoking gun that pinned the corrected form."""
    legacy = squeeze_matrix_legacy_transcription(0.5, 12)
    assert legacy[0, 0] == 0.0
    assert np.abs(legacy - squeeze_matrix_closed_form(0.5, 12).g).max() > 0.5


class TestComposition:
    def test_squeezes_compose_additively(self):
        # trusted band: columns whose squeezed support clears the truncation edge
        n_max = 160
        u1 = squeeze_propagator(squeeze_matrix_closed_form(0.2, n_max))
        u2 = squeeze_propagator(squeeze_matrix_closed_form(0.3, n_max))
        composed = compose_propagators(u1, u2)
        direct = squeeze_matrix_closed_form(0.5, n_max).g
        assert np.abs(composed.matrix.real[:49, :49] - direct[:49, :49]).max() < 1e-8

    def test_no_middle_branch_equals_composed_squeeze(self):
        from workreal import build_thermal_state, two_time_joint_skipping_middle
        protocol = oscillator_three_time(1.0, 0.1, 0.15, n_max=64)
        rho0 = build_thermal_state(protocol.spectra[0], 1.0)
        u1 = squeeze_propagator(squeeze_matrix_closed_form(0.1, 64))
        u2 = squeeze_propagator(squeeze_matrix_closed_form(0.15, 64))
        via_compose = two_time_joint_skipping_middle(rho0, u1, u2,
                                                     spectrum_later=protocol.spectra[2],
                                                     norm_tol=1e-6)
        assert np.abs(via_compose.probs[:33, :33]
                      - protocol.no_middle.probs[:33, :33]).max() < 1e-8


class TestTruncationSelection:
    def test_thermal_tail_is_exact_geometric(self):
        assert thermal_tail_mass(1.0, 10) == pytest.approx(math.exp(-11.0), rel=1e-14)

    def test_selection_meets_both_criteria(self):
        n_max = select_n_max(0.1, 0.2)
        assert n_max % 64 == 0
        assert thermal_tail_mass(0.1, n_max) < 1e-12
        defects = squeeze_matrix_closed_form(0.2, n_max).column_defects
        support = int(math.ceil(-math.log(1e-10) / 0.1))
        assert defects[:support].max() < 1e-10

    def test_low_temperature_needs_few_levels(self):
        assert select_n_max(10.0, 0.5) <= 128

    def test_beta_point_one_lands_near_four_hundred(self):
        assert 256 <= select_n_max(0.1, 0.2) <= 512


class TestOscillatorProtocol:
    def test_zero_squeeze_keeps_thermal_diagonal(self):
        protocol = oscillator_three_time(1.0, 0.0, 0.0, n_max=64)
        cube = protocol.joint3.probs
        diag = np.einsum("kkk->k", cube)
        rho = np.exp(-np.arange(65.0))
        np.testing.assert_allclose(diag, rho / rho.sum(), atol=1e-15)
        assert cube.sum() == pytest.approx(1.0, abs=1e-12)

    def test_tail_precondition_enforced(self):
        with pytest.raises(TruncationError):
            oscillator_three_time(0.1, 0.02, 0.02, n_max=64)

    def test_budget_reported_and_small(self):
        protocol = oscillator_three_time(0.5, 0.3, 0.3)
        assert 0 < protocol.truncation_budget < 1e-8
        assert protocol.joint3.total_mass() == pytest.approx(
            1.0, abs=protocol.truncation_budget)

    def test_jarzynski_for_total_work_through_the_middle(self):
        """Equal spectra at all times, so dF = 0; the middle measurement must not
        break the identity for the total work."""
        for beta in (0.5, 1.0):
            protocol = oscillator_three_time(beta, 0.3, 0.3)
            deviation = jarzynski_deviation(total_work_distribution(protocol.joint3),
                                            beta, 0.0)
            assert deviation < protocol.truncation_budget

    def test_total_work_converges_with_truncation(self):
        base = oscillator_three_time(0.5, 0.3, 0.3)
        doubled = oscillator_three_time(0.5, 0.3, 0.3, n_max=2 * base.n_max)
        d_base = jarzynski_deviation(total_work_distribution(base.joint3), 0.5, 0.0)
        d_doubled = jarzynski_deviation(total_work_distribution(doubled.joint3),
                                        0.5, 0.0)
        assert d_doubled <= d_base + 1e-12

    def test_middle_measurement_is_invasive(self):
        """Total-work statistics with the middle measurement differ from the work
        statistics of the directly composed squeeze."""
        protocol = oscillator_three_time(1.0, 0.1, 0.1, n_max=64)
        with_middle = total_work_distribution(protocol.joint3, view="grouped")
        without = work_distribution(protocol.no_middle, view="grouped")
        works = sorted(set(np.round(with_middle.works, 9))
                       | set(np.round(without.works, 9)))
        lookup_a = dict(zip(np.round(with_middle.works, 9), with_middle.probabilities))
        lookup_b = dict(zip(np.round(without.works, 9), without.probabilities))
        tv = 0.5 * sum(abs(lookup_a.get(w, 0.0) - lookup_b.get(w, 0.0)) for w in works)
        assert tv > 1e-4


class TestEntropicParameter:
    def test_fast_path_matches_object_path(self):
        """The streaming evaluation must agree with the full work-distribution
        pipeline in every convention combination."""
        protocol = oscillator_three_time(1.0, 0.12, 0.2, n_max=96)
        pops = __import__("workreal").build_thermal_state(protocol.spectra[0], 1.0)
        for degeneracy in ("fine", "grouped"):
            h_w21, h_w10, h_w20, h_e1 = oscillator_entropy_reports(
                protocol, degeneracy=degeneracy)
            measured = k3_entropic(h_w21, h_w10, h_w20, h_e1)
            fast_measured, _ = entropic_k3_oscillator(
                1.0, 0.12, 0.2, n_max=96, degeneracy=degeneracy,
                middle_entropy="measured")
            assert fast_measured == pytest.approx(measured, abs=1e-10)
            from workreal import shannon_entropy
            h_thermal = shannon_entropy(pops.populations)
            initial = k3_entropic(h_w21, h_w10, h_w20, h_thermal)
            fast_initial, _ = entropic_k3_oscillator(
                1.0, 0.12, 0.2, n_max=96, degeneracy=degeneracy,
                middle_entropy="initial")
            assert fast_initial == pytest.approx(initial, abs=1e-10)

    def test_initial_variant_is_weaker(self):
        """The propagated marginal can only gain entropy under a doubly
        stochastic map, so the initial-state variant sits above the measured one."""
        measured, _ = entropic_k3_oscillator(0.5, 0.2, 0.2, middle_entropy="measured")
        initial, _ = entropic_k3_oscillator(0.5, 0.2, 0.2, middle_entropy="initial")
        assert initial >= measured - 1e-14

    def test_landmark_negative_under_both_conventions(self):
        for middle in ("initial", "measured"):
            value, _ = entropic_k3_oscillator(0.1, 0.02, 0.02, middle_entropy=middle)
            assert value < 0.0

    def test_truncation_robustness(self):
        n_max = select_n_max(1.0, 0.4)
        value, _ = entropic_k3_oscillator(1.0, 0.2, 0.2, n_max=n_max)
        doubled, _ = entropic_k3_oscillator(1.0, 0.2, 0.2, n_max=2 * n_max)
        assert abs(value - doubled) < 1e-6

    def test_unknown_conventions_rejected(self):
        with pytest.raises(InvalidParameterError):
            entropic_k3_oscillator(1.0, 0.1, 0.1, degeneracy="other")
        with pytest.raises(InvalidParameterError):
            entropic_k3_oscillator(1.0, 0.1, 0.1, middle_entropy="other")


def test_generic_propagator_pipeline_agrees_with_fast_path():
    """Driving truncated squeeze propagators through the same generic pipeline the
    two-level model uses must land on the streaming result exactly."""
    from workreal import build_thermal_state, entropic_k3_from_protocol, oscillator_spectrum
    rho = build_thermal_state(oscillator_spectrum(96, 0), 1.0)
    u1 = squeeze_propagator(squeeze_matrix_closed_form(0.12, 96))
    u2 = squeeze_propagator(squeeze_matrix_closed_form(0.2, 96))
    generic = entropic_k3_from_protocol(rho, u1, u2,
                                        spectrum_1=oscillator_spectrum(96, 1),
                                        spectrum_2=oscillator_spectrum(96, 2))
    fast, _ = entropic_k3_oscillator(1.0, 0.12, 0.2, n_max=96,
                                     middle_entropy="measured")
    assert generic == pytest.approx(fast, abs=1e-12)


class TestSweepConsistency:
    def test_grid_cells_match_direct_evaluation_in_every_convention(self):
        from workreal.squeezing import squeeze_grid_sweep
        r1_grid = np.array([0.05, 0.15])
        r2_grid = np.array([0.1, 0.2])
        for degeneracy in ("fine", "grouped"):
            for middle in ("initial", "measured"):
                table = squeeze_grid_sweep(beta=1.0, r1_grid=r1_grid, r2_grid=r2_grid,
                                           n_max=96, degeneracy=degeneracy,
                                           middle_entropy=middle)
                for r1, r2, value, _ in table.rows:
                    direct, _ = entropic_k3_oscillator(1.0, r1, r2, n_max=96,
                                                       degeneracy=degeneracy,
                                                       middle_entropy=middle)
                    assert value == pytest.approx(direct, abs=1e-13)

    def test_diagonal_scan_passes_conventions_through(self):
        from workreal.squeezing import diagonal_scan
        scan = diagonal_scan(1.0, np.array([0.1]), degeneracy="grouped",
                             middle_entropy="measured")
        direct, _ = entropic_k3_oscillator(1.0, 0.1, 0.1,
                                           n_max=int(scan.rows[0, 2]),
                                           degeneracy="grouped",
                                           middle_entropy="measured")
        assert scan.rows[0, 1] == pytest.approx(direct, abs=1e-13)

    def test_budget_cap_trips_with_a_named_point(self):
        with pytest.raises(TruncationError) as excinfo:
            oscillator_three_time(1.0, 0.9, 0.9, n_max=64, max_budget=1e-9)
        assert "r1=0.9" in str(excinfo.value)
        assert excinfo.value.leaked_mass > 0


def test_golden_section_finds_quadratic_minimum():
    x, fx = golden_section_minimum(lambda x: (x - 0.3) ** 2, 0.0, 1.0, xtol=1e-6)
    assert x == pytest.approx(0.3, abs=1e-5)
    assert fx == pytest.approx(0.0, abs=1e-9)
