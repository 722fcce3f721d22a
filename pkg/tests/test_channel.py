import numpy as np
import numpy.testing as npt
import pytest

from risvital.channel import (ChannelError, ChannelRealization, RicianSpec,
                              RisConfig, assemble_end_to_end, build_ris_grid,
                              clutter_draw, los_channel, realize_channel,
                              rician_draw, ris_focus_profile)
from risvital.geometry import ArrayConfig, ula_steering
from risvital.scenario import Scenario, db_to_linear

WAVELENGTH = 299792458.0 / 7.15e9


class TestRicianDraw:
    def test_huge_k_returns_los(self):
        los = np.array([[1 + 2j, -0.5j], [0.25, 1.0]])
        out = rician_draw(RicianSpec(1e12, los), rng_seed=0)
        # nLoS weight sqrt(1/(K+1)) = 1e-6; allow a few sigma of that scale
        npt.assert_allclose(out, los, rtol=1e-6, atol=5e-6)
        out_inf = rician_draw(RicianSpec(np.inf, los), rng_seed=0)
        npt.assert_array_equal(out_inf, los)

    def test_k_zero_unit_variance(self):
        los = np.ones((2,), dtype=complex)
        draws = np.array([rician_draw(RicianSpec(0.0, los), seed)
                          for seed in range(100_000)])
        var = np.var(draws, axis=0)  # nLoS only: per-entry variance 1
        npt.assert_allclose(var, 1.0, rtol=0.03)

    def test_k_10db_power_fraction(self):
        k = db_to_linear(10.0)
        assert k == pytest.approx(10.0)
        assert k / (k + 1.0) == pytest.approx(0.909090909, abs=1e-9)

    def test_mean_converges_to_scaled_los(self):
        k = 2.0
        los = np.array([1.5 - 0.5j, -1.0 + 0.25j])
        n = 100_000
        draws = np.array([rician_draw(RicianSpec(k, los), seed)
                          for seed in range(n)])
        mean = draws.mean(axis=0)
        sem = np.sqrt(1.0 / (k + 1.0) / n)  # std error per complex entry
        err = np.abs(mean - np.sqrt(k / (k + 1.0)) * los)
        assert np.all(err < 3.0 * sem * np.sqrt(2))

    def test_deterministic_per_seed(self):
        spec = RicianSpec(3.0, np.ones((3, 4), dtype=complex))
        npt.assert_array_equal(rician_draw(spec, 42), rician_draw(spec, 42))

    def test_negative_k_rejected(self):
        with pytest.raises(ChannelError):
            RicianSpec(-1.0, np.ones(2))


def single_element_placement(distance):
    from risvital.geometry import Placement
    return Placement(radar_position=[0.0, 0.0, 0.0],
                     ris_center=[0.0, distance, 0.0],
                     ris_normal=[0.0, -1.0, 0.0],
                     target_position=[distance, 0.0, 0.0],
                     chest_normal=[-1.0, 0.0, 0.0])


def one_by_one_ris(center):
    return build_ris_grid(center, [0.0, -1.0, 0.0], 1, 1, WAVELENGTH / 2)


class TestLosChannel:
    def test_friis_magnitude_at_three_metres(self):
        p = single_element_placement(3.0)
        cfg = ArrayConfig(1, WAVELENGTH / 2, WAVELENGTH)
        _, _, h_d = los_channel(p, cfg, one_by_one_ris(p.ris_center))
        assert abs(h_d[0]) == pytest.approx(WAVELENGTH / (4 * np.pi * 3.0),
                                            rel=1e-12)
        assert abs(h_d[0]) == pytest.approx(1.112e-3, rel=1e-3)

    def test_doubling_distance_halves_magnitude_and_rotates_phase(self):
        cfg = ArrayConfig(1, WAVELENGTH / 2, WAVELENGTH)
        near = single_element_placement(2.0)
        far = single_element_placement(4.0)
        _, _, h_near = los_channel(near, cfg, one_by_one_ris(near.ris_center))
        _, _, h_far = los_channel(far, cfg, one_by_one_ris(far.ris_center))
        assert abs(h_far[0]) == pytest.approx(abs(h_near[0]) / 2.0, rel=1e-12)
        expected_rotation = np.exp(-2j * np.pi * 2.0 / WAVELENGTH)
        npt.assert_allclose(h_far[0] / abs(h_far[0]),
                            h_near[0] / abs(h_near[0]) * expected_rotation,
                            atol=1e-9)

    def test_equidistant_ris_elements_equal_target_magnitudes(self):
        # 1x2 panel straddling the normal through the target
        panel = build_ris_grid([0.0, 2.0, 0.0], [0.0, -1.0, 0.0], 1, 2, 0.02)
        p = single_element_placement(2.0)
        from risvital.geometry import Placement
        p = Placement(radar_position=p.radar_position, ris_center=[0, 2.0, 0],
                      ris_normal=[0, -1.0, 0], target_position=[0, 0, 0.5],
                      chest_normal=[0, 1.0, 0])
        _, h_t, _ = los_channel(p, ArrayConfig(1, 0.02, WAVELENGTH), panel)
        assert abs(abs(h_t[0]) - abs(h_t[1])) < 1e-15

    def test_zero_distance_rejected(self):
        p = single_element_placement(2.0)
        panel = build_ris_grid(p.target_position, [0, -1.0, 0], 1, 1, 0.02)
        with pytest.raises(ChannelError):
            los_channel(p, ArrayConfig(1, 0.02, WAVELENGTH), panel)


class TestFocusProfile:
    def test_single_element_matches_formula(self):
        p = single_element_placement(2.5)
        panel = one_by_one_ris(p.ris_center)
        phases = ris_focus_profile(p, panel, WAVELENGTH)
        d1 = np.linalg.norm(p.ris_center - p.radar_position)
        d2 = np.linalg.norm(p.ris_center - p.target_position)
        expected = np.mod(2 * np.pi * (d1 + d2) / WAVELENGTH, 2 * np.pi)
        assert phases[0] == pytest.approx(expected, abs=1e-12)

    def test_symmetric_elements_equal_phases(self):
        # both legs symmetric about the panel centre plane
        panel = build_ris_grid([0.0, 2.0, 0.0], [0.0, -1.0, 0.0], 1, 2, 0.04)
        from risvital.geometry import Placement
        p = Placement(radar_position=[0.0, 0.0, 0.0], ris_center=[0.0, 2.0, 0.0],
                      ris_normal=[0.0, -1.0, 0.0],
                      target_position=[0.0, 4.0, 0.0], chest_normal=[0, -1.0, 0])
        phases = ris_focus_profile(p, panel, WAVELENGTH)
        assert phases[0] == pytest.approx(phases[1], abs=1e-12)

    def test_focused_profile_beats_random_profiles(self):
        scn = Scenario()
        panel = build_ris_grid(scn.placement.ris_center,
                               scn.placement.ris_normal, 10, 10,
                               WAVELENGTH / 2)
        h_i, h_t, _ = los_channel(scn.placement, scn.radar.array_config, panel)
        a_ris = ula_steering(scn.radar.array_config,
                             scn.angles.theta_ris).entries
        focused = ris_focus_profile(scn.placement, panel, WAVELENGTH)

        def cascade_gain(phases):
            gamma = np.exp(1j * phases)
            return abs(np.sum(h_t * gamma * (h_i.T @ a_ris)))

        best = cascade_gain(focused)
        rng = np.random.default_rng(77)
        random_gains = [cascade_gain(rng.uniform(0, 2 * np.pi, 100))
                        for _ in range(200)]
        assert best > max(random_gains)


class TestAssembleEndToEnd:
    def setup_method(self):
        scn = Scenario()
        self.ch = realize_channel(scn.placement, scn.radar.array_config,
                                  scn.ris_config(), k_rice=10.0,
                                  clutter_strength=1e-10, rng_seed=11)

    def test_direct_only_is_rank_one(self):
        zero_c = ChannelRealization(self.ch.H_I, self.ch.h_T, self.ch.h_D,
                                    np.zeros_like(self.ch.H_C), self.ch.Gamma)
        h = assemble_end_to_end(zero_c, 0.0, 0.3 + 0.1j)
        npt.assert_allclose(h, (0.3 + 0.1j) * np.outer(zero_c.h_D, zero_c.h_D),
                            atol=1e-18)
        s = np.linalg.svd(h, compute_uv=False)
        assert s[1] < 1e-10 * s[0]

    def test_ris_only_is_rank_one(self):
        zero_c = ChannelRealization(self.ch.H_I, self.ch.h_T, self.ch.h_D,
                                    np.zeros_like(self.ch.H_C), self.ch.Gamma)
        h = assemble_end_to_end(zero_c, 1.0, 0.0)
        s = np.linalg.svd(h, compute_uv=False)
        assert s[1] < 1e-10 * s[0]

    def test_clutter_passthrough(self):
        h = assemble_end_to_end(self.ch, 0.0, 0.0)
        npt.assert_array_equal(h, self.ch.H_C)

    def test_monostatic_symmetry(self):
        h = assemble_end_to_end(self.ch, 0.7 - 0.2j, 0.1 + 0.9j)
        npt.assert_allclose(h, h.T, rtol=0, atol=1e-18)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ChannelError):
            ChannelRealization(self.ch.H_I, self.ch.h_T[:-1], self.ch.h_D,
                               self.ch.H_C, self.ch.Gamma)


class TestClutterDraw:
    def test_zero_strength(self):
        npt.assert_array_equal(clutter_draw(0.0, 0, 4), np.zeros((4, 4)))

    def test_per_entry_variance(self):
        strength = 0.5
        draws = np.array([clutter_draw(strength, seed, 2)
                          for seed in range(100_000)])
        var = np.var(draws, axis=0)
        npt.assert_allclose(var, strength, rtol=0.03)

    def test_same_seed_identical(self):
        npt.assert_array_equal(clutter_draw(1.0, 9, 5), clutter_draw(1.0, 9, 5))

    def test_symmetric(self):
        h_c = clutter_draw(1.0, 3, 6)
        npt.assert_array_equal(h_c, h_c.T)

    def test_negative_strength_rejected(self):
        with pytest.raises(ChannelError):
            clutter_draw(-0.1, 0, 3)


class TestRisConfig:
    def test_reflection_matrix_unit_modulus(self):
        panel = build_ris_grid([0, 2, 0], [0, -1, 0], 3, 4, 0.02,
                               phases=np.linspace(0, 5, 12))
        gamma = panel.reflection_matrix
        off_diag = gamma - np.diag(np.diag(gamma))
        assert np.all(off_diag == 0)
        npt.assert_allclose(np.abs(np.diag(gamma)), 1.0, atol=1e-15)

    def test_grid_spacing_and_extent(self):
        panel = build_ris_grid([0, 2, 0], [0, -1, 0], 10, 10, 0.021)
        extent = panel.element_positions.max(axis=0) \
            - panel.element_positions.min(axis=0)
        assert extent.max() == pytest.approx(9 * 0.021, rel=1e-12)

    def test_gamma_modulus_validated(self):
        with pytest.raises(ChannelError):
            ChannelRealization(np.ones((2, 3)), np.ones(3), np.ones(2),
                               np.zeros((2, 2)), np.diag([1.0, 1.0, 2.0]))
