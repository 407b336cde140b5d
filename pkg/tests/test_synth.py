import numpy as np
import pytest

from pvimine.errors import ConfigError
from pvimine.pipeline import RunParams, run_pipeline
from pvimine.synth import (
    PedReaction,
    ScenarioSpec,
    default_scene,
    generate,
    load_scenario_spec,
    packaged_scenario,
    scenario_truth,
)


class TestScenarioTruth:
    def test_default_spec_hand_computed(self):
        # ped crosses y=1.75 at (1.75+3)/1.4; exits CA at y=2.95; the car
        # (4.5 x 1.8) reaches the crossing 2.5 s after the pedestrian
        truth = scenario_truth(ScenarioSpec())
        assert truth.ped_cross_time == pytest.approx(4.75 / 1.4, abs=1e-6)
        assert truth.ped_exit == pytest.approx(5.95 / 1.4, abs=1e-6)
        veh_entry = 4.75 / 1.4 + 2.5 - (0.3 + 2.25) / 8.0
        assert truth.veh_entry == pytest.approx(veh_entry, abs=1e-6)
        assert truth.pet == pytest.approx(veh_entry - 5.95 / 1.4, abs=1e-6)
        assert truth.constellation == "pedestrian_first"

    def test_negative_offset_vehicle_first(self):
        truth = scenario_truth(ScenarioSpec(time_offset=-2.5))
        assert truth.constellation == "vehicle_first"
        assert truth.pet < 0

    def test_zero_offset_co_occupied(self):
        truth = scenario_truth(ScenarioSpec(time_offset=0.0))
        assert truth.constellation == "co_occupied"
        assert truth.pet == 0.0

    def test_sign_flip_symmetry(self):
        fwd = scenario_truth(ScenarioSpec(time_offset=4.0))
        # entry/exit geometry is symmetric, so a large negative offset gives
        # the mirrored constellation
        rev = scenario_truth(ScenarioSpec(time_offset=-4.0))
        assert fwd.pet > 0 > rev.pet

    def test_reaction_delays_crossing(self):
        base = scenario_truth(ScenarioSpec())
        delayed = scenario_truth(ScenarioSpec(
            ped_reaction=PedReaction(t_d_true=1.0, decel=1.0, stop_duration=2.0)))
        assert delayed.ped_entry > base.ped_entry
        assert delayed.t_d == 1.0

    def test_stop_duration_adds_exactly(self):
        # a stop completed before CA entry shifts entry/exit by the full
        # stop plus the two speed ramps: 2 * (v / a - v / (2a)) = v / a
        a, hold = 2.0, 1.5
        base = scenario_truth(ScenarioSpec())
        stopped = scenario_truth(ScenarioSpec(
            ped_reaction=PedReaction(t_d_true=0.5, decel=a, stop_duration=hold)))
        shift = hold + 1.4 / a
        assert stopped.ped_exit - base.ped_exit == pytest.approx(shift, abs=1e-6)

    def test_validation_errors(self):
        with pytest.raises(ConfigError):
            scenario_truth(ScenarioSpec(ped_speed=0.0))
        with pytest.raises(ConfigError):
            scenario_truth(ScenarioSpec(veh_lane="middle"))
        with pytest.raises(ConfigError):
            scenario_truth(ScenarioSpec(veh_class="truck"))
        with pytest.raises(ConfigError):
            scenario_truth(ScenarioSpec(noise_sigma=-0.1))


class TestGenerate:
    def test_same_seed_identical(self):
        spec = ScenarioSpec(noise_sigma=0.02, seed=42)
        ped_a, veh_a, _ = generate(spec)
        ped_b, veh_b, _ = generate(spec)
        np.testing.assert_array_equal(ped_a.y, ped_b.y)
        np.testing.assert_array_equal(veh_a.x, veh_b.x)

    def test_different_seed_differs(self):
        a = generate(ScenarioSpec(noise_sigma=0.02, seed=1))[0]
        b = generate(ScenarioSpec(noise_sigma=0.02, seed=2))[0]
        assert not np.array_equal(a.y, b.y)

    def test_noise_free_matches_kinematics(self):
        spec = ScenarioSpec()
        ped, veh, truth = generate(spec)
        i = np.argmin(np.abs(ped.t - truth.ped_cross_time))
        assert abs(ped.y[i] - 1.75) < 1.4 * spec.period
        j = np.argmin(np.abs(veh.t - truth.veh_cross_time))
        assert abs(veh.x[j]) < 8.0 * spec.period

    def test_far_lane_direction(self):
        ped, veh, _ = generate(ScenarioSpec(veh_lane="far"))
        assert veh.heading[0] == pytest.approx(np.pi)
        assert veh.x[0] > veh.x[-1]
        assert np.all(veh.y == 5.25)

    def test_track_covers_both_events(self):
        _, veh, truth = generate(ScenarioSpec(time_offset=6.0))
        assert veh.t[-1] >= truth.veh_exit
        assert veh.t[0] <= min(truth.ped_entry, truth.veh_entry)


class TestScenarioFiles:
    def test_packaged_specs_load_and_validate(self):
        names = ["critical_replay", "band_ped_first_gentle", "band_ped_first_close",
                 "band_veh_first_close", "band_veh_first_gentle"]
        pets = {}
        for name in names:
            spec = packaged_scenario(name)
            pets[name] = scenario_truth(spec).pet
        assert pets["critical_replay"] == pytest.approx(-0.55, abs=0.01)
        assert pets["band_ped_first_gentle"] == pytest.approx(3.0, abs=0.01)
        assert pets["band_ped_first_close"] == pytest.approx(1.0, abs=0.01)
        assert pets["band_veh_first_close"] == pytest.approx(-1.0, abs=0.01)
        assert pets["band_veh_first_gentle"] == pytest.approx(-3.0, abs=0.01)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="walk_speed"):
            load_scenario_spec("walk_speed: 2.0\n")

    def test_reaction_block_round_trip(self):
        text = ("ped_speed: 1.5\nveh_speed: 6.0\ntime_offset: -1.0\n"
                "ped_reaction: {t_d_true: 2.0, decel: 1.5, stop_duration: 0.4}\n")
        spec = load_scenario_spec(text)
        assert spec.ped_reaction == PedReaction(2.0, 1.5, 0.4)
        assert spec.veh_speed == 6.0


class TestPipelineRecovery:
    def run(self, spec):
        ped, veh, truth = generate(spec)
        result = run_pipeline([ped, veh], default_scene(), RunParams())
        return result, truth

    def test_pet_recovered_default(self):
        result, truth = self.run(ScenarioSpec())
        assert result.counts["pc_pvis"] == 1
        rec = result.pc_records[0]
        assert rec.pet == pytest.approx(truth.pet, abs=0.08)
        assert rec.constellation == truth.constellation

    def test_pet_recovered_with_noise(self):
        result, truth = self.run(ScenarioSpec(time_offset=-2.2, noise_sigma=0.02,
                                              seed=5))
        rec = result.pc_records[0]
        assert rec.pet == pytest.approx(truth.pet, abs=0.08)
        assert rec.constellation == "vehicle_first"

    def test_deceleration_onset_recovered(self):
        spec = ScenarioSpec(
            time_offset=-1.2, veh_speed=5.5,
            ped_reaction=PedReaction(t_d_true=2.2, decel=1.5, stop_duration=0.6),
            noise_sigma=0.01, seed=3)
        result, truth = self.run(spec)
        rec = result.pc_records[0]
        assert rec.reaction is not None
        assert rec.reaction.t_d == pytest.approx(truth.t_d, abs=0.52)

    def test_reaction_scenarios_classified_non_ordinary(self):
        hits = 0
        for seed in range(10):
            spec = ScenarioSpec(
                time_offset=-1.2, veh_speed=5.5,
                ped_reaction=PedReaction(t_d_true=2.2, decel=1.5,
                                         stop_duration=0.6),
                noise_sigma=0.01, seed=seed)
            result, _ = self.run(spec)
            hits += result.labels["ped"] == "non_ordinary"
        assert hits == 10

    def test_steady_walkers_classified_ordinary(self):
        for seed in range(10):
            result, _ = self.run(ScenarioSpec(noise_sigma=0.005, seed=seed))
            assert result.labels["ped"] == "ordinary"
