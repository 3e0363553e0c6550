import numpy as np
import pytest

from adaspace.deltaiot import (
    DeltaIoTSystem,
    IoTState,
    Topology,
    TopologyError,
    UncertaintyProfile,
    compute_qualities,
    derive_power,
    initial_state,
    step_uncertainties,
    topology_from_json,
    topology_to_json,
)
from adaspace.verifier import check_coverage, verify

CHAIN = Topology(links=((2, 1), (3, 2)))
FORK = Topology(links=((2, 1), (3, 1), (4, 2), (4, 3)))


class TestPowerDerivation:
    def test_hand_values(self):
        power, clamped = derive_power(np.array([-5.0, 0.0, 7.0, -0.1]))
        assert power.tolist() == [3, 0, 0, 1]
        assert not clamped

    def test_dead_link_clamps_and_flags(self):
        power, clamped = derive_power(np.array([-40.0, 0.0]))
        assert power.tolist() == [15, 0]
        assert clamped

    def test_threshold_is_inclusive(self):
        power, _ = derive_power(np.array([-30.0]))
        assert power.tolist() == [15]
        assert not derive_power(np.array([-30.0]))[1]


class TestHandComputedQualities:
    def test_chain_with_one_weak_link(self):
        config = np.zeros((1, 0))
        q = compute_qualities(
            CHAIN, config,
            snr=np.array([-10.0, 0.0]),
            load=np.array([4.0, 6.0]),
            power=np.array([0, 0]),
        )
        # link (2,1) delivers 50%, so half of all 10 packets are lost
        assert q[0, 0] == pytest.approx(50.0)
        assert q[0, 1] == pytest.approx(0.0)
        assert q[0, 2] == pytest.approx(0.64)

    def test_fork_split_forty_sixty(self):
        config = np.array([[40.0]])
        q = compute_qualities(
            FORK, config,
            snr=np.array([0.0, 0.0, -10.0, 0.0]),
            load=np.array([2.0, 3.0, 5.0]),
            power=np.array([0, 0, 0, 0]),
        )
        # 40% of mote 4's packets cross the half-delivering link to parent 2
        assert q[0, 0] == pytest.approx(10.0)
        assert q[0, 2] == pytest.approx(0.6)

    def test_congested_link_latency(self):
        config = np.zeros((1, 0))
        q = compute_qualities(
            CHAIN, config,
            snr=np.array([0.0, 0.0]),
            load=np.array([9.0, 10.0]),
            power=np.array([0, 0]),
        )
        assert q[0, 0] == pytest.approx(0.0)
        assert q[0, 1] == pytest.approx(100.0 / 19.0)
        assert q[0, 2] == pytest.approx(1.16)

    def test_zero_load_all_zero_traffic(self):
        q = compute_qualities(
            CHAIN, np.zeros((1, 0)),
            snr=np.array([0.0, 0.0]),
            load=np.array([0.0, 0.0]),
            power=np.array([0, 0]),
        )
        assert q[0].tolist() == [0.0, 0.0, 0.0]


class TestDefaultTopology:
    def test_network_shape(self):
        topo = Topology()
        assert len(topo.links) == 17
        assert topo.motes == tuple(range(2, 16))
        assert topo.dual_parent_motes == (7, 10, 12)

    def test_distribution_dimension_targets_lower_parent(self):
        topo = Topology()
        assert topo.links[topo.first_link_index(7)] == (7, 2)
        assert topo.links[topo.first_link_index(10)] == (10, 4)
        assert topo.links[topo.first_link_index(12)] == (12, 6)

    def test_children_processed_before_parents(self):
        topo = Topology()
        order = topo.depth_order()
        position = {m: i for i, m in enumerate(order)}
        for child, parent in topo.links:
            if parent != topo.gateway:
                assert position[child] < position[parent]

    def test_no_loss_when_power_can_compensate(self):
        topo = Topology()
        rng = np.random.default_rng(5)
        snr = rng.uniform(-30.0, 12.0, size=17)
        power, clamped = derive_power(snr)
        assert not clamped
        load = rng.uniform(1.0, 10.0, size=14)
        config = np.array([[40.0, 60.0, 0.0]])
        q = compute_qualities(topo, config, snr, load, power)
        assert q[0, 0] == pytest.approx(0.0)

    def test_power_monotonicity(self):
        topo = Topology()
        rng = np.random.default_rng(9)
        snr = rng.uniform(-25.0, 5.0, size=17)
        load = rng.uniform(1.0, 10.0, size=14)
        config = np.array([[20.0, 80.0, 40.0]])
        losses, energies = [], []
        for level in range(16):
            q = compute_qualities(topo, config, snr, load, np.full(17, level))
            losses.append(q[0, 0])
            energies.append(q[0, 2])
        for a, b in zip(losses, losses[1:]):
            assert b <= a + 1e-12
        for a, b in zip(energies, energies[1:]):
            assert b > a
        assert losses[0] > losses[-1]

    def test_routing_away_from_dead_link_reduces_loss(self):
        topo = Topology()
        snr = np.full(17, 10.0)
        snr[5] = -40.0  # link (7,2) dead even at full power
        power, _ = derive_power(snr)
        load = np.full(14, 5.0)
        all_to_dead = np.array([[100.0, 0.0, 0.0]])
        all_to_live = np.array([[0.0, 0.0, 0.0]])
        q_dead = compute_qualities(topo, all_to_dead, snr, load, power)
        q_live = compute_qualities(topo, all_to_live, snr, load, power)
        assert q_live[0, 0] < q_dead[0, 0]
        assert q_live[0, 0] == pytest.approx(0.0)

    def test_quality_ranges_across_space(self):
        system = DeltaIoTSystem(seed=3)
        space = system.enumerate_space()
        state = system.read_uncertainties()
        values = system.estimate_all(np.arange(space.size), state)
        assert values.shape == (216, 3)
        assert np.all(values[:, 0] >= 0.0) and np.all(values[:, 0] <= 100.0)
        assert np.all(values[:, 1] >= 0.0) and np.all(values[:, 1] <= 100.0)
        assert np.all(values[:, 2] > 0.0) and np.all(values[:, 2] < 25.0)


class TestAdaptationSpace:
    def test_216_options(self):
        system = DeltaIoTSystem(seed=0)
        space = system.enumerate_space()
        assert space.size == 216
        assert [d.name for d in space.dimensions] == ["dist_7", "dist_10", "dist_12"]
        assert all(d.domain == (0, 20, 40, 60, 80, 100) for d in space.dimensions)

    def test_feature_layout(self):
        system = DeltaIoTSystem(seed=0)
        names = system.feature_names
        assert len(names) == 51
        assert names[:3] == ("dist_7", "dist_10", "dist_12")
        assert names[3] == "snr_2_1"
        assert names[20] == "load_2"
        assert names[34] == "power_2_1"
        lo, hi = system.feature_ranges()
        assert len(lo) == len(hi) == 51
        assert lo[3] == -40.0 and hi[3] == 15.0
        tail = system.uncertainty_features(system.read_uncertainties())
        assert tail.shape == (48,)

    def test_apply_option_validates(self):
        system = DeltaIoTSystem(seed=0)
        system.apply_option(0)
        system.apply_option(215)
        with pytest.raises(ValueError):
            system.apply_option(216)


class TestUncertaintyEvolution:
    def test_walk_stays_in_bounds(self):
        system = DeltaIoTSystem(seed=1)
        for _ in range(300):
            system.advance_time()
            state = system.read_uncertainties()
            assert np.all(state.snr >= -40.0) and np.all(state.snr <= 15.0)
            assert np.all(state.load >= 0.0) and np.all(state.load <= 10.0)

    def test_zero_std_keeps_values(self):
        rng = np.random.default_rng(2)
        state = initial_state(Topology(), rng)
        stepped = step_uncertainties(state, rng, snr_std=0.0, load_std=0.0)
        assert np.array_equal(stepped.snr, state.snr)
        assert np.array_equal(stepped.load, state.load)
        assert stepped.version == state.version + 1

    def test_same_seed_same_trajectory(self):
        a = DeltaIoTSystem(seed=7)
        b = DeltaIoTSystem(seed=7)
        for _ in range(20):
            a.advance_time()
            b.advance_time()
        assert np.array_equal(a.read_uncertainties().snr, b.read_uncertainties().snr)
        assert np.array_equal(a.read_uncertainties().load, b.read_uncertainties().load)

    def test_state_bounds_validated(self):
        with pytest.raises(ValueError):
            IoTState(np.full(17, 20.0), np.zeros(14))
        with pytest.raises(ValueError):
            IoTState(np.zeros(17), np.full(14, 11.0))


class TestEstimateCaching:
    def test_same_state_returns_cached_array(self):
        system = DeltaIoTSystem(seed=0)
        ids = np.arange(216)
        state = system.read_uncertainties()
        first = system.estimate_all(ids, state)
        second = system.estimate_all(ids, state)
        assert first is second

    def test_new_state_recomputes(self):
        system = DeltaIoTSystem(seed=0)
        ids = np.arange(216)
        first = system.estimate_all(ids, system.read_uncertainties())
        system.advance_time()
        second = system.estimate_all(ids, system.read_uncertainties())
        assert not np.array_equal(first, second)


class TestVerifierIntegration:
    def test_zero_noise_matches_ground_truth(self):
        system = DeltaIoTSystem(seed=4)
        models = system.quality_models(noise_stds=(0.0, 0.0, 0.0))
        check_coverage(models, [0, 1, 2])
        state = system.read_uncertainties()
        result = verify(np.arange(216), state, models, seed=0)
        assert np.allclose(result.qualities, system.estimate_all(np.arange(216), state))

    def test_whole_space_costs_100ms_per_option(self):
        system = DeltaIoTSystem(seed=4)
        models = system.quality_models()
        result = verify(np.arange(216), system.read_uncertainties(), models, seed=0)
        assert result.simulated_ms == pytest.approx(21_600.0)

    def test_default_noise_perturbs(self):
        system = DeltaIoTSystem(seed=4)
        state = system.read_uncertainties()
        result = verify(np.arange(216), state, system.quality_models(), seed=1)
        truth = system.estimate_all(np.arange(216), state)
        assert not np.allclose(result.qualities, truth)
        assert np.abs(result.qualities - truth).max() < 6.0


class TestProfiles:
    def test_playback_values_persist_until_changed(self):
        profile = UncertaintyProfile(
            [(0, "snr_2_1", 5.0), (0, "load_2", 3.0), (2, "snr_2_1", -7.0)]
        )
        topo = Topology()
        s0 = profile.state_for(0, topo)
        s1 = profile.state_for(1, topo)
        s2 = profile.state_for(2, topo)
        assert s0.snr[0] == 5.0 and s0.load[0] == 3.0
        assert s1.snr[0] == 5.0
        assert s2.snr[0] == -7.0 and s2.load[0] == 3.0

    def test_replay_is_stateless(self):
        profile = UncertaintyProfile([(0, "snr_2_1", 5.0), (2, "snr_2_1", -7.0)])
        topo = Topology()
        assert profile.state_for(3, topo).snr[0] == -7.0
        assert profile.state_for(0, topo).snr[0] == 5.0

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "profile.csv"
        path.write_text("cycle,id,value\n0,snr_2_1,4.5\n1,load_15,2.0\n")
        profile = UncertaintyProfile.from_csv(path)
        topo = Topology()
        assert profile.state_for(1, topo).snr[0] == 4.5
        assert profile.state_for(1, topo).load[-1] == 2.0

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("tick,key,val\n0,snr_2_1,4.5\n")
        with pytest.raises(ValueError):
            UncertaintyProfile.from_csv(path)

    def test_system_follows_profile(self):
        profile = UncertaintyProfile([(0, "snr_2_1", 5.0), (1, "snr_2_1", -3.0)])
        system = DeltaIoTSystem(seed=0, profile=profile)
        assert system.read_uncertainties().snr[0] == 5.0
        system.advance_time()
        assert system.read_uncertainties().snr[0] == -3.0


class TestTopologyValidation:
    def test_duplicate_link_rejected(self):
        with pytest.raises(TopologyError):
            Topology(links=((2, 1), (2, 1)))

    def test_three_parents_rejected(self):
        with pytest.raises(TopologyError):
            Topology(links=((2, 1), (3, 1), (4, 1), (5, 2), (5, 3), (5, 4)))

    def test_gateway_with_parent_rejected(self):
        with pytest.raises(TopologyError):
            Topology(links=((2, 1), (1, 2)))

    def test_unreachable_mote_rejected(self):
        with pytest.raises(TopologyError):
            Topology(links=((2, 1), (4, 3), (3, 4)))

    def test_cycle_rejected(self):
        with pytest.raises(TopologyError):
            Topology(links=((2, 1), (3, 2), (2, 3)))

    def test_json_round_trip(self):
        topo = Topology(slot_capacity=25.0)
        back = topology_from_json(topology_to_json(topo))
        assert back == topo
