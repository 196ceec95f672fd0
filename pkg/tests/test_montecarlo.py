import math
from dataclasses import replace

import numpy as np
import pytest

from confrelay import (
    ConfigurationError,
    Cscg,
    Neighbors,
    NetworkConfig,
    PointMass,
    Portion,
    PreconditionError,
    SweepSpec,
    af_rate,
    analytic_af_sinr,
    analytic_df_mac_snr,
    capacity_upper_bound,
    derive_seed,
    df_rate,
    moments,
    run_point,
    sample_realization,
    signal_oracle_af,
    signal_oracle_df_mac,
    sweep,
)


class TestSeedDerivation:
    def test_deterministic(self):
        assert derive_seed(42, 7) == derive_seed(42, 7)

    def test_spreads_trials(self):
        seeds = {derive_seed(0, t) for t in range(1000)}
        assert len(seeds) == 1000

    def test_spreads_bases(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)

    def test_64_bit_range(self):
        for t in range(50):
            s = derive_seed(123456789, t)
            assert 0 <= s < 2 ** 64


class TestRunPoint:
    def test_point_mass_mean_equals_single_shot(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        res = run_point(cfg, trials=7, base_seed=3, schemes=("af", "df", "upper"))
        assert res.errors == {}
        assert res.stats["af"].mean_rate == af_rate(real, cfg, mom)
        assert res.stats["df"].mean_rate == df_rate(real, cfg, mom)
        assert res.stats["upper"].mean_rate == capacity_upper_bound(real, cfg)
        for st in res.stats.values():
            assert st.std_error == 0.0
            assert st.trials == 7

    def test_serial_and_parallel_agree_bitwise(self):
        cfg = NetworkConfig(n_relays=12, conferencing=Portion(0.5))
        serial = run_point(cfg, 64, 11, ("af", "df", "upper"), workers=1)
        parallel = run_point(cfg, 64, 11, ("af", "df", "upper"), workers=5)
        for s in ("af", "df", "upper"):
            assert serial.stats[s] == parallel.stats[s]

    def test_scheme_errors_do_not_block_others(self):
        cfg = NetworkConfig(n_relays=6, conferencing=Portion(0.5), p_c=0.0)
        res = run_point(cfg, 4, 0, ("af", "df", "upper"))
        assert set(res.errors) == {"af", "df"}
        assert set(res.stats) == {"upper"}

    def test_dominance_over_trials(self):
        cfg = NetworkConfig(n_relays=30, conferencing=Portion(0.1))
        mom = moments(cfg)
        for t in range(100):
            real = sample_realization(cfg, derive_seed(9, t))
            upper = capacity_upper_bound(real, cfg)
            assert af_rate(real, cfg, mom) <= upper * (1 + 1e-9)
            assert df_rate(real, cfg, mom) <= upper * (1 + 1e-9)

    def test_std_error_scales_with_trials(self):
        # Quadrupling the trial count roughly halves the standard error.
        cfg = NetworkConfig(n_relays=10, conferencing=Portion(0.4))
        small = run_point(cfg, 400, 21, ("upper",)).stats["upper"].std_error
        large = run_point(cfg, 1600, 21, ("upper",)).stats["upper"].std_error
        assert 0.5 * 0.7 < large / small < 0.5 * 1.3

    def test_rejects_bad_trials(self):
        cfg = NetworkConfig(n_relays=2, conferencing=Neighbors(0))
        with pytest.raises(ConfigurationError):
            run_point(cfg, 0, 0, ("upper",))


class TestSweep:
    def test_single_value_axis_equals_run_point(self):
        base = NetworkConfig(n_relays=6, conferencing=Portion(0.5))
        spec = SweepSpec(base=base, axis="n_relays", values=(6,), trials=10,
                         base_seed=2, schemes=("upper", "df"))
        res = sweep(spec)
        assert len(res.points) == 1
        direct = run_point(base, 10, 2, ("upper", "df"))
        assert res.points[0].result.stats == direct.stats

    def test_upper_and_af_grow_with_network_size(self):
        base = NetworkConfig(n_relays=10, conferencing=Portion(0.2))
        spec = SweepSpec(base=base, axis="n_relays", values=(10, 50, 100),
                         trials=200, base_seed=14)
        res = sweep(spec)
        for scheme in ("upper", "af"):
            means = [p.result.stats[scheme].mean_rate for p in res.points]
            assert means[0] < means[1] < means[2]

    def test_df_mean_nondecreasing_in_portion(self):
        base = NetworkConfig(n_relays=40, conferencing=Portion(0.1))
        spec = SweepSpec(base=base, axis="portion", values=(0.1, 0.3, 0.6, 1.0),
                         trials=100, base_seed=14, schemes=("df",))
        res = sweep(spec)
        means = [p.result.stats["df"].mean_rate for p in res.points]
        assert all(b >= a for a, b in zip(means, means[1:]))

    def test_snr_axis_sets_conferencing_power(self):
        base = NetworkConfig(n_relays=8, conferencing=Portion(0.5), n_0=2.0)
        spec = SweepSpec(base=base, axis="conf_snr_db", values=(-10.0, 0.0, 10.0),
                         trials=5, base_seed=0, schemes=("df",))
        res = sweep(spec)
        assert [p.pc_over_n0_db for p in res.points] == [-10.0, 0.0, 10.0]

    def test_portion_axis_recomputes_neighbors(self):
        base = NetworkConfig(n_relays=100, conferencing=Portion(0.5))
        spec = SweepSpec(base=base, axis="portion", values=(0.05, 0.2, 1.0),
                         trials=2, base_seed=0, schemes=("upper",))
        res = sweep(spec)
        assert [p.m_conf for p in res.points] == [4, 19, 99]
        assert [p.p_effective for p in res.points] == [0.05, 0.2, 1.0]

    def test_rejects_unsorted_axis(self):
        base = NetworkConfig(n_relays=4, conferencing=Portion(0.5))
        with pytest.raises(ConfigurationError):
            SweepSpec(base=base, axis="n_relays", values=(8, 4), trials=1,
                      base_seed=0)

    def test_rejects_unknown_axis(self):
        base = NetworkConfig(n_relays=4, conferencing=Portion(0.5))
        with pytest.raises(ConfigurationError):
            SweepSpec(base=base, axis="powers", values=(1, 2), trials=1,
                      base_seed=0)


class TestSignalOracles:
    def test_af_fixture_sinr(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        res = signal_oracle_af(real, cfg, mom, 100_000, 7)
        assert math.isclose(res.sinr, 0.8, rel_tol=0.02)
        assert res.draws == 100_000

    def test_af_random_realization_within_tolerance(self):
        cfg = NetworkConfig(n_relays=5, conferencing=Portion(1.0))
        mom = moments(cfg)
        real = sample_realization(cfg, 42)
        ana = analytic_af_sinr(real, cfg, mom)
        res = signal_oracle_af(real, cfg, mom, 100_000, 9)
        assert abs(res.sinr - ana) <= max(0.02 * ana, 3 * res.std_error)

    def test_df_mac_fixture_snr(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        res = signal_oracle_df_mac(real, cfg, mom, 100_000, 7)
        assert math.isclose(res.sinr, 4.0, rel_tol=0.02)
        assert analytic_df_mac_snr(real, cfg, mom) == 4.0

    def test_df_mac_single_relay(self):
        cfg = NetworkConfig(n_relays=1, conferencing=Neighbors(0),
                            h_dist=PointMass(1), g_dist=PointMass(1))
        mom = moments(cfg)
        real = sample_realization(cfg, 0)
        res = signal_oracle_df_mac(real, cfg, mom, 50_000, 3)
        assert math.isclose(res.sinr, 1.0, rel_tol=0.02)

    def test_df_mac_zero_relay_power(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        res = signal_oracle_df_mac(real, replace(cfg, p_r=0.0), mom, 1000, 3)
        assert res.sinr == 0.0

    def test_zero_noise_guard(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        res = signal_oracle_af(real, cfg, mom, 1000, 3, noise_n0=0.0)
        assert res.sinr == math.inf and res.std_error == 0.0

    def test_deterministic_given_seed(self, two_relay_point_mass):
        cfg, mom, real = two_relay_point_mass
        a = signal_oracle_af(real, cfg, mom, 20_000, 5)
        b = signal_oracle_af(real, cfg, mom, 20_000, 5)
        assert a == b

    def test_af_oracle_needs_conferencing_power(self):
        cfg = NetworkConfig(n_relays=4, conferencing=Neighbors(2), p_c=0.0)
        mom_cfg = replace(cfg, p_c=1.0)
        mom = moments(mom_cfg)
        real = sample_realization(cfg, 0)
        with pytest.raises(PreconditionError):
            signal_oracle_af(real, cfg, mom, 100, 0)

    def test_af_oracle_with_pair_gain_matrix(self):
        rng = np.random.default_rng(31)
        cfg = NetworkConfig(n_relays=4, conferencing=Neighbors(2),
                            conf_gain=rng.uniform(0.5, 1.5, (4, 2)),
                            h_dist=Cscg(1.0), g_dist=Cscg(1.0))
        mom = moments(cfg)
        real = sample_realization(cfg, 13)
        ana = analytic_af_sinr(real, cfg, mom)
        res = signal_oracle_af(real, cfg, mom, 100_000, 2)
        assert abs(res.sinr - ana) <= max(0.02 * ana, 3 * res.std_error)
