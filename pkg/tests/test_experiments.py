import logging
from pathlib import Path

import pandas as pd
import pytest

from channel_degrading.bounds import corollary_rhs
from channel_degrading.channel import to_posterior_form
from channel_degrading.errors import BoundViolationError, InvalidChannelError
from channel_degrading.experiment_configuration import ExperimentConfig
from channel_degrading.experiments import (
    SWEEP_COLUMNS,
    CheckStatus,
    run_sweep,
    sweep_trial,
    verify_channel,
    write_sweep,
)
from channel_degrading.generator import random_channel
from channel_degrading.merge import greedy_merge


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.name == "sweep"
        assert config.file_path is None
        assert config.num_inputs == 2
        assert config.num_outputs == 64
        assert config.L_values == [4, 8, 16, 32]
        assert config.num_trials == 10
        assert config.seed == 42
        assert config.output_path == Path("sweep.csv")
        assert config.workers == 1
        assert config.log_level == "info"

    def test_file(self, write_json):
        path = write_json("small.json", {"num_inputs": 3, "L_values": [6, 12], "log_level": "debug"})
        config = ExperimentConfig(file_path=path)
        assert config.num_inputs == 3
        assert config.L_values == [6, 12]
        assert config.log_level == "debug"
        assert config.num_outputs == ExperimentConfig.DEFAULT_NUM_OUTPUTS

    def test_unknown_key(self, write_json):
        with pytest.raises(InvalidChannelError):
            ExperimentConfig(file_path=write_json("bad.json", {"num_input": 3}))

    def test_invalid_value_names_field(self, write_json):
        with pytest.raises(InvalidChannelError) as info:
            ExperimentConfig(file_path=write_json("bad.json", {"num_trials": 0}))
        assert info.value.field == "num_trials"

    def test_not_json(self, write_json):
        with pytest.raises(InvalidChannelError):
            ExperimentConfig(file_path=write_json("bad.json", "{num_trials: 3"))

    def test_overwrite(self, caplog):
        config = ExperimentConfig()
        with caplog.at_level(logging.WARNING):
            config.num_inputs = None
            config.L_values = []
            assert not caplog.records
            config.num_inputs = 3
            config.L_values = [6]
            config.output_path = "out.csv"
        assert config.num_inputs == 3
        assert config.L_values == [6]
        assert config.output_path == Path("out.csv")
        assert "Overwriting num_inputs with 3 (was 2)" in caplog.text

    @pytest.mark.parametrize(
        "field, value",
        [
            ("num_inputs", 1),
            ("num_outputs", 1),
            ("L_values", [0, 4]),
            ("num_trials", 0),
            ("seed", 2**64),
            ("workers", 0),
        ],
    )
    def test_sanity_check(self, field, value):
        config = ExperimentConfig()
        setattr(config, field, value)
        with pytest.raises(InvalidChannelError) as info:
            config.sanity_check()
        assert info.value.field == field


class TestVerify:
    def test_random_channels_pass(self):
        names = ["min-pair", "cumulative L=4", "cumulative L=8", "cumulative L=16", "pair-bound", "per-step"]
        names += ["y-prime", "telescoped L=4", "telescoped L=8", "telescoped L=16"]
        for trial in range(10):
            results = verify_channel(*random_channel(2, 64, 42, trial))
            assert [result.name for result in results] == names
            assert all(result.status is CheckStatus.PASS for result in results), results

    @pytest.mark.slow
    @pytest.mark.parametrize("num_inputs", [2, 3, 4])
    def test_many_channels_pass(self, num_inputs):
        bound_checks = ["min-pair", "pair-bound", "per-step"]
        bound_checks += [f"{check} L={L * num_inputs}" for check in ("cumulative", "telescoped") for L in (2, 4, 8)]
        for trial in range(200):
            results = verify_channel(*random_channel(num_inputs, 64, 42, trial))
            assert not [result for result in results if result.status is CheckStatus.FAIL], results
            statuses = {result.name: result.status for result in results}
            assert all(statuses[name] is CheckStatus.PASS for name in bound_checks), results

    def test_three_inputs(self):
        results = verify_channel(*random_channel(3, 100, 7), L_values=[6, 24])
        assert all(result.status is CheckStatus.PASS for result in results), results

    def test_small_alphabet_skips(self):
        results = {result.name: result.status for result in verify_channel(*random_channel(3, 6, 1))}
        assert results["min-pair"] is CheckStatus.SKIP
        assert results["per-step"] is CheckStatus.SKIP
        assert results["y-prime"] is CheckStatus.SKIP
        assert results["pair-bound"] is CheckStatus.PASS
        assert results["cumulative L=6"] is CheckStatus.PASS

    def test_small_target_skips(self):
        results = {result.name: result.status for result in verify_channel(*random_channel(2, 16, 1), [2])}
        assert results["cumulative L=2"] is CheckStatus.SKIP
        assert results["telescoped L=2"] is CheckStatus.SKIP
        assert results["per-step"] is CheckStatus.PASS

    def test_scaled_constants_fail(self):
        results = {result.name: result.status for result in verify_channel(*random_channel(2, 64, 3), mu_scale=1e-6)}
        assert results["cumulative L=4"] is CheckStatus.FAIL
        assert results["pair-bound"] is CheckStatus.PASS

    def test_result_format(self):
        result = verify_channel(*random_channel(2, 64, 3))[0]
        assert str(result).startswith("PASS min-pair: pair (")


class TestSweep:
    @pytest.fixture
    def config(self, tmp_path):
        config = ExperimentConfig()
        config.num_outputs = 64
        config.L_values = [2, 4, 8]
        config.num_trials = 3
        config.output_path = tmp_path / "sweep.csv"
        return config

    def test_rows(self, config):
        table = run_sweep(config)
        assert list(table.columns) == SWEEP_COLUMNS
        assert len(table) == 9
        assert table["trial"].tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]
        assert table["L"].tolist() == [2, 4, 8] * 3
        assert (table["seed"] == 42).all() and (table["X"] == 2).all() and (table["Y"] == 64).all()

    def test_bounds(self, config):
        table = run_sweep(config)
        assert table.loc[table["L"] == 2, "bound"].isna().all()
        assert table.loc[table["L"] == 2, "ratio"].isna().all()
        bounded = table[table["L"] >= 4]
        assert (bounded["ratio"] <= 1.0).all()
        assert (bounded["ratio"] == bounded["delta_greedy"] / bounded["bound"]).all()
        bounds = table.loc[table["trial"] == 0].set_index("L")["bound"]
        assert bounds[8] / bounds[4] == pytest.approx(0.25, rel=1e-12)

    def test_loss_decreases_with_L(self, config):
        table = run_sweep(config)
        for _, rows in table.groupby("trial"):
            losses = rows.sort_values("L")["delta_greedy"].tolist()
            assert all(later <= earlier + 1e-12 for earlier, later in zip(losses, losses[1:]))

    def test_matches_direct_degrade(self, config):
        table = run_sweep(config)
        for row in table.itertuples():
            pc = to_posterior_form(*random_channel(2, 64, 42, row.trial))
            assert row.delta_greedy == greedy_merge(pc, row.L).total_delta

    def test_workers_do_not_change_the_result(self, config):
        serial = run_sweep(config)
        config.workers = 2
        pd.testing.assert_frame_equal(run_sweep(config), serial)

    def test_csv_is_reproducible(self, config, tmp_path):
        write_sweep(tmp_path / "first.csv", run_sweep(config))
        write_sweep(tmp_path / "second.csv", run_sweep(config))
        first = (tmp_path / "first.csv").read_bytes()
        assert first == (tmp_path / "second.csv").read_bytes()
        lines = first.decode().splitlines()
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 10
        assert lines[1].startswith("42,0,2,64,2,") and lines[1].endswith(",,")

    def test_invalid_config(self, config):
        config.num_outputs = 1
        with pytest.raises(InvalidChannelError):
            run_sweep(config)

    def test_bound_violation(self, monkeypatch):
        monkeypatch.setattr("channel_degrading.experiments.corollary_rhs", lambda num_inputs, L: 1e-12)
        with pytest.raises(BoundViolationError):
            sweep_trial((2, 64, 42, 0, [4]))

    def test_trial_rows(self):
        rows = sweep_trial((3, 50, 5, 1, [6, 12]))
        assert [row["L"] for row in rows] == [6, 12]
        assert rows[0]["bound"] == corollary_rhs(3, 6)
        assert all(row["trial"] == 1 and row["seed"] == 5 for row in rows)
