import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from adota import channel
from adota.harness import (
    COLUMNS,
    ConfigError,
    MetricsRecord,
    RunConfig,
    build_task,
    emit_plot_script,
    export_metrics,
    read_metrics,
    resolve_axis,
    run_simulation,
    run_sweep,
    stream,
    with_value,
)
from adota.harness import simulation
from adota.tasks import global_gradient, global_loss

from .conftest import load_config, small_config


def zero_quadratic(**kw) -> RunConfig:
    """0.5 ||w||^2 on every client: all-zero data, uniform start."""
    cfg = RunConfig()
    cfg.task.model = "quadratic"
    d = cfg.task.dataset
    d.n_samples, d.n_test, d.n_features, d.n_classes = 40, 0, 3, 2
    d.class_sep, d.noise = 0.0, 0.0
    cfg.task.n_clients = 1
    cfg.task.dirichlet = None
    cfg.channel.fading.kind = "constant"
    cfg.channel.interference.scale = 0.0
    cfg.optimizer.kind = "fedavgm"
    cfg.optimizer.eta = 0.2
    cfg.optimizer.w_init = "uniform"
    cfg.rounds = 20
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg.validate()


class TestConfig:
    def test_defaults_validate(self):
        cfg = RunConfig().validate()
        assert cfg.alpha_exp == 1.5
        assert cfg.eval_cadence == 1

    def test_cadence(self):
        cfg = RunConfig()
        cfg.rounds = 501
        assert cfg.eval_cadence == 5
        cfg.eval_every = 3
        assert cfg.eval_cadence == 3

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            RunConfig.from_dict({"rounds": 3, "round": 4})
        with pytest.raises(ConfigError, match=r"config\.optimizer: unknown keys"):
            RunConfig.from_dict({"optimizer": {"learning_rate": 0.1}})

    def test_round_trip(self, tmp_path):
        cfg = load_config("softmax_adam.json")
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert RunConfig.load(path).to_dict() == cfg.to_dict()

    def test_resolved_fills_implied_values(self):
        r = RunConfig().resolved()
        assert r["optimizer"]["alpha_exp"] == 1.5 and r["eval_every"] == 1

    @pytest.mark.parametrize("path,value", [
        ("rounds", 0), ("task.n_clients", 0), ("task.dirichlet", 0.0), ("optimizer.eta", -1.0),
        ("optimizer.beta2", 1.0), ("optimizer.kind", "sgd"), ("channel.fading.kind", "lognormal"),
        ("channel.interference.tail_index", 2.5), ("task.model", "resnet"),
        ("optimizer.v_init", -1.0), ("task.dataset.kind", "cifar"), ("seed", -1),
        ("channel.fading.std", 0.3),
    ])
    def test_validation(self, path, value):
        with pytest.raises(ConfigError):
            with_value(RunConfig(), path, value)

    def test_alpha_coupling(self):
        cfg = RunConfig()
        cfg.optimizer.alpha_exp = 2.0
        with pytest.raises(ConfigError, match="allow_alpha_mismatch"):
            cfg.validate()
        cfg.allow_alpha_mismatch = True
        assert cfg.validate().alpha_exp == 2.0

    def test_bad_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.load(p)
        with pytest.raises(ConfigError):
            RunConfig.load(tmp_path / "missing.json")

    def test_axes(self):
        assert resolve_axis("alpha") == "channel.interference.tail_index"
        assert resolve_axis("N") == "task.n_clients"
        assert resolve_axis("optimizer.beta2") == "optimizer.beta2"
        for bad in ("gamma", "task", "task.dataset", "optimizer.nope"):
            with pytest.raises(ConfigError):
                resolve_axis(bad)
        cfg = with_value(RunConfig(), "beta2", 0.7)
        assert cfg.optimizer.beta2 == 0.7 and RunConfig().optimizer.beta2 == 0.3


class TestStreams:
    def test_keyed_and_reproducible(self):
        a = stream(3, "fading", 4, 7).random(5)
        np.testing.assert_array_equal(a, stream(3, "fading", 4, 7).random(5))
        assert not np.array_equal(a, stream(3, "fading", 7, 4).random(5))
        assert not np.array_equal(a, stream(4, "fading", 4, 7).random(5))
        assert not np.array_equal(a, stream(3, "interference", 4, 7).random(5))

    def test_unknown_purpose(self):
        with pytest.raises(KeyError):
            stream(0, "weights")

    def test_large_seed(self):
        stream(2**64 - 1, "init").random()


class TestSimulation:
    def test_gradient_descent_closed_form(self):
        cfg = zero_quadratic()
        recs = run_simulation(cfg)
        losses = np.array([r.global_train_loss for r in recs])
        assert len(recs) == cfg.rounds + 1
        np.testing.assert_allclose(losses[1:] / losses[:-1], (1 - 0.2) ** 2, rtol=1e-12)
        w0 = stream(cfg.seed, "init").uniform(-0.1, 0.1, size=3)
        assert losses[0] == pytest.approx(0.5 * w0 @ w0, rel=1e-14)

    def test_identical_clients_collapse(self):
        one = run_simulation(zero_quadratic())
        cfg = zero_quadratic()
        cfg.task.n_clients = 10
        ten = run_simulation(cfg)
        # averaging ten equal floats can move the last bit, nothing more
        np.testing.assert_allclose(
            [r.global_train_loss for r in one], [r.global_train_loss for r in ten], rtol=1e-14
        )
        assert [r.round for r in one] == [r.round for r in ten]

    def test_records_layout(self):
        cfg = small_config(rounds=12, eval_every=5)
        recs = run_simulation(cfg)
        assert [r.round for r in recs] == [0, 5, 10, 12]
        for r in recs:
            assert 0 <= r.test_accuracy <= 1
            assert r.effective_step_min <= r.effective_step_median <= r.effective_step_max
            assert not r.diverged

    def test_grad_norm_is_true_full_gradient(self, monkeypatch):
        cfg = small_config(rounds=4)
        task = build_task(cfg)
        seen = []
        real_step = simulation.server_step

        def spy(state, hp, g):
            seen.append(state.w.copy())
            return real_step(state, hp, g)

        monkeypatch.setattr(simulation, "server_step", spy)
        recs = run_simulation(cfg, task=task)
        for rec, w in zip(recs, seen):
            g = global_gradient(task.model, w, task.train, task.partition)
            assert rec.grad_norm_sq == pytest.approx(float(g @ g), rel=1e-12)
            assert rec.global_train_loss == pytest.approx(
                global_loss(task.model, w, task.train, task.partition), rel=1e-12
            )

    def test_draw_counts(self, monkeypatch):
        cfg = small_config(rounds=7)
        fading_calls, interference_entries = [], []
        real_fading, real_interf = channel.sample_fading, channel.sample_interference

        def count_fading(model, rng, size=None):
            fading_calls.append(1 if size is None else int(np.prod(size)))
            return real_fading(model, rng, size)

        def count_interf(model, rng):
            out = real_interf(model, rng)
            interference_entries.append(out.size)
            return out

        monkeypatch.setattr(channel, "sample_fading", count_fading)
        monkeypatch.setattr(channel, "sample_interference", count_interf)
        task = build_task(cfg)
        run_simulation(cfg, task=task)
        assert sum(fading_calls) == cfg.rounds * cfg.task.n_clients
        assert interference_entries == [task.model.dim] * cfg.rounds

    def test_noiseless_adagrad_matches_centralized_loop(self):
        cfg = small_config(rounds=25)
        cfg.channel.fading.kind = "constant"
        cfg.channel.interference.scale = 0.0
        cfg.optimizer.kind = "adagrad_ota"
        cfg.optimizer.beta1 = 0.0
        task = build_task(cfg.validate())
        recs = run_simulation(cfg, task=task)

        eta, eps, a = cfg.optimizer.eta, cfg.optimizer.epsilon, cfg.alpha_exp
        w = np.zeros(task.model.dim)
        v = np.zeros_like(w)
        losses = []
        for _ in range(cfg.rounds + 1):
            losses.append(global_loss(task.model, w, task.train, task.partition))
            g = global_gradient(task.model, w, task.train, task.partition)
            v = v + np.abs(g) ** a
            w = w - eta * g / (v + eps) ** (1 / a)
        np.testing.assert_allclose([r.global_train_loss for r in recs], losses, rtol=1e-12)

    def test_divergence_is_recorded(self, caplog):
        cfg = zero_quadratic(rounds=200)
        cfg.optimizer.eta = 3.0  # |1 - eta| = 2: geometric blow-up
        recs = run_simulation(cfg)
        last = recs[-1]
        assert last.diverged and math.isinf(last.global_train_loss)
        assert all(not r.diverged for r in recs[:-1])
        assert last.round < 200
        assert "diverged" in caplog.text

    def test_seed_changes_draws(self):
        a = run_simulation(small_config(seed=1))
        b = run_simulation(small_config(seed=2))
        assert a[-1].global_train_loss != b[-1].global_train_loss

    def test_workers_do_not_change_results(self):
        cfg = small_config()
        assert run_simulation(cfg, workers=1) == run_simulation(cfg, workers=4)

    def test_local_steps_hook(self):
        cfg = small_config(rounds=5)
        cfg.task.local_steps = 3
        recs = run_simulation(cfg.validate())
        assert len(recs) == 6 and not recs[-1].diverged

    def test_mlp_uses_seeded_init(self):
        cfg = small_config(rounds=3)
        cfg.task.model = "mlp"
        cfg.task.model_options = {"hidden": 4}
        a, b = run_simulation(cfg.validate()), run_simulation(cfg)
        assert a == b
        assert a[0].global_train_loss != pytest.approx(math.log(3), rel=1e-6)

    def test_bad_model_options(self):
        cfg = small_config()
        cfg.task.model_options = {"depth": 3}
        with pytest.raises(ConfigError):
            run_simulation(cfg)

    def test_csv_dataset(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = ["x1,x2,label"] + [f"{a:.6f},{b:.6f},{int(a > b)}" for a, b in rng.normal(size=(60, 2))]
        path = tmp_path / "d.csv"
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        cfg = small_config(rounds=5)
        cfg.task.model = "logistic"
        cfg.task.dataset.kind = "csv"
        cfg.task.dataset.path = str(path)
        cfg.task.n_clients = 3
        recs = run_simulation(cfg.validate())
        assert not math.isnan(recs[-1].test_accuracy)


class TestExport:
    def test_header_only(self, tmp_path):
        path = export_metrics([], tmp_path / "m.csv")
        assert path.read_text() == ",".join(COLUMNS) + "\n"
        assert read_metrics(path) == []

    def test_round_trip_with_specials(self, tmp_path):
        recs = [
            MetricsRecord(0, 1 / 3, 1e-300, math.nan, 0.1, 0.2, 0.30000000000000004),
            MetricsRecord(5, math.inf, math.nan, math.nan, math.nan, math.nan, math.nan, True),
        ]
        back = read_metrics(export_metrics(recs, tmp_path / "m.csv"))
        for a, b in zip(recs, back):
            for f in COLUMNS:
                x, y = getattr(a, f), getattr(b, f)
                assert x == y or (isinstance(x, float) and math.isnan(x) and math.isnan(y))

    def test_sidecar(self, tmp_path):
        cfg = small_config()
        export_metrics([], tmp_path / "m.csv", cfg.resolved())
        side = json.loads((tmp_path / "m.json").read_text())
        assert side["seed"] == cfg.seed and side["optimizer"]["alpha_exp"] == cfg.alpha_exp

    def test_byte_identical_reruns(self, tmp_path):
        cfg = small_config()
        a = export_metrics(run_simulation(cfg), tmp_path / "a" / "m.csv", cfg.resolved())
        b = export_metrics(run_simulation(cfg), tmp_path / "b" / "m.csv", cfg.resolved())
        assert a.read_bytes() == b.read_bytes()
        assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()

    def test_wrong_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n")
        with pytest.raises(ValueError):
            read_metrics(p)


class TestSweep:
    def test_seed_only_sweep(self):
        cfg = small_config(rounds=5)
        table = run_sweep(cfg, "eta", [0.1], [0, 1, 2])
        finals = []
        for s in (0, 1, 2):
            c = cfg.copy()
            c.seed = s
            finals.append(run_simulation(c)[-1].global_train_loss)
        row = table.summary()[0]
        assert row.n_seeds == 3
        assert row.final_loss_mean == pytest.approx(np.mean(finals), rel=1e-15)
        assert row.final_loss_std == pytest.approx(np.std(finals, ddof=1), rel=1e-12)

    def test_client_axis_redraws_partition(self, tmp_path):
        cfg = small_config(rounds=3)
        table = run_sweep(cfg, "N", [2, 5], [0], out_dir=tmp_path)
        assert len(table.runs) == 2
        for v in (2, 5):
            side = json.loads((tmp_path / f"N={v}" / "seed=0" / "metrics.json").read_text())
            assert side["task"]["n_clients"] == v
        lines = (tmp_path / "summary.csv").read_text().splitlines()
        assert lines[0].startswith("axis_value,n_seeds") and len(lines) == 3

    def test_unknown_axis(self):
        with pytest.raises(ConfigError):
            run_sweep(small_config(), "learning_rate", [0.1], [0])

    def test_empty(self):
        with pytest.raises(ValueError):
            run_sweep(small_config(), "eta", [], [0])

    def test_process_pool_matches_serial(self):
        cfg = small_config(rounds=4)
        serial = run_sweep(cfg, "beta2", [0.3, 0.9], [0, 1])
        pooled = run_sweep(cfg, "beta2", [0.3, 0.9], [0, 1], workers=2)
        assert [r.records for r in serial.runs] == [r.records for r in pooled.runs]


class TestPlotScript:
    def test_one_curve(self, tmp_path):
        table = run_sweep(small_config(rounds=3), "eta", [0.1], [0])
        script = emit_plot_script(table, tmp_path / "p.gp").read_text()
        assert script.count("title 'eta=0.1'") == 2  # loss and accuracy panels
        assert "set terminal svg" in script

    def test_curve_per_value(self, tmp_path):
        table = run_sweep(small_config(rounds=3), "alpha", [1.2, 1.8, 2.0], [0, 1])
        script = emit_plot_script(table, tmp_path / "p.gp").read_text()
        for v in (1.2, 1.8, 2.0):
            assert f"alpha={v}" in script
        assert len(list((tmp_path / "p_curves").glob("*.csv"))) == 3

    def test_empty_table(self, tmp_path):
        from adota.harness.sweep import SweepTable

        with pytest.raises(ValueError):
            emit_plot_script(SweepTable("eta", [0.1], [0]), tmp_path / "p.gp")

    @pytest.mark.skipif(shutil.which("gnuplot") is None, reason="gnuplot not installed")
    def test_renders_under_gnuplot(self, tmp_path):
        table = run_sweep(small_config(rounds=3), "eta", [0.1, 0.2], [0])
        path = emit_plot_script(table, tmp_path / "p.gp")
        subprocess.run(["gnuplot", path.name], cwd=tmp_path, check=True, timeout=60)
        assert (tmp_path / "p_loss.svg").stat().st_size > 0
