import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from crowdwalk.cli import main
from crowdwalk.gallery import SolutionStore
from crowdwalk.service import create_app
from crowdwalk.sim import default_walker, save_skeleton


@pytest.fixture
def runner():
    return CliRunner()


def run_evolve(runner, out, *extra):
    args = ["evolve", "--out", str(out), "--generations", "2", "--pop", "6",
            "--max-steps", "40", "--seed", "3", "--workers", "1", *extra]
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestEvolve:
    def test_outputs_written(self, runner, tmp_path):
        out = tmp_path / "run"
        run_evolve(runner, out)
        for name in ("manifest.json", "history.log", "best.genome", "best.trace"):
            assert (out / name).exists(), name
        history = (out / "history.log").read_text().splitlines()
        assert history[0] == "generation\tbest\tmean\tstd"
        assert len(history) == 3  # header + 2 generations

    def test_determinism_byte_identical(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_evolve(runner, a)
        run_evolve(runner, b)
        for name in ("history.log", "best.genome", "best.trace"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_serial_matches_parallel(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        runner.invoke(main, ["evolve", "--out", str(a), "--generations", "2", "--pop", "6",
                             "--max-steps", "40", "--seed", "3", "--workers", "1"],
                      catch_exceptions=False)
        runner.invoke(main, ["evolve", "--out", str(b), "--generations", "2", "--pop", "6",
                             "--max-steps", "40", "--seed", "3", "--workers", "2"],
                      catch_exceptions=False)
        for name in ("history.log", "best.genome", "best.trace"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_de_population_too_small_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["evolve", "--out", str(tmp_path / "x"),
                                      "--optimizer", "de", "--pop", "3"])
        assert result.exit_code == 2
        assert ">= 4" in result.output

    def test_config_file_and_flag_precedence(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"generations": 1, "population_size": 6,
                                   "max_steps": 30, "master_seed": 9}))
        out = tmp_path / "run"
        result = runner.invoke(main, ["evolve", "--out", str(out), "--config", str(cfg),
                                      "--generations", "2", "--workers", "1"],
                               catch_exceptions=False)
        assert result.exit_code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["generations"] == 2  # flag wins
        assert manifest["params"]["population_size"] == 6  # file wins over default
        assert manifest["master_seed"] == 9

    def test_env_layer(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("CROWDWALK_POPULATION_SIZE", "6")
        monkeypatch.setenv("CROWDWALK_MAX_STEPS", "30")
        monkeypatch.setenv("CROWDWALK_GENERATIONS", "1")
        out = tmp_path / "run"
        result = runner.invoke(main, ["evolve", "--out", str(out), "--workers", "1"],
                               catch_exceptions=False)
        assert result.exit_code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["params"]["population_size"] == 6

    def test_unknown_config_key(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"popsize": 6}))
        result = runner.invoke(main, ["evolve", "--out", str(tmp_path / "x"),
                                      "--config", str(cfg)])
        assert result.exit_code == 2
        assert "unknown config keys" in result.output

    def test_custom_skeleton_file(self, runner, tmp_path):
        path = tmp_path / "walker.json"
        save_skeleton(default_walker(), path)
        out = tmp_path / "run"
        run_evolve(runner, out, "--skeleton", str(path))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["skeleton_source"] == str(path)

    def test_manifest_reproduces_run(self, runner, tmp_path):
        original = tmp_path / "orig"
        run_evolve(runner, original)
        keep = {name: (original / name).read_bytes()
                for name in ("history.log", "best.genome", "best.trace")}
        # delete outputs, rerun from the manifest alone
        for name in keep:
            (original / name).unlink()
        result = runner.invoke(main, ["evolve", "--out", str(original),
                                      "--from-manifest", str(original / "manifest.json")],
                               catch_exceptions=False)
        assert result.exit_code == 0
        for name, blob in keep.items():
            assert (original / name).read_bytes() == blob, name


class TestReplay:
    def test_fresh_trace_passes(self, runner, tmp_path):
        out = tmp_path / "run"
        run_evolve(runner, out)
        result = runner.invoke(main, ["replay", "--run-dir", str(out)])
        assert result.exit_code == 0, result.output
        assert "PASS" in result.output

    def test_corrupted_value_fails(self, runner, tmp_path):
        out = tmp_path / "run"
        run_evolve(runner, out)
        trace_path = out / "best.trace"
        doc = json.loads(trace_path.read_text())
        doc["frames"][5][0][0] += 1e-9  # single perturbed value
        trace_path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["replay", "--run-dir", str(out)])
        assert result.exit_code == 1
        assert "FAIL" in result.output
        assert "frame 5" in result.output


class TestStats:
    def test_run_dir_summary_and_figure(self, runner, tmp_path):
        out = tmp_path / "run"
        run_evolve(runner, out)
        result = runner.invoke(main, ["stats", "--run-dir", str(out)],
                               catch_exceptions=False)
        assert result.exit_code == 0
        assert "final best" in result.output
        assert (out / "fitness.png").exists()
        assert (out / "history.csv").exists()
        csv_lines = (out / "history.csv").read_text().splitlines()
        assert csv_lines[0] == "generation,best,mean,std"
        assert len(csv_lines) == 3

    def test_requires_some_target(self, runner):
        result = runner.invoke(main, ["stats"])
        assert result.exit_code == 2


@pytest.fixture
def live_service(tmp_path, monkeypatch):
    store = SolutionStore(tmp_path / "store")
    client = TestClient(create_app(store))

    import requests

    def fake_request(method, url, **kwargs):
        assert url.startswith("http://gallery.test")
        path = url[len("http://gallery.test"):]
        return client.request(method, path, params=kwargs.get("params"),
                              json=kwargs.get("json"))

    monkeypatch.setattr(requests, "get",
                        lambda url, **kw: fake_request("GET", url, **kw))
    monkeypatch.setattr(requests, "post",
                        lambda url, **kw: fake_request("POST", url, **kw))
    return store, "http://gallery.test"


class TestUploadAndServiceStats:
    def test_upload_then_stats_roundtrip(self, runner, tmp_path, live_service):
        store, base = live_service
        out = tmp_path / "run"
        run_evolve(runner, out)
        result = runner.invoke(main, ["upload", "--run-dir", str(out),
                                      "--server", base, "--id", "bestrun"],
                               catch_exceptions=False)
        assert result.exit_code == 0, result.output
        assert result.output.strip() == "bestrun"

        genome_fitness = json.loads((out / "best.genome").read_text())["fitness"]
        record = store.get_solution("bestrun")
        assert record.mechanistic_fitness == genome_fitness

        stats = runner.invoke(main, ["stats", "--server", base, "--id", "bestrun"],
                              catch_exceptions=False)
        assert stats.exit_code == 0
        assert "unrated" in stats.output
        assert f"{genome_fitness:.6g}" in stats.output

    def test_stats_after_scripted_votes(self, runner, tmp_path, live_service):
        store, base = live_service
        out = tmp_path / "run"
        run_evolve(runner, out)
        runner.invoke(main, ["upload", "--run-dir", str(out), "--server", base,
                             "--id", "voted"], catch_exceptions=False)
        values = [1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]
        from crowdwalk.gallery import Rating
        for i, v in enumerate(values):
            store.submit_rating("voted", Rating(v, f"tok{i}"))
        stats = runner.invoke(main, ["stats", "--server", base, "--id", "voted"],
                              catch_exceptions=False)
        assert stats.exit_code == 0
        assert f"{sum(values) / len(values):.4f}" in stats.output
        assert "good" in stats.output
