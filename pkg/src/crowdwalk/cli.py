"""Command-line driver: evolve controllers, replay traces, upload solutions,
report stats, and serve the gallery.

Configuration layers, lowest to highest precedence: built-in defaults, a
JSON config file (--config), CROWDWALK_* environment variables, explicit
flags. The resolved snapshot is frozen into the run manifest before the run
starts, and a run is reproducible from its manifest alone
(--from-manifest). Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import json
import os
import sys
import time
import uuid
from pathlib import Path

import click
import numpy as np
import requests

from . import __version__
from .controller import genome_from_dict, genome_to_dict
from .errors import ContractError, ValidationError
from .evolve import DEParams, EpisodeConfig, GAParams, run
from .gallery import SolutionRecord, record_to_dict, utc_now
from .report import (
    HISTORY_HEADER,
    history_line,
    load_history,
    render_fitness_figure,
    summarize,
    write_history_csv,
)
from .sim import default_walker, load_skeleton
from .sim.skeleton import skeleton_from_dict, skeleton_to_dict
from .sim.trace import load_trace, save_trace, trace_from_dict

MANIFEST_SCHEMA_VERSION = 1

DEFAULTS = {
    "optimizer": "ga",
    "generations": 100,
    "master_seed": 0,
    "noise": "standard",
    "workers": os.cpu_count() or 1,
    "skeleton": None,  # path; built-in walker when omitted
    "max_steps": 600,
    "dt": 1.0 / 60.0,
    "fitness": "walk_right",
    "pelvis_min_height": None,
    "friction": 0.8,
    "rating_bonus": 0.0,
    "hidden_layers": [30, 30, 30],
    "population_size": 64,
    "tournament_size": 3,
    "crossover_rate": 0.75,
    "mutation_rate": 0.02,
    "mutation_sigma": 0.1,
    "elite_count": 2,
    "init_weight_range": 1.0,
    "differential_weight": 0.5,
    "crossover_probability": 0.9,
    "seed_from_gallery": None,
    "seed_count": 5,
}


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, (list, dict)) or default is None and key in ("pelvis_min_height",):
        return json.loads(raw)
    return raw


def resolve_config(cli_values: dict, config_path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot read config {config_path}: {exc}")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        env = os.environ.get(f"CROWDWALK_{key.upper()}")
        if env is not None:
            try:
                cfg[key] = _coerce(key, env)
            except (ValueError, json.JSONDecodeError) as exc:
                raise click.UsageError(f"bad CROWDWALK_{key.upper()}: {exc}")
    for key, value in cli_values.items():
        if value is not None:
            cfg[key] = value
    return cfg


def _load_skeleton_from(cfg: dict):
    if cfg["skeleton"]:
        try:
            return load_skeleton(cfg["skeleton"]), str(cfg["skeleton"])
        except (ValidationError, OSError) as exc:
            raise click.UsageError(f"bad skeleton file: {exc}")
    return default_walker(), "builtin:walker"


def _build_params(cfg: dict):
    try:
        if cfg["optimizer"] == "ga":
            params = GAParams(
                population_size=cfg["population_size"],
                tournament_size=cfg["tournament_size"],
                crossover_rate=cfg["crossover_rate"],
                mutation_rate=cfg["mutation_rate"],
                mutation_sigma=cfg["mutation_sigma"],
                elite_count=cfg["elite_count"],
                init_weight_range=cfg["init_weight_range"],
            )
        elif cfg["optimizer"] == "de":
            params = DEParams(
                population_size=cfg["population_size"],
                differential_weight=cfg["differential_weight"],
                crossover_probability=cfg["crossover_probability"],
                init_weight_range=cfg["init_weight_range"],
            )
        else:
            raise click.UsageError(f"unknown optimizer {cfg['optimizer']!r}")
        params.validate()
    except (ValidationError, ContractError) as exc:
        raise click.UsageError(str(exc))
    return params


def _build_episode(cfg: dict, skeleton) -> EpisodeConfig:
    episode = EpisodeConfig(
        skeleton=skeleton,
        dt=cfg["dt"],
        max_steps=cfg["max_steps"],
        fitness=cfg["fitness"],
        pelvis_min_height=cfg["pelvis_min_height"],
        friction=cfg["friction"],
        rating_bonus_weight=cfg["rating_bonus"],
    )
    try:
        episode.validate()
    except ValidationError as exc:
        raise click.UsageError(str(exc))
    return episode


def _fetch_rating_seeds(url: str, skeleton_name: str, k: int):
    endpoint = f"{url.rstrip('/')}/api/solutions/top"
    try:
        response = requests.get(endpoint, params={"skeleton": skeleton_name, "k": k},
                                timeout=30)
        response.raise_for_status()
        items = response.json()["items"]
    except (requests.RequestException, KeyError, ValueError) as exc:
        raise click.ClickException(f"fetching rating seeds from {endpoint} failed: {exc}")
    genomes = [genome_from_dict(item["genome"]) for item in items]
    ratings = {i: float(item["mean"]) for i, item in enumerate(items)}
    return genomes, ratings


def _write_manifest(path: Path, cfg: dict, skeleton, skeleton_source: str,
                    rating_seeds, seed_ratings) -> dict:
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "package_version": __version__,
        "created_at": utc_now(),
        "skeleton_source": skeleton_source,
        "skeleton": skeleton_to_dict(skeleton),
        "optimizer": cfg["optimizer"],
        "generations": cfg["generations"],
        "master_seed": cfg["master_seed"],
        "noise": cfg["noise"],
        "workers": cfg["workers"],
        "hidden_layers": list(cfg["hidden_layers"]),
        "episode": {
            "dt": cfg["dt"],
            "max_steps": cfg["max_steps"],
            "fitness": cfg["fitness"],
            "pelvis_min_height": cfg["pelvis_min_height"],
            "friction": cfg["friction"],
            "rating_bonus": cfg["rating_bonus"],
        },
        "params": {k: cfg[k] for k in (
            "population_size", "tournament_size", "crossover_rate", "mutation_rate",
            "mutation_sigma", "elite_count", "init_weight_range",
            "differential_weight", "crossover_probability")},
        "rating_seeds": [genome_to_dict(g) for g in rating_seeds],
        "seed_ratings": {str(k): v for k, v in (seed_ratings or {}).items()},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _manifest_to_run_inputs(manifest: dict):
    skeleton = skeleton_from_dict(manifest["skeleton"])
    cfg = dict(DEFAULTS)
    cfg.update({
        "optimizer": manifest["optimizer"],
        "generations": manifest["generations"],
        "master_seed": manifest["master_seed"],
        "noise": manifest["noise"],
        "workers": manifest["workers"],
        "hidden_layers": manifest["hidden_layers"],
        "dt": manifest["episode"]["dt"],
        "max_steps": manifest["episode"]["max_steps"],
        "fitness": manifest["episode"]["fitness"],
        "pelvis_min_height": manifest["episode"]["pelvis_min_height"],
        "friction": manifest["episode"]["friction"],
        "rating_bonus": manifest["episode"]["rating_bonus"],
        **manifest["params"],
    })
    seeds = [genome_from_dict(doc) for doc in manifest.get("rating_seeds", [])]
    ratings = {int(k): float(v) for k, v in manifest.get("seed_ratings", {}).items()}
    return skeleton, cfg, seeds, ratings


@click.group()
@click.version_option(__version__)
def main():
    """Evolve physics-based walkers and gather crowd ratings on the results."""


@main.command(name="evolve")
@click.option("--skeleton", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Skeleton JSON file (built-in walker if omitted).")
@click.option("--optimizer", type=click.Choice(["ga", "de"]), default=None)
@click.option("--generations", type=int, default=None)
@click.option("--pop", "population_size", type=int, default=None)
@click.option("--seed", "master_seed", type=int, default=None)
@click.option("--noise", type=click.Choice(["standard", "chaotic-logistic"]), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--max-steps", type=int, default=None)
@click.option("--tournament", "tournament_size", type=int, default=None)
@click.option("--crossover-rate", type=float, default=None)
@click.option("--mutation-rate", type=float, default=None)
@click.option("--mutation-sigma", type=float, default=None)
@click.option("--elites", "elite_count", type=int, default=None)
@click.option("--de-f", "differential_weight", type=float, default=None)
@click.option("--de-cr", "crossover_probability", type=float, default=None)
@click.option("--rating-bonus", type=float, default=None)
@click.option("--seed-from-gallery", type=str, default=None,
              help="Gallery URL; top-rated genomes seed the initial population.")
@click.option("--seed-count", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file (lower precedence than flags).")
@click.option("--from-manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Reproduce a previous run from its manifest; other flags ignored.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
def cmd_evolve(out, from_manifest, config_path, **cli_values):
    """Run an evolution and write manifest, history, best genome and trace."""
    if from_manifest:
        manifest = json.loads(Path(from_manifest).read_text())
        if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise click.UsageError("unsupported manifest schema version")
        skeleton, cfg, rating_seeds, seed_ratings = _manifest_to_run_inputs(manifest)
        skeleton_source = manifest["skeleton_source"]
    else:
        cfg = resolve_config(cli_values, config_path)
        skeleton, skeleton_source = _load_skeleton_from(cfg)
        rating_seeds, seed_ratings = [], {}
        if cfg["seed_from_gallery"]:
            rating_seeds, seed_ratings = _fetch_rating_seeds(
                cfg["seed_from_gallery"], skeleton.name, cfg["seed_count"])
            click.echo(f"seeded {len(rating_seeds)} genomes from the gallery", err=True)

    params = _build_params(cfg)
    episode = _build_episode(cfg, skeleton)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(out_dir / "manifest.json", cfg, skeleton, skeleton_source,
                    rating_seeds, seed_ratings)

    started = time.monotonic()
    with open(out_dir / "history.log", "w") as history_file:
        history_file.write("\t".join(HISTORY_HEADER) + "\n")

        def on_generation(rec):
            history_file.write(history_line(rec.generation, rec.best, rec.mean, rec.std) + "\n")
            history_file.flush()
            click.echo(
                f"gen {rec.generation:4d}  best {rec.best:10.4f}  mean {rec.mean:10.4f}  "
                f"std {rec.std:9.4f}  wall {time.monotonic() - started:7.2f}s",
                err=True,
            )

        result = run(
            cfg["optimizer"], params, episode, cfg["generations"],
            master_seed=cfg["master_seed"], noise_kind=cfg["noise"],
            rating_seeds=rating_seeds, seed_ratings=seed_ratings,
            workers=cfg["workers"], hidden_layers=tuple(cfg["hidden_layers"]),
            on_generation=on_generation,
        )

    best = result.best_genome
    best.fitness = result.best_fitness
    (out_dir / "best.genome").write_text(
        json.dumps(genome_to_dict(best), sort_keys=True, separators=(",", ":")) + "\n")
    save_trace(result.best_trace, out_dir / "best.trace")
    click.echo(f"best fitness {result.best_fitness:.6g} -> {out_dir}", err=True)


def _first_divergent_frame(stored, fresh):
    if stored.dt != fresh.dt:
        return -1, "dt differs"
    for k in range(min(len(stored.frames), len(fresh.frames))):
        if not np.array_equal(stored.frames[k], fresh.frames[k]):
            return k, "frame values differ"
    if len(stored.frames) != len(fresh.frames):
        return min(len(stored.frames), len(fresh.frames)), "frame counts differ"
    if stored.terminated_early != fresh.terminated_early:
        return len(stored.frames) - 1, "termination flags differ"
    return None, None


@main.command(name="replay")
@click.option("--run-dir", type=click.Path(exists=True, file_okay=False), required=True)
def cmd_replay(run_dir):
    """Re-simulate a run's best genome and verify the stored trace exactly."""
    run_path = Path(run_dir)
    manifest = json.loads((run_path / "manifest.json").read_text())
    skeleton, cfg, _seeds, _ratings = _manifest_to_run_inputs(manifest)
    genome = genome_from_dict(json.loads((run_path / "best.genome").read_text()))
    stored = load_trace(run_path / "best.trace")

    episode = _build_episode(cfg, skeleton)
    from .evolve import evaluate

    _fitness, fresh = evaluate(genome, episode)
    frame, reason = _first_divergent_frame(stored, fresh)
    if frame is None:
        click.echo(f"PASS: {len(stored.frames)} frames replay identically")
    else:
        click.echo(f"FAIL: {reason} at frame {frame}")
        sys.exit(1)


@main.command(name="upload")
@click.option("--run-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--server", required=True, help="Gallery service base URL.")
@click.option("--id", "solution_id", default=None,
              help="Solution id (random when omitted).")
def cmd_upload(run_dir, server, solution_id):
    """Upload a run's best solution to the gallery service."""
    run_path = Path(run_dir)
    manifest = json.loads((run_path / "manifest.json").read_text())
    genome = genome_from_dict(json.loads((run_path / "best.genome").read_text()))
    trace = trace_from_dict(json.loads((run_path / "best.trace").read_text()))
    record = SolutionRecord(
        id=solution_id or uuid.uuid4().hex[:16],
        created_at=utc_now(),
        skeleton_name=manifest["skeleton"]["name"],
        optimizer={"name": manifest["optimizer"], "params": manifest["params"]},
        mechanistic_fitness=genome.fitness if genome.fitness is not None else 0.0,
        genome=genome,
        trace=trace,
    )
    endpoint = f"{server.rstrip('/')}/api/solutions"
    try:
        response = requests.post(endpoint, json=record_to_dict(record), timeout=60)
        response.raise_for_status()
    except requests.RequestException as exc:
        raise click.ClickException(f"upload to {endpoint} failed: {exc}")
    click.echo(response.json()["id"])


@main.command(name="stats")
@click.option("--run-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--server", default=None, help="Gallery service base URL.")
@click.option("--id", "solution_id", default=None)
def cmd_stats(run_dir, server, solution_id):
    """Summarize a run's history (writes fitness.png and history.csv) and/or
    print a solution's crowd score from the service."""
    if not run_dir and not (server and solution_id):
        raise click.UsageError("need --run-dir and/or both --server and --id")
    if run_dir:
        run_path = Path(run_dir)
        history = load_history(run_path / "history.log")
        info = summarize(history)
        write_history_csv(history, run_path / "history.csv")
        render_fitness_figure(history, run_path / "fitness.png")
        click.echo(f"generations:   {info['generations']}")
        click.echo(f"first best:    {info['first_best']:.6g}")
        click.echo(f"final best:    {info['final_best']:.6g}")
        click.echo(f"final mean:    {info['final_mean']:.6g}")
        click.echo(f"final std:     {info['final_std']:.6g}")
        click.echo(f"wrote {run_path / 'history.csv'} and {run_path / 'fitness.png'}")
    if server and solution_id:
        endpoint = f"{server.rstrip('/')}/api/solutions/{solution_id}"
        try:
            response = requests.get(endpoint, timeout=30)
            response.raise_for_status()
            doc = response.json()
        except requests.RequestException as exc:
            raise click.ClickException(f"stats from {endpoint} failed: {exc}")
        ratings = doc.get("ratings", [])
        count = len(ratings)
        mean = sum(r["value"] for r in ratings) / count if count else 0.0
        label = "unrated" if count == 0 else ("good" if mean >= 0.5 else "poor")
        click.echo(f"solution:      {doc['id']}")
        click.echo(f"skeleton:      {doc['skeleton_name']}")
        click.echo(f"mech fitness:  {doc['mechanistic_fitness']:.6g}")
        click.echo(f"crowd mean:    {mean:.4f}")
        click.echo(f"crowd count:   {count}")
        click.echo(f"crowd class:   {label}")


@main.command(name="serve")
@click.option("--store", "store_path", type=click.Path(file_okay=False), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--threshold", type=float, default=0.5)
@click.option("--page-size", type=int, default=50)
def cmd_serve(store_path, host, port, threshold, page_size):
    """Run the gallery HTTP service in-process."""
    from .service import serve

    try:
        serve(store_path, host=host, port=port, threshold=threshold, page_size=page_size)
    except (OSError, ValidationError) as exc:
        raise click.ClickException(f"cannot serve gallery: {exc}")


if __name__ == "__main__":
    main()
