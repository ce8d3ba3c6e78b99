"""Generation-loop orchestration: evaluate, record history, step, repeat.

`run` performs exactly `generations` evaluation passes, each followed by
one optimizer step. Member evaluations are pure, are committed in member
order, and skip genomes that already carry a fitness (elites and surviving
DE members), so serial and pooled execution produce identical results.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..controller import DEFAULT_HIDDEN_LAYERS, Genome, topology_for
from ..errors import ValidationError
from ..sim.trace import AnimationTrace
from .de import de_step
from .ga import Population, ga_step, init_population
from .noise import make_noise
from .rollout import EpisodeConfig, evaluate, evaluate_population

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best: float
    mean: float
    std: float


@dataclass
class RunResult:
    population: Population
    best_genome: Genome
    best_fitness: float
    best_trace: AnimationTrace
    history: list[GenerationRecord]


def inject_seeds(pop: Population, rating_seeds, topology,
                 seed_ratings=None) -> dict[int, float]:
    """Replace the leading population slots with gallery seeds in place.

    Slots keep their ids. Returns genome id -> crowd mean for the fitness
    bonus. Seeds with a mismatched topology are skipped with a warning.
    """
    bonus_by_id: dict[int, float] = {}
    used = 0
    for k, seed_genome in enumerate(rating_seeds):
        if used >= len(pop.members):
            break
        if seed_genome.topology != topology:
            warnings.warn(
                f"skipping rating seed {seed_genome.id}: topology "
                f"{seed_genome.topology} does not match {topology}"
            )
            continue
        slot_id = pop.members[used].id
        pop.members[used] = Genome(seed_genome.weights.copy(), topology, id=slot_id)
        if seed_ratings is not None and k in seed_ratings:
            bonus_by_id[slot_id] = float(seed_ratings[k])
        used += 1
    return bonus_by_id


def _history_record(pop: Population) -> GenerationRecord:
    fits = np.array([g.fitness for g in pop.members], dtype=np.float64)
    return GenerationRecord(
        generation=pop.generation,
        best=float(fits.max()),
        mean=float(fits.mean()),
        std=float(fits.std()),
    )


def run(optimizer: str, params, cfg: EpisodeConfig, generations: int,
        master_seed: int = 0, noise_kind: str = "standard",
        rating_seeds=(), seed_ratings=None, workers: int = 1,
        hidden_layers=DEFAULT_HIDDEN_LAYERS, on_generation=None) -> RunResult:
    """Evolve controllers for `generations` evaluate+step cycles.

    rating_seeds are genomes pulled from the gallery's top-rated solutions;
    they replace the first population slots (keeping those slots' ids). A
    seed whose topology does not fit the skeleton is skipped with a warning.
    seed_ratings maps seed list index -> crowd mean; with a positive
    cfg.rating_bonus_weight the seeded members' fitness gains
    weight * mean_rating on top of the mechanistic value.
    """
    if generations < 1:
        raise ValidationError("generations must be >= 1")
    if optimizer not in ("ga", "de"):
        raise ValidationError(f"unknown optimizer {optimizer!r}")
    cfg.validate()
    params.validate()

    noise = make_noise(noise_kind, master_seed)
    topology = topology_for(cfg.skeleton, hidden_layers)
    pop = init_population(params, topology, noise)
    bonus_by_id = inject_seeds(pop, rating_seeds, topology, seed_ratings)

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        def evaluate_members(genomes):
            fits = evaluate_population(genomes, cfg, executor)
            if cfg.rating_bonus_weight and bonus_by_id:
                fits = [f + cfg.rating_bonus_weight * bonus_by_id.get(g.id, 0.0)
                        for g, f in zip(genomes, fits)]
            return fits

        history: list[GenerationRecord] = []
        for _ in range(generations):
            fresh = [g for g in pop.members if g.fitness is None]
            for genome, fit in zip(fresh, evaluate_members(fresh)):
                genome.fitness = float(fit)
            record = _history_record(pop)
            history.append(record)
            if on_generation is not None:
                on_generation(record)
            if optimizer == "ga":
                pop = ga_step(pop, params, noise)
            else:
                pop = de_step(pop, params, evaluate_members, noise)
    finally:
        if executor is not None:
            executor.shutdown()

    # every step updated best_ever from the generation it consumed
    best_genome, best_fitness = pop.best_ever
    log.info("run finished: best fitness %.6g after %d generations",
             best_fitness, generations)
    _, best_trace = evaluate(best_genome, cfg)
    return RunResult(population=pop, best_genome=best_genome,
                     best_fitness=best_fitness, best_trace=best_trace,
                     history=history)
