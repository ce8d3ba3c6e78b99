"""Differential evolution, rand/1/bin with greedy replacement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..controller import Genome
from ..errors import ContractError, ValidationError
from .ga import Population, _require_evaluated
from .noise import NoiseSource


@dataclass(frozen=True)
class DEParams:
    population_size: int = 64
    differential_weight: float = 0.5    # F
    crossover_probability: float = 0.9  # CR
    strategy: str = "rand/1/bin"
    init_weight_range: float = 1.0

    def validate(self) -> None:
        if self.population_size < 4:
            raise ContractError("population must be >= 4 (rand/1 needs four distinct members)")
        if not 0.0 < self.differential_weight <= 2.0:
            raise ValidationError("differential weight F must be in (0, 2]")
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValidationError("crossover probability CR must be in [0, 1]")
        if self.strategy != "rand/1/bin":
            raise ValidationError(f"unsupported DE strategy {self.strategy!r}")
        if self.init_weight_range < 0:
            raise ValidationError("init range must be non-negative")


def select_indices(noise: NoiseSource, size: int, target: int) -> tuple[int, int, int]:
    """Distinct a, b, c != target by rejection off randint(size)."""
    a = noise.randint(size)
    while a == target:
        a = noise.randint(size)
    b = noise.randint(size)
    while b == target or b == a:
        b = noise.randint(size)
    c = noise.randint(size)
    while c == target or c == a or c == b:
        c = noise.randint(size)
    return a, b, c


def build_trial(x, a, b, c, f, cr, j_rand, crossover_uniforms) -> np.ndarray:
    """rand/1/bin trial: mutant a + F*(b - c), binomial crossover with one
    forced gene at j_rand."""
    mutant = a + f * (b - c)
    mask = crossover_uniforms < cr
    mask[j_rand] = True
    return np.where(mask, mutant, x)


def de_step(pop: Population, params: DEParams, evaluate_fn, noise: NoiseSource) -> Population:
    """One synchronous rand/1/bin generation.

    Noise consumption per member i, in order: the rejection draws of
    select_indices (one randint each attempt), one randint(genome_len) for
    the forced gene, then one uniform per gene for the crossover mask. All
    trials are built first, then evaluated as a batch via evaluate_fn, then
    greedy selection replaces a member iff the trial's fitness is >= (ties
    favor the trial).
    """
    params.validate()
    if len(pop.members) != params.population_size:
        raise ContractError("population size does not match params")
    if len(pop.members) < 4:
        raise ContractError("population must be >= 4 (rand/1 needs four distinct members)")
    _require_evaluated(pop)
    pop.update_best_ever()

    size = pop.size
    n_genes = len(pop.members[0].weights)
    next_id = pop.next_id
    trials: list[Genome] = []
    for i in range(size):
        a, b, c = select_indices(noise, size, i)
        j_rand = noise.randint(n_genes)
        u = build_trial(pop.members[i].weights, pop.members[a].weights,
                        pop.members[b].weights, pop.members[c].weights,
                        params.differential_weight, params.crossover_probability,
                        j_rand, noise.uniforms(n_genes))
        trials.append(Genome(np.ascontiguousarray(u), pop.members[i].topology, id=next_id))
        next_id += 1

    fitnesses = evaluate_fn(trials)
    members = []
    for member, trial, fit in zip(pop.members, trials, fitnesses):
        trial.fitness = float(fit)
        members.append(trial if trial.fitness >= member.fitness else member)

    out = Population(members=members, generation=pop.generation + 1,
                     best_ever=pop.best_ever, rng_master_seed=pop.rng_master_seed,
                     next_id=next_id)
    out.update_best_ever()
    return out
