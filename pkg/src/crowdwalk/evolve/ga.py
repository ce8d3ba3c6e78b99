"""Generational genetic algorithm: elitism, tournaments, uniform crossover,
per-gene Gaussian mutation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..controller import Genome, genome_length
from ..errors import ContractError, ValidationError
from .noise import NoiseSource


@dataclass(frozen=True)
class GAParams:
    population_size: int = 64
    tournament_size: int = 3
    crossover_rate: float = 0.75
    mutation_rate: float = 0.02
    mutation_sigma: float = 0.1
    elite_count: int = 2
    init_weight_range: float = 1.0

    def validate(self) -> None:
        if self.population_size < 1:
            raise ValidationError("population_size must be >= 1")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValidationError("tournament_size must be in [1, population_size]")
        for name in ("crossover_rate", "mutation_rate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must be a probability")
        if not 1 <= self.elite_count < self.population_size:
            raise ValidationError("elite_count must be >= 1 and < population_size")
        if self.mutation_sigma < 0 or self.init_weight_range < 0:
            raise ValidationError("sigma and init range must be non-negative")


@dataclass
class Population:
    members: list[Genome]
    generation: int = 0
    best_ever: tuple[Genome, float] | None = None
    rng_master_seed: int = 0
    next_id: int = 0

    @property
    def size(self) -> int:
        return len(self.members)

    def best_member(self) -> Genome:
        """Highest fitness among current members, ties to the lower id."""
        return max(self.members, key=lambda g: (g.fitness, -g.id))

    def update_best_ever(self) -> None:
        best = self.best_member()
        if self.best_ever is None or best.fitness > self.best_ever[1]:
            self.best_ever = (best.copy(), best.fitness)


def _require_evaluated(pop: Population) -> None:
    for g in pop.members:
        if g.fitness is None:
            raise ContractError(f"genome {g.id} has no fitness; evaluate before stepping")


def init_population(params, topology, noise: NoiseSource) -> Population:
    """Uniform random genomes in [-w0, +w0]; deterministic given the seed."""
    params.validate()
    length = genome_length(topology)
    w0 = params.init_weight_range
    members = []
    for i in range(params.population_size):
        weights = noise.uniforms(length) * (2.0 * w0) - w0
        members.append(Genome(weights, tuple(topology), id=i))
    return Population(members=members, rng_master_seed=noise.seed,
                      next_id=params.population_size)


def _tournament(pop: Population, size: int, noise: NoiseSource) -> Genome:
    best = None
    for _ in range(size):
        contender = pop.members[noise.randint(pop.size)]
        if best is None or (contender.fitness, -contender.id) > (best.fitness, -best.id):
            best = contender
    return best


def ga_step(pop: Population, params: GAParams, noise: NoiseSource) -> Population:
    """Produce the next generation; offspring fitness is left unset.

    Noise consumption per offspring slot, in order:
      1. tournament for parent A: tournament_size randint(population_size) draws
      2. tournament for parent B: likewise
      3. one uniform; crossover happens iff it is < crossover_rate
      4. if crossing over: one uniform per gene, gene from A iff < 0.5 else B
      5. one uniform per gene; a gene mutates iff < mutation_rate
      6. per mutating gene in ascending index order: one gauss(0, sigma),
         consuming exactly two uniforms

    Fitness ties anywhere resolve to the lower genome id.
    """
    params.validate()
    if len(pop.members) != params.population_size:
        raise ContractError("population size does not match params")
    _require_evaluated(pop)
    pop.update_best_ever()

    ranked = sorted(pop.members, key=lambda g: (-g.fitness, g.id))
    next_members: list[Genome] = list(ranked[:params.elite_count])
    next_id = pop.next_id
    n_genes = len(pop.members[0].weights)

    for _ in range(params.population_size - params.elite_count):
        parent_a = _tournament(pop, params.tournament_size, noise)
        parent_b = _tournament(pop, params.tournament_size, noise)
        if noise.uniform() < params.crossover_rate:
            take_a = noise.uniforms(n_genes) < 0.5
            child = np.where(take_a, parent_a.weights, parent_b.weights)
        else:
            child = parent_a.weights.copy()
        mutate = noise.uniforms(n_genes) < params.mutation_rate
        if mutate.any():
            child = child.copy() if child.base is not None else child
            for gene in np.flatnonzero(mutate):
                child[gene] += noise.gauss(0.0, params.mutation_sigma)
        next_members.append(Genome(np.ascontiguousarray(child), parent_a.topology, id=next_id))
        next_id += 1

    return Population(members=next_members, generation=pop.generation + 1,
                      best_ever=pop.best_ever, rng_master_seed=pop.rng_master_seed,
                      next_id=next_id)
