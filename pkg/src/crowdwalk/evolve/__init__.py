from .de import DEParams, de_step
from .fitness import FITNESS_FUNCTIONS, fitness_walk_right, get_fitness_function
from .ga import GAParams, Population, ga_step, init_population
from .noise import ChaoticLogisticNoise, NoiseSource, StandardNoise, make_noise
from .rollout import EpisodeConfig, evaluate, evaluate_population
from .runner import GenerationRecord, RunResult, run

__all__ = [
    "ChaoticLogisticNoise",
    "DEParams",
    "EpisodeConfig",
    "FITNESS_FUNCTIONS",
    "GAParams",
    "GenerationRecord",
    "NoiseSource",
    "Population",
    "RunResult",
    "StandardNoise",
    "de_step",
    "evaluate",
    "evaluate_population",
    "fitness_walk_right",
    "ga_step",
    "get_fitness_function",
    "init_population",
    "make_noise",
    "run",
]
