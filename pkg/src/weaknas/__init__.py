"""Progressive weak-predictor search over discrete architecture spaces."""

from . import benchmark, metrics, predictors, search, space
from .benchmark import (TabularBenchmark, generate_synthetic_benchmark,
                        load_benchmark, save_benchmark)
from .predictors import (ForestParams, GbrtParams, MlpParams, PredictorConfig,
                         TrainingPair, fit_predictor)
from .search import (RunResult, SearchConfig, run_random_search,
                     run_regularized_evolution, run_weak_nas)
from .space import Architecture, SpaceSpec, enumerate_space, neighbors

__version__ = "0.1.0"

__all__ = [
    "benchmark", "metrics", "predictors", "search", "space",
    "TabularBenchmark", "generate_synthetic_benchmark", "load_benchmark",
    "save_benchmark", "ForestParams", "GbrtParams", "MlpParams",
    "PredictorConfig", "TrainingPair", "fit_predictor", "RunResult",
    "SearchConfig", "run_random_search", "run_regularized_evolution",
    "run_weak_nas", "Architecture", "SpaceSpec", "enumerate_space",
    "neighbors", "__version__",
]
