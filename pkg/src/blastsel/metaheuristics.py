"""Wrapper feature-subset search: GA, binary ACO, the GA-BACO hybrid, exhaustive oracle.

All searchers maximize a penalized surrogate validation accuracy,
fitness(mask) = val_accuracy - lambda * |mask| / d, over nonempty bit masks.
A single seeded RNG stream drives mask construction and GA operators, so the
hybrid with zero GA generations consumes randomness exactly like plain BACO.
Surrogate fits use seeds derived from (spec seed, mask bits), which keeps
fitness values independent of evaluation order.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers.gnb import fit_gnb_xy, gnb_scores
from .classifiers.mlp import MlpParams, fit_mlp, mlp_scores
from .classifiers.tree import (
    ForestParams,
    TreeParams,
    fit_forest,
    fit_tree,
    forest_scores,
    tree_p1,
)
from .core import Dataset, FeatureMask, SplitSpec, apply_mask, stratified_split
from .errors import DimensionTooLargeError, InvalidSplitError

EXHAUSTIVE_MAX_FEATURES = 20


@dataclass(frozen=True)
class AcoParams:
    n_ants: int = 50
    alpha: float = 1.0
    beta: float = 0.0
    n_iterations: int = 10
    rho: float = 0.2
    tau0: float = 0.5
    deposit_scale: float = 1.0  # Q
    q_elites: int = 5
    tau_bounds: tuple[float, float] = (0.01, 10.0)
    heuristic: np.ndarray | None = None  # optional per-feature desirability

    def __post_init__(self):
        if self.n_ants < 1 or self.n_iterations < 1:
            raise ValueError("n_ants and n_iterations must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must be in (0,1)")
        tau_min, tau_max = self.tau_bounds
        if not (tau_min < self.tau0 < tau_max):
            raise ValueError("tau bounds must satisfy tau_min < tau0 < tau_max")
        if not (1 <= self.q_elites <= self.n_ants):
            raise ValueError("q_elites must be in [1, n_ants]")
        if self.heuristic is not None:
            eta = np.asarray(self.heuristic, dtype=np.float64)
            if np.any(eta < 0) or not np.all(np.isfinite(eta)):
                raise ValueError("heuristic values must be finite and >= 0")
            object.__setattr__(self, "heuristic", eta)


@dataclass(frozen=True)
class GaParams:
    n_generations: int = 20
    pop_size: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None = 1/d
    tournament_size: int = 2
    elitism: int = 1

    def __post_init__(self):
        if self.n_generations < 0:
            raise ValueError("n_generations must be >= 0")
        if self.pop_size < 1:
            raise ValueError("pop_size must be >= 1")
        if not (0.0 <= self.crossover_rate <= 1.0):
            raise ValueError("crossover_rate must be in [0,1]")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        if not (0 <= self.elitism < self.pop_size):
            raise ValueError("elitism must be in [0, pop_size)")


@dataclass(frozen=True)
class FitnessSpec:
    surrogate: str = "gnb"
    val_fraction: float = 0.2
    size_penalty_lambda: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.surrogate not in ("gnb", "tree", "forest", "mlp"):
            raise ValueError(f"unknown surrogate kind: {self.surrogate}")
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError("val_fraction must be in (0,1)")
        if self.size_penalty_lambda < 0:
            raise ValueError("size_penalty_lambda must be >= 0")


@dataclass(frozen=True)
class PheromoneTable:
    """Per-feature pheromone for bit values 0 and 1; shape (d, 2)."""

    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.float64).copy()
        if tau.ndim != 2 or tau.shape[1] != 2:
            raise ValueError("pheromone table must have shape (d, 2)")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def initial(cls, n_features: int, tau0: float) -> "PheromoneTable":
        return cls(np.full((n_features, 2), tau0))


@dataclass
class SearchResult:
    best_mask: FeatureMask
    best_fitness: float
    history: list[float] = field(default_factory=list)  # best-so-far per iteration
    evaluations: int = 0


def _surrogate_seed(base_seed: int, mask_key: bytes) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(base_seed).encode())
    h.update(mask_key)
    return int.from_bytes(h.digest(), "big") >> 1


class FitnessEvaluator:
    """Memoized penalized-accuracy fitness over a fixed fit/val split of train."""

    def __init__(self, train: Dataset, spec: FitnessSpec, memoize: bool = True):
        if train.n_features < 1:
            raise ValueError("subset search needs at least one feature")
        self.spec = spec
        self.n_features = train.n_features
        fit_ds, val_ds = stratified_split(train, SplitSpec(spec.val_fraction, spec.seed))
        for part, name in ((fit_ds, "fit"), (val_ds, "validation")):
            if len(np.unique(part.labels)) < 2:
                raise InvalidSplitError(
                    f"val_fraction {spec.val_fraction} leaves the {name} side single-class"
                )
        self.fit_ds = fit_ds
        self.val_ds = val_ds
        self._cache: dict[bytes, float] | None = {} if memoize else None
        self.n_evals = 0

    def _val_accuracy(self, mask: FeatureMask, seed: int) -> float:
        kind = self.spec.surrogate
        if kind == "gnb":
            X_fit = self.fit_ds.features[:, mask.bits]
            state = fit_gnb_xy(X_fit, self.fit_ds.labels)
            pred, _ = gnb_scores(state, self.val_ds.features[:, mask.bits])
        else:
            fit_masked = apply_mask(self.fit_ds, mask)
            X_val = self.val_ds.features[:, mask.bits]
            if kind == "tree":
                state = fit_tree(fit_masked, TreeParams(seed=seed))
                pred = (tree_p1(state, X_val) >= 0.5).astype(np.int64)
            elif kind == "forest":
                state = fit_forest(fit_masked, ForestParams(seed=seed))
                pred, _ = forest_scores(state, X_val)
            else:
                state = fit_mlp(fit_masked, MlpParams(seed=seed))
                pred, _ = mlp_scores(state, X_val)
        return float(np.mean(pred == self.val_ds.labels))

    def __call__(self, mask: FeatureMask) -> float:
        if mask.n_selected == 0:
            return float("-inf")
        key = mask.bits.tobytes()
        if self._cache is not None and key in self._cache:
            return self._cache[key]
        acc = self._val_accuracy(mask, _surrogate_seed(self.spec.seed, key))
        fitness = acc - self.spec.size_penalty_lambda * mask.n_selected / self.n_features
        self.n_evals += 1
        if self._cache is not None:
            self._cache[key] = fitness
        return fitness


def evaluate_fitness(mask: FeatureMask, train: Dataset, spec: FitnessSpec) -> float:
    """Penalized surrogate validation accuracy; -inf for an empty mask."""
    return FitnessEvaluator(train, spec, memoize=False)(mask)


def _bit_probabilities(table: PheromoneTable, params: AcoParams) -> np.ndarray:
    tau0 = table.tau[:, 0]
    tau1 = table.tau[:, 1]
    eta = params.heuristic
    if eta is None:
        eta = np.ones_like(tau1)
    elif len(eta) != len(tau1):
        raise ValueError("heuristic length does not match feature count")
    num = tau1**params.alpha * eta**params.beta
    return num / (num + tau0**params.alpha)


def _sample_bits(p: np.ndarray, rng: np.random.Generator) -> FeatureMask:
    """Independent Bernoulli bits; all-zero draws retried 8 times then repaired."""
    bits = rng.random(len(p)) < p
    for _ in range(8):
        if bits.any():
            break
        bits = rng.random(len(p)) < p
    if not bits.any():
        bits = bits.copy()
        bits[int(np.argmax(p))] = True
    return FeatureMask(bits)


def sample_mask_from_pheromone(
    table: PheromoneTable, params: AcoParams, rng: np.random.Generator
) -> FeatureMask:
    """Draw one mask; bit i is 1 with probability tau1^a*eta^b / (tau1^a*eta^b + tau0^a)."""
    return _sample_bits(_bit_probabilities(table, params), rng)


def pheromone_update(
    table: PheromoneTable,
    elites: list[tuple[FeatureMask, float]],
    params: AcoParams,
) -> PheromoneTable:
    """Evaporate, deposit Q*max(fitness,0) along each elite's bit choices, clamp."""
    tau = (1.0 - params.rho) * table.tau
    d = tau.shape[0]
    for mask, fitness in elites:
        dep = params.deposit_scale * (fitness if fitness > 0 else 0.0)
        tau[np.arange(d), mask.bits.astype(np.int64)] += dep
    tau_min, tau_max = params.tau_bounds
    return PheromoneTable(np.clip(tau, tau_min, tau_max))


def _rank_order(fits: np.ndarray) -> np.ndarray:
    """Indices by descending fitness; ties keep the lower population index."""
    return np.argsort(-np.asarray(fits), kind="stable")


def _tournament(fits: np.ndarray, rng: np.random.Generator, size: int) -> int:
    contenders = rng.integers(0, len(fits), size=size)
    return int(contenders[int(np.argmax(fits[contenders]))])


def _ga_generation(
    pop: list[FeatureMask],
    fits: np.ndarray,
    rng: np.random.Generator,
    ga: GaParams,
    evaluate,
    mutation_rate: float,
) -> tuple[list[FeatureMask], np.ndarray]:
    """One generation: elitism, tournament selection, uniform crossover, mutation."""
    pop_size = len(pop)
    order = _rank_order(fits)
    next_pop: list[FeatureMask] = [pop[i] for i in order[: ga.elitism]]
    d = pop[0].n_features
    uniform_p = np.full(d, 0.5)
    while len(next_pop) < pop_size:
        p1 = pop[_tournament(fits, rng, ga.tournament_size)]
        p2 = pop[_tournament(fits, rng, ga.tournament_size)]
        if rng.random() < ga.crossover_rate:
            take_first = rng.random(d) < 0.5
            bits = np.where(take_first, p1.bits, p2.bits)
        else:
            bits = p1.bits.copy()
        flip = rng.random(d) < mutation_rate
        bits = bits ^ flip
        if not bits.any():
            child = _sample_bits(uniform_p, rng)
        else:
            child = FeatureMask(bits)
        next_pop.append(child)
    next_fits = np.array([evaluate(m) for m in next_pop])
    return next_pop, next_fits


def _mutation_rate(ga: GaParams, d: int) -> float:
    return ga.mutation_rate if ga.mutation_rate is not None else 1.0 / d


def ga_select(
    train: Dataset,
    ga: GaParams,
    spec: FitnessSpec,
    seed: int,
    memoize: bool = True,
) -> SearchResult:
    """Genetic-algorithm subset search from a random Bernoulli(0.5) population."""
    evaluate = FitnessEvaluator(train, spec, memoize)
    d = train.n_features
    rng = np.random.default_rng(seed)
    uniform_p = np.full(d, 0.5)
    pop = [_sample_bits(uniform_p, rng) for _ in range(ga.pop_size)]
    fits = np.array([evaluate(m) for m in pop])
    best_i = int(_rank_order(fits)[0])
    best_mask, best_fit = pop[best_i], float(fits[best_i])
    history: list[float] = []
    rate = _mutation_rate(ga, d)
    for _ in range(ga.n_generations):
        pop, fits = _ga_generation(pop, fits, rng, ga, evaluate, rate)
        gen_best = int(_rank_order(fits)[0])
        if fits[gen_best] > best_fit:
            best_mask, best_fit = pop[gen_best], float(fits[gen_best])
        history.append(best_fit)
    return SearchResult(best_mask, best_fit, history, evaluate.n_evals)


def baco_select(
    train: Dataset,
    aco: AcoParams,
    spec: FitnessSpec,
    seed: int,
    memoize: bool = True,
) -> SearchResult:
    """Binary ant colony search: sample masks from pheromone, reinforce elites."""
    evaluate = FitnessEvaluator(train, spec, memoize)
    d = train.n_features
    rng = np.random.default_rng(seed)
    table = PheromoneTable.initial(d, aco.tau0)
    best_mask: FeatureMask | None = None
    best_fit = float("-inf")
    history: list[float] = []
    for _ in range(aco.n_iterations):
        p = _bit_probabilities(table, aco)
        ants = [_sample_bits(p, rng) for _ in range(aco.n_ants)]
        fits = np.array([evaluate(m) for m in ants])
        order = _rank_order(fits)
        if best_mask is None or fits[order[0]] > best_fit:
            best_mask, best_fit = ants[order[0]], float(fits[order[0]])
        elites = [(ants[i], float(fits[i])) for i in order[: aco.q_elites]]
        table = pheromone_update(table, elites, aco)
        history.append(best_fit)
    return SearchResult(best_mask, best_fit, history, evaluate.n_evals)


def ga_baco_select(
    train: Dataset,
    aco: AcoParams,
    ga: GaParams,
    spec: FitnessSpec,
    seed: int,
    memoize: bool = True,
) -> SearchResult:
    """Hybrid search: each iteration's ant population is refined by a GA whose
    final elites deposit the pheromone.

    The GA runs on the ant population itself (population size = n_ants). With
    n_generations = 0 the hybrid degenerates to plain BACO.
    """
    evaluate = FitnessEvaluator(train, spec, memoize)
    d = train.n_features
    rng = np.random.default_rng(seed)
    table = PheromoneTable.initial(d, aco.tau0)
    best_mask: FeatureMask | None = None
    best_fit = float("-inf")
    history: list[float] = []
    rate = _mutation_rate(ga, d)
    ga_inner = replace(ga, pop_size=aco.n_ants, elitism=min(ga.elitism, aco.n_ants - 1))
    for _ in range(aco.n_iterations):
        p = _bit_probabilities(table, aco)
        pop = [_sample_bits(p, rng) for _ in range(aco.n_ants)]
        fits = np.array([evaluate(m) for m in pop])
        order = _rank_order(fits)
        if best_mask is None or fits[order[0]] > best_fit:
            best_mask, best_fit = pop[order[0]], float(fits[order[0]])
        for _gen in range(ga.n_generations):
            pop, fits = _ga_generation(pop, fits, rng, ga_inner, evaluate, rate)
            gen_best = int(_rank_order(fits)[0])
            if fits[gen_best] > best_fit:
                best_mask, best_fit = pop[gen_best], float(fits[gen_best])
        order = _rank_order(fits)
        elites = [(pop[i], float(fits[i])) for i in order[: aco.q_elites]]
        table = pheromone_update(table, elites, aco)
        history.append(best_fit)
    return SearchResult(best_mask, best_fit, history, evaluate.n_evals)


def exhaustive_select(
    train: Dataset, spec: FitnessSpec
) -> tuple[FeatureMask, float]:
    """Evaluate every nonempty mask (d <= 20).

    Fitness ties are broken toward smaller cardinality, then the
    lexicographically smallest bit vector.
    """
    d = train.n_features
    if d > EXHAUSTIVE_MAX_FEATURES:
        raise DimensionTooLargeError(
            f"exhaustive search supports at most {EXHAUSTIVE_MAX_FEATURES} features, got {d}"
        )
    evaluate = FitnessEvaluator(train, spec, memoize=False)
    best_key = None
    best_mask = None
    best_fit = float("-inf")
    for combo_size in range(1, d + 1):
        for combo in itertools.combinations(range(d), combo_size):
            mask = FeatureMask.from_indices(combo, d)
            fitness = evaluate(mask)
            key = (-fitness, combo_size, tuple(int(b) for b in mask.bits))
            if best_key is None or key < best_key:
                best_key, best_mask, best_fit = key, mask, fitness
    return best_mask, best_fit
