"""Adaptive differential evolution with self-adapting F and CR.

Each generation follows a synchronous model: every trial vector is built from
the population as it stood at the start of the generation, all trials are
evaluated (possibly in parallel through ``map_fn``), and only then does the
coordinator run selection and parameter adaptation. Random streams are derived
per ``(generation, individual)`` so serial and parallel runs agree exactly.

Stream layout under the caller's ``rng``:

* ``(0, 0)``  initial population
* ``(g, 0)``  archive eviction in generation ``g >= 1``
* ``(g, i + 1)``  control parameters, mutation and crossover of individual ``i``
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError, ShapeError, StateError
from .numerics import sample_normal


@dataclass
class DeParams:
    population_size: int = 30
    max_generations: int = 100
    mu_cr: float = 0.5
    mu_f: float = 0.5
    beta: float = 0.5
    bounds: tuple = (0.0, 1.0)
    stagnation_window: int = 30

    def __post_init__(self):
        if self.population_size < 4:
            raise ParameterError("population_size must be >= 4")
        if self.max_generations < 0 or self.stagnation_window < 1:
            raise ParameterError("bad termination settings")
        if not 0 < self.beta < 1:
            raise ParameterError("beta must lie in (0, 1)")

    def box(self, dim):
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=np.float64), (dim,)).copy()
                  for b in self.bounds)
        if np.any(lo >= hi):
            raise ParameterError("need c_min < c_max for every gene")
        return lo, hi


@dataclass
class Individual:
    genes: np.ndarray
    fitness: float | None = None
    # control parameters that produced this trial vector, if any
    cr: float | None = None
    f: float | None = None


@dataclass
class DeState:
    population: list
    lower: np.ndarray
    upper: np.ndarray
    mu_cr: float = 0.5
    mu_f: float = 0.5
    beta: float = 0.5
    archive: list = field(default_factory=list)
    generation: int = 0
    best_history: deque = field(default_factory=lambda: deque(maxlen=31))
    s_cr: list = field(default_factory=list)
    s_f: list = field(default_factory=list)

    @property
    def dim(self):
        return self.lower.size

    def best(self):
        """First individual of maximal fitness."""
        return max(self.population, key=lambda ind: ind.fitness)


@dataclass
class DeResult:
    best: Individual
    trace: list
    history: list
    generations: int
    state: DeState


def initialize(params, dim, rng, fitness_fn, map_fn=map):
    """Uniform random population in the box, fully evaluated."""
    lo, hi = params.box(dim)
    u = rng.child(0, 0).generator.random((params.population_size, dim))
    genes = lo + u * (hi - lo)
    fits = list(map_fn(fitness_fn, list(genes)))
    pop = [Individual(g.copy(), float(fv)) for g, fv in zip(genes, fits)]
    state = DeState(pop, lo, hi, params.mu_cr, params.mu_f, params.beta,
                    best_history=deque(maxlen=params.stagnation_window + 1))
    state.best_history.append(state.best().fitness)
    return state


def sample_control_params(state, rng):
    """Draw ``(cr, f)`` for one individual.

    CR is normal around ``mu_cr`` (sd 0.1) clipped to [0, 1]; F is Cauchy
    around ``mu_f`` (scale 0.1), redrawn while non-positive and capped at 1.
    """
    cr = min(1.0, max(0.0, sample_normal(rng, state.mu_cr, 0.1)))
    while True:
        f = rng.cauchy(state.mu_f, 0.1)
        if f > 0:
            return cr, min(f, 1.0)


def mutate(state, i, f, rng):
    """Donor ``c_i + f * (c_j - c_k)`` with distinct ``j, k != i``, clipped."""
    n = len(state.population)
    if n < 3:
        raise StateError("mutation needs at least three individuals")
    others = [idx for idx in range(n) if idx != i]
    j, k = rng.generator.choice(others, size=2, replace=False)
    pop = state.population
    donor = pop[i].genes + f * (pop[j].genes - pop[k].genes)
    return np.clip(donor, state.lower, state.upper)


def crossover(target, donor, cr, rng):
    """Binomial crossover; the gene at a random index always comes from the donor."""
    target = np.asarray(target, dtype=np.float64)
    donor = np.asarray(donor, dtype=np.float64)
    if target.shape != donor.shape:
        raise ShapeError("target and donor lengths differ")
    dim = target.size
    forced = rng.integers(0, dim)
    take = rng.generator.random(dim) < cr
    take[forced] = True
    return np.where(take, donor, target)


def select(state, i, trial, rng):
    """Keep the parent unless the trial is strictly fitter.

    A replaced parent goes to the archive, which is then trimmed at random to
    the population size; the trial's ``(cr, f)`` join the success sets.
    """
    if trial.fitness is None:
        raise StateError("trial must be evaluated before selection")
    parent = state.population[i]
    if trial.fitness > parent.fitness:
        state.population[i] = trial
        state.archive.append(parent)
        state.s_cr.append(trial.cr)
        state.s_f.append(trial.f)
        while len(state.archive) > len(state.population):
            state.archive.pop(int(rng.integers(0, len(state.archive))))
    return state


def adapt_parameters(state, s_cr, s_f):
    """Move ``mu_cr``/``mu_f`` toward the means of this generation's successes."""
    b = state.beta
    if len(s_cr):
        state.mu_cr = (1 - b) * state.mu_cr + b * float(np.mean(s_cr))
    if len(s_f):
        state.mu_f = (1 - b) * state.mu_f + b * float(np.mean(s_f))
    return state


def _make_trial(state, i, rng):
    cr, f = sample_control_params(state, rng)
    donor = mutate(state, i, f, rng)
    genes = crossover(state.population[i].genes, donor, cr, rng)
    return Individual(genes, None, cr, f)


def step(state, rng, fitness_fn, map_fn=map):
    """Run one full generation in place and return the state."""
    g = state.generation + 1
    trials = [_make_trial(state, i, rng.child(g, i + 1)) for i in range(len(state.population))]
    for trial, fv in zip(trials, map_fn(fitness_fn, [t.genes for t in trials])):
        trial.fitness = float(fv)
    state.s_cr, state.s_f = [], []
    evict = rng.child(g, 0)
    for i, trial in enumerate(trials):
        select(state, i, trial, evict)
    adapt_parameters(state, state.s_cr, state.s_f)
    state.generation = g
    state.best_history.append(state.best().fitness)
    return state


def evolve(params, dim, rng, fitness_fn, map_fn=map):
    """Maximize ``fitness_fn`` over the box.

    Stops after ``params.max_generations`` generations, or as soon as the best
    fitness has been exactly equal for ``params.stagnation_window``
    consecutive generations.

    Returns
    -------
    DeResult
        ``trace[g]`` is the best fitness after generation ``g`` (``trace[0]``
        is the initial population); ``history`` rows are
        ``(generation, best_fitness, mu_cr, mu_f)``.
    """
    state = initialize(params, dim, rng, fitness_fn, map_fn)
    trace = [state.best_history[-1]]
    history = [(0, trace[0], state.mu_cr, state.mu_f)]
    window = params.stagnation_window
    while state.generation < params.max_generations:
        step(state, rng, fitness_fn, map_fn)
        trace.append(state.best_history[-1])
        history.append((state.generation, trace[-1], state.mu_cr, state.mu_f))
        if len(state.best_history) == window + 1 and state.best_history[0] == state.best_history[-1]:
            break
    best = state.best()
    return DeResult(Individual(best.genes.copy(), best.fitness, best.cr, best.f),
                    trace, history, state.generation, state)


def write_trace_csv(history, fh):
    """Write ``(generation, best_fitness, mu_cr, mu_f)`` rows to an open file."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["generation", "best_fitness", "mu_cr", "mu_f"])
    for g, best, mu_cr, mu_f in history:
        writer.writerow([g, repr(float(best)), repr(float(mu_cr)), repr(float(mu_f))])
