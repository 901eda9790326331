"""Penalty-based real-coded genetic solver for the max-min beamforming problem.

Chromosomes are flat real vectors holding interleaved (re, im) genes for the
K communication beams, then the J sensing beams, then one gene for the
auxiliary min-gain level eta normalized by P_max * S. Constraint violations
enter the fitness as hinge penalties in normalized units scaled back by
P_max * S, so a feasible chromosome's fitness equals its raw objective.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import target_steering_matrix
from .metrics import (
    SINR_RESIDUAL_CAP_DB,
    BeamformerSet,
    beampattern_gains,
    constraint_residuals,
    feasibility_tolerances,
    rate,
)

DEFAULT_PENALTY_WEIGHTS = (1e3, 1e2, 1e3)  # (power, sinr, eta) per unit normalized residual


@dataclass(frozen=True)
class GaConfig:
    """Solver hyperparameters.

    mutation_std_fraction is a fraction of each gene's bound width; the
    effective fraction decays linearly across the run, reaching zero at
    generation generations/mutation_shrink, matching the common toolbox
    idiom of shrinking Gaussian mutation. Set mutation_shrink=0 for a
    constant mutation scale; values above 1 freeze mutation before the
    generation cap so converged runs stall out.
    eta_mode "gene" carries eta as a chromosome gene; "derived" replaces the
    objective with the min-over-targets gain directly (ablation switch).
    """

    population: int = 200
    generations: int = 300
    crossover_fraction: float = 0.81
    mutation_std_fraction: float = 0.02
    mutation_shrink: float = 1.0
    function_tolerance: float = 1e-6
    stall_generations: int = 50
    tournament_size: int = 2
    elite_count: int = 2
    penalty_weights: tuple = DEFAULT_PENALTY_WEIGHTS
    seed: int = 0
    eta_mode: str = "gene"

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if not 0 <= self.elite_count < self.population:
            raise ValueError("elite_count must be in [0, population)")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must be in [0, 1]")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if self.eta_mode not in ("gene", "derived"):
            raise ValueError("eta_mode must be 'gene' or 'derived'")
        if self.mutation_shrink < 0.0:
            raise ValueError("mutation_shrink must be non-negative")


@dataclass
class FitnessReport:
    """Penalized objective with the residuals behind it."""

    fitness: float
    eta: float
    residuals: object
    feasible: bool


@dataclass
class GenerationLog:
    """Per-generation traces plus the final decoded solution."""

    best_fitness: np.ndarray
    mean_fitness: np.ndarray
    best_eta: np.ndarray
    feasible_count: np.ndarray
    generations: int
    total_evaluations: int
    terminated_by: str
    feasible_ever: bool
    best: BeamformerSet = None
    best_report: FitnessReport = None


def chromosome_length(instance):
    """Gene count: 2*S*(K+J) beamformer genes plus one eta gene."""
    cfg = instance.config
    return 2 * cfg.S * (cfg.K + cfg.J) + 1


def gene_bounds(instance):
    """(lower, upper) arrays; beam genes span +-sqrt(P_max), eta gene spans [0, 1]."""
    n = chromosome_length(instance)
    amp = np.sqrt(instance.p_max_W)
    lower = np.full(n, -amp)
    upper = np.full(n, amp)
    lower[-1] = 0.0
    upper[-1] = 1.0
    return lower, upper


def encode(bf, instance):
    """Flatten a BeamformerSet into a chromosome; exact inverse of decode."""
    cfg = instance.config
    v = np.concatenate([np.asarray(bf.W).reshape(cfg.K, cfg.S), np.asarray(bf.R).reshape(cfg.J, cfg.S)])
    genes = np.empty(chromosome_length(instance))
    genes[0:-1:2] = v.real.ravel()
    genes[1:-1:2] = v.imag.ravel()
    genes[-1] = bf.eta / (instance.p_max_W * cfg.S)
    return genes


def decode(genes, instance):
    """Rebuild the BeamformerSet a chromosome encodes. Rejects length mismatch."""
    genes = np.asarray(genes, dtype=float)
    n = chromosome_length(instance)
    if genes.shape != (n,):
        raise ValueError(f"expected {n} genes, got shape {genes.shape}")
    w, r, eta = _decode_batch(genes[None, :], instance)
    return BeamformerSet(W=w[0].copy(), R=r[0].copy(), eta=float(eta[0]))


def _decode_batch(pop, instance):
    cfg = instance.config
    n = pop.shape[0]
    pop = np.ascontiguousarray(pop)
    # Interleaved (re, im) genes are exactly the memory layout of complex128.
    v = pop[:, :-1].view(np.complex128).reshape(n, cfg.K + cfg.J, cfg.S)
    return v[:, : cfg.K], v[:, cfg.K :], pop[:, -1] * (instance.p_max_W * cfg.S)


@dataclass
class _Evaluation:
    """Batched per-individual quantities for one generation."""

    fitness: np.ndarray
    objective: np.ndarray
    power: np.ndarray
    gamma: np.ndarray  # (N, K) linear SINRs
    zeta: np.ndarray  # (N, J) beampattern gains at the targets
    feasible: np.ndarray
    power_feasible: np.ndarray


def _abs2(x):
    return x.real**2 + x.imag**2


def _evaluate_batch(pop, instance, channels, steering, weights, eta_mode):
    cfg = instance.config
    n = pop.shape[0]
    p_max = instance.p_max_W
    scale = p_max * cfg.S
    mu_power, mu_sinr, mu_eta = weights

    pop = np.ascontiguousarray(pop)
    v = pop[:, :-1].view(np.complex128).reshape(n, cfg.K + cfg.J, cfg.S)
    eta = pop[:, -1] * scale
    power = np.sum(pop[:, :-1] ** 2, axis=1)

    if cfg.K:
        hv2 = _abs2(v @ channels.h.conj().T)  # [n, beam, k] = |h_k^H (w or r)|^2
        idx = np.arange(cfg.K)
        desired = hv2[:, idx, idx]
        gamma = desired / (np.sum(hv2, axis=1) - desired + instance.sigma2_W)
    else:
        gamma = np.zeros((n, 0))

    if cfg.J:
        zeta = np.sum(_abs2(v @ steering.conj().T), axis=1)
    else:
        zeta = np.zeros((n, 0))

    hinge_power = np.maximum(0.0, power - p_max) / p_max
    if cfg.K:
        with np.errstate(divide="ignore"):
            sinr_res = cfg.sinr_th_dB - 10.0 * np.log10(gamma)
        hinge_sinr = np.sum(np.clip(sinr_res, 0.0, SINR_RESIDUAL_CAP_DB), axis=1)
    else:
        sinr_res = np.zeros((n, 0))
        hinge_sinr = np.zeros(n)

    if cfg.J == 0:
        objective = np.min(rate(gamma), axis=1)
        hinge_eta = np.zeros(n)
        eta_res = np.zeros((n, 0))
    elif eta_mode == "derived":
        objective = np.min(zeta, axis=1)
        hinge_eta = np.zeros(n)
        eta_res = np.zeros((n, 0))
    else:
        objective = eta
        eta_res = eta[:, None] - zeta
        hinge_eta = np.sum(np.maximum(0.0, eta_res), axis=1)

    fitness = objective - scale * (mu_power * hinge_power + mu_sinr * hinge_sinr) - mu_eta * hinge_eta

    tol_p, tol_s, tol_e = feasibility_tolerances(instance)
    power_feasible = power - p_max <= tol_p
    feasible = power_feasible & np.all(sinr_res <= tol_s, axis=1) & np.all(eta_res <= tol_e, axis=1)

    return _Evaluation(
        fitness=fitness,
        objective=objective,
        power=power,
        gamma=gamma,
        zeta=zeta,
        feasible=feasible,
        power_feasible=power_feasible,
    )


def fitness(genes, instance, channels, weights=DEFAULT_PENALTY_WEIGHTS, eta_mode="gene"):
    """Penalized fitness of one chromosome, with full residual reporting."""
    genes = np.asarray(genes, dtype=float)
    steering = target_steering_matrix(instance)
    ev = _evaluate_batch(genes[None, :], instance, channels, steering, weights, eta_mode)
    bf = decode(genes, instance)
    res = constraint_residuals(instance, channels, bf)
    report_eta = float(ev.objective[0])
    return FitnessReport(
        fitness=float(ev.fitness[0]),
        eta=report_eta,
        residuals=res,
        feasible=bool(ev.feasible[0]),
    )


def initialize_population(instance, ga, rng=None):
    """Uniform random population inside the gene box, deterministic per seed.

    Beamformer genes are drawn from a box scaled so the expected initial
    total transmit power is P_max / 2; the eta gene is uniform on [0, 1].
    """
    if rng is None:
        rng = np.random.default_rng(ga.seed)
    cfg = instance.config
    n_beam = 2 * cfg.S * (cfg.K + cfg.J)
    # E[sum genes^2] = n_beam * c^2 / 3 = P_max / 2
    c = np.sqrt(3.0 * instance.p_max_W / (2.0 * n_beam))
    pop = np.empty((ga.population, n_beam + 1))
    pop[:, :-1] = rng.uniform(-c, c, size=(ga.population, n_beam))
    pop[:, -1] = rng.uniform(0.0, 1.0, size=ga.population)
    return pop


def tournament_select(population, fitnesses, k, rng):
    """Index of the best among k uniform draws with replacement."""
    if k < 2:
        raise ValueError("tournament size must be at least 2")
    fitnesses = np.asarray(fitnesses)
    idx = rng.integers(0, len(fitnesses), size=k)
    return int(idx[np.argmax(fitnesses[idx])])


def crossover(parent_a, parent_b, rng):
    """Uniform (scattered) crossover: each gene comes from either parent with p=1/2."""
    parent_a = np.asarray(parent_a)
    parent_b = np.asarray(parent_b)
    if parent_a.shape != parent_b.shape:
        raise ValueError("parents must have equal gene counts")
    mask = rng.random(parent_a.shape) < 0.5
    return np.where(mask, parent_a, parent_b)


def gaussian_mutate(genes, std_fraction, rng, lower, upper):
    """Add zero-mean Gaussian noise with std = std_fraction * bound width, then clamp."""
    if std_fraction <= 0:
        raise ValueError("std_fraction must be positive")
    genes = np.asarray(genes, dtype=float)
    noise = rng.standard_normal(genes.shape) * (std_fraction * (upper - lower))
    return np.clip(genes + noise, lower, upper)


def run_ga(instance, channels, ga, progress=None):
    """Evolve beamformers for one scenario snapshot.

    Generational loop with elitism: evaluate, log, select by tournament,
    recombine a crossover_fraction of the non-elite slots by uniform
    crossover and fill the rest with Gaussian mutants. Stops early once the
    best fitness improves by less than function_tolerance over the last
    stall_generations generations.

    Returns (best BeamformerSet, GenerationLog). The returned solution is the
    best-fitness individual among all power-feasible individuals ever
    evaluated (falling back to the overall best if none was), with eta
    clamped to the minimum target gain its beams actually deliver. When no
    fully feasible individual was ever seen, the log carries
    feasible_ever=False and a warning is emitted.

    progress, when given, is called as progress(generation_index, evaluation)
    with the batched _Evaluation of the current population.
    """
    rng = np.random.default_rng(ga.seed)
    cfg = instance.config
    steering = target_steering_matrix(instance)
    lower, upper = gene_bounds(instance)
    widths = upper - lower

    pop = initialize_population(instance, ga, rng=rng)
    n = ga.population

    best_trace, mean_trace, eta_trace, feas_trace = [], [], [], []
    best_ever = -np.inf
    best_ever_genes = None
    best_pf = -np.inf
    best_pf_genes = None
    feasible_ever = False
    evaluations = 0
    terminated_by = "max_generations"

    for gen in range(ga.generations):
        ev = _evaluate_batch(pop, instance, channels, steering, ga.penalty_weights, ga.eta_mode)
        evaluations += n
        if progress is not None:
            progress(gen, ev)

        b = int(np.argmax(ev.fitness))
        best_trace.append(float(ev.fitness[b]))
        mean_trace.append(float(np.mean(ev.fitness)))
        eta_trace.append(float(ev.objective[b]))
        feas_trace.append(int(np.count_nonzero(ev.feasible)))
        feasible_ever = feasible_ever or bool(np.any(ev.feasible))

        if ev.fitness[b] > best_ever:
            best_ever = float(ev.fitness[b])
            best_ever_genes = pop[b].copy()
        if np.any(ev.power_feasible):
            masked = np.where(ev.power_feasible, ev.fitness, -np.inf)
            bp = int(np.argmax(masked))
            if masked[bp] > best_pf:
                best_pf = float(masked[bp])
                best_pf_genes = pop[bp].copy()

        if (
            len(best_trace) > ga.stall_generations
            and best_trace[-1] - best_trace[-1 - ga.stall_generations] < ga.function_tolerance
        ):
            terminated_by = "stall"
            break
        if gen == ga.generations - 1:
            break

        # Breed the next generation: elites first, then crossover kids, then mutants.
        order = np.argsort(-ev.fitness, kind="stable")
        elite = pop[order[: ga.elite_count]]
        n_rest = n - ga.elite_count
        n_cross = int(round(ga.crossover_fraction * n_rest))
        n_mut = n_rest - n_cross

        new_pop = np.empty_like(pop)
        new_pop[: ga.elite_count] = elite
        n_genes = pop.shape[1]
        if n_cross:
            draws = rng.integers(0, n, size=(n_cross, 2, ga.tournament_size))
            winners = np.take_along_axis(
                draws, np.argmax(ev.fitness[draws], axis=2)[..., None], axis=2
            )[..., 0]
            # One random bit per gene, drawn as packed bytes.
            bits = np.frombuffer(rng.bytes(n_cross * ((n_genes + 7) // 8)), dtype=np.uint8)
            mask = np.unpackbits(bits)[: n_cross * 8 * ((n_genes + 7) // 8)]
            mask = mask.reshape(n_cross, -1)[:, :n_genes].view(bool)
            out = new_pop[ga.elite_count : ga.elite_count + n_cross]
            np.take(pop, winners[:, 0], axis=0, out=out)
            np.copyto(out, pop[winners[:, 1]], where=~mask)
        if n_mut:
            draws = rng.integers(0, n, size=(n_mut, ga.tournament_size))
            parents = draws[np.arange(n_mut), np.argmax(ev.fitness[draws], axis=1)]
            std_fraction = ga.mutation_std_fraction * max(
                0.0, 1.0 - ga.mutation_shrink * gen / ga.generations
            )
            out = new_pop[ga.elite_count + n_cross :]
            np.take(pop, parents, axis=0, out=out)
            if std_fraction > 0.0:
                out += rng.standard_normal((n_mut, n_genes)) * (std_fraction * widths)
                np.clip(out, lower, upper, out=out)
        pop = new_pop

    returned_genes = best_pf_genes if best_pf_genes is not None else best_ever_genes
    bf, report = _finalize(returned_genes, instance, channels, steering, ga)
    if not feasible_ever:
        warnings.warn("solver never found a fully feasible individual", RuntimeWarning)

    log = GenerationLog(
        best_fitness=np.asarray(best_trace),
        mean_fitness=np.asarray(mean_trace),
        best_eta=np.asarray(eta_trace),
        feasible_count=np.asarray(feas_trace),
        generations=len(best_trace),
        total_evaluations=evaluations,
        terminated_by=terminated_by,
        feasible_ever=feasible_ever,
        best=bf,
        best_report=report,
    )
    return bf, log


def _finalize(genes, instance, channels, steering, ga):
    """Decode the winner and repair eta down to the gain its beams deliver."""
    bf = decode(genes, instance)
    if instance.config.J == 0:
        bf.eta = 0.0
    else:
        zeta_min = float(np.min(beampattern_gains(steering, bf)))
        bf.eta = zeta_min if ga.eta_mode == "derived" else min(bf.eta, zeta_min)
    repaired = encode(bf, instance)
    ev = _evaluate_batch(repaired[None, :], instance, channels, steering, ga.penalty_weights, ga.eta_mode)
    res = constraint_residuals(instance, channels, bf)
    return bf, FitnessReport(
        fitness=float(ev.fitness[0]),
        eta=float(ev.objective[0]),
        residuals=res,
        feasible=bool(ev.feasible[0]),
    )
