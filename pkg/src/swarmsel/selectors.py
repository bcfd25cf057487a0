"""Dimensionality reduction behind one contract.

Bees and PSO search a shared continuous weight space in [LB, UB]^D; the top-nf
weights decode into a feature mask. Fitness is holdout ridge-regression MSE
plus w * nf. PCA (affine projection) and lasso (coordinate descent) are the
baselines. Everything is driven by explicit seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import stratified_split, validate_labels
from .numutil import eigh_descending, rng_for, zscore_apply, zscore_fit
from .parallel import parallel_map

# spawn-key tags so bees/pso/init/scout streams never collide
_BEES_INIT, _BEES_FORAGER, _BEES_SCOUT = 1, 2, 3
_PSO_INIT, _PSO_MOVE = 11, 12


# ---------------------------------------------------------------------------
# Parameter bundles


@dataclass
class BeesParams:
    iterations: int = 100
    population: int = 10
    lower_bound: float = -10.0
    upper_bound: float = 10.0
    mutation_rate: float = 0.2
    selected_sites: int | None = None    # default round(0.5 * population)
    elite_sites: int | None = None       # default round(0.4 * selected_sites)
    recruits_selected: int | None = None  # default round(0.5 * population)
    recruits_elite: int | None = None    # default 2 * selected_sites
    radius0: float | None = None         # default 0.1 * (UB - LB)
    radius_damp: float = 0.96

    def __post_init__(self) -> None:
        if self.lower_bound >= self.upper_bound:
            raise ValueError("lower_bound must be < upper_bound")
        if self.selected_sites is None:
            self.selected_sites = int(round(0.5 * self.population))
        if self.elite_sites is None:
            self.elite_sites = int(round(0.4 * self.selected_sites))
        if self.recruits_selected is None:
            self.recruits_selected = int(round(0.5 * self.population))
        if self.recruits_elite is None:
            self.recruits_elite = 2 * self.selected_sites
        if self.radius0 is None:
            self.radius0 = 0.1 * (self.upper_bound - self.lower_bound)
        if not 1 <= self.elite_sites <= self.selected_sites <= self.population:
            raise ValueError("need 1 <= elite_sites <= selected_sites <= population")
        if self.radius0 <= 0 or not 0.0 < self.radius_damp <= 1.0:
            raise ValueError("radius0 must be > 0 and radius_damp in (0, 1]")
        if self.iterations < 1 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("iterations must be >= 1 and mutation_rate in [0, 1]")


@dataclass
class PsoParams:
    iterations: int = 100
    population: int = 20
    inertia: float = 1.0
    inertia_damp: float = 0.99
    c_personal: float = 1.5
    c_global: float = 2.0
    mutation_rate: float = 0.2
    lower_bound: float = -10.0
    upper_bound: float = 10.0
    velocity_clamp: float | None = None  # default 0.1 * (UB - LB)

    def __post_init__(self) -> None:
        if self.lower_bound >= self.upper_bound:
            raise ValueError("lower_bound must be < upper_bound")
        if self.velocity_clamp is None:
            self.velocity_clamp = 0.1 * (self.upper_bound - self.lower_bound)
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 0.0 < self.inertia_damp <= 1.0:
            raise ValueError("inertia_damp must lie in (0, 1]")
        if self.iterations < 1 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("iterations must be >= 1 and mutation_rate in [0, 1]")


@dataclass(frozen=True)
class FitnessSpec:
    nf: int
    w: float = 0.01
    holdout_fraction: float = 0.3
    ridge_lambda: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.nf < 2:
            raise ValueError("nf must be >= 2")
        if self.w < 0:
            raise ValueError("w must be >= 0")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must lie in (0, 1)")
        if self.ridge_lambda <= 0:
            raise ValueError("ridge_lambda must be > 0")


# ---------------------------------------------------------------------------
# Reducers


@dataclass
class SelectionMask:
    indices: np.ndarray

    def __post_init__(self) -> None:
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.ndim != 1 or self.indices.size == 0:
            raise ValueError("mask needs at least one index")
        if np.any(np.diff(self.indices) <= 0) or self.indices[0] < 0:
            raise ValueError("mask indices must be strictly increasing and >= 0")

    @property
    def n_features(self) -> int:
        return int(self.indices.size)

    def apply(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[1] <= self.indices[-1]:
            raise ValueError("mask index exceeds feature dimension")
        return features[:, self.indices]


@dataclass
class AffineProjection:
    mean: np.ndarray
    components: np.ndarray  # (k, D), orthonormal rows

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.components = np.asarray(self.components, dtype=np.float64)
        if self.components.ndim != 2 or self.mean.shape != (self.components.shape[1],):
            raise ValueError("components must be (k, D) with a length-D mean")

    @property
    def n_features(self) -> int:
        return int(self.components.shape[0])

    def apply(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[1] != self.mean.size:
            raise ValueError("feature dimension does not match the projection")
        return (features - self.mean) @ self.components.T


def decode_mask(weights: np.ndarray, nf: int) -> np.ndarray:
    """Indices of the nf largest weights, ties toward the lower index, sorted."""
    weights = np.asarray(weights, dtype=np.float64)
    if not 1 <= nf <= weights.size:
        raise ValueError(f"nf must lie in [1, {weights.size}]")
    order = np.argsort(-weights, kind="stable")
    return np.sort(order[:nf])


# ---------------------------------------------------------------------------
# Wrapper fitness


class _FitnessContext:
    """Holdout split and column statistics precomputed once per search."""

    def __init__(self, features: np.ndarray, labels: np.ndarray, spec: FitnessSpec):
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        labels = validate_labels(labels)
        if labels.size != x.shape[0]:
            raise ValueError("labels length must match feature rows")
        if spec.nf > x.shape[1] - 1:
            raise ValueError(f"nf must be <= D-1 = {x.shape[1] - 1}")
        self.spec = spec
        self.n_features = x.shape[1]
        train_idx, hold_idx = stratified_split(labels, spec.holdout_fraction, spec.seed)
        mean, std = zscore_fit(x[train_idx])
        self.z_train = zscore_apply(x[train_idx], mean, std)
        self.z_hold = zscore_apply(x[hold_idx], mean, std)
        t_train = labels[train_idx].astype(np.float64)
        self.t_hold = labels[hold_idx].astype(np.float64)
        self.t_mean = t_train.mean()
        self.t_centered = t_train - self.t_mean

    def cost(self, weights: np.ndarray) -> float:
        mask = decode_mask(weights, self.spec.nf)
        zt = self.z_train[:, mask]
        zh = self.z_hold[:, mask]
        gram = zt.T @ zt + self.spec.ridge_lambda * np.eye(mask.size)
        beta = np.linalg.solve(gram, zt.T @ self.t_centered)
        pred = self.t_mean + zh @ beta
        mse = float(np.mean((self.t_hold - pred) ** 2))
        return mse + self.spec.w * self.spec.nf


def fitness(weights: np.ndarray, features: np.ndarray, labels: np.ndarray,
            spec: FitnessSpec) -> float:
    """Holdout MSE of a ridge fit on the decoded mask, plus w * nf."""
    return _FitnessContext(features, labels, spec).cost(weights)


# ---------------------------------------------------------------------------
# Bees algorithm


def bees_select(features: np.ndarray, labels: np.ndarray, params: BeesParams,
                spec: FitnessSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bees search over the weight space; returns (mask, best-cost history)."""
    ctx = _FitnessContext(features, labels, spec)
    d = ctx.n_features
    lb, ub = params.lower_bound, params.upper_bound

    pop = rng_for(spec.seed, _BEES_INIT).uniform(lb, ub, (params.population, d))
    costs = np.array(parallel_map(ctx.cost, list(pop)))
    order = np.argsort(costs, kind="stable")
    pop, costs = pop[order], costs[order]

    history = np.empty(params.iterations)
    for t in range(params.iterations):
        radius = params.radius0 * params.radius_damp ** t

        site_of: list[int] = []
        candidates: list[np.ndarray] = []
        for s in range(params.selected_sites):
            n_foragers = (params.recruits_elite if s < params.elite_sites
                          else params.recruits_selected)
            for f_i in range(n_foragers):
                rng = rng_for(spec.seed, _BEES_FORAGER, t, s, f_i)
                hit = rng.random(d) < params.mutation_rate
                delta = rng.uniform(-radius, radius, d)
                cand = pop[s].copy()
                cand[hit] += delta[hit]
                np.clip(cand, lb, ub, out=cand)
                # one dimension per forager is resampled across the whole box
                # (same operator as the PSO mutation); without a global component
                # the rank threshold becomes unreachable once the radius shrinks
                cand[int(rng.integers(d))] = rng.uniform(lb, ub)
                site_of.append(s)
                candidates.append(cand)

        n_scouts = params.population - params.selected_sites
        scouts = [rng_for(spec.seed, _BEES_SCOUT, t, k).uniform(lb, ub, d)
                  for k in range(n_scouts)]

        new_costs = np.array(parallel_map(ctx.cost, candidates + scouts))
        cand_costs = new_costs[:len(candidates)]

        # greedy site update: keep the better of the site and its best forager
        for s in range(params.selected_sites):
            mine = [i for i, site in enumerate(site_of) if site == s]
            best = min(mine, key=lambda i: (cand_costs[i], i))
            if cand_costs[best] < costs[s]:
                pop[s] = candidates[best]
                costs[s] = cand_costs[best]

        for k in range(n_scouts):
            pop[params.selected_sites + k] = scouts[k]
            costs[params.selected_sites + k] = new_costs[len(candidates) + k]

        order = np.argsort(costs, kind="stable")
        pop, costs = pop[order], costs[order]
        history[t] = costs[0]

    return decode_mask(pop[0], spec.nf), history


# ---------------------------------------------------------------------------
# PSO


def pso_select(features: np.ndarray, labels: np.ndarray, params: PsoParams,
               spec: FitnessSpec) -> tuple[np.ndarray, np.ndarray]:
    """Global-best PSO with damped inertia and one-dimension resample mutation."""
    ctx = _FitnessContext(features, labels, spec)
    d = ctx.n_features
    lb, ub = params.lower_bound, params.upper_bound
    vmax = params.velocity_clamp

    x = rng_for(spec.seed, _PSO_INIT).uniform(lb, ub, (params.population, d))
    v = np.zeros_like(x)
    costs = np.array(parallel_map(ctx.cost, list(x)))
    pbest = x.copy()
    pbest_cost = costs.copy()
    g = int(np.argmin(pbest_cost))
    gbest = pbest[g].copy()
    gbest_cost = float(pbest_cost[g])

    inertia = params.inertia
    history = np.empty(params.iterations)
    for t in range(params.iterations):
        for i in range(params.population):
            rng = rng_for(spec.seed, _PSO_MOVE, t, i)
            r1 = rng.random(d)
            r2 = rng.random(d)
            v[i] = (inertia * v[i]
                    + params.c_personal * r1 * (pbest[i] - x[i])
                    + params.c_global * r2 * (gbest - x[i]))
            np.clip(v[i], -vmax, vmax, out=v[i])
            x[i] = np.clip(x[i] + v[i], lb, ub)
            if rng.random() < params.mutation_rate:
                j = int(rng.integers(d))
                x[i, j] = rng.uniform(lb, ub)
        costs = np.array(parallel_map(ctx.cost, list(x)))
        improved = costs < pbest_cost
        pbest[improved] = x[improved]
        pbest_cost[improved] = costs[improved]
        g = int(np.argmin(pbest_cost))
        if pbest_cost[g] < gbest_cost:
            gbest = pbest[g].copy()
            gbest_cost = float(pbest_cost[g])
        inertia *= params.inertia_damp
        history[t] = gbest_cost

    return decode_mask(gbest, spec.nf), history


# ---------------------------------------------------------------------------
# PCA baseline


def pca_fit(features: np.ndarray, k: int) -> AffineProjection:
    """Top-k principal axes of the sample covariance (deterministic signs)."""
    x = np.asarray(features, dtype=np.float64)
    n, d = x.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 samples")
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k must lie in [1, {min(n, d)}]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    _, vecs = eigh_descending(cov)
    return AffineProjection(mean, vecs[:, :k].T.copy())


def pca_transform(reducer: AffineProjection, features: np.ndarray) -> np.ndarray:
    return reducer.apply(features)


# ---------------------------------------------------------------------------
# Lasso baseline


def _lasso_cd(z: np.ndarray, targets: np.ndarray, lam: float,
              tol: float = 1e-8, max_sweeps: int = 10_000) -> np.ndarray:
    """Cyclic coordinate descent on 0.5*||y - Z b||^2 + lam*||b||_1.

    Columns of z must be unit L2 norm (or all-zero, which stays at 0).
    `targets` may hold several response columns; each is solved independently.
    """
    n, d = z.shape
    n_tasks = targets.shape[1]
    beta = np.zeros((d, n_tasks))
    resid = targets.copy()
    live = np.flatnonzero((z != 0.0).any(axis=0))
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in live:
            zj = z[:, j]
            b_old = beta[j].copy()
            rho = b_old + resid.T @ zj
            b_new = np.sign(rho) * np.maximum(np.abs(rho) - lam, 0.0)
            diff = b_new - b_old
            if np.any(diff != 0.0):
                resid -= np.outer(zj, diff)
                beta[j] = b_new
                max_delta = max(max_delta, float(np.max(np.abs(diff))))
        if max_delta < tol:
            break
    return beta


def lasso_select(features: np.ndarray, labels: np.ndarray, lam: float,
                 nf: int) -> np.ndarray:
    """One-vs-rest lasso scores; mask = top-nf |coefficient| over classes.

    Columns are centered and scaled to unit L2 norm before the descent. If
    shrinkage leaves fewer than nf nonzero scores, remaining slots fill by
    descending absolute correlation with the numeric label.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = validate_labels(labels)
    n, d = x.shape
    if labels.size != n:
        raise ValueError("labels length must match feature rows")
    if not 1 <= nf <= d:
        raise ValueError(f"nf must lie in [1, {d}]")
    if lam < 0:
        raise ValueError("lambda must be >= 0")

    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    z = np.divide(centered, np.where(norms > 0, norms, 1.0))
    z[:, norms == 0.0] = 0.0

    n_classes = int(labels.max())
    targets = np.where(labels[:, None] == np.arange(1, n_classes + 1)[None, :], 1.0, -1.0)
    beta = _lasso_cd(z, targets, lam)
    scores = np.abs(beta).max(axis=1)

    order = np.argsort(-scores, kind="stable")
    chosen = [int(j) for j in order if scores[j] > 0.0][:nf]
    if len(chosen) < nf:
        t = labels.astype(np.float64)
        tc = t - t.mean()
        t_norm = np.sqrt((tc ** 2).sum())
        with np.errstate(invalid="ignore"):
            corr = np.abs(centered.T @ tc) / np.where(norms > 0, norms * t_norm, 1.0)
        corr[norms == 0.0] = 0.0
        have = set(chosen)
        for j in np.argsort(-corr, kind="stable"):
            if int(j) not in have:
                chosen.append(int(j))
                have.add(int(j))
            if len(chosen) == nf:
                break
    return np.sort(np.array(chosen, dtype=np.int64))


# ---------------------------------------------------------------------------
# Unified reducer contract

METHODS = ("none", "bees", "pso", "pca", "lasso", "fixed")


@dataclass
class ReducerSpec:
    """How to fit a reducer on a training split.

    `fit` is called with the training rows only; evaluation code refits per
    fold so a reducer never observes held-out rows. "fixed" wraps a
    data-independent index mask (used e.g. for random-mask baselines).
    """

    method: str = "none"
    nf: int | None = None
    seed: int = 0
    w: float = 0.01
    holdout_fraction: float = 0.3
    ridge_lambda: float = 1e-6
    lasso_lambda: float = 1.0
    bees: BeesParams = field(default_factory=BeesParams)
    pso: PsoParams = field(default_factory=PsoParams)
    indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.method not in ("none", "fixed") and self.nf is None:
            raise ValueError(f"method {self.method!r} requires nf")
        if self.method == "fixed":
            if self.indices is None:
                raise ValueError("fixed method requires indices")
            self.indices = np.asarray(self.indices, dtype=np.int64)

    def fit(self, features: np.ndarray, labels: np.ndarray,
            run_seed: int | None = None):
        """Fit on a training split; returns (reducer or None, history or None)."""
        seed = self.seed if run_seed is None else run_seed
        if self.method == "none":
            return None, None
        if self.method == "fixed":
            return SelectionMask(self.indices), None
        if self.method == "pca":
            return pca_fit(features, self.nf), None
        if self.method == "lasso":
            return SelectionMask(lasso_select(features, labels, self.lasso_lambda, self.nf)), None
        spec = FitnessSpec(nf=self.nf, w=self.w, holdout_fraction=self.holdout_fraction,
                           ridge_lambda=self.ridge_lambda, seed=seed)
        if self.method == "bees":
            mask, history = bees_select(features, labels, self.bees, spec)
        else:
            mask, history = pso_select(features, labels, self.pso, spec)
        return SelectionMask(mask), history

    def cache_key(self) -> tuple:
        """Hashable identity of the fit this spec performs (for shared caches)."""
        extra: tuple = ()
        if self.method in ("bees", "pso"):
            params = self.bees if self.method == "bees" else self.pso
            extra = tuple(sorted((k, v) for k, v in vars(params).items()))
        elif self.method == "lasso":
            extra = (self.lasso_lambda,)
        elif self.method == "fixed":
            extra = tuple(int(i) for i in self.indices)
        return (self.method, self.nf, self.seed, self.w, self.holdout_fraction,
                self.ridge_lambda) + extra


def reducer_document(spec: ReducerSpec, reducer, history) -> dict:
    """JSON-ready envelope for a fitted reducer."""
    doc: dict = {"method": spec.method, "nf": spec.nf, "seed": spec.seed}
    if isinstance(reducer, SelectionMask):
        doc["indices"] = [int(i) for i in reducer.indices]
    elif isinstance(reducer, AffineProjection):
        doc["mean"] = [float(v) for v in reducer.mean]
        doc["components"] = [[float(v) for v in row] for row in reducer.components]
    if history is not None:
        doc["history"] = [float(v) for v in history]
    params: dict = {}
    if spec.method in ("bees", "pso"):
        params["fitness"] = {"w": spec.w, "holdout_fraction": spec.holdout_fraction,
                             "ridge_lambda": spec.ridge_lambda}
        params[spec.method] = dict(vars(spec.bees if spec.method == "bees" else spec.pso))
    elif spec.method == "lasso":
        params["lasso_lambda"] = spec.lasso_lambda
    doc["params"] = params
    return doc


def reducer_spec_from_document(doc: dict) -> ReducerSpec:
    """Rebuild the fitting spec recorded in a reducer document."""
    method = doc.get("method")
    if method not in METHODS or method == "fixed":
        raise ValueError(f"unsupported reducer method {method!r}")
    params = doc.get("params", {})
    kwargs: dict = {"method": method, "nf": doc.get("nf"), "seed": doc.get("seed", 0)}
    fitness_params = params.get("fitness", {})
    kwargs.update({k: fitness_params[k] for k in ("w", "holdout_fraction", "ridge_lambda")
                   if k in fitness_params})
    if "lasso_lambda" in params:
        kwargs["lasso_lambda"] = params["lasso_lambda"]
    if "bees" in params:
        kwargs["bees"] = BeesParams(**params["bees"])
    if "pso" in params:
        kwargs["pso"] = PsoParams(**params["pso"])
    return ReducerSpec(**kwargs)
