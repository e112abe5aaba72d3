# app/systems.py
"""
Ground-truth generators: coupled Henon maps, coupled Mackey-Glass
delay equations, coupled neural mass populations and a sparse
VAR(3) process, each returned with its coupling network.

Generators return raw (unstandardized) series; standardization happens at
ingestion. Every generator is deterministic given its parameters and seed.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from app.errors import InvalidParameter, KTooSmall, NumericBlowup, PersistentDivergence
from app.timeseries import TimeSeriesSet
from app.utils.run_logger import agent_log
from app.var_engine import VarModel, is_stable, simulate_var

HENON_TRANSIENT = 100
HENON_DIVERGENCE = 10.0
MAX_RETRIES = 20


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    """adjacency[i, j] = 1 iff i drives j."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=int)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidParameter(f"adjacency must be square, got {a.shape}")
        if np.any(np.diag(a) != 0) or not np.isin(a, (0, 1)).all():
            raise InvalidParameter("adjacency must be 0/1 with a zero diagonal")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def K(self) -> int:
        return self.adjacency.shape[0]

    @property
    def density(self) -> int:
        return int(self.adjacency.sum())

    def edges(self):
        """1-based (driver, response) pairs."""
        return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(self.adjacency))]


@dataclass(frozen=True)
class NeuralMassParams:
    A: float = 3.45          # mV, excitation
    B: float = 22.0          # mV
    a: float = 100.0         # 1/s
    b: float = 50.0          # 1/s
    a_d: float = 33.0        # 1/s
    C1: float = 135.0
    C2: float = 0.8 * 135.0
    C3: float = 0.25 * 135.0
    C4: float = 0.25 * 135.0
    e0: float = 2.5          # 1/s
    v0: float = 6.0          # mV
    r: float = 0.56          # 1/mV
    p_mean: float = 220.0    # 1/s
    p_std: float = 22.0
    dt: float = 1e-3         # s, integration step
    fs: float = 256.0        # Hz, output rate
    transient: float = 2.0   # s

    def __post_init__(self):
        for name in ("A", "B", "a", "b", "a_d", "C1", "C2", "C3", "C4", "e0", "v0", "r",
                     "p_mean", "p_std", "dt", "fs"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"neural mass parameter {name} must be positive")

    def sigmoid(self, v):
        """S(v) = 2 e0 / (1 + exp(r (v0 - v)))"""
        return 2.0 * self.e0 * expit(self.r * (v - self.v0))


@dataclass(frozen=True)
class SparseVarSpec:
    K: int = 25
    order: int = 3
    fraction: float = 0.04
    pair_fraction: float = 0.08
    magnitude: float = 0.9
    shrink: float = 0.98
    n: int = 512
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            raise InvalidParameter(f"fraction must be in (0, 1), got {self.fraction}")
        if not 0 < self.pair_fraction < 1:
            raise InvalidParameter(f"pair_fraction must be in (0, 1), got {self.pair_fraction}")
        if not 0 < self.shrink < 1:
            raise InvalidParameter(f"shrink must be in (0, 1), got {self.shrink}")
        if self.K < 2 or self.order < 1:
            raise InvalidParameter("sparse VAR needs K >= 2 and order >= 1")


def chain_coupling(K: int) -> CouplingGraph:
    """Each interior node i is driven by its two neighbours i-1 and i+1."""
    if K < 3:
        raise KTooSmall(f"chain coupling needs K >= 3, got {K}")
    a = np.zeros((K, K), dtype=int)
    for i in range(1, K - 1):
        a[i - 1, i] = 1
        a[i + 1, i] = 1
    return CouplingGraph(a)


def _finish(data: np.ndarray, graph: CouplingGraph, dt: float = 1.0) -> Tuple[TimeSeriesSet, CouplingGraph]:
    return TimeSeriesSet(data, tuple(f"X{k + 1}" for k in range(data.shape[1])), dt), graph


def _usable(data: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(data)) and np.all(np.ptp(data, axis=0) > 0))


# ---------------------------------------
#  COUPLED HENON MAPS
# ---------------------------------------
def _iterate_henon(K: int, C: float, n: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    prev2 = rng.uniform(0.0, 1.0, K)
    prev1 = rng.uniform(0.0, 1.0, K)
    out = np.empty((n, K))
    for t in range(HENON_TRANSIENT + n):
        new = 1.4 - prev1 ** 2 + 0.3 * prev2
        if K > 2:
            drive = 0.5 * C * (prev1[:-2] + prev1[2:]) + (1.0 - C) * prev1[1:-1]
            new[1:-1] = 1.4 - drive ** 2 + 0.3 * prev2[1:-1]
        if not np.all(np.abs(new) <= HENON_DIVERGENCE):
            return None
        prev2, prev1 = prev1, new
        if t >= HENON_TRANSIENT:
            out[t - HENON_TRANSIENT] = new
    return out


def gen_henon(K: int, C: float, n: int, seed: int) -> Tuple[TimeSeriesSet, CouplingGraph]:
    if not 0.0 <= C <= 0.5:
        raise InvalidParameter(f"Henon coupling must be in [0, 0.5], got {C}")
    graph = chain_coupling(K)
    rng = np.random.default_rng(seed)
    for attempt in range(MAX_RETRIES + 1):
        data = _iterate_henon(K, C, n, rng)
        if data is not None and _usable(data):
            return _finish(data, graph)
        agent_log("system", f"Henon K={K} C={C} seed={seed} diverged, retry {attempt + 1}",
                  agent="systems", level="WARNING")
    raise PersistentDivergence(f"Henon system diverged {MAX_RETRIES + 1} times (K={K}, C={C}, seed={seed})")


# ---------------------------------------
#  COUPLED MACKEY-GLASS
# ---------------------------------------
MG_STEP = 0.1
MG_SAMPLING = 4.0
MG_SELF = 0.2


def mackey_glass_coupling(K: int, C: float) -> np.ndarray:
    """W[i, j]: weight of x_i(t - delta) in dx_j/dt; 0.2 self terms plus the chain."""
    W = np.eye(K) * MG_SELF
    if K >= 3:
        W = W + C * chain_coupling(K).adjacency
    return W


def _rk4_forcing(u0: np.ndarray, um: np.ndarray, u1: np.ndarray, lam: float, h: float) -> np.ndarray:
    """Input part of one RK4 step of x' = lam x + u(t), evaluated at x = 0."""
    k1 = h * u0
    k2 = h * (lam * 0.5 * k1 + um)
    k3 = h * (lam * 0.5 * k2 + um)
    k4 = h * (lam * k3 + u1)
    return (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def simulate_mackey_glass(W: np.ndarray, delta: float, n: int, rng: np.random.Generator,
                          h: float = MG_STEP, sampling: float = MG_SAMPLING) -> np.ndarray:
    """
    Fixed-step RK4 for dx_j/dt = -0.1 x_j + sum_i W_ij g(x_i(t - delta)), g(x) = x / (1 + x^10).

    The delayed values over the next delta/h steps are already in the history
    buffer, so each block of delta/h steps is an affine recurrence solved in
    one pass. Midpoint delays use linear interpolation between stored steps.
    """
    K = W.shape[0]
    D = int(round(delta / h))
    if D < 1 or abs(D * h - delta) > 1e-9:
        raise InvalidParameter(f"delay {delta} must be a positive multiple of the step {h}")
    every = int(round(sampling / h))
    transient = int(np.ceil(10.0 * delta / h / every)) * every
    total = transient + n * every

    lam = -0.1
    z = lam * h
    R = 1.0 + z + z ** 2 / 2.0 + z ** 3 / 6.0 + z ** 4 / 24.0

    def g(x):
        return x / (1.0 + x ** 10)

    hist = 0.5 + 0.01 * rng.standard_normal((D + 1, K))   # x over [t - delta, t]
    blocks = []
    steps = 0
    while steps < total:
        u = g(hist) @ W
        um = g(0.5 * (hist[:-1] + hist[1:])) @ W
        c = _rk4_forcing(u[:-1], um, u[1:], lam, h)
        block, _ = lfilter([1.0], [1.0, -R], c, axis=0, zi=(R * hist[-1])[None, :])
        if not np.all(np.isfinite(block)):
            return block[:0]
        blocks.append(block)
        hist = np.vstack([hist[-1:], block])
        steps += D
    traj = np.vstack(blocks)
    # traj[s] is the state after s + 1 steps
    return traj[transient + every - 1::every][:n]


def gen_mackey_glass(K: int, C: float, delta: float, n: int, seed: int) -> Tuple[TimeSeriesSet, CouplingGraph]:
    if C < 0:
        raise InvalidParameter(f"coupling must be >= 0, got {C}")
    graph = chain_coupling(K)
    W = mackey_glass_coupling(K, C)
    rng = np.random.default_rng(seed)
    for attempt in range(MAX_RETRIES + 1):
        data = simulate_mackey_glass(W, delta, n, rng)
        if data.shape[0] == n and _usable(data):
            return _finish(data, graph, MG_SAMPLING)
        agent_log("system", f"Mackey-Glass K={K} C={C} delta={delta} overflow, retry {attempt + 1}",
                  agent="systems", level="WARNING")
    raise PersistentDivergence(f"Mackey-Glass integration failed {MAX_RETRIES + 1} times (seed={seed})")


# ---------------------------------------
#  COUPLED NEURAL MASS MODEL
# ---------------------------------------
def simulate_neural_mass(W: np.ndarray, params: NeuralMassParams, n: int, rng: np.random.Generator,
                         dt: Optional[float] = None) -> np.ndarray:
    """
    Euler-Maruyama integration of K coupled eight-variable populations.

    Population i drives j through its delayed output y6 with weight W[i, j];
    the input p(t) is Gaussian white noise with the configured mean and std.
    Returns y0 of every population resampled at params.fs.
    """
    P = params
    dt = P.dt if dt is None else dt
    K = W.shape[0]
    duration = P.transient + n / P.fs
    steps = int(np.ceil(duration / dt)) + 1
    y = np.zeros((8, K))
    y0_trace = np.empty((steps, K))
    sqrt_dt = np.sqrt(dt)
    noise = rng.standard_normal((steps, K))
    Aa, Bb, Aad = P.A * P.a, P.B * P.b, P.A * P.a_d

    for s in range(steps):
        y0_trace[s] = y[0]
        y0, y1, y2, y3, y4, y5, y6, y7 = y
        pyr = P.sigmoid(y1 - y2)
        d = np.empty_like(y)
        d[0] = y3
        d[3] = Aa * pyr - 2 * P.a * y3 - P.a ** 2 * y0
        d[1] = y4
        d[4] = Aa * (P.p_mean + P.C2 * P.sigmoid(P.C1 * y0) + y6 @ W) - 2 * P.a * y4 - P.a ** 2 * y1
        d[2] = y5
        d[5] = Bb * P.C4 * P.sigmoid(P.C3 * y0) - 2 * P.b * y5 - P.b ** 2 * y2
        d[6] = y7
        d[7] = Aad * pyr - 2 * P.a_d * y7 - P.a_d ** 2 * y6
        y = y + dt * d
        y[4] += Aa * P.p_std * sqrt_dt * noise[s]
        if not np.all(np.isfinite(y)):
            return y0_trace[:0]

    t_grid = np.arange(steps) * dt
    t_out = P.transient + np.arange(n) / P.fs
    return np.column_stack([np.interp(t_out, t_grid, y0_trace[:, k]) for k in range(K)])


def gen_neural_mass(K: int, C: float, params: Optional[NeuralMassParams] = None,
                    n: int = 4096, seed: int = 0) -> Tuple[TimeSeriesSet, CouplingGraph]:
    params = params or NeuralMassParams()
    if C < 0:
        raise InvalidParameter(f"coupling must be >= 0, got {C}")
    graph = chain_coupling(K)
    W = C * graph.adjacency.astype(float)
    dt = params.dt
    for attempt in range(3):
        data = simulate_neural_mass(W, params, n, np.random.default_rng(seed), dt=dt)
        if data.shape[0] == n and _usable(data):
            return _finish(data, graph, 1.0 / params.fs)
        agent_log("system", f"neural mass blow-up at dt={dt}, halving the step",
                  agent="systems", level="WARNING")
        dt /= 2.0
    raise NumericBlowup(f"neural mass integration failed down to dt={dt * 2} (K={K}, C={C}, seed={seed})")


# ---------------------------------------
#  SPARSE VAR
# ---------------------------------------
def sparse_var_coefficients(spec: SparseVarSpec, rng: np.random.Generator) -> np.ndarray:
    """
    Random sparse VAR coefficients shrunk until the companion matrix is stable.

    ``pair_fraction`` of the K(K-1) ordered pairs are coupled; ``fraction`` of
    the K*K*P coefficients are set to ``magnitude``, each coupled pair getting
    lag one and the rest spread at random over the higher lags of coupled pairs.
    Lag-one autoregressive terms are 1 before shrinking.
    """
    K, P = spec.K, spec.order
    coefs = np.zeros((P, K, K))
    off = [(i, j) for i in range(K) for j in range(K) if i != j]
    n_pairs = max(1, int(round(spec.pair_fraction * len(off))))
    n_slots = min(n_pairs * P, max(n_pairs, int(round(spec.fraction * K * K * P))))
    pairs = [off[c] for c in rng.choice(len(off), size=n_pairs, replace=False)]
    # slot (lag, driver, response); coefs[lag][response, driver]
    first = [(0, i, j) for i, j in pairs]
    spare = [(k, i, j) for i, j in pairs for k in range(1, P)]
    extra = [spare[c] for c in rng.choice(len(spare), size=n_slots - n_pairs, replace=False)] if spare else []
    for k, i, j in first + extra:
        coefs[k, j, i] = spec.magnitude
    coefs[0][np.diag_indices(K)] = 1.0
    while not is_stable(coefs):
        coefs *= spec.shrink
    return coefs


def var_graph(coefs: np.ndarray) -> CouplingGraph:
    a = (np.abs(coefs).sum(axis=0).T > 0).astype(int)   # a[i, j]: any A_k[j, i] != 0
    np.fill_diagonal(a, 0)
    return CouplingGraph(a)


def gen_sparse_var(spec: SparseVarSpec) -> Tuple[TimeSeriesSet, CouplingGraph, VarModel]:
    rng = np.random.default_rng(spec.seed)
    coefs = sparse_var_coefficients(spec, rng)
    data, eps = simulate_var(coefs, spec.n, rng)
    model = VarModel(coefs=coefs, sigma=np.eye(spec.K), residuals=eps)
    ts, graph = _finish(data, var_graph(coefs))
    return ts, graph, model


# ---------------------------------------
#  DISPATCH
# ---------------------------------------
SYSTEMS = ("henon", "mackey_glass", "neural_mass", "sparse_var")


def generate_system(system: str, K: int, C: float, n: int, seed: int,
                    delta: float = 100.0, A: float = 3.45, order: int = 3) -> Tuple[TimeSeriesSet, CouplingGraph]:
    """Single entry point used by the CLI and the sweep."""
    if system == "henon":
        return gen_henon(K, C, n, seed)
    if system == "mackey_glass":
        return gen_mackey_glass(K, C, delta, n, seed)
    if system == "neural_mass":
        return gen_neural_mass(K, C, NeuralMassParams(A=A), n, seed)
    if system == "sparse_var":
        ts, graph, _ = gen_sparse_var(SparseVarSpec(K=K, order=order, n=n, seed=seed))
        return ts, graph
    raise InvalidParameter(f"unknown system '{system}', expected one of {SYSTEMS}")
