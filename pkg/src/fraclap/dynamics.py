"""Variable-order heat and Schrodinger dynamics on networks.

The state convention is the row-vector one: p'(t) = -p(t) @ G(t) where the
generator G(t) is either a fractional Laplacian power L^{alpha(t)} or the
alpha(t)-weighted hop-coupling operator.  For symmetric generators every
integration runs in the shared eigenbasis, where the system decouples into
scalar equations q_i' = -lambda_i^{alpha(t)} q_i; entry/exit basis changes
cost O(n^2) once while each right-hand-side call is O(n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, QuadratureError, StiffnessError
from .graphs import Graph, all_pairs_distances, k_path_laplacian
from .integrators import StepStats, bdf_integrate, rk45_integrate
from .matfun import (
    SpectralDecomposition,
    TriangularFactorization,
    fractional_power_sym,
    power_from_factorization,
    sym_eig,
    triangular_factorization,
)
from .quadrature import adaptive_simpson
from .schedules import AlphaSchedule, ClampCountingSchedule

__all__ = [
    "SpectralGenerator",
    "GeneralGenerator",
    "KPathGenerator",
    "fractional_generator",
    "DynamicsProblem",
    "IntegratorConfig",
    "Trajectory",
    "TrajectoryStats",
    "build_rhs",
    "integrate_rk45",
    "integrate_bdf",
    "exact_solution",
    "simulate",
    "random_initial_state",
]

_QUAD_TOL = 1e-10


# ---------------------------------------------------------------------------
# Generator families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralGenerator:
    """L^alpha for a symmetric Laplacian; all powers share one eigenbasis."""

    decomposition: SpectralDecomposition

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SpectralGenerator":
        return cls(sym_eig(m))

    @property
    def n(self) -> int:
        return self.decomposition.n

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def basis(self) -> np.ndarray:
        return self.decomposition.basis

    def clamped_eigenvalues(self) -> np.ndarray:
        return self.decomposition.clamped_eigenvalues()

    def matrix(self, alpha: float) -> np.ndarray:
        return fractional_power_sym(self.decomposition, alpha)


@dataclass(frozen=True)
class GeneralGenerator:
    """L^alpha for a non-symmetric Laplacian via a triangular factorization."""

    factorization: TriangularFactorization

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "GeneralGenerator":
        return cls(triangular_factorization(m))

    @property
    def n(self) -> int:
        return self.factorization.n

    @property
    def is_symmetric(self) -> bool:
        return False

    def matrix(self, alpha: float) -> np.ndarray:
        return power_from_factorization(self.factorization, alpha)


@dataclass(frozen=True)
class KPathGenerator:
    """Hop-coupling operator L_1 + sum_k k^{-alpha} L_k with alpha from the schedule.

    Symmetric at every instant, but different alphas are not simultaneously
    diagonalizable, so there is no shared-eigenbasis fast path and no
    closed-form solution; only direct numerical integration applies.
    """

    layers: tuple[np.ndarray, ...]

    @classmethod
    def from_graph(cls, g: Graph) -> "KPathGenerator":
        distances = all_pairs_distances(g)
        layers = tuple(k_path_laplacian(g, k, distances)
                       for k in range(1, max(distances.diameter, 1) + 1))
        return cls(layers=layers)

    @property
    def n(self) -> int:
        return self.layers[0].shape[0]

    @property
    def is_symmetric(self) -> bool:
        return True

    def matrix(self, alpha: float) -> np.ndarray:
        if alpha < 0:
            raise ValueError("alpha must be >= 0 for the hop-coupling operator")
        total = self.layers[0].copy()
        for k, layer in enumerate(self.layers[1:], start=2):
            total += float(k) ** (-alpha) * layer
        return total


def fractional_generator(source) -> SpectralGenerator | GeneralGenerator:
    """Wrap a Laplacian (or its eigendecomposition) in the right generator."""
    if isinstance(source, (SpectralGenerator, GeneralGenerator, KPathGenerator)):
        return source
    if isinstance(source, SpectralDecomposition):
        return SpectralGenerator(source)
    m = np.asarray(source)
    if np.abs(m - m.T).max() <= 1e-9 * max(1.0, np.abs(m).max()):
        return SpectralGenerator.from_matrix(m)
    return GeneralGenerator.from_matrix(m)


# ---------------------------------------------------------------------------
# Problems and trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsProblem:
    """A heat or Schrodinger initial value problem on a network.

    Heat states are probability vectors (nonnegative, summing to one);
    Schrodinger states are complex amplitudes with unit 2-norm.
    """

    model: str
    generator: SpectralGenerator | GeneralGenerator | KPathGenerator
    schedule: AlphaSchedule
    initial_state: np.ndarray
    horizon: float

    def __post_init__(self):
        if self.model not in ("heat", "schrodinger"):
            raise ValueError(f"model must be 'heat' or 'schrodinger', got {self.model!r}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        state = np.asarray(self.initial_state)
        if state.shape != (self.generator.n,):
            raise ValueError(
                f"initial state has shape {state.shape}, expected ({self.generator.n},)")
        if self.model == "heat":
            if np.iscomplexobj(state) and np.abs(state.imag).max() > 0:
                raise ValueError("heat initial state must be real")
            state = state.real.astype(float)
            if state.min() < -1e-12:
                raise ValueError(f"heat initial state has negative entry {state.min()}")
            if abs(state.sum() - 1.0) > 1e-12:
                raise ValueError(f"heat initial state sums to {state.sum()!r}, not 1")
        else:
            state = state.astype(complex)
            nrm = np.linalg.norm(state)
            if abs(nrm - 1.0) > 1e-12:
                raise ValueError(f"schrodinger initial state has norm {nrm!r}, not 1")
        object.__setattr__(self, "initial_state", state)

    @property
    def factor(self) -> complex:
        return 1.0 if self.model == "heat" else 1j


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"
    rtol: float = 1e-6
    atol: float = 1e-9
    max_step: float | None = None
    first_step: float | None = None
    samples: int = 200

    def __post_init__(self):
        if self.method not in ("rk45", "bdf", "exact"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rtol < 1e-13:
            raise ValueError("rtol must be >= 1e-13")
        if not self.atol > 0:
            raise ValueError("atol must be positive")
        if self.samples < 2:
            raise ValueError("need at least 2 output samples")


@dataclass(frozen=True)
class TrajectoryStats:
    accepted: int
    rejected: int
    rhs_evals: int
    linear_solves: int
    clamp_count: int


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    stats: TrajectoryStats


def random_initial_state(model: str, n: int, seed: int) -> np.ndarray:
    """Seeded random start: uniform on the simplex (heat) or complex sphere."""
    rng = np.random.default_rng(seed)
    if model == "heat":
        return rng.dirichlet(np.ones(n))
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)


# ---------------------------------------------------------------------------
# Right-hand sides and per-run systems
# ---------------------------------------------------------------------------

def build_rhs(problem: DynamicsProblem):
    """Return the state-space derivative function (t, state) -> -state @ G(t).

    For symmetric generators the product is evaluated through the cached
    eigenbasis (diagonal powering per call, no matrix assembly).
    """
    schedule = problem.schedule
    factor = problem.factor
    gen = problem.generator
    if isinstance(gen, SpectralGenerator):
        basis = gen.basis
        lam = gen.clamped_eigenvalues()

        def rhs(t, state):
            powered = lam ** schedule(t)
            return -factor * (((state @ basis) * powered) @ basis.T)

        return rhs
    cache = _MatrixCache(gen)

    def rhs(t, state):
        return -factor * (state @ cache.get(schedule(t)))

    return rhs


class _MatrixCache:
    """Reuses assembled generator matrices keyed by the exponent value."""

    def __init__(self, generator, max_entries: int = 64):
        self._generator = generator
        self._cache: dict[float, np.ndarray] = {}
        self._max = max_entries

    def get(self, alpha: float) -> np.ndarray:
        hit = self._cache.get(alpha)
        if hit is None:
            if len(self._cache) >= self._max:
                self._cache.clear()
            hit = self._generator.matrix(alpha)
            self._cache[alpha] = hit
        return hit


class _EigenSystem:
    """Decoupled scalar dynamics in the eigenbasis of a symmetric generator."""

    def __init__(self, generator: SpectralGenerator, schedule, factor, stats):
        self.basis = generator.basis
        self.lam = generator.clamped_eigenvalues()
        self.schedule = schedule
        self.factor = factor
        self.stats = stats
        self._key = None
        self._solver = None

    def enter(self, state):
        return state @ self.basis

    def exit(self, coords):
        return coords @ self.basis.T

    def rhs(self, t, coords):
        return -self.factor * (self.lam ** self.schedule(t)) * coords

    def make_solver(self, t, c):
        alpha = self.schedule(t)
        if self._key is not None:
            c0, a0 = self._key
            if abs(c - c0) <= 1e-12 * abs(c0) and abs(alpha - a0) <= 1e-12:
                return self._solver
        denom = 1.0 + c * self.factor * self.lam ** alpha
        self._solver = lambda b: b / denom
        self._key = (c, alpha)
        self.stats.factorizations += 1
        return self._solver


class _DenseSystem:
    """State-space dynamics with per-call generator assembly (cached)."""

    def __init__(self, generator, schedule, factor, stats):
        self.cache = _MatrixCache(generator)
        self.schedule = schedule
        self.factor = factor
        self.symmetric = generator.is_symmetric
        self.n = generator.n
        self.stats = stats
        self._key = None
        self._solver = None

    def enter(self, state):
        return state

    def exit(self, coords):
        return coords

    def rhs(self, t, state):
        return -self.factor * (state @ self.cache.get(self.schedule(t)))

    def make_solver(self, t, c):
        alpha = self.schedule(t)
        if self._key is not None:
            c0, a0 = self._key
            if abs(c - c0) <= 1e-12 * abs(c0) and abs(alpha - a0) <= 1e-12:
                return self._solver
        m = self.cache.get(alpha)
        shifted = np.eye(self.n, dtype=np.result_type(float, m.dtype,
                                                      type(self.factor))) \
            + c * self.factor * m
        if self.symmetric and not np.iscomplexobj(shifted):
            # I + c L^alpha is symmetric positive definite for c > 0.
            factorized = scipy.linalg.cho_factor(shifted)
            self._solver = lambda b: scipy.linalg.cho_solve(factorized, b)
        else:
            factorized = scipy.linalg.lu_factor(shifted.T)
            self._solver = lambda b: scipy.linalg.lu_solve(factorized, b)
        self._key = (c, alpha)
        self.stats.factorizations += 1
        return self._solver


def _make_system(problem, schedule, stats):
    if isinstance(problem.generator, SpectralGenerator):
        return _EigenSystem(problem.generator, schedule, problem.factor, stats)
    return _DenseSystem(problem.generator, schedule, problem.factor, stats)


def _sample_grid(problem, config):
    return np.linspace(0.0, problem.horizon, config.samples)


def _finish(problem, samples, states, step_stats, clamps):
    if problem.model == "heat" and np.iscomplexobj(states) \
            and np.abs(states.imag).max() <= 1e-12:
        states = states.real.copy()
    return Trajectory(
        times=samples,
        states=states,
        stats=TrajectoryStats(
            accepted=step_stats.accepted,
            rejected=step_stats.rejected,
            rhs_evals=step_stats.rhs_evals,
            linear_solves=step_stats.linear_solves,
            clamp_count=clamps,
        ),
    )


def integrate_rk45(problem: DynamicsProblem,
                   config: IntegratorConfig | None = None) -> Trajectory:
    """Explicit embedded 5(4) integration of the problem."""
    config = config if config is not None else IntegratorConfig(method="rk45")
    if config.method != "rk45":
        raise ValueError(f"config.method is {config.method!r}, expected 'rk45'")
    counting = ClampCountingSchedule(problem.schedule)
    stats = StepStats()
    system = _make_system(problem, counting, stats)
    samples = _sample_grid(problem, config)
    y0 = system.enter(problem.initial_state)
    try:
        coords = rk45_integrate(
            system.rhs, problem.horizon, y0, samples,
            rtol=config.rtol, atol=config.atol,
            max_step=config.max_step if config.max_step else np.inf,
            first_step=config.first_step, stats=stats)
    except StiffnessError as exc:
        partial_times, partial_coords, _ = exc.partial
        partial = _finish(problem, partial_times, system.exit(partial_coords),
                          stats, counting.clamps)
        raise StiffnessError(str(exc), partial=partial) from None
    return _finish(problem, samples, system.exit(coords), stats, counting.clamps)


def integrate_bdf(problem: DynamicsProblem,
                  config: IntegratorConfig | None = None) -> Trajectory:
    """Implicit variable-order (1-5) BDF integration of the problem.

    Each step solves one linear system; the factorization is reused while the
    step size, order, and alpha(t) stay unchanged to within 1e-12.
    """
    config = config if config is not None else IntegratorConfig(method="bdf")
    if config.method != "bdf":
        raise ValueError(f"config.method is {config.method!r}, expected 'bdf'")
    counting = ClampCountingSchedule(problem.schedule)
    stats = StepStats()
    system = _make_system(problem, counting, stats)
    samples = _sample_grid(problem, config)
    y0 = system.enter(problem.initial_state)
    coords = bdf_integrate(
        system.rhs, system.make_solver, problem.horizon, y0, samples,
        rtol=config.rtol, atol=config.atol,
        max_step=config.max_step if config.max_step else np.inf,
        first_step=config.first_step, stats=stats)
    return _finish(problem, samples, system.exit(coords), stats, counting.clamps)


def exact_solution(problem: DynamicsProblem, sample_times=None,
                   quad_tol: float = _QUAD_TOL) -> Trajectory:
    """Closed-form solution p0 exp(-integral of L^{alpha(tau)} dtau).

    Valid because all powers of a symmetric Laplacian commute (shared
    eigenbasis): each eigen-coordinate obeys a scalar equation whose exponent
    integral I_i(t) = int_0^t lambda_i^{alpha(tau)} dtau is computed by
    adaptive Simpson quadrature to componentwise tolerance quad_tol.
    """
    if not isinstance(problem.generator, SpectralGenerator):
        raise ValueError(
            "the closed-form solution needs a symmetric generator with a "
            "time-independent eigenbasis")
    counting = ClampCountingSchedule(problem.schedule)
    lam = problem.generator.clamped_eigenvalues()
    basis = problem.generator.basis
    if sample_times is None:
        sample_times = np.linspace(0.0, problem.horizon, 200)
    samples = np.asarray(sample_times, dtype=float)
    if samples.ndim != 1 or samples.size == 0 or np.any(np.diff(samples) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if samples[0] < 0 or samples[-1] > problem.horizon + 1e-12:
        raise ValueError("sample times must lie within [0, horizon]")

    def integrand(tau):
        return lam ** counting(tau)

    coords0 = problem.initial_state @ basis
    states = np.empty((samples.size, lam.size),
                      dtype=complex if problem.model == "schrodinger" else float)
    accumulated = np.zeros_like(lam)
    prev = 0.0
    for row, t in enumerate(samples):
        if t > prev:
            try:
                accumulated = accumulated + adaptive_simpson(
                    integrand, prev, t, tol=quad_tol,
                    breakpoints=counting.breakpoints(prev, t))
            except QuadratureError as exc:
                bad = exc.component if exc.component is not None else 0
                raise ConvergenceError(
                    f"exponent quadrature failed for eigenvalue {lam[bad]!r} "
                    f"on interval {exc.interval}") from exc
            prev = t
        if problem.model == "heat":
            states[row] = (coords0 * np.exp(-accumulated)) @ basis.T
        else:
            states[row] = (coords0 * np.exp(-1j * accumulated)) @ basis.T
    return _finish(problem, samples, states,
                   StepStats(), counting.clamps)


def simulate(problem: DynamicsProblem, config: IntegratorConfig) -> Trajectory:
    """Dispatch on config.method: rk45, bdf, or exact."""
    if config.method == "rk45":
        return integrate_rk45(problem, config)
    if config.method == "bdf":
        return integrate_bdf(problem, config)
    return exact_solution(problem, _sample_grid(problem, config))
