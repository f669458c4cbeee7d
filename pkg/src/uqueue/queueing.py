"""Unreliable-server queueing models and their stationary distributions.

Two models are provided.  "mg1n": a finite-capacity M/G/1/N queue whose
server may break down at the start of a service (probability theta) and is
then repaired at exponential rate r; the queue-length chain embedded at
service and repair completions is an N-state DTMC.  "mm1-threshold": a
finite-capacity M/M/1/N queue whose busy server breaks down at rate alpha
and is only repaired (rate beta) once the queue length reaches a threshold
q; the state (n, server-state) process is a CTMC on 2N + 1 states.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

_ROWSUM_TOL = 1e-12
_RESIDUAL_TOL = 1e-10
_CLAMP_TOL = 1e-14


@dataclass(frozen=True)
class Erlang2Service:
    """Generalized Erlang-2 service: density C (e^{-mu1 x} - e^{-mu2 x})."""

    mu1: float
    mu2: float

    def __post_init__(self):
        if self.mu1 <= 0.0 or self.mu2 <= 0.0:
            raise ValidationError("service rates must be positive")
        if self.mu1 == self.mu2:
            raise ValidationError("Erlang-2 rates must differ (density degenerate)")

    def poisson_arrival_probs(self, lam: float, count: int) -> np.ndarray:
        k = np.arange(count)
        c = self.mu1 * self.mu2 / (self.mu2 - self.mu1)
        return c * lam**k * (
            1.0 / (lam + self.mu1) ** (k + 1) - 1.0 / (lam + self.mu2) ** (k + 1)
        )


@dataclass(frozen=True)
class Hyperexp2Service:
    """Two-phase hyperexponential service: mixture of exponentials."""

    gamma: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError("mixture weight gamma must lie in (0, 1)")
        if self.mu1 <= 0.0 or self.mu2 <= 0.0:
            raise ValidationError("service rates must be positive")

    def poisson_arrival_probs(self, lam: float, count: int) -> np.ndarray:
        k = np.arange(count)
        return (
            self.gamma * self.mu1 * lam**k / (lam + self.mu1) ** (k + 1)
            + (1.0 - self.gamma) * self.mu2 * lam**k / (lam + self.mu2) ** (k + 1)
        )


@dataclass(frozen=True)
class ExponentialService:
    """Exponential service with rate mu."""

    mu: float

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValidationError("service rate must be positive")

    def poisson_arrival_probs(self, lam: float, count: int) -> np.ndarray:
        k = np.arange(count)
        return self.mu * lam**k / (lam + self.mu) ** (k + 1)


ServiceDistribution = Erlang2Service | Hyperexp2Service | ExponentialService


@dataclass(frozen=True)
class MG1NParams:
    """M/G/1/N queue with start-of-service breakdowns and exponential repairs."""

    N: int
    lam: float
    r: float
    theta: float
    service: ServiceDistribution

    def __post_init__(self):
        if self.N < 2:
            raise ValidationError("capacity N must be >= 2")
        if self.lam <= 0.0 or self.r <= 0.0:
            raise ValidationError("arrival and repair rates must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError("breakdown probability must lie in [0, 1]")


@dataclass(frozen=True)
class MM1ThresholdParams:
    """M/M/1/N queue with breakdowns and threshold-triggered repairs."""

    N: int
    q: int
    lam: float
    mu: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("capacity N must be >= 1")
        if not 1 <= self.q <= self.N:
            raise ValidationError("threshold q must lie in 1..N")
        for name in ("lam", "mu", "alpha", "beta"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"rate {name} must be positive")


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic transition matrix with state labels."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.labels):
            raise ValidationError("matrix must be square with one label per state")
        if np.any(v < 0.0):
            raise NumericalError("transition probabilities must be nonnegative")
        if np.max(np.abs(v.sum(axis=1) - 1.0)) > _ROWSUM_TOL:
            raise NumericalError("rows of a stochastic matrix must sum to 1")
        v.setflags(write=False)


@dataclass(frozen=True)
class GeneratorMatrix:
    """CTMC infinitesimal generator with state labels."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.labels):
            raise ValidationError("matrix must be square with one label per state")
        off = v - np.diag(np.diag(v))
        if np.any(off < 0.0):
            raise NumericalError("off-diagonal generator entries must be nonnegative")
        scale = max(np.max(np.abs(v)), 1.0)
        if np.max(np.abs(v.sum(axis=1))) > _ROWSUM_TOL * scale:
            raise NumericalError("generator rows must sum to 0")
        v.setflags(write=False)


@dataclass(frozen=True)
class StationaryDist:
    """Normalized stationary probability vector with state labels."""

    labels: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        self.probabilities.setflags(write=False)

    def __getitem__(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])


def a_coefficients(params: MG1NParams) -> np.ndarray:
    """Arrival-count probabilities a_0..a_{N-2} of the embedded M/G/1/N chain.

    a_k mixes the probability of k Poisson arrivals during a service with the
    probability of k arrivals during an exponential repair, weighted by the
    breakdown probability.  Both pieces have closed forms for exponential
    service components.
    """
    lam, r, theta = params.lam, params.r, params.theta
    count = params.N - 1
    k = np.arange(count)
    service_part = params.service.poisson_arrival_probs(lam, count)
    repair_part = (r / (r + lam)) * (lam / (lam + r)) ** k
    a = theta * service_part + (1.0 - theta) * repair_part
    if np.any(a < 0.0) or np.any(a > 1.0) or a.sum() > 1.0 + _ROWSUM_TOL:
        raise NumericalError("arrival-count probabilities out of range")
    return a


def mg1n_matrix(params: MG1NParams) -> StochasticMatrix:
    """Transition matrix of the chain embedded at service/repair completions.

    Rows 0 and 1 are identical (a completed service or repair leaving an
    empty or single-customer system sees the same arrival mix); row i >= 2
    shifts the arrival-count probabilities right by i - 1, and every row
    closes with the complementary mass in the last (saturated) state.
    """
    n = params.N
    a = a_coefficients(params)
    rows = np.zeros((n, n))
    rows[0, : n - 1] = a
    rows[0, n - 1] = 1.0 - a.sum()
    rows[1] = rows[0]
    for i in range(2, n):
        length = n - i
        rows[i, i - 1 : n - 1] = a[:length]
        rows[i, n - 1] = 1.0 - a[:length].sum()
    labels = tuple(f"pi_{i}" for i in range(n))
    return StochasticMatrix(values=rows, labels=labels)


def mm1_generator(params: MM1ThresholdParams) -> GeneratorMatrix:
    """Generator of the (queue length, server state) CTMC.

    States are ordered level-wise, (0,0), (1,0), (1,1), ..., (N,0), (N,1),
    where the second component is 1 while the server is broken.  Repairs
    (rate beta) fire only at levels n >= q; breakdowns (rate alpha) require
    a nonempty system.  Labels follow the pi_{server,level} convention.
    """
    n_cap, q = params.N, params.q
    lam, mu, alpha, beta = params.lam, params.mu, params.alpha, params.beta
    states = [(0, 0)] + [(n, s) for n in range(1, n_cap + 1) for s in (0, 1)]
    index = {state: i for i, state in enumerate(states)}
    size = len(states)
    gen = np.zeros((size, size))
    for n, s in states:
        i = index[(n, s)]
        if n < n_cap:
            gen[i, index[(n + 1, s)]] += lam
        if s == 0 and n >= 1:
            gen[i, index[(n - 1, 0)]] += mu
            gen[i, index[(n, 1)]] += alpha
        if s == 1 and n >= q:
            gen[i, index[(n, 0)]] += beta
    np.fill_diagonal(gen, gen.diagonal() - gen.sum(axis=1))
    labels = tuple(f"pi_{{{s},{n}}}" for n, s in states)
    return GeneratorMatrix(values=gen, labels=labels)


def _normalized_solve(system: np.ndarray, labels) -> np.ndarray:
    """Solve system @ x = 0 with the last equation replaced by sum(x) = 1."""
    size = system.shape[0]
    lhs = system.copy()
    lhs[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("chain not unichain or numerically degenerate") from exc
    if np.any(pi < -_CLAMP_TOL):
        raise NumericalError(f"stationary solve produced negative probabilities: {pi.min()}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_dtmc(matrix: StochasticMatrix) -> StationaryDist:
    """Stationary distribution of a unichain DTMC by dense linear solve."""
    p = matrix.values
    pi = _normalized_solve(p.T - np.eye(p.shape[0]), matrix.labels)
    residual = np.max(np.abs(pi @ p - pi))
    if residual > _RESIDUAL_TOL:
        raise NumericalError(f"stationary residual {residual} exceeds {_RESIDUAL_TOL}")
    return StationaryDist(labels=matrix.labels, probabilities=pi)


def stationary_ctmc(generator: GeneratorMatrix) -> StationaryDist:
    """Stationary distribution of an irreducible CTMC by dense linear solve."""
    gen = generator.values
    if gen.shape[0] == 1:
        return StationaryDist(labels=generator.labels, probabilities=np.array([1.0]))
    pi = _normalized_solve(gen.T, generator.labels)
    scale = max(np.max(np.abs(gen)), 1.0)
    residual = np.max(np.abs(pi @ gen))
    if residual > _RESIDUAL_TOL * scale:
        raise NumericalError(f"stationary residual {residual} exceeds tolerance")
    return StationaryDist(labels=generator.labels, probabilities=pi)


def solve_mg1n(params: MG1NParams) -> StationaryDist:
    return stationary_dtmc(mg1n_matrix(params))


def solve_mm1_threshold(params: MM1ThresholdParams) -> StationaryDist:
    return stationary_ctmc(mm1_generator(params))


_SERVICE_KINDS = {
    "erlang2": (Erlang2Service, ("mu1", "mu2")),
    "hyperexp2": (Hyperexp2Service, ("gamma", "mu1", "mu2")),
    "exponential": (ExponentialService, ("mu",)),
}


def build_service(config: dict) -> ServiceDistribution:
    """Construct a service distribution from {"kind": ..., <rate fields>}."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ValidationError('service must be an object with a "kind" field')
    kind = config["kind"]
    if kind not in _SERVICE_KINDS:
        raise ValidationError(
            f"unknown service kind {kind!r}; expected one of {sorted(_SERVICE_KINDS)}"
        )
    cls, fields = _SERVICE_KINDS[kind]
    missing = [f for f in fields if f not in config]
    if missing:
        raise ValidationError(f"service kind {kind!r} missing fields {missing}")
    extra = [f for f in config if f not in fields and f != "kind"]
    if extra:
        raise ValidationError(f"service kind {kind!r} does not take fields {extra}")
    return cls(**{f: float(config[f]) for f in fields})


def _check_uncertain(name, scalars, params, uncertain_names):
    service_cfg = params.get("service") if isinstance(params.get("service"), dict) else {}
    for u in uncertain_names:
        if u not in scalars:
            raise ValidationError(
                f"uncertain parameter {u!r} is not a scalar parameter of {name!r} "
                f"(expected one of {sorted(scalars)})"
            )
        if u in params or u in service_cfg:
            raise ValidationError(
                f"parameter {u!r} given both a fixed value and an uncertain spec"
            )
    fixed = [s for s in scalars if s not in uncertain_names]
    missing = [s for s in fixed if s not in params and s not in service_cfg]
    if missing:
        raise ValidationError(f"model {name!r} parameters missing values: {missing}")


def _build_mg1n(params: dict, uncertain_names):
    for field in ("N", "service"):
        if field not in params:
            raise ValidationError(f"mg1n parameters missing {field!r}")
    service_cfg = dict(params["service"])
    kind = service_cfg.get("kind")
    if kind not in _SERVICE_KINDS:
        raise ValidationError(
            f"unknown service kind {kind!r}; expected one of {sorted(_SERVICE_KINDS)}"
        )
    scalars = ("lam", "r", "theta") + _SERVICE_KINDS[kind][1]
    _check_uncertain("mg1n", scalars, params, uncertain_names)
    base = {k: float(params[k]) for k in ("lam", "r", "theta") if k in params}
    n_cap = int(params["N"])

    def assemble(values):
        merged = dict(base)
        service = dict(service_cfg)
        for name, value in zip(uncertain_names, values):
            if name in ("lam", "r", "theta"):
                merged[name] = float(value)
            else:
                service[name] = float(value)
        return MG1NParams(N=n_cap, lam=merged["lam"], r=merged["r"],
                          theta=merged["theta"], service=build_service(service))

    def model(values):
        return solve_mg1n(assemble(values)).probabilities

    return model, tuple(f"pi_{i}" for i in range(n_cap))


def _build_mm1(params: dict, uncertain_names):
    for field in ("N", "q"):
        if field not in params:
            raise ValidationError(f"mm1-threshold parameters missing {field!r}")
    scalars = ("lam", "mu", "alpha", "beta")
    _check_uncertain("mm1-threshold", scalars, params, uncertain_names)
    base = {k: float(params[k]) for k in scalars if k in params}
    n_cap, q = int(params["N"]), int(params["q"])

    def model(values):
        merged = dict(base)
        for name, value in zip(uncertain_names, values):
            merged[name] = float(value)
        return solve_mm1_threshold(MM1ThresholdParams(N=n_cap, q=q, **merged)).probabilities

    labels = ("pi_{0,0}",) + tuple(
        f"pi_{{{s},{n}}}" for n in range(1, n_cap + 1) for s in (0, 1)
    )
    return model, labels


MODEL_REGISTRY = {"mg1n": _build_mg1n, "mm1-threshold": _build_mm1}


def make_model(name: str, params: dict, uncertain_names):
    """Look up a model and bind its fixed parameter values.

    Returns (model callable, output labels).  The callable takes the vector
    of uncertain parameter values (in the given order) and returns the
    stationary probability vector; every uncertain name must be a scalar
    rate/probability of the chosen model and must not also be fixed.
    """
    if name not in MODEL_REGISTRY:
        raise ValidationError(
            f"unknown model {name!r}; expected one of {sorted(MODEL_REGISTRY)}"
        )
    return MODEL_REGISTRY[name](params, tuple(uncertain_names))
