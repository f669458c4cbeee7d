"""Study orchestration: configs, the project/moments/Sobol' pipeline, and the
built-in result tables for the two bundled queueing models."""

from dataclasses import dataclass, replace

import numpy as np

from . import montecarlo, pce, queueing
from .errors import ValidationError
from .pce import InputSpec, MomentSummary, PceSurrogate, SobolReport, UncertainParameter
from .results import ResultTable

CONFIG_SCHEMA = "uq-study/1"


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to run one UQ study on a registered model."""

    model: str
    params: dict
    uncertain: tuple[UncertainParameter, ...]
    degree: int
    quad_points: int | tuple[int, ...]
    mc_samples: int | None = None
    mc_seed: int | None = None
    outputs: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise ValidationError("pc.degree must be >= 0")
        points = self.quad_points if isinstance(self.quad_points, tuple) else (self.quad_points,)
        if min(points) < self.degree + 1:
            raise ValidationError(
                f"pc.quad_points {self.quad_points} must be >= degree + 1 = {self.degree + 1}"
            )
        if self.mc_samples is not None and self.mc_samples < 1:
            raise ValidationError("mc.samples must be >= 1")

    @property
    def input_spec(self) -> InputSpec:
        return InputSpec(parameters=self.uncertain)


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ValidationError(f"config field {where}.{key} is missing")
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind):
        raise ValidationError(f"config field {where}.{key} must be {kind.__name__}")
    return value


def parse_config(doc: dict) -> StudyConfig:
    """Validate a study-config JSON document (schema uq-study/1)."""
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    if doc.get("schema") != CONFIG_SCHEMA:
        raise ValidationError(f'config field schema must be "{CONFIG_SCHEMA}"')
    model = _require(doc, "model", dict, "$")
    name = _require(model, "name", str, "model")
    params = _require(model, "params", dict, "model")
    uncertain_docs = _require(doc, "uncertain", list, "$")
    if not uncertain_docs:
        raise ValidationError("config needs at least one uncertain parameter")
    uncertain = []
    for i, entry in enumerate(uncertain_docs):
        where = f"uncertain[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"config field {where} must be an object")
        uncertain.append(UncertainParameter(
            name=_require(entry, "name", str, where),
            germ=_require(entry, "germ", str, where),
            mean=_require(entry, "mean", float, where),
            sigma=_require(entry, "sigma", float, where),
        ))
    pc_doc = _require(doc, "pc", dict, "$")
    degree = _require(pc_doc, "degree", int, "pc")
    raw_points = pc_doc.get("quad_points")
    if isinstance(raw_points, list):
        quad_points = tuple(int(v) for v in raw_points)
        if len(quad_points) != len(uncertain):
            raise ValidationError("pc.quad_points list must have one entry per uncertain parameter")
    elif isinstance(raw_points, int):
        quad_points = raw_points
    else:
        raise ValidationError("pc.quad_points must be an integer or list of integers")
    mc_samples = mc_seed = None
    if "mc" in doc:
        mc_doc = _require(doc, "mc", dict, "$")
        mc_samples = _require(mc_doc, "samples", int, "mc")
        mc_seed = _require(mc_doc, "seed", int, "mc")
    outputs = None
    if "outputs" in doc:
        outputs = tuple(_require(doc, "outputs", list, "$"))
        if not all(isinstance(o, str) for o in outputs):
            raise ValidationError("config field outputs must list output labels")
    return StudyConfig(model=name, params=params, uncertain=tuple(uncertain),
                       degree=degree, quad_points=quad_points,
                       mc_samples=mc_samples, mc_seed=mc_seed, outputs=outputs)


def config_to_doc(config: StudyConfig) -> dict:
    """Inverse of parse_config, used to echo inputs into run metadata."""
    doc = {
        "schema": CONFIG_SCHEMA,
        "model": {"name": config.model, "params": config.params},
        "uncertain": [
            {"name": u.name, "germ": u.germ, "mean": u.mean, "sigma": u.sigma}
            for u in config.uncertain
        ],
        "pc": {
            "degree": config.degree,
            "quad_points": list(config.quad_points)
            if isinstance(config.quad_points, tuple) else config.quad_points,
        },
    }
    if config.mc_samples is not None:
        doc["mc"] = {"samples": config.mc_samples, "seed": config.mc_seed}
    if config.outputs is not None:
        doc["outputs"] = list(config.outputs)
    return doc


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    surrogate: PceSurrogate
    moments: MomentSummary
    sobol: SobolReport | None
    mc_moments: MomentSummary | None = None


def _select_outputs(surrogate: PceSurrogate, outputs) -> PceSurrogate:
    missing = [o for o in outputs if o not in surrogate.output_labels]
    if missing:
        raise ValidationError(f"unknown output labels {missing}; "
                              f"model provides {list(surrogate.output_labels)}")
    rows = [surrogate.output_labels.index(o) for o in outputs]
    return replace(surrogate, coefficients=surrogate.coefficients[rows, :],
                   output_labels=tuple(outputs))


def run_study(config: StudyConfig, threads: int | None = None) -> StudyResult:
    """project -> moments -> Sobol' (plus optional MC comparison)."""
    spec = config.input_spec
    model, labels = queueing.make_model(config.model, config.params, spec.names)
    basis = pce.basis_for_spec(spec, config.degree)
    surrogate = pce.project(model, spec, basis, config.quad_points,
                            output_labels=labels, threads=threads)
    if config.outputs is not None:
        surrogate = _select_outputs(surrogate, config.outputs)
    summary = pce.moments(surrogate)
    report = pce.sobol(surrogate) if config.degree >= 1 else None
    mc_summary = None
    if config.mc_samples is not None:
        samples = montecarlo.draw_samples(spec, config.mc_samples, config.mc_seed)
        samples = montecarlo.evaluate_samples(model, spec, samples, threads=threads)
        mc_summary = montecarlo.sample_moments(samples.outputs, labels)
    return StudyResult(config=config, surrogate=surrogate, moments=summary,
                       sobol=report, mc_moments=mc_summary)


# ---------------------------------------------------------------------------
# Built-in studies: the two M/G/1/7 breakdown queues (uniform breakdown
# probability theta = 0.5 + 0.28 eps) and the M/M/1/5 threshold-recovery
# queue with four Gaussian rate parameters.

def me2_config() -> StudyConfig:
    return StudyConfig(
        model="mg1n",
        params={"N": 7, "lam": 1.0, "r": 0.4,
                "service": {"kind": "erlang2", "mu1": 4.0, "mu2": 2.0}},
        uncertain=(UncertainParameter("theta", pce.GERM_UNIFORM, 0.5, 0.28),),
        degree=4, quad_points=6,
    )


def mh2_config() -> StudyConfig:
    return StudyConfig(
        model="mg1n",
        params={"N": 7, "lam": 1.0, "r": 0.4,
                "service": {"kind": "hyperexp2", "gamma": 0.3, "mu1": 1.5, "mu2": 3.0}},
        uncertain=(UncertainParameter("theta", pce.GERM_UNIFORM, 0.5, 0.28),),
        degree=4, quad_points=6,
    )


_MM1_MEANS = {"mu": 7.3, "lam": 2.0, "alpha": 3.0, "beta": 4.0}
_MM1_SIGMAS = {"mu": 0.02, "lam": 0.04, "alpha": 0.04, "beta": 0.02}


def mm1_config(uncertain_names=("alpha", "beta", "lam", "mu")) -> StudyConfig:
    """Threshold-recovery study; uncertain_names picks which rates are random."""
    params = {"N": 5, "q": 3}
    params.update({k: _MM1_MEANS[k] for k in _MM1_MEANS if k not in uncertain_names})
    uncertain = tuple(
        UncertainParameter(k, pce.GERM_NORMAL, _MM1_MEANS[k], _MM1_SIGMAS[k])
        for k in uncertain_names
    )
    return StudyConfig(model="mm1-threshold", params=params, uncertain=uncertain,
                       degree=3, quad_points=5)


# Paper-style row order for the threshold queue: level by level, working
# server first; matches the labels emitted by the model itself.
_SOBOL_COLUMN_ORDER = ("alpha", "mu", "beta", "lam")
_SOBOL_PAIR_ORDER = (("alpha", "mu"), ("alpha", "beta"), ("alpha", "lam"),
                     ("mu", "beta"), ("mu", "lam"), ("beta", "lam"))

TABLE_IDS = (
    "me2-mean", "me2-var", "me2-skew", "me2-kurt",
    "mh2-mean", "mh2-var", "mh2-skew", "mh2-kurt",
    "me2-density", "mh2-density",
    "mm1-sobol1", "mm1-sobol2", "mm1-sobol-total",
    "mm1-mean", "mm1-var", "mm1-skew", "mm1-kurt",
)

DENSITY_TABLE_IDS = ("me2-density", "mh2-density")

_STAT_FOR_SUFFIX = {"mean": "mean", "var": "variance",
                    "skew": "skewness", "kurt": "kurtosis"}


def _stat_column(summary: MomentSummary, stat: str) -> np.ndarray:
    return getattr(summary, stat)


def _metadata(config: StudyConfig, extra=None) -> dict:
    from . import __version__
    meta = {
        "model": config.model,
        "p": str(config.degree),
        "n_g": str(config.quad_points),
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def _moment_table(table_id: str, config: StudyConfig, stat: str,
                  mc_samples, mc_seed, threads) -> ResultTable:
    config = replace(config, mc_samples=mc_samples, mc_seed=mc_seed)
    result = run_study(config, threads=threads)
    columns = [("pc", _stat_column(result.moments, stat))]
    meta = {}
    if result.mc_moments is not None:
        columns.append(("mc", _stat_column(result.mc_moments, stat)))
        meta = {"mc_samples": str(mc_samples), "seed": str(mc_seed)}
    return ResultTable(
        name=table_id,
        row_labels=result.moments.labels,
        col_labels=tuple(label for label, _ in columns),
        values=np.column_stack([v for _, v in columns]),
        metadata=_metadata(config, meta),
    )


def _mm1_two_column_table(table_id: str, stat: str, mc_samples, mc_seed,
                          threads) -> ResultTable:
    """Single-random-parameter column next to the all-random column.

    The single-parameter study keeps the dominant input random (the arrival
    rate), except for the two outputs whose variance is driven by the
    breakdown rate, which take their value from an alpha-only study.
    """
    full = run_study(replace(mm1_config(), mc_samples=mc_samples, mc_seed=mc_seed),
                     threads=threads)
    lam_only = run_study(mm1_config(("lam",)), threads=threads)
    alpha_only = run_study(mm1_config(("alpha",)), threads=threads)
    labels = full.moments.labels
    alpha_rows = ("pi_{0,1}", "pi_{1,3}")
    one_rv = np.array([
        _stat_column(alpha_only.moments if label in alpha_rows else lam_only.moments,
                     stat)[i]
        for i, label in enumerate(labels)
    ])
    columns = [("pc_1rv", one_rv), ("pc_4rv", _stat_column(full.moments, stat))]
    meta = {"one_rv_rule": "alpha for pi_{0,1} and pi_{1,3}, lam otherwise"}
    if full.mc_moments is not None:
        columns.append(("mc", _stat_column(full.mc_moments, stat)))
        meta.update({"mc_samples": str(mc_samples), "seed": str(mc_seed)})
    return ResultTable(
        name=table_id, row_labels=labels,
        col_labels=tuple(label for label, _ in columns),
        values=np.column_stack([v for _, v in columns]),
        metadata=_metadata(full.config, meta),
    )


def _sobol_table(table_id: str, threads) -> ResultTable:
    result = run_study(mm1_config(), threads=threads)
    report = result.sobol
    name_to_dim = {name: i for i, name in enumerate(report.input_names)}
    if table_id == "mm1-sobol1":
        cols = [(f"S_{n}", [(name_to_dim[n],)]) for n in _SOBOL_COLUMN_ORDER]
    elif table_id == "mm1-sobol2":
        cols = [
            (f"S_{a}_{b}", [tuple(sorted((name_to_dim[a], name_to_dim[b])))])
            for a, b in _SOBOL_PAIR_ORDER
        ]
    else:
        cols = [(f"ST_{n}", name_to_dim[n]) for n in _SOBOL_COLUMN_ORDER]
    values = np.empty((len(report.labels), len(cols)))
    for j, (_, key) in enumerate(cols):
        if table_id == "mm1-sobol-total":
            values[:, j] = report.totals[:, key]
        else:
            values[:, j] = report.indices[:, report.subsets.index(key[0])]
    return ResultTable(
        name=table_id, row_labels=report.labels,
        col_labels=tuple(label for label, _ in cols),
        values=values, metadata=_metadata(result.config),
    )


def build_table(table_id: str, mc_samples: int | None = None,
                mc_seed: int | None = None, threads: int | None = None) -> ResultTable:
    """Compute one built-in result table (density ids go through build_density)."""
    if table_id not in TABLE_IDS:
        raise ValidationError(
            f"unknown table id {table_id!r}; valid ids: {', '.join(TABLE_IDS)}"
        )
    if table_id in DENSITY_TABLE_IDS:
        raise ValidationError(
            f"table {table_id!r} holds density curves; use the density command "
            "or pass sample count and seed"
        )
    if mc_samples is not None and mc_seed is None:
        raise ValidationError("MC columns need both a sample count and a seed")
    prefix, _, suffix = table_id.partition("-")
    if prefix in ("me2", "mh2"):
        config = me2_config() if prefix == "me2" else mh2_config()
        return _moment_table(table_id, config, _STAT_FOR_SUFFIX[suffix],
                             mc_samples, mc_seed, threads)
    if suffix in _STAT_FOR_SUFFIX:
        return _mm1_two_column_table(table_id, _STAT_FOR_SUFFIX[suffix],
                                     mc_samples, mc_seed, threads)
    return _sobol_table(table_id, threads)


def build_density(table_id: str, samples: int, seed: int, grid_size: int = 256,
                  threads: int | None = None):
    """KDE curves for every output of a built-in M/G/1/7 study.

    Returns (labels, curves, metadata).
    """
    if table_id not in DENSITY_TABLE_IDS:
        raise ValidationError(
            f"unknown density id {table_id!r}; valid ids: {', '.join(DENSITY_TABLE_IDS)}"
        )
    config = me2_config() if table_id.startswith("me2") else mh2_config()
    spec = config.input_spec
    model, labels = queueing.make_model(config.model, config.params, spec.names)
    drawn = montecarlo.draw_samples(spec, samples, seed)
    drawn = montecarlo.evaluate_samples(model, spec, drawn, threads=threads)
    curves = [montecarlo.kde(drawn.outputs[:, i], grid_size) for i in range(len(labels))]
    meta = _metadata(config, {"mc_samples": str(samples), "seed": str(seed),
                              "grid_size": str(grid_size)})
    return labels, curves, meta
