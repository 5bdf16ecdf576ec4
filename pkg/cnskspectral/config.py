"""Leitura e validação das configurações de experimentos.

As configurações são arquivos INI com as seções ``[experiment]``, ``[params]``,
``[grid]``, ``[datum]``, ``[time]``, ``[output]`` e ``[tolerances]``. As seções
de configuração de logging são ignoradas pelo validador; qualquer outra seção
ou diretiva desconhecida é erro. Todos os erros encontrados são reportados de
uma só vez por meio de `exceptions.ConfigurationError`.
"""
import configparser
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Tuple

import colander
import plaster
from paste.deploy.converters import asbool

from . import exceptions
from .grid import make_grid
from .lowfreq import AnalyticDatum, DatumKind, Kernel
from .symbols import derive_params

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "parse_settings",
    "setup_logging",
]

LOGGER = logging.getLogger(__name__)

EXPERIMENTS = (
    "log-growth",
    "density-bound",
    "density-decay",
    "energy-identity",
    "high-freq-decay",
    "stokes-bound",
    "symbol-atlas",
    "cross-validate",
)

BOX_EXPERIMENTS = ("density-bound", "density-decay", "energy-identity", "stokes-bound")

GRID_EXPERIMENTS = BOX_EXPERIMENTS + ("high-freq-decay", "symbol-atlas", "cross-validate")

SECTIONS = ("experiment", "params", "grid", "datum", "time", "output", "tolerances")

LOGGING_SECTIONS = ("loggers", "handlers", "formatters")

LOGGING_PREFIXES = ("logger_", "handler_", "formatter_")

SETTINGS_DEFAULTS = ("here", "__file__")

DATUM_KINDS = tuple(kind.value for kind in DatumKind) + ("random", "zero")

DEFAULT_TOLERANCES = {
    "energy_defect": 1e-9,
    "saturation_ratio": 1.05,
    "decay_ratio": 2.0,
    "decay_constant": 10.0,
    "growth_ratio": 0.5,
    "log_r_squared": 0.999,
    "decade_agreement": 0.02,
    "hardy_fraction": 0.01,
    "oracle_rtol": 1e-4,
    "root_residual": 1e-10,
    "projector_tol": 1e-12,
    "semigroup_defect": 1e-10,
    "rate_rtol": 0.10,
    "stokes_identity": 1e-9,
    "stokes_constant": 1.0,
    "closure_residual": 1e-9,
    "phi_residual": 1e-10,
    "sandwich_spread": 10.0,
}

DEFAULT_SETTINGS = [
    ("output.directory", "CNSK_OUTPUT_DIR", str, "results"),
    ("output.overwrite", "CNSK_OUTPUT_OVERWRITE", asbool, True),
]


def parse_settings(settings, defaults=DEFAULT_SETTINGS):
    """Analisa e retorna as configurações de saída com base no arquivo .ini e
    env.

    As variáveis de ambiente possuem precedência em relação aos valores
    definidos no arquivo .ini.

    O argumento `defaults` deve receber uma lista associativa na forma:

      [
        (<diretiva de config>, <variável de ambiente>, <função de conversão>, <valor padrão>),
      ]
    """
    parsed = {}
    cfg = list(defaults)

    for name, envkey, convert, default in cfg:
        value = os.environ.get(envkey, settings.get(name, default))
        if convert is not None:
            value = convert(value)
        parsed[name] = value

    return parsed


def power_of_two(node, value):
    if value < 8 or value & (value - 1):
        raise colander.Invalid(node, "must be a power of two not smaller than 8, got %r" % value)


def positive(node, value):
    if not value > 0:
        raise colander.Invalid(node, "must be positive, got %r" % value)


class FloatList(colander.SchemaType):
    """Lista de reais separados por vírgula."""

    def serialize(self, node, appstruct):
        if appstruct is colander.null:
            return colander.null
        return ", ".join(repr(float(value)) for value in appstruct)

    def deserialize(self, node, cstruct):
        if cstruct is colander.null:
            return colander.null
        if isinstance(cstruct, (list, tuple)):
            items = list(cstruct)
        else:
            items = [item for item in str(cstruct).split(",") if item.strip()]
        try:
            return tuple(float(item) for item in items)
        except (TypeError, ValueError):
            raise colander.Invalid(node, '"%s" is not a comma separated list of numbers' % cstruct)


class StrictMapping(colander.MappingSchema):
    def schema_type(self):
        return colander.Mapping(unknown="raise")


class ExperimentSchema(StrictMapping):
    id = colander.SchemaNode(colander.String(), validator=colander.OneOf(EXPERIMENTS))
    seed = colander.SchemaNode(colander.Int(), missing=0, validator=colander.Range(min=0))
    run_id = colander.SchemaNode(colander.String(), missing="")
    kernel = colander.SchemaNode(
        colander.String(),
        missing=Kernel.HEAT_COMPARISON.value,
        validator=colander.OneOf([kernel.value for kernel in Kernel]),
    )


class ParamsSchema(StrictMapping):
    nu = colander.SchemaNode(colander.Float(), missing=0.5, validator=positive)
    nu_tilde = colander.SchemaNode(colander.Float(), missing=0.5)
    gamma = colander.SchemaNode(colander.Float(), missing=1.0, validator=positive)
    kappa0 = colander.SchemaNode(colander.Float(), missing=0.25, validator=colander.Range(min=0))
    kappa0_sweep = colander.SchemaNode(FloatList(), missing=())


class GridSchema(StrictMapping):
    n = colander.SchemaNode(colander.Int(), missing=64, validator=power_of_two)
    half_width = colander.SchemaNode(colander.Float(), missing=32.0 * math.pi, validator=positive)


class DatumSchema(StrictMapping):
    kind = colander.SchemaNode(
        colander.String(), missing=DatumKind.GAUSSIAN.value, validator=colander.OneOf(DATUM_KINDS)
    )
    amplitude = colander.SchemaNode(colander.Float(), missing=1.0)
    width = colander.SchemaNode(colander.Float(), missing=1.0, validator=positive)
    center_x = colander.SchemaNode(colander.Float(), missing=0.0)
    center_y = colander.SchemaNode(colander.Float(), missing=0.0)
    width_ratio = colander.SchemaNode(colander.Float(), missing=2.0, validator=positive)
    direction = colander.SchemaNode(colander.Float(), missing=0.0)
    target = colander.SchemaNode(
        colander.String(), missing="momentum", validator=colander.OneOf(["momentum", "density", "both"])
    )
    samples = colander.SchemaNode(colander.Int(), missing=1, validator=colander.Range(min=1))


class TimeSchema(StrictMapping):
    t_min = colander.SchemaNode(colander.Float(), missing=1.0, validator=positive)
    t_max = colander.SchemaNode(colander.Float(), missing=1e6, validator=positive)
    per_decade = colander.SchemaNode(colander.Int(), missing=8, validator=colander.Range(min=1))
    steps = colander.SchemaNode(colander.Int(), missing=4096, validator=colander.Range(min=16))
    fit_start = colander.SchemaNode(colander.Float(), missing=100.0, validator=positive)
    fit_end = colander.SchemaNode(colander.Float(), missing=colander.null)


class OutputSchema(StrictMapping):
    directory = colander.SchemaNode(colander.String(), missing="results")
    overwrite = colander.SchemaNode(colander.Boolean(), missing=True)


TolerancesSchema = type(
    "TolerancesSchema",
    (StrictMapping,),
    {
        name: colander.SchemaNode(colander.Float(), missing=default, validator=positive)
        for name, default in DEFAULT_TOLERANCES.items()
    },
)


class ConfigSchema(StrictMapping):
    experiment = ExperimentSchema()
    params = ParamsSchema()
    grid = GridSchema()
    datum = DatumSchema()
    time = TimeSchema()
    output = OutputSchema()
    tolerances = TolerancesSchema()


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuração validada de um experimento."""

    experiment: str
    seed: int = 0
    run_id: str = ""
    kernel: str = Kernel.HEAT_COMPARISON.value
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    datum: dict = field(default_factory=dict)
    time: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.run_id or self.experiment

    @property
    def kappa_values(self) -> Tuple[float, ...]:
        return tuple(self.params.get("kappa0_sweep") or (self.params["kappa0"],))

    def model_params(self, kappa0: float = None):
        return derive_params(
            self.params["nu"],
            self.params["nu_tilde"],
            self.params["gamma"],
            self.params["kappa0"] if kappa0 is None else kappa0,
        )

    def make_grid(self, length: float = 1.0):
        return make_grid(self.grid["n"], self.grid["half_width"] / length)

    @property
    def is_analytic(self) -> bool:
        return self.datum["kind"] in tuple(kind.value for kind in DatumKind)

    def analytic_datum(self) -> AnalyticDatum:
        return AnalyticDatum(
            kind=DatumKind(self.datum["kind"]),
            amplitude=self.datum["amplitude"],
            width=self.datum["width"],
            center=(self.datum["center_x"], self.datum["center_y"]),
            width_ratio=self.datum["width_ratio"],
            direction=self.datum["direction"],
        )

    def tolerance(self, name: str) -> float:
        return self.tolerances[name]

    def as_dict(self) -> dict:
        result = {
            "experiment": {
                "id": self.experiment,
                "seed": self.seed,
                "run_id": self.id,
                "kernel": self.kernel,
            },
        }
        for section in ("params", "grid", "datum", "time", "output", "tolerances"):
            values = dict(getattr(self, section))
            if "kappa0_sweep" in values:
                values["kappa0_sweep"] = ", ".join(repr(v) for v in values["kappa0_sweep"])
            result[section] = values
        return result


def _is_logging_section(name: str) -> bool:
    return name in LOGGING_SECTIONS or name.startswith(LOGGING_PREFIXES)


def _cross_check(config: dict) -> dict:
    """Validações que envolvem mais de uma diretiva."""
    errors = {}
    experiment = config["experiment"]["id"]
    time = config["time"]
    params = config["params"]
    grid = config["grid"]

    if not time["t_min"] < time["t_max"]:
        errors["time.t_min"] = "must be smaller than t_max (%r), got %r" % (
            time["t_max"], time["t_min"]
        )
    fit_end = time["fit_end"] if time["fit_end"] is not colander.null else time["t_max"]
    if experiment == "log-growth":
        if time["fit_start"] < 1:
            errors["time.fit_start"] = "must be at least 1, got %r" % time["fit_start"]
        if not (time["t_min"] <= time["fit_start"] < fit_end <= time["t_max"]):
            errors["time.fit_end"] = "fit window [%r, %r] must lie inside [%r, %r]" % (
                time["fit_start"], fit_end, time["t_min"], time["t_max"]
            )
    if experiment == "log-growth" and config["datum"]["kind"] == "random":
        errors["datum.kind"] = "log-growth requires an analytic datum, got random"
    if not params["nu"] + params["nu_tilde"] > 0:
        errors["params.nu_tilde"] = "nu + nu_tilde must be positive, got %r" % (
            params["nu"] + params["nu_tilde"]
        )
    for value in params["kappa0_sweep"]:
        if value < 0:
            errors["params.kappa0_sweep"] = "values must be non-negative, got %r" % value
    if experiment in BOX_EXPERIMENTS:
        horizon = 0.05 * (grid["half_width"] / math.pi) ** 2 / params["nu"]
        if time["t_max"] > horizon:
            errors["time.t_max"] = (
                "exceeds the box horizon guard T <= 0.05*(L/pi)**2/nu = %r, got %r"
                % (horizon, time["t_max"])
            )
    return errors


def validate(sections: dict) -> ExperimentConfig:
    """Valida o mapeamento ``{seção: {diretiva: texto}}`` e produz a
    `ExperimentConfig`. Levanta `exceptions.ConfigurationError` com todos os
    erros encontrados.
    """
    errors = {}
    data = {}
    for name, values in sections.items():
        if name == configparser.DEFAULTSECT or _is_logging_section(name):
            continue
        if name not in SECTIONS:
            errors[name] = "unknown section"
            continue
        data[name] = {k: v for k, v in values.items() if k not in SETTINGS_DEFAULTS}

    for name in SECTIONS[1:]:
        data.setdefault(name, {})
    output = parse_settings(
        {"output.%s" % key: value for key, value in data.get("output", {}).items()}
    )
    data["output"] = dict(
        data.get("output", {}),
        directory=output["output.directory"],
        overwrite="true" if output["output.overwrite"] else "false",
    )

    try:
        config = ConfigSchema().deserialize(data)
    except colander.Invalid as exc:
        errors.update(exc.asdict())
        config = None

    if config is not None:
        errors.update(_cross_check(config))

    if errors:
        raise exceptions.ConfigurationError(
            "cannot accept configuration: %s"
            % "; ".join("%s: %s" % (key, errors[key]) for key in sorted(errors)),
            errors,
        )

    experiment = config.pop("experiment")
    if config["time"]["fit_end"] is colander.null:
        config["time"]["fit_end"] = config["time"]["t_max"]
    result = ExperimentConfig(
        experiment=experiment["id"],
        seed=experiment["seed"],
        run_id=experiment["run_id"],
        kernel=experiment["kernel"],
        **config,
    )
    LOGGER.debug("validated configuration for experiment %s", result.experiment)
    return result


def parse_config(text: str) -> ExperimentConfig:
    """Valida o texto de uma configuração INI."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise exceptions.ConfigurationError(
            "cannot parse configuration: %s" % exc, {"": str(exc)}
        ) from None
    return validate({name: dict(parser.items(name, raw=True)) for name in parser.sections()})


def load_config(path: str) -> ExperimentConfig:
    """Lê as seções de `path` por meio do plaster e valida-as."""
    if not os.path.exists(path):
        raise exceptions.ConfigurationError(
            'cannot load configuration: file "%s" does not exist' % path, {"": "missing file"}
        )
    loader = plaster.get_loader(path)
    try:
        sections = {
            name: loader.get_settings(name)
            for name in loader.get_sections()
            if not _is_logging_section(name)
        }
    except configparser.Error as exc:
        raise exceptions.ConfigurationError(
            "cannot parse configuration: %s" % exc, {"": str(exc)}
        ) from None
    return validate(sections)


def setup_logging(path: str) -> None:
    """Configura o logging a partir das seções ``[loggers]``, ``[handlers]`` e
    ``[formatters]`` de `path`, quando presentes.
    """
    loader = plaster.get_loader(path)
    if "loggers" in loader.get_sections():
        loader.setup_logging()
    else:
        logging.basicConfig(level=logging.INFO)
