from copy import deepcopy
from dataclasses import dataclass, field, asdict
from datetime import datetime
from typing import Callable, Any, Tuple

import numpy as np
from slugify import slugify

from . import exceptions

__all__ = ["TimeSeries", "FitResult", "CheckResult", "RunReport", "Snapshot", "filename_for"]

FIELD_CSV_MAX_N = 64


def utcnow():
    return str(datetime.utcnow().isoformat() + "Z")


def format_value(value: Any) -> str:
    """Representação textual estável: floats com 17 algarismos significativos,
    booleanos em minúsculas.
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


class TimeSeries:
    """Série temporal com uma ou mais colunas de valores.

    A primeira coluna do cabeçalho nomeia o eixo (``t`` por padrão); as demais
    nomeiam as colunas de `values`.
    """

    def __init__(self, name: str, times, values, header: Tuple[str, ...] = ("t", "value")):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if times.ndim != 1 or values.shape[0] != times.shape[0]:
            raise ValueError(
                "cannot build time series %s: %d times for %d samples"
                % (name, times.shape[0], values.shape[0])
            )
        if len(header) != values.shape[1] + 1:
            raise ValueError(
                "cannot build time series %s: header %r does not match %d columns"
                % (name, header, values.shape[1])
            )
        self.name = str(name)
        self.times = times
        self._values = values
        self.header = tuple(header)

    def __len__(self):
        return self.times.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._values[:, 0]

    def column(self, label: str) -> np.ndarray:
        try:
            index = self.header.index(label) - 1
        except ValueError:
            raise KeyError(
                'cannot get column "%s" from series %s' % (label, self.name)
            ) from None
        return self.times if index < 0 else self._values[:, index]

    def window(self, t_lo: float, t_hi: float) -> "TimeSeries":
        mask = (self.times >= t_lo) & (self.times <= t_hi)
        return TimeSeries(self.name, self.times[mask], self._values[mask], self.header)

    def rows(self):
        for t, row in zip(self.times, self._values):
            yield (t,) + tuple(row)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    samples: int
    window: Tuple[float, float]

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CheckResult:
    """Resultado de uma verificação: valor calculado comparado ao limiar pela
    relação `relation` (``<=`` ou ``>=``).
    """

    name: str
    value: float
    threshold: float
    relation: str = "<="
    detail: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError("cannot build check %s: unknown relation %r" % (self.name, self.relation))
        value = float(self.value)
        if self.relation == "<=":
            passed = value <= self.threshold
        else:
            passed = value >= self.threshold
        object.__setattr__(self, "passed", bool(passed and np.isfinite(value)))

    def as_dict(self) -> dict:
        return asdict(self)


class ReportManifest:
    """Namespace para funções que manipulam o manifesto de um relatório de
    execução.
    """

    @staticmethod
    def new(run_id: str, experiment: str, config: dict, now: Callable[[], str] = utcnow) -> dict:
        timestamp = now()
        return {
            "id": str(run_id),
            "experiment": str(experiment),
            "created": timestamp,
            "updated": timestamp,
            "status": "running",
            "config": deepcopy(config),
            "checks": [],
            "values": {},
            "files": [],
            "provenance": {},
        }

    @staticmethod
    def add_check(manifest: dict, check: CheckResult, now: Callable[[], str] = utcnow) -> dict:
        if any(item["name"] == check.name for item in manifest["checks"]):
            raise exceptions.AlreadyExists(
                'cannot add check "%s" in report: the check already exists' % check.name
            )
        _manifest = deepcopy(manifest)
        _manifest["checks"].append(check.as_dict())
        _manifest["updated"] = now()
        return _manifest

    @staticmethod
    def set_value(manifest: dict, name: str, value: Any, now: Callable[[], str] = utcnow) -> dict:
        _manifest = deepcopy(manifest)
        _manifest["values"][name] = value
        _manifest["updated"] = now()
        return _manifest

    @staticmethod
    def add_file(manifest: dict, filename: str, now: Callable[[], str] = utcnow) -> dict:
        if filename in manifest["files"]:
            raise exceptions.AlreadyExists(
                'cannot add file "%s" in report: the file already exists' % filename
            )
        _manifest = deepcopy(manifest)
        _manifest["files"].append(filename)
        _manifest["updated"] = now()
        return _manifest

    @staticmethod
    def set_provenance(manifest: dict, name: str, value: Any, now: Callable[[], str] = utcnow) -> dict:
        _manifest = deepcopy(manifest)
        _manifest["provenance"][name] = value
        _manifest["updated"] = now()
        return _manifest

    @staticmethod
    def finish(manifest: dict, error: str = "", now: Callable[[], str] = utcnow) -> dict:
        _manifest = deepcopy(manifest)
        if error:
            _manifest["status"] = "failed"
            _manifest["error"] = str(error)
        elif all(check["passed"] for check in _manifest["checks"]):
            _manifest["status"] = "passed"
        else:
            _manifest["status"] = "check-failed"
        _manifest["updated"] = now()
        return _manifest


def _flatten(prefix: str, value: Any):
    if isinstance(value, dict):
        for key in sorted(value):
            yield from _flatten("%s.%s" % (prefix, key) if prefix else str(key), value[key])
    else:
        yield prefix, value


class RunReport:
    """
    RunReport representa o resultado de uma execução de experimento: eco da
    configuração, verificações, valores calculados, arquivos emitidos e
    proveniência.
    """

    def __init__(self, id: str = None, experiment: str = "", config: dict = None, manifest: dict = None):
        assert any([id, manifest])
        self.manifest = manifest or ReportManifest.new(id, experiment, config or {})

    def id(self):
        return self.manifest.get("id", "")

    @property
    def manifest(self):
        return deepcopy(self._manifest)

    @manifest.setter
    def manifest(self, value: dict):
        self._manifest = value

    @property
    def experiment(self):
        return self._manifest["experiment"]

    @property
    def status(self):
        return self._manifest["status"]

    @property
    def checks(self):
        return [dict(check) for check in self._manifest["checks"]]

    @property
    def values(self):
        return deepcopy(self._manifest["values"])

    @property
    def files(self):
        return list(self._manifest["files"])

    @property
    def provenance(self):
        return deepcopy(self._manifest["provenance"])

    @property
    def error(self) -> str:
        return self._manifest.get("error", "")

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    @property
    def failed(self) -> bool:
        return self.status == "failed"

    def add_check(self, check: CheckResult) -> None:
        self.manifest = ReportManifest.add_check(self._manifest, check)

    def set_value(self, name: str, value: Any) -> None:
        self.manifest = ReportManifest.set_value(self._manifest, name, value)

    def add_file(self, filename: str) -> None:
        self.manifest = ReportManifest.add_file(self._manifest, filename)

    def set_provenance(self, name: str, value: Any) -> None:
        self.manifest = ReportManifest.set_provenance(self._manifest, name, value)

    def finish(self, error: str = "") -> None:
        self.manifest = ReportManifest.finish(self._manifest, error=error)

    def lines(self):
        """Linhas ``chave=valor`` do relatório textual."""
        manifest = self._manifest
        yield "run.id=%s" % manifest["id"]
        yield "experiment=%s" % manifest["experiment"]
        yield "status=%s" % manifest["status"]
        if manifest.get("error"):
            yield "error=%s" % manifest["error"]
        for key, value in _flatten("config", manifest["config"]):
            yield "%s=%s" % (key, format_value(value))
        for check in manifest["checks"]:
            for attr in ("value", "threshold", "relation", "passed", "detail"):
                yield "check.%s.%s=%s" % (check["name"], attr, format_value(check[attr]))
        for key, value in _flatten("value", manifest["values"]):
            yield "%s=%s" % (key, format_value(value))
        for index, filename in enumerate(manifest["files"]):
            yield "file.%d=%s" % (index, filename)
        for key, value in _flatten("provenance", manifest["provenance"]):
            yield "%s=%s" % (key, format_value(value))


@dataclass(frozen=True)
class Snapshot:
    """Campo nomeado para persistência binária."""

    name: str
    field: Any

    def id(self):
        return self.name


def filename_for(name: str, suffix: str) -> str:
    """Nome de arquivo derivado de `name` por slugify."""
    slug = slugify(str(name))
    if not slug:
        raise ValueError('cannot derive file name from "%s"' % name)
    return slug + suffix
