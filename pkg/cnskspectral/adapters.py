"""Este módulo deve conter classes concretas que implementam as interfaces
definidas no módulo `interfaces`, ou seja, adaptadores.

Há apenas a implementação em sistema de arquivos: cada execução escreve em um
diretório próprio os arquivos CSV das séries, o relatório ``report.txt``, os
snapshots binários de campos e o diário de eventos ``changes.jsonl``.
"""
import csv
import json
import logging
import os

import numpy as np

from . import interfaces
from . import exceptions
from . import domain
from .domain import filename_for, FIELD_CSV_MAX_N
from .grid import snapshot_bytes, snapshot_from_bytes, field_rows


LOGGER = logging.getLogger(__name__)

REPORT_FILENAME = "report.txt"
MANIFEST_FILENAME = "report.json"
CHANGES_FILENAME = "changes.jsonl"


class FileSystem:
    """Abstrai o diretório de saída de maneira que nenhum outro objeto do
    código necessita conhecer caminhos ou a política de sobrescrita.
    """

    def __init__(self, directory, overwrite=False):
        self._directory = directory
        self.overwrite = bool(overwrite)
        self._created = False

    @property
    def directory(self):
        """Posterga a criação do diretório até o seu primeiro uso.
        """
        if not self._created:
            os.makedirs(self._directory, exist_ok=True)
            self._created = True
            LOGGER.debug('output directory ready: "%s"', self._directory)
        return self._directory

    def path(self, filename):
        return os.path.join(self.directory, filename)

    def exists(self, filename):
        return os.path.exists(os.path.join(self._directory, filename))

    def listdir(self):
        if not os.path.isdir(self._directory):
            return []
        return sorted(os.listdir(self._directory))


class Session(interfaces.Session):
    """Implementação de `interfaces.Session` para armazenamento em sistema de
    arquivos.
    """

    def __init__(self, filesystem):
        self._filesystem = filesystem

    @property
    def series(self):
        return SeriesStore(self._filesystem)

    @property
    def reports(self):
        return ReportStore(self._filesystem)

    @property
    def snapshots(self):
        return SnapshotStore(self._filesystem)

    @property
    def changes(self):
        return ChangesStore(self._filesystem)


class BaseStore(interfaces.DataStore):
    """Implementação abstrata de `interfaces.DataStore` em arquivos. Subclasses
    definem `_filename`, `_write` e `_read`.
    """

    def __init__(self, filesystem):
        self._fs = filesystem

    def _id(self, data) -> str:
        return data.id()

    def _filename(self, id: str) -> str:
        raise NotImplementedError()

    def _write(self, data) -> None:
        raise NotImplementedError()

    def _read(self, id: str):
        raise NotImplementedError()

    def add(self, data) -> None:
        id = self._id(data)
        filename = self._filename(id)
        if self._fs.exists(filename) and not self._fs.overwrite:
            raise exceptions.AlreadyExists(
                "cannot add data with id " '"%s": the file "%s" already exists' % (id, filename)
            )
        self._write(data)
        LOGGER.debug('wrote "%s"', filename)

    def update(self, data) -> None:
        id = self._id(data)
        if not self._fs.exists(self._filename(id)):
            raise exceptions.DoesNotExist(
                "cannot update data with id " '"%s": data does not exist' % id
            )
        self._write(data)

    def fetch(self, id: str):
        if not self._fs.exists(self._filename(id)):
            raise exceptions.DoesNotExist(
                "cannot fetch data with id " '"%s": data does not exist' % id
            )
        return self._read(id)


class SeriesStore(BaseStore):
    """Séries em ``<slug>.csv``, floats com 17 algarismos significativos."""

    def _id(self, data):
        return data.name

    def _filename(self, id):
        return filename_for(id, ".csv")

    def _write(self, data):
        with open(self._fs.path(self._filename(data.name)), "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(data.header)
            for row in data.rows():
                writer.writerow([domain.format_value(float(value)) for value in row])

    def _read(self, id):
        with open(self._fs.path(self._filename(id)), newline="") as handle:
            reader = csv.reader(handle)
            header = tuple(next(reader))
            rows = [[float(value) for value in row] for row in reader]
        times = [row[0] for row in rows]
        values = np.array([row[1:] for row in rows], dtype=float).reshape(len(rows), len(header) - 1)
        return domain.TimeSeries(id, times, values, header=header)


class ReportStore(BaseStore):
    """Relatório textual ``report.txt`` e o manifesto em JSON ao lado, usado
    para recuperação.
    """

    def _filename(self, id):
        return REPORT_FILENAME

    def _write(self, data):
        with open(self._fs.path(REPORT_FILENAME), "w") as handle:
            for line in data.lines():
                handle.write(line + "\n")
        with open(self._fs.path(MANIFEST_FILENAME), "w") as handle:
            json.dump(data.manifest, handle, sort_keys=True, indent=2, default=str)

    def _read(self, id):
        with open(self._fs.path(MANIFEST_FILENAME)) as handle:
            manifest = json.load(handle)
        if manifest.get("id") != id:
            raise exceptions.DoesNotExist(
                "cannot fetch data with id " '"%s": data does not exist' % id
            )
        return domain.RunReport(manifest=manifest)


class SnapshotStore(BaseStore):
    """Snapshots binários ``<slug>.bin``; grades com ``n <= 64`` também
    ganham ``<slug>.field.csv``.
    """

    def _filename(self, id):
        return filename_for(id, ".bin")

    def _write(self, data):
        with open(self._fs.path(self._filename(data.name)), "wb") as handle:
            handle.write(snapshot_bytes(data.field))
        if data.field.grid.n <= FIELD_CSV_MAX_N:
            with open(self._fs.path(filename_for(data.name, ".field.csv")), "w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                rows = field_rows(data.field)
                writer.writerow(next(rows))
                for row in rows:
                    writer.writerow([domain.format_value(float(value)) for value in row])

    def _read(self, id):
        with open(self._fs.path(self._filename(id)), "rb") as handle:
            return domain.Snapshot(id, snapshot_from_bytes(handle.read()))


class ChangesStore(interfaces.ChangesDataStore):
    """Implementação de `interfaces.ChangesDataStore` como arquivo JSON lines.
    """

    def __init__(self, filesystem):
        self._fs = filesystem

    def add(self, change: dict):
        with open(self._fs.path(CHANGES_FILENAME), "a") as handle:
            handle.write(json.dumps(change, sort_keys=True, default=str) + "\n")

    def filter(self, since: str = "", limit: int = 500):
        if not self._fs.exists(CHANGES_FILENAME):
            return []
        with open(self._fs.path(CHANGES_FILENAME)) as handle:
            changes = [json.loads(line) for line in handle if line.strip()]
        selected = [change for change in changes if change["timestamp"] >= since]
        return sorted(selected, key=lambda change: change["timestamp"])[:limit]
