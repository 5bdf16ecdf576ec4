from collections import OrderedDict

import numpy as np

from cnskspectral import interfaces, exceptions
from cnskspectral.grid import make_grid, ScalarField, VectorField
from cnskspectral.symbols import derive_params


class Session(interfaces.Session):
    def __init__(self):
        self._series = InMemorySeriesStore()
        self._reports = InMemoryReportStore()
        self._snapshots = InMemorySnapshotStore()
        self._changes = InMemoryChangesDataStore()

    @property
    def series(self):
        return self._series

    @property
    def reports(self):
        return self._reports

    @property
    def snapshots(self):
        return self._snapshots

    @property
    def changes(self):
        return self._changes


class InMemoryDataStore(interfaces.DataStore):
    def __init__(self):
        self._data_store = OrderedDict()

    def _id(self, data):
        return data.id()

    def add(self, data):
        id = self._id(data)
        if id in self._data_store:
            raise exceptions.AlreadyExists()
        else:
            self._data_store[id] = data

    def update(self, data):
        id = self._id(data)
        if id not in self._data_store:
            raise exceptions.DoesNotExist()
        self._data_store[id] = data

    def fetch(self, id):
        try:
            return self._data_store[id]
        except KeyError:
            raise exceptions.DoesNotExist() from None

    def __iter__(self):
        return iter(self._data_store.values())

    def names(self):
        return list(self._data_store)


class InMemorySeriesStore(InMemoryDataStore):
    def _id(self, data):
        return data.name


class InMemoryReportStore(InMemoryDataStore):
    pass


class InMemorySnapshotStore(InMemoryDataStore):
    pass


class InMemoryChangesDataStore(interfaces.ChangesDataStore):
    def __init__(self):
        self._data_store = []

    def add(self, change: dict):
        self._data_store.append(change)

    def filter(self, since: str = "", limit: int = 500):
        selected = [change for change in self._data_store if change["timestamp"] >= since]
        return selected[:limit]


def normalized_params(kappa0=0.25):
    return derive_params(0.5, 0.5, 1.0, kappa0)


def small_grid(n=16, half_width=2.0 * np.pi):
    return make_grid(n, half_width)


def single_mode_state(grid, k1=1, k2=0, phi=1.0, momentum=(0.0, 0.0)):
    """Estado com um único modo (e seu conjugado) não nulo."""
    phi_hat = np.zeros(grid.shape, dtype=complex)
    m_hat = np.zeros((2,) + grid.shape, dtype=complex)
    for sign in (1, -1):
        i2, i1 = grid.index_of(sign * k1, sign * k2)
        phi_hat[i2, i1] = phi
        m_hat[:, i2, i1] = momentum
    return ScalarField.spectral(grid, phi_hat), VectorField.spectral(grid, m_hat)


def config_text(experiment_id="log-growth", **sections):
    """Texto INI mínimo para `experiment_id`, com seções adicionais na forma
    ``secao={"chave": valor}``.
    """
    lines = ["[experiment]", "id = %s" % experiment_id]
    for key, value in sections.pop("experiment", {}).items():
        lines.append("%s = %s" % (key, value))
    for section, values in sections.items():
        lines.append("")
        lines.append("[%s]" % section)
        for key, value in values.items():
            lines.append("%s = %s" % (key, value))
    return "\n".join(lines) + "\n"


def fake_utcnow():
    return "2018-08-05T22:33:49.795151Z"
