import json
import math
import os
import tempfile
import unittest
from unittest.mock import Mock

import numpy as np
from numpy.testing import assert_allclose

from cnskspectral import adapters, exceptions, interfaces
from cnskspectral.domain import CheckResult, RunReport, Snapshot, TimeSeries
from cnskspectral.grid import make_grid, ScalarField, VectorField
from . import apptesting


class TemporaryDirectoryMixin:
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.directory = os.path.join(tmp.name, "run-1")
        self.filesystem = adapters.FileSystem(self.directory)

    def read(self, filename):
        with open(os.path.join(self.directory, filename)) as handle:
            return handle.read()


class FileSystemTest(TemporaryDirectoryMixin, unittest.TestCase):
    def test_directory_isnt_created_during_init(self):
        self.assertFalse(os.path.exists(self.directory))
        self.assertEqual(self.filesystem.listdir(), [])

    def test_directory_is_created_on_first_use(self):
        path = self.filesystem.path("report.txt")
        self.assertTrue(os.path.isdir(self.directory))
        self.assertEqual(path, os.path.join(self.directory, "report.txt"))


class SeriesStoreTest(TemporaryDirectoryMixin, unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.store = adapters.SeriesStore(self.filesystem)
        self.series = TimeSeries(
            "density-integral-kappa0=0.25",
            [0.1, 1.0],
            [[0.1, 1.0], [2.0 / 3.0, math.pi]],
            header=("T", "integral", "ratio_J0"),
        )

    def test_add_writes_csv(self):
        self.store.add(self.series)
        self.assertEqual(
            self.read("density-integral-kappa0-0-25.csv"),
            "T,integral,ratio_J0\n"
            "0.10000000000000001,0.10000000000000001,1\n"
            "1,0.66666666666666663,3.1415926535897931\n",
        )

    def test_fetch(self):
        self.store.add(self.series)
        fetched = self.store.fetch("density-integral-kappa0=0.25")
        self.assertEqual(fetched.header, self.series.header)
        assert_allclose(fetched.times, self.series.times, rtol=0)
        assert_allclose(fetched.column("ratio_J0"), self.series.column("ratio_J0"), rtol=0)

    def test_fetch_empty_series(self):
        self.store.add(TimeSeries("empty", [], np.zeros((0, 2)), header=("t", "a", "b")))
        self.assertEqual(len(self.store.fetch("empty")), 0)

    def test_add_raises_exception_if_already_exists(self):
        self.store.add(self.series)
        self.assertRaises(exceptions.AlreadyExists, self.store.add, self.series)

    def test_add_overwrites_when_allowed(self):
        self.store.add(self.series)
        self.filesystem.overwrite = True
        self.assertIsNone(self.store.add(self.series))

    def test_fetch_raises_exception_if_does_not_exist(self):
        self.assertRaises(exceptions.DoesNotExist, self.store.fetch, "roots")

    def test_update_raises_exception_if_does_not_exist(self):
        self.assertRaises(exceptions.DoesNotExist, self.store.update, self.series)

    def test_update(self):
        self.store.add(self.series)
        changed = TimeSeries(self.series.name, [0.1], [[1.0, 2.0]], header=self.series.header)
        self.store.update(changed)
        self.assertEqual(len(self.store.fetch(self.series.name)), 1)


class ReportStoreTest(TemporaryDirectoryMixin, unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.store = adapters.ReportStore(self.filesystem)
        self.report = RunReport(id="run-1", experiment="symbol-atlas", config={})
        self.report.add_check(CheckResult("root_residual", 0.0, 1e-12))
        self.report.finish()

    def test_add_writes_text_report(self):
        self.store.add(self.report)
        self.assertEqual(
            self.read("report.txt").splitlines(), list(self.report.lines())
        )
        self.assertEqual(json.loads(self.read("report.json"))["id"], "run-1")

    def test_fetch_returns_domain_instance(self):
        self.store.add(self.report)
        fetched = self.store.fetch("run-1")
        self.assertEqual(fetched.id(), "run-1")
        self.assertEqual(fetched.manifest, self.report.manifest)

    def test_fetch_unknown_run(self):
        self.store.add(self.report)
        self.assertRaises(exceptions.DoesNotExist, self.store.fetch, "run-2")


class SnapshotStoreTest(TemporaryDirectoryMixin, unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.store = adapters.SnapshotStore(self.filesystem)

    def test_small_grid_also_writes_csv(self):
        grid = make_grid(8, math.pi)
        values = np.arange(64).reshape(grid.shape) * (1 - 1j)
        self.store.add(Snapshot("green-phi-phi", ScalarField.spectral(grid, values)))
        self.assertEqual(self.filesystem.listdir(), ["green-phi-phi.bin", "green-phi-phi.field.csv"])
        lines = self.read("green-phi-phi.field.csv").splitlines()
        self.assertEqual(lines[0], "xi1,xi2,re0,im0")
        self.assertEqual(lines[2], "1,0,1,-1")
        fetched = self.store.fetch("green-phi-phi")
        assert_allclose(fetched.field.values, values, rtol=0)

    def test_large_grid_only_writes_binary(self):
        grid = make_grid(128, math.pi)
        self.store.add(Snapshot("momentum", VectorField.zeros(grid)))
        self.assertEqual(self.filesystem.listdir(), ["momentum.bin"])


class SessionTestMixin:
    """Testa a interface de `interfaces.Session`. Qualquer classe que implementar
    a interface mencionada deverá acompanhar um conjunto de testes que herdam
    deste mixin, conforme o exemplo:

        class AppTestingSessionTests(SessionTestMixin, unittest.TestCase):
            Session = apptesting.Session
    """

    def test_series_attribute(self):
        session = self.Session()
        self.assertIsInstance(session.series, interfaces.DataStore)

    def test_reports_attribute(self):
        session = self.Session()
        self.assertIsInstance(session.reports, interfaces.DataStore)

    def test_snapshots_attribute(self):
        session = self.Session()
        self.assertIsInstance(session.snapshots, interfaces.DataStore)

    def test_changes_attribute(self):
        session = self.Session()
        self.assertIsInstance(session.changes, interfaces.ChangesDataStore)

    def test_observe_returns_none(self):
        session = self.Session()
        self.assertIsNone(session.observe("test_event", lambda d: d))

    def test_notify_runs_callbacks(self):
        callback = Mock()
        session = self.Session()
        session.observe("test_event", callback)
        session.notify("test_event", "foo")
        callback.assert_called_once_with("foo", session)

    def test_observe_ignores_duplicated_event_callback_pairs(self):
        """Serão ignorados os registros duplicados de pares evento-callback.
        """
        callback = Mock()
        session = self.Session()
        session.observe("test_event", callback)
        session.observe("test_event", callback)
        session.notify("test_event", "foo")
        callback.assert_called_once_with("foo", session)

    def test_notify_logs_exceptions(self):
        session = self.Session()
        session.observe("test_event", lambda d, s: 1 / 0)
        with self.assertLogs("cnskspectral.interfaces") as log:
            self.assertIsNone(session.notify("test_event", "foo"))

        has_message = False
        for log_message in log.output:
            if (
                "ERROR:cnskspectral.interfaces:cannot run callback" in log_message
                and "Traceback (most recent call last):" in log_message
                and "ZeroDivisionError: division by zero" in log_message
            ):
                has_message = True
        self.assertTrue(has_message)


class AppTestingSessionTests(SessionTestMixin, unittest.TestCase):
    Session = apptesting.Session


class SessionTests(SessionTestMixin, TemporaryDirectoryMixin, unittest.TestCase):
    def Session(self):
        return adapters.Session(self.filesystem)


class ChangesStoreTestMixin:
    CHANGES = [
        {
            "timestamp": "2018-08-05T23:03:44.971230Z",
            "event": "experiment_started",
            "id": "run-1",
        },
        {
            "timestamp": "2018-08-05T23:03:47.891432Z",
            "event": "check_evaluated",
            "id": "run-1",
        },
        {
            "timestamp": "2018-08-05T23:06:47.621560Z",
            "event": "experiment_finished",
            "id": "run-1",
        },
    ]

    def test_add_returns_none(self):
        store = self.Store()
        self.assertIsNone(store.add(self.CHANGES[0]))

    def test_filter_returns_empty_list(self):
        store = self.Store()
        self.assertEqual(list(store.filter()), [])

    def test_filter_returns_list(self):
        store = self.Store()
        for change in self.CHANGES:
            store.add(change)
        self.assertEqual(list(store.filter()), self.CHANGES)

    def test_filter_since(self):
        store = self.Store()
        for change in self.CHANGES:
            store.add(change)
        self.assertEqual(
            list(store.filter(since="2018-08-05T23:03:47.891432Z")), self.CHANGES[1:]
        )

    def test_filter_limit(self):
        store = self.Store()
        for change in self.CHANGES:
            store.add(change)
        self.assertEqual(list(store.filter(limit=2)), self.CHANGES[:2])


class InMemoryChangesStoreTest(ChangesStoreTestMixin, unittest.TestCase):
    Store = apptesting.InMemoryChangesDataStore


class ChangesStoreTest(ChangesStoreTestMixin, TemporaryDirectoryMixin, unittest.TestCase):
    def Store(self):
        return adapters.ChangesStore(self.filesystem)

    def test_changes_are_json_lines(self):
        store = self.Store()
        store.add(self.CHANGES[0])
        self.assertEqual(json.loads(self.read("changes.jsonl").splitlines()[0]), self.CHANGES[0])
