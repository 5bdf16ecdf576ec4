from typing import Callable
import dataclasses
import functools
import logging
import math
import time
from enum import Enum, auto

import numpy as np

from . import __version__
from . import exceptions
from . import data
from . import lowfreq
from . import morawetz
from . import semigroup
from . import symbols
from .config import EXPERIMENTS, ExperimentConfig, parse_config, load_config
from .domain import (
    CheckResult,
    RunReport,
    Snapshot,
    TimeSeries,
    filename_for,
    utcnow,
    FIELD_CSV_MAX_N,
)
from .grid import ScalarField, VectorField, l2_norm, inner
from .interfaces import Session

__all__ = ["get_handlers"]

LOGGER = logging.getLogger(__name__)

CAPTURED_ERRORS = (
    exceptions.NonRetryableError,
    exceptions.RetryableError,
    ArithmeticError,
    ValueError,
)

ROOT_SAMPLES = 10000


class Events(Enum):
    """Eventos emitidos por instâncias de `CommandHandler`.
    """

    EXPERIMENT_STARTED = auto()
    CHECK_EVALUATED = auto()
    SERIES_RECORDED = auto()
    EXPERIMENT_FINISHED = auto()
    EXPERIMENT_FAILED = auto()


class CommandHandler:
    def __init__(self, Session: Callable[[], Session]):
        self.Session = Session


class Run:
    """Contexto de uma execução: sessão, relatório e configuração."""

    def __init__(self, session: Session, report: RunReport, config: ExperimentConfig):
        self.session = session
        self.report = report
        self.config = config

    def check(self, name, value, threshold, relation="<=", detail=""):
        result = CheckResult(name, float(value), float(threshold), relation, detail)
        self.report.add_check(result)
        LOGGER.info(
            "check %s: %r %s %r -> %s",
            name, result.value, relation, result.threshold,
            "passed" if result.passed else "failed",
        )
        self.session.notify(
            Events.CHECK_EVALUATED,
            {"id": self.report.id(), "subject": name, "check": result},
        )
        return result

    def series(self, series: TimeSeries):
        self.session.series.add(series)
        self.report.add_file(filename_for(series.name, ".csv"))
        self.session.notify(
            Events.SERIES_RECORDED,
            {"id": self.report.id(), "subject": series.name, "series": series},
        )

    def snapshot(self, name: str, field):
        self.session.snapshots.add(Snapshot(name, field))
        self.report.add_file(filename_for(name, ".bin"))
        if field.grid.n <= FIELD_CSV_MAX_N:
            self.report.add_file(filename_for(name, ".field.csv"))

    def value(self, name, value):
        self.report.set_value(name, value)

    def normalized(self, kappa0: float = None):
        """Parâmetros normalizados e o reescalonamento, registrado no
        relatório.
        """
        params, rescaling = symbols.normalize_params(self.config.model_params(kappa0))
        self.report.set_value("rescaling", rescaling.as_dict())
        return params, rescaling

    def horizons(self, rescaling):
        t_min = rescaling.horizon(self.config.time["t_min"])
        t_max = rescaling.horizon(self.config.time["t_max"])
        return t_min, t_max


def kappa_tag(kappa0: float) -> str:
    return "kappa0=%s" % format(kappa0, "g")


def decade_ladder(t_min: float, t_max: float) -> np.ndarray:
    ladder = lowfreq.log_time_grid(t_min, t_max, per_decade=1)
    if ladder.size < 2:
        raise exceptions.ParameterDomainError(
            "cannot build horizons: at least one decade between %r and %r is required"
            % (t_min, t_max)
        )
    return ladder


def initial_data(config: ExperimentConfig, grid, rescaling, index: int = 0):
    """Par ``(φ₀, m₀)`` na grade normalizada de acordo com a seção
    ``[datum]``.
    """
    kind = config.datum["kind"]
    target = config.datum["target"]
    phi0, m0 = ScalarField.zeros(grid), VectorField.zeros(grid)
    if kind == "zero":
        return phi0, m0
    if kind == "random":
        phi, m = data.admissible_state(grid, config.seed + index)
    else:
        datum = config.analytic_datum().scaled(rescaling.length)
        phi, m = datum.sample(grid), datum.vector(grid)
    if target in ("density", "both"):
        phi0 = phi
    if target in ("momentum", "both"):
        m0 = m
    return phi0, m0


def support_radius(config: ExperimentConfig, grid, rescaling) -> float:
    if config.is_analytic:
        return config.analytic_datum().scaled(rescaling.length).support_radius
    return grid.half_width / 2.0


def is_admissible(phi0, m0) -> bool:
    try:
        morawetz.check_admissible(phi0, m0)
    except exceptions.InadmissibleData:
        return False
    return True


class BaseRunExperiment(CommandHandler):
    """Implementação abstrata de comando que executa um experimento.

    Subclasses implementam `_evaluate`, que registra séries, valores e
    verificações no contexto `Run`. Erros dos verificadores são capturados e o
    relatório é marcado como ``failed``.

    :param config: instância de `config.ExperimentConfig` já validada.
    """

    EXPERIMENT = ""

    def _evaluate(self, run: Run) -> None:
        raise NotImplementedError()

    def _persist(self, session: Session, report: RunReport) -> None:
        session.reports.add(report)

    def _notify(self, session: Session, event, report: RunReport) -> None:
        session.notify(
            event,
            {"id": report.id(), "subject": report.experiment, "report": report},
        )

    def __call__(self, config: ExperimentConfig) -> RunReport:
        if config.experiment != self.EXPERIMENT:
            raise exceptions.ConfigurationError(
                "cannot run %s: configuration is for %s" % (self.EXPERIMENT, config.experiment),
                {"experiment.id": "expected %s" % self.EXPERIMENT},
            )
        session = self.Session()
        report = RunReport(id=config.id, experiment=config.experiment, config=config.as_dict())
        report.set_provenance("version", __version__)
        report.set_provenance("started", utcnow())
        run = Run(session, report, config)
        LOGGER.info('starting experiment "%s" (run %s)', config.experiment, config.id)
        self._notify(session, Events.EXPERIMENT_STARTED, report)
        started = time.perf_counter()
        try:
            self._evaluate(run)
        except CAPTURED_ERRORS as exc:
            LOGGER.info('experiment "%s" failed: %s', config.experiment, exc)
            report.finish(error="%s: %s" % (type(exc).__name__, exc))
            event = Events.EXPERIMENT_FAILED
        else:
            report.finish()
            event = Events.EXPERIMENT_FINISHED
        report.set_provenance("wall_time", time.perf_counter() - started)
        self._persist(session, report)
        LOGGER.info('experiment "%s" finished with status %s', config.experiment, report.status)
        self._notify(session, event, report)
        return report


class RunLogGrowth(BaseRunExperiment):
    """Acumulação contínua de baixa frequência: crescimento logarítmico para
    dados com ``m̂₀(0) ≠ 0`` e limitação para o dado companheiro de média nula;
    comparação entre os núcleos K1 e calor.
    """

    EXPERIMENT = "log-growth"

    def _hardy_checks(self, run, series, prefix):
        increments = [value for _, _, value in lowfreq.decade_increments(series, "cumulative")]
        if len(increments) < 2:
            raise exceptions.DegenerateFit(
                "cannot compare decade increments: fewer than two decades in the series"
            )
        rises = sum(1 for a, b in zip(increments[:-1], increments[1:]) if b > a)
        first = increments[0]
        fraction = increments[-1] / first if first > 0 else 0.0
        run.check("%s.monotone" % prefix, rises, 0, "<=", "decade increments must decrease")
        run.check(
            "%s.fraction" % prefix,
            fraction,
            run.config.tolerance("hardy_fraction"),
            "<=",
            "last decade increment relative to the first",
        )

    def _record_increments(self, run, series):
        increments = lowfreq.decade_increments(series, "cumulative")
        if increments:
            run.series(
                TimeSeries(
                    "%s-decades" % series.name,
                    [end for _, end, _ in increments],
                    [value for _, _, value in increments],
                    header=("t", "increment"),
                )
            )
        return [value for _, _, value in increments]

    def _evaluate(self, run):
        config = run.config
        params, rescaling = run.normalized()
        if config.datum["kind"] == "zero":
            datum = lowfreq.AnalyticDatum(lowfreq.DatumKind.GAUSSIAN, amplitude=0.0)
        else:
            datum = config.analytic_datum().scaled(rescaling.length)
        kernel = lowfreq.Kernel(config.kernel)
        c1 = symbols.lowfreq_radius(params)
        t_min, t_max = run.horizons(rescaling)
        t_grid = lowfreq.log_time_grid(t_min, t_max, config.time["per_decade"])
        window = (
            rescaling.horizon(config.time["fit_start"]),
            rescaling.horizon(config.time["fit_end"]),
        )

        q1, q2 = lowfreq.q_constants(c1)
        p1, p2 = lowfreq.q_constants_first_moment(c1)
        scale = lowfreq.C_OMEGA * datum.hat_at_zero ** 2
        run.value("c1", c1)
        run.value("c_omega", lowfreq.C_OMEGA)
        run.value("hat_at_zero", datum.hat_at_zero)
        run.value("q_constants", {"q1": q1, "q2": q2})
        run.value("first_moment_constants", {"q1": p1, "q2": p2})
        run.value(
            "slope_bracket",
            {"lower": scale * p1, "upper": scale * p2, "q_lower": scale * q1, "q_upper": scale * q2},
        )

        series = lowfreq.accumulate_I(datum, kernel, params, t_grid, c1=c1)
        run.series(series)
        increments = self._record_increments(run, series)

        if datum.zero_mean:
            self._hardy_checks(run, series, "hardy")
        else:
            fit = lowfreq.fit_log_growth(series, window, "cumulative")
            run.value("fit", fit.as_dict())
            run.check("log_r_squared", fit.r_squared, config.tolerance("log_r_squared"), ">=")
            last = increments[-3:]
            if len(last) < 2:
                raise exceptions.DegenerateFit(
                    "cannot compare decade increments: fewer than two decades in the series"
                )
            spread = (max(last) - min(last)) / max(abs(value) for value in last)
            run.check(
                "decade_agreement", spread, config.tolerance("decade_agreement"), "<=",
                "spread of the last %d decade increments" % len(last),
            )
            if kernel is lowfreq.Kernel.HEAT_COMPARISON:
                run.check("slope_lower", fit.slope, scale * p1, ">=")
                run.check("slope_upper", fit.slope, scale * p2, "<=")

            companion = dataclasses.replace(datum, kind=lowfreq.DatumKind.GAUSSIAN_DIFFERENCE)
            companion_series = lowfreq.accumulate_I(companion, kernel, params, t_grid, c1=c1)
            run.series(companion_series)
            self._record_increments(run, companion_series)
            self._hardy_checks(run, companion_series, "hardy")

        sandwich_times = np.array(
            [t for t in t_grid if math.isclose(math.log10(t), round(math.log10(t)), abs_tol=1e-9)]
        )
        if datum.hat_at_zero > 0 and sandwich_times.size:
            ratios = lowfreq.sandwich_ratios(datum, params, sandwich_times, c1=c1)
            run.series(TimeSeries("sandwich", sandwich_times, ratios, header=("t", "ratio")))
            run.check(
                "sandwich_spread",
                float(np.max(ratios) / np.min(ratios)),
                config.tolerance("sandwich_spread"),
                "<=",
                "max/min of K1_exact over heat_comparison",
            )


class RunDensityBound(BaseRunExperiment):
    """``∫₀ᵀ‖φ‖²`` por década de horizontes: saturação para dados admissíveis
    e crescimento, descontado o modo ``ξ = 0``, para dados de média não nula.
    """

    EXPERIMENT = "density-bound"

    def _evaluate(self, run):
        config = run.config
        for kappa0 in config.kappa_values:
            tag = kappa_tag(kappa0)
            params, rescaling = run.normalized(kappa0)
            grid = config.make_grid(rescaling.length)
            t_min, t_max = run.horizons(rescaling)
            morawetz.horizon_guard(grid, params.nu, t_max)
            phi0, m0 = initial_data(config, grid, rescaling)
            horizons = decade_ladder(t_min, t_max)
            admissible = is_admissible(phi0, m0)
            bound = morawetz.check_density_bound(
                phi0, m0, params, horizons, require_admissible=False
            )
            series = TimeSeries(
                "density-integral-%s" % tag,
                bound.horizons,
                np.column_stack([bound.integrals, bound.zero_mode, bound.mean_free, bound.ratios]),
                header=("T", "integral", "zero_mode", "mean_free", "ratio_J0"),
            )
            run.series(series)
            summary = {
                "J0": bound.J0,
                "admissible": admissible,
                "zero_mode_share": bound.zero_mode[-1] / bound.integrals[-1]
                if bound.integrals[-1] > 0
                else 0.0,
                "wraparound_margin": grid.wraparound_margin(
                    support_radius(config, grid, rescaling), params.gamma, t_max
                ),
            }
            if admissible:
                run.value("density_bound.%s" % tag, summary)
                run.check(
                    "saturation[%s]" % tag,
                    bound.saturation[-1],
                    config.tolerance("saturation_ratio"),
                    "<=",
                    "ratio of the last two decade horizons",
                )
                continue
            increments = [
                value for _, _, value in lowfreq.decade_increments(series, "mean_free")
            ]
            if len(increments) < 2:
                raise exceptions.DegenerateFit(
                    "cannot compare decade increments: fewer than two decades between %r and %r"
                    % (t_min, t_max)
                )
            summary["decade_increments"] = increments
            run.value("density_bound.%s" % tag, summary)
            run.check(
                "growth[%s]" % tag,
                min(b / a if a > 0 else 0.0 for a, b in zip(increments[:-1], increments[1:])),
                config.tolerance("growth_ratio"),
                ">=",
                "smallest ratio of consecutive decade increments without the zero mode",
            )


class RunDensityDecay(BaseRunExperiment):
    """``(1+t)‖φ(t)‖²`` limitado ao longo da execução."""

    EXPERIMENT = "density-decay"

    def _evaluate(self, run):
        config = run.config
        worst = 0.0
        for kappa0 in config.kappa_values:
            tag = kappa_tag(kappa0)
            params, rescaling = run.normalized(kappa0)
            grid = config.make_grid(rescaling.length)
            t_min, t_max = run.horizons(rescaling)
            morawetz.horizon_guard(grid, params.nu, t_max)
            phi0, m0 = initial_data(config, grid, rescaling)
            t_grid = np.concatenate(
                [[0.0], lowfreq.log_time_grid(t_min, t_max, config.time["per_decade"])]
            )
            decay = morawetz.check_density_decay(phi0, m0, params, t_grid)
            run.series(
                TimeSeries(
                    "density-decay-%s" % tag, decay.times, decay.values,
                    header=("t", "weighted_norm"),
                )
            )
            run.value(
                "density_decay.%s" % tag,
                {
                    "J0": decay.J0,
                    "sup": decay.sup,
                    "sup_time": decay.sup_time,
                    "last_decade_max": decay.last_decade_max,
                },
            )
            run.check(
                "decay_ratio[%s]" % tag, decay.decay_ratio, config.tolerance("decay_ratio"), "<=",
                "last decade max over the preceding decade max",
            )
            run.check(
                "decay_constant[%s]" % tag,
                decay.constant,
                config.tolerance("decay_constant"),
                "<=",
                "sup of (1+t)|phi|^2 over J0",
            )
            worst = max(worst, decay.constant)
        run.value("decay_constant", worst)


class RunEnergyIdentity(BaseRunExperiment):
    """Identidade de energia da equação escalar e contração do semigrupo em
    estados aleatórios.
    """

    EXPERIMENT = "energy-identity"

    def _evaluate(self, run):
        config = run.config
        for kappa0 in config.kappa_values:
            tag = kappa_tag(kappa0)
            params, rescaling = run.normalized(kappa0)
            grid = config.make_grid(rescaling.length)
            t_min, t_max = run.horizons(rescaling)
            morawetz.horizon_guard(grid, params.nu, t_max)
            t_grid = np.concatenate(
                [[0.0], lowfreq.log_time_grid(t_min, t_max, config.time["per_decade"])]
            )
            worst_energy = worst_contraction = 0.0
            for index in range(config.datum["samples"]):
                phi0, m0 = initial_data(config, grid, rescaling, index)
                worst_energy = max(
                    worst_energy, morawetz.energy_identity_check(phi0, m0, params, t_grid)
                )
                state = semigroup.SpectralState(phi0, m0, params)
                worst_contraction = max(
                    worst_contraction, semigroup.contraction_defect(state, t_grid)
                )
                if index == 0:
                    ledgers = morawetz.energy_ledgers(phi0, m0, params, t_grid)
                    run.series(
                        TimeSeries(
                            "energy-ledger-%s" % tag,
                            t_grid,
                            [
                                (l.kinetic, l.gradient, l.capillary, l.dissipated, l.balance)
                                for l in ledgers
                            ],
                            header=("t", "kinetic", "gradient", "capillary", "dissipated", "balance"),
                        )
                    )
            tolerance = config.tolerance("energy_defect")
            run.check("energy_defect[%s]" % tag, worst_energy, tolerance, "<=")
            run.check("contraction[%s]" % tag, worst_contraction, tolerance, "<=")


class RunHighFreqDecay(BaseRunExperiment):
    """Taxa exponencial ajustada de ``‖E_∞u(t)‖`` comparada ao maior expoente
    presente no platô.
    """

    EXPERIMENT = "high-freq-decay"

    def _evaluate(self, run):
        config = run.config
        params, rescaling = run.normalized()
        grid = config.make_grid(rescaling.length)
        _, t_max = run.horizons(rescaling)
        phi0, m0 = initial_data(config, grid, rescaling)
        state = semigroup.high_freq_part(semigroup.SpectralState(phi0, m0, params))
        rate = semigroup.plateau_rate(state)
        fit = semigroup.decay_rate_fit(state, t_max)
        times = np.linspace(0.0, t_max, 65)
        norms = [semigroup.energy_norm(semigroup.evolve(state, t)) for t in times]
        run.series(TimeSeries("high-freq-norm", times, norms, header=("t", "energy_norm")))
        run.value("plateau_rate", rate)
        run.value("fit", fit.as_dict())
        run.check("negative_rate", fit.slope, 0.0, "<=")
        run.check(
            "rate_agreement",
            abs(fit.slope - rate) / abs(rate),
            config.tolerance("rate_rtol"),
            "<=",
            "fitted slope against the slowest plateau exponent",
        )


class RunStokesBound(BaseRunExperiment):
    """Fluxo de Stokes: identidade de energia, saturação e a constante de
    ``∫₀ᵀ‖u‖² ≤ C‖m₀‖²_{L¹}`` comum a todas as amostras.
    """

    EXPERIMENT = "stokes-bound"

    def _stream(self, config, grid, rescaling, index):
        kind = config.datum["kind"]
        if kind == "zero":
            return ScalarField.zeros(grid)
        if kind == "random":
            return data.random_field(grid, data.SplitMix64(config.seed + index), zero_mean=True)
        datum = config.analytic_datum()
        datum = dataclasses.replace(datum, width=datum.width * (1.0 + 0.5 * index))
        return datum.scaled(rescaling.length).sample(grid)

    def _evaluate(self, run):
        config = run.config
        params, rescaling = run.normalized()
        grid = config.make_grid(rescaling.length)
        t_min, t_max = run.horizons(rescaling)
        morawetz.horizon_guard(grid, params.nu, t_max)
        horizons = decade_ladder(t_min, t_max)

        identity = constant = 0.0
        saturation = 1.0
        for index in range(config.datum["samples"]):
            m0 = data.solenoidal_datum(self._stream(config, grid, rescaling, index))
            bounds = [morawetz.check_stokes_bound(m0, params.nu, T) for T in horizons]
            run.series(
                TimeSeries(
                    "stokes-sample-%d" % index,
                    horizons,
                    [(b.lhs, b.ratio) for b in bounds],
                    header=("T", "lhs", "ratio"),
                )
            )
            identity = max(identity, max(b.identity_defect for b in bounds))
            ratios = [b.ratio for b in bounds if math.isfinite(b.ratio)]
            constant = max([constant] + ratios)
            if bounds[-2].lhs > 0:
                saturation = max(saturation, bounds[-1].lhs / bounds[-2].lhs)
        run.check("stokes_identity", identity, config.tolerance("stokes_identity"), "<=")
        run.check("stokes_constant", constant, config.tolerance("stokes_constant"), "<=")
        run.check("saturation", saturation, config.tolerance("saturation_ratio"), "<=")


class RunSymbolAtlas(BaseRunExperiment):
    """Raízes características, pesos de corte e projetores de Helmholtz."""

    EXPERIMENT = "symbol-atlas"

    def _evaluate(self, run):
        config = run.config
        params, rescaling = run.normalized()
        radii = symbols.cutoff_radii(params)
        run.value("regime", params.regime.value)
        run.value("cutoff_radii", radii._asdict())
        run.value("c1", symbols.lowfreq_radius(params))

        xi = np.linspace(0.0, 2.0 * radii.high_outer, 257)
        roots = symbols.lambda_pm(xi * xi, params)
        weights = symbols.cutoff_weights(xi, params)
        run.series(
            TimeSeries(
                "roots",
                xi,
                np.column_stack([
                    np.real(roots.lambda_plus), np.imag(roots.lambda_plus),
                    np.real(roots.lambda_minus), np.imag(roots.lambda_minus),
                    weights.w1, weights.wM, weights.wInf,
                ]),
                header=("xi", "re_plus", "im_plus", "re_minus", "im_minus", "w1", "wM", "wInf"),
            )
        )

        rng = data.SplitMix64(config.seed)
        xi_sq = (2.0 * radii.high_outer * rng.uniforms(ROOT_SAMPLES)) ** 2
        sample = symbols.lambda_pm(xi_sq, params)
        worst = 0.0
        for z in (sample.lambda_plus, sample.lambda_minus):
            scale = (
                np.abs(z) ** 2
                + params.total_viscosity * xi_sq * np.abs(z)
                + params.kappa0 * params.gamma * xi_sq ** 2
                + params.gamma ** 2 * xi_sq
            )
            residual = np.abs(symbols.characteristic_residual(z, xi_sq, params))
            worst = max(worst, float(np.max(residual / np.where(scale > 0, scale, 1.0))))
        run.check("root_residual", worst, config.tolerance("root_residual"), "<=")

        grid = config.make_grid(rescaling.length)
        m = data.random_vector_field(grid, rng)
        solenoidal, potential = semigroup.project_helmholtz(m)
        total = l2_norm(m) ** 2
        idempotency = l2_norm(semigroup.project_helmholtz(solenoidal)[0] - solenoidal)
        pythagoras = abs(total - l2_norm(solenoidal) ** 2 - l2_norm(potential) ** 2)
        orthogonality = abs(inner(solenoidal, potential))
        scale = total if total > 0 else 1.0
        run.check(
            "helmholtz",
            max(idempotency / math.sqrt(scale), pythagoras / scale, orthogonality / scale),
            config.tolerance("projector_tol"),
            "<=",
            "idempotency, Pythagoras and orthogonality of the projections",
        )
        _, t_max = run.horizons(rescaling)
        run.snapshot(
            "green-phi-phi",
            ScalarField.spectral(grid, symbols.green_phi_phi(t_max, grid.xi_sq, params)),
        )


class RunCrossValidate(BaseRunExperiment):
    """Formas fechadas contra quadratura, propriedade de semigrupo e fecho da
    construção de Φ, w e v.
    """

    EXPERIMENT = "cross-validate"

    COMPONENTS = (semigroup.Component.PHI, semigroup.Component.MOMENTUM)

    def _evaluate(self, run):
        config = run.config
        params, rescaling = run.normalized()
        grid = config.make_grid(rescaling.length)
        _, t_max = run.horizons(rescaling)
        steps = config.time["steps"]

        rows = []
        semigroup_defect = phi_residual = closure = 0.0
        for index in range(config.datum["samples"]):
            state = data.random_state(grid, params, config.seed + index)
            row = []
            for component in self.COMPONENTS:
                closed = semigroup.spacetime_l2_closed_form(state, component, t_max)
                quadrature = semigroup.spacetime_l2_quadrature(state, component, t_max, steps)
                relative = abs(closed - quadrature) / closed if closed > 0 else abs(quadrature)
                row += [closed, quadrature, relative]
            rows.append(row)
            semigroup_defect = max(
                semigroup_defect,
                semigroup.semigroup_property_check(state, t_max / 2.0, t_max / 2.0),
            )

            phi0, m0 = data.admissible_state(grid, config.seed + index)
            Phi = morawetz.solve_Phi(phi0, m0, params)
            phi_residual = max(phi_residual, morawetz.phi_residual(Phi, phi0, m0, params))
            w = morawetz.build_w(phi0, m0, Phi, params, t_max)
            v = morawetz.build_v(phi0, m0, Phi, params, t_max)
            estimate = morawetz.check_w_estimates(phi0, m0, params, [t_max])[0]
            closure = max(
                closure, w.residual, w.value_defect, w.rate_defect, v.residual,
                estimate.w_base_defect, estimate.b_identity_defect,
            )

        header = ("sample",)
        for component in self.COMPONENTS:
            header += tuple(
                "%s_%s" % (component.value, suffix)
                for suffix in ("closed", "quadrature", "relative")
            )
        table = np.array(rows)
        run.series(TimeSeries("oracle-agreement", np.arange(len(rows)), table, header=header))
        run.check(
            "oracle_rtol",
            float(np.max(table[:, 2::3])),
            config.tolerance("oracle_rtol"),
            "<=",
            "closed form against trapezoid quadrature",
        )
        run.check("semigroup_defect", semigroup_defect, config.tolerance("semigroup_defect"), "<=")
        run.check("phi_residual", phi_residual, config.tolerance("phi_residual"), "<=")
        run.check("closure_residual", closure, config.tolerance("closure_residual"), "<=")


EXPERIMENT_HANDLERS = {
    handler.EXPERIMENT: handler
    for handler in (
        RunLogGrowth,
        RunDensityBound,
        RunDensityDecay,
        RunEnergyIdentity,
        RunHighFreqDecay,
        RunStokesBound,
        RunSymbolAtlas,
        RunCrossValidate,
    )
}


class RunExperiment(CommandHandler):
    """Executa o experimento indicado na configuração.

    :param config: instância de `ExperimentConfig`.
    """

    def __call__(self, config: ExperimentConfig) -> RunReport:
        return EXPERIMENT_HANDLERS[config.experiment](self.Session)(config)


class ValidateConfig(CommandHandler):
    """Valida uma configuração a partir de um arquivo ou do texto INI.

    :param path: (opcional) caminho do arquivo de configuração.
    :param text: (opcional) conteúdo INI; ignorado quando `path` é informado.
    """

    def __call__(self, path: str = None, text: str = None) -> ExperimentConfig:
        if path:
            return load_config(path)
        return parse_config(text or "")


class ListExperiments(CommandHandler):
    """Lista os experimentos disponíveis com a respectiva descrição."""

    def __call__(self):
        return [
            (name, " ".join((EXPERIMENT_HANDLERS[name].__doc__ or "").split()))
            for name in EXPERIMENTS
        ]


class FetchChanges(CommandHandler):
    """Recupera lista de eventos registrados.

    :param since: (Opcional) timestamp UTC, inicia a lista de resultados no evento
    registrado a partir do timestamp informado.
    :param limit: (Opcional) Limita o total de resultados obtidos. O valor padrão é 500.
    """

    def __call__(self, since: str = "", limit: int = 500):
        session = self.Session()
        return session.changes.filter(since=since, limit=limit)


def log_change(data, session, now=utcnow, event=""):
    change = {"timestamp": now(), "event": event, "id": data["id"], "subject": data["subject"]}
    session.changes.add(change)


DEFAULT_SUBSCRIBERS = [
    (event, functools.partial(log_change, event=event.name)) for event in Events
]


def get_handlers(
    Session: Callable[[], Session], subscribers=DEFAULT_SUBSCRIBERS
) -> dict:
    """Ponto de acesso aos serviços do verificador.

    :param Session: factory de instâncias de interfaces.Session.
    :param subscribers (opcional): mapeamento entre eventos e callbacks, na
    forma de lista associativa.
    """

    def SessionWrapper():
        """Produz instância de `Session` inicializada com seus observadores.
        """
        session = Session()
        for event, callback in subscribers:
            session.observe(event, callback)
        return session

    handlers = {
        "run_experiment": RunExperiment(SessionWrapper),
        "validate_config": ValidateConfig(SessionWrapper),
        "list_experiments": ListExperiments(SessionWrapper),
        "fetch_changes": FetchChanges(SessionWrapper),
    }
    for name, handler in EXPERIMENT_HANDLERS.items():
        handlers["run_" + name.replace("-", "_")] = handler(SessionWrapper)
    return handlers
