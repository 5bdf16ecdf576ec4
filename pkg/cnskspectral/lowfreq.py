"""Verificação contínua, sem grade, das integrais de baixa frequência.

Os dados iniciais são analíticos (`AnalyticDatum`), com transformada de Fourier
em forma fechada, de modo que o único erro presente é o da quadratura polar:
Gauss-Legendre composto em r e regra uniforme em ângulo. A constante angular
da mudança para coordenadas polares é fixada pela normalização da transformada
em ``C_ω = 2π/(2π)² = 1/(2π)``.
"""
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special, stats

from . import exceptions
from . import symbols
from .domain import TimeSeries, FitResult
from .grid import Grid2D, ScalarField, VectorField

__all__ = [
    "DatumKind",
    "Kernel",
    "AnalyticDatum",
    "LowFreqIntegral",
    "lowfreq_norm_sq",
    "accumulate_I",
    "log_time_grid",
    "q_constants",
    "q_constants_first_moment",
    "fit_log_growth",
    "sandwich_ratios",
    "decade_increments",
    "C_OMEGA",
]

LOGGER = logging.getLogger(__name__)

C_OMEGA = 1.0 / (2.0 * math.pi)
GAUSS_ORDER = 16
BASE_ANGLES = 16
MAX_REFINEMENTS = 6
QUADRATURE_RTOL = 1e-9
INTERVAL_RTOL = 1e-8
# e^{-40} está abaixo da precisão relativa exigida
EXPONENT_CUTOFF = 40.0
MIN_FIT_SAMPLES = 8


class DatumKind(enum.Enum):
    GAUSSIAN = "gaussian"
    DERIV_GAUSSIAN = "deriv-gaussian"
    GAUSSIAN_DIFFERENCE = "gaussian-difference"
    RADIAL_BUMP = "radial-bump"


class Kernel(enum.Enum):
    HEAT_COMPARISON = "heat_comparison"
    K1_EXACT = "k1_exact"


@dataclass(frozen=True)
class AnalyticDatum:
    """Perfil escalar p(x) com transformada fechada; dados vetoriais são
    ``p(x)·e_θ`` com ``e_θ = (cos θ, sin θ)`` dado por `direction`.

    * ``gaussian``: ``a·e^{-|x-c|²/(2w²)}``;
    * ``deriv-gaussian``: derivada em x₁ da gaussiana;
    * ``gaussian-difference``: gaussiana menos a gaussiana de largura ``q·w``
      reescalada para média nula (``q = width_ratio``);
    * ``radial-bump``: ``a·(1 - |x-c|²/w²)₊``.
    """

    kind: DatumKind
    amplitude: float = 1.0
    width: float = 1.0
    center: Tuple[float, float] = (0.0, 0.0)
    width_ratio: float = 2.0
    direction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DatumKind(self.kind))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.width > 0:
            raise exceptions.ParameterDomainError(
                "cannot build datum: width must be positive, got %r" % self.width
            )
        if self.kind is DatumKind.GAUSSIAN_DIFFERENCE and not self.width_ratio > 0:
            raise exceptions.ParameterDomainError(
                "cannot build datum: width_ratio must be positive, got %r" % self.width_ratio
            )

    @property
    def zero_mean(self) -> bool:
        return self.kind in (DatumKind.DERIV_GAUSSIAN, DatumKind.GAUSSIAN_DIFFERENCE) or (
            self.amplitude == 0
        )

    @property
    def has_moment(self) -> bool:
        return True

    @property
    def hat_at_zero(self) -> float:
        """``|p̂(0)|``, igual a ``|m̂₀(0)|`` para o dado vetorial."""
        return float(abs(self.profile_hat(0.0, 0.0)))

    @property
    def direction_vector(self) -> np.ndarray:
        return np.array([math.cos(self.direction), math.sin(self.direction)])

    @property
    def support_radius(self) -> float:
        """Raio fora do qual o perfil é menor que 1e-10 da amplitude."""
        if self.kind is DatumKind.RADIAL_BUMP:
            radius = self.width
        else:
            scale = self.width * (
                max(1.0, self.width_ratio)
                if self.kind is DatumKind.GAUSSIAN_DIFFERENCE
                else 1.0
            )
            radius = scale * math.sqrt(2.0 * math.log(1e10)) + (
                self.width if self.kind is DatumKind.DERIV_GAUSSIAN else 0.0
            )
        return radius + math.hypot(*self.center)

    def scaled(self, length: float) -> "AnalyticDatum":
        """Mesmo perfil na variável ``y = x/length``."""
        return replace(
            self,
            width=self.width / length,
            center=(self.center[0] / length, self.center[1] / length),
            amplitude=self.amplitude / length
            if self.kind is DatumKind.DERIV_GAUSSIAN
            else self.amplitude,
        )

    def _gaussian_hat(self, xi_sq, width):
        return 2.0 * math.pi * self.amplitude * width ** 2 * np.exp(-0.5 * width ** 2 * xi_sq)

    def profile_hat(self, xi1, xi2):
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        xi_sq = xi1 * xi1 + xi2 * xi2
        shift = np.exp(-1j * (self.center[0] * xi1 + self.center[1] * xi2))
        w = self.width
        if self.kind is DatumKind.GAUSSIAN:
            hat = self._gaussian_hat(xi_sq, w)
        elif self.kind is DatumKind.DERIV_GAUSSIAN:
            hat = 1j * xi1 * self._gaussian_hat(xi_sq, w)
        elif self.kind is DatumKind.GAUSSIAN_DIFFERENCE:
            wide = w * self.width_ratio
            hat = 2.0 * math.pi * self.amplitude * w ** 2 * (
                np.exp(-0.5 * w ** 2 * xi_sq) - np.exp(-0.5 * wide ** 2 * xi_sq)
            )
        else:
            rho = w * np.sqrt(xi_sq)
            small = rho < 1e-3
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(
                    small,
                    0.25 - rho ** 2 / 48.0,
                    2.0 * special.jv(2, rho) / np.where(small, 1.0, rho) ** 2,
                )
            hat = 2.0 * math.pi * self.amplitude * w ** 2 * ratio
        return hat * shift

    def hat(self, xi1, xi2) -> np.ndarray:
        """``m̂₀(ξ)`` vetorial, forma ``(2, ...)``."""
        profile = self.profile_hat(xi1, xi2)
        e = self.direction_vector.reshape((2,) + (1,) * np.ndim(profile))
        return e * profile

    def evaluate(self, x1, x2):
        x1 = np.asarray(x1, dtype=float) - self.center[0]
        x2 = np.asarray(x2, dtype=float) - self.center[1]
        rho_sq = x1 * x1 + x2 * x2
        a, w = self.amplitude, self.width
        if self.kind is DatumKind.GAUSSIAN:
            return a * np.exp(-rho_sq / (2.0 * w ** 2))
        if self.kind is DatumKind.DERIV_GAUSSIAN:
            return -x1 / w ** 2 * a * np.exp(-rho_sq / (2.0 * w ** 2))
        if self.kind is DatumKind.GAUSSIAN_DIFFERENCE:
            q = self.width_ratio
            return a * (
                np.exp(-rho_sq / (2.0 * w ** 2))
                - np.exp(-rho_sq / (2.0 * (q * w) ** 2)) / q ** 2
            )
        return a * np.clip(1.0 - rho_sq / w ** 2, 0.0, None)

    def sample(self, grid: Grid2D) -> ScalarField:
        """Amostras da transformada fechada sobre a lattice (Nyquist zerado)."""
        values = self.profile_hat(grid.xi1, grid.xi2) * grid.nyquist_mask
        return ScalarField.spectral(grid, values)

    def vector(self, grid: Grid2D) -> VectorField:
        values = self.hat(grid.xi1, grid.xi2) * grid.nyquist_mask
        return VectorField.spectral(grid, values)


def _kernel_sq(kernel: Kernel, t: float, r: np.ndarray, params):
    if kernel is Kernel.HEAT_COMPARISON:
        return np.exp(-2.0 * r * r * t)
    E1 = symbols.divided_diff_E1(t, r * r, params)
    return np.abs(E1) ** 2


def _data_sq(kernel: Kernel, datum: AnalyticDatum, r, theta):
    xi1 = r * np.cos(theta)
    xi2 = r * np.sin(theta)
    profile = np.abs(datum.profile_hat(xi1, xi2)) ** 2
    if kernel is Kernel.HEAT_COMPARISON:
        return profile
    e = datum.direction_vector
    return (np.cos(theta) * e[0] + np.sin(theta) * e[1]) ** 2 * profile


def _radial_cut(kernel, t, c1, params) -> float:
    decay = 2.0 if kernel is Kernel.HEAT_COMPARISON else params.A
    if t <= 0:
        return c1
    return min(c1, math.sqrt(EXPONENT_CUTOFF / (decay * t)))


def _base_panels(kernel, t, r_cut, params) -> int:
    if kernel is Kernel.HEAT_COMPARISON:
        return 2
    speed = math.sqrt(params.gamma ** 2 + 3.0 * params.kappa0 * params.gamma * r_cut ** 2)
    return int(math.ceil(t * r_cut * speed / math.pi)) + 1


def _polar_sum(kernel, datum, t, params, r_cut, panels, angles) -> float:
    nodes, weights = leggauss(GAUSS_ORDER)
    edges = np.linspace(0.0, r_cut, panels + 1)
    half = 0.5 * np.diff(edges)
    middle = 0.5 * (edges[1:] + edges[:-1])
    r = (middle[:, np.newaxis] + half[:, np.newaxis] * nodes).ravel()
    wr = (half[:, np.newaxis] * weights).ravel()
    theta = 2.0 * math.pi * np.arange(angles) / angles

    radial = _kernel_sq(kernel, t, r, params) * r * wr
    angular = _data_sq(kernel, datum, r[:, np.newaxis], theta[np.newaxis, :])
    total = float(np.sum(radial[:, np.newaxis] * angular)) * (2.0 * math.pi / angles)
    return total / (2.0 * math.pi) ** 2


def lowfreq_norm_sq(datum: AnalyticDatum, kernel, t: float, params: symbols.ModelParams, c1: float = None) -> float:
    """``∫_{|ξ|≤c₁} |kernel(t,ξ)|²|m̂₀(ξ)|² dξ/(2π)²`` por quadratura polar,
    dobrando painéis radiais e ângulos até a variação relativa ficar abaixo de
    1e-9.
    """
    kernel = Kernel(kernel)
    if t < 0:
        raise exceptions.ParameterDomainError("cannot integrate: negative time %r" % t)
    c1 = symbols.lowfreq_radius(params) if c1 is None else float(c1)
    r_cut = _radial_cut(kernel, t, c1, params)
    panels = _base_panels(kernel, t, r_cut, params)
    angles = BASE_ANGLES

    previous = _polar_sum(kernel, datum, t, params, r_cut, panels, angles)
    for _ in range(MAX_REFINEMENTS):
        panels *= 2
        angles *= 2
        current = _polar_sum(kernel, datum, t, params, r_cut, panels, angles)
        if abs(current - previous) <= QUADRATURE_RTOL * abs(current):
            return current
        previous = current
    raise exceptions.QuadratureNotConverged(
        "cannot integrate %s kernel at t=%r: no convergence after %d refinements"
        % (kernel.value, t, MAX_REFINEMENTS)
    )


def log_time_grid(t_min: float = 1.0, t_max: float = 1e6, per_decade: int = 8) -> np.ndarray:
    """Grade geométrica de razão ``10^{1/per_decade}`` com potências de 10
    exatas nos extremos de cada década.
    """
    lo, hi = math.log10(t_min), math.log10(t_max)
    count = int(round((hi - lo) * per_decade)) + 1
    return np.logspace(lo, hi, count)


@dataclass(frozen=True)
class LowFreqIntegral:
    """Amostras ``I(t)`` e a integral acumulada ``∫_{t₀}^t I(τ)dτ``."""

    times: np.ndarray
    values: np.ndarray
    cumulative: np.ndarray
    c1: float
    kernel: Kernel

    @classmethod
    def accumulate(cls, datum, kernel, params, t_grid, c1=None) -> "LowFreqIntegral":
        kernel = Kernel(kernel)
        times = np.asarray(t_grid, dtype=float)
        if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
            raise exceptions.ParameterDomainError(
                "cannot accumulate: time grid must be non-negative and increasing"
            )
        c1 = symbols.lowfreq_radius(params) if c1 is None else float(c1)

        def integrand(t):
            return lowfreq_norm_sq(datum, kernel, t, params, c1=c1)

        values = np.array([integrand(t) for t in times])
        cumulative = np.zeros_like(values)
        for index in range(1, times.size):
            increment, _ = integrate.quad(
                integrand, times[index - 1], times[index], epsrel=INTERVAL_RTOL, limit=200
            )
            cumulative[index] = cumulative[index - 1] + increment
        LOGGER.debug(
            "accumulated %s kernel over [%s, %s]: %s",
            kernel.value, times[0], times[-1], cumulative[-1],
        )
        return cls(times, values, cumulative, c1, kernel)

    def series(self, name: str = "lowfreq") -> TimeSeries:
        return TimeSeries(
            name,
            self.times,
            np.column_stack([self.values, self.cumulative]),
            header=("t", "I", "cumulative"),
        )


def accumulate_I(datum, kernel, params, t_grid, c1=None) -> TimeSeries:
    integral = LowFreqIntegral.accumulate(datum, kernel, params, t_grid, c1=c1)
    return integral.series("%s-%s" % (Kernel(kernel).value, datum.kind.value))


def q_constants(c1: float):
    """``(Q₁, Q₂)`` com ``Q₁ = ∫₀^{c₁} e^{-2s²}s³ds`` e ``Q₂ = 1/8``."""
    if not c1 > 0:
        raise exceptions.ParameterDomainError("cannot compute Q constants: c1 must be positive")
    q1 = (1.0 - (1.0 + 2.0 * c1 ** 2) * math.exp(-2.0 * c1 ** 2)) / 8.0
    return q1, 0.125


def q_constants_first_moment(c1: float):
    """Análogo de `q_constants` para o momento ``∫ e^{-2s²}s ds``, que é o
    que define a integral de baixa frequência.
    """
    if not c1 > 0:
        raise exceptions.ParameterDomainError("cannot compute Q constants: c1 must be positive")
    return -math.expm1(-2.0 * c1 ** 2) / 4.0, 0.25


def fit_log_growth(series: TimeSeries, window, column: str = None) -> FitResult:
    """Mínimos quadrados de ``valor = a·ln t + b`` na janela dada."""
    t_lo, t_hi = window
    if t_lo < 1:
        raise exceptions.ParameterDomainError(
            "cannot fit log growth: window must start at t >= 1, got %r" % t_lo
        )
    column = column or series.header[-1]
    selected = series.window(t_lo, t_hi)
    if len(selected) < MIN_FIT_SAMPLES:
        raise exceptions.DegenerateFit(
            "cannot fit log growth: %d samples in [%r, %r], at least %d required"
            % (len(selected), t_lo, t_hi, MIN_FIT_SAMPLES)
        )
    x = np.log(selected.times)
    y = selected.column(column)
    fit = stats.linregress(x, y)
    r_squared = 1.0 if np.ptp(y) == 0 else float(fit.rvalue ** 2)
    return FitResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=r_squared,
        samples=len(selected),
        window=(float(t_lo), float(t_hi)),
    )


def sandwich_ratios(datum: AnalyticDatum, params, times, c1=None) -> np.ndarray:
    """Razões ``K1_exact/heat_comparison`` nos instantes dados."""
    ratios = []
    for t in times:
        heat = lowfreq_norm_sq(datum, Kernel.HEAT_COMPARISON, t, params, c1=c1)
        exact = lowfreq_norm_sq(datum, Kernel.K1_EXACT, t, params, c1=c1)
        ratios.append(exact / heat if heat > 0 else math.nan)
    return np.array(ratios)


def decade_increments(series: TimeSeries, column: str = None):
    """Incrementos da coluna acumulada entre potências de 10 consecutivas
    contidas na série, como lista ``(t_início, t_fim, incremento)``.
    """
    column = column or series.header[-1]
    values = series.column(column)
    log_t = np.log10(series.times[series.times > 0])
    values = values[series.times > 0]
    if log_t.size == 0:
        return []
    first = int(math.ceil(log_t[0] - 1e-9))
    last = int(math.floor(log_t[-1] + 1e-9))
    result = []
    for decade in range(first, last):
        start = np.interp(decade, log_t, values)
        end = np.interp(decade + 1, log_t, values)
        result.append((10.0 ** decade, 10.0 ** (decade + 1), float(end - start)))
    return result
