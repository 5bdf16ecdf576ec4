"""Geração determinística de dados iniciais.

O gerador é o splitmix64 (documentado em ``docs/adr``): a n-ésima saída depende
apenas de ``seed + n·0x9E3779B97F4A7C15``, o que permite tanto a forma escalar
quanto a vetorizada produzirem exatamente a mesma sequência.
"""
import logging
import math

import numpy as np

from .grid import (
    Grid2D,
    ScalarField,
    VectorField,
    Direction,
    transform,
)
from .semigroup import SpectralState

__all__ = [
    "SplitMix64",
    "random_field",
    "random_vector_field",
    "random_state",
    "admissible_state",
    "solenoidal_datum",
]

LOGGER = logging.getLogger(__name__)


class SplitMix64:
    """Gerador pseudoaleatório de 64 bits, reprodutível em qualquer linguagem.
    """

    MASK = (1 << 64) - 1
    GOLDEN = 0x9E3779B97F4A7C15
    MIX1 = 0xBF58476D1CE4E5B9
    MIX2 = 0x94D049BB133111EB

    def __init__(self, seed: int = 0):
        self.state = int(seed) & self.MASK

    def next(self) -> int:
        self.state = (self.state + self.GOLDEN) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * self.MIX1) & self.MASK
        z = ((z ^ (z >> 27)) * self.MIX2) & self.MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Real em ``[0, 1)`` com 53 bits."""
        return (self.next() >> 11) * 2.0 ** -53

    def integers(self, count: int) -> np.ndarray:
        """As próximas `count` saídas de `next`, calculadas de uma vez."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(self.GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(self.MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(self.MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * self.GOLDEN) & self.MASK
        return z

    def uniforms(self, count: int) -> np.ndarray:
        return (self.integers(count) >> np.uint64(11)).astype(float) * 2.0 ** -53

    def normals(self, count: int) -> np.ndarray:
        """Box-Muller sobre pares consecutivos de uniformes."""
        u = self.uniforms(2 * count).reshape(count, 2)
        return np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * math.pi * u[:, 1])


def _envelope(grid: Grid2D) -> np.ndarray:
    kappa = grid.max_wavenumber / 4.0
    return np.exp(-grid.xi_sq / (2.0 * kappa ** 2)) * grid.nyquist_mask


def random_field(grid: Grid2D, rng: SplitMix64, zero_mean: bool = False) -> ScalarField:
    """Campo real suave: ruído branco físico transformado e atenuado pelo
    envelope ``e^{-|ξ|²/(2κ²)}`` com ``κ = ξ_max/4``.
    """
    noise = rng.normals(grid.n * grid.n).reshape(grid.shape)
    spectral = transform(ScalarField.physical(grid, noise), Direction.FORWARD)
    values = spectral.values * _envelope(grid)
    if zero_mean:
        values = values.copy()
        values[grid.index_of(0, 0)] = 0.0
    return ScalarField.spectral(grid, values)


def random_vector_field(grid: Grid2D, rng: SplitMix64, zero_mean: bool = False) -> VectorField:
    components = [random_field(grid, rng, zero_mean=zero_mean).values for _ in range(2)]
    return VectorField.spectral(grid, np.array(components))


def random_state(grid: Grid2D, params, seed: int) -> SpectralState:
    rng = SplitMix64(seed)
    LOGGER.debug("random state on %d-point grid with seed %d", grid.n, seed)
    return SpectralState(random_field(grid, rng), random_vector_field(grid, rng), params)


def admissible_state(grid: Grid2D, seed: int):
    """Par ``(φ₀, m₀)`` aleatório com médias nulas de φ₀ e de m₀."""
    rng = SplitMix64(seed)
    return random_field(grid, rng, zero_mean=True), random_vector_field(grid, rng, zero_mean=True)


def solenoidal_datum(stream: ScalarField) -> VectorField:
    """``m = (∂₂ψ, -∂₁ψ)`` a partir da função de corrente ψ em representação
    espectral; Nyquist zerado.
    """
    grid = stream.grid
    psi = stream.values * grid.nyquist_mask
    return VectorField.spectral(grid, np.array([1j * grid.xi2 * psi, -1j * grid.xi1 * psi]))
