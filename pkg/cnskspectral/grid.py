"""Discretização da caixa periódica [-L, L)² e contrato da transformada de
Fourier.

As transformadas são normalizadas para aproximar a transformada contínua

    f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx,

de modo que o coeficiente em ξ = 0 aproxima a integral do dado. Os arranjos são
indexados por ``[i2, i1]`` (linhas sobre k₂, colunas sobre k₁) e os números de
onda seguem a ordem de `numpy.fft.fftfreq`.
"""
import enum
import logging
import math
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import exceptions

__all__ = [
    "Representation",
    "Direction",
    "Grid2D",
    "Field",
    "ScalarField",
    "VectorField",
    "make_grid",
    "transform",
    "l2_norm",
    "inner",
    "l1_norm",
    "apply_symbol",
    "is_hermitian",
    "snapshot_bytes",
    "snapshot_from_bytes",
    "field_rows",
]

LOGGER = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"CNSKSNAP"
SNAPSHOT_HEADER = struct.Struct("<8sQdQ")


class Representation(enum.Enum):
    SPECTRAL = 0
    PHYSICAL = 1


class Direction(enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"

    @property
    def source(self) -> Representation:
        if self is Direction.FORWARD:
            return Representation.PHYSICAL
        return Representation.SPECTRAL


@dataclass(frozen=True)
class Grid2D:
    """Grade uniforme com `n` pontos por eixo na caixa ``[-L, L)²``.

    Os atributos derivados (lattice de números de onda, coordenadas físicas,
    máscara de Nyquist) são calculados sob demanda e memorizados.
    """

    n: int
    half_width: float

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def dxi(self) -> float:
        return math.pi / self.half_width

    @property
    def parseval_weight(self) -> float:
        return (self.dxi / (2.0 * math.pi)) ** 2

    @property
    def shape(self):
        return (self.n, self.n)

    @cached_property
    def k(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.n, 1.0 / self.n)).astype(int)

    @cached_property
    def wavenumbers(self):
        """Par ``(xi1, xi2)`` de arranjos ``(n, n)``."""
        xi = self.dxi * self.k.astype(float)
        xi1, xi2 = np.meshgrid(xi, xi, indexing="xy")
        return xi1, xi2

    @property
    def xi1(self) -> np.ndarray:
        return self.wavenumbers[0]

    @property
    def xi2(self) -> np.ndarray:
        return self.wavenumbers[1]

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return self.xi1 ** 2 + self.xi2 ** 2

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def coordinates(self):
        x = -self.half_width + self.dx * np.arange(self.n)
        x1, x2 = np.meshgrid(x, x, indexing="xy")
        return x1, x2

    @cached_property
    def parity(self) -> np.ndarray:
        """Fator ``(-1)^{k1+k2}`` que desloca a origem para o centro da caixa."""
        k1, k2 = np.meshgrid(self.k, self.k, indexing="xy")
        return np.where((k1 + k2) % 2 == 0, 1.0, -1.0)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        k1, k2 = np.meshgrid(self.k, self.k, indexing="xy")
        nyquist = -self.n // 2
        return ((k1 != nyquist) & (k2 != nyquist)).astype(float)

    @property
    def max_wavenumber(self) -> float:
        return self.dxi * (self.n // 2 - 1)

    def index_of(self, k1: int, k2: int):
        """Posição ``(i2, i1)`` do modo inteiro ``(k1, k2)`` na lattice.
        """
        half = self.n // 2
        for value in (k1, k2):
            if int(value) != value or not -half <= value < half:
                raise exceptions.ParameterDomainError(
                    "cannot locate mode (%r, %r): outside the %d-point lattice"
                    % (k1, k2, self.n)
                )
        return int(k2) % self.n, int(k1) % self.n

    def box_horizon(self, nu: float) -> float:
        """Maior horizonte ``0.05·(L/π)²/ν`` aceito pelos experimentos de
        caixa.
        """
        return 0.05 * (self.half_width / math.pi) ** 2 / nu

    def wraparound_margin(self, support_radius: float, speed: float, T: float) -> float:
        """Folga ``L - (R + speed·T)``; negativa indica que a propagação
        atravessa a borda periódica antes de `T`.
        """
        return self.half_width - (support_radius + speed * T)


def make_grid(n: int, half_width: float) -> Grid2D:
    if int(n) != n or n < 8 or int(n) & (int(n) - 1):
        raise exceptions.ParameterDomainError(
            "cannot make grid: n must be a power of two not smaller than 8, got %r" % n
        )
    if not (half_width > 0 and math.isfinite(half_width)):
        raise exceptions.ParameterDomainError(
            "cannot make grid: half_width must be positive, got %r" % half_width
        )
    grid = Grid2D(int(n), float(half_width))
    LOGGER.debug(
        "new grid: n=%d L=%s dx=%s dxi=%s", grid.n, grid.half_width, grid.dx, grid.dxi
    )
    return grid


class Field:
    """Valor imutável sobre uma grade: coeficientes complexos e a tag de
    representação. Subclasses fixam o número de componentes.
    """

    components = None

    def __init__(self, grid: Grid2D, values, representation: Representation):
        values = np.array(values, dtype=complex)
        expected = self._expected_shape(grid)
        if values.shape != expected:
            raise exceptions.ParameterDomainError(
                "cannot build %s: expected shape %s, got %s"
                % (type(self).__name__, expected, values.shape)
            )
        values.flags.writeable = False
        self._grid = grid
        self._values = values
        self._representation = Representation(representation)

    @classmethod
    def _expected_shape(cls, grid):
        if cls.components is None:
            return grid.shape
        return (cls.components,) + grid.shape

    @classmethod
    def zeros(cls, grid, representation=Representation.SPECTRAL):
        return cls(grid, np.zeros(cls._expected_shape(grid)), representation)

    @classmethod
    def spectral(cls, grid, values):
        return cls(grid, values, Representation.SPECTRAL)

    @classmethod
    def physical(cls, grid, values):
        return cls(grid, values, Representation.PHYSICAL)

    @property
    def grid(self) -> Grid2D:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def representation(self) -> Representation:
        return self._representation

    def replace(self, values, representation=None):
        return type(self)(
            self._grid, values, representation or self._representation
        )

    def _check_compatible(self, other):
        if not isinstance(other, type(self)):
            raise TypeError(
                "cannot combine %s with %s" % (type(self).__name__, type(other).__name__)
            )
        if other.grid != self.grid:
            raise exceptions.ParameterDomainError(
                "cannot combine fields defined on different grids"
            )
        if other.representation is not self.representation:
            raise exceptions.RepresentationMismatch(
                "cannot combine %s field with %s field"
                % (self.representation.name.lower(), other.representation.name.lower())
            )

    def __add__(self, other):
        self._check_compatible(other)
        return self.replace(self._values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return self.replace(self._values - other.values)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.replace(self._values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.replace(-self._values)

    def __repr__(self):
        return "<%s n=%d L=%s %s>" % (
            type(self).__name__,
            self._grid.n,
            self._grid.half_width,
            self._representation.name.lower(),
        )


class ScalarField(Field):
    def gradient(self) -> "VectorField":
        grid = self.grid
        return apply_symbol(self, 1j * np.array([grid.xi1, grid.xi2]), odd=True)


class VectorField(Field):
    components = 2

    def divergence(self) -> ScalarField:
        grid = self.grid
        return apply_symbol(self, 1j * np.array([grid.xi1, grid.xi2]), odd=True)

    def component(self, index: int) -> ScalarField:
        return ScalarField(self.grid, self.values[index], self.representation)


def _require(field: Field, representation: Representation, action: str) -> None:
    if field.representation is not representation:
        raise exceptions.RepresentationMismatch(
            "cannot %s: field is in %s representation"
            % (action, field.representation.name.lower())
        )


def transform(field: Field, direction: Direction) -> Field:
    direction = Direction(direction)
    _require(field, direction.source, "apply %s transform" % direction.value)
    grid = field.grid
    if direction is Direction.FORWARD:
        values = grid.dx ** 2 * grid.parity * np.fft.fft2(field.values, axes=(-2, -1))
        return field.replace(values, Representation.SPECTRAL)

    scale = grid.dxi ** 2 * grid.n ** 2 / (2.0 * math.pi) ** 2
    values = scale * np.fft.ifft2(field.values * grid.parity, axes=(-2, -1))
    return field.replace(values, Representation.PHYSICAL)


def l2_norm(field: Field) -> float:
    """Norma discreta de Parseval, que aproxima ``‖f‖_{L²}`` na caixa."""
    _require(field, Representation.SPECTRAL, "compute l2 norm")
    return math.sqrt(field.grid.parseval_weight * float(np.sum(np.abs(field.values) ** 2)))


def inner(f: Field, g: Field) -> float:
    """Parte real do produto interno ``(f, g)_{L²}`` via Parseval."""
    f._check_compatible(g)
    _require(f, Representation.SPECTRAL, "compute inner product")
    return f.grid.parseval_weight * float(np.real(np.sum(f.values * np.conj(g.values))))


def l1_norm(field: Field) -> float:
    """Quadratura física de ``∫|f| dx``, com a magnitude euclidiana para
    campos vetoriais. Campos espectrais são transformados antes.
    """
    if field.representation is Representation.SPECTRAL:
        field = transform(field, Direction.INVERSE)
    magnitude = np.abs(field.values)
    if isinstance(field, VectorField):
        magnitude = np.sqrt(np.sum(magnitude ** 2, axis=0))
    return field.grid.dx ** 2 * float(np.sum(magnitude))


def apply_symbol(field: Field, symbol, odd: bool = False) -> Field:
    """Multiplica cada modo pelo símbolo avaliado em seu ξ.

    `symbol` é um arranjo (ou um callable que recebe a grade e devolve um
    arranjo) cuja forma decide o tipo do resultado:

    * ``(n, n)`` age componente a componente;
    * ``(2, n, n)`` sobre campo escalar produz campo vetorial (gradiente) e sobre
      campo vetorial contrai os componentes (divergente);
    * ``(2, 2, n, n)`` age como matriz sobre campo vetorial.

    Com ``odd=True`` a linha e a coluna de Nyquist são zeradas.
    """
    _require(field, Representation.SPECTRAL, "apply symbol")
    grid = field.grid
    if callable(symbol):
        symbol = symbol(grid)
    symbol = np.asarray(symbol)
    values = field.values
    vector_in = isinstance(field, VectorField)

    if symbol.shape == grid.shape:
        result, cls = symbol * values, type(field)
    elif symbol.shape == (2,) + grid.shape and not vector_in:
        result, cls = symbol * values, VectorField
    elif symbol.shape == (2,) + grid.shape and vector_in:
        result, cls = np.sum(symbol * values, axis=0), ScalarField
    elif symbol.shape == (2, 2) + grid.shape and vector_in:
        result, cls = np.einsum("ij...,j...->i...", symbol, values), VectorField
    else:
        raise exceptions.ParameterDomainError(
            "cannot apply symbol of shape %s to %s"
            % (symbol.shape, type(field).__name__)
        )
    if odd:
        result = result * grid.nyquist_mask
    return cls(grid, result, Representation.SPECTRAL)


def _reflect(values: np.ndarray) -> np.ndarray:
    """Arranjo indexado em ``-k`` (com ``-k`` tomado módulo n)."""
    flipped = np.flip(values, axis=(-2, -1))
    return np.roll(flipped, 1, axis=(-2, -1))


def is_hermitian(field: Field, rtol: float = 1e-12) -> bool:
    """Verifica ``f̂(-ξ) = conj(f̂(ξ))``, condição para um campo físico real."""
    _require(field, Representation.SPECTRAL, "check hermitian symmetry")
    values = field.values
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    defect = float(np.max(np.abs(values - np.conj(_reflect(values)))))
    return defect <= rtol * scale


def snapshot_bytes(field: Field) -> bytes:
    """Serializa o campo: cabeçalho de 32 bytes ``(magic, n, L, tag)`` seguido
    dos coeficientes complexos em little-endian, ordem de linhas.
    """
    header = SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC, field.grid.n, field.grid.half_width, field.representation.value
    )
    return header + np.ascontiguousarray(field.values, dtype="<c16").tobytes()


def snapshot_from_bytes(data: bytes) -> Field:
    magic, n, half_width, tag = SNAPSHOT_HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise exceptions.NonRetryableError(
            "cannot read snapshot: unexpected magic %r" % magic
        )
    grid = make_grid(n, half_width)
    values = np.frombuffer(data, dtype="<c16", offset=SNAPSHOT_HEADER.size)
    if values.size == n * n:
        return ScalarField(grid, values.reshape(grid.shape), Representation(tag))
    return VectorField(grid, values.reshape((2,) + grid.shape), Representation(tag))


def field_rows(field: Field):
    """Linhas para exportação em CSV: coordenadas do ponto (ou número de onda)
    seguidas das partes real e imaginária de cada componente.
    """
    grid = field.grid
    if field.representation is Representation.SPECTRAL:
        axes, coords = ("xi1", "xi2"), grid.wavenumbers
    else:
        axes, coords = ("x1", "x2"), grid.coordinates
    values = field.values.reshape((-1,) + grid.shape)
    header = list(axes)
    for index in range(values.shape[0]):
        header += ["re%d" % index, "im%d" % index]
    yield header
    for i2 in range(grid.n):
        for i1 in range(grid.n):
            row = [coords[0][i2, i1], coords[1][i2, i1]]
            for component in values:
                row += [component[i2, i1].real, component[i2, i1].imag]
            yield row
