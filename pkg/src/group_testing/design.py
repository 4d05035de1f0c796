"""
Matrizes de teste Bernoulli, conjuntos defeituosos e a regra de resultado.

Cada teste (linha) é guardado empacotado em bytes, com o bit do item i na
posição ``i % 8`` do byte ``i // 8`` (ordem little-endian). Os itens são
indexados a partir de 0; a exibição usa índices a partir de 1.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence

import numpy as np

from group_testing.errors import DesignSizeError, DomainError

PRNG_NAME = "numpy-philox4x64"
PRNG_VERSION = 1
DEFAULT_MAX_CELLS = 200_000_000
DEFAULT_DENSE_THRESHOLD = 0.05
DENSE_CHUNK_CELLS = 1 << 22
SEED_LIMIT = 1 << 64


class Purpose(IntEnum):
    """Rótulo do fluxo aleatório; separa os sorteios de K e da matriz."""

    DEFECTIVES = 0
    DESIGN = 1
    ORACLE = 2


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise DomainError(f"A semente deve ser um inteiro de 64 bits, recebido {seed}.")
    return seed


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Gerador Philox determinístico para (semente, chave de fluxo)."""
    sequence = np.random.SeedSequence(
        entropy=_check_seed(seed), spawn_key=tuple(int(s) for s in spawn_key)
    )
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(master_seed: int, *spawn_key: int) -> int:
    """Semente de 64 bits derivada de uma semente mestre e de uma chave de fluxo."""
    sequence = np.random.SeedSequence(
        entropy=_check_seed(master_seed), spawn_key=tuple(int(s) for s in spawn_key)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _packed_width(n: int) -> int:
    return (n + 7) // 8


@dataclass(frozen=True)
class DefectiveSet:
    """Conjunto de itens em ordem estritamente crescente, todos em [0, n)."""

    items: tuple[int, ...]
    n: Optional[int] = None

    def __post_init__(self):
        items = tuple(int(i) for i in self.items)
        object.__setattr__(self, "items", items)
        if any(b <= a for a, b in zip(items, items[1:])):
            raise DomainError(f"Itens devem estar em ordem estritamente crescente: {items}.")
        if items and items[0] < 0:
            raise DomainError(f"Índice de item negativo: {items[0]}.")
        if self.n is not None and items and items[-1] >= self.n:
            raise DomainError(f"Item {items[-1]} fora do intervalo [0, {self.n}).")

    @classmethod
    def of(cls, items: Iterable[int], n: Optional[int] = None) -> "DefectiveSet":
        """Cria o conjunto a partir de itens em qualquer ordem, com repetição."""
        return cls(tuple(sorted({int(i) for i in items})), n)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, item) -> bool:
        return item in set(self.items)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.items, dtype=np.int64)

    def issubset(self, other: "DefectiveSet") -> bool:
        return set(self.items) <= set(other.items)

    def issuperset(self, other: "DefectiveSet") -> bool:
        return set(self.items) >= set(other.items)

    def same_items(self, other: "DefectiveSet") -> bool:
        return self.items == other.items

    def display(self) -> str:
        return "{" + ", ".join(str(i + 1) for i in self.items) + "}"


@dataclass(frozen=True, eq=False)
class OutcomeVector:
    """Vetor de resultados y; bits[t] é verdadeiro quando o teste t é positivo."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool).reshape(-1)
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return int(self.bits.shape[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, OutcomeVector) and np.array_equal(self.bits, other.bits)

    def positives(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def negatives(self) -> np.ndarray:
        return np.flatnonzero(~self.bits)

    def to_dict(self) -> dict:
        packed = np.packbits(self.bits, bitorder="little")
        return {"T": len(self), "bits": packed.tobytes().hex()}

    @classmethod
    def from_dict(cls, data: dict) -> "OutcomeVector":
        packed = np.frombuffer(bytes.fromhex(data["bits"]), dtype=np.uint8)
        bits = np.unpackbits(packed, count=int(data["T"]), bitorder="little")
        return cls(bits.astype(bool))


@dataclass(frozen=True, eq=False)
class TestDesign:
    """
    Matriz de testes X = (x_it) com n itens e T testes.

    ``rows`` tem forma (T, ceil(n/8)) e tipo uint8; os bits de enchimento do
    último byte de cada linha são sempre zero. A matriz é somente leitura.
    """

    __test__ = False

    n: int
    T: int
    rows: np.ndarray
    p: Optional[float] = None
    seed: Optional[int] = None
    prng: str = field(default=f"{PRNG_NAME}/v{PRNG_VERSION}")

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.uint8, copy=True)
        width = _packed_width(self.n)
        if self.n < 1 or self.T < 0:
            raise DomainError(f"Dimensões inválidas: n={self.n}, T={self.T}.")
        if rows.shape != (self.T, width):
            raise DomainError(
                f"Linhas com forma {rows.shape}, esperado {(self.T, width)}."
            )
        spare = width * 8 - self.n
        if spare and self.T and np.any(rows[:, -1] >> (8 - spare)):
            raise DomainError("Bits de enchimento diferentes de zero na matriz.")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_dense(
        cls, matrix, p: Optional[float] = None, seed: Optional[int] = None
    ) -> "TestDesign":
        """Cria a matriz a partir de uma matriz booleana (T, n)."""
        dense = np.asarray(matrix, dtype=bool)
        if dense.ndim != 2:
            raise DomainError("A matriz densa deve ter duas dimensões (T, n).")
        T, n = dense.shape
        rows = np.packbits(dense, axis=1, bitorder="little")
        return cls(n=n, T=T, rows=rows.reshape(T, _packed_width(n)), p=p, seed=seed)

    @classmethod
    def from_tests(cls, n: int, tests: Sequence[Iterable[int]]) -> "TestDesign":
        """Cria a matriz a partir da lista de itens de cada teste."""
        dense = np.zeros((len(tests), n), dtype=bool)
        for t, items in enumerate(tests):
            dense[t, list(items)] = True
        return cls.from_dense(dense)

    def to_dense(self) -> np.ndarray:
        if self.T == 0:
            return np.zeros((0, self.n), dtype=bool)
        return np.unpackbits(self.rows, axis=1, count=self.n, bitorder="little").astype(bool)

    def columns(self, items) -> np.ndarray:
        """Submatriz booleana (T, len(items)) com as colunas dos itens pedidos."""
        idx = np.asarray(items, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError(f"Item fora do intervalo [0, {self.n}).")
        bytes_ = self.rows[:, idx >> 3]
        return ((bytes_ >> (idx & 7).astype(np.uint8)) & 1).astype(bool)

    def ones(self) -> int:
        return int(np.unpackbits(self.rows).sum()) if self.T else 0

    def density(self) -> float:
        cells = self.n * self.T
        return self.ones() / cells if cells else 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "T": self.T,
            "p": self.p,
            "seed": self.seed,
            "prng": self.prng,
            "rows": [row.tobytes().hex() for row in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TestDesign":
        n, T = int(data["n"]), int(data["T"])
        rows = np.zeros((T, _packed_width(n)), dtype=np.uint8)
        for t, hex_row in enumerate(data["rows"]):
            rows[t] = np.frombuffer(bytes.fromhex(hex_row), dtype=np.uint8)
        return cls(
            n=n,
            T=T,
            rows=rows,
            p=data.get("p"),
            seed=data.get("seed"),
            prng=data.get("prng", f"{PRNG_NAME}/v{PRNG_VERSION}"),
        )


def _dense_rows(rng: np.random.Generator, n: int, T: int, p: float) -> np.ndarray:
    """Compara um uniforme de 53 bits com p em cada célula, em blocos de linhas."""
    rows = np.zeros((T, _packed_width(n)), dtype=np.uint8)
    chunk = max(1, DENSE_CHUNK_CELLS // n)
    for start in range(0, T, chunk):
        stop = min(T, start + chunk)
        cells = rng.random((stop - start, n)) < p
        rows[start:stop] = np.packbits(cells, axis=1, bitorder="little")
    return rows


def _sparse_rows(rng: np.random.Generator, n: int, T: int, p: float) -> np.ndarray:
    """
    Sorteia as posições dos uns por saltos geométricos sobre as n·T células;
    é o mesmo processo de Bernoulli independente, com custo O(n·T·p).
    """
    rows = np.zeros((T, _packed_width(n)), dtype=np.uint8)
    total = n * T
    chunks = []
    last = -1
    while True:
        expected = (total - last - 1) * p
        block = int(expected + 6 * math.sqrt(expected) + 16)
        cells = last + np.cumsum(rng.geometric(p, size=block))
        if cells[-1] >= total:
            chunks.append(cells[cells < total])
            break
        chunks.append(cells)
        last = int(cells[-1])
    positions = np.concatenate(chunks)
    test_index = positions // n
    item_index = positions % n
    np.bitwise_or.at(
        rows,
        (test_index, item_index >> 3),
        np.left_shift(1, item_index & 7).astype(np.uint8),
    )
    return rows


def generate_design(
    n: int,
    T: int,
    p: float,
    seed: int,
    max_cells: int = DEFAULT_MAX_CELLS,
    dense_threshold: float = DEFAULT_DENSE_THRESHOLD,
) -> TestDesign:
    """
    Gera uma matriz Bernoulli(p) com n itens e T testes.

    A mesma combinação (n, T, p, seed, dense_threshold) reproduz a mesma
    matriz bit a bit.
    """
    if n < 1 or T < 0:
        raise DomainError(f"generate_design exige n >= 1 e T >= 0, recebido n={n}, T={T}.")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p deve estar em [0, 1], recebido {p}.")
    if n * T > max_cells:
        raise DesignSizeError(
            f"n*T = {n * T} células excede o limite configurado de {max_cells}."
        )
    rng = make_rng(seed, Purpose.DESIGN)

    if T == 0 or p == 0.0:
        rows = np.zeros((T, _packed_width(n)), dtype=np.uint8)
    elif p == 1.0:
        full = np.packbits(np.ones(n, dtype=bool), bitorder="little")
        rows = np.tile(full, (T, 1))
    elif p >= dense_threshold:
        rows = _dense_rows(rng, n, T, p)
    else:
        rows = _sparse_rows(rng, n, T, p)

    logging.debug(f"Matriz gerada: n={n}, T={T}, p={p}, seed={seed}")
    return TestDesign(n=n, T=T, rows=rows, p=p, seed=seed)


def sample_defective_set(n: int, k: int, seed: int) -> DefectiveSet:
    """Sorteia K uniformemente entre os subconjuntos de tamanho k."""
    if n < 0 or not 0 <= k <= n:
        raise DomainError(f"sample_defective_set exige 0 <= k <= n, recebido n={n}, k={k}.")
    rng = make_rng(seed, Purpose.DEFECTIVES)
    if k == 0:
        return DefectiveSet((), n)
    items = rng.choice(n, size=k, replace=False)
    return DefectiveSet(tuple(sorted(int(i) for i in items)), n)


def _check_items(design: TestDesign, items: DefectiveSet) -> np.ndarray:
    idx = items.as_array()
    if idx.size and (idx[0] < 0 or idx[-1] >= design.n):
        raise IndexError(
            f"Conjunto {items.items} contém item fora do intervalo [0, {design.n})."
        )
    return idx


def run_tests(design: TestDesign, K: DefectiveSet) -> OutcomeVector:
    """y_t = 1 se e somente se o teste t contém algum item de K."""
    idx = _check_items(design, K)
    if idx.size == 0 or design.T == 0:
        return OutcomeVector(np.zeros(design.T, dtype=bool))
    mask = np.zeros(design.rows.shape[1], dtype=np.uint8)
    np.bitwise_or.at(mask, idx >> 3, np.left_shift(1, idx & 7).astype(np.uint8))
    touched = np.unique(idx >> 3)
    hits = design.rows[:, touched] & mask[touched]
    return OutcomeVector(hits.any(axis=1))


def is_satisfying(design: TestDesign, y: OutcomeVector, L: DefectiveSet) -> bool:
    """L é satisfatório se teria produzido exatamente o vetor y observado."""
    if len(y) != design.T:
        raise DomainError(f"y tem comprimento {len(y)}, a matriz tem T={design.T}.")
    return run_tests(design, L) == y
