"""
Algoritmos de detecção: COMP, DD, SCOMP e SSS exato.

Todos trabalham sobre os "possíveis defeituosos" do COMP (itens que não
aparecem em nenhum teste negativo) e sobre os testes positivos; os testes
negativos servem apenas para eliminar itens.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from group_testing.design import DefectiveSet, OutcomeVector, TestDesign
from group_testing.errors import BudgetExceededError, DomainError

DEFAULT_SSS_NODE_BUDGET = 2_000_000


class Algorithm(str, Enum):
    COMP = "COMP"
    DD = "DD"
    SCOMP = "SCOMP"
    SSS = "SSS"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).upper())
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise DomainError(f"Decodificador desconhecido '{name}'. Opções: {valid}.") from None


class Uniqueness(str, Enum):
    UNIQUE = "unique"
    NOT_UNIQUE = "not-unique"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DecodeResult:
    """Estimativa de um decodificador; ``unique`` só é informativo no SSS."""

    estimate: DefectiveSet
    algorithm: Algorithm
    unique: Uniqueness = Uniqueness.UNKNOWN
    exact_size_k: bool = False
    nodes: int = 0

    def __len__(self) -> int:
        return len(self.estimate)

    def succeeded(self, K: DefectiveSet) -> bool:
        return self.estimate.items == K.items


@dataclass(frozen=True)
class CoverProblem:
    """
    Recorte do problema de cobertura: ``coverage[i, j]`` indica se o candidato
    ``items[j]`` está no teste positivo ``positive_tests[i]``.
    """

    items: np.ndarray
    positive_tests: np.ndarray
    coverage: np.ndarray


def _check_dimensions(design: TestDesign, y: OutcomeVector):
    if len(y) != design.T:
        raise DomainError(f"y tem comprimento {len(y)}, a matriz tem T={design.T}.")


def _result(
    items,
    design: TestDesign,
    algorithm: Algorithm,
    k: Optional[int],
    unique: Uniqueness = Uniqueness.UNKNOWN,
    nodes: int = 0,
) -> DecodeResult:
    estimate = DefectiveSet(tuple(sorted(int(i) for i in items)), design.n)
    return DecodeResult(
        estimate=estimate,
        algorithm=algorithm,
        unique=unique,
        exact_size_k=k is not None and len(estimate) == k,
        nodes=nodes,
    )


def possible_defectives(design: TestDesign, y: OutcomeVector) -> np.ndarray:
    """Itens que não aparecem em nenhum teste negativo, em ordem crescente."""
    _check_dimensions(design, y)
    negatives = ~y.bits
    if negatives.any():
        ruled_out = np.bitwise_or.reduce(design.rows[negatives], axis=0)
    else:
        ruled_out = np.zeros(design.rows.shape[1], dtype=np.uint8)
    alive = np.unpackbits(~ruled_out, count=design.n, bitorder="little")
    return np.flatnonzero(alive)


def cover_problem(design: TestDesign, y: OutcomeVector) -> CoverProblem:
    items = possible_defectives(design, y)
    positives = y.positives()
    coverage = design.columns(items)[positives]
    return CoverProblem(items=items, positive_tests=positives, coverage=coverage)


def comp_decode(
    design: TestDesign, y: OutcomeVector, k: Optional[int] = None
) -> DecodeResult:
    """COMP: declara defeituoso todo item que não está em teste negativo."""
    return _result(possible_defectives(design, y), design, Algorithm.COMP, k)


def _definite_defectives(problem: CoverProblem) -> np.ndarray:
    """Índices (no recorte) dos candidatos que são o único candidato de algum teste."""
    if problem.coverage.size == 0:
        return np.zeros(0, dtype=np.int64)
    counts = problem.coverage.sum(axis=1)
    sole_rows = problem.coverage[counts == 1]
    return np.unique(sole_rows.argmax(axis=1))


def dd_decode(
    design: TestDesign, y: OutcomeVector, k: Optional[int] = None
) -> DecodeResult:
    """DD: só declara os defeituosos certos, sem falsos positivos."""
    problem = cover_problem(design, y)
    definite = problem.items[_definite_defectives(problem)]
    return _result(definite, design, Algorithm.DD, k)


def _greedy_cover(problem: CoverProblem) -> np.ndarray:
    """Parte dos defeituosos certos e acrescenta gulosamente quem cobre mais testes."""
    chosen = np.zeros(problem.items.size, dtype=bool)
    chosen[_definite_defectives(problem)] = True
    coverage = problem.coverage
    if coverage.size == 0:
        return chosen
    uncovered = ~coverage[:, chosen].any(axis=1)
    while uncovered.any():
        gains = coverage[uncovered].sum(axis=0)
        best = int(np.argmax(gains))
        if gains[best] == 0:
            logging.warning(
                "Resultados inconsistentes: há teste positivo sem candidato possível."
            )
            break
        chosen[best] = True
        uncovered &= ~coverage[:, best]
    return chosen


def scomp_decode(
    design: TestDesign, y: OutcomeVector, k: Optional[int] = None
) -> DecodeResult:
    """SCOMP: DD seguido de cobertura gulosa dos testes positivos restantes."""
    problem = cover_problem(design, y)
    chosen = _greedy_cover(problem)
    return _result(problem.items[chosen], design, Algorithm.SCOMP, k)


class _SmallestCoverSearch:
    """
    Branch-and-bound para a menor cobertura dos testes positivos.

    Ramifica no teste descoberto com menos candidatos disponíveis; o i-ésimo
    ramo inclui o i-ésimo candidato e exclui os anteriores, de modo que cada
    conjunto é gerado no máximo uma vez. O limite inferior é o número de
    testes descobertos com candidatos disjuntos, escolhidos gulosamente.
    Guarda até duas soluções de tamanho mínimo para decidir a unicidade.
    """

    def __init__(self, test_masks: list[int], budget: int, incumbent: int, size: int):
        self.test_masks = test_masks
        self.budget = budget
        self.nodes = 0
        self.best_size = size
        self.incumbent = incumbent
        self.solutions: list[int] = []

    def _lower_bound(self, uncovered: list[int], excluded: int) -> int:
        used = 0
        count = 0
        for mask in uncovered:
            available = mask & ~excluded
            if available & used == 0:
                used |= available
                count += 1
        return count

    def _record(self, chosen: int, size: int):
        if size < self.best_size:
            self.best_size = size
            self.solutions = [chosen]
            self.incumbent = chosen
        elif size == self.best_size and len(self.solutions) < 2:
            if chosen not in self.solutions:
                self.solutions.append(chosen)
                if len(self.solutions) == 1:
                    self.incumbent = chosen

    def search(self, chosen: int, excluded: int, uncovered: list[int], size: int):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError(
                f"Busca do SSS excedeu o orçamento de {self.budget} nós.",
                incumbent=self.incumbent,
                nodes=self.nodes,
            )
        if not uncovered:
            self._record(chosen, size)
            return

        limit = self.best_size if len(self.solutions) < 2 else self.best_size - 1
        if size + self._lower_bound(uncovered, excluded) > limit:
            return

        branch_mask = min(uncovered, key=lambda m: (m & ~excluded).bit_count())
        available = branch_mask & ~excluded
        while available:
            bit = available & -available
            available ^= bit
            remaining = [m for m in uncovered if not m & bit]
            self.search(chosen | bit, excluded, remaining, size + 1)
            excluded |= bit


def sss_decode(
    design: TestDesign,
    y: OutcomeVector,
    budget: int = DEFAULT_SSS_NODE_BUDGET,
    k: Optional[int] = None,
) -> DecodeResult:
    """
    SSS: menor conjunto satisfatório, exato, por branch-and-bound.

    Marca ``not-unique`` quando existe outro conjunto satisfatório distinto do
    mesmo tamanho mínimo. Se o orçamento de nós acabar, levanta
    BudgetExceededError com a melhor solução conhecida em ``incumbent``.
    """
    problem = cover_problem(design, y)
    m = problem.items.size

    def to_items(mask: int) -> list[int]:
        return [int(problem.items[j]) for j in range(m) if mask >> j & 1]

    if problem.positive_tests.size == 0:
        return _result([], design, Algorithm.SSS, k, Uniqueness.UNIQUE)

    test_masks = []
    for row in problem.coverage:
        mask = 0
        for j in np.flatnonzero(row):
            mask |= 1 << int(j)
        if mask == 0:
            raise DomainError("Resultados inconsistentes: teste positivo sem candidato possível.")
        test_masks.append(mask)
    test_masks = sorted(set(test_masks), key=lambda mask: (mask.bit_count(), mask))

    greedy = _greedy_cover(problem)
    greedy_mask = sum(1 << int(j) for j in np.flatnonzero(greedy))
    searcher = _SmallestCoverSearch(
        test_masks, budget, incumbent=greedy_mask, size=greedy_mask.bit_count()
    )
    try:
        searcher.search(0, 0, test_masks, 0)
    except BudgetExceededError as e:
        logging.warning(f"SSS truncado após {e.nodes} nós; devolvendo a melhor solução.")
        e.incumbent = _result(
            to_items(searcher.incumbent), design, Algorithm.SSS, k, nodes=e.nodes
        )
        raise

    unique = Uniqueness.UNIQUE if len(searcher.solutions) == 1 else Uniqueness.NOT_UNIQUE
    return _result(
        to_items(searcher.solutions[0]),
        design,
        Algorithm.SSS,
        k,
        unique=unique,
        nodes=searcher.nodes,
    )


def sole_defective_indicator(design: TestDesign, K: DefectiveSet) -> bool:
    """Verdadeiro se cada item de K é o único membro de K em algum teste."""
    if len(K) == 0:
        return True
    columns = design.columns(K.as_array())
    sole_rows = columns[columns.sum(axis=1) == 1]
    return bool(sole_rows.any(axis=0).all())


DECODERS = {
    Algorithm.COMP: comp_decode,
    Algorithm.DD: dd_decode,
    Algorithm.SCOMP: scomp_decode,
}


def decode(
    algorithm: Algorithm,
    design: TestDesign,
    y: OutcomeVector,
    k: Optional[int] = None,
    budget: int = DEFAULT_SSS_NODE_BUDGET,
) -> DecodeResult:
    if algorithm is Algorithm.SSS:
        return sss_decode(design, y, budget=budget, k=k)
    return DECODERS[algorithm](design, y, k=k)
