"""
Verdade de referência por força bruta para instâncias pequenas.

Enumera conjuntos satisfatórios, confere as afirmações dos decodificadores e
materializa os argumentos de contagem (1/d(y), sanduíche SSS ⊆ L ⊆ COMP e a
cota da união) sobre instâncias concretas.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from group_testing.decoders import (
    DEFAULT_SSS_NODE_BUDGET,
    DecodeResult,
    Uniqueness,
    comp_decode,
    cover_problem,
    sss_decode,
)
from group_testing.design import (
    DefectiveSet,
    OutcomeVector,
    Purpose,
    TestDesign,
    derive_seed,
    generate_design,
    is_satisfying,
    make_rng,
    run_tests,
    sample_defective_set,
)
from group_testing.errors import DomainError, EnumerationCapError

INVARIANTS = (
    "k_in_family",
    "comp_maximal",
    "sss_exact",
    "sandwich_sets",
    "sandwich_argument",
    "union_bound",
)
MAX_COUNTEREXAMPLES = 10

CompDecoder = Callable[[TestDesign, OutcomeVector, Optional[int]], DecodeResult]


@dataclass(frozen=True)
class EnumerationCaps:
    max_n_unrestricted: int = 16
    max_n_fixed_k: int = 30
    max_subsets_fixed_k: int = 10_000_000

    @classmethod
    def from_config(cls, oracle_cfg: dict) -> "EnumerationCaps":
        return cls(
            max_n_unrestricted=int(oracle_cfg.get("max_n_unrestricted", 16)),
            max_n_fixed_k=int(oracle_cfg.get("max_n_fixed_k", 30)),
            max_subsets_fixed_k=int(oracle_cfg.get("max_subsets_fixed_k", 10_000_000)),
        )

    def allows(self, n: int, k: Optional[int]) -> bool:
        try:
            self.check(n, k)
        except EnumerationCapError:
            return False
        return True

    def check(self, n: int, k: Optional[int]):
        if n <= self.max_n_unrestricted:
            return
        if k is None:
            raise EnumerationCapError(
                f"n={n} excede o limite de enumeração irrestrita ({self.max_n_unrestricted})."
            )
        if n > self.max_n_fixed_k or math.comb(n, k) > self.max_subsets_fixed_k:
            raise EnumerationCapError(
                f"Enumeração de C({n},{k}) subconjuntos excede os limites configurados "
                f"(n <= {self.max_n_fixed_k}, C(n,k) <= {self.max_subsets_fixed_k})."
            )


@dataclass(frozen=True)
class SatisfyingFamily:
    """
    Todos os conjuntos satisfatórios de (design, y), em ordem colexicográfica.

    Com ``size_filter`` definido, só os de tamanho k; ``d`` é o número de membros.
    """

    sets: list[DefectiveSet]
    size_filter: Optional[int] = None
    d: int = 0

    def __post_init__(self):
        object.__setattr__(self, "d", len(self.sets))

    def __len__(self) -> int:
        return self.d

    def __contains__(self, L: DefectiveSet) -> bool:
        return any(s.items == L.items for s in self.sets)

    def union(self) -> DefectiveSet:
        items = {i for s in self.sets for i in s.items}
        n = self.sets[0].n if self.sets else None
        return DefectiveSet.of(items, n)

    def largest(self) -> list[DefectiveSet]:
        if not self.sets:
            return []
        size = max(len(s) for s in self.sets)
        return [s for s in self.sets if len(s) == size]

    def smallest(self) -> list[DefectiveSet]:
        if not self.sets:
            return []
        size = min(len(s) for s in self.sets)
        return [s for s in self.sets if len(s) == size]

    def of_size(self, k: int) -> list[DefectiveSet]:
        return [s for s in self.sets if len(s) == k]

    def to_dict(self) -> dict:
        return {
            "size_filter": self.size_filter,
            "d": self.d,
            "sets": [list(s.items) for s in self.sets],
        }


def _colex_combinations(m: int, k: int):
    """Máscaras de m bits com exatamente k bits ligados, em ordem crescente (Gosper)."""
    if k == 0:
        yield 0
        return
    mask = (1 << k) - 1
    limit = 1 << m
    while mask < limit:
        yield mask
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


def enumerate_satisfying(
    design: TestDesign,
    y: OutcomeVector,
    k: Optional[int] = None,
    caps: EnumerationCaps = EnumerationCaps(),
) -> SatisfyingFamily:
    """
    Enumera exaustivamente os conjuntos satisfatórios.

    Todo conjunto satisfatório está contido nos possíveis defeituosos do COMP,
    então a enumeração percorre apenas os subconjuntos desse recorte; a ordem
    das máscaras coincide com a ordem colexicográfica sobre os itens.
    """
    if k is not None and not 0 <= k <= design.n:
        raise DomainError(f"k deve estar em [0, {design.n}], recebido {k}.")
    caps.check(design.n, k)

    problem = cover_problem(design, y)
    m = problem.items.size
    full = (1 << problem.positive_tests.size) - 1
    item_cover = []
    for j in range(m):
        cover = 0
        for t in np.flatnonzero(problem.coverage[:, j]):
            cover |= 1 << int(t)
        item_cover.append(cover)

    def to_set(mask: int) -> DefectiveSet:
        items = tuple(int(problem.items[j]) for j in range(m) if mask >> j & 1)
        return DefectiveSet(items, design.n)

    found = []
    if k is None:
        covers = [0] * (1 << m)
        for mask in range(1 << m):
            if mask:
                low = mask & -mask
                covers[mask] = covers[mask ^ low] | item_cover[low.bit_length() - 1]
            if covers[mask] == full:
                found.append(to_set(mask))
    elif k <= m:
        for mask in _colex_combinations(m, k):
            cover = 0
            rest = mask
            while rest:
                low = rest & -rest
                cover |= item_cover[low.bit_length() - 1]
                rest ^= low
            if cover == full:
                found.append(to_set(mask))

    logging.debug(
        f"Enumeração: n={design.n}, T={design.T}, k={k}, {len(found)} conjuntos satisfatórios."
    )
    return SatisfyingFamily(sets=found, size_filter=k)


def posterior_success_bound(family: SatisfyingFamily) -> float:
    """Melhor probabilidade de acerto possível dado y: 1/d(y)."""
    if family.d < 1:
        raise DomainError("Família de conjuntos satisfatórios vazia: 1/d(y) indefinido.")
    return 1.0 / family.d


@dataclass(frozen=True)
class SandwichReport:
    k: int
    sss_size: int
    comp_size: int
    premise: bool
    d: int
    holds: bool
    witnesses: list[DefectiveSet] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "sss_size": self.sss_size,
            "comp_size": self.comp_size,
            "premise": self.premise,
            "d": self.d,
            "holds": self.holds,
            "witnesses": [list(w.items) for w in self.witnesses],
        }


def verify_sandwich_argument(
    design: TestDesign,
    y: OutcomeVector,
    k: int,
    caps: EnumerationCaps = EnumerationCaps(),
    comp: Optional[DecodeResult] = None,
    sss: Optional[DecodeResult] = None,
) -> SandwichReport:
    """
    Confere na instância que (|SSS| < k e |COMP| > k) implica ao menos dois
    conjuntos satisfatórios de tamanho k, devolvendo os dois primeiros.
    """
    if comp is None:
        comp = comp_decode(design, y, k)
    if sss is None:
        sss = sss_decode(design, y, k=k)
    family = enumerate_satisfying(design, y, k=k, caps=caps)
    premise = len(sss) < k and len(comp) > k
    holds = (not premise) or family.d >= 2
    return SandwichReport(
        k=k,
        sss_size=len(sss),
        comp_size=len(comp),
        premise=premise,
        d=family.d,
        holds=holds,
        witnesses=family.sets[:2] if premise else [],
    )


def sample_intermediate_set(
    sss: DefectiveSet, comp: DefectiveSet, rng: np.random.Generator
) -> DefectiveSet:
    """Sorteia L com SSS ⊆ L ⊆ COMP, incluindo cada item extra com probabilidade 1/2."""
    extra = [i for i in comp.items if i not in set(sss.items)]
    keep = rng.random(len(extra)) < 0.5
    chosen = [i for i, flag in zip(extra, keep) if flag]
    return DefectiveSet.of(list(sss.items) + chosen, comp.n)


@dataclass
class InvariantReport:
    instances: int = 0
    checked: dict = field(default_factory=lambda: {name: 0 for name in INVARIANTS})
    violations: dict = field(default_factory=lambda: {name: 0 for name in INVARIANTS})
    counterexamples: dict = field(default_factory=lambda: {name: [] for name in INVARIANTS})
    union_counts: dict = field(
        default_factory=lambda: {
            "sss_lt_k": 0,
            "comp_gt_k": 0,
            "both": 0,
            "sss_eq_k": 0,
            "comp_eq_k": 0,
        }
    )
    sandwich_premise: int = 0
    mean_posterior_bound: float = 0.0

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def record(self, name: str, ok: bool, seed: int):
        self.checked[name] += 1
        if not ok:
            self.violations[name] += 1
            if len(self.counterexamples[name]) < MAX_COUNTEREXAMPLES:
                self.counterexamples[name].append(seed)

    def union_frequencies(self) -> dict:
        total = max(self.instances, 1)
        return {key: value / total for key, value in self.union_counts.items()}

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "instances": self.instances,
            "checked": dict(self.checked),
            "violations": dict(self.violations),
            "counterexamples": {k: list(v) for k, v in self.counterexamples.items()},
            "union_counts": dict(self.union_counts),
            "union_frequencies": self.union_frequencies(),
            "sandwich_premise": self.sandwich_premise,
            "mean_posterior_bound": self.mean_posterior_bound,
        }


@dataclass(frozen=True)
class OracleInstance:
    seed: int
    n: int
    k: int
    p: float
    T: int
    K: DefectiveSet
    design: TestDesign
    y: OutcomeVector


def draw_instance(
    master_seed: int,
    index: int,
    min_n: int,
    max_n: int,
    max_k: int,
    p_values: Sequence[float],
) -> OracleInstance:
    """Instância aleatória reproduzível a partir de (master_seed, index)."""
    seed = derive_seed(master_seed, index, Purpose.ORACLE)
    rng = make_rng(seed, Purpose.ORACLE)
    n = int(rng.integers(min_n, max_n + 1))
    k = int(rng.integers(1, min(max_k, n - 1) + 1))
    p = float(p_values[int(rng.integers(0, len(p_values)))])
    T = int(rng.integers(1, 2 * n + 1))
    K = sample_defective_set(n, k, seed)
    design = generate_design(n, T, p, seed)
    return OracleInstance(seed, n, k, p, T, K, design, run_tests(design, K))


def run_invariant_suite(
    seeds: int = 1000,
    master_seed: int = 0,
    min_n: int = 4,
    max_n: int = 12,
    max_k: int = 3,
    p_values: Sequence[float] = (0.1, 0.3, 0.5),
    sandwich_samples: int = 5,
    comp_decoder: CompDecoder = comp_decode,
    caps: EnumerationCaps = EnumerationCaps(),
    sss_budget: int = DEFAULT_SSS_NODE_BUDGET,
) -> InvariantReport:
    """
    Roda a bateria de invariantes sobre ``seeds`` instâncias aleatórias.

    ``comp_decoder`` pode ser trocado por uma versão defeituosa para conferir
    que a bateria de fato detecta violações.
    """
    if min_n < 2 or max_n < min_n:
        raise DomainError(f"Faixa de n inválida: [{min_n}, {max_n}].")
    if max_k < 1 or not p_values:
        raise DomainError("A bateria exige max_k >= 1 e ao menos um valor de p.")
    caps.check(max_n, None)

    report = InvariantReport()
    posterior_total = 0.0
    for index in range(seeds):
        inst = draw_instance(master_seed, index, min_n, max_n, max_k, p_values)
        family = enumerate_satisfying(inst.design, inst.y, caps=caps)
        comp = comp_decoder(inst.design, inst.y, inst.k)
        sss = sss_decode(inst.design, inst.y, budget=sss_budget, k=inst.k)
        report.instances += 1

        report.record("k_in_family", inst.K in family, inst.seed)

        largest = family.largest()
        comp_ok = (
            len(largest) == 1
            and comp.estimate.items == largest[0].items
            and comp.estimate.items == family.union().items
        )
        report.record("comp_maximal", comp_ok, inst.seed)

        smallest = family.smallest()
        sss_ok = bool(smallest) and len(sss) == len(smallest[0])
        if sss.unique is Uniqueness.UNIQUE:
            sss_ok = sss_ok and len(smallest) == 1
        elif sss.unique is Uniqueness.NOT_UNIQUE:
            sss_ok = sss_ok and len(smallest) >= 2
        report.record("sss_exact", sss_ok, inst.seed)

        if sss.estimate.issubset(comp.estimate):
            rng = make_rng(inst.seed, Purpose.ORACLE, 1)
            sandwich_ok = all(
                is_satisfying(
                    inst.design, inst.y, sample_intermediate_set(sss.estimate, comp.estimate, rng)
                )
                for _ in range(sandwich_samples)
            )
        else:
            sandwich_ok = False
        report.record("sandwich_sets", sandwich_ok, inst.seed)

        sandwich = verify_sandwich_argument(
            inst.design, inst.y, inst.k, caps=caps, comp=comp, sss=sss
        )
        report.sandwich_premise += int(sandwich.premise)
        report.record("sandwich_argument", sandwich.holds, inst.seed)

        sss_lt = len(sss) < inst.k
        comp_gt = len(comp) > inst.k
        sss_eq = len(sss) == inst.k
        comp_eq = len(comp) == inst.k
        counts = report.union_counts
        counts["sss_lt_k"] += int(sss_lt)
        counts["comp_gt_k"] += int(comp_gt)
        counts["both"] += int(sss_lt and comp_gt)
        counts["sss_eq_k"] += int(sss_eq)
        counts["comp_eq_k"] += int(comp_eq)
        report.record(
            "union_bound", int(sss_lt and comp_gt) >= 1 - int(sss_eq) - int(comp_eq), inst.seed
        )

        if sandwich.d >= 1:
            posterior_total += posterior_success_bound(
                SatisfyingFamily(family.of_size(inst.k), size_filter=inst.k)
            )

    report.mean_posterior_bound = posterior_total / max(report.instances, 1)
    logging.info(
        f"Bateria de invariantes: {report.instances} instâncias, "
        f"{sum(report.violations.values())} violações."
    )
    return report
