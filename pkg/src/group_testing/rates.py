"""
Fórmulas fechadas de taxa, capacidade e limiares de número de testes.

Convenções:
    - ``log`` é sempre na base 2; logaritmos naturais aparecem como ``ln``.
    - ν é o parâmetro de densidade da matriz, com p = 1 − e^(−ν/k).
    - Taxas são medidas em bits por teste; limiares em número de testes.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from group_testing.errors import DegenerateBoundError, DomainError

LN2 = math.log(2)
INV_E_LN2 = 1.0 / (math.e * LN2)
EXACT_BINOM_MAX_N = 64

NU_SEARCH_BOUNDS = (1e-3, 10.0)
NU_GRID_POINTS = 200
NU_TOLERANCE = 1e-9

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


class BoundKind(str, Enum):
    CAPACITY = "Capacity"
    COUNTING_BOUND = "CountingBound"
    COMP_RATE = "CompRate"
    DD_RATE = "DdRate"
    T_STAR = "TStar"
    T_TYP = "TTyp"
    T_COMP = "TComp"
    T_SSS = "TSss"

    @property
    def is_rate(self) -> bool:
        return self in RATE_KINDS


RATE_KINDS = frozenset(
    {
        BoundKind.CAPACITY,
        BoundKind.COUNTING_BOUND,
        BoundKind.COMP_RATE,
        BoundKind.DD_RATE,
    }
)


@dataclass(frozen=True)
class ProblemScale:
    """
    Escala do problema: n itens, k defeituosos e o parâmetro de esparsidade θ.

    Quando n e k são dados e θ não, θ é derivado como ln k / ln n. A coerência
    entre k e n^θ não é verificada: são parametrizações alternativas.
    """

    n: Optional[int] = None
    k: Optional[int] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.n is not None and self.n < 1:
            raise DomainError(f"n deve ser positivo, recebido {self.n}.")
        if self.k is not None:
            if self.k < 0:
                raise DomainError(f"k deve ser não negativo, recebido {self.k}.")
            if self.n is not None and self.k > self.n:
                raise DomainError(f"k={self.k} excede n={self.n}.")
        if self.theta is not None:
            if not 0.0 <= self.theta < 1.0:
                raise DomainError(f"theta deve estar em [0, 1), recebido {self.theta}.")
        elif self.n is not None and self.k is not None:
            if self.n > 1 and 1 <= self.k < self.n:
                object.__setattr__(self, "theta", math.log(self.k) / math.log(self.n))


@dataclass(frozen=True)
class NuParam:
    """Parâmetro ν e a probabilidade de inclusão p = 1 − e^(−ν/k) associada."""

    nu: float
    k: int

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu deve ser positivo, recebido {self.nu}.")
        if self.k < 1:
            raise DomainError(f"k deve ser ao menos 1, recebido {self.k}.")
        if not 0.0 < self.p < 1.0:
            raise DomainError(
                f"nu={self.nu} com k={self.k} leva p para fora de (0, 1)."
            )

    @property
    def p(self) -> float:
        return nu_to_p(self.nu, self.k)

    @property
    def q(self) -> float:
        return math.exp(-self.nu / self.k)

    @classmethod
    def from_p(cls, p: float, k: int) -> "NuParam":
        return cls(nu=p_to_nu(p, k), k=k)


@dataclass(frozen=True)
class RateBound:
    """
    Uma taxa ou um limiar de número de testes, com o contexto que o produziu.

    ``optimal_nu`` só é preenchido quando a fórmula envolve otimização em ν.
    ``regime`` identifica o ramo da fórmula de capacidade usado.
    """

    kind: BoundKind
    value: float
    scale: ProblemScale
    nu_param: Optional[NuParam] = None
    optimal_nu: Optional[float] = None
    regime: Optional[str] = None

    def __post_init__(self):
        if not self.value >= 0:
            raise DomainError(f"{self.kind.value}: valor negativo {self.value}.")
        if self.kind.is_rate and self.value > 1.0 + 1e-12:
            raise DomainError(
                f"{self.kind.value}: taxa {self.value} acima do limite de contagem."
            )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "n": self.scale.n,
            "k": self.scale.k,
            "theta": self.scale.theta,
            "nu": self.nu_param.nu if self.nu_param else None,
            "p": self.nu_param.p if self.nu_param else None,
            "optimal_nu": self.optimal_nu,
            "regime": self.regime,
        }


def _check_integer(name: str, value) -> int:
    try:
        return int(value.__index__())
    except (AttributeError, TypeError):
        raise DomainError(f"{name} deve ser inteiro, recebido {value!r}.") from None


def binary_entropy(x: float) -> float:
    """Entropia binária h(x) em bits, com h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Entropia binária exige x em [0, 1], recebido {x}.")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log1p(-x) / LN2)


def log_binom(n: int, k: int) -> float:
    """
    log2 C(n, k): exato por inteiros até n = 64, via log-gamma acima disso.
    """
    n = _check_integer("n", n)
    k = _check_integer("k", k)
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"log_binom exige 0 <= k <= n, recebido n={n}, k={k}.")
    if n <= EXACT_BINOM_MAX_N:
        return math.log2(math.comb(n, k))
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / LN2)


def nu_to_p(nu: float, k: int) -> float:
    if not nu > 0 or k < 1:
        raise DomainError(f"nu_to_p exige nu > 0 e k >= 1, recebido nu={nu}, k={k}.")
    return -math.expm1(-nu / k)


def p_to_nu(p: float, k: int) -> float:
    if not 0.0 < p < 1.0 or k < 1:
        raise DomainError(f"p_to_nu exige p em (0, 1) e k >= 1, recebido p={p}, k={k}.")
    return -k * math.log1p(-p)


def _golden_section_search(
    f: Callable[[float], float], a: float, b: float, tol: float = NU_TOLERANCE
) -> float:
    """
    Busca da seção áurea pelo mínimo de f unimodal em [a, b]; para quando o
    intervalo tiver largura <= tol e devolve o melhor dos extremos avaliados.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return (a + b) / 2

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(steps - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    return c if yc < yd else d


def _minimize_over_nu(objective: Callable[[float], float]) -> tuple[float, float]:
    """Grade grossa de 200 pontos para o colchete, seção áurea para o refino."""
    grid = np.linspace(*NU_SEARCH_BOUNDS, NU_GRID_POINTS)
    values = [objective(float(nu)) for nu in grid]
    i = int(np.argmin(values))
    lower = float(grid[max(i - 1, 0)])
    upper = float(grid[min(i + 1, len(grid) - 1)])
    nu = _golden_section_search(objective, lower, upper)
    value = objective(nu)
    if values[i] < value:
        return float(grid[i]), values[i]
    return nu, value


def _capacity_first_term(nu: float, theta: float) -> float:
    return nu * math.exp(-nu) / LN2 * (1.0 - theta) / theta


def _capacity_second_term(nu: float) -> float:
    return binary_entropy(math.exp(-nu))


def theta_star() -> float:
    """Ponto θ* ≈ 0.359 a partir do qual o primeiro termo domina em ν = 1."""
    return 1.0 / (1.0 + binary_entropy(math.exp(-1.0)) * math.e * LN2)


def regime(theta: float) -> str:
    """Nome do ramo da fórmula de capacidade para este θ."""
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"theta deve estar em [0, 1), recebido {theta}.")
    if theta == 0.0:
        return "bounded-k"
    if theta <= 1.0 / 3.0:
        return "counting"
    if theta >= theta_star():
        return "first-term"
    return "maxmin"


def capacity(theta: float) -> RateBound:
    """
    Capacidade C(θ) = max_ν min{ (ν e^(−ν)/ln 2)(1−θ)/θ, h(e^(−ν)) }.

    Nos dois regimes extremos devolve a forma fechada; só em (1/3, θ*)
    resolve o max-min numericamente.
    """
    branch = regime(theta)
    scale = ProblemScale(theta=theta)
    if branch in ("bounded-k", "counting"):
        return RateBound(
            BoundKind.CAPACITY, 1.0, scale, optimal_nu=LN2, regime=branch
        )
    if branch == "first-term":
        value = INV_E_LN2 * (1.0 - theta) / theta
        return RateBound(
            BoundKind.CAPACITY, value, scale, optimal_nu=1.0, regime=branch
        )

    nu, negated = _minimize_over_nu(
        lambda v: -min(_capacity_first_term(v, theta), _capacity_second_term(v))
    )
    value = min(-negated, 1.0)
    logging.debug(f"Capacidade em theta={theta}: C={value:.9f}, nu={nu:.9f}")
    return RateBound(BoundKind.CAPACITY, value, scale, optimal_nu=nu, regime=branch)


def counting_bound(theta: float = 0.0) -> RateBound:
    return RateBound(
        BoundKind.COUNTING_BOUND, 1.0, ProblemScale(theta=theta), regime="counting"
    )


def adaptive_gap(theta: float) -> float:
    """Taxa perdida frente ao teste adaptativo ótimo (capacidade 1)."""
    return max(0.0, 1.0 - capacity(theta).value)


def comp_max_rate(theta: float) -> RateBound:
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"theta deve estar em [0, 1), recebido {theta}.")
    return RateBound(
        BoundKind.COMP_RATE, INV_E_LN2 * (1.0 - theta), ProblemScale(theta=theta)
    )


def dd_rate(theta: float) -> RateBound:
    if not 0.0 <= theta < 1.0:
        raise DomainError(f"theta deve estar em [0, 1), recebido {theta}.")
    factor = 1.0 if theta == 0.0 else min((1.0 - theta) / theta, 1.0)
    return RateBound(BoundKind.DD_RATE, INV_E_LN2 * factor, ProblemScale(theta=theta))


def _min_max_threshold(
    n: int, k: int, information_bits: float, kind: BoundKind
) -> RateBound:
    k_ln_k = k * math.log(k)

    def objective(nu: float) -> float:
        first = k_ln_k / (nu * math.exp(-nu))
        second = information_bits / _capacity_second_term(nu)
        return max(first, second)

    nu, value = _minimize_over_nu(objective)
    return RateBound(
        kind,
        value,
        ProblemScale(n=n, k=k),
        nu_param=NuParam(nu=nu, k=k),
        optimal_nu=nu,
    )


def t_star(n: int, k: int) -> RateBound:
    """
    T* = min_ν max{ k ln k / (ν e^(−ν)), log2 C(n,k) / h(e^(−ν)) },
    com o log2 C(n,k) exato.
    """
    n = _check_integer("n", n)
    k = _check_integer("k", k)
    if not 1 <= k < n:
        raise DomainError(f"t_star exige 1 <= k < n, recebido n={n}, k={k}.")
    return _min_max_threshold(n, k, log_binom(n, k), BoundKind.T_STAR)


def t_sss(n: int, k: int) -> RateBound:
    """Mesmo min-max de t_star, com a forma assintótica k log2(n/k)."""
    n = _check_integer("n", n)
    k = _check_integer("k", k)
    if not 2 <= k < n:
        raise DomainError(f"t_sss exige 2 <= k < n, recebido n={n}, k={k}.")
    return _min_max_threshold(n, k, k * math.log2(n / k), BoundKind.T_SSS)


def t_typ(n: int, k: int, p: float) -> RateBound:
    """Limite de tipicidade log2 C(n,k) / h((1−p)^k)."""
    n = _check_integer("n", n)
    k = _check_integer("k", k)
    if not 0.0 < p < 1.0:
        raise DomainError(f"t_typ exige p em (0, 1), recebido {p}.")
    if not 1 <= k <= n:
        raise DomainError(f"t_typ exige 1 <= k <= n, recebido n={n}, k={k}.")
    negative_probability = math.exp(k * math.log1p(-p))
    entropy = binary_entropy(negative_probability)
    if negative_probability in (0.0, 1.0) or entropy == 0.0:
        raise DegenerateBoundError(
            f"(1-p)^k = {negative_probability} torna o limite de tipicidade indefinido."
        )
    return RateBound(
        BoundKind.T_TYP,
        log_binom(n, k) / entropy,
        ProblemScale(n=n, k=k),
        nu_param=NuParam.from_p(p, k),
    )


def t_comp(n: float, k: int, nu: float = 1.0) -> RateBound:
    """
    Limiar do COMP, k ln n / (ν e^(−ν)); em ν = 1 vale e·k·ln n.
    """
    k = _check_integer("k", k)
    if n < 2 or k < 1:
        raise DomainError(f"t_comp exige n >= 2 e k >= 1, recebido n={n}, k={k}.")
    if not nu > 0:
        raise DomainError(f"nu deve ser positivo, recebido {nu}.")
    if nu == 1.0:
        value = math.e * k * math.log(n)
    else:
        value = k * math.log(n) / (nu * math.exp(-nu))
    scale = ProblemScale(n=int(n), k=k) if float(n).is_integer() else ProblemScale(k=k)
    return RateBound(BoundKind.T_COMP, value, scale, optimal_nu=1.0 if nu == 1.0 else None)


def rate(n: int, k: int, T: int) -> float:
    """Taxa R = log2 C(n,k) / T em bits por teste."""
    T = _check_integer("T", T)
    if T < 1:
        raise DomainError(f"A taxa exige T >= 1, recebido T={T}.")
    return log_binom(n, k) / T
