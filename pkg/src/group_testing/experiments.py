"""
Harness de Monte Carlo e fórmulas exatas de probabilidade de sucesso.

Cada tentativa é determinada por (master_seed, T, índice da tentativa): a
semente derivada alimenta o sorteio de K e da matriz, de modo que o resultado
não depende da ordem nem do número de processos usados.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional, Sequence, Union

import mpmath
import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from scipy.stats import norm

from group_testing import rates
from group_testing.decoders import (
    DEFAULT_SSS_NODE_BUDGET,
    Algorithm,
    Uniqueness,
    comp_decode,
    decode,
    sole_defective_indicator,
)
from group_testing.design import (
    DEFAULT_DENSE_THRESHOLD,
    DEFAULT_MAX_CELLS,
    PRNG_NAME,
    PRNG_VERSION,
    SEED_LIMIT,
    OutcomeVector,
    derive_seed,
    generate_design,
    run_tests,
    sample_defective_set,
)
from group_testing.errors import (
    BudgetExceededError,
    ConfigValidationError,
    DomainError,
    NoCrossingError,
)
from group_testing.oracle import EnumerationCaps, enumerate_satisfying

SCHEMA_VERSION = 1
CANCELLATION_TOLERANCE = 1e-8
CURVE_COLUMNS = [
    "decoder",
    "T",
    "trials",
    "successes",
    "success",
    "ci_low",
    "ci_high",
    "truncated",
    "lenient_success",
    "comp_size_gt_k",
    "sss_size_lt_k",
    "sss_not_unique",
    "sole_defective",
]
REFERENCE_THRESHOLDS = ("t_comp", "t_star", "t_sss", "t_typ")


def _parse_decoders(value) -> tuple[Algorithm, ...]:
    if isinstance(value, (str, Algorithm)):
        value = [value]
    return tuple(dict.fromkeys(Algorithm.parse(v) for v in value))


def _parse_caps(value) -> EnumerationCaps:
    if isinstance(value, EnumerationCaps):
        return value
    if not isinstance(value, dict):
        raise TypeError("esperado um mapeamento com os limites do oráculo")
    return EnumerationCaps.from_config(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuração completa de uma varredura de Monte Carlo.

    Quando nem ``p`` nem ``nu`` são informados usa ν = 1. Quando ``t_grid``
    está vazio, a grade é o limiar de referência multiplicado por
    ``grid_points`` fatores igualmente espaçados em [1 − δ, 1 + δ]; com um só
    ponto, a grade é o próprio limiar de referência.
    """

    n: int
    k: int
    p: Optional[float] = None
    nu: Optional[float] = None
    decoders: tuple[Algorithm, ...] = (Algorithm.COMP,)
    t_grid: tuple[int, ...] = ()
    trials: int = 1000
    master_seed: int = 0
    delta: float = 0.5
    grid_points: int = 10
    reference: str = "t_comp"
    threads: int = 1
    record_trials: bool = False
    oracle_diagnostics: bool = False
    oracle_caps: EnumerationCaps = field(default_factory=EnumerationCaps)
    sss_max_n: int = 30
    sss_budget: int = DEFAULT_SSS_NODE_BUDGET
    max_cells: int = DEFAULT_MAX_CELLS
    dense_threshold: float = DEFAULT_DENSE_THRESHOLD
    confidence: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "decoders", _parse_decoders(self.decoders))
        object.__setattr__(self, "t_grid", tuple(int(t) for t in self.t_grid))
        problems = self.problems()
        if problems:
            raise ConfigValidationError(problems)

    def problems(self) -> list[str]:
        """Todos os problemas de validação, de uma vez."""
        errors = []
        if self.n < 1:
            errors.append(f"n deve ser >= 1, recebido {self.n}.")
        if not 0 <= self.k <= self.n:
            errors.append(f"k deve estar em [0, n], recebido k={self.k}, n={self.n}.")
        if self.p is not None and self.nu is not None:
            errors.append("Informe p ou nu, não ambos.")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            errors.append(f"p deve estar em [0, 1], recebido {self.p}.")
        if self.nu is not None and not self.nu > 0:
            errors.append(f"nu deve ser positivo, recebido {self.nu}.")
        if self.p is None and self.k == 0:
            errors.append("Com k = 0 é preciso informar p explicitamente.")
        if not self.decoders:
            errors.append("Ao menos um decodificador deve ser escolhido.")
        if self.trials < 1:
            errors.append(f"trials deve ser >= 1, recebido {self.trials}.")
        if self.threads < 1:
            errors.append(f"threads deve ser >= 1, recebido {self.threads}.")
        if not 0 <= self.master_seed < SEED_LIMIT:
            errors.append(f"seed deve estar em [0, 2^64), recebido {self.master_seed}.")
        if not 0.0 < self.confidence < 1.0:
            errors.append(f"confidence deve estar em (0, 1), recebido {self.confidence}.")
        if Algorithm.SSS in self.decoders and self.n > self.sss_max_n:
            errors.append(
                f"SSS só é permitido com n <= {self.sss_max_n}; recebido n={self.n}."
            )
        if self.t_grid:
            if any(t < 0 for t in self.t_grid):
                errors.append("t_grid não pode conter valores negativos.")
            if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
                errors.append("t_grid deve ser estritamente crescente.")
            if self.n * max(self.t_grid) > self.max_cells:
                errors.append(
                    f"n*T = {self.n * max(self.t_grid)} excede max_cells = {self.max_cells}."
                )
        else:
            if not 0.0 < self.delta < 1.0:
                errors.append(f"delta deve estar em (0, 1), recebido {self.delta}.")
            if self.grid_points < 1:
                errors.append(f"grid_points deve ser >= 1, recebido {self.grid_points}.")
            if self.reference not in REFERENCE_THRESHOLDS:
                errors.append(
                    f"reference deve ser um de {', '.join(REFERENCE_THRESHOLDS)}; "
                    f"recebido '{self.reference}'."
                )
            if not 1 <= self.k < self.n:
                errors.append("A grade automática exige 1 <= k < n; informe t_grid.")
        return errors

    @property
    def scale(self) -> rates.ProblemScale:
        return rates.ProblemScale(n=self.n, k=self.k)

    @property
    def design_p(self) -> float:
        if self.p is not None:
            return float(self.p)
        return rates.nu_to_p(self.nu if self.nu is not None else 1.0, self.k)

    @property
    def effective_nu(self) -> Optional[float]:
        if self.nu is not None:
            return float(self.nu)
        if self.p is None:
            return 1.0
        if self.k >= 1 and 0.0 < self.p < 1.0:
            return rates.p_to_nu(self.p, self.k)
        return None

    def reference_threshold(self) -> float:
        if self.reference == "t_comp":
            return rates.t_comp(self.n, self.k, self.effective_nu or 1.0).value
        if self.reference == "t_star":
            return rates.t_star(self.n, self.k).value
        if self.reference == "t_sss":
            return rates.t_sss(self.n, self.k).value
        return rates.t_typ(self.n, self.k, self.design_p).value

    def resolved_grid(self) -> tuple[int, ...]:
        if self.t_grid:
            return self.t_grid
        reference = self.reference_threshold()
        if self.grid_points == 1:
            multipliers = np.array([1.0])
        else:
            multipliers = np.linspace(1.0 - self.delta, 1.0 + self.delta, self.grid_points)
        grid = sorted({max(0, int(round(reference * m))) for m in multipliers})
        return tuple(grid)

    @classmethod
    def from_dict(cls, data: dict, defaults: Optional[dict] = None) -> "ExperimentConfig":
        """
        Monta a configuração a partir de um dicionário plano (arquivo YAML de
        execução e flags). Erros de tipo e de domínio são reunidos juntos.
        """
        defaults = defaults or {}
        merged = {**defaults, **{k: v for k, v in data.items() if v is not None}}
        if "seed" in merged and "master_seed" not in merged:
            merged["master_seed"] = merged.pop("seed")
        merged.pop("seed", None)
        if "tests" in merged and "t_grid" not in merged:
            merged["t_grid"] = merged.pop("tests")
        merged.pop("tests", None)

        known = {f.name: f for f in fields(cls)}
        errors = [f"Chave desconhecida na configuração: '{key}'." for key in merged if key not in known]
        converters = {
            "n": int,
            "k": int,
            "p": float,
            "nu": float,
            "trials": int,
            "master_seed": int,
            "delta": float,
            "grid_points": int,
            "threads": int,
            "sss_max_n": int,
            "sss_budget": int,
            "max_cells": int,
            "dense_threshold": float,
            "confidence": float,
            "record_trials": bool,
            "oracle_diagnostics": bool,
            "reference": str,
            "oracle_caps": _parse_caps,
            "t_grid": lambda v: tuple(int(t) for t in ([v] if isinstance(v, (int, str)) else v)),
            "decoders": _parse_decoders,
        }
        values = {}
        for key, value in merged.items():
            if key not in known:
                continue
            try:
                values[key] = converters.get(key, lambda v: v)(value)
            except (TypeError, ValueError) as e:
                errors.append(f"Valor inválido para '{key}': {value!r} ({e}).")
        for required in ("n", "k"):
            if required not in values:
                errors.append(f"Campo obrigatório ausente: '{required}'.")

        if errors:
            try:
                cls(**values)
            except ConfigValidationError as e:
                errors.extend(e.errors)
            except TypeError:
                pass
            raise ConfigValidationError(errors)
        return cls(**values)

    def to_dict(self) -> dict:
        data = {
            "n": self.n,
            "k": self.k,
            "p": self.p,
            "nu": self.nu,
            "design_p": self.design_p,
            "decoders": [d.value for d in self.decoders],
            "t_grid": list(self.resolved_grid()),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "delta": self.delta,
            "grid_points": self.grid_points,
            "reference": self.reference,
            "oracle_diagnostics": self.oracle_diagnostics,
            "sss_budget": self.sss_budget,
            "dense_threshold": self.dense_threshold,
            "confidence": self.confidence,
            "prng": f"{PRNG_NAME}/v{PRNG_VERSION}",
        }
        if self.oracle_diagnostics:
            data["oracle_caps"] = asdict(self.oracle_caps)
        return data


@dataclass(frozen=True)
class DecoderOutcome:
    algorithm: Algorithm
    size: Optional[int]
    success: bool
    lenient_success: bool
    unique: Uniqueness = Uniqueness.UNKNOWN
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "size": self.size,
            "success": self.success,
            "lenient_success": self.lenient_success,
            "unique": self.unique.value,
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class TrialRecord:
    """Resultado de uma tentativa; reproduzível a partir de (config, T, índice)."""

    master_seed: int
    trial_seed: int
    T: int
    trial_index: int
    k: int
    positives: int
    negatives: int
    comp_size: int
    outcomes: tuple[DecoderOutcome, ...]
    sole_defective: bool
    outcome_information: float
    satisfying_d: Optional[int] = None

    def outcome(self, algorithm: Algorithm) -> Optional[DecoderOutcome]:
        for outcome in self.outcomes:
            if outcome.algorithm is algorithm:
                return outcome
        return None

    def size_of(self, algorithm: Algorithm) -> Optional[int]:
        outcome = self.outcome(algorithm)
        return None if outcome is None else outcome.size

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "trial_seed": self.trial_seed,
            "T": self.T,
            "trial_index": self.trial_index,
            "k": self.k,
            "positives": self.positives,
            "negatives": self.negatives,
            "comp_size": self.comp_size,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "sole_defective": self.sole_defective,
            "outcome_information": self.outcome_information,
            "satisfying_d": self.satisfying_d,
        }


def run_trial(config: ExperimentConfig, T: int, trial_index: int) -> TrialRecord:
    """
    Uma tentativa: sorteia K e a matriz, calcula y e roda os decodificadores.

    Sucesso é a estimativa igual a K. Para o SSS, ``success`` exige também
    unicidade e ``lenient_success`` não; buscas truncadas pelo orçamento
    aparecem com ``truncated`` e não contam como sucesso nem como tentativa.
    """
    if T < 0 or trial_index < 0:
        raise DomainError(f"T e trial_index devem ser >= 0, recebido T={T}, índice={trial_index}.")
    trial_seed = derive_seed(config.master_seed, T, trial_index)
    p = config.design_p
    K = sample_defective_set(config.n, config.k, trial_seed)
    design = generate_design(
        config.n,
        T,
        p,
        trial_seed,
        max_cells=config.max_cells,
        dense_threshold=config.dense_threshold,
    )
    y = run_tests(design, K)

    comp_size = len(comp_decode(design, y, config.k))
    outcomes = []
    for algorithm in config.decoders:
        try:
            result = decode(algorithm, design, y, k=config.k, budget=config.sss_budget)
        except BudgetExceededError as e:
            logging.warning(
                f"Tentativa {trial_index} em T={T}: SSS truncado após {e.nodes} nós."
            )
            outcomes.append(
                DecoderOutcome(algorithm, None, False, False, Uniqueness.UNKNOWN, truncated=True)
            )
            continue
        matches = result.succeeded(K)
        strict = matches and result.unique is not Uniqueness.NOT_UNIQUE
        outcomes.append(
            DecoderOutcome(algorithm, len(result), strict, matches, result.unique)
        )

    satisfying_d = None
    if config.oracle_diagnostics and config.oracle_caps.allows(config.n, config.k):
        satisfying_d = enumerate_satisfying(design, y, k=config.k, caps=config.oracle_caps).d

    positives = int(y.bits.sum())
    return TrialRecord(
        master_seed=config.master_seed,
        trial_seed=trial_seed,
        T=T,
        trial_index=trial_index,
        k=config.k,
        positives=positives,
        negatives=T - positives,
        comp_size=comp_size,
        outcomes=tuple(outcomes),
        sole_defective=sole_defective_indicator(design, K),
        outcome_information=outcome_information(y, p, config.k),
        satisfying_d=satisfying_d,
    )


def _run_trial_chunk(config: ExperimentConfig, T: int, indices: Sequence[int]) -> list[TrialRecord]:
    return [run_trial(config, T, i) for i in indices]


def run_trials(config: ExperimentConfig, T: int) -> list[TrialRecord]:
    """Roda todas as tentativas de um ponto, em paralelo quando threads > 1."""
    indices = list(range(config.trials))
    if config.threads == 1 or config.trials < 2 * config.threads:
        return _run_trial_chunk(config, T, indices)
    chunks = [indices[i :: config.threads] for i in range(config.threads)]
    with ProcessPoolExecutor(max_workers=config.threads) as executor:
        results = executor.map(_run_trial_chunk, [config] * len(chunks), [T] * len(chunks), chunks)
        records = [record for chunk in results for record in chunk]
    return sorted(records, key=lambda r: r.trial_index)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Intervalo de Wilson para uma proporção binomial."""
    if trials < 0 or not 0 <= successes <= max(trials, 0):
        raise DomainError(f"Contagens inválidas: {successes} sucessos em {trials} tentativas.")
    if trials == 0:
        return 0.0, 1.0
    z = float(norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    phat = successes / trials
    z2n = z * z / trials
    center = (phat + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    low = max(0.0, min(center - half, phat))
    high = min(1.0, max(center + half, phat))
    return low, high


@dataclass(frozen=True)
class DecoderEstimate:
    algorithm: Algorithm
    trials: int
    successes: int
    lenient_successes: int
    truncated: int
    success: float
    interval: tuple[float, float]

    @property
    def lenient_success(self) -> float:
        return self.lenient_successes / self.trials if self.trials else 0.0


@dataclass(frozen=True)
class SuccessPoint:
    T: int
    estimates: dict
    comp_size_gt_k: int
    sss_size_lt_k: Optional[int]
    sss_not_unique: Optional[int]
    sole_defective: int
    trials: int
    records: tuple[TrialRecord, ...] = ()

    def estimate(self, algorithm: Algorithm) -> DecoderEstimate:
        return self.estimates[Algorithm.parse(algorithm)]

    @property
    def sole_defective_frequency(self) -> float:
        return self.sole_defective / self.trials


def summarize_trials(
    config: ExperimentConfig, T: int, records: Sequence[TrialRecord]
) -> SuccessPoint:
    """Agrega as tentativas de um ponto em estimativas com intervalos de Wilson."""
    estimates = {}
    for algorithm in config.decoders:
        outcomes = [r.outcome(algorithm) for r in records]
        counted = [o for o in outcomes if not o.truncated]
        successes = sum(o.success for o in counted)
        estimates[algorithm] = DecoderEstimate(
            algorithm=algorithm,
            trials=len(counted),
            successes=successes,
            lenient_successes=sum(o.lenient_success for o in counted),
            truncated=len(outcomes) - len(counted),
            success=successes / len(counted) if counted else 0.0,
            interval=wilson_interval(successes, len(counted), config.confidence),
        )

    sss_lt = sss_nu = None
    if Algorithm.SSS in config.decoders:
        sss = [r.outcome(Algorithm.SSS) for r in records]
        sss_lt = sum(o.size is not None and o.size < config.k for o in sss)
        sss_nu = sum(o.unique is Uniqueness.NOT_UNIQUE for o in sss)

    return SuccessPoint(
        T=T,
        estimates=estimates,
        comp_size_gt_k=sum(r.comp_size > config.k for r in records),
        sss_size_lt_k=sss_lt,
        sss_not_unique=sss_nu,
        sole_defective=sum(r.sole_defective for r in records),
        trials=len(records),
        records=tuple(records) if config.record_trials else (),
    )


def estimate_success(config: ExperimentConfig, T: int) -> SuccessPoint:
    """Estimativa empírica de sucesso de cada decodificador com T testes."""
    records = run_trials(config, T)
    point = summarize_trials(config, T, records)
    summary = ", ".join(f"{a.value}={e.success:.4f}" for a, e in point.estimates.items())
    logging.info(f"T={T}: {summary} ({config.trials} tentativas)")
    return point


@dataclass
class SuccessCurve:
    config: ExperimentConfig
    points: list[SuccessPoint] = field(default_factory=list)

    @property
    def T_values(self) -> np.ndarray:
        return np.array([p.T for p in self.points], dtype=np.int64)

    def success_values(self, algorithm: Union[Algorithm, str] = Algorithm.COMP) -> np.ndarray:
        algorithm = Algorithm.parse(algorithm)
        return np.array([p.estimates[algorithm].success for p in self.points], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        """Uma linha por (decodificador, T), com colunas em ordem fixa."""
        rows = []
        for algorithm in self.config.decoders:
            for point in self.points:
                est = point.estimates[algorithm]
                is_sss = algorithm is Algorithm.SSS
                rows.append(
                    {
                        "decoder": algorithm.value,
                        "T": point.T,
                        "trials": est.trials,
                        "successes": est.successes,
                        "success": est.success,
                        "ci_low": est.interval[0],
                        "ci_high": est.interval[1],
                        "truncated": est.truncated,
                        "lenient_success": est.lenient_success,
                        "comp_size_gt_k": point.comp_size_gt_k,
                        "sss_size_lt_k": point.sss_size_lt_k if is_sss else pd.NA,
                        "sss_not_unique": point.sss_not_unique if is_sss else pd.NA,
                        "sole_defective": point.sole_defective,
                    }
                )
        return pd.DataFrame(rows, columns=CURVE_COLUMNS)

    def to_dict(self) -> dict:
        points = []
        for point in self.points:
            entry = {
                "T": point.T,
                "trials": point.trials,
                "comp_size_gt_k": point.comp_size_gt_k,
                "sss_size_lt_k": point.sss_size_lt_k,
                "sss_not_unique": point.sss_not_unique,
                "sole_defective": point.sole_defective,
                "estimates": {
                    a.value: {
                        "trials": e.trials,
                        "successes": e.successes,
                        "lenient_successes": e.lenient_successes,
                        "truncated": e.truncated,
                        "success": e.success,
                        "ci_low": e.interval[0],
                        "ci_high": e.interval[1],
                    }
                    for a, e in point.estimates.items()
                },
            }
            if point.records:
                entry["records"] = [r.to_dict() for r in point.records]
            points.append(entry)
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "points": points,
        }


def sweep_tests(config: ExperimentConfig) -> SuccessCurve:
    """estimate_success em cada T da grade."""
    grid = config.resolved_grid()
    if not grid:
        raise DomainError("A grade de número de testes está vazia.")
    logging.info(
        f"Varredura: n={config.n}, k={config.k}, p={config.design_p:.6g}, "
        f"{len(grid)} pontos, {config.trials} tentativas por ponto."
    )
    return SuccessCurve(config, [estimate_success(config, T) for T in grid])


@dataclass(frozen=True)
class ThresholdEstimate:
    T: float
    level: float
    lower: int
    upper: int

    def to_dict(self) -> dict:
        return {"T": self.T, "level": self.level, "lower": self.lower, "upper": self.upper}


def crossing(T_values: Sequence[float], successes: Sequence[float], level: float) -> ThresholdEstimate:
    """Interpolação linear da primeira subida da curva através de ``level``."""
    T_values = np.asarray(T_values, dtype=float)
    successes = np.asarray(successes, dtype=float)
    above = np.flatnonzero(successes >= level)
    if above.size == 0:
        raise NoCrossingError(f"A curva nunca atinge o nível {level}.")
    i = int(above[0])
    if successes[i] == level:
        return ThresholdEstimate(float(T_values[i]), level, int(T_values[i]), int(T_values[i]))
    if i == 0:
        raise NoCrossingError(f"A curva já começa acima do nível {level}.")
    t0, t1 = T_values[i - 1], T_values[i]
    s0, s1 = successes[i - 1], successes[i]
    T = t0 + (level - s0) * (t1 - t0) / (s1 - s0)
    return ThresholdEstimate(float(T), level, int(t0), int(t1))


def estimate_threshold(
    curve: SuccessCurve, level: float = 0.5, algorithm: Union[Algorithm, str] = Algorithm.COMP
) -> ThresholdEstimate:
    if not 0.0 <= level <= 1.0:
        raise DomainError(f"level deve estar em [0, 1], recebido {level}.")
    return crossing(curve.T_values, curve.success_values(algorithm), level)


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise DomainError(f"A fórmula exata exige p em (0, 1), recebido {p}.")


def exact_comp_success(n: int, k: int, T: int, p: float) -> float:
    """
    P(COMP acerta) = E[(1 − q^M)^(n−k)] com M ~ Bin(T, q^k) e q = 1 − p,
    somado no espaço logarítmico.
    """
    _check_p(p)
    if T < 0 or not 0 <= k <= n:
        raise DomainError(f"Parâmetros inválidos: n={n}, k={k}, T={T}.")
    if n == k:
        return 1.0
    log_q = math.log1p(-p)
    if k == 0:
        return float(np.exp((n - k) * np.log(-np.expm1(T * log_q)))) if T else 0.0

    m = np.arange(T + 1, dtype=float)
    log_qk = k * log_q
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (
            gammaln(T + 1)
            - gammaln(m + 1)
            - gammaln(T - m + 1)
            + m * log_qk
            + (T - m) * np.log(-np.expm1(log_qk))
            + (n - k) * np.log(-np.expm1(m * log_q))
        )
        value = float(np.exp(logsumexp(terms)))
    return min(max(value, 0.0), 1.0)


def exact_comp_curve(n: int, k: int, p: float, T_grid: Iterable[int]) -> np.ndarray:
    return np.array([exact_comp_success(n, k, int(T), p) for T in T_grid], dtype=float)


def exact_sole_defective_success(k: int, T: int, p: float) -> float:
    """
    P(cada defeituoso é o único defeituoso de algum teste), por
    inclusão-exclusão sobre Σ_j (−1)^j C(k,j) (1 − j p (1−p)^(k−1))^T.

    Os termos são somados no espaço logarítmico. Quando o cancelamento da
    soma alternada passa de 1e-8 do maior termo, refaz a soma com mpmath em
    precisão estendida.
    """
    _check_p(p)
    if k < 1 or T < 0:
        raise DomainError(f"Parâmetros inválidos: k={k}, T={T}.")
    if T == 0:
        return 0.0
    r = p * (1.0 - p) ** (k - 1)
    orders = np.arange(k + 1)
    # j·r < 1 para todo j <= k, então todos os logaritmos são finitos
    log_terms = (
        gammaln(k + 1)
        - gammaln(orders + 1)
        - gammaln(k - orders + 1)
        + T * np.log1p(-orders * r)
    )
    signs = np.where(orders % 2 == 0, 1.0, -1.0)
    largest = float(log_terms.max())
    log_total, sign = logsumexp(log_terms, b=signs, return_sign=True)
    if sign > 0 and log_total >= math.log(CANCELLATION_TOLERANCE) + largest:
        total = float(np.exp(log_total))
    else:
        logging.warning(
            f"Cancelamento na inclusão-exclusão (k={k}, T={T}, p={p}); usando precisão estendida."
        )
        digits = 30 + max(0, int(largest / math.log(10)) + 1)
        with mpmath.workdps(digits):
            r_mp = mpmath.mpf(p) * (1 - mpmath.mpf(p)) ** (k - 1)
            total = float(
                mpmath.fsum(
                    (-1) ** j * mpmath.binomial(k, j) * (1 - j * r_mp) ** T
                    for j in range(k + 1)
                )
            )
    return min(max(total, 0.0), 1.0)


def union_bound_floor(n: int, k: int, T: int, p: float) -> float:
    """
    Cota inferior exata de P(|SSS| < k e |COMP| > k):
    1 − P(COMP acerta) − P(todo defeituoso isolado em algum teste).
    """
    return max(0.0, 1.0 - exact_comp_success(n, k, T, p) - exact_sole_defective_success(k, T, p))


def outcome_information(y: OutcomeVector, p: float, k: int) -> float:
    """Informação empírica por teste, em bits, sob P(teste negativo) = (1−p)^k."""
    T = len(y)
    if T == 0:
        return 0.0
    positives = int(y.bits.sum())
    negatives = T - positives
    negative_probability = (1.0 - p) ** k
    total = 0.0
    for count, prob in ((negatives, negative_probability), (positives, 1.0 - negative_probability)):
        if count == 0:
            continue
        total += math.inf if prob <= 0.0 else -count * math.log2(prob)
    return total / T


def default_theta_grid(start: float = 0.01, stop: float = 0.99, points: int = 99) -> np.ndarray:
    return np.round(np.linspace(start, stop, points), 10)


def figure1_data(theta_grid: Iterable[float]) -> pd.DataFrame:
    """Limite de contagem, capacidade, DD e COMP em cada θ da grade."""
    rows = []
    for theta in theta_grid:
        theta = float(theta)
        if not 0.0 < theta < 1.0:
            raise DomainError(f"theta deve estar em (0, 1), recebido {theta}.")
        rows.append(
            {
                "theta": theta,
                "counting_bound": rates.counting_bound(theta).value,
                "capacity": rates.capacity(theta).value,
                "dd_rate": rates.dd_rate(theta).value,
                "comp_max_rate": rates.comp_max_rate(theta).value,
            }
        )
    return pd.DataFrame(
        rows, columns=["theta", "counting_bound", "capacity", "dd_rate", "comp_max_rate"]
    )
