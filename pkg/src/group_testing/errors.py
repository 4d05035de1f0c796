"""Exceções do domínio. Herdam das exceções nativas já tratadas pelos agentes."""


class GroupTestingError(Exception):
    """Base de todos os erros da biblioteca."""


class DomainError(GroupTestingError, ValueError):
    """Argumento fora do domínio de uma fórmula ou operação."""


class DegenerateBoundError(DomainError):
    """O limite não está definido (denominador de entropia nulo)."""


class DesignSizeError(DomainError):
    """A matriz de testes pedida excede o limite de memória configurado."""


class EnumerationCapError(DomainError):
    """A enumeração exaustiva excede o limite configurado."""


class NoCrossingError(DomainError):
    """A curva de sucesso não cruza o nível pedido."""


class BudgetExceededError(GroupTestingError, RuntimeError):
    """
    A busca exata do SSS excedeu o orçamento de nós.

    Carrega a melhor solução encontrada até o momento para que o chamador
    possa distinguir resultado exato de resultado truncado.
    """

    def __init__(self, message: str, incumbent=None, nodes: int = 0):
        super().__init__(message)
        self.incumbent = incumbent
        self.nodes = nodes


class ConfigValidationError(GroupTestingError, ValueError):
    """Configuração inválida. Lista todos os problemas de uma só vez."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__(
            "Configuração inválida:\n" + "\n".join(f"  - {e}" for e in self.errors)
        )


class InvariantViolationError(GroupTestingError, AssertionError):
    """Uma propriedade verificada pelo oráculo falhou."""
