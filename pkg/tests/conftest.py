import pytest

from group_testing.decoders import Algorithm, DecodeResult, comp_decode
from group_testing.design import DefectiveSet, TestDesign


@pytest.fixture(autouse=True)
def isolated_workdir(tmp_path, monkeypatch):
    """Logs e saídas relativas ficam no diretório temporário do teste."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("BGT_OUTPUT_DIR", raising=False)
    return tmp_path


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "results"
    return str(path)


@pytest.fixture
def small_design():
    """
    Seis itens, cinco testes; com K = {1, 4} o único teste negativo é o último.
    """
    return TestDesign.from_tests(6, [[0, 1], [1, 2], [3, 4], [4, 5], [0, 5]])


@pytest.fixture
def twin_design():
    """Itens 0 e 1 com colunas idênticas; o item 2 só aparece no segundo teste."""
    return TestDesign.from_tests(3, [[0, 1], [0, 1, 2]])


def comp_missing_untested(design, y, k=None):
    """COMP defeituoso: esquece os itens que não aparecem em nenhum teste."""
    result = comp_decode(design, y, k)
    tested = design.to_dense().any(axis=0)
    items = tuple(i for i in result.estimate.items if tested[i])
    return DecodeResult(DefectiveSet(items, design.n), Algorithm.COMP)


@pytest.fixture
def mutant_comp():
    return comp_missing_untested
