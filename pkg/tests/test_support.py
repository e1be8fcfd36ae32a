"""例外・ログ・出所情報のテスト"""

from src.wishart_tw.config import parse_config
from src.wishart_tw.errors import ConfigError, DomainError, WishartTWError
from src.wishart_tw.provenance import PUBLISHED_COLUMNS, build_provenance, reference_tables
from src.wishart_tw.run_logger import RunLogger


def test_error_to_dict():
    error = DomainError("x は正である必要があります", {"x": -1.0})
    assert isinstance(error, WishartTWError)
    assert error.to_dict() == {
        "code": "domain_error",
        "message": "x は正である必要があります",
        "details": {"x": -1.0},
    }
    assert ConfigError("bad").details == {}


def test_logger_collects_all_levels(capsys):
    logger = RunLogger("warning")
    logger.info("計算中")
    logger.warning("注意", "詳細")
    logs = logger.get_logs()
    assert [entry["level"] for entry in logs] == ["info", "warning"]
    err = capsys.readouterr().err
    assert "計算中" not in err
    assert "  ⚠ 注意" in err
    logger.clear()
    assert logger.get_logs() == []


def test_logger_banner(capsys):
    RunLogger().banner("見出し")
    err = capsys.readouterr().err
    assert "=" * 60 in err
    assert "見出し" in err


def test_reference_tables():
    tables = reference_tables()
    assert len(tables["quantiles"]) == 9
    assert set(tables["columns"]) == set(PUBLISHED_COLUMNS)
    assert all(len(c["values"]) == 9 for c in tables["columns"].values())


def test_provenance_block():
    config = parse_config({"command": "simulate", "n": 10, "N": 10, "reps": 100})
    block = build_provenance(config, {"note": "x"})
    assert block["package"] == "wishart-tw-rates"
    assert block["config"]["n"] == 10
    assert block["note"] == "x"
    assert any(ref["type"] == "table" for ref in block["references"])
