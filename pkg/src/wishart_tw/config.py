#!/usr/bin/env python3
"""
実行設定モジュール

.env からの既定値読み込みと、CLI実行設定（RunConfig）の検証を行います。
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.wishart_tw.errors import ConfigError

project_root = Path(__file__).parent.parent.parent

_env_loaded = False


def load_env():
    """プロジェクトルートの .env を一度だけ読み込む"""
    global _env_loaded
    if not _env_loaded:
        load_dotenv(project_root / ".env")
        _env_loaded = True


def env_defaults() -> Dict[str, Any]:
    """環境変数から既定値を取得"""
    load_env()
    return {
        "threads": int(os.getenv("WISHART_TW_THREADS", str(os.cpu_count() or 1))),
        "tol": float(os.getenv("WISHART_TW_TOL", "1e-10")),
        "seed": int(os.getenv("WISHART_TW_SEED", "20240601")),
        "log_level": os.getenv("WISHART_TW_LOG_LEVEL", "info"),
    }


DEFAULT_S_GRID = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0]
DEFAULT_N_GRID = {1.0: [10, 20, 40, 80], 4.0: [10, 20, 40]}
DEFAULT_S0_GRID = [-4.0, -2.0, 0.0, 2.0]

Command = Literal["tw-table", "simulate", "tables", "finite-cdf", "rate", "sequences", "lg-check"]


class RunConfig(BaseModel):
    """サブコマンドの実行設定（未知のキーは拒否）"""

    model_config = ConfigDict(extra="forbid")

    command: Command = Field(..., description="実行するサブコマンド")
    n: Optional[int] = Field(None, ge=1, description="行数 n")
    N: Optional[int] = Field(None, ge=1, description="列数 N")
    cs_kind: Literal["naive", "refined"] = Field("refined", description="中心化・スケーリングの種類")
    s_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_S_GRID))
    N_grid: Optional[List[int]] = Field(None, description="Nのグリッド（未指定ならγに応じた既定値）")
    s0_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_S0_GRID))
    gamma: float = Field(1.0, ge=1.0, description="アスペクト比 n/N")
    reps: int = Field(10_000, description="モンテカルロ反復回数")
    seed: int = Field(20240601, ge=0, lt=2**64)
    tol: float = Field(1e-10, gt=0.0, le=1e-2)
    threads: int = Field(1, ge=1)
    quantiles: Optional[List[float]] = None
    probs: Optional[List[float]] = None
    rate_kind: Optional[Literal["fact221", "lemma3", "theorem2", "m-envelope"]] = None
    fmt: Literal["csv", "json"] = "csv"
    out: Optional[str] = None
    method: Literal["dense", "bidiagonal"] = "dense"
    with_exact: bool = False

    @field_validator("s_grid", "s0_grid")
    @classmethod
    def _non_empty(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("グリッドが空です")
        return value

    @field_validator("N_grid")
    @classmethod
    def _increasing(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is None:
            return value
        if not value:
            raise ValueError("Nグリッドが空です")
        if any(b <= a for a, b in zip(value, value[1:])) or value[0] < 1:
            raise ValueError("Nグリッドは正の狭義単調増加である必要があります")
        return value

    @field_validator("quantiles", "probs")
    @classmethod
    def _non_empty_optional(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and not value:
            raise ValueError("リストが空です")
        return value

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if self.command in ("simulate", "finite-cdf", "sequences", "lg-check") and (
            self.n is None or self.N is None
        ):
            raise ValueError(f"{self.command} には n と N が必要です")
        if self.command in ("simulate", "tables") and self.reps < 100:
            raise ValueError("reps は 100 以上である必要があります")
        if self.command == "rate" and self.rate_kind is None:
            raise ValueError("rate には種類（fact221, lemma3, theorem2, m-envelope）が必要です")
        if self.probs is not None and any(not 0.001 < p < 0.9999 for p in self.probs):
            raise ValueError("確率は (0.001, 0.9999) の範囲で指定してください")
        return self

    def resolved_N_grid(self) -> List[int]:
        """Nグリッド（既定値の解決込み）"""
        if self.N_grid is not None:
            return list(self.N_grid)
        return list(DEFAULT_N_GRID.get(self.gamma, DEFAULT_N_GRID[4.0]))


def parse_config(values: Dict[str, Any]) -> RunConfig:
    """辞書から RunConfig を検証して生成（失敗時は ConfigError）"""
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(
            "実行設定の検証に失敗しました",
            {"errors": [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()]},
        ) from e
