#!/usr/bin/env python3
"""
例外定義モジュール

数値計算・CLIで発生するエラーを機械可読な形で表現します。
"""

from typing import Any, Dict, Optional


class WishartTWError(Exception):
    """パッケージ共通の基底例外"""

    code = "wishart_tw_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """エラーJSON用の辞書に変換"""
        return {"code": self.code, "message": self.message, "details": self.details}


class DomainError(WishartTWError):
    """関数の定義域外の引数"""

    code = "domain_error"


class RangeError(WishartTWError):
    """計算範囲（グリッド・転回点など）の外側"""

    code = "range_error"


class ConvergenceError(WishartTWError):
    """離散化・求積の収束失敗"""

    code = "convergence_error"


class SolverBlowUpError(WishartTWError):
    """Painlevé II 積分の発散"""

    code = "solver_blow_up"


class EigenSolverError(WishartTWError):
    """固有値ソルバーの失敗"""

    code = "eigensolver_error"


class GridMismatchError(WishartTWError):
    """異なる求積グリッド上の作用素の合成"""

    code = "grid_mismatch"


class ConfigError(WishartTWError):
    """実行設定の検証エラー"""

    code = "config_error"


class OutputError(WishartTWError):
    """結果ファイルの書き込み失敗"""

    code = "output_error"


class ResultValidationError(WishartTWError):
    """計算結果モデルの検証失敗"""

    code = "result_validation_error"
