#!/usr/bin/env python3
"""
実行ログ生成モジュール

計算プロセスのログを構造化して収集し、標準エラー出力にも表示します。
標準出力はデータ専用です。
"""

import os
import sys
from datetime import datetime
from typing import Any, Dict, List, Optional

_LEVELS = {"info": 10, "success": 20, "warning": 30, "error": 40}

_PREFIX = {
    "info": "  →",
    "success": "  ✓",
    "warning": "  ⚠",
    "error": "  ✗",
}


class RunLogger:
    """計算プロセスのログを管理するクラス"""

    def __init__(self, level: str = "info"):
        self.logs: List[Dict[str, Any]] = []
        self.set_level(level)

    def set_level(self, level: str):
        """表示しきい値を設定（収集は常に全レベル）"""
        self.threshold = _LEVELS.get(level, _LEVELS["info"])

    def info(self, message: str, details: Optional[str] = None):
        """情報ログを追加"""
        self._add_log("info", message, details)

    def success(self, message: str, details: Optional[str] = None):
        """成功ログを追加"""
        self._add_log("success", message, details)

    def warning(self, message: str, details: Optional[str] = None):
        """警告ログを追加"""
        self._add_log("warning", message, details)

    def error(self, message: str, details: Optional[str] = None):
        """エラーログを追加"""
        self._add_log("error", message, details)

    def banner(self, title: str):
        """ステップ見出しを表示"""
        if self.threshold <= _LEVELS["info"]:
            print("\n" + "=" * 60, file=sys.stderr)
            print(title, file=sys.stderr)
            print("=" * 60, file=sys.stderr)

    def _add_log(self, level: str, message: str, details: Optional[str] = None):
        self.logs.append(
            {
                "timestamp": datetime.now().isoformat(),
                "level": level,
                "message": message,
                "details": details,
            }
        )
        if _LEVELS[level] < self.threshold:
            return
        print(f"{_PREFIX[level]} {message}", file=sys.stderr)
        if details:
            print(f"     {details}", file=sys.stderr)

    def get_logs(self) -> List[Dict[str, Any]]:
        """ログのリストを取得"""
        return list(self.logs)

    def clear(self):
        """ログをクリア"""
        self.logs = []


_logger: Optional[RunLogger] = None


def get_logger() -> RunLogger:
    """プロセス共通のロガーを取得"""
    global _logger
    if _logger is None:
        _logger = RunLogger(os.getenv("WISHART_TW_LOG_LEVEL", "info"))
    return _logger
