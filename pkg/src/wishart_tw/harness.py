#!/usr/bin/env python3
"""
実験ハーネス（CLI）

すべての計算をサブコマンドとして公開し、CSV/JSON で出力します。
標準出力はデータ、標準エラー出力はログです。

使い方:
    wishart-tw tw-table
    wishart-tw tw-table --p 0.5,0.95
    wishart-tw simulate 1000 10 10000 42 refined
    wishart-tw tables --reps 10000
    wishart-tw finite-cdf 5 1 0.0 naive
    wishart-tw rate theorem2 1 --N 10,20,40,80
    wishart-tw sequences 40 10
    wishart-tw lg-check 40 40 --s=-2,0,2
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ValidationError

project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.wishart_tw.config import RunConfig, env_defaults, parse_config  # noqa: E402
from src.wishart_tw.errors import (  # noqa: E402
    ConfigError,
    OutputError,
    ResultValidationError,
    WishartTWError,
)
from src.wishart_tw.finite_n import cdf_exact  # noqa: E402
from src.wishart_tw.lg import deviation_report, lg_approx_F, make_frame  # noqa: E402
from src.wishart_tw.mc import build_table  # noqa: E402
from src.wishart_tw.provenance import PUBLISHED_COLUMNS, build_provenance  # noqa: E402
from src.wishart_tw.rates import (  # noqa: E402
    fact221_sweep,
    lemma3_sweep,
    m_envelope,
    theorem2_sweep,
)
from src.wishart_tw.run_logger import get_logger  # noqa: E402
from src.wishart_tw.sequences import (  # noqa: E402
    alpha_coefficient,
    centering,
    naive_sequences,
    r_N_exact,
    r_N_expansion,
    refined_sequences,
    sequence_diagnostics,
)
from src.wishart_tw.specfun import F_nN, WishartPair  # noqa: E402
from src.wishart_tw.tw import F2_fredholm, tw_quantile, tw_table  # noqa: E402

CommandResult = Tuple[pd.DataFrame, Dict[str, Any]]


class CommandResponse(BaseModel):
    """JSON 出力の共通形式"""

    success: bool
    data: Optional[Dict[str, Any]] = None
    message: Optional[str] = None
    error: Optional[Dict[str, Any]] = None
    provenance: Optional[Dict[str, Any]] = None
    log: List[Dict[str, Any]] = []


class _Parser(argparse.ArgumentParser):
    """使い方の誤りを ConfigError として送出するパーサー"""

    def error(self, message: str):
        raise ConfigError(f"引数エラー: {message}", {"usage": self.format_usage().strip()})


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="出力ファイル（省略時は標準出力）")
    common.add_argument("--seed", type=int, help="乱数シード（既定は WISHART_TW_SEED）")
    common.add_argument("--tol", type=float, help="行列式の細分化許容誤差")
    common.add_argument("--threads", type=int, help="ワーカースレッド数（既定は WISHART_TW_THREADS）")
    common.add_argument("--quiet", action="store_true", help="警告以上のログのみ表示")

    parser = _Parser(description="ウィシャート最大固有値と Tracy–Widom 近似の数値実験")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tw-table", parents=[common], help="F₂ の分位点表")
    p.add_argument("--quantiles", type=_float_list, help="分位点（カンマ区切り）")
    p.add_argument("--p", dest="probs", type=_float_list, help="確率（カンマ区切り）")

    p = sub.add_parser("simulate", parents=[common], help="モンテカルロ表")
    p.add_argument("n", type=int)
    p.add_argument("N", type=int)
    p.add_argument("reps", type=int)
    p.add_argument("seed_pos", metavar="seed", type=int, nargs="?")
    p.add_argument("cs_kind", nargs="?", choices=["naive", "refined"], default="refined")
    p.add_argument("--quantiles", type=_float_list)
    p.add_argument("--method", choices=["dense", "bidiagonal"], default="dense")
    p.add_argument("--with-exact", action="store_true", help="JSON に厳密CDF列を追加")

    p = sub.add_parser("tables", parents=[common], help="公表モンテカルロ3列の再現")
    p.add_argument("--reps", type=int, default=10_000)

    p = sub.add_parser("finite-cdf", parents=[common], help="有限 (n, N) の厳密CDF")
    p.add_argument("n", type=int)
    p.add_argument("N", type=int)
    p.add_argument("s", type=_float_list, help="s の値（カンマ区切り）")
    p.add_argument("cs_kind", nargs="?", choices=["naive", "refined"], default="refined")

    p = sub.add_parser("rate", parents=[common], help="収束率スイープ")
    p.add_argument("rate_kind", choices=["fact221", "lemma3", "theorem2", "m-envelope"])
    p.add_argument("gamma", type=float)
    p.add_argument("--N", dest="N_grid", type=_int_list)
    p.add_argument("--s", dest="s_grid", type=_float_list)
    p.add_argument("--s0", dest="s0_grid", type=_float_list)
    p.add_argument("--cs-kind", choices=["naive", "refined"], default="refined")

    p = sub.add_parser("sequences", parents=[common], help="中心化・スケーリング列")
    p.add_argument("n", type=int)
    p.add_argument("N", type=int)

    p = sub.add_parser("lg-check", parents=[common], help="Liouville–Green 近似と偏差量")
    p.add_argument("n", type=int)
    p.add_argument("N", type=int)
    p.add_argument("--s", dest="s_grid", type=_float_list)
    p.add_argument("--cs-kind", choices=["naive", "refined"], default="refined")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """argparse の結果と .env の既定値から RunConfig を作る"""
    defaults = env_defaults()
    values: Dict[str, Any] = {
        "command": args.command,
        "fmt": args.fmt,
        "out": args.out,
        "seed": args.seed if args.seed is not None else defaults["seed"],
        "tol": args.tol if args.tol is not None else defaults["tol"],
        "threads": args.threads if args.threads is not None else defaults["threads"],
    }
    for key in ("n", "N", "reps", "quantiles", "probs", "rate_kind", "gamma", "method"):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    for key in ("N_grid", "s_grid", "s0_grid"):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    if getattr(args, "cs_kind", None) is not None:
        values["cs_kind"] = args.cs_kind
    if getattr(args, "seed_pos", None) is not None:
        values["seed"] = args.seed_pos
    if getattr(args, "with_exact", False):
        values["with_exact"] = True
    if args.command == "finite-cdf":
        values["s_grid"] = args.s
    return parse_config(values)


def _pair(config: RunConfig) -> WishartPair:
    return WishartPair.of(config.n, config.N)


def cmd_tw_table(config: RunConfig) -> CommandResult:
    """F₂ の値（分位点指定）または分位点（確率指定）"""
    logger = get_logger()
    if config.probs is not None:
        logger.info("確率から分位点を計算中...")
        frame = pd.DataFrame({"p": config.probs, "quantile": [tw_quantile(p) for p in config.probs]})
    else:
        logger.info("分位点で F₂ を計算中...")
        frame = tw_table(config.quantiles) if config.quantiles else tw_table()
    return frame, {"rows": frame.to_dict(orient="records")}


def cmd_simulate(config: RunConfig) -> CommandResult:
    """モンテカルロ表（列: quantile, tw_cdf, empirical, se）"""
    pair = _pair(config)
    cs = centering(pair, config.cs_kind)
    table = build_table(
        pair, cs, config.reps, config.seed, config.quantiles, config.threads, config.method
    )
    frame = pd.DataFrame(
        {
            "quantile": table.quantiles,
            "tw_cdf": table.tw_cdf,
            "empirical": table.values,
            "se": table.se,
        }
    )
    data: Dict[str, Any] = {"table": table.model_dump(mode="json")}
    if config.with_exact:
        get_logger().info("厳密CDFを計算中...")
        data["exact"] = [cdf_exact(pair, cs, q, tol=config.tol) for q in table.quantiles]
    return frame, data


def cmd_tables(config: RunConfig) -> CommandResult:
    """公表3列の再現と各セルの z 値"""
    frames = []
    for name, column in PUBLISHED_COLUMNS.items():
        pair = WishartPair.of(column["n"], column["N"])
        cs, _ = refined_sequences(pair)
        table = build_table(pair, cs, config.reps, config.seed, None, config.threads, config.method)
        frames.append(
            pd.DataFrame(
                {
                    "column": name,
                    "quantile": table.quantiles,
                    "tw_cdf": table.tw_cdf,
                    "empirical": table.values,
                    "se": table.se,
                    "published": column["values"],
                    "z": [(v - p) / se for v, p, se in zip(table.values, column["values"], table.se)],
                }
            )
        )
    frame = pd.concat(frames, ignore_index=True)
    return frame, {"rows": frame.to_dict(orient="records")}


def cmd_finite_cdf(config: RunConfig) -> CommandResult:
    """有限 (n, N) の厳密CDFと F₂"""
    pair = _pair(config)
    cs = centering(pair, config.cs_kind)
    rows = []
    for s in config.s_grid:
        rows.append(
            {
                "s": s,
                "x": cs.mu + cs.sigma * s,
                "cdf_exact": cdf_exact(pair, cs, s, tol=config.tol),
                "tw_cdf": F2_fredholm(s),
            }
        )
    frame = pd.DataFrame(rows)
    return frame, {"pair": pair.model_dump(), "cs": cs.model_dump(), "rows": rows}


def cmd_rate(config: RunConfig) -> CommandResult:
    """収束率スイープ"""
    N_grid = config.resolved_N_grid()
    kind = config.rate_kind
    get_logger().info(f"{kind} スイープ (γ={config.gamma}, N={N_grid})")
    if kind == "m-envelope":
        frame = m_envelope(config.gamma, N_grid, config.s0_grid, config.s_grid, config.cs_kind)
        return frame, {"rows": frame.to_dict(orient="records")}
    if kind == "fact221":
        reports = list(fact221_sweep(config.gamma, N_grid, config.s_grid, config.cs_kind))
    elif kind == "lemma3":
        reports = list(lemma3_sweep(config.gamma, N_grid, config.s_grid, config.cs_kind))
    else:
        reports = [theorem2_sweep(config.gamma, N_grid, config.s_grid, config.cs_kind, config.tol)]
    for report in reports:
        get_logger().success(
            f"{report.label}: 勾配 {report.fitted_slope}, 包絡比 {report.envelope_ratios()}"
        )
    frame = pd.concat([r.to_frame() for r in reports], ignore_index=True)
    return frame, {"reports": [r.model_dump() for r in reports]}


def cmd_sequences(config: RunConfig) -> CommandResult:
    """中心化・スケーリング列と診断量"""
    pair = _pair(config)
    naive = naive_sequences(pair)
    cs, gamma_nN = refined_sequences(pair)
    c_N, s_N = sequence_diagnostics(pair, cs.mu, cs.sigma)
    row = {
        "n": pair.n,
        "N": pair.N,
        "mu": naive.mu,
        "sigma": naive.sigma,
        "mu_tilde": cs.mu,
        "sigma_tilde": cs.sigma,
        "gamma_nN": gamma_nN,
        "r_N": r_N_exact(pair),
        "r_N_expansion": r_N_expansion(pair),
        "c_N": c_N,
        "s_N": s_N,
        "alpha_phi": alpha_coefficient(pair, cs, "phi"),
        "alpha_psi": alpha_coefficient(pair, cs, "psi"),
    }
    return pd.DataFrame([row]), row


def cmd_lg_check(config: RunConfig) -> CommandResult:
    """F_{n,N} の LG 近似誤差と両側の偏差量"""
    pair = _pair(config)
    frame_lg = make_frame(pair)
    naive = naive_sequences(pair)
    cs = centering(pair, config.cs_kind)
    rows = []
    for s in config.s_grid:
        x = naive.mu + naive.sigma * s
        exact, approx = F_nN(pair, x), lg_approx_F(frame_lg, x)
        row = {"s": s, "F": exact, "F_lg": approx, "lg_error": abs(exact - approx)}
        for side in ("phi", "psi"):
            if side == "psi" and pair.N == 1:
                row.update({f"B_{side}": math.nan, f"u_{side}": math.nan})
                continue
            rep = deviation_report(pair, cs, side, s)
            row.update({f"B_{side}": rep.B, f"u_{side}": rep.u, f"D_{side}": rep.D})
        rows.append(row)
    frame = pd.DataFrame(rows)
    return frame, {"rows": frame.to_dict(orient="records")}


COMMANDS = {
    "tw-table": cmd_tw_table,
    "simulate": cmd_simulate,
    "tables": cmd_tables,
    "finite-cdf": cmd_finite_cdf,
    "rate": cmd_rate,
    "sequences": cmd_sequences,
    "lg-check": cmd_lg_check,
}


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_output(config: RunConfig, frame: pd.DataFrame, data: Dict[str, Any]):
    """CSV または JSON を出力（float は17桁）"""
    if config.fmt == "csv":
        if config.out:
            frame.to_csv(config.out, index=False, float_format="%.17g", encoding="utf-8")
        else:
            frame.to_csv(sys.stdout, index=False, float_format="%.17g")
        return
    response = CommandResponse(
        success=True,
        data=data,
        message=f"{config.command} が完了しました",
        provenance=build_provenance(config),
        log=get_logger().get_logs(),
    )
    payload = _json_safe(response.model_dump(mode="json"))
    if config.out:
        with Path(config.out).open("w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
    else:
        json.dump(payload, sys.stdout, ensure_ascii=False, indent=2)
        sys.stdout.write("\n")


def _emit_error(error: WishartTWError):
    get_logger().error(error.message, json.dumps(error.details, ensure_ascii=False, default=str))
    payload = CommandResponse(success=False, error=_json_safe(error.to_dict()), message=error.message)
    json.dump(payload.model_dump(mode="json"), sys.stdout, ensure_ascii=False, default=str)
    sys.stdout.write("\n")


def main(argv: Optional[List[str]] = None) -> int:
    """エントリーポイント（終了コードを返す）"""
    logger = get_logger()
    try:
        logger.set_level(env_defaults()["log_level"])
        args = build_parser().parse_args(argv)
        if args.quiet:
            logger.set_level("warning")
        config = config_from_args(args)
        logger.banner(f"wishart-tw {config.command}")
        try:
            frame, data = COMMANDS[config.command](config)
            write_output(config, frame, data)
        except OSError as e:
            raise OutputError("出力の書き込みに失敗しました", {"out": config.out, "error": str(e)}) from e
        except ValidationError as e:
            raise ResultValidationError(
                "計算結果の検証に失敗しました",
                {"errors": [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()]},
            ) from e
        logger.success(f"{config.command} が完了しました")
        return 0
    except ConfigError as e:
        _emit_error(e)
        return 2
    except WishartTWError as e:
        _emit_error(e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
