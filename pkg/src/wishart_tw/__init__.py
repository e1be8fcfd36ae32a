"""
wishart-tw-rates

複素ホワイト・ウィシャート行列の最大固有値分布（有限 n, N）と Tracy–Widom 近似の収束率解析。
"""

__version__ = "0.1.0"
