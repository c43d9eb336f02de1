"""
gz-concavity-lab

対数凹測度の次元付き Brunn–Minkowski 凹性を数値的に検証・探索するラボ。
"""

__version__ = "0.1.0"
