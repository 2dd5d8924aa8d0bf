"""
Metabelian Completion - exact homology of R-completions of metabelian groups.

This package computes pronilpotent, pro-p and rational completions of groups
G = M ⋊ C (C infinite cyclic), their mod-p and rational homology, and checks
the comparison statements about H_n(G, K) -> H_n(Ĝ_R, K) on concrete groups.
"""

__version__ = "0.1.0"
__author__ = "Metabelian Completion Team"
