"""Exact symbolic computation for quantum covering groups.

The package computes, over the two-parameter ground ring Q(q)^pi, the
bilinear form and twisted derivations on the half-algebra, quasi-R- and
quasi-K-matrices, i^pi-divided powers, and (i-)canonical bases of
highest-weight modules and their tensor products, with every structural
identity re-verified at truncated weight heights.
"""

__version__ = "0.1.0"
