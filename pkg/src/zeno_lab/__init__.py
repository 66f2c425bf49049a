"""Numerical laboratory for decay laws of unstable quantum states.

Subpackages cover the cutoff Lee-type toy model (``qm_model``), the
exponential-decay limit with band-limited pulsed detection (``bang_bang``),
a brute-force state-vector validator (``collapse_oracle``), the one-loop
relativistic counterpart (``qft_model``), shared numerics (``numerics``),
and a CSV/JSON command-line front end (``cli``).
"""

__version__ = "0.1.0"
