"""Achievable rate regions of K-receiver broadcast channels under exhaustive message splitting.

Modules
-------
setfam
    Subset families and the block decompositions of their unions.
infodist
    Joint distributions and entropies in bits.
constraints
    Covering, packing and sum-rate constraint generators.
region
    Support functions, the split-rate projection and pmf search.
mcsim
    Monte Carlo check of the hierarchical covering lemma.
models
    Model files, bundled channels and random models.
cli
    The ``bcregion`` command.
"""

__version__ = "0.1.0"
