"""Domain adaptation by lexicon induction: seed lexicons, orthogonal
embedding maps, CSLS induction and word-for-word pseudo-parallel corpora."""

__version__ = "0.1.0"
