"""Hypergraph representation learning toolkit.

Pipeline: build a hypergraph, generate dwell-and-escape random walk corpora
over vertices and hyperedges (the latter via the dual), train skip-gram
embeddings on the corpora, then classify hyperedges with a model that fuses
a contextual branch with a permutation-invariant membership branch.
"""

from hyperwalk.hypergraph import Hypergraph, build, dual, is_connected
from hyperwalk.walks import WalkConfig, WalkCorpus, generate_vertex_corpus, generate_hyperedge_corpus
from hyperwalk.sgns import SgnsConfig, EmbeddingTable, train_embeddings
from hyperwalk.dhe import DheConfig, DheModel, HyperedgeExample

__version__ = "0.1.0"

__all__ = [
    "Hypergraph",
    "build",
    "dual",
    "is_connected",
    "WalkConfig",
    "WalkCorpus",
    "generate_vertex_corpus",
    "generate_hyperedge_corpus",
    "SgnsConfig",
    "EmbeddingTable",
    "train_embeddings",
    "DheConfig",
    "DheModel",
    "HyperedgeExample",
    "__version__",
]
