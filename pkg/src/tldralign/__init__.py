"""tldralign: map independently trained monolingual document-embedding
spaces into a shared inter-lingual space and evaluate cross-lingual
mate retrieval.

The package is organised around the experimental pipeline:

corpus      XML ingestion, entity repair, alignment, seeded splits
store       the .tldr embedding file format and a synthetic oracle
linalg      least squares, truncated SVD, cosine matrices
mappers     LCA / LCC / NCA / identity behind one fit/encode interface
nn          the small deterministic feed-forward trainer behind NCA
evaluation  mate retrieval rate and mean reciprocal rank
experiment  pair x method x dimension grids, aggregation, CSV output
"""

from .corpus import (
    AlignedCorpus,
    DocumentRecord,
    SplitAssignment,
    align_languages,
    make_split,
    parse_corpus_file,
    repair_encoding,
    split_doc_ids,
)
from .evaluation import (
    RetrievalReport,
    SimilarityMatrix,
    evaluate_pair,
    mate_retrieval_rate,
    reciprocal_ranks,
)
from .experiment import ExperimentConfig, aggregate, emit_outputs, run_grid
from .linalg import cosine_matrix, least_squares, truncated_svd
from .mappers import (
    LcaModel,
    LccModel,
    Mapper,
    NcaModel,
    NoMapping,
    fit_lca,
    fit_lcc,
    fit_mapper,
    fit_nca,
    load_model,
    save_model,
)
from .nn import FeedForwardNet, TrainConfig, elu, huber_loss, init_net, train
from .store import (
    EmbeddingMatrix,
    SyntheticSpec,
    generate_synthetic_pair,
    read_embeddings,
    write_embeddings,
)

__version__ = "0.1.0"
