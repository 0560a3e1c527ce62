"""Multi-keyword ranked search over encrypted documents.

Documents are represented by truncated-SVD concept vectors plus TF x IDF
weighted word embeddings; both are hidden with secure kNN split-and-transform
encryption so the server can rank by inner product without seeing them.
"""

from .embeddings import EmbeddingTable, doc_embedding, load_embeddings, query_embedding
from .evaluation import EvalReport, load_qrels, ndcg_at_k, run_eval
from .latent import SvdModel, project, truncated_svd
from .lexical import KeywordDocumentMatrix, Vocabulary, build_matrix, idf
from .pipeline import DataOwner, DataUser, SecretBundle
from .secure_knn import SecretKey, encrypt_index, gen_trapdoor, keygen, unlinkability_bound
from .server import EncryptedIndex, RankedResults, score, top_k
from .text import Corpus, Document, QuerySet, load_corpus, load_queries, preprocess
from .wire import EncryptedSubindex, Trapdoor

__version__ = "0.1.0"
