"""Automatic short-answer grading.

Corpus ingestion (Mohler extended layout, SciEntsBank XML, user CSV),
similarity feature extraction, a small regression head trained under a
restart-and-early-stop controller, a bagged-tree baseline, evaluation
metrics, and an HTTP grading service.
"""

from .corpus import (
    AnswerPair,
    Corpus,
    SebLabel,
    dedupe,
    descale_score,
    map_seb_label,
    parse_mohler,
    parse_seb,
    read_pairs_csv,
    scale_score,
    write_pairs_csv,
    write_scored_csv,
)
from .embed import FileProvider, HashProvider, HttpProvider, hash_embed, provider_from_spec
from .errors import AsagError
from .evalmetrics import EvalResult, evaluate, mae, pearson, r_squared, rmse
from .features import feature_matrix, pair_embedding_matrix, scaled_targets
from .forest import Forest, ForestConfig, forest_fit, forest_predict
from .lexfeat import LexFeatures, base_ratio, fuzzy_ratios, handcrafted_features, lex_features, porter_stem, tokenize
from .model import (
    HeadConfig,
    HeadModel,
    head_backward,
    head_forward,
    huber_loss,
    init_head,
    load_checkpoint,
    predict_score,
    save_checkpoint,
)
from .splitter import SplitSpec, stratified_split
from .trainer import TrainConfig, TrainReport, fit_with_controller, lr_at, optimizer_step, train_attempt
from .vecsim import VecSimFeatures, moments, vecsim_features, vector_similarity

__version__ = "0.1.0"

__all__ = [
    "AnswerPair",
    "AsagError",
    "Corpus",
    "EvalResult",
    "FileProvider",
    "Forest",
    "ForestConfig",
    "HashProvider",
    "HeadConfig",
    "HeadModel",
    "HttpProvider",
    "LexFeatures",
    "SebLabel",
    "SplitSpec",
    "TrainConfig",
    "TrainReport",
    "VecSimFeatures",
    "base_ratio",
    "dedupe",
    "descale_score",
    "evaluate",
    "feature_matrix",
    "fit_with_controller",
    "forest_fit",
    "forest_predict",
    "fuzzy_ratios",
    "handcrafted_features",
    "hash_embed",
    "head_backward",
    "head_forward",
    "huber_loss",
    "init_head",
    "lex_features",
    "load_checkpoint",
    "lr_at",
    "mae",
    "map_seb_label",
    "moments",
    "optimizer_step",
    "pair_embedding_matrix",
    "parse_mohler",
    "parse_seb",
    "pearson",
    "porter_stem",
    "predict_score",
    "provider_from_spec",
    "r_squared",
    "read_pairs_csv",
    "rmse",
    "save_checkpoint",
    "scale_score",
    "scaled_targets",
    "stratified_split",
    "tokenize",
    "train_attempt",
    "vecsim_features",
    "vector_similarity",
    "write_pairs_csv",
    "write_scored_csv",
]
