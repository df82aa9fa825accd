"""Recover-and-resample temporal augmentation for skeleton action sequences."""

from ._version import __version__
from .boundary import (BoundaryPoseSet, assign_boundary, extrapolate,
                       learn_boundary_poses, sample_tp)
from .clustering import KMeansResult, kmeans_assign, kmeans_fit
from .diversity import AutoEncoder, DiversityCurve, ae_train, diversity_curve
from .errors import (AlignmentDegenerate, FormatError, InvalidInput,
                     NoValidBody, ParseError, SkelAugError)
from .ingest import (Corpus, SkeletonRecording, SyntheticSpec,
                     generate_synthetic, parse_ntu_skeleton, read_corpus,
                     select_primary_body, write_corpus, write_ntu_skeleton)
from .model import (MotionSequence, PreprocessSpec, flatten_skeleton,
                    preprocess, random_rotation, resize_temporal,
                    unflatten_skeleton)
from .pipeline import (AugmentConfig, PriorSet, augment_batch, learn_priors,
                       load_priors, recover_and_resample, resample,
                       sample_rng, save_priors)
from .transforms import (DEFAULT_WINDOWS, LinearTransform, apply_transform,
                         learn_transforms, make_pairs, similarity_matrix,
                         transform_from_similarity)

__all__ = [
    "__version__",
    "AlignmentDegenerate", "AugmentConfig", "AutoEncoder", "BoundaryPoseSet",
    "Corpus", "DEFAULT_WINDOWS", "DiversityCurve", "FormatError", "InvalidInput",
    "KMeansResult", "LinearTransform", "MotionSequence", "NoValidBody",
    "ParseError", "PreprocessSpec", "PriorSet", "SkelAugError",
    "SkeletonRecording", "SyntheticSpec",
    "ae_train", "apply_transform", "assign_boundary", "augment_batch",
    "diversity_curve", "extrapolate", "flatten_skeleton", "generate_synthetic",
    "kmeans_assign", "kmeans_fit", "learn_boundary_poses", "learn_priors",
    "learn_transforms", "load_priors", "make_pairs", "parse_ntu_skeleton",
    "preprocess", "random_rotation", "read_corpus", "recover_and_resample",
    "resample", "resize_temporal", "sample_rng", "sample_tp", "save_priors",
    "select_primary_body", "similarity_matrix", "transform_from_similarity",
    "unflatten_skeleton", "write_corpus", "write_ntu_skeleton",
]
