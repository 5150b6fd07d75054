"""Control-flow reconstruction and cross-kernel comparison for SASS listings."""

from .cfg import BasicBlock, Cfg, Edge, build_cfg, export_dot, find_leaders, node_name
from .cluster import (
    FeatureVector,
    Linkage,
    cut_clusters,
    export_dendrogram,
    feature_vector,
    to_newick,
    ward_linkage,
)
from .corpus import Corpus, CorpusEntry, RunConfig, load_config_file, load_manifest
from .errors import (
    BadK,
    BadOrder,
    BadTarget,
    BadTime,
    CorpusError,
    DegenerateInput,
    DimMismatch,
    DuplicateKernel,
    EmptyGraph,
    ListingSyntaxError,
    ProfileSyntaxError,
    SasscfgError,
    UnresolvedLabel,
)
from .matrix import TransitionMatrix, interpolate_to, normalize_pair, transition_matrix
from .metrics import MetricReport, efficiency, goodness, mix_error
from .profile import AnnotatedCfg, KernelProfile, attribute_profile, dynamic_mix, parse_profiles
from .sass import (
    Instruction,
    InstrClass,
    Listing,
    MixVector,
    classify_opcode,
    parse_listing,
    static_mix,
)
from .similarity import (
    AlignmentResult,
    MeasureId,
    cosine,
    euclidean,
    isorank_align,
    isorank_distance,
    jaccard,
    manhattan,
    measure_distance,
    minkowski,
    minmax_scale,
    pairwise,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "AnnotatedCfg",
    "BadK",
    "BadOrder",
    "BadTarget",
    "BadTime",
    "BasicBlock",
    "Cfg",
    "Corpus",
    "CorpusEntry",
    "CorpusError",
    "DegenerateInput",
    "DimMismatch",
    "DuplicateKernel",
    "Edge",
    "EmptyGraph",
    "FeatureVector",
    "Instruction",
    "InstrClass",
    "KernelProfile",
    "Linkage",
    "Listing",
    "ListingSyntaxError",
    "MeasureId",
    "MetricReport",
    "MixVector",
    "ProfileSyntaxError",
    "RunConfig",
    "SasscfgError",
    "TransitionMatrix",
    "UnresolvedLabel",
    "attribute_profile",
    "build_cfg",
    "classify_opcode",
    "cosine",
    "cut_clusters",
    "dynamic_mix",
    "efficiency",
    "euclidean",
    "export_dendrogram",
    "export_dot",
    "feature_vector",
    "find_leaders",
    "goodness",
    "interpolate_to",
    "isorank_align",
    "isorank_distance",
    "jaccard",
    "load_config_file",
    "load_manifest",
    "manhattan",
    "measure_distance",
    "minkowski",
    "minmax_scale",
    "mix_error",
    "node_name",
    "normalize_pair",
    "pairwise",
    "parse_listing",
    "parse_profiles",
    "static_mix",
    "to_newick",
    "transition_matrix",
    "ward_linkage",
]
