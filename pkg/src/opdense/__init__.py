"""opdense: opcode-density datasets, SMO support vector machines and
attribute selection for executable classification."""

from . import errors, featsel
from .dataset import (
    Dataset,
    IqrFlags,
    ScalingParams,
    apply_scaling,
    assemble,
    build_master_list,
    density,
    iqr_flag,
    minmax_scale,
    shuffle,
    sort_attributes_by_mean_density,
    split_percentage,
)
from .dataio import read_dataset, write_dataset
from .estimators import MinMaxDensityScaler, RankedAttributeSelector, SmoSvmClassifier
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    class_metrics,
    confusion_matrix,
    cross_validate,
    default_grid,
    grid_search,
    holdout_evaluate,
)
from .kernels import KernelSpec, gram_matrix, kernel_eval
from .labels import BINARY_LABELS, FAMILY_LABELS, ClassLabel, LabelScheme
from .pe import PeImage, parse_pe
from .reports import OpcodeHistogram, LabeledHistogram, format_report, parse_report, scan_directory
from .smo import TrainerConfig, fit_sigmoid_scaling, smo_solve
from .svm import (
    BinarySvmModel,
    MulticlassSvmModel,
    fit_sigmoid,
    load_model,
    predict,
    save_model,
    smo_train_binary,
    train_multiclass,
)
from .synth import generate_corpus
from .x86 import DecodedCount, DecoderProfile, count_opcodes, decode_one, histogram_from_pe, sweep

__version__ = "0.1.0"

__all__ = [
    "BINARY_LABELS",
    "BinarySvmModel",
    "ClassLabel",
    "ConfusionMatrix",
    "Dataset",
    "DecodedCount",
    "DecoderProfile",
    "EvalReport",
    "FAMILY_LABELS",
    "IqrFlags",
    "KernelSpec",
    "LabelScheme",
    "LabeledHistogram",
    "MinMaxDensityScaler",
    "MulticlassSvmModel",
    "OpcodeHistogram",
    "PeImage",
    "RankedAttributeSelector",
    "ScalingParams",
    "SmoSvmClassifier",
    "TrainerConfig",
    "apply_scaling",
    "assemble",
    "build_master_list",
    "class_metrics",
    "confusion_matrix",
    "count_opcodes",
    "cross_validate",
    "decode_one",
    "default_grid",
    "density",
    "errors",
    "featsel",
    "fit_sigmoid",
    "fit_sigmoid_scaling",
    "format_report",
    "generate_corpus",
    "gram_matrix",
    "grid_search",
    "histogram_from_pe",
    "holdout_evaluate",
    "iqr_flag",
    "kernel_eval",
    "load_model",
    "minmax_scale",
    "parse_pe",
    "parse_report",
    "predict",
    "read_dataset",
    "save_model",
    "scan_directory",
    "shuffle",
    "smo_solve",
    "smo_train_binary",
    "sort_attributes_by_mean_density",
    "split_percentage",
    "sweep",
    "train_multiclass",
    "write_dataset",
]
