"""padx: material-aware Poisson-blend augmentation, co-occurrence feature
fusion, and AP50 scoring for long-tailed X-ray detection data."""

__version__ = "0.1.0"

from padx.core import BBox, BinaryMask, ImageBuffer, boundary_of, crop, to_grayscale
from padx.dataset import (Category, ClassStats, Dataset, ImageRecord, Instance,
                          class_histogram, extract_instances, load_dataset,
                          split_head_tail, write_dataset)
from padx.augment import AugmentConfig, AugmentReport, augment_dataset, augment_instance
from padx.ica import (IcaOutput, IcaParams, ProposalSet, grad_check, ica_backward,
                      ica_forward, load_params, save_params, topk_select)
from padx.benchmark import BenchmarkResult, synth_cooccurrence_benchmark
from padx.material import (AttenuationScore, HostSelection, attenuation_score,
                           gradient_energy, propose_placement, select_host)
from padx.metrics import Detection, EvalResult, average_precision, evaluate, iou, match_detections
from padx.poisson import BlendProblem, SparseSystem, blend, build_system, dense_solve_oracle, solve_cg
from padx.imgio import ImageStore, read_image, write_png

__all__ = [
    "__version__",
    "BBox", "BinaryMask", "ImageBuffer", "boundary_of", "crop", "to_grayscale",
    "Category", "ClassStats", "Dataset", "ImageRecord", "Instance",
    "class_histogram", "extract_instances", "load_dataset", "split_head_tail",
    "write_dataset",
    "AugmentConfig", "AugmentReport", "augment_dataset", "augment_instance",
    "IcaOutput", "IcaParams", "ProposalSet", "grad_check", "ica_backward",
    "ica_forward", "load_params", "save_params", "topk_select",
    "BenchmarkResult", "synth_cooccurrence_benchmark",
    "AttenuationScore", "HostSelection", "attenuation_score", "gradient_energy",
    "propose_placement", "select_host",
    "Detection", "EvalResult", "average_precision", "evaluate", "iou",
    "match_detections",
    "BlendProblem", "SparseSystem", "blend", "build_system", "dense_solve_oracle",
    "solve_cg",
    "ImageStore", "read_image", "write_png",
]
