"""Structural balance for imbalanced node classification.

Sparse graph primitives, two-block SBM tools, numerical checks of
structural-imbalance theory, hard-sample mining with similarity-gated
edge augmentation, K-step relation diffusion, and a small classifier.
"""

from .classifier import ClassifierParams, TrainingDiverged
from .data import Dataset, SplitSpec, load_dataset, make_step_split
from .diffusion import DiffusionConfig, DiffusionParams, diffuse, run_rd
from .encoder import EncoderParams
from .enhance import ClassPartition, augment, mine_initial, neighbor_consensus
from .graph import (NormAdj, SparseGraph, add_edges, build_graph, normalize_sym,
                    perturb_edges, spmm)
from .metrics import EvalReport, accuracy, auc_ovr, intra_inter_ratio, macro_f1
from .pipeline import ExperimentConfig, run_experiment
from .sbm import SBMConfig, degree_disparity, expected_degrees, generate_sbm

__version__ = "0.1.0"
