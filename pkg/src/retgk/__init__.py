"""Return-probability graph kernels.

Node structural roles are described by random-walk return probabilities;
graphs are compared through kernel mean embeddings of their node sets,
either exactly (RetGK-I) or with explicit random-feature tensor embeddings
(RetGK-II).
"""

from .approx import EmbeddingMaps, OneHotMap, RffMap, one_hot, retgk2_gram, rff_apply, rff_sample
from .approx import tensor_embed_graph
from .exact import GraphKernelParams, GraphSetRep, cross_kernel_matrix, mmd, retgk1_gram
from .graph import (
    Graph,
    GraphDataset,
    apply_self_loops,
    degree_vector,
    permute,
    transition_matvec,
    volume,
)
from .kernels import KernelSpec, NodeKernelSpec, eval_kernel, gamma_c_rule, median_heuristic
from .kernels import node_kernel
from .rpf import EigenSystem, RpfConfig, rpf_bruteforce, rpf_exact, rpf_monte_carlo, spectrum
from .svm import CvConfig, cross_validate, predict, train_svm_precomputed

__version__ = "0.1.0"
