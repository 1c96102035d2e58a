"""folnerflow: weighted Folner certificates, transportation-flow compression
systems, and weighted graph separators on finite Cayley windows.

The library decides the window-scale dichotomy between weighted Folner sets
and weighted compression systems through an exact max-flow transportation
certificate, and constructs (w,eps)-separating sets by brute force,
asymptotic-dimension shells, randomized Folner tilings, and quasi-isometry
transfer.  All arithmetic is exact rational.
"""

from .graphs import (GeneratorSet, GraphError, LabeledGraph, apply_word,
                     boundary, build_cayley_window, components,
                     free_generators, induced_components, load_graph,
                     neighborhood, parse_word, save_graph,
                     sphere_decomposition, zd_box, zd_generators)
from .weights import (BalancednessReport, PartitionInfeasible, WeightError,
                      WeightFunction, balancedness, ball_weight, cocycle,
                      even_partition, load_weights, pow2_line_weight,
                      save_weights, total_weight)
from .folner import (FolnerReport, StageMean, folner_defect, folner_search,
                     generator_words, invariance_defect, stage_mean)
from .compression import (CompressionSystem, CutWitness, FlowAssignment,
                          TransportInstance, build_transport, doubling_check,
                          extract_compression, max_flow, min_cut_witness,
                          solve_transport, stage_contradiction,
                          verify_compression)
from .separators import (CoverFamily, FolnerTiling, QIMap, SeparatorError,
                         SeparatorResult, asdim_backend, asdim_cover,
                         asdim_separator, brute_backend, brute_separator,
                         build_folner_tiling, build_qi_map, check_separator,
                         folner_decomposition, qi_transfer,
                         random_folner_separator, validate_cover)
from .reports import VerificationFailure, verify_report

__version__ = "0.1.0"
