"""Capacitated VRP local search over decoder-defined search spaces."""

from .bs import BsConfig, bs_brute_oracle, bs_fixed_point, bs_pass
from .hashing import (HashParams, SeqMeta, SubseqTable, concat,
                      eval_concatenation, hash_direct, make_hash_params,
                      meta_singleton, preprocess)
from .instances import (DistanceMatrix, NeighborLists, ParseError,
                        ProblemInstance, build_distance_matrix,
                        build_neighbor_lists, parse_bks, parse_cvrplib,
                        parse_cvrplib_file)
from .memory import GlobalMemory, MemoryEntry, RouteKey
from .model import (FeasibilityReport, Route, Solution, check_feasibility,
                    format_solution, gap_to_bks, make_route, parse_solution,
                    route_cost, route_load, solution_cost)
from .savings import clarke_wright
from .search import (FilterState, LocalSearch, SearchResult, SpaceConfig,
                     decode_solution, enumerate_moves, find_improving_move,
                     parse_space, run_local_search)
from .tsp import ExactConfig, RouteTooLarge, solve_exact

__version__ = "0.1.0"
