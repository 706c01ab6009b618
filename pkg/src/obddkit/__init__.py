"""Shared ROBDD engine, limited-independence random functions as OBDDs, and
implicit graph algorithms (maximal matching, MIS simulation) built on them."""
from .bdd import (
    AND, DIFF, EQUIV, EXISTS, FORALL, IMPLIES, NAND, NOR, OR, XOR, ConfigurationError,
    Function, Manager, ObddError, SizeStats, UsageError, mk_manager,
)
from .graphs import Graph, encode_graph, parse_graph, random_density_graph
from .matching import RmConfig, distributed_mis_sim, maximal_matching_rm

__version__ = '0.1.0'
