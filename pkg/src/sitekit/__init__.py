"""Finite sites, Grothendieck topologies, sheaves, flat-functor models and
Fraïssé limits, computed exhaustively at small sizes."""

from .budget import Budget, SizeGuard, default_budget
from .category import (CategoryError, CategorySpec, FinCategory, build_category, category_from_text,
                       check_amalgamation, check_category, check_joint_embedding, check_right_ore,
                       opposite)
from .sieves import Sieve, close_to_sieve, make_sieve, pullback_sieve, sieve_heyting
from .topologies import (GrothendieckTopology, canonical_topology, enumerate_topologies,
                         generate_topology, lattice_ops, validate_topology)
from .workspace import Workspace, parse_workspace, serialize_workspace

__all__ = [
    "Budget", "SizeGuard", "default_budget",
    "CategoryError", "CategorySpec", "FinCategory", "build_category", "category_from_text",
    "check_amalgamation", "check_category", "check_joint_embedding", "check_right_ore", "opposite",
    "Sieve", "close_to_sieve", "make_sieve", "pullback_sieve", "sieve_heyting",
    "GrothendieckTopology", "canonical_topology", "enumerate_topologies", "generate_topology",
    "lattice_ops", "validate_topology",
    "Workspace", "parse_workspace", "serialize_workspace",
]
