"""Perfect strategies and noncommutative Nullstellensatz certificates for two-answer games."""

from importlib import resources

from .certificate import (
    MomentVector,
    SOSCertificate,
    build_moment_problem,
    certify_hierarchy,
    solve_feasibility,
    truncated_gns,
    verify_certificate,
)
from .extraction import FiniteStrategy, extract_classical, generate_perfect_strategy, validate_strategy
from .game import ClassicalStrategy, GameSpec, classical_value, invalid_set, search_classical
from .group_algebra import AlgebraElement, GroupWord, projector, words_up_to

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled example input such as ``"chsh.game"``."""
    return resources.files(__name__) / "data" / name


__all__ = [
    "AlgebraElement",
    "ClassicalStrategy",
    "FiniteStrategy",
    "GameSpec",
    "GroupWord",
    "MomentVector",
    "SOSCertificate",
    "build_moment_problem",
    "certify_hierarchy",
    "classical_value",
    "data_path",
    "extract_classical",
    "generate_perfect_strategy",
    "invalid_set",
    "projector",
    "search_classical",
    "solve_feasibility",
    "truncated_gns",
    "validate_strategy",
    "verify_certificate",
    "words_up_to",
]
