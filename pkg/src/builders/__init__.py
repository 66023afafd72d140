"""
Apparatus builders, each verified against the dense transfer-matrix oracle.
"""

from src.builders.base import BaseBuilder, BuildResult
from src.builders.cd_tree import ChainParity, build_cd_tree
from src.builders.jump import build_jump_tree
from src.builders.mub4 import build_l_analyzer, build_m_analyzer, build_mub4, build_mub4_switch
from src.builders.polarization import build_polarization_mz, build_polarization_pair, diagonal_state
from src.builders.registry import BuilderRegistry, create_default_registry
from src.builders.rsg import build_rsg, build_rsg_cell
from src.builders.sgdt import SuperpositionTarget, build_sgdt, build_synthesizer
from src.builders.tribonacci import build_nbonacci_tree, build_tribonacci_tree

__all__ = [
    "BaseBuilder",
    "BuildResult",
    "BuilderRegistry",
    "ChainParity",
    "SuperpositionTarget",
    "build_cd_tree",
    "build_jump_tree",
    "build_l_analyzer",
    "build_m_analyzer",
    "build_mub4",
    "build_mub4_switch",
    "build_nbonacci_tree",
    "build_polarization_mz",
    "build_polarization_pair",
    "build_rsg",
    "build_rsg_cell",
    "build_sgdt",
    "build_synthesizer",
    "build_tribonacci_tree",
    "create_default_registry",
    "diagonal_state",
]
