"""
Builder registry for oamlab.

Manages the apparatus builders and provides a centralized way to register,
look up and run them by name.

Usage:
    from src.builders.registry import create_default_registry

    registry = create_default_registry()
    result, report = registry.build_and_verify("cd-tree", parity="odd")
"""

from typing import Any, List, Optional
import logging

from src.builders.base import BaseBuilder, BuildResult
from src.core.errors import BuilderError
from src.models.report import VerificationReport


class BuilderRegistry:
    """
    Registry for apparatus builders.

    Usage:
        registry = BuilderRegistry()
        registry.register(CDTreeBuilder())
        registry.register(MyCustomBuilder())

        builder = registry.get_builder("cd-tree")
    """

    def __init__(self):
        self._builders: List[BaseBuilder] = []
        self.logger = logging.getLogger(self.__class__.__name__)

    def register(self, builder: BaseBuilder) -> None:
        """Register a new builder"""
        if self.get_builder(builder.name) is not None:
            raise BuilderError(f"builder '{builder.name}' is already registered")
        self._builders.append(builder)
        self.logger.debug(f"Registered builder: {builder.name}")

    def get_builder(self, name: str) -> Optional[BaseBuilder]:
        """Get a specific builder by name"""
        for builder in self._builders:
            if builder.name == name:
                return builder
        return None

    def names(self) -> List[str]:
        return [builder.name for builder in self._builders]

    def describe(self) -> dict[str, str]:
        return {builder.name: builder.description for builder in self._builders}

    def build_and_verify(self, name: str, **params: Any) -> tuple[BuildResult, VerificationReport]:
        """
        Build an apparatus and run its oracle self-test.

        Raises:
            BuilderError: For an unknown name or parameters the builder rejects
        """
        builder = self.get_builder(name)
        if builder is None:
            raise BuilderError(f"unknown apparatus '{name}', expected one of {', '.join(self.names())}")
        result = builder.build(**params)
        return result, builder.verify(result)

    def __len__(self) -> int:
        return len(self._builders)

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and self.get_builder(name) is not None


def create_default_registry() -> BuilderRegistry:
    """
    Create a registry holding every built-in apparatus.

    To add custom builders, register them on the returned registry:
        registry = create_default_registry()
        registry.register(YourCustomBuilder())
    """
    from src.builders.cd_tree import CDTreeBuilder
    from src.builders.jump import JumpTreeBuilder
    from src.builders.mub4 import LAnalyzerBuilder, MUB4Builder, MUB4SwitchBuilder
    from src.builders.polarization import PolarizationMZBuilder, PolarizationPairBuilder
    from src.builders.rsg import RSGBuilder, RSGCellBuilder
    from src.builders.sgdt import SGDTBuilder, SynthesizerBuilder
    from src.builders.tribonacci import NBonacciTreeBuilder, TribonacciTreeBuilder

    registry = BuilderRegistry()
    for builder in (
        CDTreeBuilder(),
        SGDTBuilder(),
        TribonacciTreeBuilder(),
        NBonacciTreeBuilder(),
        JumpTreeBuilder(),
        MUB4Builder(),
        MUB4SwitchBuilder(),
        LAnalyzerBuilder(),
        RSGCellBuilder(),
        RSGBuilder(),
        SynthesizerBuilder(),
        PolarizationMZBuilder(),
        PolarizationPairBuilder(),
    ):
        registry.register(builder)
    return registry
