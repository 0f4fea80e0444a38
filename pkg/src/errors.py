"""Exception hierarchy for the congestion-game simulator.

Value-shaped problems (bad inputs, infeasible parameters) subclass ``ValueError``;
numerical diagnostics that should never fire on valid inputs subclass
``ArithmeticError``. Everything derives from ``CongestionError`` so the CLI can
map failures to exit codes in one place.
"""

from typing import Optional


class CongestionError(Exception):
    """Base class for all simulator errors."""


# Graph

class InvalidNode(CongestionError, ValueError):
    """An endpoint lies outside ``0..node_count-1`` (or source equals sink)."""


class CycleDetected(CongestionError, ValueError):
    """The edge list contains a directed cycle."""


class Unreachable(CongestionError, ValueError):
    """No directed path joins the requested endpoints."""


class CapExceeded(CongestionError, ValueError):
    """Path enumeration would produce more paths than allowed."""


class NoPositivePath(CongestionError, ArithmeticError):
    """No positive-support path exists; the flow vector is corrupted."""


# Polytope

class MuTooLarge(CongestionError, ValueError):
    """Exploration floor exceeds ``1 / |active edges|``."""


class Infeasible(CongestionError, ValueError):
    """Lower-bounded simplex is empty (``mu * n > 1``)."""


class NotInPolytope(CongestionError, ValueError):
    """A fractional strategy violates the path-polytope constraints."""


class ProjectionDiverged(CongestionError, ArithmeticError):
    """Alternating projection hit its iteration cap with a large residual."""


class DecompositionStalled(CongestionError, ArithmeticError):
    """A decomposition iteration removed no mass."""


# Game

class TooLarge(CongestionError, ValueError):
    """Exhaustive enumeration exceeds its cap."""


class DivideByZero(CongestionError, ArithmeticError):
    """Relative exploitability requested with a vanishing best-response value."""


# Learner / dynamics

class FeedbackMismatch(CongestionError, ValueError):
    """Observed edges differ from the edges of the last sampled path."""


class DegenerateSeries(CongestionError, ValueError):
    """Series too short or not strictly positive for a log-log fit."""


# Configuration

class ConfigError(CongestionError, ValueError):
    """Experiment configuration failed validation.

    Args:
        message: Human readable reason
        path: Dotted JSON path of the offending field, if known
        line: 1-based line number in the source file, if known
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.path:
            where.append(self.path)
        prefix = f"[{', '.join(where)}] " if where else ""
        return f"{prefix}{self.message}"
