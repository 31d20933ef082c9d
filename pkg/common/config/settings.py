"""Settings management following SOLID principles."""

from typing import Any, Dict, Optional

from common.config.constants import AppConstants


class DefaultSettings:
    """Default settings as class variables for centralized management."""

    # Solver tolerances
    DEFAULT_FEASIBILITY_TOLERANCE = 1e-8
    DEFAULT_OPTIMALITY_TOLERANCE = 1e-4

    # Barrier schedule
    DEFAULT_INITIAL_BARRIER_WEIGHT = 1.0
    DEFAULT_BARRIER_FACTOR = 10.0

    # Iteration budgets
    DEFAULT_MAX_OUTER_ITERATIONS = 200
    DEFAULT_MAX_INNER_ITERATIONS = 50

    # Decomposition
    DEFAULT_MARGIN = 1e-3
    DEFAULT_DEGENERATE_RADIUS = 1e-6

    # Grid oracle
    DEFAULT_ORACLE_RESOLUTION = 11
    DEFAULT_ORACLE_MAX_VARIABLES = 6

    # Simulation
    DEFAULT_DT = 0.1

    # Thread pool settings
    DEFAULT_WORKER_COUNT = 4

    # Fuzzing
    DEFAULT_SEED = 0


class SolverSettings:
    """Tolerances and budgets of the barrier solver."""

    _KNOWN_KEYS = {
        "feasibility_tolerance",
        "optimality_tolerance",
        "initial_barrier_weight",
        "barrier_factor",
        "max_outer_iterations",
        "max_inner_iterations",
    }

    def __init__(
        self,
        feasibility_tolerance: float = DefaultSettings.DEFAULT_FEASIBILITY_TOLERANCE,
        optimality_tolerance: float = DefaultSettings.DEFAULT_OPTIMALITY_TOLERANCE,
        initial_barrier_weight: float = DefaultSettings.DEFAULT_INITIAL_BARRIER_WEIGHT,
        barrier_factor: float = DefaultSettings.DEFAULT_BARRIER_FACTOR,
        max_outer_iterations: int = DefaultSettings.DEFAULT_MAX_OUTER_ITERATIONS,
        max_inner_iterations: int = DefaultSettings.DEFAULT_MAX_INNER_ITERATIONS,
    ):
        """Initialize solver settings with validation."""
        if feasibility_tolerance <= 0 or optimality_tolerance <= 0:
            raise ValueError("Solver tolerances must be positive")
        if initial_barrier_weight <= 0:
            raise ValueError("Initial barrier weight must be positive")
        if barrier_factor <= 1:
            raise ValueError("Barrier factor must be greater than 1")
        if max_outer_iterations < 1 or max_inner_iterations < 1:
            raise ValueError("Iteration budgets must be at least 1")

        self.feasibility_tolerance = float(feasibility_tolerance)
        self.optimality_tolerance = float(optimality_tolerance)
        self.initial_barrier_weight = float(initial_barrier_weight)
        self.barrier_factor = float(barrier_factor)
        self.max_outer_iterations = int(max_outer_iterations)
        self.max_inner_iterations = int(max_inner_iterations)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SolverSettings":
        """
        Build settings from the `solver` section of a scenario file.

        Args:
            data: Mapping of setting name to value (may be None)

        Returns:
            SolverSettings instance

        Raises:
            ValueError: On unknown keys or invalid values
        """
        data = dict(data or {})
        unknown = set(data) - cls._KNOWN_KEYS
        if unknown:
            raise ValueError(f"Unknown solver settings: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize settings."""
        return {key: getattr(self, key) for key in sorted(self._KNOWN_KEYS)}

    def __repr__(self) -> str:
        """String representation of settings."""
        return (
            f"SolverSettings("
            f"eps_feas={self.feasibility_tolerance}, "
            f"eps_opt={self.optimality_tolerance}, "
            f"budget={self.max_outer_iterations}/{self.max_inner_iterations})"
        )


class SettingsManager:
    """Manages run settings with validation."""

    def __init__(
        self,
        timing_mode: str = AppConstants.TIMING_POINT,
        margin: Optional[float] = None,
        seed: int = DefaultSettings.DEFAULT_SEED,
        use_oracle: bool = False,
        oracle_resolution: int = DefaultSettings.DEFAULT_ORACLE_RESOLUTION,
        worker_count: int = DefaultSettings.DEFAULT_WORKER_COUNT,
        log_level: str = "info",
    ):
        """Initialize settings with validation."""
        self._validate_inputs(timing_mode, margin, worker_count, log_level)

        self.timing_mode = timing_mode
        self.margin = margin
        self.seed = int(seed)
        self.use_oracle = use_oracle
        self.oracle_resolution = int(oracle_resolution)
        self.worker_count = int(worker_count)
        self.log_level = log_level

    def _validate_inputs(
        self,
        timing_mode: str,
        margin: Optional[float],
        worker_count: int,
        log_level: str,
    ):
        """Validate required inputs."""
        if timing_mode not in AppConstants.TIMING_MODES:
            raise ValueError(
                f"Timing mode must be one of {AppConstants.TIMING_MODES}, got {timing_mode!r}"
            )

        if margin is not None and margin < 0:
            raise ValueError("Margin must be non-negative")

        if worker_count < 1:
            raise ValueError("Worker count must be at least 1")

        if log_level not in AppConstants.LOG_LEVELS:
            raise ValueError(f"Unknown log level: {log_level!r}")

    def get_log_level(self) -> int:
        """Get numeric logging level."""
        return AppConstants.LOG_LEVELS[self.log_level]

    def resolve_margin(self, scenario_margin: Optional[float]) -> float:
        """Command-line margin wins over the scenario margin, then the default."""
        if self.margin is not None:
            return self.margin
        if scenario_margin is not None:
            return scenario_margin
        return DefaultSettings.DEFAULT_MARGIN

    def __repr__(self) -> str:
        """String representation of settings."""
        return (
            f"SettingsManager("
            f"timing={self.timing_mode}, "
            f"margin={self.margin}, "
            f"seed={self.seed}, "
            f"oracle={self.use_oracle}, "
            f"workers={self.worker_count})"
        )
