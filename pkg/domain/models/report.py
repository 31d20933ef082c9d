"""Robustness report of an end-to-end scenario run."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class RobustnessReport:
    """
    Outcome of decompose -> synthesize -> plan -> evaluate.

    `sound` is False only when every local robustness is positive but the
    global robustness is not, which would contradict the decomposition
    guarantee.
    """

    scenario: str
    timing_mode: str
    margin: float
    local_robustness: Dict[int, float] = field(default_factory=dict)
    conjunct_robustness: Dict[str, float] = field(default_factory=dict)
    global_robustness: Optional[float] = None
    global_conjunct_robustness: Dict[int, float] = field(default_factory=dict)
    objectives: Dict[int, float] = field(default_factory=dict)
    stage_seconds: Dict[str, float] = field(default_factory=dict)
    state_bound_violations: int = 0
    failed_stage: Optional[str] = None
    failure: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.failed_stage is None and self.global_robustness is not None

    @property
    def all_local_satisfied(self) -> bool:
        return bool(self.local_robustness) and all(v > 0 for v in self.local_robustness.values())

    @property
    def global_satisfied(self) -> bool:
        return self.global_robustness is not None and self.global_robustness > 0

    @property
    def sound(self) -> bool:
        """All local rho > 0 implies global rho > 0."""
        if not self.completed or not self.all_local_satisfied:
            return True
        return self.global_satisfied

    def to_dict(self) -> Dict[str, Any]:
        """Deterministic content; wall-clock timings live in timings_dict."""
        return {
            "scenario": self.scenario,
            "timing_mode": self.timing_mode,
            "margin": self.margin,
            "completed": self.completed,
            "local_robustness": {str(k): v for k, v in sorted(self.local_robustness.items())},
            "conjunct_robustness": dict(sorted(self.conjunct_robustness.items())),
            "global_robustness": self.global_robustness,
            "global_conjunct_robustness": {
                str(k): v for k, v in sorted(self.global_conjunct_robustness.items())
            },
            "all_local_satisfied": self.all_local_satisfied,
            "global_satisfied": self.global_satisfied,
            "sound": self.sound,
            "objectives": {str(k): v for k, v in sorted(self.objectives.items())},
            "state_bound_violations": self.state_bound_violations,
            "failed_stage": self.failed_stage,
            "failure": self.failure,
            "warnings": list(self.warnings),
        }

    def timings_dict(self) -> Dict[str, Any]:
        return {"scenario": self.scenario, "timing_mode": self.timing_mode, "stage_seconds": dict(self.stage_seconds)}
