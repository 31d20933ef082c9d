"""Path management following DRY principle."""

import os

from common.config.constants import AppConstants


class PathManager:
    """Centralized artifact path generation for one output directory."""

    def __init__(self, base_dir: str):
        """
        Initialize path manager.

        Args:
            base_dir: Output directory for all artifacts
        """
        self.base_dir = os.path.normpath(base_dir)

    def get_decomposition_path(self) -> str:
        """Get path to the decomposition result document."""
        return os.path.join(self.base_dir, AppConstants.DECOMPOSITION_FILENAME)

    def get_local_tasks_path(self) -> str:
        """Get path to the local-task document."""
        return os.path.join(self.base_dir, AppConstants.LOCAL_TASKS_FILENAME)

    def get_report_path(self) -> str:
        """Get path to the robustness report."""
        return os.path.join(self.base_dir, AppConstants.REPORT_FILENAME)

    def get_trajectory_path(self) -> str:
        """Get path to the global trajectory dump."""
        return os.path.join(self.base_dir, AppConstants.TRAJECTORY_FILENAME)

    def get_team_trajectory_path(self, team: int) -> str:
        """
        Get path to one team's trajectory dump.

        Args:
            team: Team index (1-based)

        Returns:
            Path to CSV file
        """
        return os.path.join(
            self.base_dir, AppConstants.TEAM_TRAJECTORY_TEMPLATE.format(team=team)
        )

    def get_boxes_path(self) -> str:
        """Get path to the box-corner plot data."""
        return os.path.join(self.base_dir, AppConstants.BOXES_FILENAME)

    def get_robustness_trace_path(self) -> str:
        """Get path to the robustness-vs-time plot data."""
        return os.path.join(self.base_dir, AppConstants.ROBUSTNESS_TRACE_FILENAME)

    def get_timings_path(self) -> str:
        """Get path to the wall-clock stage timings."""
        return os.path.join(self.base_dir, AppConstants.TIMINGS_FILENAME)

    def get_fuzz_summary_path(self) -> str:
        """Get path to the fuzz summary."""
        return os.path.join(self.base_dir, AppConstants.FUZZ_SUMMARY_FILENAME)

    def subdirectory(self, name: str) -> "PathManager":
        """
        Path manager rooted in a subdirectory (e.g. one per timing mode).

        Args:
            name: Subdirectory name

        Returns:
            PathManager for the subdirectory
        """
        return PathManager(os.path.join(self.base_dir, name))
