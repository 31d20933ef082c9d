"""
Application constants following SSOT (Single Source of Truth) principle.
All constants are centralized here for easy maintenance.
"""


class AppConstants:
    """Central repository for all application constants."""

    # Artifact file names
    DECOMPOSITION_FILENAME = "decomposition.json"
    LOCAL_TASKS_FILENAME = "local_tasks.json"
    REPORT_FILENAME = "report.json"
    TRAJECTORY_FILENAME = "trajectory.csv"
    TEAM_TRAJECTORY_TEMPLATE = "trajectory_team{team}.csv"
    BOXES_FILENAME = "boxes.csv"
    ROBUSTNESS_TRACE_FILENAME = "robustness_trace.csv"
    FUZZ_SUMMARY_FILENAME = "fuzz_summary.json"
    TIMINGS_FILENAME = "timings.json"

    # Bundled scenario
    BUNDLED_SCENARIO = "scenarios/five_agent.json"

    # Environment variables
    ENV_LOG_LEVEL = "STLDEC_LOG"
    ENV_WORKER_COUNT = "STLDEC_WORKERS"

    LOG_LEVELS = {"error": 40, "info": 20, "debug": 10}

    # Exit codes (stable across commands)
    EXIT_OK = 0
    EXIT_INPUT_ERROR = 1
    EXIT_INFEASIBLE = 2
    EXIT_PROPERTY_VIOLATION = 3

    # Formula grammar keywords
    KEYWORD_AND = "and"
    KEYWORD_NOT = "not"
    KEYWORD_TRUE = "true"
    OPERATOR_ALWAYS = "G"
    OPERATOR_EVENTUALLY = "F"
    OPERATOR_UNTIL = "U"

    # Timing modes
    TIMING_POINT = "point"
    TIMING_INTERVAL = "interval"
    TIMING_MODES = (TIMING_POINT, TIMING_INTERVAL)

    # Predicate families in scenario files
    FAMILY_QUADRATIC = "quadratic"
    FAMILY_QUADRATIC_DIFFERENCE = "quadratic-difference"
    FAMILY_AFFINE = "affine"

    # Solver status values
    STATUS_OPTIMAL = "optimal"
    STATUS_INFEASIBLE = "infeasible"
    STATUS_ITERATION_LIMIT = "iteration-limit"

    # Pipeline stages (used for error attribution)
    STAGE_INPUT = "input"
    STAGE_DECOMPOSE = "decompose"
    STAGE_SYNTHESIZE = "synthesize"
    STAGE_PLAN = "plan"
    STAGE_EVALUATE = "evaluate"

    # Numerical slack when snapping times onto a sample grid
    GRID_SNAP_TOLERANCE = 1e-9

    # Logging format
    LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(threadName)s] %(name)s: %(message)s"
    LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
