from .config import BUILTIN_VARIANTS, StudyConfig, Sweep, Variant, load_study_config, parse_study
from .matrix_io import load_dictionary, load_matrix_csv, resolve_matrix_path
from .outputs import emit_outputs
from .presets import preset_names, render_preset
from .runner import ResultRow, ResultTable, run_study, run_trial

__all__ = [
    "BUILTIN_VARIANTS",
    "ResultRow",
    "ResultTable",
    "StudyConfig",
    "Sweep",
    "Variant",
    "emit_outputs",
    "load_dictionary",
    "load_matrix_csv",
    "load_study_config",
    "parse_study",
    "preset_names",
    "render_preset",
    "resolve_matrix_path",
    "run_study",
    "run_trial",
]
