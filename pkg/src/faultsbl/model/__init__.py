from .layout import BlockLayout
from .operators import (
    apply_design,
    apply_design_transpose,
    design_gram,
    extract_block,
    mutual_coherence,
    row_means,
    stack_measurements,
    unstack,
)
from .problem import BlockSparseProblem, PriorKnowledgeSet

__all__ = [
    "BlockLayout",
    "BlockSparseProblem",
    "PriorKnowledgeSet",
    "apply_design",
    "apply_design_transpose",
    "design_gram",
    "extract_block",
    "mutual_coherence",
    "row_means",
    "stack_measurements",
    "unstack",
]
