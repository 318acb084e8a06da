from .generators import apply_snr_noise, ar1_rows, generate_instance, sample_dictionary
from .knowledge import enumerate_cases, sample_knowledge
from .rng import instance_rng, knowledge_rng
from .scenario import DictionarySource, GeneratedInstance, KnowledgeCase, ScenarioSpec

__all__ = [
    "DictionarySource",
    "GeneratedInstance",
    "KnowledgeCase",
    "ScenarioSpec",
    "apply_snr_noise",
    "ar1_rows",
    "enumerate_cases",
    "generate_instance",
    "instance_rng",
    "knowledge_rng",
    "sample_dictionary",
    "sample_knowledge",
]
