from .adadelta import adadelta_step
from .model import AdadeltaState, DockResult, Genotype, LigandInstance, ScoreResult
from .scoring import score, score_reference
from .search import LgaSettings, lga_run, local_search

__all__ = [
    "AdadeltaState", "DockResult", "Genotype", "LgaSettings", "LigandInstance", "ScoreResult",
    "adadelta_step", "lga_run", "local_search", "score", "score_reference",
]
