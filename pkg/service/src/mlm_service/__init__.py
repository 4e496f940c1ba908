"""Masked-LM plausibility scoring service (wire protocol v1)."""

from .app import create_app
from .config import ServiceConfig, load_config
from .scorer import CandidateNote, HuggingFaceMaskedLM, MaskedLMScorer

__version__ = "0.1.0"
