"""Masked-LM scoring backends.

``HuggingFaceMaskedLM`` wraps a pretrained fill-mask model: the probability
of a candidate is its full-vocabulary softmax mass at the mask position.
Candidates the tokenizer splits into several pieces are scored as the
product of left-to-right fills (or 0 under the "zero" policy); such
handling is reported back so responses can flag it.
"""

from dataclasses import dataclass
from typing import Protocol


@dataclass(frozen=True)
class CandidateNote:
    """Flags non-trivial handling of one candidate."""

    candidate: str
    handling: str  # "subtokens" | "zero"
    pieces: int

    def to_dict(self) -> dict:
        return {"candidate": self.candidate, "handling": self.handling,
                "pieces": self.pieces}


class MaskedLMScorer(Protocol):
    model_name: str

    def ready(self) -> bool: ...

    def score(self, tokens: list[str], mask_index: int,
              candidates: list[str]) -> tuple[list[float], list[CandidateNote]]: ...


class HuggingFaceMaskedLM:
    """Lazy-loading transformers backend; inference only, CPU is fine."""

    def __init__(self, model_name: str, max_length: int = 128,
                 oov_policy: str = "subtokens"):
        self.model_name = model_name
        self.max_length = max_length
        self.oov_policy = oov_policy
        self._tokenizer = None
        self._model = None

    def ready(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        if self._model is not None:
            return
        import torch  # deferred: the protocol layer must work without weights
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._tokenizer = AutoTokenizer.from_pretrained(self.model_name)
        model = AutoModelForMaskedLM.from_pretrained(self.model_name)
        model.eval()
        torch.set_grad_enabled(False)
        self._model = model

    def _mask_probs(self, piece_ids: list[list[int]], mask_at: int):
        """Softmax row at the mask position for a pieces-per-word encoding."""
        return self._mask_probs_with_prefix(piece_ids, mask_at, [])

    def score(self, tokens, mask_index, candidates):
        if not self.ready():
            raise RuntimeError("model not loaded")
        tokenizer = self._tokenizer
        piece_ids = [tokenizer.encode(tok, add_special_tokens=False)
                     for tok in tokens]
        probs: list[float] = []
        notes: list[CandidateNote] = []
        single_row = None
        for candidate in candidates:
            cand_pieces = tokenizer.encode(candidate, add_special_tokens=False)
            if len(cand_pieces) == 1:
                if single_row is None:
                    single_row = self._mask_probs(piece_ids, mask_index)
                probs.append(float(single_row[cand_pieces[0]]))
                continue
            if self.oov_policy == "zero" or not cand_pieces:
                probs.append(0.0)
                notes.append(CandidateNote(candidate, "zero", len(cand_pieces)))
                continue
            # left-to-right product of fills over the candidate's pieces
            prob = 1.0
            filled: list[int] = []
            for piece in cand_pieces:
                row = self._mask_probs_with_prefix(piece_ids, mask_index, filled)
                prob *= float(row[piece])
                filled.append(piece)
            probs.append(prob)
            notes.append(CandidateNote(candidate, "subtokens", len(cand_pieces)))
        return probs, notes

    def _mask_probs_with_prefix(self, piece_ids, mask_at, prefix_pieces):
        import torch

        tokenizer = self._tokenizer
        flat = [tokenizer.cls_token_id]
        mask_pos = None
        for i, pieces in enumerate(piece_ids):
            if i == mask_at:
                flat.extend(prefix_pieces)
                mask_pos = len(flat)
                flat.append(tokenizer.mask_token_id)
            else:
                flat.extend(pieces)
        flat.append(tokenizer.sep_token_id)
        flat = flat[: self.max_length]
        if mask_pos is None or mask_pos >= len(flat):
            raise ValueError("mask position fell outside max_length")
        ids = torch.tensor([flat])
        logits = self._model(input_ids=ids).logits[0, mask_pos]
        return torch.softmax(logits, dim=-1)
