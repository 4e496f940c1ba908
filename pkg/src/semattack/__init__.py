"""Semantic-preserving adversarial attacks for binary text classifiers.

White-box attacks search the embedding vocabulary for POS-constrained
universal triggers with a first-order loss objective, then substitute or
insert them under polarity, cosine-similarity, and masked-LM plausibility
constraints. Black-box attacks replay substitution rules mined from the
white-box flips. The harness measures the resulting accuracy degradation.
"""

from .attack import (AttackConfig, AttackOutcome, AttackReport, Edit,
                     InsertionRule, Outcome, PATTERNS, Strategy, attack_corpus,
                     audit_report, select_candidates)
from .classifier import (Architecture, Classifier, ModelConfig, TrainingMeta,
                         load_checkpoint, logistic_loss, save_checkpoint, train)
from .errors import (AttackError, CheckpointError, LoadError, ScorerError,
                     ScorerProtocolError, ScorerTransportError, SemattackError,
                     TrainingError)
from .harness import (DegradationTable, LabeledCorpus, SplitSpec, accuracy,
                      degradation_table, flip_exhibit, load_corpus,
                      load_corpus_file, split, tag_corpus)
from .lexicon import (EmbeddingStore, Polarity, PolarityLexicon, cosine,
                      load_embeddings, load_embeddings_file, load_polarity,
                      load_polarity_file, neighbors)
from .plausibility import (BigramScorer, DEFAULT_BIGRAM_THRESHOLD,
                           DEFAULT_MLM_THRESHOLD, MaskQuery, RemoteScorer,
                           StubScorer, filter_candidates, fit_bigram, score)
from .rules import (Rule, RuleSet, apply_rule, apply_rules_budgeted,
                    evaluate_blackbox, extract_rules, load_rules, save_rules)
from .textcore import (PairOccurrence, PairPattern, PosTag, ReplaceSlot,
                       TagLexicon, TaggedDocument, Token, extract_pairs,
                       find_singletons, load_tag_lexicon, load_tag_lexicon_file,
                       pos_tag, tag_text, tokenize)
from .triggers import (Placement, TriggerRule, TriggerSequence, TriggerSet,
                       aggregate_loss, find_universal_triggers, load_trigger_set,
                       save_trigger_set, select_trigger_token)

__version__ = "0.1.0"
