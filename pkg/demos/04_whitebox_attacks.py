"""Run both white-box strategies and show a flip exhibit.

Replacement rewrites one slot of an adjacent POS pair; insertion adds a
trigger adverb before an adjective. Candidates must keep the target's
polarity, sit within cosine 0.45 in the static embedding space, and pass
the bigram plausibility gate, so the perturbed review still reads like the
original to a human.
"""

from semattack import (Architecture, AttackConfig, DEFAULT_BIGRAM_THRESHOLD,
                       ModelConfig, Outcome, PATTERNS, SplitSpec, TriggerRule,
                       attack_corpus, audit_report, degradation_table,
                       find_universal_triggers, fit_bigram, flip_exhibit,
                       load_corpus_file, split, tag_corpus, train)
from semattack.demo import (build_demo_polarity, build_demo_tag_lexicon,
                            demo_corpus_path, load_demo_embeddings)
from semattack.textcore import PosTag

lexicon = build_demo_tag_lexicon()
store = load_demo_embeddings()
polarity = build_demo_polarity()

corpus = load_corpus_file(demo_corpus_path())
train_corpus, test_corpus = split(corpus, SplitSpec(0.5, 0.5, seed=0))
train_docs = tag_corpus(train_corpus, lexicon)
test_docs = tag_corpus(test_corpus, lexicon)

model = train(train_docs, ModelConfig(architecture=Architecture.BOE_LR,
                                      embedding_dim=50, epochs=20,
                                      learning_rate=0.01, seed=0), store=store)
bigram = fit_bigram(w for doc in train_docs for w in doc.words())

runs = [("original", None, None)]
sample = test_docs[:200]

adj_triggers = find_universal_triggers(model, sample, TriggerRule((PosTag.ADJ,)),
                                       lexicon, max_iters=10, beam=20)
replacement = attack_corpus(
    model, test_docs, adj_triggers, store, polarity, lexicon, bigram,
    AttackConfig(pattern=PATTERNS["adj1-nn"], t_mlm=DEFAULT_BIGRAM_THRESHOLD))

adv_triggers = find_universal_triggers(model, sample,
                                       TriggerRule((PosTag.ADV, PosTag.ADJ)),
                                       lexicon, max_iters=10, beam=20)
insertion = attack_corpus(
    model, test_docs, adv_triggers, store, polarity, lexicon, bigram,
    AttackConfig(pattern=PATTERNS["adv-before-adj"], t_mlm=DEFAULT_BIGRAM_THRESHOLD))

table = degradation_table([
    ("original", replacement.accuracy_before),
    ("replace adj in (adj, nn)", replacement.accuracy_after),
    ("insert adv before adj", insertion.accuracy_after),
])
print(table.render_text())

for report in (replacement, insertion):
    audit = audit_report(report, model, test_docs, store, polarity, lexicon, bigram)
    print(f"{report.pattern}: {report.count(Outcome.FLIPPED)} flips, "
          f"audit {'clean' if audit.passed else 'FAILED'} "
          f"({audit.checked} examples re-verified)")

docs_by_id = {doc.doc_id: doc for doc in test_docs}
first_flip = next(o for o in replacement.outcomes if o.status is Outcome.FLIPPED)
print("\nexample flip:")
print(flip_exhibit(first_flip, docs_by_id[first_flip.doc_id], lexicon))
