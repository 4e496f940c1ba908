"""Search for universal triggers under POS-pattern rules.

The search swaps one trigger slot at a time: a first-order objective
(e(candidate) - e(current)) . gradient ranks the vocabulary, the top beam
candidates are re-scored with the true aggregate loss over a test sample,
and the best strictly-improving swap is accepted. Words the model has
learned against their human polarity ("fantastic" trained on sarcastic
reviews, "insane" on slang praise) surface at the top.
"""

from semattack import (Architecture, ModelConfig, SplitSpec, TriggerRule,
                       find_universal_triggers, load_corpus_file, split,
                       tag_corpus, train)
from semattack.demo import (build_demo_tag_lexicon, demo_corpus_path,
                            load_demo_embeddings)
from semattack.textcore import PosTag

lexicon = build_demo_tag_lexicon()
store = load_demo_embeddings()
corpus = load_corpus_file(demo_corpus_path())
train_corpus, test_corpus = split(corpus, SplitSpec(0.5, 0.5, seed=0))
train_docs = tag_corpus(train_corpus, lexicon)
test_docs = tag_corpus(test_corpus, lexicon)

model = train(train_docs, ModelConfig(architecture=Architecture.BOE_LR,
                                      embedding_dim=50, epochs=20,
                                      learning_rate=0.01, seed=0), store=store)

sample = test_docs[:200]
for rule_tags in ((PosTag.ADJ,), (PosTag.ADV, PosTag.ADJ)):
    rule = TriggerRule(rule_tags)
    triggers = find_universal_triggers(model, sample, rule, lexicon,
                                       max_iters=10, beam=20)
    name = ",".join(t.value for t in rule_tags)
    print(f"rule [{name}]:")
    for tag, entries in sorted(triggers.by_tag.items(), key=lambda kv: kv[0].value):
        ranked = ", ".join(f"{w} ({s:.3f})" for w, s in entries)
        print(f"  {tag.value}: {ranked}")
