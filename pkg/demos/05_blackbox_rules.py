"""Mine substitution rules from white-box flips and transfer them.

The rules need no gradients or embeddings at application time, so they run
against any model exposing predictions; here they transfer from the linear
model that produced them to an independently trained CNN.
"""

from semattack import (Architecture, AttackConfig, DEFAULT_BIGRAM_THRESHOLD,
                       ModelConfig, PATTERNS, SplitSpec, TriggerRule,
                       accuracy, attack_corpus, degradation_table,
                       evaluate_blackbox, extract_rules, find_universal_triggers,
                       fit_bigram, load_corpus_file, split, tag_corpus, train)
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

source = train(train_docs, ModelConfig(architecture=Architecture.BOE_LR,
                                       embedding_dim=50, epochs=20,
                                       learning_rate=0.01, seed=0), store=store)
bigram = fit_bigram(w for doc in train_docs for w in doc.words())
triggers = find_universal_triggers(source, test_docs[:200],
                                   TriggerRule((PosTag.ADJ,)), lexicon,
                                   max_iters=10, beam=20)
report = attack_corpus(source, test_docs, triggers, store, polarity, lexicon,
                       bigram, AttackConfig(pattern=PATTERNS["adj1-nn"],
                                            t_mlm=DEFAULT_BIGRAM_THRESHOLD))

rules = extract_rules(report)
print("mined rules (from white-box flips on the linear model):")
for rule in rules:
    print(f"  {rule.from_word} [noun] -> {rule.to_word} [noun]  "
          f"(support {rule.support})")

victim = train(train_docs, ModelConfig(architecture=Architecture.CNN,
                                       embedding_dim=50, epochs=4,
                                       learning_rate=2e-3, seed=101,
                                       batch_size=64), store=store)
print(f"\nblack-box victim: CNN, clean test accuracy "
      f"{accuracy(victim, test_docs):.3f}")

rows = evaluate_blackbox(victim, test_docs, rules, [0, 1, 2, 3], lexicon)
print(degradation_table([(f"budget {b}", acc) for b, acc in rows]).render_text())
