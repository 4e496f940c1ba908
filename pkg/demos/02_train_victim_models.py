"""Train the two desk-scale victim models on the shipped review corpus.

The bag-of-embeddings logistic regression has closed-form gradients; the
convolutional model follows the classic sentence-classification shape
(filter widths 1-4, 50 filters each, one 10-unit hidden layer).
"""

from semattack import (Architecture, ModelConfig, SplitSpec, accuracy,
                       load_corpus_file, save_checkpoint, split, tag_corpus, train)
from semattack.demo import (build_demo_tag_lexicon, demo_corpus_path,
                            load_demo_embeddings)

lexicon = build_demo_tag_lexicon()
store = load_demo_embeddings()

corpus = load_corpus_file(demo_corpus_path())
train_corpus, test_corpus = split(corpus, SplitSpec(0.5, 0.5, seed=0))
train_docs = tag_corpus(train_corpus, lexicon)
test_docs = tag_corpus(test_corpus, lexicon)
print(f"corpus: {len(corpus)} docs -> {len(train_docs)} train / {len(test_docs)} test")

boe = train(train_docs, ModelConfig(architecture=Architecture.BOE_LR,
                                    embedding_dim=50, epochs=20,
                                    learning_rate=0.01, seed=0), store=store)
print(f"BOE_LR: train acc {boe.meta.final_train_accuracy:.3f}, "
      f"test acc {accuracy(boe, test_docs):.3f}")

cnn = train(train_docs, ModelConfig(architecture=Architecture.CNN,
                                    embedding_dim=50, epochs=4,
                                    learning_rate=2e-3, seed=101, batch_size=64),
            store=store)
print(f"CNN:    train acc {cnn.meta.final_train_accuracy:.3f}, "
      f"test acc {accuracy(cnn, test_docs):.3f}")

save_checkpoint(boe, "boe.ckpt")
save_checkpoint(cnn, "cnn.ckpt")
print("checkpoints written: boe.ckpt, cnn.ckpt")
