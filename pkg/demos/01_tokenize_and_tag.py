"""Tokenization, POS tagging, and pattern extraction on a product review.

Every attack keys on adjacent POS patterns: adjective-noun pairs for the
replacement strategy, standalone adjectives for insertion.
"""

from semattack import PATTERNS, extract_pairs, find_singletons, tag_text
from semattack.demo import build_demo_tag_lexicon
from semattack.textcore import PosTag

lexicon = build_demo_tag_lexicon()

review = ("Sound stinks. The only good thing about these is that it's easy "
          "to set up. I bought these to have additional sound outside.")

doc = tag_text(review, lexicon)
print("tokens and tags:")
for token, tag in doc.tokens:
    print(f"  {token.normalized:12s} {tag.value}")

pattern = PATTERNS["adj1-nn"]
print("\nadjective-noun pairs (replacement sites):")
for occ in extract_pairs(doc, pattern):
    words = doc.words()
    print(f"  ({words[occ.left_index]}, {words[occ.right_index]})")

print("\nstandalone adjectives (insertion anchors):")
print(" ", [doc.words()[i] for i in find_singletons(doc, PosTag.ADJ)])
