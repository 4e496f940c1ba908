"""Rule mining, application, budgets, and black-box evaluation."""

import pytest

from semattack.attack import (AttackConfig, AttackOutcome, AttackReport, Edit,
                              Outcome, PATTERNS, Strategy, config_dict)
from semattack.rules import (Rule, RuleSet, apply_rule, apply_rules_budgeted,
                             evaluate_blackbox, extract_rules, load_rules,
                             save_rules)
from semattack.textcore import PosTag, TagLexicon, doc_from_words, tag_text

from conftest import hand_boe_model

LEX = TagLexicon({
    "good": PosTag.ADJ, "nice": PosTag.ADJ, "fantastic": PosTag.ADJ,
    "small": PosTag.ADJ, "tiny": PosTag.ADJ,
    "reception": PosTag.NOUN, "thing": PosTag.NOUN, "sound": PosTag.NOUN,
    "difficult": PosTag.ADJ,
})

ADJ_NN = PATTERNS["adj1-nn"]


def _report(outcomes, pattern="adj1-nn"):
    return AttackReport(
        strategy=Strategy.REPLACEMENT, pattern=pattern,
        config=config_dict(AttackConfig(pattern=PATTERNS[pattern])),
        outcomes=tuple(outcomes), errors=(),
        accuracy_before=1.0, accuracy_after=0.9)


def _flip(doc_id, position, original, replacement):
    return AttackOutcome(doc_id, Outcome.FLIPPED,
                         (Edit("REPLACE", position, original, replacement),),
                         0.7, 0.3, 1)


def test_extract_single_rule():
    report = _report([_flip("0", 0, "good", "fantastic")])
    rules = extract_rules(report)
    assert len(rules) == 1
    rule = list(rules)[0]
    assert (rule.from_word, rule.to_word, rule.support) == ("good", "fantastic", 1)
    assert rule.pattern == ADJ_NN


def test_extract_empty_report():
    assert len(extract_rules(_report([]))) == 0


def test_extract_min_support():
    outcomes = [_flip(str(i), 0, "good", "fantastic") for i in range(3)]
    outcomes.append(_flip("9", 0, "small", "tiny"))
    rules = extract_rules(_report(outcomes), min_support=2)
    assert [(r.from_word, r.to_word, r.support) for r in rules] == \
        [("good", "fantastic", 3)]


def test_extract_ignores_non_flips():
    degraded = AttackOutcome("5", Outcome.DEGRADED,
                             (Edit("REPLACE", 0, "good", "nice"),), 0.9, 0.7, 1)
    rules = extract_rules(_report([degraded]))
    assert len(rules) == 0


def test_extract_rejects_insertion_reports():
    report = AttackReport(strategy=Strategy.INSERTION, pattern="adv-before-adj",
                          config={}, outcomes=(), errors=(),
                          accuracy_before=1.0, accuracy_after=1.0)
    with pytest.raises(ValueError):
        extract_rules(report)


def test_ruleset_ordering_and_duplicates():
    r1 = Rule(ADJ_NN, "good", "fantastic", 3)
    r2 = Rule(ADJ_NN, "small", "tiny", 5)
    r3 = Rule(ADJ_NN, "nice", "good", 3)
    rules = extract_rules(_report(
        [_flip(str(i), 0, "small", "tiny") for i in range(5)]
        + [_flip(str(i + 10), 0, "good", "fantastic") for i in range(3)]
        + [_flip(str(i + 20), 0, "nice", "good") for i in range(3)]))
    assert [r.from_word for r in rules] == ["small", "good", "nice"]
    with pytest.raises(ValueError):
        RuleSet((r1, r1))
    with pytest.raises(ValueError):
        Rule(ADJ_NN, "same", "same", 1)


def test_apply_rule_rewrites_pair():
    doc = tag_text("with good reception is difficult", LEX)
    rule = Rule(ADJ_NN, "good", "fantastic", 1)
    edited, edits = apply_rule(doc, rule, LEX)
    assert edited.source == "with fantastic reception is difficult"
    assert len(edits) == 1


def test_apply_rule_no_match():
    doc = tag_text("nice sound", LEX)
    rule = Rule(ADJ_NN, "good", "fantastic", 1)
    edited, edits = apply_rule(doc, rule, LEX)
    assert edited.source == doc.source
    assert edits == []


def test_apply_rule_all_instances():
    doc = doc_from_words(["good", "thing", "and", "good", "sound"], LEX)
    rule = Rule(ADJ_NN, "good", "fantastic", 1)
    edited, edits = apply_rule(doc, rule, LEX)
    assert edited.words() == ["fantastic", "thing", "and", "fantastic", "sound"]
    assert len(edits) == 2


def test_apply_rule_idempotent():
    doc = doc_from_words(["good", "thing"], LEX)
    rule = Rule(ADJ_NN, "good", "fantastic", 1)
    once, _ = apply_rule(doc, rule, LEX)
    twice, edits = apply_rule(once, rule, LEX)
    assert twice.words() == once.words()
    assert edits == []


def test_budget_zero_identity():
    doc = doc_from_words(["good", "thing"], LEX)
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 1),))
    edited, edits = apply_rules_budgeted(doc, rules, 0, LEX)
    assert edited.words() == doc.words() and edits == []


def test_budget_saturation_equals_full():
    doc = doc_from_words(["good", "thing", "small", "sound"], LEX)
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 2),
                     Rule(ADJ_NN, "small", "tiny", 1)))
    budgeted, edits = apply_rules_budgeted(doc, rules, 10, LEX)
    assert budgeted.words() == ["fantastic", "thing", "tiny", "sound"]
    assert len(edits) == 2


def test_budget_one_takes_first_in_rule_order():
    doc = doc_from_words(["small", "sound", "good", "thing"], LEX)
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 2),
                     Rule(ADJ_NN, "small", "tiny", 1)))
    edited, edits = apply_rules_budgeted(doc, rules, 1, LEX)
    # rule order (by support) beats document order
    assert edited.words() == ["small", "sound", "fantastic", "thing"]
    assert len(edits) == 1


def test_budget_prefix_property():
    doc = doc_from_words(["good", "thing", "good", "sound", "small", "thing"], LEX)
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 2),
                     Rule(ADJ_NN, "small", "tiny", 1)))
    previous = []
    for budget in range(0, 5):
        _, edits = apply_rules_budgeted(doc, rules, budget, LEX)
        assert edits[:len(previous)] == previous
        previous = edits


def test_budget_negative_rejected():
    doc = doc_from_words(["good", "thing"], LEX)
    with pytest.raises(ValueError):
        apply_rules_budgeted(doc, RuleSet(()), -1, LEX)


def test_evaluate_blackbox_budget_zero_is_clean():
    vectors = {"good": [1.0, 0.0], "fantastic": [-1.0, 0.0], "thing": [0.0, 0.0],
               "small": [0.2, 0.0], "tiny": [-0.4, 0.0], "sound": [0.0, 0.0]}
    model = hand_boe_model(vectors, w=[2.0, 0.0])
    docs = [doc_from_words(["good", "thing"], LEX, label=1, doc_id="0"),
            doc_from_words(["small", "sound"], LEX, label=0, doc_id="1")]
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 1),))
    rows = evaluate_blackbox(model, docs, rules, [0, 1], LEX)
    from semattack.harness import accuracy
    assert rows[0] == (0, accuracy(model, docs))
    assert rows[1][1] <= rows[0][1]


def test_rules_json_roundtrip(tmp_path):
    rules = RuleSet((Rule(ADJ_NN, "good", "fantastic", 3),
                     Rule(ADJ_NN, "small", "tiny", 1)))
    path = tmp_path / "rules.json"
    save_rules(rules, path)
    loaded = load_rules(path)
    assert loaded == rules
