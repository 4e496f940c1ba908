"""Command-line frontend for batch robustness audits.

Subcommands compose the library: train | triggers | attack | extract-rules
| apply-rules | eval. Every flag has a config-file (INI) equivalent; flags
override file values, and the effective configuration is echoed into the
summary artifacts. All randomness flows from --seed. Artifacts use fixed
names inside --out-dir: model.ckpt, triggers.json, report.jsonl,
summary.json, rules.json.

Exit codes: 0 success; 1 usage or configuration error; 2 runtime failure
(unreachable scorer under fail-closed, corrupt checkpoint).
"""

import argparse
import configparser
import json
import os
import sys
from dataclasses import replace as dc_replace
from pathlib import Path

from . import demo
from .attack import (AttackConfig, Outcome, PATTERNS, attack_corpus,
                     load_outcomes, AttackReport, Strategy)
from .classifier import (Architecture, ModelConfig, load_checkpoint,
                         save_checkpoint, train)
from .errors import CheckpointError, SemattackError
from .harness import (SplitSpec, accuracy, degradation_table, load_corpus_file,
                      split, tag_corpus)
from .lexicon import load_embeddings_file, load_polarity_file
from .plausibility import (DEFAULT_BIGRAM_THRESHOLD, DEFAULT_MLM_THRESHOLD,
                           RemoteScorer, fit_bigram)
from .rules import evaluate_blackbox, extract_rules, load_rules, save_rules
from .textcore import PosTag, load_tag_lexicon_file
from .triggers import (Placement, TriggerRule, find_universal_triggers,
                       load_trigger_set, save_trigger_set)

SCORER_URL_ENV = "SEMATTACK_SCORER_URL"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _read_config_file(path: str | None) -> dict[str, dict[str, str]]:
    if not path:
        return {}
    if not Path(path).exists():
        raise _UsageError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    return {section: dict(parser[section]) for section in parser.sections()}


def _setting(args, ini: dict, section: str, key: str, default, cast):
    """Flag wins over config-file value wins over default.

    store_true flags can only switch a setting on; their False default falls
    through to the config file.
    """
    flag = getattr(args, key, None)
    if flag is not None and not (cast is bool and flag is False):
        return flag
    raw = ini.get(section, {}).get(key)
    if raw is not None:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise _UsageError(f"{what} not found: {p}")
    return p


def _add_common(sub):
    sub.add_argument("--config", help="INI config file; flags override its values")
    sub.add_argument("--seed", type=int, help="global seed (default 0)")
    sub.add_argument("--tag-lexicon", help="word<TAB>TAG lexicon (default: shipped)")
    sub.add_argument("--embeddings", help="GloVe-format embeddings (default: shipped)")
    sub.add_argument("--polarity", help="word<TAB>POLARITY lexicon (default: shipped)")
    sub.add_argument("--corpus", help="labeled corpus (JSONL or CSV)")
    sub.add_argument("--train-fraction", type=float)
    sub.add_argument("--test-fraction", type=float)
    sub.add_argument("--split", choices=["train", "test", "all"],
                     help="which side of the split to operate on (default test)")


def build_parser() -> _Parser:
    parser = _Parser(prog="semattack",
                     description="semantic-preserving adversarial attacks for "
                                 "binary text classifiers")
    subs = parser.add_subparsers(dest="command", required=True)

    p_train = subs.add_parser("train", help="train a victim model")
    _add_common(p_train)
    p_train.add_argument("--out-dir", required=True)
    p_train.add_argument("--arch", choices=["boe_lr", "cnn"])
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--learning-rate", type=float, dest="learning_rate")
    p_train.add_argument("--batch-size", type=int, dest="batch_size")
    p_train.add_argument("--embedding-dim", type=int, dest="embedding_dim")
    p_train.add_argument("--max-seq-len", type=int, dest="max_sequence_length")
    p_train.add_argument("--clip-norm", type=float, dest="clip_norm")
    p_train.add_argument("--dropout", type=float, dest="dropout_rate")

    p_eval = subs.add_parser("eval", help="report accuracy of a checkpoint")
    _add_common(p_eval)
    p_eval.add_argument("--model", required=True)

    p_trig = subs.add_parser("triggers", help="search universal triggers")
    _add_common(p_trig)
    p_trig.add_argument("--model", required=True)
    p_trig.add_argument("--out-dir", required=True)
    p_trig.add_argument("--rule", help="comma-separated tags, e.g. adj or adv,adj")
    p_trig.add_argument("--beam", type=int)
    p_trig.add_argument("--max-iters", type=int, dest="max_iters")
    p_trig.add_argument("--sample", type=int, help="sample size for the search")
    p_trig.add_argument("--placement", choices=["front", "end"])

    p_attack = subs.add_parser("attack", help="run a white-box attack")
    _add_common(p_attack)
    p_attack.add_argument("--model", required=True)
    p_attack.add_argument("--triggers", required=True)
    p_attack.add_argument("--out-dir", required=True)
    p_attack.add_argument("--strategy", choices=["replacement", "insertion"])
    p_attack.add_argument("--pattern", choices=sorted(PATTERNS))
    p_attack.add_argument("--t-emb", type=float, dest="t_emb")
    p_attack.add_argument("--t-mlm", type=float, dest="t_mlm")
    p_attack.add_argument("--no-mlm", action="store_true")
    p_attack.add_argument("--no-polarity", action="store_true")
    p_attack.add_argument("--mlm-fail-open", action="store_true")
    p_attack.add_argument("--max-edits", type=int, dest="max_edits_per_doc")
    p_attack.add_argument("--scorer-url", help=f"masked-LM service URL "
                                               f"(or ${SCORER_URL_ENV})")
    p_attack.add_argument("--jobs", type=int, help="per-document parallelism")

    p_rules = subs.add_parser("extract-rules", help="mine black-box rules")
    p_rules.add_argument("--config", help="INI config file")
    p_rules.add_argument("--report", required=True, help="report.jsonl from attack")
    p_rules.add_argument("--summary", required=True, help="summary.json from attack")
    p_rules.add_argument("--out-dir", required=True)
    p_rules.add_argument("--min-support", type=int, dest="min_support")

    p_apply = subs.add_parser("apply-rules", help="black-box budgeted evaluation")
    _add_common(p_apply)
    p_apply.add_argument("--model", required=True)
    p_apply.add_argument("--rules", required=True)
    p_apply.add_argument("--out-dir")
    p_apply.add_argument("--budget", type=int, help="largest budget to evaluate")
    p_apply.add_argument("--budgets", help="comma-separated budgets (overrides --budget)")

    return parser


def _load_world(args, ini):
    tag_path = _setting(args, ini, "paths", "tag_lexicon",
                        demo.demo_tag_lexicon_path(), str)
    emb_path = _setting(args, ini, "paths", "embeddings",
                        demo.demo_embeddings_path(), str)
    pol_path = _setting(args, ini, "paths", "polarity",
                        demo.demo_polarity_path(), str)
    lexicon = load_tag_lexicon_file(_require_file(tag_path, "tag lexicon"))
    store = load_embeddings_file(_require_file(emb_path, "embeddings"))
    polarity = load_polarity_file(_require_file(pol_path, "polarity lexicon"))
    return lexicon, store, polarity, {"tag_lexicon": str(tag_path),
                                      "embeddings": str(emb_path),
                                      "polarity": str(pol_path)}


def _load_split(args, ini, lexicon, seed):
    corpus_path = _setting(args, ini, "paths", "corpus", None, str)
    if corpus_path is None:
        raise _UsageError("--corpus is required")
    corpus = load_corpus_file(_require_file(corpus_path, "corpus"))
    spec = SplitSpec(
        train_fraction=_setting(args, ini, "split", "train_fraction", 0.5, float),
        test_fraction=_setting(args, ini, "split", "test_fraction", 0.5, float),
        seed=seed,
        stratified=True,
    )
    train_c, test_c = split(corpus, spec)
    side = _setting(args, ini, "split", "split", "test", str)
    chosen = {"train": train_c, "test": test_c, "all": corpus}[side]
    return corpus, train_c, test_c, chosen, spec, side, str(corpus_path)


def _model_config(args, ini, seed) -> ModelConfig:
    arch = _setting(args, ini, "model", "arch", "boe_lr", str)
    return ModelConfig(
        architecture=Architecture(arch),
        embedding_dim=_setting(args, ini, "model", "embedding_dim", 50, int),
        max_sequence_length=_setting(args, ini, "model", "max_sequence_length", 256, int),
        dropout_rate=_setting(args, ini, "model", "dropout_rate", 0.2, float),
        hidden_units=_setting(args, ini, "model", "hidden_units", 10, int),
        seed=seed,
        learning_rate=_setting(args, ini, "model", "learning_rate", 0.01, float),
        clip_norm=_setting(args, ini, "model", "clip_norm", 5.0, float),
        epochs=_setting(args, ini, "model", "epochs", 20, int),
        batch_size=_setting(args, ini, "model", "batch_size", 32, int),
    )


def _cmd_train(args, ini) -> int:
    seed = _setting(args, ini, "run", "seed", 0, int)
    lexicon, store, _, paths = _load_world(args, ini)
    _, train_c, test_c, _, spec, _, corpus_path = _load_split(args, ini, lexicon, seed)
    config = _model_config(args, ini, seed)
    train_docs = tag_corpus(train_c, lexicon)
    model = train(train_docs, config, store=store)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out_dir / "model.ckpt")
    test_docs = tag_corpus(test_c, lexicon)
    print(f"train accuracy: {model.meta.final_train_accuracy:.4f}")
    print(f"test accuracy: {accuracy(model, test_docs):.4f}")
    print(f"checkpoint: {out_dir / 'model.ckpt'}")
    return 0


def _cmd_eval(args, ini) -> int:
    seed = _setting(args, ini, "run", "seed", 0, int)
    lexicon, _, _, _ = _load_world(args, ini)
    model = load_checkpoint(_require_file(args.model, "checkpoint"))
    _, _, _, chosen, _, side, _ = _load_split(args, ini, lexicon, seed)
    docs = tag_corpus(chosen, lexicon)
    print(f"accuracy ({side}): {accuracy(model, docs):.4f}")
    return 0


def _parse_rule(raw: str) -> TriggerRule:
    names = {"adj": PosTag.ADJ, "noun": PosTag.NOUN, "nn": PosTag.NOUN,
             "adv": PosTag.ADV, "verb": PosTag.VERB, "vb": PosTag.VERB}
    tags = []
    for part in raw.split(","):
        part = part.strip().lower()
        if part not in names:
            raise _UsageError(f"unknown tag {part!r} in --rule")
        tags.append(names[part])
    return TriggerRule(tuple(tags))


def _cmd_triggers(args, ini) -> int:
    seed = _setting(args, ini, "run", "seed", 0, int)
    lexicon, store, _, _ = _load_world(args, ini)
    model = load_checkpoint(_require_file(args.model, "checkpoint"))
    _, _, _, chosen, _, _, _ = _load_split(args, ini, lexicon, seed)
    docs = tag_corpus(chosen, lexicon)
    sample_size = _setting(args, ini, "trigger", "sample", 200, int)
    sample = docs[:sample_size]
    rule = _parse_rule(_setting(args, ini, "trigger", "rule", "adj", str))
    placement = Placement(_setting(args, ini, "trigger", "placement", "front", str).upper())
    triggers = find_universal_triggers(
        model, sample, rule, lexicon,
        max_iters=_setting(args, ini, "trigger", "max_iters", 10, int),
        beam=_setting(args, ini, "trigger", "beam", 20, int),
        placement=placement)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_trigger_set(triggers, out_dir / "triggers.json")
    print(f"triggers: {out_dir / 'triggers.json'}")
    return 0


def _attack_config(args, ini, default_t_mlm: float) -> AttackConfig:
    pattern_key = _setting(args, ini, "attack", "pattern", "adj1-nn", str)
    if pattern_key not in PATTERNS:
        raise _UsageError(f"unknown pattern {pattern_key!r}")
    strategy = _setting(args, ini, "attack", "strategy", None, str)
    pattern = PATTERNS[pattern_key]
    if strategy is not None:
        want = Strategy(strategy.upper())
        have = AttackConfig(pattern=pattern).strategy
        if want is not have:
            raise _UsageError(
                f"pattern {pattern_key!r} is a {have.value.lower()} pattern")
    mlm_enabled = not bool(_setting(args, ini, "attack", "no_mlm", False, bool))
    polarity_enabled = not bool(_setting(args, ini, "attack", "no_polarity", False, bool))
    return AttackConfig(
        pattern=pattern,
        t_emb=_setting(args, ini, "attack", "t_emb", 0.45, float),
        t_mlm=_setting(args, ini, "attack", "t_mlm", default_t_mlm, float),
        flip_threshold=_setting(args, ini, "attack", "flip_threshold", 0.5, float),
        mlm_filter_enabled=mlm_enabled,
        polarity_filter_enabled=polarity_enabled,
        max_edits_per_doc=_setting(args, ini, "attack", "max_edits_per_doc", 1, int),
        stop_on_first_flip=True,
        mlm_fail_open=bool(_setting(args, ini, "attack", "mlm_fail_open", False, bool)),
    )


def _cmd_attack(args, ini) -> int:
    seed = _setting(args, ini, "run", "seed", 0, int)
    lexicon, store, polarity, paths = _load_world(args, ini)
    model = load_checkpoint(_require_file(args.model, "checkpoint"))
    triggers = load_trigger_set(_require_file(args.triggers, "trigger set"))
    _, train_c, _, chosen, spec, side, corpus_path = _load_split(args, ini, lexicon, seed)
    docs = tag_corpus(chosen, lexicon)

    scorer_url = args.scorer_url or os.environ.get(SCORER_URL_ENV)
    if scorer_url:
        scorer = RemoteScorer(scorer_url)
        default_threshold = DEFAULT_MLM_THRESHOLD
        backend = f"remote:{scorer_url}"
    else:
        train_docs = tag_corpus(train_c, lexicon)
        scorer = fit_bigram([w for doc in train_docs for w in doc.words()])
        default_threshold = DEFAULT_BIGRAM_THRESHOLD
        backend = "bigram:train-split"
    config = _attack_config(args, ini, default_threshold)

    jobs = _setting(args, ini, "run", "jobs", None, int)
    report = attack_corpus(model, docs, triggers, store, polarity, lexicon,
                           scorer, config, jobs=jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = report.summary_dict()
    summary["effective_config"] = {
        "seed": seed, "split": side, "corpus": corpus_path,
        "train_fraction": spec.train_fraction, "test_fraction": spec.test_fraction,
        "scorer": backend, "paths": paths, "jobs": jobs,
    }
    with open(out_dir / "report.jsonl", "w", encoding="utf-8") as fh:
        for outcome in report.outcomes:
            fh.write(json.dumps(outcome.to_dict(), sort_keys=True) + "\n")
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    drop = report.accuracy_before - report.accuracy_after
    print(f"accuracy: {report.accuracy_before:.4f} -> {report.accuracy_after:.4f} "
          f"({-100 * drop:+.1f} points)")
    print(f"flips: {report.count(Outcome.FLIPPED)}")
    print(f"report: {out_dir / 'report.jsonl'}")
    if report.errors and len(report.errors) == len(report.outcomes):
        print("error: every document failed (scorer unreachable?)", file=sys.stderr)
        return 2
    return 0


def _cmd_extract_rules(args, ini) -> int:
    outcomes = load_outcomes(_require_file(args.report, "report"))
    with open(_require_file(args.summary, "summary"), encoding="utf-8") as fh:
        summary = json.load(fh)
    report = AttackReport(
        strategy=Strategy(summary["strategy"]),
        pattern=summary["pattern"],
        config=summary["config"],
        outcomes=tuple(outcomes),
        errors=(),
        accuracy_before=summary["accuracy_before"],
        accuracy_after=summary["accuracy_after"],
    )
    min_support = _setting(args, ini, "rules", "min_support", 1, int)
    rules = extract_rules(report, min_support=min_support)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_rules(rules, out_dir / "rules.json")
    print(f"rules: {len(rules)} -> {out_dir / 'rules.json'}")
    return 0


def _cmd_apply_rules(args, ini) -> int:
    seed = _setting(args, ini, "run", "seed", 0, int)
    lexicon, _, _, _ = _load_world(args, ini)
    model = load_checkpoint(_require_file(args.model, "checkpoint"))
    rules = load_rules(_require_file(args.rules, "rules file"))
    _, _, _, chosen, _, side, corpus_path = _load_split(args, ini, lexicon, seed)
    docs = tag_corpus(chosen, lexicon)
    if args.budgets:
        budgets = [int(b) for b in args.budgets.split(",")]
    else:
        top = args.budget if args.budget is not None else 3
        budgets = list(range(top + 1))
    rows = evaluate_blackbox(model, docs, rules, budgets, lexicon)
    table = degradation_table([(f"budget {b}", acc) for b, acc in rows])
    print(table.render_text())
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = table.to_json_dict()
        payload["effective_config"] = {
            "seed": seed, "split": side, "corpus": corpus_path,
            "rules": str(args.rules), "budgets": budgets,
        }
        with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"summary: {out_dir / 'summary.json'}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "triggers": _cmd_triggers,
    "attack": _cmd_attack,
    "extract-rules": _cmd_extract_rules,
    "apply-rules": _cmd_apply_rules,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ini = _read_config_file(getattr(args, "config", None))
        return _COMMANDS[args.command](args, ini)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SemattackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
