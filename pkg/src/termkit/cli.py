"""Command-line front end for the pipeline.

Subcommands:
  match        term-annotate a parallel corpus against a dictionary
  split        terminology-aware train/valid/test split of a matched corpus
  corrupt      span-corrupt target sentences for masked span prediction
  stats        corpus statistics, top terms, n-gram histogram
  eval         exact and partial term scores for a hypothesis file
  loss         joint loss from a log-probability JSONL
  unique-test  leakage-free test subset (targets unseen elsewhere)

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.  Every run
writes a run_manifest.json next to its output recording the resolved
configuration, seed, input digests, and tool version, which is enough to
re-run the command.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .analytics import (
    corpus_stats,
    ngram_histogram,
    top_terms,
    write_histogram_csv,
    write_stats_json,
    write_top_terms_tsv,
)
from .corpus_io import (
    filter_corpus_by_length,
    filter_dictionary,
    load_corpus,
    load_dictionary,
    tokenize,
)
from .corrupter import CorruptionConfig, corrupt_sentences, write_corrupted_jsonl
from .errors import AlignmentError, FormatError, ValidationError
from .matcher import (
    MatchedCorpus,
    build_matched_corpus,
    iter_matched_targets,
    read_matched_jsonl,
    write_matched_jsonl,
)
from .metrics import (
    EvalInstance,
    aggregate_lsm2,
    lsm_report_to_json,
    per_sentence_details,
    term_usage,
    usage_report_to_json,
)
from .objective import (
    LossConfig,
    breakdown_to_json,
    per_token_view,
    read_logprob_jsonl,
    total_loss,
)
from .splitter import SplitConfig, split, unique_subset, write_split

THREADS_ENV_VAR = "TERMKIT_THREADS"


@dataclass
class PipelineConfig:
    """Resolved knob values shared by the subcommands.

    Flags win over config-file keys, which win over these defaults.
    """

    seed: int = 0
    heldout_size: int = 3000
    dup_mode: str = "grouped"
    geometric_p: float = 0.2
    max_span: int = 10
    min_span: int = 1
    ratio: float = 0.5
    mask_token: str = "[MASK]"
    gamma: float = 0.5
    min_chars: int = 4
    max_ngram: int = 20
    filter_side: str = "target"
    max_tokens: int = 80
    casefold: bool = False
    multi_pass: bool = False
    per_token: bool = False
    top_k: int = 10

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "PipelineConfig":
        file_cfg = _load_config_file(getattr(args, "config", None))
        known = {f.name: f for f in fields(cls)}
        unknown = set(file_cfg) - set(known)
        if unknown:
            raise ValidationError(
                f"unknown config key(s): {', '.join(sorted(unknown))}"
            )
        values = {}
        for name, spec in known.items():
            flag_value = getattr(args, name, None)
            if flag_value is not None:
                values[name] = flag_value
            elif name in file_cfg:
                values[name] = file_cfg[name]
            else:
                values[name] = spec.default
        return cls(**values)

    def split_config(self) -> SplitConfig:
        return SplitConfig(
            heldout_size=self.heldout_size, seed=self.seed, dup_mode=self.dup_mode
        )

    def corruption_config(self, vocabulary: tuple[str, ...]) -> CorruptionConfig:
        return CorruptionConfig(
            geometric_p=self.geometric_p,
            max_span=self.max_span,
            min_span=self.min_span,
            ratio=self.ratio,
            mask_token=self.mask_token,
            vocabulary=vocabulary,
            seed=self.seed,
        )

    def loss_config(self) -> LossConfig:
        return LossConfig(gamma=self.gamma)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as f:
        try:
            return tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV_VAR, "1")))
    except ValueError:
        return 1


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    out_dir: Path,
    command: str,
    cfg: PipelineConfig,
    inputs: list[str | Path],
    extra: dict | None = None,
) -> None:
    manifest = {
        "tool": "termkit",
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "config": {**asdict(cfg), **(extra or {})},
        "inputs": {str(p): f"sha256:{_sha256(p)}" for p in inputs},
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def _dump_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)
        f.write("\n")


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_match(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    corpus = load_corpus(args.src, args.tgt)
    n_loaded = len(corpus)
    if cfg.max_tokens > 0:
        corpus = filter_corpus_by_length(corpus, cfg.max_tokens)
    dictionary = load_dictionary(args.dict)
    n_raw_terms = len(dictionary)
    dictionary = filter_dictionary(
        dictionary, cfg.min_chars, cfg.max_ngram, cfg.filter_side
    )
    mc = build_matched_corpus(
        corpus,
        dictionary,
        casefold=cfg.casefold,
        multi_pass=cfg.multi_pass,
        threads=args.threads,
    )
    write_matched_jsonl(mc, args.out)
    _write_manifest(
        Path(args.out).parent,
        "match",
        cfg,
        [args.src, args.tgt, args.dict],
        extra={"src": args.src, "tgt": args.tgt, "dict": args.dict, "out": args.out},
    )
    _info(
        f"loaded {n_loaded} pairs ({len(corpus)} within {cfg.max_tokens} tokens), "
        f"dictionary {n_raw_terms} -> {len(dictionary)} entries after filtering, "
        f"matched {len(mc.sentences)} sentences -> {args.out}"
    )
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    mc = read_matched_jsonl(args.matched)
    split_cfg = cfg.split_config()
    result = split(mc, split_cfg)
    out_dir = Path(args.out)
    write_split(result, split_cfg, mc, out_dir)
    _write_manifest(
        out_dir,
        "split",
        cfg,
        [args.matched],
        extra={"matched": args.matched, "out": args.out},
    )
    sizes = result.sizes
    _info(f"split {len(mc.sentences)} sentences into {sizes[0]}/{sizes[1]}/{sizes[2]} -> {out_dir}")
    return 0


def _load_vocabulary(args: argparse.Namespace, targets: list) -> tuple[str, ...]:
    if args.vocab:
        tokens = []
        with open(args.vocab, encoding="utf-8") as f:
            for line in f:
                token = line.strip()
                if token:
                    tokens.append(token)
        return tuple(dict.fromkeys(tokens))
    # no vocabulary file: use the distinct tokens of the input itself
    return tuple(sorted({t for _, tokens in targets for t in tokens}))


def cmd_corrupt(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    if args.matched:
        mc = read_matched_jsonl(args.matched)
        targets = list(iter_matched_targets(mc))
        input_path = args.matched
    else:
        with open(args.tgt, encoding="utf-8") as f:
            targets = [(i, tokenize(line)) for i, line in enumerate(f)]
        empty = [i for i, tokens in targets if not tokens]
        if empty:
            raise ValidationError(f"{args.tgt}: empty line {empty[0] + 1}")
        input_path = args.tgt
    vocabulary = _load_vocabulary(args, targets)
    corruption_cfg = cfg.corruption_config(vocabulary)
    results = corrupt_sentences(targets, corruption_cfg, threads=args.threads)
    write_corrupted_jsonl(results, args.out)
    inputs = [input_path] + ([args.vocab] if args.vocab else [])
    _write_manifest(
        Path(args.out).parent,
        "corrupt",
        cfg,
        inputs,
        extra={"input": str(input_path), "out": args.out, "vocab": args.vocab},
    )
    _info(f"corrupted {len(results)} sentences -> {args.out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    mc = read_matched_jsonl(args.matched)
    stats = corpus_stats(mc)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_stats_json(stats, out_dir / "stats.json")
    write_top_terms_tsv(top_terms(mc, cfg.top_k), out_dir / "top_terms.tsv")
    write_histogram_csv(ngram_histogram(mc), out_dir / "ngram_hist.csv")
    _write_manifest(
        out_dir, "stats", cfg, [args.matched], extra={"matched": args.matched, "out": args.out}
    )
    _info(
        f"{stats.n_sentences} sentences, {stats.n_terms} term instances "
        f"({stats.avg_terms_per_sent:.2f} per sentence) -> {out_dir}"
    )
    return 0


def _read_hypotheses(path: str | Path) -> list[tuple[str, ...]]:
    with open(path, encoding="utf-8") as f:
        return [tokenize(line) for line in f]


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    mc = read_matched_jsonl(args.matched)
    hypotheses = _read_hypotheses(args.hyp)
    if len(hypotheses) != len(mc.sentences):
        raise AlignmentError(
            f"{args.hyp} has {len(hypotheses)} lines but {args.matched} has "
            f"{len(mc.sentences)} sentences"
        )
    instances = [
        EvalInstance(hypothesis=hyp, reference=ms)
        for hyp, ms in zip(hypotheses, mc.sentences)
    ]
    usage = term_usage(instances)
    lsm = aggregate_lsm2(instances)
    payload = {
        "term_usage": usage_report_to_json(usage),
        "lsm2": lsm_report_to_json(lsm),
    }
    _dump_json(payload, args.out)
    if args.per_sentence:
        with open(args.per_sentence, "w", encoding="utf-8") as f:
            f.write("id\tterm\tn\texact\tpartial\n")
            for sid, term, n, hit, partial in per_sentence_details(instances):
                partial_s = "" if partial is None else f"{partial:.6f}"
                f.write(f"{sid}\t{term}\t{n}\t{hit}\t{partial_s}\n")
    _write_manifest(
        Path(args.out).parent,
        "eval",
        cfg,
        [args.matched, args.hyp],
        extra={"matched": args.matched, "hyp": args.hyp, "out": args.out},
    )
    _info(f"scored {len(instances)} sentences -> {args.out}")
    return 0


def cmd_loss(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    records = read_logprob_jsonl(args.records)
    loss_cfg = cfg.loss_config()
    breakdown = total_loss(records, loss_cfg)
    payload = breakdown_to_json(breakdown, loss_cfg)
    if cfg.per_token:
        payload["per_token"] = per_token_view(records)
    _dump_json(payload, args.out)
    _write_manifest(
        Path(args.out).parent,
        "loss",
        cfg,
        [args.records],
        extra={"records": args.records, "out": args.out},
    )
    _info(f"total loss {breakdown.total:.6f} over {breakdown.n_sentences} sentences -> {args.out}")
    return 0


def cmd_unique_test(args: argparse.Namespace) -> int:
    cfg = PipelineConfig.resolve(args)
    if args.dir:
        base = Path(args.dir)
        train_path = base / "train.jsonl"
        valid_path = base / "valid.jsonl"
        test_path = base / "test.jsonl"
    else:
        if not (args.train and args.valid and args.test):
            raise ValidationError("provide either --dir or all of --train/--valid/--test")
        train_path, valid_path, test_path = args.train, args.valid, args.test
    train = read_matched_jsonl(train_path)
    valid = read_matched_jsonl(valid_path)
    test = read_matched_jsonl(test_path)
    unique = unique_subset(list(test.sentences), list(train.sentences), list(valid.sentences))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matched_jsonl(
        MatchedCorpus(sentences=tuple(unique), dictionary=test.dictionary),
        out_dir / "unique_test.jsonl",
    )
    with open(out_dir / "unique_test.src", "w", encoding="utf-8") as src_f, open(
        out_dir / "unique_test.tgt", "w", encoding="utf-8"
    ) as tgt_f:
        for ms in unique:
            src_f.write(" ".join(ms.pair.source) + "\n")
            tgt_f.write(" ".join(ms.pair.target) + "\n")
    _write_manifest(
        out_dir,
        "unique-test",
        cfg,
        [train_path, valid_path, test_path],
        extra={"out": args.out},
    )
    _info(f"kept {len(unique)}/{len(test.sentences)} test sentences -> {out_dir}")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (not argparse's default 2); --help still exits 0
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file; flags override its keys")
    parser.add_argument("--seed", type=int, help="global seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="termkit", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"termkit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("match", help="term-annotate a parallel corpus")
    p.add_argument("--src", required=True, help="source text, one sentence per line")
    p.add_argument("--tgt", required=True, help="target text, one sentence per line")
    p.add_argument("--dict", required=True, help="term dictionary TSV")
    p.add_argument("--out", required=True, help="matched corpus JSONL to write")
    p.add_argument("--min-chars", type=int, help="drop terms shorter than this many characters (default 4)")
    p.add_argument("--max-ngram", type=int, help="drop terms longer than this many tokens (default 20)")
    p.add_argument("--filter-side", choices=["target", "source", "both"], help="side the character filter applies to (default target)")
    p.add_argument("--max-tokens", type=int, help="drop sentence pairs longer than this on either side (default 80; 0 disables)")
    p.add_argument("--casefold", action="store_const", const=True, help="match case-insensitively")
    p.add_argument("--multi-pass", action="store_const", const=True, help="rescan until no entry matches again, counting repeats")
    p.add_argument("--threads", type=int, default=_default_threads(), help=f"worker threads (default ${THREADS_ENV_VAR} or 1)")
    _add_common(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("split", help="terminology-aware train/valid/test split")
    p.add_argument("--matched", required=True, help="matched corpus JSONL")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--heldout-size", type=int, help="sentences in each of valid and test (default 3000)")
    p.add_argument("--dup-mode", choices=["grouped", "paper"], help="duplicate handling (default grouped)")
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("corrupt", help="span-corrupt target sentences")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--matched", help="matched corpus JSONL (targets are corrupted)")
    group.add_argument("--tgt", help="plain target text, one sentence per line")
    p.add_argument("--out", required=True, help="corrupted JSONL to write")
    p.add_argument("--vocab", help="token file for random replacement (default: tokens of the input)")
    p.add_argument("--ratio", type=float, help="fraction of tokens to corrupt (default 0.5)")
    p.add_argument("--geometric-p", type=float, help="geometric span-length parameter (default 0.2)")
    p.add_argument("--max-span", type=int, help="span length cap (default 10)")
    p.add_argument("--min-span", type=int, help="span length floor (default 1)")
    p.add_argument("--mask-token", help="mask token string (default [MASK])")
    p.add_argument("--threads", type=int, default=_default_threads(), help=f"worker threads (default ${THREADS_ENV_VAR} or 1)")
    _add_common(p)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("stats", help="corpus statistics and term histograms")
    p.add_argument("--matched", required=True, help="matched corpus JSONL")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--top-k", type=int, help="how many top terms to list (default 10)")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="score a hypothesis file against term annotations")
    p.add_argument("--matched", required=True, help="matched corpus JSONL (references)")
    p.add_argument("--hyp", required=True, help="hypothesis text, line-aligned with the JSONL")
    p.add_argument("--out", required=True, help="metrics JSON to write")
    p.add_argument("--per-sentence", help="optional per-term TSV for error analysis")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("loss", help="joint loss from per-position log-probabilities")
    p.add_argument("--records", required=True, help="log-prob JSONL")
    p.add_argument("--out", required=True, help="loss JSON to write")
    p.add_argument("--gamma", type=float, help="span-prediction loss weight (default 0.5)")
    p.add_argument("--per-token", action="store_const", const=True, help="also report token-normalized NLLs")
    _add_common(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("unique-test", help="test subset with targets unseen in train/valid")
    p.add_argument("--dir", help="split directory holding {train,valid,test}.jsonl")
    p.add_argument("--train", help="train matched JSONL (alternative to --dir)")
    p.add_argument("--valid", help="valid matched JSONL")
    p.add_argument("--test", help="test matched JSONL")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_unique_test)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
