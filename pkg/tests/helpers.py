"""Shared builders for synthetic corpora and full-pipeline runs."""

import hashlib
import json
import os
import random
import shutil
from pathlib import Path

from termkit.cli import run as run_cli
from termkit.corpus_io import SentencePair, TermDictionary, TermPair
from termkit.matcher import MatchedCorpus, MatchedSentence, TermAnnotation

FIXTURES = Path(__file__).parent / "fixtures"


def term_of(k: int, tag: str = "") -> TermPair:
    """A k-token term pair with distinct synthetic tokens."""
    return TermPair(
        tuple(f"s{tag}{k}_{i}" for i in range(k)),
        tuple(f"t{tag}{k}_{i}" for i in range(k)),
    )


def bucket_corpus(
    bucket_sizes: dict[int, int],
    dup_groups: int = 0,
    dup_group_size: int = 5,
    seed: int = 0,
) -> MatchedCorpus:
    """A synthetic matched corpus with the given max-n-gram bucket sizes.

    Every sentence carries one term whose length fixes its bucket, plus a
    unique filler token so targets are distinct.  Optionally appends
    duplicate groups: batches of sentences sharing one target verbatim.
    """
    rng = random.Random(seed)
    terms = {k: term_of(k) for k in bucket_sizes}
    sentences = []
    sid = 0
    for k in sorted(bucket_sizes):
        for _ in range(bucket_sizes[k]):
            pair = SentencePair(
                sid,
                terms[k].source_term + (f"v{sid}",),
                terms[k].target_term + (f"u{sid}",),
            )
            sentences.append(MatchedSentence(pair, (TermAnnotation(terms[k]),)))
            sid += 1
    for g in range(dup_groups):
        k = rng.choice(sorted(bucket_sizes))
        shared_target = terms[k].target_term + (f"dup{g}",)
        for m in range(dup_group_size):
            pair = SentencePair(
                sid, terms[k].source_term + (f"dv{g}_{m}",), shared_target
            )
            sentences.append(MatchedSentence(pair, (TermAnnotation(terms[k]),)))
            sid += 1
    return MatchedCorpus(
        tuple(sentences), TermDictionary.from_pairs(terms.values())
    )


def make_loss_records(corrupted_jsonl: Path, records_path: Path) -> None:
    """Deterministic log-prob records derived from a corrupted JSONL file."""
    with open(corrupted_jsonl, encoding="utf-8") as f_in, open(
        records_path, "w", encoding="utf-8"
    ) as f_out:
        for line in f_in:
            row = json.loads(line)
            n = len(row["y"]) + 1  # one extra slot for end-of-sequence
            record = {
                "id": row["id"],
                "lp": [-0.1] * n,
                "ssp_lp": [-0.25] * n,
                "mask": row["mask"],
            }
            f_out.write(json.dumps(record) + "\n")


def run_pipeline(run_dir: Path, seed: int, threads: int = 1) -> None:
    """Drive every subcommand over the bundled fixture inside run_dir.

    Output paths are relative (the cwd is switched to run_dir) so two runs
    in different directories produce byte-comparable trees.
    """
    run_dir.mkdir(parents=True, exist_ok=True)
    before = os.getcwd()
    os.chdir(run_dir)
    try:
        steps = [
            ["match", "--src", str(FIXTURES / "corpus.de"), "--tgt", str(FIXTURES / "corpus.en"),
             "--dict", str(FIXTURES / "terms.tsv"), "--out", "matched.jsonl",
             "--threads", str(threads), "--seed", str(seed)],
            ["split", "--matched", "matched.jsonl", "--out", "split",
             "--heldout-size", "5", "--seed", str(seed)],
            ["corrupt", "--matched", "split/train.jsonl", "--out", "corrupted.jsonl",
             "--seed", str(seed), "--threads", str(threads)],
            ["stats", "--matched", "matched.jsonl", "--out", "stats"],
        ]
        for argv in steps:
            code = run_cli(argv)
            assert code == 0, f"{argv[0]} exited {code}"
        shutil.copy("split/test.tgt", "hyp.txt")
        assert run_cli(["eval", "--matched", "split/test.jsonl", "--hyp", "hyp.txt",
                        "--out", "metrics.json", "--per-sentence", "per_sentence.tsv"]) == 0
        make_loss_records(Path("corrupted.jsonl"), Path("records.jsonl"))
        assert run_cli(["loss", "--records", "records.jsonl", "--out", "loss.json",
                        "--gamma", "0.5", "--per-token"]) == 0
        assert run_cli(["unique-test", "--dir", "split", "--out", "unique"]) == 0
    finally:
        os.chdir(before)


def tree_digest(root: Path) -> dict[str, str]:
    """Relative path -> content sha256 for every file under root."""
    digests = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digests[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
    return digests
