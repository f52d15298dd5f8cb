"""Command-line entry point wiring the toolkit's workflows together.

Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.
All errors print a single machine-parsable diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .analysis import (
    compare_experience_groups,
    pattern_frequencies,
    preceding_intent_ratios,
    turn_bin_distribution,
)
from .dialogue import (
    Corpus,
    ReformulationType,
    dialogue_to_record,
    extract_human_sequences,
    extract_triads,
    load_corpus,
    triad_to_record,
)
from .dynamics import estimate_transition_matrix, load_matrix, save_matrix, segment_pieces
from .errors import BackendError, DataError, ReformkitError
from .filtering import remote_acceptable
from .generators import RuleBackend
from .metrics import MetricReport, evaluate_run
from .orchestrator import (
    OrchestratorConfig,
    generate_sequence,
    load_sequences,
    save_sequences,
    splice_dialogue,
)
from .remote import RemoteClient

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits 1 (not 2) on usage errors."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="reformkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"reformkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("--corpus", required=True, help="line-delimited corpus file")
        p.add_argument(
            "--domain",
            choices=["movie", "travel", "hybrid"],
            help="restrict dialogues to one domain (hybrid = movie plus travel)",
        )

    p = sub.add_parser("estimate", help="estimate the type-transition matrix from a corpus")
    corpus_arg(p)
    p.add_argument("--out", required=True, help="output matrix file")

    p = sub.add_parser("analyze", help="descriptive and inferential reports over a corpus")
    corpus_arg(p)
    p.add_argument("--out", help="optional line-delimited report file")

    p = sub.add_parser("triads", help="extract training triads from a corpus")
    corpus_arg(p)
    p.add_argument("--out", required=True, help="output triad file")

    p = sub.add_parser("generate", help="generate reformulation sequences from seed utterances")
    p.add_argument("--seed-file", required=True, help="file with one seed utterance per line")
    p.add_argument("--matrix", required=True, help="transition matrix file")
    p.add_argument("--backend", choices=["rule", "remote"], default="rule")
    p.add_argument("--backend-url", help="base URL of the remote backend")
    p.add_argument("--filter", choices=["heuristic", "remote", "off"], default="heuristic")
    p.add_argument(
        "--filter-relaxed",
        action="store_true",
        help="disable the repetition guards of the heuristic filter",
    )
    p.add_argument("--length", type=int, default=3, help="steps per sequence")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--runs", type=int, default=1, help="repetitions per seed utterance")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sequence workers")
    p.add_argument(
        "--domain", choices=["movie", "travel", "music", "hybrid"], default="movie"
    )
    p.add_argument("--out", required=True, help="output sequence file")

    p = sub.add_parser("splice", help="swap human reformulations for simulated ones")
    corpus_arg(p)
    p.add_argument("--sequences", required=True, help="generated sequence file")
    p.add_argument("--out", required=True, help="output file of dialogue pairs")

    p = sub.add_parser("evaluate", help="score generated sequences against human references")
    corpus_arg(p)
    p.add_argument("--sequences", required=True, help="generated sequence file")
    p.add_argument("--jobs", type=int, default=1, help="concurrent per-seed evaluation workers")
    p.add_argument("--scale-100", action="store_true", help="display metrics multiplied by 100")
    p.add_argument("--out", help="optional report file")

    p = sub.add_parser("conformance", help="probe a remote backend against the wire protocol")
    p.add_argument("--backend-url", required=True)
    p.add_argument("--timeout", type=float, default=10.0)
    return parser


def _load_corpus_filtered(path: str, domain: str | None) -> Corpus:
    corpus = load_corpus(path)
    if domain is None:
        return corpus
    allowed = {"movie", "travel"} if domain == "hybrid" else {domain}
    return Corpus(
        dialogues=tuple(d for d in corpus.dialogues if d.domain in allowed),
        triads=tuple(t for t in corpus.triads if t.domain in allowed),
    )


def _cmd_estimate(args: argparse.Namespace) -> int:
    corpus = _load_corpus_filtered(args.corpus, args.domain)
    pieces = segment_pieces(corpus)
    matrix = estimate_transition_matrix(pieces)
    save_matrix(matrix, args.out)
    top = pattern_frequencies(pieces)[0]
    print(
        f"estimated transition matrix from {len(pieces)} pieces; "
        f"top pattern {top.pair[0].value}->{top.pair[1].value} "
        f"(ratio {top.ratio:.2f}, count {top.count})"
    )
    if matrix.fallback_rows:
        print("uniform fallback rows: " + ", ".join(t.value for t in matrix.fallback_rows))
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    corpus = _load_corpus_filtered(args.corpus, args.domain)
    intents = preceding_intent_ratios(corpus)
    pieces = segment_pieces(corpus)
    patterns = pattern_frequencies(pieces)
    bins = turn_bin_distribution(corpus)
    experience = compare_experience_groups(corpus)

    print("agent intents preceding reformulations")
    print(f"  {'intent':<16}{'ratio':>8}{'sigma':>10}")
    for intent, ratio in sorted(intents.ratios.items(), key=lambda kv: -kv[1]):
        print(f"  {intent.value:<16}{ratio:>8.2f}{intents.sigma[intent]:>10.4f}")
    print(f"  attributed {intents.attributed}, excluded {intents.excluded}")

    print("top reformulation patterns")
    print(f"  {'pattern':<24}{'ratio':>8}{'count':>8}")
    for row in patterns[:10]:
        name = f"{row.pair[0].value}->{row.pair[1].value}"
        print(f"  {name:<24}{row.ratio:>8.2f}{row.count:>8}")

    print("reformulation types by turn bin")
    for index, bin_ in enumerate(bins.bins):
        dist = ", ".join(f"{t.value}={p:.2f}" for t, p in sorted(bin_.distribution.items(), key=lambda kv: -kv[1]))
        print(f"  [{bin_.start},{bin_.end}) count={bin_.count} {dist}")

    print("experience-group comparison (t-test p-values)")
    for intent, per_type in experience.comparisons.items():
        cells = ", ".join(f"{t.value}={c.t.p_value:.3f}" for t, c in per_type.items())
        print(f"  {intent.value}: {cells}")
    if experience.insufficient:
        print("  insufficient data: " + ", ".join(i.value for i in experience.insufficient))

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(json.dumps({
                "kind": "intent_ratios",
                "ratios": {i.value: r for i, r in intents.ratios.items()},
                "sigma": {i.value: s for i, s in intents.sigma.items()},
                "attributed": intents.attributed,
                "excluded": intents.excluded,
            }, sort_keys=True) + "\n")
            handle.write(json.dumps({
                "kind": "patterns",
                "patterns": [
                    {"from": r.pair[0].value, "to": r.pair[1].value, "ratio": r.ratio, "count": r.count}
                    for r in patterns
                ],
            }, sort_keys=True) + "\n")
            handle.write(json.dumps({
                "kind": "turn_bins",
                "bin_width": bins.bin_width,
                "bins": [
                    {
                        "start": b.start,
                        "end": b.end,
                        "count": b.count,
                        "distribution": {t.value: p for t, p in b.distribution.items()},
                    }
                    for b in bins.bins
                ],
            }, sort_keys=True) + "\n")
            handle.write(json.dumps({
                "kind": "experience",
                "comparisons": {
                    intent.value: {
                        t.value: {
                            "levene_w": c.levene.statistic,
                            "levene_p": c.levene.p_value,
                            "t": c.t.statistic,
                            "t_p": c.t.p_value,
                            "pooled": c.pooled,
                        }
                        for t, c in per_type.items()
                    }
                    for intent, per_type in experience.comparisons.items()
                },
                "insufficient": [i.value for i in experience.insufficient],
            }, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_triads(args: argparse.Namespace) -> int:
    corpus = _load_corpus_filtered(args.corpus, args.domain)
    extraction = extract_triads(corpus)
    with open(args.out, "w", encoding="utf-8") as handle:
        for triad in extraction.triads:
            handle.write(json.dumps(triad_to_record(triad), ensure_ascii=False) + "\n")
    print(f"wrote {len(extraction)} triads ({extraction.skipped} skipped without antecedent)")
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    seeds = [
        line.strip()
        for line in Path(args.seed_file).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not seeds:
        raise DataError("seed file contains no utterances")
    matrix = load_matrix(args.matrix)
    if args.backend == "remote":
        if not args.backend_url:
            raise DataError("--backend-url is required with --backend remote")
        backend = RemoteClient(args.backend_url)
    else:
        backend = RuleBackend()
    filter_fn = None
    if args.filter == "remote":
        if not args.backend_url:
            raise DataError("--backend-url is required with --filter remote")
        client = RemoteClient(args.backend_url)
        filter_fn = lambda cand, orig, t: remote_acceptable(cand, client)

    tasks = []
    for run in range(args.runs):
        for index, seed_utterance in enumerate(seeds):
            cfg = OrchestratorConfig(
                length=args.length,
                filter_mode=args.filter,
                filter_relaxed=args.filter_relaxed,
                domain=args.domain,
                seed=args.seed + 10_007 * run + index,
            )
            tasks.append((seed_utterance, cfg))

    def _one(task):
        seed_utterance, cfg = task
        return generate_sequence(seed_utterance, matrix, cfg, backend, filter_fn)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            sequences = list(pool.map(_one, tasks))
    else:
        sequences = [_one(t) for t in tasks]
    save_sequences(sequences, args.out)
    print(f"wrote {len(sequences)} sequences ({args.runs} run(s) x {len(seeds)} seed(s))")
    return EXIT_OK


def _cmd_splice(args: argparse.Namespace) -> int:
    corpus = _load_corpus_filtered(args.corpus, args.domain)
    sequences = load_sequences(args.sequences)
    human = extract_human_sequences(corpus)
    by_id = {d.dialogue_id: d for d in corpus.dialogues}
    pairs = 0
    with open(args.out, "w", encoding="utf-8") as handle:
        for sequence in sequences:
            match = next(
                (
                    h
                    for h in human
                    if h.seed == sequence.seed and h.types == sequence.types
                ),
                None,
            )
            if match is None:
                continue
            dialogue = by_id[match.dialogue_id]
            spliced = splice_dialogue(dialogue, sequence)
            handle.write(
                json.dumps(
                    {
                        "kind": "splice_pair",
                        "dialogue_id": dialogue.dialogue_id,
                        "original": dialogue_to_record(dialogue),
                        "simulated": dialogue_to_record(spliced),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            pairs += 1
    if pairs == 0:
        raise DataError("no generated sequence matched a human sequence")
    print(f"wrote {pairs} side-by-side dialogue pairs")
    return EXIT_OK


def _evaluate(sequences, references, jobs: int):
    if jobs <= 1:
        return evaluate_run(sequences, references)
    # corpus-level parallelism: sequences for one seed form an independent
    # unit, so per-seed reports combine exactly into the sequential result
    groups: dict[str, list] = {}
    for sequence in sequences:
        groups.setdefault(sequence.seed, []).append(sequence)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        reports = list(pool.map(lambda g: evaluate_run(g, references), groups.values()))
    run_counts = {r.n_runs for r in reports}
    if len(run_counts) > 1:
        raise DataError("uneven run counts across seeds")
    n = len(reports)
    return MetricReport(
        rouge1=sum(r.rouge1 for r in reports) / n,
        rouge2=sum(r.rouge2 for r in reports) / n,
        rougeL=sum(r.rougeL for r in reports) / n,
        bleu=sum(r.bleu for r in reports) / n,
        n_pairs=sum(r.n_pairs for r in reports),
        n_runs=run_counts.pop(),
    )


def _cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = _load_corpus_filtered(args.corpus, args.domain)
    references = extract_human_sequences(corpus)
    sequences = load_sequences(args.sequences)
    report = _evaluate(sequences, references, args.jobs)
    record = report.to_record(scale_100=args.scale_100)
    print(f"{'rouge1':>10}{'rouge2':>10}{'rougeL':>10}{'bleu':>10}{'pairs':>8}{'runs':>6}")
    print(
        f"{record['rouge1']:>10.3f}{record['rouge2']:>10.3f}{record['rougeL']:>10.3f}"
        f"{record['bleu']:>10.3f}{report.n_pairs:>8}{report.n_runs:>6}"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(json.dumps({"kind": "metric_report", **record}, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_conformance(args: argparse.Namespace) -> int:
    client = RemoteClient(args.backend_url, timeout=args.timeout)
    failures = 0

    def check(name: str, fn) -> None:
        nonlocal failures
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue probing
            failures += 1
            print(f"[FAIL] {name}: {exc}")
        else:
            print(f"[PASS] {name}")

    def check_health() -> None:
        body = client.health()
        assert body.get("status") == "ok", f"unexpected health body {body!r}"

    def check_generate_schema() -> None:
        from .generators import GenerationRequest

        request = GenerationRequest(
            utterance="I am looking for a movie.",
            target_type=ReformulationType.REPHRASE,
            domain="movie",
        )
        candidates = client.generate(request)
        assert candidates and all(c.text for c in candidates), "no usable candidates"

    def check_determinism() -> None:
        from .generators import GenerationRequest

        request = GenerationRequest(
            utterance="I am looking for a movie.",
            target_type=ReformulationType.REPEAT,
            domain="movie",
        )
        first = [c.text for c in client.generate(request)]
        second = [c.text for c in client.generate(request)]
        assert first == second, f"non-deterministic answers: {first!r} vs {second!r}"

    def check_unknown_type() -> None:
        status, _ = client.post_raw(
            "/generate",
            {"utterance": "hello there", "type": "bogus", "domain": "movie", "num_candidates": 1},
        )
        assert status == 422, f"expected 422 for an unknown type, got {status}"

    def check_acceptability() -> None:
        accepted, score = client.acceptable("I am looking for a movie.")
        assert isinstance(accepted, bool) and isinstance(score, float)

    check("health endpoint", check_health)
    check("generate schema", check_generate_schema)
    check("generate determinism", check_determinism)
    check("unknown type rejected with 422", check_unknown_type)
    check("acceptability schema", check_acceptability)
    if failures:
        print(f"conformance: {failures} check(s) failed")
        return EXIT_BACKEND
    print("conformance: all checks passed")
    return EXIT_OK


_COMMANDS = {
    "estimate": _cmd_estimate,
    "analyze": _cmd_analyze,
    "triads": _cmd_triads,
    "generate": _cmd_generate,
    "splice": _cmd_splice,
    "evaluate": _cmd_evaluate,
    "conformance": _cmd_conformance,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BackendError as exc:
        print(f"error: backend: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ReformkitError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
