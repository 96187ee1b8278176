"""Command line interface.

Pipeline subcommands (align, seedlex, map, refine, induce, generate, mix,
eval, run-all) read a JSON config given with ``--config``; every config key
can also be passed as a flag, which takes precedence. The stats, oov and lm
subcommands work directly on text files.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import typing

from dali import corpus, lm
from dali.errors import DaliError
from dali.pipeline import STAGES, Pipeline, PipelineConfig

IO_EXIT = 10


def _config_flags(parser):
    hints = typing.get_type_hints(PipelineConfig)
    for f in dataclasses.fields(PipelineConfig):
        hint = hints[f.name]
        args = typing.get_args(hint)
        base = next((a for a in args if a is not type(None)), hint)
        parser.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            type=base if base in (int, float) else str,
            default=None,
            help=f"config key {f.name} (default: {f.default})",
        )


def _load_config(args) -> PipelineConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(PipelineConfig)
        if getattr(args, f.name) is not None
    }
    if args.config:
        return PipelineConfig.from_file(args.config, **overrides)
    return PipelineConfig.from_dict(overrides)


def cmd_stats(args):
    for path in args.files:
        c = corpus.load_monolingual(path)
        print(f"file\t{path}")
        sys.stdout.write(corpus.corpus_stats(c).to_tsv())


def cmd_oov(args):
    out_vocab = corpus.build_vocab(corpus.load_monolingual(args.out_domain), args.min_count)
    print(f"out_vocab_size\t{len(out_vocab)}")
    for path in args.in_domain:
        in_vocab = corpus.build_vocab(corpus.load_monolingual(path), args.min_count)
        new, ratio = corpus.oov_stats(out_vocab, in_vocab)
        print(f"{path}\t{new}\t{ratio:.2f}")


def cmd_lm(args):
    corpora = {p: corpus.load_monolingual(p) for p in args.files}
    names = list(corpora)
    table = lm.perplexity_matrix(corpora, args.order, args.discount)
    print("train\\test\t" + "\t".join(names))
    for a in names:
        print(a + "\t" + "\t".join(f"{table[a, b]:.4f}" for b in names))


def build_parser():
    p = argparse.ArgumentParser(prog="dali", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="words / sentences / words per sentence")
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("oov", help="in-domain types unseen in an out-of-domain corpus")
    s.add_argument("--out-domain", required=True)
    s.add_argument("--in-domain", required=True, nargs="+")
    s.add_argument("--min-count", type=int, default=1)
    s.set_defaults(func=cmd_oov)

    s = sub.add_parser("lm", help="cross-domain n-gram perplexity matrix")
    s.add_argument("files", nargs="+", help="one target-side corpus per domain")
    s.add_argument("--order", type=int, default=5)
    s.add_argument("--discount", type=float, default=lm.DEFAULT_DISCOUNT)
    s.set_defaults(func=cmd_lm)

    for stage in STAGES + ("run-all",):
        s = sub.add_parser(stage, help=f"run pipeline stage {stage}")
        s.add_argument("--config", help="JSON file of config keys")
        _config_flags(s)
        s.set_defaults(func=None, stage=stage)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.func is not None:
            args.func(args)
        else:
            pipe = Pipeline(_load_config(args))
            if args.stage == "run-all":
                pipe.run_all()
            else:
                pipe.run_stage(args.stage)
    except DaliError as exc:
        print(f"dali: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"dali: I/O error: {exc}", file=sys.stderr)
        return IO_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
