"""Stage runner for the end-to-end corpus synthesis pipeline.

Every stage reads its inputs from the configuration or from artifacts of
earlier stages inside the output directory, writes its own artifacts
atomically, and appends one line to ``manifest.tsv``.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import zlib
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from dali import align, corpus, embed, evaluate, induce, mapping, pseudo, seedlex
from dali._io import atomic_write, sha256_file, write_lines
from dali.errors import DependencyError, LockError, ParameterError

logger = logging.getLogger(__name__)

MODES = ("supervised", "unsupervised")
CANDIDATE_MODES = ("all", "in_domain")

STAGES = ("align", "seedlex", "map", "refine", "induce", "generate", "mix", "eval")

# Artifact paths, relative to the output directory.
FORWARD_TABLE = "align/forward.tsv"
BACKWARD_TABLE = "align/backward.tsv"
SEED_LEXICON = "seed_lexicon.tsv"
MAPPING = "mapping.txt"
REFINED_MAPPING = "mapping_refined.txt"
INDUCED_LEXICON = "induced_lexicon.tsv"
PSEUDO_SRC = "pseudo/pseudo.src"
PSEUDO_TGT = "pseudo/pseudo.tgt"
PSEUDO_ORIGINS = "pseudo/origins.tsv"
TRAIN_SRC = "train/train.src"
TRAIN_TGT = "train/train.tgt"
REFERENCE_LEXICON = "eval/reference_lexicon.tsv"
REPORT = "eval/report.tsv"
SUMMARY = "eval/summary.txt"
BUCKETS = "eval/buckets.tsv"
MANIFEST = "manifest.tsv"
RESOLVED_CONFIG = "config.json"
LOCK = ".dali.lock"

PATH_KEYS = (
    "out_src", "out_tgt", "in_tgt", "in_src", "src_emb", "tgt_emb",
    "ref_src", "ref_tgt", "test_src", "test_ref", "hypothesis", "compare_lexicon",
)


@dataclass
class PipelineConfig:
    output_dir: str = "dali_out"
    # inputs
    out_src: Optional[str] = None
    out_tgt: Optional[str] = None
    in_tgt: Optional[str] = None
    in_src: Optional[str] = None
    src_emb: Optional[str] = None
    tgt_emb: Optional[str] = None
    ref_src: Optional[str] = None
    ref_tgt: Optional[str] = None
    test_src: Optional[str] = None
    test_ref: Optional[str] = None
    hypothesis: Optional[str] = None
    compare_lexicon: Optional[str] = None
    # knobs
    mode: str = "supervised"
    candidates: str = "all"
    k: int = 10
    em_iterations: int = 5
    prob_floor: float = 1e-4
    seed_size: Optional[int] = None
    refine_rounds: int = 5
    vocab_cap: int = 20000
    mix_out_size: Optional[int] = None
    folds: int = 5
    buckets: int = 10
    rng_seed: int = 0

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ParameterError(f"{path}: config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def validate(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        if self.candidates not in CANDIDATE_MODES:
            raise ParameterError(f"candidates must be one of {CANDIDATE_MODES}")
        for key in PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ParameterError(f"{key}: no such file {value}")
        for key in ("k", "em_iterations", "refine_rounds", "vocab_cap", "buckets"):
            if getattr(self, key) < 1:
                raise ParameterError(f"{key} must be >= 1")
        if self.folds < 2:
            raise ParameterError("folds must be >= 2")
        if self.rng_seed is None:
            self.rng_seed = 0
        return self

    def resolved(self) -> dict:
        data = dataclasses.asdict(self)
        data.pop("output_dir")
        return data

    def require(self, *keys, stage):
        missing = [k for k in keys if getattr(self, k) is None]
        if missing:
            raise ParameterError(f"stage {stage} needs config keys: {', '.join(missing)}")


def stream_seed(rng_seed: int, name: str) -> int:
    """Independent, reproducible integer seed for a named random stream."""
    seq = np.random.SeedSequence(rng_seed, spawn_key=(zlib.crc32(name.encode()),))
    return int(seq.generate_state(1)[0])


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config.validate()
        self.out = Path(config.output_dir)

    def path(self, rel) -> Path:
        return self.out / rel

    def _display(self, p) -> str:
        # Paths inside the output directory are recorded relative to it.
        p = Path(p)
        try:
            return p.resolve().relative_to(self.out.resolve()).as_posix()
        except ValueError:
            return str(p)

    def need(self, rel, stage):
        p = self.path(rel)
        if not p.exists():
            raise DependencyError(f"missing {rel}; run stage '{stage}' first")
        return p

    @contextmanager
    def locked(self):
        self.out.mkdir(parents=True, exist_ok=True)
        lock = self.path(LOCK)
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(f"{lock} exists; another run is using this directory") from None
        os.close(fd)
        try:
            atomic_write(
                self.path(RESOLVED_CONFIG),
                json.dumps(self.config.resolved(), indent=2, sort_keys=True) + "\n",
            )
            yield
        finally:
            os.unlink(lock)

    def _record(self, stage, params, inputs, outputs):
        def digests(paths):
            return {self._display(p): sha256_file(p) for p in paths}

        line = "\t".join(
            [
                stage,
                json.dumps(params, sort_keys=True),
                json.dumps(digests(inputs), sort_keys=True),
                json.dumps(digests(outputs), sort_keys=True),
            ]
        )
        with open(self.path(MANIFEST), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    # -- loaders -----------------------------------------------------------

    def _out_parallel(self, stage):
        self.config.require("out_src", "out_tgt", stage=stage)
        return corpus.load_parallel(self.config.out_src, self.config.out_tgt)

    def _embeddings(self, stage):
        self.config.require("src_emb", "tgt_emb", stage=stage)
        src = embed.normalize(embed.load_embeddings(self.config.src_emb))
        tgt = embed.normalize(embed.load_embeddings(self.config.tgt_emb))
        return src, tgt

    def _side_vocab(self, paths, side):
        vocab = None
        for p in paths:
            if p is None:
                continue
            v = corpus.build_vocab(corpus.load_monolingual(p, side))
            vocab = v if vocab is None else vocab.merged(v)
        return vocab

    # -- stages --------------------------------------------------------------

    def run_stage(self, name):
        if name not in STAGES:
            raise ParameterError(f"unknown stage {name!r}; choose from {STAGES}")
        with self.locked():
            self._run(name)

    def run_all(self):
        with self.locked():
            for name in self.plan():
                self._run(name)

    def plan(self):
        stages = ["align", "seedlex"] if self.config.mode == "supervised" else ["seedlex"]
        stages.append("map")
        if self.config.mode == "unsupervised":
            stages.append("refine")
        stages += ["induce", "generate", "mix", "eval"]
        return stages

    def _run(self, name):
        logger.info("stage %s", name)
        getattr(self, f"stage_{name}")()

    def stage_align(self):
        cfg = self.config
        parallel = self._out_parallel("align")
        fw = align.train_model1(parallel, cfg.em_iterations, cfg.prob_floor, "forward")
        bw = align.train_model1(parallel, cfg.em_iterations, cfg.prob_floor, "backward")
        outs = [self.path(FORWARD_TABLE), self.path(BACKWARD_TABLE)]
        align.export_table(fw, outs[0])
        align.export_table(bw, outs[1])
        self._record(
            "align",
            {"em_iterations": cfg.em_iterations, "prob_floor": cfg.prob_floor},
            [cfg.out_src, cfg.out_tgt],
            outs,
        )

    def stage_seedlex(self):
        cfg = self.config
        if cfg.mode == "supervised":
            fw_path = self.need(FORWARD_TABLE, "align")
            bw_path = self.need(BACKWARD_TABLE, "align")
            parallel = self._out_parallel("seedlex")
            lex = seedlex.extract_seed_lexicon(
                parallel,
                align.import_table(fw_path, "forward"),
                align.import_table(bw_path, "backward"),
            )
            inputs = [cfg.out_src, cfg.out_tgt, fw_path, bw_path]
        else:
            src_vocab = self._side_vocab([cfg.out_src, cfg.in_src], "source")
            tgt_vocab = self._side_vocab([cfg.out_tgt, cfg.in_tgt], "target")
            if src_vocab is None or tgt_vocab is None:
                raise ParameterError(
                    "unsupervised seeding needs a source corpus (out_src or in_src) "
                    "and a target corpus (out_tgt or in_tgt)"
                )
            lex = mapping.identical_string_seed(src_vocab, tgt_vocab, cfg.seed_size)
            inputs = [p for p in (cfg.out_src, cfg.in_src, cfg.out_tgt, cfg.in_tgt) if p]
        out = self.path(SEED_LEXICON)
        seedlex.save_lexicon(lex, out)
        self._record("seedlex", {"mode": cfg.mode, "seed_size": cfg.seed_size}, inputs, [out])

    def stage_map(self):
        cfg = self.config
        seed_path = self.need(SEED_LEXICON, "seedlex")
        lex = seedlex.load_lexicon(seed_path, seedlex.Provenance.SEED)
        if cfg.seed_size is not None:
            lex = seedlex.Lexicon(lex.pairs[: cfg.seed_size], lex.provenance)
        src, tgt = self._embeddings("map")
        w = mapping.fit_from_lexicon(src, tgt, lex)
        out = self.path(MAPPING)
        mapping.save_mapping(w, out)
        self._record(
            "map",
            {"seed_size": cfg.seed_size, "trained_on": w.trained_on},
            [seed_path, cfg.src_emb, cfg.tgt_emb],
            [out],
        )

    def stage_refine(self):
        cfg = self.config
        w_path = self.need(MAPPING, "map")
        src, tgt = self._embeddings("refine")
        w = mapping.refine(
            mapping.load_mapping(w_path), src, tgt, cfg.refine_rounds, cfg.k, cfg.vocab_cap
        )
        out = self.path(REFINED_MAPPING)
        mapping.save_mapping(w, out)
        self._record(
            "refine",
            {"rounds": cfg.refine_rounds, "k": cfg.k, "vocab_cap": cfg.vocab_cap},
            [w_path, cfg.src_emb, cfg.tgt_emb],
            [out],
        )

    def stage_induce(self):
        cfg = self.config
        if cfg.mode == "unsupervised":
            w_path = self.need(REFINED_MAPPING, "refine")
        else:
            w_path = self.need(MAPPING, "map")
        src, tgt = self._embeddings("induce")
        candidates = None
        inputs = [w_path, cfg.src_emb, cfg.tgt_emb]
        if cfg.candidates == "in_domain":
            cfg.require("in_src", stage="induce")
            candidates = set(corpus.build_vocab(corpus.load_monolingual(cfg.in_src, "source")))
            inputs.append(cfg.in_src)
        lex = induce.induce_lexicon(mapping.load_mapping(w_path), src, tgt, cfg.k, candidates)
        out = self.path(INDUCED_LEXICON)
        seedlex.save_lexicon(lex, out, header=True)
        self._record("induce", {"k": cfg.k, "candidates": cfg.candidates}, inputs, [out])

    def stage_generate(self):
        cfg = self.config
        lex_path = self.need(INDUCED_LEXICON, "induce")
        cfg.require("in_tgt", stage="generate")
        tgt = corpus.load_monolingual(cfg.in_tgt, "target")
        pc = pseudo.word_backtranslate(tgt, seedlex.load_lexicon(lex_path))
        outs = [self.path(PSEUDO_SRC), self.path(PSEUDO_TGT), self.path(PSEUDO_ORIGINS)]
        pc.write(*outs)
        self._record("generate", {}, [lex_path, cfg.in_tgt], outs)

    def _load_pseudo(self, stage):
        src_path = self.need(PSEUDO_SRC, "generate")
        tgt_path = self.need(PSEUDO_TGT, "generate")
        par = corpus.load_parallel(src_path, tgt_path)
        origins = _read_origins(self.need(PSEUDO_ORIGINS, "generate"), par)
        pc = pseudo.PseudoParallelCorpus(par.pairs, origins, pseudo.Method.DALI)
        return pc, [src_path, tgt_path]

    def stage_mix(self):
        cfg = self.config
        pc, inputs = self._load_pseudo("mix")
        seed = stream_seed(cfg.rng_seed, "mix")
        mixed = pseudo.mix(self._out_parallel("mix"), pc, seed, cfg.mix_out_size)
        outs = [self.path(TRAIN_SRC), self.path(TRAIN_TGT)]
        write_lines(outs[0], (" ".join(s) for s, _ in mixed))
        write_lines(outs[1], (" ".join(t) for _, t in mixed))
        self._record(
            "mix",
            {"rng_seed": cfg.rng_seed, "stream_seed": seed, "mix_out_size": cfg.mix_out_size},
            [cfg.out_src, cfg.out_tgt] + inputs,
            outs,
        )

    def stage_eval(self):
        cfg = self.config
        lex_path = self.need(INDUCED_LEXICON, "induce")
        induced = seedlex.load_lexicon(lex_path)
        pc, inputs = self._load_pseudo("eval")
        inputs = [lex_path] + inputs
        outs = []
        rows = [("induced_lexicon_size", len(induced)), ("pseudo_sentences", len(pc))]
        tgt = corpus.Corpus(tuple(pc.targets))
        rows.append(("coverage", _fmt(pseudo.coverage(tgt, induced))))
        if self.path(SEED_LEXICON).exists():
            rows.append(("seed_lexicon_size", len(seedlex.load_lexicon(self.path(SEED_LEXICON)))))

        coverage_corpus = tgt
        if cfg.test_ref is not None:
            coverage_corpus = corpus.load_monolingual(cfg.test_ref, "target")
            inputs.append(cfg.test_ref)
        folds_seed = stream_seed(cfg.rng_seed, "folds")
        if len(induced) >= cfg.folds:
            portions = evaluate.lexicon_folds(induced, cfg.folds, folds_seed)
            for i, portion in enumerate(portions, start=1):
                share = round(100 * i / cfg.folds)
                rows.append((f"fold_{share}pct_pairs", len(portion)))
                rows.append(
                    (f"fold_{share}pct_coverage", _fmt(pseudo.coverage(coverage_corpus, portion)))
                )

        reference = None
        if cfg.ref_src is not None and cfg.ref_tgt is not None:
            ref_par = corpus.load_parallel(cfg.ref_src, cfg.ref_tgt)
            reference = seedlex.extract_seed_lexicon(
                ref_par,
                align.train_model1(ref_par, cfg.em_iterations, cfg.prob_floor, "forward"),
                align.train_model1(ref_par, cfg.em_iterations, cfg.prob_floor, "backward"),
            )
            reference = seedlex.Lexicon(reference.pairs, seedlex.Provenance.REFERENCE)
            out = self.path(REFERENCE_LEXICON)
            seedlex.save_lexicon(reference, out, header=True)
            outs.append(out)
            inputs += [cfg.ref_src, cfg.ref_tgt]
            rows.append(("reference_lexicon_size", len(reference)))

        if cfg.compare_lexicon is not None:
            other = seedlex.load_lexicon(cfg.compare_lexicon)
            only_a, only_b, both = evaluate.lexicon_overlap(
                induced, other, reference or seedlex.Lexicon(())
            )
            rows += [
                ("overlap_only_induced_pct", _fmt(only_a, 1)),
                ("overlap_only_compare_pct", _fmt(only_b, 1)),
                ("overlap_intersection_pct", _fmt(both, 1)),
            ]
            inputs.append(cfg.compare_lexicon)

        if reference is not None and cfg.test_src and cfg.test_ref and cfg.hypothesis:
            out_vocab = corpus.build_vocab(self._out_parallel("eval").source)
            test_src = corpus.load_monolingual(cfg.test_src, "source")
            test_ref = corpus.load_monolingual(cfg.test_ref, "target")
            hyp = corpus.load_monolingual(cfg.hypothesis, "target")
            report = evaluate.hit_percentage(
                test_src, test_ref, hyp, reference, evaluate.unseen_words(out_vocab, test_src)
            )
            pct = report.percentage
            rows += [
                ("hit_events", report.c_total),
                ("hit_count", report.c_hyp),
                ("hit_percentage", "n/a" if pct is None else _fmt(100 * pct, 2)),
            ]
            buckets = evaluate.bucket_accuracy(report, pc, cfg.buckets)
            out = self.path(BUCKETS)
            atomic_write(out, buckets.to_tsv())
            outs.append(out)
            inputs += [cfg.out_src, cfg.test_src, cfg.hypothesis]

        report_path, summary_path = self.path(REPORT), self.path(SUMMARY)
        atomic_write(report_path, "".join(f"{k}\t{v}\n" for k, v in rows))
        width = max(len(k) for k, _ in rows)
        summary = ["DALI evaluation summary", "=" * 23]
        summary += [f"{k.ljust(width)}  {v}" for k, v in rows]
        atomic_write(summary_path, "\n".join(summary) + "\n")
        outs += [report_path, summary_path]
        self._record(
            "eval",
            {"folds": cfg.folds, "buckets": cfg.buckets, "rng_seed": cfg.rng_seed},
            inputs,
            outs,
        )


def _fmt(x, places=6):
    return f"{x:.{places}f}"


def _read_origins(path, parallel):
    tags = [[None] * len(t) for _, t in parallel]
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            ln, pos, origin = line.rstrip("\n").split("\t")
            tags[int(ln) - 1][int(pos) - 1] = pseudo.Origin(origin)
    return tuple(tuple(t) for t in tags)


def run_stage(name, config: PipelineConfig):
    Pipeline(config).run_stage(name)


def run_all(config: PipelineConfig):
    Pipeline(config).run_all()
