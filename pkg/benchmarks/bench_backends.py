"""Compare the compiled and pure-python kernel backends.

The backend is chosen at import time, so this script re-executes itself in a
worker subprocess per backend (LATSPELL_BACKEND=cython / python) and prints a
small table of per-workload timings plus the speedup. Workloads: a raw kernel
loop, a full forward pass, and a full training step (forward, backward, clip,
optimizer update).

Usage: python3 benchmarks/bench_backends.py [--sentences N] [--repeats N]
"""

import argparse
import os
import subprocess
import sys
import time


def worker(n_sentences: int, repeats: int) -> None:
    import numpy as np

    from latspell.core import optim
    from latspell.core.backend import BACKEND, kernels
    from latspell.core.value import backward, zero_grads
    from latspell.lexicon import (
        builtin_pinyin_path,
        builtin_words_path,
        load_pinyin_table,
        load_word_list,
    )
    from latspell.model import ModelConfig, Tagger
    from latspell.synth import make_synthetic

    print(f"backend={BACKEND}")

    # raw kernel loop at training-size dimensions
    rng = np.random.default_rng(0)
    W = rng.normal(size=(192, 128))
    b = rng.normal(size=192)
    u = rng.normal(size=64)
    v = rng.normal(size=64)
    g = rng.normal(size=192)
    gW, gb = np.zeros_like(W), np.zeros_like(b)
    gu, gv = np.zeros_like(u), np.zeros_like(v)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(2000):
            z = kernels.affine2(W, b, u, v)
            y = kernels.sigmoid(z)
            kernels.sigmoid_bwd(y, g, z)
            kernels.affine2_bwd(W, u, v, g, gW, gb, gu, gv)
        best = min(best, time.perf_counter() - t0)
    print(f"kernel_loop_ms={best * 1000.0:.2f}")

    table = load_pinyin_table(builtin_pinyin_path())
    lexicon = load_word_list(builtin_words_path())
    sentences = make_synthetic(table, lexicon, n_sentences=n_sentences, seed=0,
                               error_rate=0.3)
    chars = sorted({c for s in sentences for c in s.chars})
    cfg = ModelConfig(variant="fl-lstm-crf", char_emb=32, pinyin_emb=32,
                      word_emb=32, hidden=64, dropout=0.0)
    model = Tagger.build(cfg, chars, table, lexicon, seed=0)
    spans = [model.spans_for(s.chars) for s in sentences]

    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for s, sp in zip(sentences, spans):
            model.decode(s.chars, spans=sp)
        best = min(best, time.perf_counter() - t0)
    print(f"decode_ms_per_sentence={best / n_sentences * 1000.0:.3f}")

    adam = optim.AdamState()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for s, sp in zip(sentences, spans):
            zero_grads(model.params.values())
            loss = model.sentence_nll(s.chars, s.labels, spans=sp)
            backward(loss)
            optim.clip_global_norm(model.params, 5.0)
            optim.adam_step(model.params, adam, lr=0.0)
        best = min(best, time.perf_counter() - t0)
    print(f"train_step_ms_per_sentence={best / n_sentences * 1000.0:.3f}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=80)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.sentences, args.repeats)
        return 0

    results = {}
    for backend in ("cython", "python"):
        env = dict(os.environ, LATSPELL_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker",
             "--sentences", str(args.sentences), "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            print(f"{backend} worker failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        results[backend] = dict(
            line.split("=", 1) for line in proc.stdout.splitlines() if "=" in line
        )

    metrics = [k for k in results["cython"] if k != "backend"]
    width = max(len(m) for m in metrics)
    print(f"{'workload':<{width}}  {'cython':>10}  {'python':>10}  speedup")
    for m in metrics:
        c = float(results["cython"][m])
        p = float(results["python"][m])
        print(f"{m:<{width}}  {c:>10.3f}  {p:>10.3f}  {p / c:>6.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
