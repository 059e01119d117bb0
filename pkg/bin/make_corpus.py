#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* Writes a directory of synthetic music clips for `tqcodec fit` and smoke tests.
*
*   python bin/make_corpus.py corpus/ --clips 8 --duration 4
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

from tqcodec.audio import save_wav
from tqcodec.fixtures import synthetic_music

DEFAULT_CLIPS = 8
DEFAULT_DURATION = 4.0


def write_clip(output: Path, seed: int, duration: float, channels: int, bit_depth: str) -> Path:
    path = output / f"clip{seed:03d}.wav"
    save_wav(synthetic_music(duration, seed=seed, channels=channels), path, bit_depth)
    return path


def main(argv: Optional[List[str]] = None) -> None:
    parser = argparse.ArgumentParser(description="Write synthetic music clips for codebook fitting")
    parser.add_argument("output", type=Path)
    parser.add_argument("--clips", type=int, default=DEFAULT_CLIPS)
    parser.add_argument("--duration", type=float, default=DEFAULT_DURATION)
    parser.add_argument("--channels", type=int, choices=(1, 2), default=1)
    parser.add_argument("--first-seed", type=int, default=0)
    parser.add_argument("--bit-depth", choices=("16", "24", "f32"), default="16")
    args = parser.parse_args(argv)

    args.output.mkdir(parents=True, exist_ok=True)
    seeds = range(args.first_seed, args.first_seed + args.clips)

    print(f"Writing {args.clips} clips of {args.duration:g}s to {args.output}")

    with ThreadPoolExecutor(max_workers=4) as executor:
        jobs = ((args.output, seed, args.duration, args.channels, args.bit_depth) for seed in seeds)
        for path in executor.map(lambda job: write_clip(*job), jobs):
            print(f"Wrote {path}")


if __name__ == "__main__":
    main()
