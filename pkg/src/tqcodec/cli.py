#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
* SPDX-License-Identifier: MIT-0
*
* tqcodec command line: encode, decode, metrics, analyze, fit.
"""

import argparse
from fractions import Fraction
import json
import math
from pathlib import Path
import sys
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .analyzer import (
    BudgetReport,
    budget_table,
    compare_budget,
    count_macs,
    preset_rows,
    preset_table,
    receptive_field,
    subband_budget,
)
from .audio import load_wav, save_wav
from .bitstream import BitstreamHeader, bitrate_for, frame_rate_for, measured_bitrate
from .codec import Codec, fit_codebooks
from .config import PRESETS, CodecConfig, load_config, preset
from .constants import MODES, WAV_SUBTYPES
from .exceptions import (
    BitstreamParseError,
    ConfigError,
    FittingError,
    TQCodecError,
    WavParseError,
    WeightParseError,
)
from .log import logger, set_quiet
from .losses import multiscale_mel_loss, waveform_loss
from .metrics import TABLE_HEADER, evaluate
from .network.builders import (
    DAC_STRIDES,
    build_dac_decoder,
    build_dac_encoder,
    build_decoder,
    build_encoder,
)
from .network.graph import NetworkGraph
from .network.weights import WeightStore, load_weights
from .quantizer.residual import ResidualQuantizer, quantizer_from_store, save_quantizer

__all__ = ["main", "build_parser", "EXIT_CODES"]

EXIT_CODES: Dict[str, int] = {
    "ok": 0,
    "other": 1,
    "usage": 2,
    "parse": 3,
    "contract": 4,
    "io": 5,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tqcodec", description="Subband neural music codec: coding, metrics and budgets"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="seed for weights and fitting")
    parser.add_argument("--config", type=Path, default=None, help="TOML configuration file")
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    parser.add_argument("--json-output", type=Path, default=None, help="write results as JSON")

    commands = parser.add_subparsers(dest="command", required=True)

    encode = commands.add_parser("encode", help="WAV to TQC1 stream")
    encode.add_argument("input", type=Path)
    encode.add_argument("output", type=Path)
    encode.add_argument("--mode", choices=MODES, default=None)
    encode.add_argument("--nq", type=int, default=None, help="quantizer stages to transmit")
    encode.add_argument("--weights", type=Path, default=None, help="TQCW network weights")
    encode.add_argument("--codebooks", type=Path, default=None, help="TQCW codebooks from fit")

    decode = commands.add_parser("decode", help="TQC1 stream to WAV")
    decode.add_argument("input", type=Path)
    decode.add_argument("output", type=Path)
    decode.add_argument("--weights", type=Path, default=None)
    decode.add_argument("--codebooks", type=Path, default=None)
    decode.add_argument("--streaming-chunk", type=int, default=None, metavar="FRAMES")
    decode.add_argument("--bit-depth", choices=sorted(WAV_SUBTYPES), default="16")

    metrics = commands.add_parser("metrics", help="compare a decoded file against a reference")
    metrics.add_argument("reference", type=Path)
    metrics.add_argument("degraded", type=Path)
    metrics.add_argument("--format", choices=("text", "csv"), default="text")

    analyze = commands.add_parser("analyze", help="MACs and receptive fields")
    analyze.add_argument("--presets", action="store_true", help="compare published presets")
    analyze.add_argument("--dac", action="store_true", help="include the DAC-style baseline")
    analyze.add_argument("--dac-decoder-dim", type=int, default=1536)
    analyze.add_argument("--layers", action="store_true", help="print per-layer tables")

    fit = commands.add_parser("fit", help="fit residual codebooks on a WAV corpus")
    fit.add_argument("corpus", type=Path, help="directory of WAV files")
    fit.add_argument("output", type=Path)
    fit.add_argument("--mode", choices=MODES, default=None)
    fit.add_argument("--nq", type=int, default=None)
    fit.add_argument("--codebook-size", type=int, default=None)
    fit.add_argument("--iters", type=int, default=None)
    fit.add_argument("--weights", type=Path, default=None)
    kind = fit.add_mutually_exclusive_group()
    kind.add_argument("--simvq", action="store_true", help="residual SimVQ stages")
    kind.add_argument("--dac-style", action="store_true", help="factorized normalized stages")
    return parser


def _resolve_config(args: argparse.Namespace, **overrides: Any) -> CodecConfig:
    base = preset(args.preset) if args.preset else None
    overrides["seed"] = args.seed
    cfg = load_config(args.config, overrides, base=base)
    logger.info("Resolved configuration", command=args.command, **cfg.to_dict())
    return cfg


def _load_store(*paths: Optional[Path]) -> WeightStore:
    store = WeightStore()
    for path in paths:
        if path is not None:
            store.update(load_weights(path))
    return store


def _quantizer(store: WeightStore) -> Optional[ResidualQuantizer]:
    if not any(name.startswith(("rvq.", "simvq.")) for name in store):
        return None
    return quantizer_from_store(store)


def _emit(args: argparse.Namespace, text: str, payload: Dict[str, Any]) -> None:
    print(text)
    if args.json_output is not None:
        args.json_output.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_encode(args: argparse.Namespace) -> int:
    store = _load_store(args.weights, args.codebooks)
    rq = _quantizer(store)
    cfg = _resolve_config(
        args,
        mode=args.mode,
        num_quantizers=args.nq,
        codebook_size=rq.codebook_size if rq else None,
    )
    codec = Codec(cfg, rq, store)

    buf = load_wav(args.input)
    data = codec.encode(buf)
    args.output.write_bytes(data)

    header = BitstreamHeader.from_bytes(data)
    measured = measured_bitrate(data)
    _emit(
        args,
        f"bitrate {measured:.1f} bps per channel (nominal {bitrate_for(cfg)}), "
        f"{header.frame_count} frames x {header.channels} channel(s), {len(data)} bytes",
        {
            "bitrate": measured,
            "nominal_bitrate": bitrate_for(cfg),
            "frame_rate": float(frame_rate_for(cfg)),
            "frame_count": header.frame_count,
            "channels": header.channels,
            "bytes": len(data),
        },
    )
    return EXIT_CODES["ok"]


def cmd_decode(args: argparse.Namespace) -> int:
    data = args.input.read_bytes()
    header = BitstreamHeader.from_bytes(data)
    cfg = _resolve_config(
        args,
        mode=header.mode,
        num_quantizers=header.num_quantizers,
        codebook_size=1 << header.codebook_bits,
        sample_rate=header.sample_rate,
    )
    store = _load_store(args.weights, args.codebooks)
    codec = Codec(cfg, _quantizer(store), store)

    buf = codec.decode(data, chunk_frames=args.streaming_chunk)
    save_wav(buf, args.output, args.bit_depth)
    _emit(
        args,
        f"decoded {buf.num_samples} samples x {buf.num_channels} channel(s) to {args.output}",
        {"samples": buf.num_samples, "channels": buf.num_channels, "sample_rate": buf.sample_rate},
    )
    return EXIT_CODES["ok"]


def cmd_metrics(args: argparse.Namespace) -> int:
    reference = load_wav(args.reference)
    degraded = load_wav(args.degraded)
    report = evaluate(degraded, reference)
    mel = multiscale_mel_loss(degraded, reference)
    wave = waveform_loss(degraded, reference)

    payload = dict(report.to_dict(), mel_loss=mel, waveform_loss=wave)
    if args.format == "csv":
        text = f"{TABLE_HEADER},mel_loss,waveform_loss\n{report.to_row()},{mel:.6f},{wave:.6f}"
    else:
        text = f"{report.to_text()}\nmel_loss: {mel:.6f}\nwaveform_loss: {wave:.6f}"
    _emit(args, text, payload)
    return EXIT_CODES["ok"]


def _analysis_reports(args: argparse.Namespace, cfg: CodecConfig) -> List[BudgetReport]:
    if cfg.mode == "seanet":
        reports = [
            count_macs(build_encoder(cfg), cfg.sample_rate),
            count_macs(build_decoder(cfg), cfg.frame_rate),
        ]
    elif cfg.mode == "subband_seanet":
        budget = subband_budget(cfg)
        reports = list(budget.core + budget.side)
    else:
        # frame stacking has no network
        reports = [count_macs(NetworkGraph("pqmf_direct", 1, ()), cfg.sample_rate)]
    if args.dac:
        dac_rate = Fraction(cfg.sample_rate, math.prod(DAC_STRIDES))
        reports.append(count_macs(build_dac_encoder(), cfg.sample_rate))
        reports.append(count_macs(build_dac_decoder(dim=args.dac_decoder_dim), dac_rate))
    return reports


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.presets:
        _emit(args, preset_table(), {"presets": preset_rows()})
        return EXIT_CODES["ok"]

    cfg = _resolve_config(args)
    reports = _analysis_reports(args, cfg)

    sections = []
    if args.layers:
        sections.extend(report.to_table() for report in reports)
    verdicts = compare_budget(reports)
    sections.append(budget_table(verdicts))

    payload: Dict[str, Any] = {
        "graphs": [report.to_dict() for report in reports],
        "verdicts": [
            {"name": v.name, "gmacs": v.gmacs, "ceiling": v.ceiling, "status": v.status}
            for v in verdicts
        ],
    }
    if cfg.mode == "seanet":
        end_to_end = build_encoder(cfg).then(build_decoder(cfg), name="codec")
        payload["codec_receptive_field"] = receptive_field(end_to_end)
        sections.append(f"end-to-end receptive field {payload['codec_receptive_field']} samples")
    if cfg.mode == "subband_seanet":
        ratio = subband_budget(cfg).side_ratio
        payload["side_to_core_ratio"] = ratio
        sections.append(f"side networks cost {100 * ratio:.2f}% of the core network")
    _emit(args, "\n\n".join(sections), payload)
    return EXIT_CODES["ok"]


def cmd_fit(args: argparse.Namespace) -> int:
    quantizer = "simvq" if args.simvq else "dac" if args.dac_style else None
    cfg = _resolve_config(
        args,
        mode=args.mode,
        num_quantizers=args.nq,
        codebook_size=args.codebook_size,
        quantizer=quantizer,
    )
    files = sorted(args.corpus.glob("*.wav"))
    if not files:
        raise FittingError(f"no .wav files in {args.corpus}")
    buffers = [load_wav(path) for path in files]

    weights = _load_store(args.weights) if args.weights else None
    codec = fit_codebooks(cfg, buffers, weights, iters=args.iters)
    save_quantizer(codec.quantizer, args.output, extra=codec.weights)

    seconds = sum(buf.duration for buf in buffers)
    _emit(
        args,
        f"fitted {cfg.num_quantizers} x {cfg.codebook_size} {cfg.quantizer} codebooks on "
        f"{len(files)} file(s), {seconds:.1f} s; {bitrate_for(cfg)} bps per channel",
        {
            "files": [str(path) for path in files],
            "seconds": seconds,
            "kind": cfg.quantizer,
            "num_quantizers": cfg.num_quantizers,
            "codebook_size": cfg.codebook_size,
            "bitrate": bitrate_for(cfg),
        },
    )
    return EXIT_CODES["ok"]


COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "metrics": cmd_metrics,
    "analyze": cmd_analyze,
    "fit": cmd_fit,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CODES["usage"]
    if isinstance(error, (BitstreamParseError, WavParseError, WeightParseError)):
        return EXIT_CODES["parse"]
    if isinstance(error, TQCodecError):
        return EXIT_CODES["contract"]
    if isinstance(error, OSError):
        return EXIT_CODES["io"]
    return EXIT_CODES["other"]


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (TQCodecError, OSError) as error:
        logger.error("Command failed", command=args.command, error=str(error))
        print(f"error: {error}", file=sys.stderr)
        return exit_code_for(error)
    except Exception:
        logger.exception("Unexpected failure", command=args.command)
        return EXIT_CODES["other"]


if __name__ == "__main__":
    sys.exit(main())
