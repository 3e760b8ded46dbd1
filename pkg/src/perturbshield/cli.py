"""Command-line surface: defend, edges, smooth, reduce, baseline, sweep.

Images are processed per file (optionally across a thread pool capped by
``PERTURBSHIELD_THREADS``); outputs are deterministic for a fixed seed
regardless of worker scheduling. The sweep emits CSV rows
``param,filename,l2_to_input,distinct_colors,edge_fraction,ms`` with
values in the outer loop and sorted filenames inner.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import codec, quantize, raster, smooth
from .edge import EdgeMap, canny_auto
from .quantize import QuantizeConfig, reduce_colors
from .raster import Raster, load, save, to_gray
from .smooth import make_bank

DEFENSES = (
    "adaptive_gaussian",
    "adaptive_gk",
    "fast_adaptive_gk",
    "gk_means",
    "fast_gk_means",
    "kmeans",
    "bit_depth",
    "jpeg",
    "median",
    "gaussian",
    "none",
)
SWEEP_AXES = ("lambda_v", "alpha", "kernels")
_EXTENSIONS = (".png", ".ppm", ".pgm")
THREADS_ENV = "PERTURBSHIELD_THREADS"
CSV_HEADER = "param,filename,l2_to_input,distinct_colors,edge_fraction,ms"
LOG_HEADER = "defense,filename,l2_to_input,distinct_colors,edge_fraction"


@dataclass(frozen=True)
class PipelineConfig:
    defense: str = "fast_adaptive_gk"
    lambda_v: float = 670.0
    alpha: int = 2
    kernels: tuple[int, ...] = smooth.DEFAULT_SIZES
    colors: int = 128
    bits: int = 4
    quality: int = 75
    median_size: int = 3
    gaussian_size: int = 5
    seed: int = 0
    soft_size: int = smooth.DEFAULT_SOFT_SIZE
    sample_stride: int = 4

    def __post_init__(self) -> None:
        if self.defense not in DEFENSES:
            raise ValueError(f"defense must be one of {DEFENSES}, got {self.defense!r}")


_VARIANT_FOR_DEFENSE = {
    "kmeans": "plain_kmeans",
    "gk_means": "gk_means",
    "fast_gk_means": "fast_gk_means",
    "adaptive_gk": "adaptive_gk",
    "fast_adaptive_gk": "fast_adaptive_gk",
}


def _quant_config(cfg: PipelineConfig, variant: str) -> QuantizeConfig:
    return QuantizeConfig(
        k=cfg.colors,
        variant=variant,
        sample_stride=cfg.sample_stride,
        seed=cfg.seed,
    )


def apply_defense(img: Raster, cfg: PipelineConfig) -> tuple[Raster, EdgeMap | None]:
    """Run one defense; returns the processed image and any edge map built."""
    d = cfg.defense
    if d == "none":
        return img, None
    if d == "bit_depth":
        return quantize.bit_depth_reduce(img, cfg.bits), None
    if d == "jpeg":
        return codec.jpeg_roundtrip(img, cfg.quality), None
    if d == "median":
        return smooth.median_blur(img, cfg.median_size), None
    if d == "gaussian":
        return smooth.gaussian_blur(img, cfg.gaussian_size), None
    if d in ("kmeans", "gk_means", "fast_gk_means"):
        return reduce_colors(img, _quant_config(cfg, _VARIANT_FOR_DEFENSE[d])), None

    edges = canny_auto(to_gray(img), cfg.lambda_v, cfg.soft_size)
    bank = make_bank(cfg.kernels, cfg.alpha)
    if d == "adaptive_gaussian":
        return smooth.adaptive_gaussian(img, edges, bank), edges
    return (
        reduce_colors(img, _quant_config(cfg, _VARIANT_FOR_DEFENSE[d]), edges, bank),
        edges,
    )


def mean_l2(a: Raster, b: Raster) -> float:
    """Mean per-pixel Euclidean distance between two same-shape rasters."""
    if a.data.shape != b.data.shape:
        raise ValueError("rasters differ in shape")
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    return float(np.sqrt((diff * diff).sum(axis=-1)).mean())


def distinct_colors(img: Raster) -> int:
    flat = img.data.reshape(-1, img.channels)
    return int(np.unique(flat, axis=0).shape[0])


def _worker_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        cap = max(1, int(raw))
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _collect_inputs(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if path.is_dir():
        files = sorted(
            p for p in path.iterdir()
            if p.is_file() and p.suffix.lower() in _EXTENSIONS
        )
        if not files:
            raise FileNotFoundError(f"no .png/.ppm/.pgm files in {path}")
        return files
    raise FileNotFoundError(f"input {path} does not exist")


def _format_param(axis: str, value) -> str:
    if axis == "kernels":
        return f"{value[0]}-{value[-1]}"
    if axis == "lambda_v":
        return f"{value:g}"
    return str(value)


def _parse_kernels(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = (int(t) for t in text.split("-"))
        sizes = tuple(range(lo, hi + 1, 2))
    else:
        sizes = tuple(int(t) for t in text.replace(",", " ").split())
    if len(sizes) < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 kernel sizes: {text!r}")
    return sizes


def run_defend(
    input_path: str | Path,
    output_dir: str | Path,
    cfg: PipelineConfig,
    dump_maps: bool = False,
    stream=None,
) -> int:
    """Process every input image; returns 0 only if all files succeeded."""
    stream = stream if stream is not None else sys.stdout
    files = _collect_inputs(Path(input_path))
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def process(path: Path):
        img = load(path)
        t0 = time.perf_counter()
        result, edges = apply_defense(img, cfg)
        ms = (time.perf_counter() - t0) * 1000.0
        save(result, out_dir / path.name)
        if dump_maps and edges is not None:
            stem = path.stem
            save(Raster(edges.mask[:, :, None], raster.GRAY), out_dir / f"{stem}_mask.pgm")
            save(Raster(edges.soft[:, :, None], raster.GRAY), out_dir / f"{stem}_soft.pgm")
        fraction = edges.edge_fraction() if edges is not None else 0.0
        return path.name, mean_l2(result, img), distinct_colors(result), fraction, ms

    rows: dict[str, tuple] = {}
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=_worker_count(len(files))) as pool:
        for path, future in [(p, pool.submit(process, p)) for p in files]:
            try:
                name, l2, colors, fraction, ms = future.result()
            except Exception as exc:  # per-file isolation
                failures.append(path.name)
                print(f"error: {path.name}: {exc}", file=sys.stderr)
                continue
            rows[name] = (l2, colors, fraction)
            print(f"{name}: l2={l2:.4f} colors={colors} ms={ms:.1f}", file=stream)

    log_lines = [LOG_HEADER]
    for name in sorted(rows):
        l2, colors, fraction = rows[name]
        log_lines.append(f"{cfg.defense},{name},{l2:.6f},{colors},{fraction:.6f}")
    (out_dir / "log.csv").write_text("\n".join(log_lines) + "\n")
    return 1 if failures else 0


DEFAULT_SWEEPS = {
    "lambda_v": tuple(float(v) for v in range(70, 18071, 600)),
    "alpha": (1, 2, 3, 4, 5, 6),
    "kernels": ((3, 5, 7), (3, 5, 7, 9), (3, 5, 7, 9, 11), (3, 5, 7, 9, 11, 13)),
}


def run_sweep(
    input_dir: str | Path,
    axis: str,
    values,
    cfg: PipelineConfig,
    out: str | Path | None = None,
) -> int:
    """One defended run per (axis value, image); CSV to stdout or a file."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    files = _collect_inputs(Path(input_dir))
    values = list(values) if values else list(DEFAULT_SWEEPS[axis])
    if axis == "lambda_v" and any(v < 1 for v in values):
        raise ValueError("lambda_v values must be >= 1")
    if axis == "alpha" and any(not (1 <= v <= 6) for v in values):
        raise ValueError("alpha values must be in 1..6")

    originals = {p.name: load(p) for p in files}
    names = sorted(originals)

    def cell(value, name: str):
        cfg_v = replace(cfg, **{axis: value})
        img = originals[name]
        t0 = time.perf_counter()
        result, edges = apply_defense(img, cfg_v)
        if edges is None:
            edges = canny_auto(to_gray(img), cfg_v.lambda_v, cfg_v.soft_size)
        ms = (time.perf_counter() - t0) * 1000.0
        return (
            _format_param(axis, value),
            name,
            mean_l2(result, img),
            distinct_colors(result),
            edges.edge_fraction(),
            ms,
        )

    tasks = [(value, name) for value in values for name in names]
    with ThreadPoolExecutor(max_workers=_worker_count(len(tasks))) as pool:
        results = list(pool.map(lambda t: cell(*t), tasks))

    lines = [CSV_HEADER]
    for param, name, l2, colors, fraction, ms in results:
        lines.append(f"{param},{name},{l2:.6f},{colors},{fraction:.6f},{ms:.3f}")
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return 0


def run_edges(input_path, output_dir, cfg: PipelineConfig) -> int:
    files = _collect_inputs(Path(input_path))
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    for path in files:
        try:
            edges = canny_auto(to_gray(load(path)), cfg.lambda_v, cfg.soft_size)
            save(Raster(edges.mask[:, :, None], raster.GRAY), out_dir / f"{path.stem}_mask.pgm")
            save(Raster(edges.soft[:, :, None], raster.GRAY), out_dir / f"{path.stem}_soft.pgm")
        except Exception as exc:
            print(f"error: {path.name}: {exc}", file=sys.stderr)
            status = 1
    return status


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda-v", type=float, default=670.0, dest="lambda_v")
    parser.add_argument("--alpha", type=int, default=2)
    parser.add_argument(
        "--kernels", type=_parse_kernels, default=smooth.DEFAULT_SIZES,
        help="kernel sizes, e.g. '3-9' or '3,5,7,9'",
    )
    parser.add_argument("--colors", type=int, default=128)
    parser.add_argument("--bits", type=int, default=4)
    parser.add_argument("--quality", type=int, default=75)
    parser.add_argument("--median-size", type=int, default=3, dest="median_size")
    parser.add_argument("--gaussian-size", type=int, default=5, dest="gaussian_size")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--soft-size", type=int, default=smooth.DEFAULT_SOFT_SIZE, dest="soft_size")
    parser.add_argument("--stride", type=int, default=4, dest="sample_stride")


def _config_from_args(args, defense: str) -> PipelineConfig:
    return PipelineConfig(
        defense=defense,
        lambda_v=args.lambda_v,
        alpha=args.alpha,
        kernels=args.kernels,
        colors=args.colors,
        bits=args.bits,
        quality=args.quality,
        median_size=args.median_size,
        gaussian_size=args.gaussian_size,
        seed=args.seed,
        soft_size=args.soft_size,
        sample_stride=args.sample_stride,
    )


_BASELINE_DEFENSE = {
    "bitdepth": "bit_depth",
    "jpeg": "jpeg",
    "median": "median",
    "gaussian": "gaussian",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perturbshield",
        description="Suppress adversarial perturbation in images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_defend = sub.add_parser("defend", help="run a defense over images")
    p_defend.add_argument("input")
    p_defend.add_argument("output")
    p_defend.add_argument("--defense", choices=DEFENSES, default="fast_adaptive_gk")
    p_defend.add_argument("--dump-maps", action="store_true")
    _add_pipeline_flags(p_defend)

    p_edges = sub.add_parser("edges", help="write edge mask and soft map PGMs")
    p_edges.add_argument("input")
    p_edges.add_argument("output")
    _add_pipeline_flags(p_edges)

    p_smooth = sub.add_parser("smooth", help="adaptive Gaussian smoothing only")
    p_smooth.add_argument("input")
    p_smooth.add_argument("output")
    p_smooth.add_argument("--dump-maps", action="store_true")
    _add_pipeline_flags(p_smooth)

    p_reduce = sub.add_parser("reduce", help="color reduction variants")
    p_reduce.add_argument("input")
    p_reduce.add_argument("output")
    p_reduce.add_argument(
        "--variant",
        choices=("kmeans", "gk_means", "fast_gk_means", "adaptive_gk", "fast_adaptive_gk"),
        default="fast_adaptive_gk",
    )
    p_reduce.add_argument("--dump-maps", action="store_true")
    _add_pipeline_flags(p_reduce)

    p_base = sub.add_parser("baseline", help="fixed preprocessing baselines")
    base_sub = p_base.add_subparsers(dest="baseline", required=True)
    for name in _BASELINE_DEFENSE:
        p = base_sub.add_parser(name)
        p.add_argument("input")
        p.add_argument("output")
        _add_pipeline_flags(p)

    p_sweep = sub.add_parser("sweep", help="parameter sweep, CSV output")
    p_sweep.add_argument("input")
    p_sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p_sweep.add_argument(
        "--values", nargs="*", default=None,
        help="axis values; kernels accept '3-9' range syntax",
    )
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--defense", choices=DEFENSES, default="fast_adaptive_gk")
    _add_pipeline_flags(p_sweep)

    return parser


def _parse_sweep_values(axis: str, texts) -> list:
    if not texts:
        return []
    if axis == "lambda_v":
        return [float(t) for t in texts]
    if axis == "alpha":
        return [int(t) for t in texts]
    return [_parse_kernels(t) for t in texts]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "defend":
            cfg = _config_from_args(args, args.defense)
            return run_defend(args.input, args.output, cfg, dump_maps=args.dump_maps)
        if args.command == "edges":
            return run_edges(args.input, args.output, _config_from_args(args, "none"))
        if args.command == "smooth":
            cfg = _config_from_args(args, "adaptive_gaussian")
            return run_defend(args.input, args.output, cfg, dump_maps=args.dump_maps)
        if args.command == "reduce":
            defense = "kmeans" if args.variant == "kmeans" else args.variant
            cfg = _config_from_args(args, defense)
            return run_defend(args.input, args.output, cfg, dump_maps=args.dump_maps)
        if args.command == "baseline":
            cfg = _config_from_args(args, _BASELINE_DEFENSE[args.baseline])
            return run_defend(args.input, args.output, cfg)
        if args.command == "sweep":
            cfg = _config_from_args(args, args.defense)
            values = _parse_sweep_values(args.axis, args.values)
            return run_sweep(args.input, args.axis, values, cfg, out=args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
