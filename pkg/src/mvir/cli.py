"""Command line interface.

Subcommands:

* ``denoise`` / ``inpaint``: restore an image from an MVI file (``--in``)
  or run a named experiment preset end to end (``--preset``).
* ``synth``: write a preset's corrupted input (and clean reference) as MVI.
* ``eval``: mean geodesic error between two MVI files.
* ``selfcheck``: run the geometry/duality/gradient oracles.

Exit codes: 0 success, 2 validation error (bad flags, malformed files,
invariant violations), 3 solver failure (line-search exhaustion, cut
locus).  Identical argv and seed produce byte-identical output files;
wall time is printed to stdout only, never written into artifacts.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import synth
from .energy import MODES
from .errors import CutLocusError, SolverError, ValidationError
from .grid import Mask
from .images import ManifoldImage
from .manifolds import Euclidean
from .mvi import load_mvi, save_mvi
from .penalties import make_penalty
from .solver import INNER_METHODS, ArmijoParams, SolverConfig, run
from .view import export_view

PRESETS = ("signal-s1", "disc-s1", "field-s2", "spd-jump", "spd-inpaint",
           "grainlike-so3", "cb-color")

# per-preset solver defaults, applied when the flag is not given
_PRESET_DEFAULTS = {
    "signal-s1": dict(penalty="phi1", eps=0.6, lam=3.4, sigma=0.3),
    "disc-s1": dict(penalty="phi1", eps=1e-2, lam=1e-3),
    "field-s2": dict(penalty="phi2", eps=0.1, lam=2.6, sigma=0.1),
    "spd-jump": dict(penalty="phi1", eps=1e-3, lam=0.1, sigma=0.1),
    "spd-inpaint": dict(penalty="phi1", eps=1e-3, lam=1e-3),
    "grainlike-so3": dict(penalty="phi1", eps=1e-2, lam=0.1, sigma=0.05),
    "cb-color": dict(penalty="phi1", eps=1e-3, lam=0.44, sigma=0.1),
}


def _mask_out(image, mask):
    """Corrupted copy: unknown pixels replaced by the manifold origin."""
    px = image.pixels.copy()
    px[~mask.known] = image.manifold.origin()
    return ManifoldImage(image.manifold, px, mask)


def build_preset(name, seed, size=None, sigma=None, disc_radius=0.15,
                 lost_fraction=0.3, block=12):
    """Corrupted input and clean reference for a named experiment."""
    d = _PRESET_DEFAULTS[name]
    sigma = sigma if sigma is not None else d.get("sigma")
    if name == "signal-s1":
        clean = synth.spiral_signal(size or 101)
        noisy = synth.add_noise(clean, synth.NoiseSpec(synth.WRAPPED_GAUSSIAN, sigma, seed))
        return noisy, clean
    if name == "disc-s1":
        clean = synth.atan2_image(size or 129)
        mask = synth.disc_mask(clean.shape, disc_radius)
        return _mask_out(clean, mask), clean
    if name == "field-s2":
        clean = synth.sphere_field(size or 64)
        noisy = synth.add_noise(clean, synth.NoiseSpec(synth.TANGENT_GAUSSIAN, sigma, seed))
        return noisy, clean
    if name == "spd-jump":
        clean = synth.spd_jump_image(size or 16)
        noisy = synth.add_noise(clean, synth.NoiseSpec(synth.TANGENT_GAUSSIAN, sigma, seed))
        return noisy, clean
    if name == "spd-inpaint":
        clean = synth.spd_jump_image(size or 16)
        mask = synth.center_block_mask(clean.shape, block)
        return _mask_out(clean, mask), clean
    if name == "grainlike-so3":
        clean = synth.so3_grain_image(size or 32, seed=seed)
        noisy = synth.add_noise(clean, synth.NoiseSpec(synth.TANGENT_GAUSSIAN, sigma, seed))
        mask = synth.random_mask(clean.shape, lost_fraction, seed + 1)
        return _mask_out(noisy, mask), clean
    if name == "cb-color":
        clean_rgb = synth.synthetic_rgb(size or 48)
        noisy_rgb = synth.add_rgb_noise(clean_rgb, sigma, seed)
        rows, cols = clean_rgb.shape[:2]
        clean = ManifoldImage(Euclidean(3), clean_rgb)
        noisy = ManifoldImage(Euclidean(3), noisy_rgb)
        return noisy, clean
    raise ValidationError(f"unknown preset {name!r}")


def _add_solver_flags(p):
    p.add_argument("--penalty", choices=("phi1", "phi2", "phi3"), default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--mode", choices=MODES, default="aniso")
    p.add_argument("--inner", choices=INNER_METHODS, default="newton")
    p.add_argument("--inner-steps", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)


def _add_io_flags(p, need_in=False):
    p.add_argument("--in", dest="input", default=None, metavar="MVI")
    p.add_argument("--out", default=None, metavar="MVI")
    p.add_argument("--ref", default=None, metavar="MVI")
    p.add_argument("--view", default=None, metavar="PPM")
    p.add_argument("--view-style", default=None)
    p.add_argument("--report", default=None, metavar="TXT")
    p.add_argument("--manifold", default=None,
                   help="expected manifold tag; mismatches are rejected")


def _add_preset_flags(p):
    p.add_argument("--preset", choices=PRESETS, default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--noise-sigma", dest="sigma", type=float, default=None)
    p.add_argument("--disc-radius", type=float, default=0.15)
    p.add_argument("--lost-fraction", type=float, default=0.3)
    p.add_argument("--block-size", type=int, default=12)
    p.add_argument("--lambda-b", dest="lam_b", type=float, default=0.08,
                   help="brightness-channel lambda (cb-color)")
    p.add_argument("--eps-b", type=float, default=1e-2,
                   help="brightness-channel eps (cb-color)")


def make_parser():
    ap = argparse.ArgumentParser(prog="mvir",
                                 description="Manifold-valued image restoration")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in ("denoise", "inpaint"):
        p = sub.add_parser(cmd, help=f"{cmd} an image")
        _add_io_flags(p)
        _add_preset_flags(p)
        _add_solver_flags(p)
    p = sub.add_parser("synth", help="generate preset inputs")
    p.add_argument("--preset", choices=PRESETS, required=True)
    p.add_argument("--out", required=True, metavar="MVI")
    p.add_argument("--ref-out", default=None, metavar="MVI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--noise-sigma", dest="sigma", type=float, default=None)
    p.add_argument("--disc-radius", type=float, default=0.15)
    p.add_argument("--lost-fraction", type=float, default=0.3)
    p.add_argument("--block-size", type=int, default=12)
    p = sub.add_parser("eval", help="mean geodesic error between two images")
    p.add_argument("--in", dest="input", required=True, metavar="MVI")
    p.add_argument("--ref", required=True, metavar="MVI")
    p = sub.add_parser("selfcheck", help="run the numeric oracle suites")
    p.add_argument("--fast", action="store_true", help="smaller sample sizes")
    return ap


# ---------------------------------------------------------------------------
# report writing
# ---------------------------------------------------------------------------


def _format_config(args, cfg, image, preset):
    lines = [
        "mvir run report",
        f"command: {args.command}",
        f"preset: {preset or '-'}",
        f"manifold: {image.manifold.name}",
        f"shape: {image.shape[0]}x{image.shape[1]}",
        f"mask_known: {image.mask.n_known}/{image.n_pixels}",
        f"penalty: {cfg.penalty.kind} eps={cfg.penalty.eps!r}",
        f"lambda: {cfg.lam!r}",
        f"mode: {cfg.mode}",
        f"inner: {cfg.inner_method} steps={cfg.inner_steps}",
        f"tol: {cfg.outer_tol!r}",
        f"max_iters: {cfg.outer_max_iters}",
        f"seed: {args.seed}",
    ]
    return lines


def write_report(path, args, cfg, corrupted, result, err=None, psnr_value=None,
                 preset=None, extra=()):
    lines = _format_config(args, cfg, corrupted, preset)
    lines += [
        f"outer_iters: {result.outer_iters}",
        f"termination: {result.termination}",
        f"monotone: {'true' if result.monotone else 'false'}",
    ]
    if err is not None:
        lines.append(f"err: {err!r}")
    if psnr_value is not None:
        lines.append(f"psnr: {psnr_value!r}")
    lines.extend(extra)
    lines.append("energy_trace:")
    lines.extend(f"{k} {j!r}" for k, j in result.energy_trace)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def _solver_config(args, preset=None):
    d = _PRESET_DEFAULTS.get(preset, {})
    penalty = args.penalty if args.penalty is not None else d.get("penalty", "phi1")
    eps = args.eps if args.eps is not None else d.get("eps", 0.1)
    lam = args.lam if args.lam is not None else d.get("lam", 1.0)
    return SolverConfig(
        lam=lam,
        penalty=make_penalty(penalty, eps),
        mode=args.mode,
        inner_method=args.inner,
        inner_steps=args.inner_steps,
        armijo=ArmijoParams(),
        outer_tol=args.tol,
        outer_max_iters=args.max_iters,
    )


def _check_manifold_flag(args, image, path):
    if args.manifold is not None:
        tag = image.manifold.name.split("(")[0]
        if args.manifold != tag:
            raise ValidationError(
                f"{path}: manifold {tag!r} does not match --manifold {args.manifold!r}")


def _run_restore(args):
    preset = args.preset
    if (args.input is None) == (preset is None):
        raise ValidationError("exactly one of --in or --preset is required")

    if preset == "cb-color":
        return _run_cb(args)

    if preset is not None:
        corrupted, reference = build_preset(
            preset, args.seed, size=args.size, sigma=args.sigma,
            disc_radius=args.disc_radius, lost_fraction=args.lost_fraction,
            block=args.block_size)
    else:
        corrupted = load_mvi(args.input)
        _check_manifold_flag(args, corrupted, args.input)
        reference = None
    if args.ref is not None:
        reference = load_mvi(args.ref)

    cfg = _solver_config(args, preset)
    result = run(corrupted, cfg)

    err = None
    if reference is not None:
        err = synth.err_metric(result.restored, reference)

    if args.out:
        save_mvi(result.restored, args.out)
    if args.view:
        export_view(result.restored, args.view, args.view_style)
    report_path = args.report or (f"{args.out}.report.txt" if args.out
                                  else "mvir-report.txt")
    write_report(report_path, args, cfg, corrupted, result, err=err, preset=preset)

    print(f"{args.command}: {result.termination} after {result.outer_iters} "
          f"outer iterations ({result.wall_time:.2f} s)")
    if err is not None:
        print(f"err: {err!r}")
    print(f"report: {report_path}")
    return 0


def _run_cb(args):
    """Chromaticity-brightness preset: two independent restorations."""
    noisy, clean = build_preset("cb-color", args.seed, size=args.size,
                                sigma=args.sigma)
    cb = synth.cb_decompose(noisy.pixels)

    cfg_c = _solver_config(args, "cb-color")
    cfg_b = SolverConfig(
        lam=args.lam_b, penalty=make_penalty("phi1", args.eps_b),
        mode=args.mode, inner_method=args.inner, inner_steps=args.inner_steps,
        outer_tol=args.tol, outer_max_iters=args.max_iters)

    res_c = run(cb.chromaticity, cfg_c)
    res_b = run(cb.brightness, cfg_b)
    restored_rgb = synth.cb_recompose(
        synth.CbImage(res_c.restored, res_b.restored, cb.degenerate))
    restored = ManifoldImage(Euclidean(3), restored_rgb)

    noisy_psnr = synth.psnr(np.clip(noisy.pixels, 0, 1), clean.pixels)
    value = synth.psnr(np.clip(restored_rgb, 0, 1), clean.pixels)

    if args.out:
        save_mvi(restored, args.out)
    if args.view:
        export_view(restored, args.view, args.view_style or "rgb")
    report_path = args.report or (f"{args.out}.report.txt" if args.out
                                  else "mvir-report.txt")
    extra = [f"psnr_noisy: {noisy_psnr!r}",
             f"brightness_lambda: {args.lam_b!r}",
             f"brightness_eps: {args.eps_b!r}",
             f"brightness_iters: {res_b.outer_iters}"]
    write_report(report_path, args, cfg_c, noisy, res_c, psnr_value=value,
                 preset="cb-color", extra=extra)
    print(f"cb-color: PSNR {value:.2f} dB (noisy {noisy_psnr:.2f} dB), "
          f"{res_c.wall_time + res_b.wall_time:.2f} s")
    print(f"report: {report_path}")
    return 0


def _run_synth(args):
    corrupted, clean = build_preset(
        args.preset, args.seed, size=args.size, sigma=args.sigma,
        disc_radius=args.disc_radius, lost_fraction=args.lost_fraction,
        block=args.block_size)
    save_mvi(corrupted, args.out)
    if args.ref_out:
        save_mvi(clean, args.ref_out)
    print(f"synth: wrote {args.out}"
          + (f" and {args.ref_out}" if args.ref_out else ""))
    return 0


def _run_eval(args):
    a = load_mvi(args.input)
    b = load_mvi(args.ref)
    err = synth.err_metric(a, b)
    print(f"err: {err!r}")
    if isinstance(a.manifold, Euclidean) and a.manifold.n == 3:
        print(f"psnr: {synth.psnr(np.clip(a.pixels, 0, 1), np.clip(b.pixels, 0, 1))!r}")
    return 0


def _run_selfcheck(args):
    from .selfcheck import run_selfcheck
    ok = run_selfcheck(fast=args.fast)
    return 0 if ok else 3


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command in ("denoise", "inpaint"):
            return _run_restore(args)
        if args.command == "synth":
            return _run_synth(args)
        if args.command == "eval":
            return _run_eval(args)
        return _run_selfcheck(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (SolverError, CutLocusError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
