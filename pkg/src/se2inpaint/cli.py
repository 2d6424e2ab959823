"""Command-line interface.

Every command accepts ``--config FILE`` with ``key = value`` lines whose
keys are the long option names; options given on the command line win.
Each run that writes an output also writes ``<output>.params.txt`` (or
``params.txt`` inside an output directory) listing every effective
parameter, including the step sizes chosen automatically.

Exit codes: 0 success, 2 configuration error, 3 numerical blowup,
4 I/O error.
"""

import argparse
import os
import sys

from . import __version__
from .ahe import AheParams, ahe, modified_ahe
from .config import load_config, write_sidecar
from .diffusion import DiffusionParams, resolve_dt
from .errors import ConfigurationError, Se2Error
from .filters import UnsharpParams, WaxParams, unsharp_r2, unsharp_se2, wax_on, wax_on_wax_off
from .fixtures import FIXTURES, make_fixture
from .inpaint import InpaintParams, classic_inpaint, lift_image, project_stack
from .io import CONVENTIONS, read_image, read_mask, write_image, write_mask, write_stack_slices
from .metrics import compute_metrics

GRIDS = ("isotropic", "pixel")


def _add_grid(p):
    p.add_argument("--n-theta", type=int, default=32, help="orientation samples over [0, pi)")
    p.add_argument("--grid", choices=GRIDS, default="isotropic",
                   help="isotropic: spatial step pi/n_theta; pixel: unit spatial step")


def _add_lift(p, lift="gaussian", sigma=1.0, smoothing=1.0):
    p.add_argument("--lift", choices=("gaussian", "dirac"), default=lift)
    p.add_argument("--sigma", type=float, default=sigma, help="angular spread of the Gaussian lift")
    p.add_argument("--smoothing-s", type=float, default=smoothing,
                   help="std of the Gaussian pre-smoothing (0 disables)")


def _add_projection(p, default, choices=("integral", "max", "log_mean")):
    p.add_argument("--projection", choices=choices, default=default)


def _add_io(p, output_help="output image (.pgm or .png)"):
    p.add_argument("input", help="input image (.pgm or .png)")
    p.add_argument("-o", "--output", required=True, help=output_help)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="se2inpaint",
        description="Image inpainting and enhancement by diffusion on orientation stacks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line options override it")
    common.add_argument("--convention", choices=CONVENTIONS, default="paper",
                        help="paper: dark ink is 1 in memory (files inverted); standard: as stored")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("lift", parents=[common], help="write the orientation stack slice by slice")
    _add_io(p, "output directory for the slices")
    _add_lift(p, smoothing=0.0)
    _add_grid(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("inpaint", parents=[common], help="classic restoration by level-curve diffusion")
    _add_io(p)
    _add_lift(p, lift="dirac")
    _add_grid(p)
    _add_projection(p, "integral")
    p.add_argument("--beta", type=float, default=0.25, help="angular diffusion weight")
    p.add_argument("--T", type=float, default=60.0, help="diffusion time in grid units")
    p.add_argument("--slices", help="also write the diffused stack to this directory")
    p.set_defaults(func=cmd_inpaint)

    p = sub.add_parser("waxonwaxoff", parents=[common], help="WaxOn-WaxOff sharp inpainting")
    _add_io(p)
    _add_lift(p, sigma=5.0)
    _add_grid(p)
    _add_projection(p, "max")
    p.add_argument("--T-on", type=float, default=5.0, help="WaxOn time in grid units")
    p.add_argument("--T-off", type=float, default=None, help="WaxOff time (default T_on / 8)")
    p.add_argument("--beta-on", type=float, default=0.25)
    p.add_argument("--beta-off", type=float, default=2.0)
    p.add_argument("--n", type=int, default=1, help="number of WaxOn-WaxOff rounds")
    p.add_argument("--blowup-factor", type=float, default=10.0)
    p.add_argument("--wax-on-only", action="store_true", help="skip the WaxOff step")
    p.set_defaults(func=cmd_wax)

    p = sub.add_parser("unsharp", parents=[common], help="SE(2) or planar unsharp masking")
    _add_io(p)
    _add_lift(p, sigma=5.0, smoothing=0.0)
    _add_grid(p)
    _add_projection(p, "max")
    p.add_argument("--C", type=float, default=1.0, help="sharpening factor")
    p.add_argument("--T-blur", type=float, default=1.0, help="transversal blur time in grid units")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--planar", action="store_true", help="plain R^2 unsharp masking instead")
    p.add_argument("--s", type=float, default=1.0, help="Gaussian std of the planar blur")
    p.set_defaults(func=cmd_unsharp)

    d = AheParams()
    for name, func, text in (("ahe", cmd_ahe, "mask-aware AHE restoration"),
                             ("modified-ahe", cmd_modified_ahe, "AHE with WaxOn-WaxOff and mask erosion")):
        p = sub.add_parser(name, parents=[common], help=text)
        _add_io(p)
        p.add_argument("--mask", required=True, help="mask image; bright pixels mark corruption")
        for field in ("T1", "T2", "T3", "T4", "sf", "strong_beta", "weak_beta",
                      "advanced_avg_alpha", "wax_C", "wax_beta", "sharpen_s", "sigma", "smoothing_s"):
            p.add_argument("--" + field.replace("_", "-"), dest=field, type=float,
                           default=getattr(d, field))
        p.add_argument("--n", type=int, default=d.n, help="maximum outer iterations")
        p.add_argument("--n-theta", type=int, default=d.n_theta)
        p.add_argument("--grid", choices=GRIDS, default="isotropic")
        _add_projection(p, d.projection, choices=("max", "log_mean"))
        p.set_defaults(func=func)

    p = sub.add_parser("metrics", parents=[common], help="PSNR, contrast, gradient energy, mass")
    p.add_argument("input")
    p.add_argument("reference")
    p.add_argument("-o", "--output", help="also write the numbers to this file")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fixtures", parents=[common], help="write a synthetic test image set")
    p.add_argument("name", choices=FIXTURES)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0, help="stripes only: corruption seed")
    p.add_argument("--density", type=float, default=0.95, help="stripes only: corrupted fraction")
    p.add_argument("--format", choices=("png", "pgm"), default="png")
    p.set_defaults(func=cmd_fixtures)
    return parser


# Config files: the second parse uses the file contents as defaults, so
# argparse applies the same type conversion and the command line wins.

def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise ConfigurationError(f"unknown command {command!r}")


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = load_config(args.config)
    sub = _subparser(parser, args.command)
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key in ("config", "func", "command") or key not in known:
            raise ConfigurationError(f"{args.config}: unknown key {key!r} for {args.command}")
        action = known[key]
        if action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            if action.choices is not None and raw not in action.choices:
                raise ConfigurationError(
                    f"{args.config}: {key} must be one of {sorted(action.choices)}, got {raw!r}"
                )
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except ValueError as exc:
                raise ConfigurationError(f"{args.config}: bad value for {key}: {raw!r}") from exc
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _record(args, extra=None):
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    params.update(extra or {})
    return params


def _sidecar_for(path):
    if os.path.isdir(path):
        return os.path.join(path, "params.txt")
    return path + ".params.txt"


def _isotropic(args):
    return args.grid == "isotropic"


def _inpaint_params(args, T=0.0, beta=0.0):
    return InpaintParams(
        beta=beta, T=T, lift=args.lift, projection=args.projection, sigma=args.sigma,
        smoothing_s=args.smoothing_s, n_theta=args.n_theta, isotropic=_isotropic(args),
    )


def cmd_lift(args):
    image = read_image(args.input, args.convention)
    params = InpaintParams(lift=args.lift, sigma=args.sigma, smoothing_s=args.smoothing_s,
                           n_theta=args.n_theta, isotropic=_isotropic(args), T=0.0)
    spec = params.grid(image.shape)
    stack = lift_image(image, params, spec)
    write_stack_slices(stack, args.output, args.convention)
    write_sidecar(_sidecar_for(args.output), _record(args, {"dx": spec.dx}))


def cmd_inpaint(args):
    image = read_image(args.input, args.convention)
    params = _inpaint_params(args, args.T, args.beta)
    spec = params.grid(image.shape)
    out, stack = classic_inpaint(image, params, return_stack=True)
    write_image(out, args.output, args.convention)
    if args.slices:
        write_stack_slices(stack, args.slices, args.convention)
    diff = params.diffusion(spec)
    write_sidecar(_sidecar_for(args.output), _record(args, {
        "dx": spec.dx, "total_time": diff.total_time, "dt": resolve_dt(diff, spec),
    }))


def cmd_wax(args):
    image = read_image(args.input, args.convention)
    params = _inpaint_params(args)
    spec = params.grid(image.shape)
    unit = spec.time_unit
    T_off = None if args.T_off is None else args.T_off * unit
    wax = WaxParams(T_on=args.T_on * unit, T_off=T_off, beta_on=args.beta_on,
                    beta_off=args.beta_off, n=args.n, blowup_factor=args.blowup_factor)
    stack = lift_image(image, params, spec)
    stack = wax_on(stack, wax, spec) if args.wax_on_only else wax_on_wax_off(stack, wax, spec)
    write_image(project_stack(stack, params), args.output, args.convention)
    dt_on = resolve_dt(DiffusionParams("level_curve", wax.beta_on), spec)
    dt_off = resolve_dt(DiffusionParams("transversal", wax.beta_off), spec)
    write_sidecar(_sidecar_for(args.output), _record(args, {
        "dx": spec.dx, "time_on": wax.T_on, "time_off": wax.off_time,
        "dt_on": dt_on, "dt_off": dt_off,
    }))


def cmd_unsharp(args):
    image = read_image(args.input, args.convention)
    if args.planar:
        write_image(unsharp_r2(image, args.C, args.s), args.output, args.convention)
        write_sidecar(_sidecar_for(args.output), _record(args))
        return
    params = _inpaint_params(args)
    spec = params.grid(image.shape)
    unsharp = UnsharpParams(args.C, args.T_blur * spec.time_unit, args.beta)
    stack = unsharp_se2(lift_image(image, params, spec), unsharp, spec)
    write_image(project_stack(stack, params), args.output, args.convention)
    write_sidecar(_sidecar_for(args.output), _record(args, {
        "dx": spec.dx, "blur_time": unsharp.T_blur,
        "dt": resolve_dt(DiffusionParams("transversal", unsharp.beta), spec),
    }))


def _ahe_params(args):
    fields = ("T1", "T2", "T3", "T4", "sf", "strong_beta", "weak_beta", "advanced_avg_alpha",
              "wax_C", "wax_beta", "sharpen_s", "sigma", "smoothing_s", "n", "n_theta",
              "projection")
    kw = {f: getattr(args, f) for f in fields}
    return AheParams(isotropic=_isotropic(args), **kw)


def _ahe_inputs(args):
    image = read_image(args.input, args.convention)
    mask = read_mask(args.mask)
    if mask.shape != image.shape:
        raise ConfigurationError(f"mask shape {mask.shape} does not match image {image.shape}")
    return image, mask


def _ahe_dts(params, spec, wax):
    out = {
        "dx": spec.dx,
        "dt_strong": resolve_dt(DiffusionParams("level_curve", params.strong_beta), spec),
        "dt_weak": resolve_dt(DiffusionParams("level_curve", params.weak_beta), spec),
    }
    if wax:
        out["dt_blur"] = resolve_dt(DiffusionParams("transversal", params.wax_beta), spec)
    return out


def cmd_ahe(args):
    image, mask = _ahe_inputs(args)
    params = _ahe_params(args)
    write_image(ahe(image, mask, params=params), args.output, args.convention)
    spec = params.grid(image.shape)
    write_sidecar(_sidecar_for(args.output), _record(args, _ahe_dts(params, spec, False)))


def cmd_modified_ahe(args):
    image, mask = _ahe_inputs(args)
    params = _ahe_params(args)
    out, iterations = modified_ahe(image, mask, params=params, return_iterations=True)
    write_image(out, args.output, args.convention)
    spec = params.grid(image.shape)
    extra = _ahe_dts(params, spec, True)
    extra["iterations"] = iterations
    write_sidecar(_sidecar_for(args.output), _record(args, extra))


def cmd_metrics(args):
    image = read_image(args.input, args.convention)
    reference = read_image(args.reference, args.convention)
    m = compute_metrics(image, reference)
    text = "".join(f"{k} = {v!r}\n" for k, v in m._asdict().items())
    sys.stdout.write(text)
    if args.output:
        write_sidecar(args.output, m._asdict())


def cmd_fixtures(args):
    kw = {}
    if args.name == "stripes":
        kw = {"seed": args.seed, "density": args.density}
    fx = make_fixture(args.name, args.size, **kw)
    os.makedirs(args.output, exist_ok=True)
    ext = "." + args.format
    write_image(fx.image, os.path.join(args.output, "image" + ext), args.convention)
    write_image(fx.truth, os.path.join(args.output, "truth" + ext), args.convention)
    write_mask(fx.mask, os.path.join(args.output, "mask" + ext))
    write_sidecar(os.path.join(args.output, "params.txt"), _record(args))


def main(argv=None):
    try:
        args = parse_args(argv)
        args.func(args)
    except Se2Error as exc:
        print(f"se2inpaint: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
