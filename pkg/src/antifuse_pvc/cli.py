"""
Command-line front end.

Every subcommand exits 0 on success.  On failure it prints one JSON object
``{"error": <kind>, "message": <text>}`` on stderr and exits 1 (argument
errors exit 2, as usual for argparse).
"""

import argparse
import json
import os
import sys

from . import leak, memory, render, vision
from .errors import FuseError, OTPViolationError
from .pgm import read_pgm, write_pgm

_KINDS = [k.value for k in memory.PatternKind if k is not memory.PatternKind.CUSTOM] + ["demo"]

_GLYPH_HELP = """\
art glyphs: '#' programmed, '.' blank, 'T' test row, 'c' calibration row,
'x' dummy column, '?' unknown (pvc of an extracted observation); planes run
west to east separated by spaces with ' | ' at the address spine."""


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _read_obs(path):
    return leak.PvcObservation.from_json(_read_text(path))


def cmd_render(args):
    if args.obs:
        text = render.render_pvc(_read_obs(args.obs))
    else:
        text = render.render(memory.read_dump(args.dump), args.view)
    _emit(text, args.output)


def cmd_pattern(args):
    if args.art:
        mem = render.art_to_memory(_read_text(args.art))
    elif args.kind == "demo":
        mem = render.demo_memory()
    else:
        params = {}
        if args.phase is not None:
            params["phase"] = args.phase
        if args.page is not None:
            params["page"] = args.page
        mem = memory.gen_pattern(args.kind, **params)
    _emit(memory.serialize_dump(mem), args.output)


def burnlist(target, baseline=None):
    """Write list (dump body syntax) taking ``baseline`` to ``target``."""
    if baseline is None:
        baseline = memory.FuseMemory()
    base, want = baseline.words, target.words
    lines = []
    for row in range(memory.ROW_COUNT):
        b, t = int(base[row]), int(want[row])
        if b & ~t:
            raise OTPViolationError(
                f"row {row:03X}: baseline {b:06X} has bits {b & ~t:06X} that target {t:06X} clears")
        if t != b and t:
            lines.append(f"{row:03X}: {t:06X}\n")
    return "".join(lines)


def cmd_burnlist(args):
    baseline = memory.read_dump(args.baseline) if args.baseline else None
    _emit(burnlist(memory.read_dump(args.dump), baseline), args.output)


def cmd_simulate(args):
    _emit(leak.simulate_pvc(memory.read_dump(args.dump)).to_json(), args.output)


def cmd_synth(args):
    obs = _read_obs(args.obs)
    params = vision.SynthParams.with_contrast(
        args.contrast, noise_sigma=args.noise, charge_gradient=args.gradient, seed=args.seed)
    write_pgm(args.output, vision.synth_plane_image(obs.planes[args.plane], params))


def cmd_extract(args):
    img = read_pgm(args.image)
    opts = vision.ExtractOptions(
        margin_floor=args.margin, min_contrast=args.min_contrast, flip=args.flip,
        flatten=not args.no_flatten, uniform=args.uniform)
    cells = vision.extract_plane(img, args.plane, opts)
    base = None
    if args.merge and args.output not in (None, "-") and os.path.exists(args.output):
        base = _read_obs(args.output)
    obs = (base or leak.PvcObservation.unknown()).with_plane(args.plane, cells, "extracted")
    _emit(obs.to_json(), args.output)


def cmd_mitigate(args):
    half = {"a": leak.DataHalf.A_IS_DATA, "b": leak.DataHalf.B_IS_DATA}[args.data_half]
    out = leak.mitigate(memory.read_dump(args.dump), half, args.mode)
    _emit(memory.serialize_dump(out), args.output)


def cmd_analyze(args):
    assumptions = leak.Assumptions(
        upper_half_empty=leak.parse_page_set(args.assume_upper_empty),
        exactly_one_per_pair=args.assume_exactly_one)
    report = leak.analyze(_read_obs(args.obs), assumptions)
    doc = report.to_dict()
    doc["assumptions"] = {
        "upper_half_empty": sorted(assumptions.upper_half_empty),
        "exactly_one_per_pair": assumptions.exactly_one_per_pair,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    if args.recovered:
        memory.write_dump(args.recovered, report.recovered_memory())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="antifuse-pvc",
        description="Antifuse PVC extraction toolkit for the RP2350 fuse array.",
        epilog=_GLYPH_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="ASCII render of a dump or observation", epilog=_GLYPH_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dump")
    src.add_argument("--obs", help="render an observation JSON (pvc view)")
    p.add_argument("--view", choices=[v.value for v in render.RenderView], default="physical")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pattern", help="dump from ASCII art or a built-in pattern", epilog=_GLYPH_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--art")
    src.add_argument("--kind", choices=_KINDS)
    p.add_argument("--phase", type=int)
    p.add_argument("--page", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("burnlist", help="list of word writes for an external programmer")
    p.add_argument("--dump", required=True)
    p.add_argument("--baseline", help="dump of what the chip already holds")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_burnlist)

    p = sub.add_parser("simulate", help="PVC observation a perfect readout would give")
    p.add_argument("--dump", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    d = vision.SynthParams()
    p = sub.add_parser("synth", help="synthetic PGM micrograph of one plane")
    p.add_argument("--obs", required=True)
    p.add_argument("--plane", type=int, required=True, choices=range(24), metavar="N")
    p.add_argument("--noise", type=float, default=d.noise_sigma)
    p.add_argument("--contrast", type=float, default=d.contrast)
    p.add_argument("--gradient", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    e = vision.ExtractOptions()
    p = sub.add_parser("extract", help="read one plane from a PGM micrograph")
    p.add_argument("--image", required=True)
    p.add_argument("--plane", type=int, required=True, choices=range(24), metavar="N")
    p.add_argument("--min-contrast", type=float, default=e.min_contrast)
    p.add_argument("--margin", type=float, default=e.margin_floor)
    p.add_argument("--flip", action="store_true", help="image is rotated 180 degrees")
    p.add_argument("--no-flatten", action="store_true", help="skip charging-ramp removal")
    p.add_argument("--uniform", choices=["one", "zero"],
                   help="state to report for a plane without contrast")
    p.add_argument("--merge", action="store_true", help="update the plane in an existing output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("mitigate", help="complement-program pair partners")
    p.add_argument("--dump", required=True)
    p.add_argument("--mode", choices=["strict", "lax"], default="strict")
    p.add_argument("--data-half", choices=["a", "b"], default="a")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mitigate)

    p = sub.add_parser("analyze", help="what an observation reveals")
    p.add_argument("--obs", required=True)
    p.add_argument("--assume-upper-empty", metavar="PAGES",
                   help="pages whose words 32..63 are blank: 'all' or e.g. '0-3,7'")
    p.add_argument("--assume-exactly-one", action="store_true")
    p.add_argument("--recovered", help="also write the known-one bits as a dump")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FuseError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
