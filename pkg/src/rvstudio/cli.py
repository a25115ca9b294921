"""Command-line entry point: build, run, disasm, explain, bench, repl, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import simulator
from .assembler import assemble_full
from .disasm import disassemble_range, disassemble_word
from .explain import explain_double, explain_instruction, explain_signed_int
from .model import MachineImage


def _read_source(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _print_diagnostics(state) -> int:
    diagnostics = state.aggregated_diagnostics()
    for diag in diagnostics:
        print(f"line {diag.line_number}, cols {diag.start}-{diag.end} "
              f"[{diag.code}]: {diag.message}", file=sys.stderr)
    return len(diagnostics)


def cmd_build(args: argparse.Namespace) -> int:
    state = assemble_full(_read_source(args.source))
    problems = _print_diagnostics(state)
    if args.dump_state:
        Path(args.dump_state).write_text(state.dump(), encoding="utf-8")
    if args.emit_bin:
        Path(args.emit_bin).write_bytes(bytes(state.image.text))
    words = len(state.image.text) // 4
    print(f"{len(state.lines)} lines, {words} words, "
          f"{len(state.image.data)} data bytes, {problems} diagnostics")
    return 1 if problems else 0


def cmd_run(args: argparse.Namespace) -> int:
    state = assemble_full(_read_source(args.source))
    _print_diagnostics(state)
    machine = simulator.reset(state.image)
    hooks = simulator.IoHooks(
        read_integer=lambda: int(input("? ")),
        write_text=lambda text: print(text, end="", flush=True))

    observer = None
    if args.trace:
        def observer(m, changes):
            word = m.memory.load(changes.pc_before, 4)
            text = disassemble_word(word, changes.pc_before)
            regs = ",".join(f"x{r}" for r in sorted(changes.registers_written))
            print(f"0x{changes.pc_before:08x}  0x{word:08x}  {text:<28} "
                  f"writes[{regs}]")

    stop = simulator.run(machine, hooks, max_steps=args.max_steps,
                         observer=observer)
    print(f"\nstopped: {stop.kind}"
          + (f" ({stop.fault})" if stop.fault else "")
          + f" after {stop.steps} steps")
    return 0 if stop.kind == "halted" else 1


def cmd_disasm(args: argparse.Namespace) -> int:
    blob = Path(args.binary).read_bytes()
    image = MachineImage(text=bytearray(blob), text_base=args.base)
    count = (len(blob) + 3) // 4
    for address, word, text in disassemble_range(image, args.base, count):
        print(f"0x{address:08x}  0x{word:08x}  {text}")
    return 0


def _parse_word(text: str) -> int:
    return int(text, 16) if text.lower().startswith("0x") else int(text)


def cmd_explain(args: argparse.Namespace) -> int:
    if args.instr is not None:
        payload = explain_instruction(_parse_word(args.instr)).to_json()
    elif args.int_word is not None:
        payload = explain_signed_int(_parse_word(args.int_word)).to_json()
    else:
        payload = explain_double(_parse_word(args.double)).to_json()
    print(json.dumps(payload, indent=2))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes \
        else bench_mod.DEFAULT_SIZES

    def progress(row):
        print(f"n={row.lines:>6}  full={row.full_us:>12.1f}us  "
              f"incremental={row.incremental_us:>10.1f}us  "
              f"speedup={row.full_us / max(row.incremental_us, 1e-9):>8.1f}x",
              flush=True)

    rows, fit = bench_mod.run_benchmark(sizes, repeats=args.repeats,
                                        with_counters=args.counters,
                                        progress=progress)
    print(f"full-mode linear fit: c1={fit.full_c1:.3f} us/line, "
          f"c2={fit.full_c2:.1f} us, R^2={fit.full_r2:.4f}"
          + ("  (degenerate)" if fit.degenerate else ""))
    print(f"incremental slope: {fit.incremental_slope:.4f} us/line")
    csv_text = bench_mod.rows_to_csv(rows)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.csv}")
    if args.counters:
        for row in rows:
            print(f"n={row.lines}: {json.dumps(row.counters)}")
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    from .repl import run_repl
    text = _read_source(args.source) if args.source else ""
    run_repl(text, mode=args.mode)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    if args.tcp:
        from .service import serve_tcp
        serve_tcp(args.host, args.port, mode=args.mode)
    else:
        from .webserver import serve_web
        serve_web(args.host, args.port, mode=args.mode)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asm",
        description="RV32IM assembler/simulator with incremental assembly")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="assemble a source file")
    p.add_argument("source")
    p.add_argument("--dump-state", metavar="OUT")
    p.add_argument("--emit-bin", metavar="OUT")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("run", help="assemble and execute")
    p.add_argument("source")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("disasm", help="disassemble a raw binary")
    p.add_argument("binary")
    p.add_argument("--base", type=lambda s: int(s, 0), default=0)
    p.set_defaults(fn=cmd_disasm)

    p = sub.add_parser("explain", help="explain a word as JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--instr")
    group.add_argument("--int", dest="int_word")
    group.add_argument("--double")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("bench", help="full vs incremental timing")
    p.add_argument("--sizes", help="comma-separated line counts")
    p.add_argument("--csv", metavar="OUT")
    p.add_argument("--counters", action="store_true")
    p.add_argument("--repeats", type=int, default=bench_mod.DEFAULT_REPEATS)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("repl", help="interactive session")
    p.add_argument("source", nargs="?")
    p.add_argument("--mode", choices=("incremental", "full"),
                   default="incremental")
    p.set_defaults(fn=cmd_repl)

    p = sub.add_parser("serve", help="serve the web UI (or --tcp protocol)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--tcp", action="store_true",
                   help="raw ndjson protocol server instead of the web UI")
    p.add_argument("--mode", choices=("incremental", "full"),
                   default="incremental")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
