"""Command-line client for the simulator service.

The CLI is a thin HTTP client: every subcommand builds a request, sends it
through an httpx client (in-process against the FastAPI app by default, or
to a remote server given --server), and writes any returned data files to
the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import httpx


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=False)


def _load_config(args: argparse.Namespace) -> dict:
    config: dict = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        config["seed"] = args.seed
    if args.pulses is not None:
        config["pulses_per_phase"] = args.pulses
    if args.phases is not None:
        config["phases"] = [float(x) for x in args.phases.split(",") if x]
    if args.out is not None:
        config["output_dir"] = args.out
    return config


def _write_files(files: dict, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in sorted(files.items()):
        (out / name).write_text(content)
        print(f"wrote {out / name}")


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json()
        except ValueError:
            detail = {"error": response.text}
        print(json.dumps({"status": response.status_code, **detail},
                         sort_keys=True), file=sys.stderr)
        raise SystemExit(2)
    return response.json()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a JSON experiment config")
    parser.add_argument("--server", help="base URL of a running sqrs service "
                                         "(default: in-process)")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--pulses", type=int, help="override pulses per phase")
    parser.add_argument("--phases", help="comma-separated phase list (radians)")
    parser.add_argument("--out", help="output directory for data files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqrs",
        description="Secure quantum remote sensing simulator (service client)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run sensing rounds, write counts and logs")
    _add_common(p)
    p.add_argument("--attack", action="store_true",
                   help="apply a full intercept-resend attack")

    p = sub.add_parser("calibrate", help="measure the background table")
    _add_common(p)

    p = sub.add_parser("qber", help="check-path QBER with and without attack")
    _add_common(p)

    p = sub.add_parser("reproduce", help="emit data files for a published figure")
    _add_common(p)
    p.add_argument("--figure", required=True,
                   choices=["fig2", "fig4", "fig5", "fig6"])

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        config = _load_config(args)
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    out_dir = config.get("output_dir", "out")

    with _client(args.server) as client:
        if args.command == "simulate":
            body = _post(client, "/simulate",
                         {"config": config, "attack": bool(args.attack)})
            _write_files(body["files"], out_dir)
        elif args.command == "calibrate":
            body = _post(client, "/calibrate", {"config": config})
            print(json.dumps(body, sort_keys=True))
        elif args.command == "qber":
            body = _post(client, "/qber", {"config": config})
            for case in ("no_attack", "attack"):
                report = body[case]
                verdict = "PASS" if report["pass"] else "FAIL"
                print(f"{case}: qber={report['qber']:.4f} "
                      f"sifted={report['sifted']} -> {verdict} "
                      f"(threshold {body['threshold']})")
        elif args.command == "reproduce":
            body = _post(client, "/reproduce",
                         {"figure": args.figure, "config": config})
            _write_files(body["files"], out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
