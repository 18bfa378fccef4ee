"""Command-line front end: flags or a JSON object in, one JSON document out.

Vectors are comma separated (``--r 1,3``). Coefficient vectors of elements
of F_q with q = p**m use colons (``--a 1:2``); extension coefficients list
one series per index, separated by semicolons (``--x "0,1;2"``). Weights
and exponent pairs are ``a1:a2`` items (``--w 1:0,2:0``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path
from typing import Sequence, TextIO

from kisinweights import __version__
from kisinweights.config import KisinConfig, load_config, resolve_config_path
from kisinweights.dispatch import KisinDispatcher, UsageError
from kisinweights.errors import KisinError

logger = logging.getLogger("kisinweights")

INT_FLAGS = ("p", "f", "m", "trunc", "i", "seed", "workers", "samples", "configs", "max_f", "niveau")
VECTOR_FLAGS = ("r", "r2", "J", "modulus", "string", "primes")
ELEMENT_FLAGS = ("a", "b", "a2")
SERIES_FLAGS = ("x", "x2")
PAIR_FLAGS = ("w", "w2", "exps")
# flags whose value may start with '-'
VALUE_FLAGS = tuple(f"--{name.replace('_', '-')}" for name in INT_FLAGS + VECTOR_FLAGS + ELEMENT_FLAGS + SERIES_FLAGS + PAIR_FLAGS)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="kisinweights", description="Mod-p Kisin modules and Serre weights.")
    parser.add_argument("command", help="operation to run, or 'batch' for JSON-lines requests on stdin")
    parser.add_argument("name", nargs="?", default=None, help="suite name for 'suite'")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    for name in INT_FLAGS + VECTOR_FLAGS + ELEMENT_FLAGS + SERIES_FLAGS + PAIR_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)
    parser.add_argument("--scaled", action="store_true", default=None, help="allow rescaling the class")
    parser.add_argument("--nonsplit", dest="split", action="store_false", default=None)
    parser.add_argument("--all", action="store_true", default=None, help="jmax: also list every J with the same h")
    parser.add_argument("--partition", action="store_true", default=None, help="ext-reduce: report loops and chains")
    parser.add_argument("--json", dest="json_params", default=None, metavar="FILE", help="JSON object of params, '-' for stdin")
    parser.add_argument("--log-level", default=None)
    return parser


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    """Glue values like '-1,3' to their flag so argparse does not read them as options."""
    result: list[str] = []
    index = 0
    while index < len(argv):
        token = argv[index]
        if token in VALUE_FLAGS and index + 1 < len(argv):
            result.append(f"{token}={argv[index + 1]}")
            index += 2
            continue
        result.append(token)
        index += 1
    return result


def _parse_int(name: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise UsageError(f"--{name} expects an integer, got {text!r}") from exc


def _parse_ints(name: str, text: str, sep: str = ",") -> list[int]:
    items = [item for item in text.split(sep) if item.strip()]
    return [_parse_int(name, item) for item in items]


def _parse_element(name: str, text: str) -> int | list[int]:
    if ":" in text:
        return _parse_ints(name, text, ":")
    return _parse_int(name, text)


def _parse_series_list(name: str, text: str) -> list[list[int | list[int]]]:
    return [
        [_parse_element(name, item) for item in chunk.split(",") if item.strip()]
        for chunk in text.split(";")
    ]


def _parse_pairs(name: str, text: str) -> list[list[int]] | list[int]:
    if ":" not in text:
        return _parse_ints(name, text)
    pairs = []
    for item in text.split(","):
        values = _parse_ints(name, item, ":")
        if len(values) != 2:
            raise UsageError(f"--{name} expects a1:a2 items, got {item!r}")
        pairs.append(values)
    return pairs


def _flag_params(options: argparse.Namespace) -> dict[str, object]:
    params: dict[str, object] = {}
    for name in INT_FLAGS:
        value = getattr(options, name)
        if value is not None:
            params[name] = _parse_int(name, value)
    for name in VECTOR_FLAGS:
        value = getattr(options, name)
        if value is not None:
            params[name] = _parse_ints(name, value)
    for name in ELEMENT_FLAGS:
        value = getattr(options, name)
        if value is not None:
            params[name] = _parse_element(name, value)
    for name in SERIES_FLAGS:
        value = getattr(options, name)
        if value is not None:
            params[name] = _parse_series_list(name, value)
    for name in PAIR_FLAGS:
        value = getattr(options, name)
        if value is not None:
            params[name] = _parse_pairs(name, value)
    for name in ("scaled", "split", "all", "partition"):
        value = getattr(options, name)
        if value is not None:
            params[name] = value
    if options.name is not None:
        params["name"] = options.name
    return params


def _read_json_params(source: str, stdin: TextIO) -> dict[str, object]:
    try:
        text = stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON params from {source}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("JSON params must be an object")
    return data


def _configure_logging(level: str) -> None:
    if logger.handlers:
        logger.setLevel(level.upper())
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level.upper())


def _log_event(event: dict[str, object]) -> None:
    if event.get("event") == "progress":
        logger.debug("progress %s/%s", event.get("current"), event.get("total"))
    else:
        logger.info("%s", event.get("message", ""))


def _write(stdout: TextIO, body: object) -> None:
    stdout.write(json.dumps(body, ensure_ascii=False, sort_keys=True) + "\n")
    stdout.flush()


def _error_body(exc: BaseException, commands: list[str]) -> tuple[dict[str, object], int]:
    if isinstance(exc, KisinError):
        return {"error": exc.kind, "detail": exc.detail}, 2
    if isinstance(exc, UsageError):
        return {"error": "usage", "detail": str(exc), "commands": commands + ["batch"]}, 1
    logger.debug("unexpected failure\n%s", traceback.format_exc())
    return {"error": "internal", "detail": str(exc) or exc.__class__.__name__}, 1


def _run_batch(dispatcher: KisinDispatcher, stdin: TextIO, stdout: TextIO) -> int:
    for raw_line in stdin:
        line = raw_line.strip()
        if not line:
            continue
        request_id = ""
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise UsageError("request must be a JSON object")
            request_id = str(request.get("requestId", ""))
            command = str(request["command"])
            params = request.get("params") or {}
            if not isinstance(params, dict):
                raise UsageError("params must be an object")
            if request.get("seed") is not None:
                params = {**params, "seed": request["seed"]}
            payload = dispatcher.handle_request(command, params)
            _write(stdout, {"requestId": request_id, "ok": True, "payload": payload})
        except (json.JSONDecodeError, KeyError) as exc:
            body, _ = _error_body(UsageError(f"malformed request: {exc}"), dispatcher.commands)
            _write(stdout, {"requestId": request_id, "ok": False, "error": body})
        except Exception as exc:
            body, _ = _error_body(exc, dispatcher.commands)
            _write(stdout, {"requestId": request_id, "ok": False, "error": body})
    return 0


def run(argv: Sequence[str] | None = None, *, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    config: KisinConfig = load_config(resolve_config_path())
    dispatcher = KisinDispatcher(config=config, emit=_log_event)
    try:
        options = _build_parser().parse_args(_normalize_argv(list(sys.argv[1:] if argv is None else argv)))
        _configure_logging(options.log_level or config.log_level)
        if options.command == "batch":
            return _run_batch(dispatcher, stdin, stdout)
        params: dict[str, object] = {}
        if options.json_params is not None:
            params.update(_read_json_params(options.json_params, stdin))
        params.update(_flag_params(options))
        _write(stdout, dispatcher.handle_request(options.command, params))
        return 0
    except Exception as exc:
        body, code = _error_body(exc, dispatcher.commands)
        _write(stdout, body)
        return code


def main() -> int:
    return run()


if __name__ == "__main__":
    raise SystemExit(main())
