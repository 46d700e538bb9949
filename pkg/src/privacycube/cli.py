"""Operator entry points: validate profiles, run scenarios, launch the service.

Exit codes are a stable CI contract: 0 success, 1 configuration/validation
failure, 2 runtime/scenario failure. Diagnostics go to stderr; notice logs
and reports go to stdout or --out.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .errors import PrivacyCubeError, ScenarioRunError, UnknownDeviceRef
from .profiles import PROFILE_EXTENSION, Registry, parse_profile
from .scenario import parse_clock_spec, parse_scenario, run_scenario, write_notice_log
from .service import ServiceConfig, serve as service_serve

# Align click's own usage failures (bad flags, missing args) with the
# "1 = configuration/validation" contract.
click.UsageError.exit_code = 1

logger = logging.getLogger("privacycube.cli")


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr.")
def main(verbose: bool) -> None:
    """PrivacyCube: deterministic privacy-notice engine for smart homes."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@main.command()
@click.argument("profile_dir", type=click.Path(path_type=Path))
def validate(profile_dir: Path) -> None:
    """Check every profile in PROFILE_DIR; report one OK line per file."""
    if not profile_dir.is_dir():
        _fail(1, f"not a directory: {profile_dir}")
    registry = Registry()
    count = 0
    for path in sorted(profile_dir.glob(f"*{PROFILE_EXTENSION}")):
        try:
            profile = parse_profile(path.read_bytes())
            registry = registry.register(profile)
        except PrivacyCubeError as exc:
            _fail(1, f"{path.name}: [{exc.code}] {exc}")
        click.echo(f"OK {path.name} ({profile.display_name})")
        count += 1
    click.echo(f"{count} profiles")


@main.command()
@click.argument("scenario_path", type=click.Path(path_type=Path))
@click.option(
    "--profiles", "profile_dir", required=True, type=click.Path(path_type=Path),
    help="Directory of .pcp.json profiles to register first.",
)
@click.option(
    "--clock", "clock_spec", default="instant", show_default=True,
    help="instant, or scaled:<factor> to replay against wall time.",
)
@click.option(
    "--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
    help="Write the notice log here instead of stdout.",
)
@click.option(
    "--render-dir", "render_dir", type=click.Path(file_okay=False, path_type=Path),
    help="Also render one cube-net PNG per log entry into this directory.",
)
def run(scenario_path: Path, profile_dir: Path, clock_spec: str,
        out_path: Path | None, render_dir: Path | None) -> None:
    """Run SCENARIO_PATH against the registered profiles; emit the notice log."""
    if not scenario_path.is_file():
        _fail(1, f"scenario not found: {scenario_path}")
    if not profile_dir.is_dir():
        _fail(1, f"profile directory not found: {profile_dir}")
    try:
        clock = parse_clock_spec(clock_spec)
    except ValueError as exc:
        _fail(1, str(exc))
    try:
        registry = _load_registry(profile_dir)
        scenario = parse_scenario(scenario_path.read_bytes())
    except PrivacyCubeError as exc:
        _fail(1, f"[{exc.code}] {exc}")

    try:
        log = run_scenario(scenario, registry, clock)
    except ScenarioRunError as exc:
        _fail(2, f"event {exc.event_index}: [{exc.cause.code}] {exc.cause}")
    except UnknownDeviceRef as exc:
        _fail(2, f"[{exc.code}] {exc}")

    data = write_notice_log(log)
    if out_path is not None:
        out_path.write_bytes(data)
        logger.info("wrote %d log entries to %s", len(log.entries), out_path)
    else:
        click.get_binary_stream("stdout").write(data)

    if render_dir is not None:
        from .render import render_notice_log  # matplotlib import is heavy

        paths = render_notice_log(log, render_dir)
        logger.info("rendered %d figures into %s", len(paths), render_dir)


@main.command()
@click.option(
    "--profiles", "profile_dir", required=True, type=click.Path(path_type=Path),
    help="Directory of .pcp.json profiles registered at startup.",
)
@click.option(
    "--port", type=int, default=7907, show_default=True, envvar="PRIVACYCUBE_PORT",
    help="Listen port; falls back to $PRIVACYCUBE_PORT.",
)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--event-log", "event_log", type=click.Path(dir_okay=False, path_type=Path),
    default=Path("privacycube.events.jsonl"), show_default=True,
    help="Append-only mutation log; replayed on startup if present.",
)
@click.option(
    "--keepalive", type=float, default=15.0, show_default=True,
    help="Stream keep-alive interval in seconds.",
)
def serve(profile_dir: Path, port: int, host: str, event_log: Path, keepalive: float) -> None:
    """Serve the notice API (state, events, focus, SSE stream) until a signal."""
    config = ServiceConfig(
        host=host,
        port=port,
        profile_dir=profile_dir,
        event_log_path=event_log,
        keepalive_s=keepalive,
    )
    try:
        config.validate()
        registry = _load_registry(profile_dir)
    except (ValueError, PrivacyCubeError) as exc:
        _fail(1, str(exc))
    try:
        service_serve(config, registry)
    except OSError as exc:
        _fail(1, f"startup failed: {exc}")


def _load_registry(profile_dir: Path) -> Registry:
    from .profiles import load_profile_dir

    return load_profile_dir(profile_dir)


if __name__ == "__main__":
    main()
