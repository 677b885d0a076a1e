"""Command-line front end.

Every subcommand is a thin client of the HTTP service: by default the
service application is mounted in-process, and `--server URL` points the
same commands at a remote instance instead. All randomness derives from
the single `--seed` (or the config's `seed`), so rerunning a command
with the same arguments yields byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
from typing import Optional

import click
import httpx

from . import __version__


class _ConfigFailure(Exception):
    pass


class _RuntimeFailure(Exception):
    pass


def _make_client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app, base_url="http://inhibnet", raise_server_exceptions=False)


def _call(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code in (400, 422):
        raise _ConfigFailure(_detail(response))
    if response.status_code != 200:
        raise _RuntimeFailure(_detail(response))
    return response.json()


def _detail(response: httpx.Response) -> str:
    try:
        body = response.json()
        detail = body.get("detail", body)
        violations = body.get("violations")
        if violations:
            return f"{detail}: {'; '.join(str(v) for v in violations)}"
        return str(detail)
    except ValueError:
        return response.text


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise _ConfigFailure(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise _ConfigFailure(f"config {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise _ConfigFailure(f"config {path} must be a JSON object")
    return doc


def _config_hash(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _manifest(command: str, doc: dict, seed: Optional[int], outputs: list[str]) -> str:
    return _json_text(
        {
            "command": command,
            "config_hash": _config_hash(doc),
            "seed": seed,
            "version": __version__,
            "outputs": outputs,
        }
    )


def _emit(result_text: str, out: Optional[str], command: str, doc: dict, seed: Optional[int]):
    if out:
        _write_atomic(out, result_text)
        _write_atomic(out + ".manifest.json", _manifest(command, doc, seed, [out]))
        click.echo(out)
    else:
        click.echo(result_text, nl=False)


@click.group()
@click.version_option(__version__)
@click.option("--server", default=None, metavar="URL", help="Remote service URL; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Inhibitory neural network simulation and analysis."""
    ctx.obj = server


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--n-events", required=True, type=int)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@click.pass_obj
def simulate(server, config_path, n_events, seed, out):
    """Thinning simulation; writes the event trajectory CSV."""
    doc = _load_config(config_path)
    with _make_client(server) as client:
        body = _call(client, "/simulate", {"config": doc, "n_events": n_events, "seed": seed})
    _write_atomic(out, body["csv"])
    _write_atomic(
        out + ".manifest.json", _manifest("simulate", doc, body["seed"], [out])
    )
    click.echo(_json_text(body["summary"]), nl=False)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def spectral(server, config_path, out):
    """Reproduction matrix: spectral radius, weights and verdict."""
    doc = _load_config(config_path)
    with _make_client(server) as client:
        body = _call(client, "/spectral", {"config": doc})
    _emit(_json_text(body), out, "spectral", doc, None)


@main.command("first-jump")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--time", "times", required=True, multiple=True, type=float)
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def first_jump(server, config_path, times, out):
    """Survival function of the first accepted jump."""
    doc = _load_config(config_path)
    with _make_client(server) as client:
        body = _call(client, "/first-jump", {"config": doc, "times": list(times)})
    _emit(_json_text(body), out, "first-jump", doc, None)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--neuron", required=True, type=int)
@click.option("--samples", required=True, type=int)
@click.option("--seed", type=int, default=None)
@click.option("--cap", type=int, default=10**6, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_obj
def perfect(server, config_path, neuron, samples, seed, cap, out):
    """Stationary samples by perfect simulation; writes a sample CSV."""
    doc = _load_config(config_path)
    payload = {
        "config": doc,
        "neuron": neuron,
        "samples": samples,
        "seed": seed,
        "cap": cap,
    }
    with _make_client(server) as client:
        body = _call(client, "/perfect", payload)
    _write_atomic(out, body["csv"])
    _write_atomic(
        out + ".manifest.json", _manifest("perfect", doc, body["seed"], [out])
    )
    click.echo(
        _json_text({"summary": body["summary"], "failures": body["failures"]}), nl=False
    )


@main.command()
@click.option("--delta", type=float, default=None)
@click.option("--beta-min", type=float, default=None)
@click.option("--beta-max", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def contour(server, delta, beta_min, beta_max, out):
    """Contour series bound phi(delta) and the branching verdict."""
    payload = {"delta": delta, "beta_min": beta_min, "beta_max": beta_max}
    with _make_client(server) as client:
        body = _call(client, "/contour", payload)
    _emit(_json_text(body), out, "contour", payload, None)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--state", default=None, metavar="X1,X2,...")
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def drift(server, config_path, state, out):
    """Lyapunov drift (exact and bound) at a state."""
    doc = _load_config(config_path)
    parsed = None
    if state is not None:
        try:
            parsed = [float(v) for v in state.split(",")]
        except ValueError:
            raise _ConfigFailure(f"state must be comma-separated floats, got {state!r}")
    with _make_client(server) as client:
        body = _call(client, "/drift", {"config": doc, "state": parsed})
    _emit(_json_text(body), out, "drift", doc, None)


def run(argv=None) -> int:
    """Dispatch argv; returns the process exit code."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return 64
    except _ConfigFailure as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except (_RuntimeFailure, httpx.HTTPError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 3


def entry():
    sys.exit(run(sys.argv[1:]))
