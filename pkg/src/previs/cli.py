"""Command-line driver: generate / train / evaluate / serve / export.

Every command echoes a one-line JSON config (seeds included) so any run can
be reproduced from its output. Exit codes: 0 success, 2 usage error,
3 runtime failure.
"""
from __future__ import annotations

import functools
import json
import re
import socket
import sys
from pathlib import Path

import click

from . import regressors
from .ensemble import default_generator_config, generate_ensemble, latin_hypercube, three_level_factorial
from .geometry import build_plate_mesh
from .service import (
    TrainRequest,
    OptimizerSpec,
    build_model_for_ensemble,
    create_app,
    default_optimizer_for,
    run_comparison,
)
from .store import ArtifactStore


def runtime_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def echo_config(command: str, values: dict) -> None:
    click.echo(f"config {json.dumps({'command': command, **values}, sort_keys=True)}")


def apply_config_file(ctx: click.Context, config_file: str | None, values: dict) -> dict:
    """Overlay config-file values; explicit command-line flags win."""
    if not config_file:
        return values
    overrides = json.loads(Path(config_file).read_text())
    merged = dict(values)
    for key, value in overrides.items():
        if key not in values:
            raise click.UsageError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(key) != click.core.ParameterSource.COMMANDLINE:
            merged[key] = value
    return merged


def parse_mesh_spec(spec: str) -> tuple[int, int]:
    match = re.fullmatch(r"plate:(\d+)x(\d+)", spec)
    if not match:
        raise click.UsageError(f"invalid --mesh {spec!r}; expected plate:NXxNY")
    return int(match.group(1)), int(match.group(2))


def parse_design_spec(spec: str) -> tuple[str, int | None]:
    if spec == "factorial3":
        return "factorial3", None
    match = re.fullmatch(r"lhs:(\d+)", spec)
    if not match:
        raise click.UsageError(f"invalid --design {spec!r}; expected factorial3 or lhs:N")
    return "lhs", int(match.group(1))


@click.group()
def main():
    """Reduced-order field interpolation and regression-error analysis."""


@main.command()
@click.option("--mesh", "mesh_spec", default="plate:40x25", show_default=True, help="plate:NXxNY")
@click.option("--width", default=1200.0, show_default=True, help="plate width in mm")
@click.option("--height", default=700.0, show_default=True, help="plate height in mm")
@click.option("--design", "design_spec", default="factorial3", show_default=True, help="factorial3 or lhs:N")
@click.option("--params", "n_params", default=6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--gamma", default=0.0, show_default=True, help="generator nonlinearity")
@click.option("--sigma", default=0.0, show_default=True, help="generator noise (mm)")
@click.option("--out", required=True, type=click.Path(), help="artifact store directory")
@click.option("--config", "config_file", type=click.Path(exists=True), help="JSON config, flags override")
@click.pass_context
@runtime_guard
def generate(ctx, mesh_spec, width, height, design_spec, n_params, seed, gamma, sigma, out, config_file):
    """Create a mesh and a generated ensemble in an artifact store."""
    values = apply_config_file(
        ctx,
        config_file,
        {
            "mesh": mesh_spec,
            "width": width,
            "height": height,
            "design": design_spec,
            "params": n_params,
            "seed": seed,
            "gamma": gamma,
            "sigma": sigma,
            "out": str(out),
        },
    )
    echo_config("generate", values)
    nx, ny = parse_mesh_spec(values["mesh"])
    kind, n_samples = parse_design_spec(values["design"])

    store = ArtifactStore(values["out"])
    mesh = build_plate_mesh(nx, ny, values["width"], values["height"])
    mesh_id = store.save_mesh(mesh, nx, ny)

    if kind == "factorial3":
        design = three_level_factorial(values["params"])
    else:
        design = latin_hypercube(n_samples, values["params"], seed=values["seed"])
    generator_meta = {
        "n_params": values["params"],
        "gamma": values["gamma"],
        "sigma": values["sigma"],
        "seed": values["seed"],
    }
    cfg = default_generator_config(mesh, **generator_meta)
    pairs = generate_ensemble(mesh, design, cfg)
    ensemble_id = store.save_ensemble(mesh_id, design, pairs, generator_meta)
    click.echo(f"mesh {mesh_id}")
    click.echo(f"ensemble {ensemble_id} rows={design.n_samples}")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--ensemble", "ensemble_id", required=True)
@click.option("--model", "kind", type=click.Choice(["olff", "gcn"]), required=True)
@click.option("--epochs", default=None, type=int, help="defaults: olff 2000, gcn 300")
@click.option("--lr", default=None, type=float)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--hidden", default=75, show_default=True, help="olff hidden width")
@click.option("--mu", default=100, show_default=True, help="gcn retained frequencies")
@click.option("--filters", default=25, show_default=True)
@click.option("--cheb-order", default=15, show_default=True)
@click.option("--fc", default=2048, show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True))
@click.pass_context
@runtime_guard
def train(ctx, store_dir, ensemble_id, kind, epochs, lr, batch_size, seed, hidden, mu, filters, cheb_order, fc, config_file):
    """Train a regressor on a stored ensemble and persist the model."""
    values = apply_config_file(
        ctx,
        config_file,
        {
            "store": str(store_dir),
            "ensemble": ensemble_id,
            "model": kind,
            "epochs": epochs,
            "lr": lr,
            "batch_size": batch_size,
            "seed": seed,
            "hidden": hidden,
            "mu": mu,
            "filters": filters,
            "cheb_order": cheb_order,
            "fc": fc,
        },
    )
    echo_config("train", values)
    store = ArtifactStore(values["store"])
    request = TrainRequest(
        ensemble_id=values["ensemble"],
        kind=values["model"],
        optimizer=OptimizerSpec(
            lr=values["lr"], epochs=values["epochs"], batch_size=values["batch_size"], seed=values["seed"]
        ),
        seed=values["seed"],
        hidden=values["hidden"],
        mu=values["mu"],
        filters=values["filters"],
        cheb_order=values["cheb_order"],
        fc=values["fc"],
    )
    model, train_set = build_model_for_ensemble(store, request)
    opt = default_optimizer_for(request.kind, request.optimizer)
    step = max(1, opt.epochs // 10)

    def report(epoch, total, loss):
        if (epoch + 1) % step == 0 or epoch + 1 == total:
            click.echo(f"epoch {epoch + 1}/{total} loss={loss:.6e}")

    trained = regressors.train(model, train_set, opt, progress=report)
    model_id = store.save_model(trained)
    click.echo(f"model {model_id}")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--models", "model_ids", required=True, help="comma-separated model artifact ids")
@click.option("--test", "test_ensemble_id", required=True, help="test ensemble artifact id")
@click.option("--config", "config_file", type=click.Path(exists=True))
@click.pass_context
@runtime_guard
def evaluate(ctx, store_dir, model_ids, test_ensemble_id, config_file):
    """Run the comparison pipeline and print the per-parameter table."""
    values = apply_config_file(
        ctx,
        config_file,
        {"store": str(store_dir), "models": model_ids, "test": test_ensemble_id},
    )
    echo_config("evaluate", values)
    store = ArtifactStore(values["store"])
    ids = [m for m in values["models"].split(",") if m]
    report_id, manifest = run_comparison(store, ids, values["test"])
    report = manifest["report"]

    header = f"{'parameter':<12}" + "".join(f"{m['model_id'][:22]:>26}" for m in report["models"])
    click.echo(header)
    click.echo(f"{'':<12}" + f"{'median [q1, q3] (rel)':>26}" * len(report["models"]))
    for name in report["parameters"]:
        cells = []
        for model in report["models"]:
            stats = model["stats"][name]
            cells.append(f"{stats['median']:+.4f} [{stats['q1']:+.4f}, {stats['q3']:+.4f}]")
        click.echo(f"{name:<12}" + "".join(f"{c:>26}" for c in cells))
    click.echo(f"report {report_id}")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--report", "report_id", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--include-outliers", is_flag=True, help="also export full-span fields")
@click.pass_context
@runtime_guard
def export(ctx, store_dir, report_id, out_dir, include_outliers):
    """Export report JSON and one whisker impact blob per (model, parameter)."""
    echo_config("export", {"store": str(store_dir), "report": report_id, "out": str(out_dir)})
    store = ArtifactStore(store_dir)
    manifest = store.load_report(report_id)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(manifest["report"], indent=2, sort_keys=True) + "\n")

    exported = []
    for entry in manifest["impact_fields"]:
        if entry["kind"] != "whisker" and not include_outliers:
            continue
        values, _ = store.load_report_field(entry["field_id"])
        name = f"{entry['model_id']}_{entry['parameter']}_{entry['kind']}.bin"
        (out / name).write_bytes(values.astype("<f8").tobytes())
        exported.append({**{k: entry[k] for k in ("field_id", "model_id", "parameter", "kind", "span")}, "file": name})
    (out / "fields.json").write_text(json.dumps(exported, indent=2, sort_keys=True) + "\n")
    click.echo(f"exported {len(exported)} impact fields to {out}")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, help="0 binds an ephemeral port")
@runtime_guard
def serve(store_dir, host, port):
    """Start the HTTP service over an artifact store."""
    import uvicorn

    echo_config("serve", {"store": str(store_dir), "host": host, "port": port})
    app = create_app(store_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    actual_port = sock.getsockname()[1]
    click.echo(f"serving on http://{host}:{actual_port}", nl=True)
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=actual_port, log_level="warning"))
    server.run(sockets=[sock])


if __name__ == "__main__":
    main()
