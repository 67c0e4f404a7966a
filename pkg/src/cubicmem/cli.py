"""Command-line front door: verify, compute, and simulate subcommands.

Configs are accepted as a JSON file via --config with individual flags
overriding; every run is deterministic given (config, seed).  Exit codes:
0 success, 1 invariant failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from cubicmem.cells import build_freudenthal_torus, build_hypercubic_torus
from cubicmem.cochains import identity_suite
from cubicmem.homology import code_parameters, enumerate_flat_sectors, \
    gsd_monomial
from cubicmem.logical import ccz_operator, logical_action, loop_toric_4d, \
    verify_ccz_symmetry
from cubicmem.manifolds import manifold_library
from cubicmem.stabilizers import build_cubic
from cubicmem.thermal import NoiseModel, critical_temperature, \
    estimate_p_crit, memory_experiment


def _parse_complex(spec):
    """Parse "kind:d=5,L=2" into a cell complex."""
    try:
        kind, _, args = spec.partition(":")
        params = {}
        for item in args.split(","):
            key, _, val = item.partition("=")
            params[key.strip()] = int(val)
        dim, length = params["d"], params["L"]
    except (KeyError, ValueError):
        raise click.UsageError(
            f"bad complex spec {spec!r}; expected kind:d=D,L=N")
    if kind == "hypercubic":
        return build_hypercubic_torus(dim, length)
    if kind == "freudenthal":
        return build_freudenthal_torus(dim, length)
    raise click.UsageError(f"unknown complex kind {kind!r}")


def _cubic_for(cx):
    """The standard twisted Hamiltonian for a complex of this dimension."""
    if cx.dim == 5:
        return build_cubic(cx, 2, 2, 2)
    if cx.dim == 2:
        return build_cubic(cx, 1, 1, 1)
    if cx.dim == 4 and cx.kind == "hypercubic-torus":
        return loop_toric_4d(cx)
    raise click.UsageError(f"no standard model for dimension {cx.dim}")


def _find_model(name):
    lib = manifold_library()
    norm = lambda s: s.lower().replace("x", "")
    table = {norm(k): k for k in lib}
    key = table.get(norm(name))
    if key is None:
        raise click.UsageError(
            f"unknown manifold model {name!r}; available: {sorted(lib)}")
    return lib[key]


def _merge_config(ctx, config_path, **values):
    """Overlay config-file values under explicitly passed flags."""
    if not config_path:
        return values
    with open(config_path) as fh:
        data = json.load(fh)
    unknown = set(data) - set(values)
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    out = dict(values)
    for key, val in data.items():
        source = ctx.get_parameter_source(key)
        if source is None or source.name != "COMMANDLINE":
            out[key] = val
    return out


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _result_row(res):
    meta = res.meta
    return {
        "L": max(meta["lengths"]),
        "beta": f"{meta['beta']:.6g}",
        "t": res.sweeps,
        "trials": res.trials,
        "failures": res.failures,
        "p_fail": f"{res.p_fail:.6f}",
        "ci_lo": f"{res.ci_lo:.6f}",
        "ci_hi": f"{res.ci_hi:.6f}",
    }


def _write_results(out, rows, summary):
    header = ["L", "beta", "t", "trials", "failures", "p_fail", "ci_lo",
              "ci_hi"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[h]) for h in header))
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        _write_json(out + ".json", summary)
    click.echo(text, nl=False)


@click.group()
def main():
    """Workbench for commuting non-Pauli stabilizer lattice models."""


# -- verify -------------------------------------------------------------------

@main.command()
@click.option("--suite", required=True,
              type=click.Choice(["cochain", "commute", "ccz"]))
@click.option("--complex", "complex_spec", required=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@click.pass_context
def verify(ctx, suite, complex_spec, samples, trials, seed, config_path, out):
    """Run an invariant suite; exit 1 on any failure."""
    values = _merge_config(ctx, config_path, suite=suite,
                           complex_spec=complex_spec, samples=samples,
                           trials=trials, seed=seed)
    cx = _parse_complex(values["complex_spec"])
    report = {"suite": values["suite"], "complex": values["complex_spec"],
              "seed": values["seed"]}
    if values["suite"] == "cochain":
        rng = np.random.default_rng(values["seed"])
        res = identity_suite(cx, trials=values["trials"], rng=rng)
        report["detail"] = {k: v for k, v in res.items() if k != "passed"}
        report["passed"] = bool(res["passed"])
    elif values["suite"] == "commute":
        ham = _cubic_for(cx)
        bad = ham.noncommuting_pairs()
        report["terms"] = len(ham.terms)
        report["noncommuting_pairs"] = len(bad)
        report["passed"] = not bad
    else:
        if cx.kind != "simplicial" or cx.dim != 5:
            raise click.UsageError(
                "the ccz suite needs a freudenthal d=5 complex")
        ham = build_cubic(cx, 2, 2, 2)
        u = ccz_operator(cx)
        rng = np.random.default_rng(values["seed"])
        report["samples"] = values["samples"]
        report["passed"] = verify_ccz_symmetry(ham, u,
                                               samples=values["samples"],
                                               rng=rng)
    if out:
        _write_json(out, report)
    click.echo(f"suite={report['suite']} "
               f"{'pass' if report['passed'] else 'FAIL'}")
    if not report["passed"]:
        sys.exit(1)


# -- compute ------------------------------------------------------------------

@main.group()
def compute():
    """Ground-space counts, code parameters, gate tables, formulas."""


@compute.command()
@click.option("--model", "model_name")
@click.option("--complex", "complex_spec")
@click.option("--out", type=click.Path())
def gsd(model_name, complex_spec, out):
    """Flat-sector count of a manifold model, or lattice ground-space size."""
    if bool(model_name) == bool(complex_spec):
        raise click.UsageError("give exactly one of --model / --complex")
    if model_name:
        value = enumerate_flat_sectors(_find_model(model_name),
                                       max_list=0).count
        label = model_name
    else:
        cx = _parse_complex(complex_spec)
        value = gsd_monomial(_cubic_for(cx))
        label = complex_spec
    if out:
        _write_json(out, {"target": label, "gsd": int(value)})
    click.echo(f"gsd {label} = {value}")


@compute.command()
@click.option("--manifold", required=True)
@click.option("--gate", required=True,
              type=click.Choice(["ccz", "pontryagin", "em_dual"]))
@click.option("--out", type=click.Path())
def gates(manifold, gate, out):
    """Logical truth table of a phase gate on a manifold model."""
    try:
        action = logical_action(_find_model(manifold), gate)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    text = action.truth_table()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)


@compute.command()
@click.option("--complex", "complex_spec", required=True)
@click.option("--budget", type=int, default=5_000_000, show_default=True)
@click.option("--out", type=click.Path())
def distance(complex_spec, budget, out):
    """Code parameters: physical qubits, distance, systole certificates."""
    cx = _parse_complex(complex_spec)
    if cx.dim == 5:
        degrees = (2, 2, 2)
    elif cx.dim == 2:
        degrees = (1, 1, 1)
    else:
        raise click.UsageError("distance supports d=2 and d=5 models")
    params = code_parameters(cx, *degrees, compute_gsd=False, budget=budget)
    payload = {"complex": complex_spec, "n_phys": int(params.n_phys),
               "distance": int(params.distance),
               "systoles": {str(k): int(v.value)
                            for k, v in params.systoles.items()}}
    if out:
        _write_json(out, payload)
    click.echo(f"n_phys={payload['n_phys']} distance={payload['distance']} "
               f"systoles={payload['systoles']}")


@compute.command()
@click.option("--excitation-dim", "k", type=int, required=True)
@click.option("--spatial-dim", "big_d", type=int)
@click.option("--mu", type=float)
@click.option("--out", type=click.Path())
def tc(k, big_d, mu, out):
    """Peierls critical-temperature estimate."""
    try:
        est = critical_temperature(k, big_d, mu=mu)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    payload = {"k": k, "value": est.value, "stable": est.stable}
    if out:
        _write_json(out, payload)
    click.echo(f"T_c = {est.value:.6f} ({'stable' if est.stable else 'no'})")


# -- simulate -----------------------------------------------------------------

@main.group()
def simulate():
    """Finite-temperature memory experiments."""


@simulate.command()
@click.option("--complex", "complex_spec", required=True)
@click.option("--beta", type=float, default=2.0, show_default=True)
@click.option("--sweeps", type=int, default=100, show_default=True)
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@click.pass_context
def memory(ctx, complex_spec, beta, sweeps, trials, seed, config_path, out):
    """Hold a ground state against the bath, decode, count failures."""
    values = _merge_config(ctx, config_path, complex_spec=complex_spec,
                           beta=beta, sweeps=sweeps, trials=trials, seed=seed)
    cx = _parse_complex(values["complex_spec"])
    ham = _cubic_for(cx)
    res = memory_experiment(ham, NoiseModel(beta=values["beta"]),
                            sweeps=values["sweeps"], trials=values["trials"],
                            seed=values["seed"])
    summary = {"command": "memory", "complex": values["complex_spec"],
               "beta": values["beta"], "sweeps": values["sweeps"],
               "trials": values["trials"], "seed": values["seed"],
               "failures": res.failures, "p_fail": round(res.p_fail, 6),
               "ci": [round(res.ci_lo, 6), round(res.ci_hi, 6)]}
    _write_results(out, [_result_row(res)], summary)


@simulate.command()
@click.option("--complex", "complex_spec", required=True)
@click.option("--beta", type=float, default=2.0, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@click.pass_context
def pcrit(ctx, complex_spec, beta, samples, seed, config_path, out):
    """Single-flip criticality frequency over Gibbs-sampled errors."""
    values = _merge_config(ctx, config_path, complex_spec=complex_spec,
                           beta=beta, samples=samples, seed=seed)
    cx = _parse_complex(values["complex_spec"])
    ham = _cubic_for(cx)
    res = estimate_p_crit(ham, NoiseModel(beta=values["beta"]),
                          samples=values["samples"], seed=values["seed"])
    summary = {"command": "pcrit", "complex": values["complex_spec"],
               "beta": values["beta"], "samples": values["samples"],
               "seed": values["seed"], "critical": res.failures,
               "p_crit": round(res.p_fail, 6),
               "ci": [round(res.ci_lo, 6), round(res.ci_hi, 6)]}
    _write_results(out, [_result_row(res)], summary)


if __name__ == "__main__":
    main()
