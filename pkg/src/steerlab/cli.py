"""Command-line surface.

Subcommands: witness, robustness, oneway, bound, multidof, fullstate,
build-graph. Options come from flags or from a config document of
'key = value' lines (flags win). Outputs are deterministic: numbers carry 12
significant digits and reruns are byte-identical.

Exit codes: 0 success, 2 validation error, 3 resource cap, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from .classical_bound import (
    brute_force_bound,
    closed_form_bound,
    eigenvalue_diagnostic,
    strategy_value,
)
from .fidelity_bounds import (
    build_hyper_state,
    dof_system,
    fidelity_threshold,
    multidof_bound,
    multidof_fidelity_verdict,
    multidof_kernel,
    sandwich,
)
from .fullstate_witness import (
    W_STATE_BOUND,
    brute_force_fullstate_bound,
    decompose,
    evaluate_fullstate_kernel,
    ghz_state,
    w_state,
    wstate_verdict,
)
from .graph_states import (
    PRESET_NAMES,
    build_graph_state,
    format_graph_document,
    parse_graph_document,
    preset,
)
from .noise_robustness import (
    CSV_COLUMNS,
    RobustnessPoint,
    SweepResult,
    matched_spec,
    maximally_mixed,
    sweep,
    threshold,
    werner_mix,
    write_csv,
)
from .oneway_computing import (
    ANGLE_SETTINGS,
    CLUSTER_KINDS,
    cluster_state,
    computation_fidelity,
    fcomp_window,
    feedforward_fidelity,
    process_and_average_bounds,
    run_branching,
    target_output,
    w4_spec,
    w4box_spec,
    wcz_kernel,
)
from .tensor_core import (
    CapExceeded,
    DensityOperator,
    NumericalFailure,
    fidelity_with_pure,
    kron,
    uniform_register,
)
from .witness_kernel import evaluate_kernel, spec_from_graph

__all__ = ["RunConfig", "main", "run"]

FORMATS = ("table", "csv", "jsonl")

_INT_KEYS = {"n", "d", "q", "seed", "mix_dof"}
_FLOAT_KEYS = {"noise", "kernel", "fidelity"}
_STR_KEYS = {"preset", "graph_file", "method", "cluster", "target", "out", "format"}
_TUPLE_KEYS = {"dofs"}
_RANGE_KEYS = {"d_range", "n_range"}


@dataclass(frozen=True)
class RunConfig:
    """Validated options of one invocation; None means not supplied."""

    command: str
    preset: str | None = None
    graph_file: str | None = None
    n: int | None = None
    d: int | None = None
    q: int | None = None
    noise: float | None = None
    kernel: float | None = None
    method: str | None = None
    seed: int | None = None
    out: str | None = None
    format: str | None = None
    cluster: str | None = None
    dofs: tuple[int, ...] | None = None
    mix_dof: int | None = None
    fidelity: float | None = None
    target: str | None = None
    d_range: tuple[int, int] | None = None
    n_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.format is not None and self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.noise is not None and not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0,1]")


def _coerce(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _TUPLE_KEYS:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    if key in _RANGE_KEYS:
        lo, _, hi = raw.partition(":")
        if not hi:
            raise ValueError(f"{key} must look like 'lo:hi', got {raw!r}")
        return int(lo), int(hi)
    return raw


def parse_config_document(text: str, allowed: set[str]) -> dict[str, str]:
    entries: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in allowed:
            raise ValueError(f"unknown config key {key!r}")
        if key in entries:
            raise ValueError(f"duplicate config key {key!r}")
        entries[key] = value.strip()
    return entries


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steerlab",
        description="Graph-state steering witnesses, bounds, and gate certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *keys: str) -> None:
        if "preset" in keys:
            p.add_argument("--preset", choices=PRESET_NAMES)
            p.add_argument("--graph-file", dest="graph_file")
            p.add_argument("--n", type=int)
        if "d" in keys:
            p.add_argument("--d", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--config")

    p = sub.add_parser("witness", help="kernel vs classical bound on one state")
    common(p, "preset", "d")
    p.add_argument("--q", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--kernel", type=float)
    p.add_argument("--method", choices=("closed", "brute"))

    p = sub.add_parser("robustness", help="noise thresholds over d or n")
    common(p, "preset", "d")
    p.add_argument("--d-range", dest="d_range")
    p.add_argument("--n-range", dest="n_range")
    p.add_argument("--method", choices=("affine", "bisection"))

    p = sub.add_parser("oneway", help="measurement-based gate certification")
    common(p, "d")
    p.add_argument("--cluster", choices=CLUSTER_KINDS)
    p.add_argument("--noise", type=float)
    p.add_argument("--kernel", type=float)

    p = sub.add_parser("bound", help="classical bounds by all methods")
    common(p, "preset", "d")
    p.add_argument("--q", type=int)
    p.add_argument("--method", choices=("closed", "eigen", "brute", "all"))

    p = sub.add_parser("multidof", help="hyperentanglement product witness")
    common(p)
    p.add_argument("--dofs")
    p.add_argument("--noise", type=float)
    p.add_argument("--mix-dof", dest="mix_dof", type=int)
    p.add_argument("--fidelity", type=float)

    p = sub.add_parser("fullstate", help="tomographic witness of a pure target")
    common(p)
    p.add_argument("--target", choices=("w3", "ghz3"))
    p.add_argument("--noise", type=float)

    p = sub.add_parser("build-graph", help="emit a colored graph document")
    common(p, "preset", "d")
    return parser


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(ns).items() if k not in ("config",)}
    allowed = set(values) - {"command"}
    if ns.config is not None:
        with open(ns.config, encoding="utf-8") as handle:
            doc = parse_config_document(handle.read(), allowed)
        for key, raw in doc.items():
            if values.get(key) is None:
                values[key] = _coerce(key, raw)
    for key in ("d_range", "n_range", "dofs"):
        if isinstance(values.get(key), str):
            values[key] = _coerce(key, values[key])
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown options {sorted(unknown)}")
    return RunConfig(**values)


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _round_floats(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return float(format(v, ".12g"))
    if isinstance(v, dict):
        return {k: _round_floats(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round_floats(x) for x in v]
    return v


def _groups(records: list[dict]):
    group: list[dict] = []
    for rec in records:
        if group and tuple(group[0]) != tuple(rec):
            yield group
            group = []
        group.append(rec)
    if group:
        yield group


def render(records: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(_round_floats(rec)) + "\n" for rec in records)
    out: list[str] = []
    if fmt == "csv":
        for group in _groups(records):
            keys = list(group[0])
            out.append(",".join(keys))
            for rec in group:
                out.append(",".join(_fmt_value(rec[k]) for k in keys))
            out.append("")
        return "\n".join(out[:-1]) + "\n"
    for group in _groups(records):
        keys = list(group[0])
        if len(group) > 1:
            cells = [keys] + [[_fmt_value(rec[k]) for k in keys] for rec in group]
            widths = [max(len(row[i]) for row in cells) for i in range(len(keys))]
            for row in cells:
                out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        else:
            for key in keys:
                out.append(f"{key}: {_fmt_value(group[0][key])}")
        out.append("")
    return "\n".join(out[:-1]) + "\n" if out else "\n"


def _load_graph(cfg: RunConfig):
    """Resolve (kind, graph, pure state) from --preset or --graph-file."""
    if cfg.preset is not None and cfg.graph_file is not None:
        raise ValueError("give either --preset or --graph-file, not both")
    if cfg.preset is not None:
        graph, state = preset(cfg.preset, n=cfg.n, d=cfg.d if cfg.d else 2)
        return cfg.preset, graph, state
    if cfg.graph_file is not None:
        with open(cfg.graph_file, encoding="utf-8") as handle:
            graph = parse_graph_document(handle.read())
        return "file", graph, build_graph_state(graph)
    raise ValueError("a graph is required: give --preset or --graph-file")


def cmd_witness(cfg: RunConfig) -> list[dict]:
    method = cfg.method or "closed"
    spec = None
    record: dict = {"command": "witness"}
    if cfg.kernel is not None:
        q = cfg.q if cfg.q else 2
        d = cfg.d if cfg.d else 2
        if cfg.preset is not None or cfg.graph_file is not None:
            kind, graph, _ = _load_graph(cfg)
            spec = matched_spec(kind, graph)
            q, d = spec.q, graph.d
            record.update({"graph": kind, "n": graph.n})
        kernel = cfg.kernel
        record["provenance"] = "user-supplied"
    else:
        kind, graph, state = _load_graph(cfg)
        spec = matched_spec(kind, graph)
        q, d = spec.q, graph.d
        noise = cfg.noise if cfg.noise else 0.0
        rho = werner_mix(state, noise)
        kernel = evaluate_kernel(spec, rho)
        record.update(
            {"graph": kind, "n": graph.n, "noise": noise, "provenance": "simulated"}
        )
    if method == "closed":
        bound = closed_form_bound(q, d)
    else:
        if spec is None:
            raise ValueError("--method brute needs --preset or --graph-file")
        bound, _ = brute_force_bound(spec)
    window = sandwich(kernel, q, d)
    record.update(
        {
            "q": q,
            "d": d,
            "kernel": kernel,
            "bound_method": method,
            "bound": bound,
            "steerable": kernel > bound,
            "margin": kernel - bound,
            "fidelity_threshold": fidelity_threshold(q, d),
            "fidelity_lower": window.lower,
            "fidelity_upper": window.upper,
            "fidelity_raw_lower": window.raw_lower,
            "fidelity_raw_upper": window.raw_upper,
        }
    )
    return [record]


def cmd_robustness(cfg: RunConfig) -> SweepResult:
    method = cfg.method or "affine"
    if cfg.graph_file is not None:
        kind, graph, state = _load_graph(cfg)
        spec = spec_from_graph(graph)
        bound = closed_form_bound(spec.q, graph.d)
        p_star = threshold(spec, state, bound, method=method)
        point = RobustnessPoint(
            graph_kind=kind,
            n=graph.n,
            d=graph.d,
            q=spec.q,
            bound=bound,
            kernel_pure=evaluate_kernel(spec, state),
            kernel_mixed=evaluate_kernel(spec, maximally_mixed(spec.register)),
            p_threshold=p_star,
        )
        return SweepResult((point,), None)
    if cfg.preset is None:
        raise ValueError("a graph is required: give --preset or --graph-file")
    if cfg.d_range is not None and cfg.n_range is not None:
        raise ValueError("give at most one of --d-range and --n-range")
    if cfg.d_range is not None:
        lo, hi = cfg.d_range
        return sweep(cfg.preset, d_range=range(lo, hi + 1), n=cfg.n, method=method)
    if cfg.n_range is not None:
        lo, hi = cfg.n_range
        return sweep(
            cfg.preset,
            n_range=range(lo, hi + 1),
            d=cfg.d if cfg.d else 2,
            method=method,
        )
    d = cfg.d if cfg.d else 2
    return sweep(cfg.preset, d_range=[d], n=cfg.n, method=method)


def _sweep_records(result: SweepResult) -> list[dict]:
    records: list[dict] = []
    for pt in result.points:
        records.append({key: getattr(pt, key) for key in CSV_COLUMNS})
    if result.truncated:
        records.append({"truncated": result.truncated})
    return records


def cmd_oneway(cfg: RunConfig) -> list[dict]:
    cluster = cfg.cluster or "horseshoe"
    if cfg.kernel is not None:
        w4 = cfg.kernel
        provenance = "user-supplied"
        branch_rows: list[dict] = []
        extras: dict = {}
    else:
        noise = cfg.noise if cfg.noise else 0.0
        source = werner_mix(cluster_state(cluster), noise)
        spec = w4_spec() if cluster == "horseshoe" else w4box_spec()
        w4 = evaluate_kernel(spec, source)
        provenance = "simulated"
        wcz = wcz_kernel(source, cluster)
        extras = {
            "noise": noise,
            "wcz_kernel": wcz,
            "f_comp": computation_fidelity(source, cluster),
            "f_feedforward": feedforward_fidelity(source, cluster),
        }
        branch_rows = []
        for setting in ANGLE_SETTINGS:
            target = target_output(cluster, setting)
            for branch in run_branching(source, cluster, setting):
                if branch.corrected_state is None:
                    fid = "undefined"
                else:
                    fid = fidelity_with_pure(branch.corrected_state, target)
                branch_rows.append(
                    {
                        "alpha": setting.alpha,
                        "beta": setting.beta,
                        "s2": branch.s2,
                        "s3": branch.s3,
                        "probability": branch.probability,
                        "corrected_fidelity": fid,
                    }
                )
    bound = closed_form_bound(2, 2)
    window = fcomp_window(w4)
    f_process, f_av = process_and_average_bounds(w4)
    summary: dict = {
        "command": "oneway",
        "cluster": cluster,
        "provenance": provenance,
        "graph_kernel": w4,
        "bound": bound,
        "steerable": w4 > bound,
    }
    summary.update(extras)
    summary.update(
        {
            "f_comp_lower": window.lower,
            "f_comp_upper": window.upper,
            "f_process_lower": f_process,
            "f_av_lower": f_av,
        }
    )
    return [summary] + branch_rows


def cmd_bound(cfg: RunConfig) -> list[dict]:
    spec = None
    record: dict = {"command": "bound"}
    if cfg.preset is not None or cfg.graph_file is not None:
        kind, graph, _ = _load_graph(cfg)
        spec = spec_from_graph(graph)
        q, d = spec.q, graph.d
        record.update({"graph": kind, "n": graph.n})
    else:
        q = cfg.q if cfg.q else 2
        d = cfg.d if cfg.d else 2
    record.update({"q": q, "d": d})
    method = cfg.method or "all"
    if method in ("closed", "all"):
        record["closed_form"] = closed_form_bound(q, d)
    if method in ("eigen", "all"):
        record["eigenvalue_diagnostic"] = eigenvalue_diagnostic(q, d)
        if q >= 3:
            record["note"] = (
                "closed form and eigenvalue diagnostic differ for q >= 3; "
                "the closed form is normative and no equality is asserted"
            )
    if method == "brute" or (method == "all" and spec is not None):
        if spec is None:
            raise ValueError("--method brute needs --preset or --graph-file")
        value, strategy = brute_force_bound(spec)
        record["brute_force"] = value
        record["replayed"] = strategy_value(spec, strategy)
        record["strategy_untrusted"] = " ".join(
            str(p) for p in strategy.untrusted_set
        )
        record["strategy_declared"] = " ".join(
            f"party{p}.term{m}->{v}" for p, m, v in strategy.declared
        )
    return [record]


def cmd_multidof(cfg: RunConfig) -> list[dict]:
    dims = cfg.dofs if cfg.dofs else (2, 2)
    system = dof_system(dims)
    psi = build_hyper_state(system)
    record: dict = {
        "command": "multidof",
        "dofs": " ".join(str(d) for d in dims),
        "d_min": system.d_min,
    }
    if cfg.mix_dof is not None:
        if not 1 <= cfg.mix_dof <= len(dims):
            raise ValueError(f"--mix-dof must lie in 1..{len(dims)}")
        parts = []
        for k, d in enumerate(system.dims, start=1):
            if k == cfg.mix_dof:
                reg = uniform_register(2, d)
                parts.append(
                    DensityOperator(
                        reg, np.eye(d * d, dtype=complex) / float(d * d)
                    )
                )
            else:
                parts.append(build_hyper_state([d]).density())
        source = parts[0]
        for extra in parts[1:]:
            source = kron(source, extra)
        record["mixed_dof"] = cfg.mix_dof
    else:
        source = psi.density()
    noise = cfg.noise if cfg.noise else 0.0
    rho = werner_mix(source, noise)
    record["noise"] = noise
    product = multidof_kernel(rho, system)
    bound = multidof_bound(system)
    record.update(
        {
            "product_kernel": product,
            "bound": bound,
            "steerable": product > bound,
            "hyper_fidelity": fidelity_with_pure(rho, psi),
            "fidelity_threshold": 1.0 / np.sqrt(system.d_min),
        }
    )
    if cfg.fidelity is not None:
        record["supplied_fidelity"] = cfg.fidelity
        record["fidelity_verdict"] = multidof_fidelity_verdict(
            cfg.fidelity, system.d_min
        )
    else:
        record["fidelity_verdict"] = multidof_fidelity_verdict(
            record["hyper_fidelity"], system.d_min
        )
    return [record]


def cmd_fullstate(cfg: RunConfig) -> list[dict]:
    target = cfg.target or "w3"
    psi = w_state() if target == "w3" else ghz_state(3)
    terms = decompose(psi)
    noise = cfg.noise if cfg.noise else 0.0
    rho = werner_mix(psi, noise)
    kernel = evaluate_fullstate_kernel(terms, rho)
    direct = fidelity_with_pure(rho, psi)
    brute_value, _ = brute_force_fullstate_bound(terms)
    record: dict = {
        "command": "fullstate",
        "target": target,
        "n_terms": len(terms),
        "noise": noise,
        "kernel": kernel,
        "fidelity_direct": direct,
        "identity_deviation": abs(kernel - direct),
        "brute_force_diagnostic": brute_value,
    }
    if target == "w3":
        record["stated_bound"] = W_STATE_BOUND
        record["steerable"] = wstate_verdict(kernel)
        record["note"] = (
            "brute-force value printed beside the stated bound; "
            "equality is not asserted"
        )
    return [record]


def cmd_build_graph(cfg: RunConfig) -> str:
    _, graph, _ = _load_graph(cfg)
    return format_graph_document(graph)


def run(argv: list[str] | None = None) -> str:
    ns = _build_parser().parse_args(argv)
    cfg = _config_from_args(ns)
    if cfg.command == "witness":
        text = render(cmd_witness(cfg), cfg.format or "table")
    elif cfg.command == "robustness":
        result = cmd_robustness(cfg)
        fmt = cfg.format or "csv"
        if fmt == "csv":
            text = write_csv(result, None)
        else:
            text = render(_sweep_records(result), fmt)
    elif cfg.command == "oneway":
        text = render(cmd_oneway(cfg), cfg.format or "table")
    elif cfg.command == "bound":
        text = render(cmd_bound(cfg), cfg.format or "table")
    elif cfg.command == "multidof":
        text = render(cmd_multidof(cfg), cfg.format or "table")
    elif cfg.command == "fullstate":
        text = render(cmd_fullstate(cfg), cfg.format or "table")
    elif cfg.command == "build-graph":
        text = cmd_build_graph(cfg)
    else:
        raise ValueError(f"unknown command {cfg.command!r}")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        return ""
    return text


def main(argv: list[str] | None = None) -> int:
    try:
        text = run(argv)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if text:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
