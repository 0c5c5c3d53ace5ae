"""Command-line pipeline: generate sequences, simulate, fit, reconstruct,
witness, and pulse sweeps.

Subcommands: ``pipeline``, ``gen-sequences``, ``simulate``, ``fit``,
``reconstruct``, ``witness``, ``pulse-scan``.  Stage commands reread the
artifacts of an earlier run (``--stage-input``, defaulting to the output
directory) and reproduce exactly what the fused pipeline would have written
on the same inputs.  Exit codes: 0 success, 2 configuration or artifact
schema error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .fitting import FitResult
from .pauli import superop_from_unitary, superop_to_list
from .pipeline import (
    Experiment,
    ExperimentBootstrap,
    build_reconstruction,
    experiment_bootstrap,
    fit_overlaps,
    overlaps_from_fits,
    percentile_ci,
    qpt_point_estimate,
    qpt_witness_report,
    rbt_witness_report,
    resolve_target,
    simulate_experiment,
    summary_table,
)
from .reconstruction import corrected, hinton_records, reconstruct_unital
from .sampling import DecayDataset, LengthGroup, QptDataset, sample_qpt_dataset
from .sequences import INFINITE, exhaustive_set
from .witness import WitnessReport

__all__ = ["main"]

DATASET_HEADER = ("role", "j", "n", "tuple_id", "bin_id", "mean")


class NumericalError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Serialization helpers (deterministic bytes: sorted keys, repr floats)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _format_length(n) -> str:
    return "inf" if math.isinf(n) else str(int(n))


def _parse_length(text: str):
    return INFINITE if text == "inf" else int(text)


def _sequence_records(cfg: RunConfig):
    name, unitary = resolve_target(cfg.target_spec())
    roles = [("target", name)]
    if unitary is not None:
        roles.append(("null", "null"))
    roles.append(("reference", "reference"))
    records = []
    for role, _label in roles:
        js = list(range(1, 11)) if role in ("target", "null") else [1]
        for j in js:
            seqs = exhaustive_set(j, lengths=cfg.lengths(), repeats=cfg.repeats())
            records.append(
                {
                    "role": role,
                    "j": j,
                    "sequences": [
                        {
                            "n": _format_length(s.length),
                            "randomizers": list(s.randomizers),
                            "compiled": list(s.compiled),
                            "repeat": s.repeat,
                        }
                        for s in seqs.sequences
                    ],
                }
            )
    return records


def _dataset_rows(label: str, basis_index, ds: DecayDataset):
    j_text = "" if basis_index is None else str(basis_index)
    for n, row_id, bin_id, mean in ds.to_rows():
        yield (label, j_text, _format_length(n), row_id, str(bin_id), repr(mean))


def _write_dataset_csv(path: Path, exp: Experiment, qpt: QptDataset | None) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(DATASET_HEADER)
        for j in sorted(exp.datasets):
            writer.writerows(_dataset_rows(exp.datasets[j].label, j, exp.datasets[j]))
        if exp.null_datasets:
            for j in sorted(exp.null_datasets):
                writer.writerows(
                    _dataset_rows(exp.null_datasets[j].label, j, exp.null_datasets[j])
                )
        writer.writerows(_dataset_rows("reference", None, exp.reference))
        if qpt is not None:
            for row in range(qpt.bins.shape[0]):
                for bin_id in range(qpt.bins.shape[1]):
                    writer.writerow(
                        ("qpt", str(row), "1", f"row{row}", str(bin_id), repr(float(qpt.bins[row, bin_id])))
                    )


def _read_dataset_csv(path: Path, cfg: RunConfig):
    """Rebuild datasets (target, null, reference, qpt) from dataset.csv."""
    grouped: dict = {}
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if tuple(header or ()) != DATASET_HEADER:
            raise ConfigError(f"unexpected header {header}", path=f"{path.name}:1")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(DATASET_HEADER):
                raise ConfigError(
                    f"expected {len(DATASET_HEADER)} fields, got {len(row)}",
                    path=f"{path.name}:{lineno}",
                )
            role, j_text, n_text, tuple_id, bin_text, mean_text = row
            try:
                n = _parse_length(n_text)
                bin_id = int(bin_text)
                mean = float(mean_text)
            except ValueError as exc:
                raise ConfigError(str(exc), path=f"{path.name}:{lineno}") from exc
            if not 0.0 <= mean <= 1.0:
                raise ConfigError(
                    f"bin mean {mean} outside [0, 1]", path=f"{path.name}:{lineno}"
                )
            key = (role, j_text)
            grouped.setdefault(key, {}).setdefault(n, {}).setdefault(tuple_id, {})[
                bin_id
            ] = mean

    def build_decay(key, basis_index, label) -> DecayDataset:
        groups = {}
        for n, rows in grouped[key].items():
            row_ids = list(rows)
            nb = len(next(iter(rows.values())))
            bins = np.empty((len(row_ids), nb))
            for r, rid in enumerate(row_ids):
                for b, mean in rows[rid].items():
                    bins[r, b] = mean
            groups[n] = LengthGroup(tuple(row_ids), bins)
        return DecayDataset(
            basis_index=basis_index,
            label=label,
            shots=cfg.raw["shots"],
            bin_size=cfg.raw["bin_size"],
            seed=cfg.seed,
            groups=groups,
        )

    name, unitary = resolve_target(cfg.target_spec())
    datasets = {
        j: build_decay((f"{name}/overlap-{j}", str(j)), j, f"{name}/overlap-{j}")
        for j in range(1, 11)
        if (f"{name}/overlap-{j}", str(j)) in grouped
    }
    null_datasets = None
    if unitary is not None:
        null_datasets = {
            j: build_decay((f"null/overlap-{j}", str(j)), j, f"null/overlap-{j}")
            for j in range(1, 11)
            if (f"null/overlap-{j}", str(j)) in grouped
        }
    if ("reference", "") not in grouped:
        raise ConfigError("reference rows missing", path=path.name)
    reference = build_decay(("reference", ""), None, "reference")
    qpt = None
    qpt_keys = [k for k in grouped if k[0] == "qpt"]
    if qpt_keys:
        rows = sorted(int(k[1]) for k in qpt_keys)
        nb = len(grouped[("qpt", str(rows[0]))][1][f"row{rows[0]}"])
        bins = np.empty((len(rows), nb))
        for r in rows:
            data = grouped[("qpt", str(r))][1][f"row{r}"]
            for b, mean in data.items():
                bins[r, b] = mean
        qpt = QptDataset(
            bins=bins,
            shots=cfg.raw["shots"],
            bin_size=cfg.raw["bin_size"],
            seed=cfg.seed,
            label="qpt",
        )
    if len(datasets) != 10:
        raise ConfigError("expected 10 target overlap datasets", path=path.name)
    return datasets, null_datasets, reference, qpt


def _fit_payload(j: int, fit: FitResult, ci: dict | None) -> dict:
    return {
        "j": j,
        "rate": fit.rate,
        "ref_rate": fit.ref_rate,
        "scale": fit.scale,
        "offset": fit.offset,
        "objective": fit.objective,
        "converged": fit.converged,
        "degenerate_seed": fit.degenerate_seed,
        "overlap": 1.0 + 3.0 * fit.rate,
        "ci": ci,
    }


def _fits_with_ci(fits, boot: ExperimentBootstrap | None, which: str):
    out = []
    for col, fit in enumerate(fits):
        ci = None
        if boot is not None:
            rates = boot.rates if which == "target" else boot.null_rates
            lo, hi = np.percentile(rates[:, col], [2.5, 97.5])
            ci = {"rate": [float(lo), float(hi)]}
        out.append(_fit_payload(col + 1, fit, ci))
    return out


def _witness_payload(report: WitnessReport) -> dict:
    return {
        "witness_re": [float(x) for x in report.witness.real],
        "witness_im": [float(x) for x in report.witness.imag],
        "expectation": report.expectation,
        "ci": [report.ci[0], report.ci[1]],
        "replications": report.replications,
        "samples_per_config": report.samples_per_config,
        "eig_multiplicity": report.eig_multiplicity,
    }


# ---------------------------------------------------------------------------
# Stage computations


def _compute_fits(cfg, datasets, null_datasets, reference):
    fits = fit_overlaps(datasets, reference)
    null_fits = fit_overlaps(null_datasets, reference) if null_datasets else None
    boot = experiment_bootstrap(
        datasets,
        reference,
        replications=cfg.raw["bootstrap"]["replications"],
        seed=cfg.seed,
        samples_per_config=cfg.raw["bootstrap"]["samples_per_config"],
        null_datasets=null_datasets,
        fits=fits,
        null_fits=null_fits,
    )
    bad = [f for f in fits + (null_fits or []) if not f.converged]
    if bad:
        raise NumericalError(f"{len(bad)} joint fits failed to converge")
    return fits, null_fits, boot


def _fits_json(cfg, fits, null_fits, boot) -> dict:
    payload = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "target": _fits_with_ci(fits, boot, "target"),
    }
    payload["null"] = _fits_with_ci(null_fits, boot, "null") if null_fits else None
    return payload


def _reconstruction_json(cfg, fits, null_fits, boot) -> dict:
    _, target_unitary = resolve_target(cfg.target_spec())
    rec = build_reconstruction(target_unitary, boot)
    mat_lo, mat_hi = percentile_ci(boot.unital)
    payload = {
        "config_hash": cfg.config_hash(),
        "overlaps": {
            "values": [float(a) for a in rec.overlaps.values],
            "ci_low": [float(x) for x in rec.overlaps.ci_low],
            "ci_high": [float(x) for x in rec.overlaps.ci_high],
        },
        "e_prime": superop_to_list(rec.unital),
        "e_prime_ci_low": superop_to_list(mat_lo),
        "e_prime_ci_high": superop_to_list(mat_hi),
        "corrected_left": None,
        "corrected_right": None,
        "fidelity": {
            key: value if not isinstance(value, dict) else
            {"estimate": value["estimate"], "ci": list(value["ci"])}
            for key, value in rec.fidelity.items()
        },
    }
    if rec.corrected_left is not None:
        null_prime = reconstruct_unital(overlaps_from_fits(null_fits))
        payload["null_e_prime"] = superop_to_list(null_prime)
        payload["corrected_left"] = superop_to_list(rec.corrected_left)
        payload["corrected_right"] = superop_to_list(rec.corrected_right)
    return payload


def _witness_json(cfg, datasets, null_datasets, reference, qpt) -> dict:
    wcfg = cfg.raw.get("witness", {"enabled": True, "variants": ["raw"]})
    replications = cfg.raw["bootstrap"]["replications"]
    payload = {"config_hash": cfg.config_hash(), "rbt": {}, "qpt": None}
    variants = wcfg.get("variants", ["raw"])
    for variant in variants:
        if variant != "raw" and not null_datasets:
            continue
        report = rbt_witness_report(
            datasets,
            reference,
            replications=replications,
            seed=cfg.seed,
            null_datasets=null_datasets,
            variant=variant,
        )
        payload["rbt"][variant] = _witness_payload(report)
    if qpt is not None:
        report = qpt_witness_report(
            qpt,
            cfg.raw["qpt"]["assumed_assignment_fidelity"],
            replications=replications,
            seed=cfg.seed,
        )
        payload["qpt"] = _witness_payload(report)
    return payload


def _decay_curves_csv(path: Path, labeled_fits, reference: DecayDataset) -> None:
    """Plot-ready decay curves: measured per-length means next to the fitted
    model value, one file for all overlap experiments plus the reference."""
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("role", "j", "n", "measured", "model"))
        ref_means = reference.means()
        for role, j, ds, fit in labeled_fits:
            means = ds.means()
            for n in ds.lengths():
                model = fit.offset if math.isinf(n) else fit.scale * fit.rate ** n + fit.offset
                writer.writerow(
                    (role, j, _format_length(n), repr(float(means[n])), repr(float(model)))
                )
        first_fit = labeled_fits[0][3]
        for n in reference.lengths():
            model = (
                first_fit.offset
                if math.isinf(n)
                else first_fit.scale * first_fit.ref_rate ** n + first_fit.offset
            )
            writer.writerow(
                ("reference", "", _format_length(n), repr(float(ref_means[n])), repr(float(model)))
            )


def _labeled_fits(cfg, datasets, null_datasets, fits, null_fits):
    name, _ = resolve_target(cfg.target_spec())
    out = [(name, j, datasets[j], fits[j - 1]) for j in sorted(datasets)]
    if null_datasets:
        out.extend(
            ("null", j, null_datasets[j], null_fits[j - 1]) for j in sorted(null_datasets)
        )
    return out


def _hinton_csv(path: Path, e_prime: np.ndarray) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("row", "col", "magnitude", "sign", "accessible"))
        for rec in hinton_records(e_prime):
            writer.writerow(
                (
                    rec["row"],
                    rec["col"],
                    repr(rec["magnitude"]),
                    rec["sign"],
                    int(rec["accessible"]),
                )
            )


def _fig5_csv(path: Path, witness_payload: dict, target_name: str) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("method", "gate", "expectation", "ci_low", "ci_high"))
        for variant, rep in witness_payload["rbt"].items():
            writer.writerow(
                (
                    f"rbt-{variant}",
                    target_name,
                    repr(rep["expectation"]),
                    repr(rep["ci"][0]),
                    repr(rep["ci"][1]),
                )
            )
        if witness_payload["qpt"] is not None:
            rep = witness_payload["qpt"]
            writer.writerow(
                ("qpt", target_name, repr(rep["expectation"]), repr(rep["ci"][0]), repr(rep["ci"][1]))
            )


# ---------------------------------------------------------------------------
# Commands


def _simulate_all(cfg: RunConfig):
    exp = simulate_experiment(
        cfg.target_spec(),
        cfg.noise_model(),
        cfg.spam_model(),
        shots=cfg.raw["shots"],
        bin_size=cfg.raw["bin_size"],
        seed=cfg.seed,
        lengths=cfg.lengths(),
        repeats=cfg.repeats(),
    )
    qpt = None
    if cfg.raw["qpt"]["enabled"] and exp.target_unitary is not None:
        qpt = sample_qpt_dataset(
            exp.applied_target_channel(),
            assignment_fidelity=cfg.spam_model().assignment_fidelity,
            shots=cfg.raw["shots"],
            bin_size=cfg.raw["bin_size"],
            seed=cfg.seed,
            label="qpt",
        )
    return exp, qpt


def cmd_gen_sequences(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    path = out / "sequences.json"
    _write_json(
        path,
        {
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "datasets": _sequence_records(cfg),
        },
    )
    return [path]

def cmd_simulate(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    exp, qpt = _simulate_all(cfg)
    path = out / "dataset.csv"
    _write_dataset_csv(path, exp, qpt)
    return [path]


def cmd_fit(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    datasets, null_datasets, reference, _ = _read_dataset_csv(
        stage_in / "dataset.csv", cfg
    )
    fits, null_fits, boot = _compute_fits(cfg, datasets, null_datasets, reference)
    path = out / "fits.json"
    _write_json(path, _fits_json(cfg, fits, null_fits, boot))
    curves = out / "decay_curves.csv"
    _decay_curves_csv(curves, _labeled_fits(cfg, datasets, null_datasets, fits, null_fits), reference)
    return [path, curves]


def cmd_reconstruct(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    datasets, null_datasets, reference, _ = _read_dataset_csv(
        stage_in / "dataset.csv", cfg
    )
    fits, null_fits, boot = _compute_fits(cfg, datasets, null_datasets, reference)
    payload = _reconstruction_json(cfg, fits, null_fits, boot)
    rec_path = out / "reconstruction.json"
    _write_json(rec_path, payload)
    hin_path = out / "hinton.csv"
    _hinton_csv(hin_path, np.array(payload["e_prime"]).reshape(4, 4))
    return [rec_path, hin_path]


def cmd_witness(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    datasets, null_datasets, reference, qpt = _read_dataset_csv(
        stage_in / "dataset.csv", cfg
    )
    payload = _witness_json(cfg, datasets, null_datasets, reference, qpt)
    path = out / "witness.json"
    _write_json(path, payload)
    fig5 = out / "negativity.csv"
    name, _ = resolve_target(cfg.target_spec())
    _fig5_csv(fig5, payload, name)
    return [path, fig5]


def cmd_pipeline(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    written = cmd_gen_sequences(cfg, out, stage_in)
    exp, qpt = _simulate_all(cfg)
    ds_path = out / "dataset.csv"
    _write_dataset_csv(ds_path, exp, qpt)
    written.append(ds_path)

    fits, null_fits, boot = _compute_fits(
        cfg, exp.datasets, exp.null_datasets, exp.reference
    )
    fits_path = out / "fits.json"
    _write_json(fits_path, _fits_json(cfg, fits, null_fits, boot))
    curves_path = out / "decay_curves.csv"
    _decay_curves_csv(
        curves_path,
        _labeled_fits(cfg, exp.datasets, exp.null_datasets, fits, null_fits),
        exp.reference,
    )
    written.extend([fits_path, curves_path])

    rec_payload = _reconstruction_json(cfg, fits, null_fits, boot)
    rec_path = out / "reconstruction.json"
    _write_json(rec_path, rec_payload)
    hin_path = out / "hinton.csv"
    _hinton_csv(hin_path, np.array(rec_payload["e_prime"]).reshape(4, 4))
    written.extend([rec_path, hin_path])

    if cfg.raw.get("witness", {}).get("enabled", True):
        wit_payload = _witness_json(
            cfg, exp.datasets, exp.null_datasets, exp.reference, qpt
        )
        wit_path = out / "witness.json"
        _write_json(wit_path, wit_payload)
        fig5 = out / "negativity.csv"
        _fig5_csv(fig5, wit_payload, exp.target_name)
        written.extend([wit_path, fig5])

    qpt_superop = None
    if qpt is not None:
        qpt_superop = qpt_point_estimate(
            qpt, cfg.raw["qpt"]["assumed_assignment_fidelity"]
        )
    summary = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "target": exp.target_name,
        "fidelity": summary_table(exp, boot, qpt_superop),
    }
    sum_path = out / "summary.json"
    _write_json(sum_path, summary)
    written.append(sum_path)
    return written


def cmd_pulse_scan(cfg: RunConfig, out: Path, stage_in: Path) -> list:
    from .groups import rotation_unitary
    from .pulses import (
        DuffingModel,
        RotationSpec,
        gaussian_envelope,
        phase_ramp,
        simulate_duffing,
        simulate_qubit,
        unitary_infidelity,
    )
    from .pauli import superop_from_unitary as sfu

    pcfg = cfg.raw["pulse_scan"]
    target_axis = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    angle = np.pi
    target_u = rotation_unitary(target_axis, angle)
    model = DuffingModel(
        levels=pcfg["levels"],
        anharmonicity=2 * np.pi * pcfg["anharmonicity_hz"],
    )
    duration = pcfg["duration"]
    rows = []
    for n in pcfg["sample_counts"]:
        dt = duration / n
        env = gaussian_envelope(duration / 4.0, dt, angle * float(np.hypot(*target_axis[:2])))
        for order in (1, 2):
            pulse = phase_ramp(env, dt, RotationSpec(axis=target_axis, angle=angle), order)
            infid = unitary_infidelity(simulate_qubit(pulse), target_u)
            rows.append(("qubit", dt, order, 0, infid, 0.0))
            for drag in (0, 1):
                superop, leakage = simulate_duffing(
                    pulse, model, drag=bool(drag), drag_coefficient=pcfg["drag_coefficient"]
                )
                infid_d = 1.0 - (float(np.tensordot(sfu(target_u), superop, axes=2)) + 2.0) / 6.0
                rows.append(("duffing", dt, order, drag, infid_d, leakage))
    path = out / "pulse_scan.csv"
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("model", "dt", "order", "drag", "infidelity", "leakage"))
        for model_name, dt, order, drag, infid, leak in rows:
            writer.writerow((model_name, repr(dt), order, drag, repr(infid), repr(leak)))
    return [path]


COMMANDS = {
    "pipeline": cmd_pipeline,
    "gen-sequences": cmd_gen_sequences,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "reconstruct": cmd_reconstruct,
    "witness": cmd_witness,
    "pulse-scan": cmd_pulse_scan,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbtlab",
        description="Randomized benchmarking tomography simulation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", type=Path, default=Path("rbtlab-out"))
        p.add_argument(
            "--stage-input",
            type=Path,
            default=None,
            help="directory holding upstream artifacts (default: --out)",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    written: list = []
    try:
        if args.config is not None:
            cfg = RunConfig.from_file(args.config)
        else:
            cfg = RunConfig.from_dict({})
        if args.seed is not None:
            data = dict(cfg.raw)
            data["seed"] = args.seed
            cfg = RunConfig.from_dict(data)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        stage_in = args.stage_input or out
        written = COMMANDS[args.command](cfg, out, stage_in)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _cleanup(written)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _cleanup(written)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        _cleanup(written)
        return 4
    for path in written:
        print(path)
    return 0


def _cleanup(written) -> None:
    for path in written:
        try:
            Path(path).unlink(missing_ok=True)
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
