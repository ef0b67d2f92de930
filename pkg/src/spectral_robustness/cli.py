"""Command-line surface: gen-paths, corrupt, psd-shift, path-metrics, jacobian,
regress, report.

Every command validates its inputs fully before writing any output file, and
all outputs are deterministic functions of the inputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import corruptions, jacobian, paths, path_metrics, regression, render, shift_psd, tables, tensorio
from .errors import InvalidInputError

# All toolkit errors subclass ValueError; OSError covers file-system failures.
_ERRORS = (ValueError, OSError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrob",
        description="Fourier interpolation paths, shift PSDs, and robustness statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-paths", help="sample and build interpolation paths")
    p.add_argument("--images", required=True, help="dataset tensor file, shape (N, C, H, W)")
    p.add_argument("--labels", required=True, help="CSV of index,label")
    p.add_argument("--mode", required=True, choices=paths.PATH_MODES)
    p.add_argument(
        "--class-relation",
        default="any",
        choices=["within", "between", "any"],
    )
    p.add_argument("--cutoff", type=float, default=paths.DEFAULT_CUTOFF)
    p.add_argument("--steps", type=int, default=paths.DEFAULT_STEPS)
    p.add_argument("--n-paths", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_paths)

    p = sub.add_parser("corrupt", help="apply a synthetic corruption to an image stack")
    p.add_argument("--images", required=True)
    p.add_argument("--kind", required=True, choices=corruptions.CORRUPTION_KINDS)
    p.add_argument("--param", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("psd-shift", help="spectral characterization of a distribution shift")
    p.add_argument("--mode", required=True, choices=["paired", "class-averaged"])
    p.add_argument("--a", required=True, help="originals / first dataset tensor")
    p.add_argument("--b", required=True, help="corrupted / second dataset tensor")
    p.add_argument("--labels-a", help="labels CSV for --a (class-averaged mode)")
    p.add_argument("--labels-b", help="labels CSV for --b (class-averaged mode)")
    p.add_argument("--out", required=True, help="output PSD tensor file")
    p.add_argument("--pgm", help="optional PGM heatmap path")
    p.add_argument("--bands", help="optional band-fractions CSV path")
    p.add_argument(
        "--band-edges",
        default=None,
        help="comma-separated r1,r2 overriding the default band edges",
    )
    p.set_defaults(func=cmd_psd_shift)

    p = sub.add_parser("path-metrics", help="HFF/CD metrics from a trace CSV")
    p.add_argument("--traces", required=True)
    p.add_argument("--hff-threshold", type=int, default=path_metrics.DEFAULT_HFF_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_path_metrics)

    p = sub.add_parser("jacobian", help="random-projection Jacobian norm estimate")
    p.add_argument("--predictor", required=True, choices=["linear", "mlp"])
    p.add_argument(
        "--weights",
        help="weights tensor: (K, D+1) with bias column for linear; packed 1D for mlp "
        "(omit to train the built-in blob MLP)",
    )
    p.add_argument("--images", required=True)
    p.add_argument("--nproj", type=int, default=jacobian.DEFAULT_N_PROJ)
    p.add_argument("--batch", type=int, default=jacobian.DEFAULT_BATCH_SIZE)
    p.add_argument("--target", default="probs", choices=["probs", "logits"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=jacobian.DEFAULT_FD_EPS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("regress", help="grouped probit-domain regression")
    p.add_argument("--accuracies", required=True)
    p.add_argument("--metrics", required=True)
    p.add_argument("--x", required=True, help='metric name or "ID accuracy"')
    p.add_argument("--ood", required=True, help="OOD dataset_id")
    p.add_argument("--id", dest="id_dataset", help="ID dataset_id (inferred when unique)")
    p.add_argument("--group-by", default="group")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", help="optional scatter plot path")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("report", help="markdown summary of metrics and fits")
    p.add_argument("--metrics", required=True, help="path-metrics CSV")
    p.add_argument("--fit", help="optional regress output CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def _load_dataset(path) -> np.ndarray:
    data, shape = tensorio.read_tensor(path)
    if len(shape) != 4:
        raise InvalidInputError(f"{path}: expected shape (N, C, H, W), got {shape}")
    if not np.all(np.isfinite(data)):
        raise InvalidInputError(f"{path}: dataset contains non-finite values")
    return np.asarray(data, dtype=np.float64)


def cmd_gen_paths(args) -> int:
    images = _load_dataset(args.images)
    labels = tables.read_labels(args.labels, n_items=len(images))
    relation = "unconstrained" if args.class_relation == "any" else args.class_relation
    specs = paths.sample_path_specs(
        labels,
        n_paths=args.n_paths,
        mode=args.mode,
        class_relation=relation,
        rho=args.cutoff,
        t=args.steps,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "path_id",
                "mode",
                "source_index",
                "target_index",
                "class_relation",
                "cutoff",
                "steps",
                "seed",
                "file",
            ]
        )
        for i, spec in enumerate(specs):
            path_id = f"path_{i:05d}"
            filename = f"{path_id}.tnsr"
            built = paths.build_path(images[spec.source_index], images[spec.target_index], spec)
            tensorio.write_tensor(out_dir / filename, built.images)
            writer.writerow(
                [
                    path_id,
                    spec.mode,
                    spec.source_index,
                    spec.target_index,
                    spec.class_relation,
                    tables.fmt_float(spec.cutoff),
                    spec.steps,
                    spec.seed,
                    filename,
                ]
            )
    print(f"wrote {len(specs)} paths to {out_dir}")
    return 0


def cmd_corrupt(args) -> int:
    images = _load_dataset(args.images)
    spec = corruptions.CorruptionSpec(kind=args.kind, param=args.param, seed=args.seed)
    out = corruptions.corrupt_batch(images, spec)
    tensorio.write_tensor(args.out, out)
    print(f"wrote {len(out)} corrupted images to {args.out}")
    return 0


def cmd_psd_shift(args) -> int:
    a = _load_dataset(args.a)
    b = _load_dataset(args.b)
    if args.mode == "paired":
        psd_map = shift_psd.paired_shift_psd(a, b)
    else:
        if not (args.labels_a and args.labels_b):
            raise InvalidInputError("class-averaged mode needs --labels-a and --labels-b")
        la = tables.read_labels(args.labels_a, n_items=len(a))
        lb = tables.read_labels(args.labels_b, n_items=len(b))
        groups_a = {int(k): a[la == k] for k in np.unique(la)}
        groups_b = {int(k): b[lb == k] for k in np.unique(lb)}
        psd_map = shift_psd.class_averaged_shift_psd(groups_a, groups_b)

    edges = shift_psd.DEFAULT_BAND_EDGES
    if args.band_edges:
        r1, r2 = (float(v) for v in args.band_edges.split(","))
        edges = (r1, r2)
    fractions = shift_psd.band_fractions(psd_map, edges)

    tensorio.write_tensor(args.out, psd_map.power)
    if args.pgm:
        render.emit_pgm(psd_map, args.pgm)
    if args.bands:
        with open(args.bands, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["low", "mid", "high", "r1", "r2", "source_count"])
            writer.writerow(
                [
                    tables.fmt_float(fractions.low),
                    tables.fmt_float(fractions.mid),
                    tables.fmt_float(fractions.high),
                    tables.fmt_float(edges[0]),
                    tables.fmt_float(edges[1]),
                    psd_map.source_count,
                ]
            )
    print(
        f"shift bands: low={fractions.low:.4f} mid={fractions.mid:.4f} "
        f"high={fractions.high:.4f}"
    )
    return 0


def cmd_path_metrics(args) -> int:
    traces = tables.read_traces(args.traces)
    per_path = path_metrics.compute_path_metrics(traces, args.hff_threshold)
    hff_summary = path_metrics.summarize_gaussian([m.hff for m in per_path])
    cd_summary = path_metrics.summarize_gaussian([m.cd for m in per_path])
    tables.write_path_metrics(args.out, per_path, hff_summary, cd_summary, args.hff_threshold)
    print(
        f"{len(per_path)} paths: hff mean {hff_summary.mean:.4f} "
        f"[{hff_summary.ci95_low:.4f}, {hff_summary.ci95_high:.4f}], "
        f"cd mean {cd_summary.mean:.2f}"
    )
    return 0


def cmd_jacobian(args) -> int:
    images = _load_dataset(args.images)
    image_shape = images.shape[1:]
    d = int(np.prod(image_shape))
    if args.predictor == "linear":
        if not args.weights:
            raise InvalidInputError("--weights is required for the linear predictor")
        w, shape = tensorio.read_tensor(args.weights)
        if len(shape) != 2 or shape[1] != d + 1:
            raise InvalidInputError(
                f"linear weights must have shape (K, D+1) with D={d}, got {shape}"
            )
        predictor = jacobian.LinearPredictor(
            w[:, :-1], w[:, -1], image_shape=image_shape, target=args.target
        )
    else:
        if args.weights:
            packed, _ = tensorio.read_tensor(args.weights)
            predictor = jacobian.unpack_mlp_weights(packed, image_shape, target=args.target)
        else:
            predictor, _, _ = jacobian.train_blob_mlp(
                image_shape=tuple(image_shape), seed=args.seed, target=args.target
            )
    if len(images) < args.batch:
        raise InvalidInputError(
            f"need at least {args.batch} images for batch size {args.batch}, got {len(images)}"
        )
    config = jacobian.JacobianConfig(
        n_proj=args.nproj, batch_size=args.batch, seed=args.seed, fd_eps=args.eps
    )
    estimate = jacobian.estimate_jacobian_norm(predictor, images[: args.batch], config)

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "frobenius_norm",
                "ci95_low",
                "ci95_high",
                "n_estimates",
                "n_proj",
                "batch_size",
                "target",
                "method",
                "predictor",
                "seed",
            ]
        )
        writer.writerow(
            [
                tables.fmt_float(estimate.frobenius_norm),
                tables.fmt_float(estimate.ci95_low),
                tables.fmt_float(estimate.ci95_high),
                estimate.n_estimates,
                args.nproj,
                args.batch,
                estimate.target,
                estimate.method,
                args.predictor,
                args.seed,
            ]
        )
    print(
        f"jacobian norm {estimate.frobenius_norm:.4f} "
        f"[{estimate.ci95_low:.4f}, {estimate.ci95_high:.4f}] ({estimate.method})"
    )
    return 0


def cmd_regress(args) -> int:
    accuracies = tables.read_accuracies(args.accuracies)
    metrics = tables.read_metrics(args.metrics)
    result = regression.grouped_regression(
        accuracies,
        metrics,
        x_spec=args.x,
        ood_dataset=args.ood,
        group_by=args.group_by,
        id_dataset=args.id_dataset,
    )

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "group",
                "n_models",
                "slope",
                "intercept",
                "r2",
                "status",
                "x_spec",
                "x_transform",
                "ood_dataset",
            ]
        )
        for fit in result.per_group:
            writer.writerow(
                [
                    fit.group,
                    fit.n_models,
                    tables.fmt_float(fit.slope),
                    tables.fmt_float(fit.intercept),
                    tables.fmt_float(fit.r_squared),
                    "fitted",
                    result.x_spec,
                    result.x_transform,
                    result.ood_dataset,
                ]
            )
        for group, reason in result.skipped:
            writer.writerow(
                [group, "", "", "", "", f"skipped: {reason}", result.x_spec, result.x_transform, result.ood_dataset]
            )
        writer.writerow(
            [
                "__average__",
                sum(f.n_models for f in result.per_group),
                tables.fmt_float(result.averaged_slope),
                "",
                tables.fmt_float(result.averaged_r2),
                "fitted",
                result.x_spec,
                result.x_transform,
                result.ood_dataset,
            ]
        )

    if args.svg:
        points, lines = _scatter_data(accuracies, metrics, result, args)
        render.emit_scatter_svg(
            points,
            lines,
            args.svg,
            x_label=(
                f"probit({result.x_spec})" if result.x_transform == "probit" else result.x_spec
            ),
            y_label=f"probit(accuracy on {result.ood_dataset})",
            title=f"{result.ood_dataset} vs {result.x_spec}",
        )

    print(
        f"averaged slope {result.averaged_slope:.4f}, averaged R^2 {result.averaged_r2:.4f} "
        f"over {len(result.per_group)} group(s)"
    )
    return 0


def _scatter_data(accuracies, metrics, result, args):
    ood = {rec.model_id: rec for rec in accuracies if rec.dataset_id == result.ood_dataset}
    if result.x_spec == regression.ID_ACCURACY:
        id_dataset = regression._resolve_id_dataset(accuracies, result.ood_dataset, args.id_dataset)
        xs = {
            rec.model_id: regression.probit(rec.accuracy)
            for rec in accuracies
            if rec.dataset_id == id_dataset
        }
    else:
        xs = {}
        for m in metrics:
            if m.metric_name == result.x_spec:
                xs[m.model_id] = (
                    regression.probit(m.value) if result.x_transform == "probit" else m.value
                )
    points = []
    for model_id in sorted(ood):
        if model_id not in xs:
            continue
        rec = ood[model_id]
        lo, hi = regression.clopper_pearson(rec.correct, rec.total)
        points.append(
            (
                xs[model_id],
                regression.probit(rec.accuracy),
                str(getattr(rec, args.group_by)),
                (regression.probit(lo), regression.probit(hi)),
            )
        )
    lines = [(f.group, f.slope, f.intercept, f.r_squared) for f in result.per_group]
    return points, lines


def cmd_report(args) -> int:
    per_path, footer = tables.read_path_metrics(args.metrics)
    lines = ["# Robustness metrics report", ""]
    lines.append(f"Paths analyzed: {len(per_path)}")
    if "hff_threshold_k" in footer:
        lines.append(f"HFF threshold bin: {footer['hff_threshold_k'][0]}")
    lines.append("")
    lines.append("| metric | mean | sample std | 95% CI |")
    lines.append("|---|---|---|---|")
    for col, name in ((0, "HFF"), (1, "CD")):
        mean = footer.get("mean", ("", ""))[col]
        std = footer.get("sample_std", ("", ""))[col]
        lo = footer.get("ci95_low", ("", ""))[col]
        hi = footer.get("ci95_high", ("", ""))[col]
        lines.append(f"| {name} | {mean} | {std} | [{lo}, {hi}] |")
    lines.append("")

    if args.fit:
        with open(args.fit, newline="") as fh:
            rows = list(csv.DictReader(fh))
        lines.append("## Probit-domain regression")
        lines.append("")
        if rows:
            lines.append(f"Predictor: {rows[0]['x_spec']} ({rows[0]['x_transform']}); "
                         f"OOD dataset: {rows[0]['ood_dataset']}")
            lines.append("")
        lines.append("| group | n | slope | intercept | R^2 | status |")
        lines.append("|---|---|---|---|---|---|")
        for row in rows:
            lines.append(
                f"| {row['group']} | {row['n_models']} | {row['slope']} | "
                f"{row['intercept']} | {row['r2']} | {row['status']} |"
            )
        lines.append("")

    with open(args.out, "wb") as fh:
        fh.write("\n".join(lines).encode("utf-8"))
    print(f"wrote report to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
