"""Command-line front end: synth, estimate, eval, apply.

Every command resolves its parameters from three layers, highest
precedence first: command-line flags, a JSON config file given with
``--config``, built-in defaults. ``--print-config`` emits the fully
resolved document (itself valid as a ``--config`` file) and exits.

Exit codes are a stable contract: 0 success, 2 configuration error,
3 I/O error, 4 domain error (bad data, degenerate inputs, mismatched
dimensions). All randomness is derived from the ``--seed`` value, so a
command run twice writes byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .artifacts import (
    artifact_from_estimate,
    canonical_json,
    dataset_fingerprint,
    load_artifact,
    load_planted_sidecar,
    planted_sidecar,
    save_artifact,
    write_json,
)
from .dataset import (
    BinEdges,
    binary_groups,
    load_labeled_latents,
    save_labeled_latents,
    split_bipolar,
)
from .errors import ConstantSeries, DimensionMismatch, EditvecError, InvalidConfig
from .estimators import (
    METHODS,
    estimate_binary_lda,
    estimate_bipolar,
    estimate_center_difference,
    estimate_discretized,
)
from .evaluation import (
    compare_directions,
    format_report_text,
    projection_strength_correlation,
    recovery_report,
)
from .semantics import fit_lambda
from .synthetic import (
    LABEL_MODELS,
    SyntheticConfig,
    generate_planted_dataset,
    holdout_uniforms,
)

DEFAULTS: dict[str, dict] = {
    "synth": {
        "dim": 8,
        "n": 200,
        "seed": 0,
        "slope": 0.1,
        "offset": 0.5,
        "noise_sigma": 0.05,
        "label_model": "linear_clipped",
        "output": None,
        "truth_output": None,
    },
    "estimate": {
        "input": None,
        "output": None,
        "method": "discretized",
        "feature_name": "feature",
        "edges": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        "low_quantile": 1.0 / 3.0,
        "high_quantile": 2.0 / 3.0,
        "epsilon": None,
        "holdout": 0.0,
        "seed": 0,
    },
    "eval": {
        "artifact": None,
        "artifact_b": None,
        "input": None,
        "truth": None,
        "output": None,
        "text": False,
        "spearman": False,
    },
    "apply": {
        "artifact": None,
        "input": None,
        "output": None,
        "scales": [1.0],
    },
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "synth": ("output",),
    "estimate": ("input", "output"),
    "eval": ("artifact", "input"),
    "apply": ("artifact", "input", "output"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="editvec",
        description=(
            "Estimate linear editing directions in latent spaces from "
            "scalar-annotated samples, then score, evaluate, and apply them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file of config keys (flags override it)")
        p.add_argument(
            "--print-config",
            action="store_const",
            const=True,
            default=None,
            help="print the fully resolved config as JSON and exit",
        )

    p = sub.add_parser("synth", help="generate a planted-direction dataset")
    common(p)
    p.add_argument("--dim", type=int, help="latent dimension")
    p.add_argument("--n", type=int, help="number of records")
    p.add_argument("--seed", type=int, help="64-bit unsigned RNG seed")
    p.add_argument("--slope", type=float, help="true label slope along the direction")
    p.add_argument("--offset", type=float, help="true label offset")
    p.add_argument("--noise-sigma", type=float, help="label noise standard deviation")
    p.add_argument("--label-model", choices=LABEL_MODELS, help="label generation model")
    p.add_argument("--output", help="dataset CSV path")
    p.add_argument(
        "--truth-output",
        help="ground-truth sidecar path (default: output with .truth.json suffix)",
    )

    p = sub.add_parser("estimate", help="estimate an editing direction from a dataset")
    common(p)
    p.add_argument("--input", help="dataset CSV path")
    p.add_argument("--output", help="direction artifact JSON path")
    p.add_argument("--method", choices=METHODS, help="estimation method")
    p.add_argument("--feature-name", help="name recorded in the artifact")
    p.add_argument(
        "--edges",
        nargs="+",
        help="bin edges for the discretized method, space- or comma-separated",
    )
    p.add_argument("--low-quantile", type=float, help="bipolar low-tail quantile")
    p.add_argument("--high-quantile", type=float, help="bipolar high-tail quantile")
    p.add_argument(
        "--epsilon", type=float, help="fixed ridge added to the within scatter (no escalation)"
    )
    p.add_argument("--holdout", type=float, help="fraction of records held out of training")
    p.add_argument("--seed", type=int, help="seed for the holdout selection")

    p = sub.add_parser("eval", help="evaluate one or two direction artifacts on a dataset")
    common(p)
    p.add_argument("--artifact", help="direction artifact JSON path")
    p.add_argument("--artifact-b", help="second artifact to compare against")
    p.add_argument("--input", help="dataset CSV path")
    p.add_argument("--truth", help="planted-truth sidecar for a recovery report")
    p.add_argument("--output", help="also write the report JSON here")
    p.add_argument(
        "--text",
        action="store_const",
        const=True,
        default=None,
        help="print an aligned text table instead of JSON",
    )
    p.add_argument(
        "--spearman",
        action="store_const",
        const=True,
        default=None,
        help="also report rank correlation",
    )

    p = sub.add_parser("apply", help="move latents along an estimated direction")
    common(p)
    p.add_argument("--artifact", help="direction artifact JSON path")
    p.add_argument("--input", help="dataset CSV path")
    p.add_argument("--output", help="edited-latents CSV path")
    p.add_argument(
        "--scales",
        nargs="+",
        help="edit scales, e.g. '--scales -2 -1 0 1 2' or '--scales=-2,-1,0,1,2'",
    )

    return parser


def _float_list(value, key: str) -> list[float]:
    if isinstance(value, str):
        tokens: list = [t for t in value.split(",") if t.strip() != ""]
    elif isinstance(value, (list, tuple)):
        tokens = []
        for item in value:
            if isinstance(item, str):
                tokens.extend(t for t in item.split(",") if t.strip() != "")
            else:
                tokens.append(item)
    else:
        raise InvalidConfig(f"{key}: expected a list of numbers, got {value!r}")
    out = []
    for tok in tokens:
        try:
            out.append(float(tok))
        except (TypeError, ValueError):
            raise InvalidConfig(f"{key}: {tok!r} is not a number") from None
    if not out:
        raise InvalidConfig(f"{key}: empty list")
    return out


def _as_int(value, key: str) -> int:
    if isinstance(value, bool):
        raise InvalidConfig(f"{key}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise InvalidConfig(f"{key}: expected an integer, got {value!r}")


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfig(f"{key}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InvalidConfig(f"{key}: must be finite, got {value!r}")
    return value


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file {path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidConfig(f"config file {path}: expected a JSON object")
    return doc


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, config file, and flags; validate; return the document."""
    defaults = DEFAULTS[command]
    resolved = dict(defaults)
    if getattr(args, "config", None):
        doc = _load_config_file(args.config)
        unknown = sorted(set(doc) - set(defaults))
        if unknown:
            raise InvalidConfig(f"unknown config keys for {command}: {unknown}")
        resolved.update(doc)
    for key in defaults:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
    _validate_config(command, resolved)
    return resolved


def _validate_config(command: str, cfg: dict) -> None:
    for key in REQUIRED[command]:
        if cfg[key] is None:
            raise InvalidConfig(f"{key}: required (pass --{key.replace('_', '-')})")
    if command == "synth":
        cfg["dim"] = _as_int(cfg["dim"], "dim")
        cfg["n"] = _as_int(cfg["n"], "n")
        cfg["seed"] = _as_int(cfg["seed"], "seed")
        if cfg["n"] < 1:
            raise InvalidConfig(f"n: must be a positive integer, got {cfg['n']}")
        if cfg["dim"] < 1:
            raise InvalidConfig(f"dim: must be a positive integer, got {cfg['dim']}")
        if cfg["seed"] < 0:
            raise InvalidConfig(f"seed: must be nonnegative, got {cfg['seed']}")
        for key in ("slope", "offset", "noise_sigma"):
            cfg[key] = _as_float(cfg[key], key)
        if cfg["label_model"] not in LABEL_MODELS:
            raise InvalidConfig(
                f"label_model: must be one of {LABEL_MODELS}, got {cfg['label_model']!r}"
            )
    elif command == "estimate":
        if cfg["method"] not in METHODS:
            raise InvalidConfig(f"method: must be one of {METHODS}, got {cfg['method']!r}")
        cfg["edges"] = _float_list(cfg["edges"], "edges")
        cfg["low_quantile"] = _as_float(cfg["low_quantile"], "low_quantile")
        cfg["high_quantile"] = _as_float(cfg["high_quantile"], "high_quantile")
        if cfg["epsilon"] is not None:
            cfg["epsilon"] = _as_float(cfg["epsilon"], "epsilon")
            if cfg["epsilon"] < 0.0:
                raise InvalidConfig(f"epsilon: must be nonnegative, got {cfg['epsilon']}")
        cfg["holdout"] = _as_float(cfg["holdout"], "holdout")
        if not 0.0 <= cfg["holdout"] < 1.0:
            raise InvalidConfig(f"holdout: must be in [0, 1), got {cfg['holdout']}")
        cfg["seed"] = _as_int(cfg["seed"], "seed")
        if cfg["seed"] < 0:
            raise InvalidConfig(f"seed: must be nonnegative, got {cfg['seed']}")
    elif command == "eval":
        for key in ("text", "spearman"):
            if not isinstance(cfg[key], bool):
                raise InvalidConfig(f"{key}: expected true or false, got {cfg[key]!r}")
    elif command == "apply":
        cfg["scales"] = _float_list(cfg["scales"], "scales")


def _summary_line(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, allow_nan=False) + "\n")


def cmd_synth(cfg: dict) -> int:
    synth_cfg = SyntheticConfig(
        dim=cfg["dim"],
        n_samples=cfg["n"],
        seed=cfg["seed"],
        slope=cfg["slope"],
        offset=cfg["offset"],
        noise_sigma=cfg["noise_sigma"],
        label_model=cfg["label_model"],
    )
    planted = generate_planted_dataset(synth_cfg)
    output = Path(cfg["output"])
    truth_path = (
        Path(cfg["truth_output"])
        if cfg["truth_output"]
        else output.with_suffix(".truth.json")
    )
    save_labeled_latents(planted.dataset, output)
    write_json(truth_path, planted_sidecar(planted))
    _summary_line(
        {
            "command": "synth",
            "output": str(output),
            "truth_output": str(truth_path),
            "n": len(planted.dataset),
            "dim": planted.dataset.dim,
            "seed": cfg["seed"],
            "label_model": cfg["label_model"],
            "clipped_fraction": planted.clipped_fraction,
        }
    )
    return 0


def _select_holdout(n: int, fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Deterministic holdout: rank records by their dedicated uniforms."""
    if fraction == 0.0:
        return list(range(n)), []
    k = int(fraction * n + 0.5)
    if k >= n:
        raise InvalidConfig(f"holdout: fraction {fraction} leaves no training records")
    if k == 0:
        return list(range(n)), []
    u = holdout_uniforms(seed, n)
    order = np.argsort(u, kind="stable")
    held = sorted(int(i) for i in order[:k])
    held_set = set(held)
    train = [i for i in range(n) if i not in held_set]
    return train, held


def cmd_estimate(cfg: dict) -> int:
    dataset = load_labeled_latents(cfg["input"])
    train_idx, held_idx = _select_holdout(len(dataset), cfg["holdout"], cfg["seed"])
    train = dataset.subset(train_idx) if held_idx else dataset
    policy = cfg["epsilon"]

    method = cfg["method"]
    bins = None
    quantiles = None
    if method == "binary_lda":
        direction = estimate_binary_lda(train, policy, cfg["feature_name"])
    elif method == "bipolar":
        quantiles = (cfg["low_quantile"], cfg["high_quantile"])
        direction = estimate_bipolar(
            train, cfg["low_quantile"], cfg["high_quantile"], policy, cfg["feature_name"]
        )
    elif method == "discretized":
        bins = tuple(cfg["edges"])
        direction = estimate_discretized(
            train, BinEdges(bins), policy, cfg["feature_name"]
        )
    else:
        # centers of the two label classes, or of the bipolar tails when
        # the labels are continuous
        if train.is_binary:
            groups = binary_groups(train)
        else:
            quantiles = (cfg["low_quantile"], cfg["high_quantile"])
            groups = split_bipolar(train, cfg["low_quantile"], cfg["high_quantile"])
        direction = estimate_center_difference(groups, train, cfg["feature_name"])

    model = fit_lambda(direction, train)
    try:
        training_correlation = projection_strength_correlation(direction, train)
    except ConstantSeries:
        training_correlation = None
    seed_info = {
        "seed": cfg["seed"],
        "holdout_fraction": cfg["holdout"],
        "holdout_ids": [dataset.ids[i] for i in held_idx],
        "n_train": len(train),
        "n_holdout": len(held_idx),
    }
    artifact = artifact_from_estimate(
        direction,
        model,
        bins=bins,
        quantiles=quantiles,
        training_set_fingerprint=dataset_fingerprint(train),
        seed_info=seed_info,
    )
    save_artifact(cfg["output"], artifact)
    _summary_line(
        {
            "command": "estimate",
            "method": method,
            "output": str(cfg["output"]),
            "eigenvalue": direction.eigenvalue,
            "epsilon_used": direction.epsilon_used,
            "lambda": model.lam,
            "intercept": model.intercept,
            "training_correlation": training_correlation,
            "n_train": len(train),
            "n_holdout": len(held_idx),
        }
    )
    return 0


def _check_dims(artifact, dataset) -> None:
    if artifact.dim != dataset.dim:
        raise DimensionMismatch(
            f"artifact dim {artifact.dim} does not match dataset dim {dataset.dim}"
        )


def _correlation_block(direction, dataset, with_spearman: bool) -> dict:
    block = {
        "feature_name": direction.feature_name,
        "method": direction.method,
        "correlation": projection_strength_correlation(direction, dataset),
    }
    if with_spearman:
        block["spearman"] = projection_strength_correlation(
            direction, dataset, method="spearman"
        )
    return block


def cmd_eval(cfg: dict) -> int:
    artifact = load_artifact(cfg["artifact"])
    dataset = load_labeled_latents(cfg["input"])
    _check_dims(artifact, dataset)
    direction = artifact.direction()

    report: dict = {
        "schema_version": 1,
        "kind": "evaluation_report",
        "dataset_fingerprint": dataset_fingerprint(dataset),
        "n_records": len(dataset),
        "primary": _correlation_block(direction, dataset, cfg["spearman"]),
        "secondary": None,
        "comparison": None,
        "recovery": None,
    }

    if cfg["artifact_b"]:
        artifact_b = load_artifact(cfg["artifact_b"])
        _check_dims(artifact_b, dataset)
        direction_b = artifact_b.direction()
        report["secondary"] = _correlation_block(direction_b, dataset, cfg["spearman"])
        comparison = compare_directions(direction, direction_b)
        report["comparison"] = {
            "cosine": comparison.cosine,
            "l2_raw": comparison.l2_raw,
            "l2_sign_aligned": comparison.l2_sign_aligned,
            "angle_degrees": comparison.angle_degrees,
        }

    if cfg["truth"]:
        planted, _ = load_planted_sidecar(cfg["truth"])
        if planted.shape[0] != dataset.dim:
            raise DimensionMismatch(
                f"planted dim {planted.shape[0]} does not match dataset dim {dataset.dim}"
            )
        holdout_ids = []
        n_train = 0
        if artifact.seed_info:
            holdout_ids = list(artifact.seed_info.get("holdout_ids") or [])
            n_train = int(artifact.seed_info.get("n_train") or 0)
        id_to_index = {rid: i for i, rid in enumerate(dataset.ids)}
        if holdout_ids and all(rid in id_to_index for rid in holdout_ids):
            scope = "recorded_holdout"
            eval_set = dataset.subset([id_to_index[rid] for rid in holdout_ids])
        else:
            scope = "full_dataset"
            eval_set = dataset
        recovery = recovery_report(direction, planted, eval_set, n_train)
        report["recovery"] = {
            "scope": scope,
            "cosine_to_planted": recovery.cosine_to_planted,
            "correlation_on_holdout": recovery.correlation_on_holdout,
            "n_train": recovery.n_train,
            "n_holdout": recovery.n_holdout,
            "method": recovery.method,
        }

    if cfg["output"]:
        write_json(cfg["output"], report)
    if cfg["text"]:
        sys.stdout.write(format_report_text(report) + "\n")
    else:
        sys.stdout.write(canonical_json(report))
    return 0


def cmd_apply(cfg: dict) -> int:
    artifact = load_artifact(cfg["artifact"])
    dataset = load_labeled_latents(cfg["input"])
    _check_dims(artifact, dataset)
    n_vec = np.array(artifact.n)
    scales = cfg["scales"]
    for s in scales:
        if not math.isfinite(s):
            raise InvalidConfig(f"scales: must be finite, got {s!r}")

    header = "id,scale," + ",".join(f"z{i}" for i in range(dataset.dim))
    lines = [header]
    for i in range(len(dataset)):
        for s in scales:
            edited = dataset.latents[i] + s * n_vec
            coords = ",".join(repr(float(v)) for v in edited)
            lines.append(f"{dataset.ids[i]},{repr(float(s))},{coords}")
    Path(cfg["output"]).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _summary_line(
        {
            "command": "apply",
            "output": str(cfg["output"]),
            "rows": len(dataset) * len(scales),
            "scales": [float(s) for s in scales],
            "feature_name": artifact.feature_name,
        }
    )
    return 0


RUNNERS = {
    "synth": cmd_synth,
    "estimate": cmd_estimate,
    "eval": cmd_eval,
    "apply": cmd_apply,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        cfg = resolve_config(args.command, args)
        if args.print_config:
            sys.stdout.write(canonical_json(cfg))
            return 0
        return RUNNERS[args.command](cfg)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except EditvecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
