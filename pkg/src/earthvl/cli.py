"""Command-line interface.

Subcommands cover the full desk-scale loop: synthesize scenes, generate QA,
augment, summarize, train the toy model, predict, and evaluate. All outputs
are written atomically; report paths render PNG figures next to the JSON,
JSONL, and CSV files. Exit codes: 0 success, 2 invalid input, 3 runtime
failure; failures emit a one-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path
import sys

import numpy as np

from . import augment as aug
from . import io as eio
from . import report
from .config import RunConfig, load_config
from .errors import EarthVLError, ValidationError
from .metrics import (
    McRecord,
    OeRecord,
    answer_distribution_stats,
    caption_report,
    overall_accuracy,
    rmse_counting,
)
from .qa import SceneMeta, generate_qa
from .synth import generate_mask, random_spec
from .text import extract_numbers


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args, load_config(args.config))
        return 0
    except ValidationError as exc:
        _emit_error(exc, argv)
        return 2
    except EarthVLError as exc:
        _emit_error(exc, argv)
        return 3
    except (OSError, json.JSONDecodeError) as exc:
        _emit_error(exc, argv)
        return 3


def _emit_error(exc: Exception, argv: list[str]) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "command": argv}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="earthvl", description=__doc__)
    parser.add_argument("--config", default=None, help="path to a JSON run config")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate random synthetic scenes")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--size", type=int, default=64)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gen-qa", help="generate the QA corpus for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_qa)

    p = sub.add_parser("augment", help="write a transformed copy of a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hflip", action="store_true")
    p.add_argument("--vflip", action="store_true")
    p.add_argument("--rot90", action="store_true")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", help="summarize a QA corpus")
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-toy", help="train the toy model on a QA corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--qtypes", default=None, help="comma-separated filter, e.g. BC,CC")
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("predict", help="greedy-decode answers with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval-mc", help="accuracy and counting RMSE of predictions")
    p.add_argument("--qa", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_mc)

    p = sub.add_parser("eval-open", help="caption metrics of open-ended predictions")
    p.add_argument("--refs", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_open)

    return parser


# ---------------------------------------------------------------------------


def cmd_synth(args, cfg: RunConfig) -> None:
    out = Path(args.out)
    if args.n < 1:
        raise ValidationError(f"--n must be >= 1, got {args.n}")
    rng = np.random.default_rng(cfg.seed)
    entries = []
    inventories = {}
    for i in range(args.n):
        image_id = f"img-{i:04d}"
        spec = random_spec(rng, height=args.size, width=args.size)
        mask, inventory = generate_mask(spec, seed=cfg.seed * 100003 + i)
        eio.save_mask(out / "masks" / f"{image_id}.png", mask)
        eio.save_image(out / "images" / f"{image_id}.png", eio.render_image(mask))
        road_tags = {str(k): "main" for k in range(inventory["n_roads"])}
        eio.write_json(out / "meta" / f"{image_id}.json", {"road_tags": road_tags})
        inventories[image_id] = inventory
        entries.append(
            eio.ManifestEntry(
                image_id=image_id,
                mask_path=f"masks/{image_id}.png",
                image_path=f"images/{image_id}.png",
                meta_path=f"meta/{image_id}.json",
            )
        )
    manifest = eio.Manifest(entries=entries, resolution_m=cfg.resolution_m)
    eio.save_manifest(out / "manifest.json", manifest)
    eio.write_json(out / "inventory.json", inventories)
    print(f"wrote {args.n} scenes to {out}")


def _load_scene_meta(base: Path, entry: eio.ManifestEntry) -> SceneMeta | None:
    if entry.meta_path is None:
        return None
    payload = eio.read_json(base / entry.meta_path)
    return SceneMeta(
        road_tags=dict(payload.get("road_tags", {})),
        notes=dict(payload.get("notes", {})),
    )


def cmd_gen_qa(args, cfg: RunConfig) -> None:
    manifest_path = Path(args.manifest)
    manifest = eio.load_manifest(manifest_path)
    base = manifest_path.parent
    pairs = []
    for entry in manifest.entries:
        mask = eio.load_mask(base / entry.mask_path, manifest.resolution_m)
        meta = _load_scene_meta(base, entry)
        pairs.extend(generate_qa(mask, entry.image_id, meta, cfg.thresholds))
    eio.qa_to_jsonl(args.out, pairs)
    print(f"wrote {len(pairs)} QA pairs to {args.out}")


def cmd_augment(args, cfg: RunConfig) -> None:
    ops = []
    if args.hflip:
        ops.append("hflip")
    if args.vflip:
        ops.append("vflip")
    if args.rot90:
        ops.append("rot90cw")
    if not ops:
        raise ValidationError("augment requires at least one of --hflip --vflip --rot90")
    transform = aug.GeoTransform(tuple(ops))
    suffix = "@" + transform.name

    manifest_path = Path(args.manifest)
    manifest = eio.load_manifest(manifest_path)
    base = manifest_path.parent
    by_image: dict[str, list] = {}
    for pair in eio.qa_from_jsonl(args.qa):
        by_image.setdefault(pair.image_id, []).append(pair)

    out = Path(args.out)
    entries = []
    all_pairs = []
    for entry in manifest.entries:
        mask = eio.load_mask(base / entry.mask_path, manifest.resolution_m)
        pairs = by_image.get(entry.image_id, [])
        new_mask, new_pairs = aug.augment_sample(mask, pairs, transform)
        image_id = entry.image_id + suffix
        eio.save_mask(out / "masks" / f"{image_id}.png", new_mask)
        for pair in new_pairs:
            pair.image_id = image_id
            pair.qid = pair.qid.replace(entry.image_id, image_id, 1)
        all_pairs.extend(new_pairs)
        entries.append(
            eio.ManifestEntry(image_id=image_id, mask_path=f"masks/{image_id}.png", split=entry.split)
        )
    eio.save_manifest(out / "manifest.json", eio.Manifest(entries, manifest.resolution_m))
    eio.qa_to_jsonl(out / "qa.jsonl", all_pairs)
    print(f"wrote {len(entries)} transformed scenes to {out}")


def cmd_stats(args, cfg: RunConfig) -> None:
    pairs = eio.qa_from_jsonl(args.qa)
    stats = answer_distribution_stats(pairs)
    out = Path(args.out)
    eio.write_json(out / "stats.json", stats)
    rows = [
        [qt, answer, count]
        for qt, answers in stats["answers_per_qtype"].items()
        for answer, count in answers.items()
    ]
    report.write_csv(out / "stats.csv", ["qtype", "answer", "count"], rows)
    if not args.no_figures:
        report.stats_figures(stats, out)
    print(f"wrote stats for {stats['n_pairs']} pairs to {out}")


def _load_dataset(manifest_path: str, qa_path: str, qtypes: str | None):
    manifest = eio.load_manifest(Path(manifest_path))
    base = Path(manifest_path).parent
    masks = {
        e.image_id: eio.load_mask(base / e.mask_path, manifest.resolution_m)
        for e in manifest.entries
    }
    wanted = set(qtypes.split(",")) if qtypes else None
    pairs = [
        p
        for p in eio.qa_from_jsonl(qa_path)
        if (wanted is None or p.qtype in wanted)
    ]
    missing = sorted({p.image_id for p in pairs} - set(masks))
    if missing:
        raise ValidationError(f"QA refers to images absent from manifest: {missing[:5]}")
    return masks, pairs


def cmd_train_toy(args, cfg: RunConfig) -> None:
    import torch

    from .model.training import (
        build_sample,
        save_checkpoint,
        train_toy,
        vocab_for_pairs,
    )
    from .model.net import EarthVLNet

    masks, pairs = _load_dataset(args.manifest, args.qa, args.qtypes)
    if not pairs:
        raise ValidationError("no QA pairs selected for training")
    torch.manual_seed(cfg.seed)
    vocab = vocab_for_pairs(pairs, cfg.loss)
    model = EarthVLNet(cfg.model, cfg.loss, vocab)
    samples = [build_sample(masks[p.image_id], p, vocab, cfg.loss) for p in pairs]
    out = Path(args.out)
    history = train_toy(
        model, samples, cfg.train, cfg.loss, cfg.seed, log_path=out / "train_log.jsonl"
    )
    save_checkpoint(out / "checkpoint.pt", model, cfg.seed)
    eio.write_json(out / "run_config.json", cfg.to_dict())
    report.loss_curve_figure(history, out)
    final = history[-1]
    print(
        f"trained {len(samples)} samples for {len(history)} steps; "
        f"final gen_loss={final['gen_loss']:.4f} count_loss={final['count_loss']:.4f}"
    )


def cmd_predict(args, cfg: RunConfig) -> None:
    from .model.training import load_checkpoint, image_tensor

    import torch

    model, _, _ = load_checkpoint(args.checkpoint)
    masks, pairs = _load_dataset(args.manifest, args.qa, None)
    records = []
    for pair in pairs:
        mask = masks[pair.image_id]
        image = image_tensor(mask)
        gt = torch.from_numpy(mask.grid.astype("int64"))
        answer = model.greedy_answer(image, pair.question, gt_mask=gt)
        records.append({"qid": pair.qid, "answer": answer})
    eio.write_jsonl(args.out, records)
    print(f"wrote {len(records)} predictions to {args.out}")


def _load_predictions(path: str) -> dict[str, str]:
    preds = {}
    for rec in eio.read_jsonl(path):
        if "qid" not in rec or "answer" not in rec:
            raise ValidationError(f"prediction record needs qid and answer: {rec}")
        if rec["qid"] in preds:
            raise ValidationError(f"duplicate prediction for qid {rec['qid']}")
        preds[rec["qid"]] = rec["answer"]
    return preds


def cmd_eval_mc(args, cfg: RunConfig) -> None:
    pairs = eio.qa_from_jsonl(args.qa)
    preds = _load_predictions(args.pred)
    records = []
    scoreable = []
    n_unparsed = 0
    for pair in pairs:
        if pair.qid not in preds:
            raise ValidationError(f"missing prediction for qid {pair.qid}")
        predicted = preds[pair.qid]
        y_pr = y_gt = None
        if pair.numbers:
            pred_numbers = extract_numbers(predicted)
            if pred_numbers:
                y_gt = float(pair.numbers[0])
                y_pr = float(pred_numbers[0])
            else:
                # An answer with no parseable count is wrong for accuracy but
                # cannot enter the RMSE pool; report it instead of guessing.
                n_unparsed += 1
        record = McRecord(
            qid=pair.qid,
            qtype=pair.qtype,
            predicted=predicted,
            reference=pair.answer,
            y_pr=y_pr,
            y_gt=y_gt,
        )
        records.append(record)
        if y_gt is not None:
            scoreable.append(record)
    accuracy = overall_accuracy(records)
    rmse = rmse_counting(scoreable) if scoreable else None

    out = Path(args.out)
    payload = {"accuracy": accuracy, "rmse": rmse, "n_unparsed": n_unparsed}
    eio.write_json(out / "report.json", payload)
    rows = [["overall", "accuracy_pct", accuracy["overall"]]]
    rows += [[qt, "accuracy_pct", v] for qt, v in accuracy["per_qtype"].items()]
    if rmse:
        rows.append(["overall", "rmse", rmse["overall"]])
        rows += [[qt, "rmse", v] for qt, v in rmse["per_qtype"].items()]
    report.write_csv(out / "report.csv", ["scope", "metric", "value"], rows)
    table = [("overall accuracy", f"{accuracy['overall']:.2f}%")]
    table += [(f"accuracy[{qt}]", f"{v:.2f}%") for qt, v in accuracy["per_qtype"].items()]
    if rmse:
        table.append(("overall rmse", f"{rmse['overall']:.4f}"))
        table += [(f"rmse[{qt}]", f"{v:.4f}") for qt, v in rmse["per_qtype"].items()]
    if n_unparsed:
        table.append(("predictions without a count", str(n_unparsed)))
    eio.atomic_write_text(out / "report.txt", report.text_table(table, "Closed-answer evaluation"))
    report.mc_report_figure(accuracy, rmse, out)
    print(report.text_table(table, "Closed-answer evaluation"))


def cmd_eval_open(args, cfg: RunConfig) -> None:
    preds = _load_predictions(args.pred)
    records = []
    for rec in eio.read_jsonl(args.refs):
        qid = rec.get("qid")
        if qid is None:
            raise ValidationError(f"reference record needs qid: {rec}")
        if "references" in rec:
            refs = tuple(rec["references"])
        elif "answer" in rec:
            refs = (rec["answer"],)
        else:
            raise ValidationError(f"reference record needs 'references' or 'answer': {rec}")
        if qid not in preds:
            raise ValidationError(f"missing prediction for qid {qid}")
        records.append(OeRecord(qid=qid, predicted=preds[qid], references=refs))
    result = caption_report(records)

    out = Path(args.out)
    eio.write_json(out / "report.json", result)
    rows = [[k, result[k]] for k in ("bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "cider")]
    report.write_csv(out / "report.csv", ["metric", "value"], rows)
    table = [
        (k, f"{result[k]:.4f}")
        for k in ("bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "cider")
    ]
    table.append(("empty predictions", str(result["n_empty_predictions"])))
    eio.atomic_write_text(out / "report.txt", report.text_table(table, "Open-ended evaluation"))
    report.oe_report_figure(result, out)
    print(report.text_table(table, "Open-ended evaluation"))


if __name__ == "__main__":
    sys.exit(main())
