"""Figure and table rendering for the CLI report paths."""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .io import atomic_write_bytes, atomic_write_text


def _save_fig(fig, path: str | Path) -> None:
    buf = _io.BytesIO()
    fig.savefig(buf, format="png", dpi=110, bbox_inches="tight")
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def stats_figures(stats: dict, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    written = []

    fig, ax = plt.subplots(figsize=(6, 3.5))
    items = sorted(stats["qtype_counts"].items())
    ax.bar([k for k, _ in items], [v for _, v in items], color="#4878a8")
    ax.set_xlabel("question type")
    ax.set_ylabel("pairs")
    ax.set_title("QA pairs per question type")
    path = out_dir / "figures" / "qtype_distribution.png"
    _save_fig(fig, path)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    items = sorted(((int(k), v) for k, v in stats["answer_length_hist"].items()))
    ax.bar([k for k, _ in items], [v for _, v in items], color="#6aa66a")
    ax.set_xlabel("answer length (tokens)")
    ax.set_ylabel("answers")
    ax.set_title("Answer length distribution")
    path = out_dir / "figures" / "answer_lengths.png"
    _save_fig(fig, path)
    written.append(path)

    if stats["numeric_value_hist"]:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        items = sorted(((int(k), v) for k, v in stats["numeric_value_hist"].items()))
        ax.bar([k for k, _ in items], [v for _, v in items], color="#b0713f")
        ax.set_xlabel("embedded count value")
        ax.set_ylabel("occurrences")
        ax.set_title("Numeric answer values")
        path = out_dir / "figures" / "count_values.png"
        _save_fig(fig, path)
        written.append(path)
    return written


def loss_curve_figure(history: list[dict], out_dir: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.5, 3.8))
    steps = [h["step"] for h in history]
    ax.plot(steps, [h["gen_loss"] for h in history], label="generation loss")
    ax.plot(steps, [h["count_loss"] for h in history], label="count loss")
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_title("Training losses")
    ax.legend()
    ax2 = ax.twinx()
    ax2.plot(steps, [h["lr"] for h in history], color="gray", alpha=0.5, linestyle="--")
    ax2.set_ylabel("learning rate")
    path = Path(out_dir) / "figures" / "loss_curve.png"
    _save_fig(fig, path)
    return path


def mc_report_figure(accuracy: dict, rmse: dict | None, out_dir: str | Path) -> Path:
    n_panels = 2 if rmse else 1
    fig, axes = plt.subplots(1, n_panels, figsize=(5.5 * n_panels, 3.8))
    if n_panels == 1:
        axes = [axes]
    items = sorted(accuracy["per_qtype"].items())
    axes[0].bar([k for k, _ in items], [v for _, v in items], color="#4878a8")
    axes[0].axhline(accuracy["overall"], color="black", linestyle=":", label="overall")
    axes[0].set_ylabel("accuracy (%)")
    axes[0].set_title("Exact-match accuracy per question type")
    axes[0].legend()
    if rmse:
        items = sorted(rmse["per_qtype"].items())
        axes[1].bar([k for k, _ in items], [v for _, v in items], color="#b0713f")
        axes[1].set_ylabel("RMSE")
        axes[1].set_title("Counting RMSE per question type")
    path = Path(out_dir) / "figures" / "mc_report.png"
    _save_fig(fig, path)
    return path


def oe_report_figure(report: dict, out_dir: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.8))
    keys = ["bleu1", "bleu2", "bleu3", "bleu4", "rouge_l"]
    ax.bar(keys, [report[k] for k in keys], color="#4878a8")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"Caption metrics (CIDEr = {report['cider']:.3f})")
    path = Path(out_dir) / "figures" / "oe_report.png"
    _save_fig(fig, path)
    return path


def text_table(rows: list[tuple[str, str]], title: str) -> str:
    """A fixed-width two-column table."""
    width = max(len(name) for name, _ in rows)
    lines = [title, "=" * len(title)]
    for name, value in rows:
        lines.append(f"{name.ljust(width)}  {value}")
    return "\n".join(lines) + "\n"
