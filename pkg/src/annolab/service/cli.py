"""Command-line front door for the whole toolchain.

Exit codes: 0 success, 1 validation error, 2 I/O error. Every subcommand
with randomness takes --seed.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from .. import campaign, resolve as resolve_mod
from ..agreement import AnnotationMatrix, agreement_report, pair_confusion
from ..flagging import ScoreBoard, ScoreError, read_scores_jsonl, reports_to_json, reports_to_tsv
from ..models import features as feats
from ..models import train as train_mod
from ..store import CorpusStore, StoreError, ValidationError, read_postings_jsonl


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, StoreError, ScoreError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
@click.option("--store", "store_dir", type=click.Path(), default="store", show_default=True)
@click.pass_context
def main(ctx, store_dir):
    ctx.obj = store_dir


def open_store(ctx) -> CorpusStore:
    return CorpusStore(ctx.obj)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--dedupe/--no-dedupe", default=False)
@click.pass_context
@handle_errors
def ingest(ctx, path, dedupe):
    """Ingest postings from a JSON-lines file."""
    store = open_store(ctx)
    count = store.ingest_postings(read_postings_jsonl(path), dedupe=dedupe)
    click.echo(f"ingested {count} postings")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option(
    "--mode",
    type=click.Choice(["random", "top_positive", "near_boundary"]),
    default="random",
)
@click.option("--epsilon", type=float, default=0.1)
@click.pass_context
@handle_errors
def sample(ctx, n, seed, mode, epsilon):
    """Sample posting ids for a new round."""
    store = open_store(ctx)
    if mode == "random":
        ids = store.sample_random(n, seed)
    else:
        ids = store.sample_preclassified(mode, n, epsilon)
    for pid in ids:
        click.echo(pid)


@main.command("round-create")
@click.option("--kind", type=click.Choice(["calibration", "regular"]), default="regular")
@click.option("--postings", "postings_file", type=click.Path(exists=True), default=None,
              help="File with one posting id per line; defaults to a random sample.")
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0)
@click.pass_context
@handle_errors
def round_create(ctx, kind, postings_file, n, k, seed):
    """Create an annotation round."""
    store = open_store(ctx)
    if postings_file:
        with open(postings_file, encoding="utf-8") as fh:
            posting_ids = [line.strip() for line in fh if line.strip()]
    else:
        posting_ids = store.sample_random(n, seed)
    active = {a.id for a in store.active_annotators()}
    if kind == "calibration":
        rnd = campaign.create_calibration_round(store, posting_ids, active)
    else:
        rnd = campaign.create_round(store, posting_ids, active, k=k, seed=seed)
    click.echo(f"created {rnd.id} ({rnd.kind}) with {len(rnd.posting_ids)} postings, "
               f"annotators: {', '.join(sorted(rnd.annotator_ids))}")


@main.command("batch-export")
@click.option("--round", "round_id", required=True)
@click.option("--annotator", "annotator_id", required=True)
@click.option("--out", type=click.Path(), required=True)
@click.pass_context
@handle_errors
def batch_export(ctx, round_id, annotator_id, out):
    """Write an annotator's batch CSV."""
    store = open_store(ctx)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        rows = campaign.export_batch(store, round_id, annotator_id, fh)
    click.echo(f"wrote {rows} rows to {out}")


@main.command("batch-import")
@click.argument("path", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--annotator", "annotator_id", required=True)
@click.pass_context
@handle_errors
def batch_import(ctx, path, round_id, annotator_id):
    """Import a filled batch CSV."""
    store = open_store(ctx)
    with open(path, encoding="utf-8", newline="") as fh:
        annotations = campaign.import_batch(store, fh, annotator_id, round_id)
    click.echo(f"imported {len(annotations)} annotations")


@main.command()
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
@handle_errors
def stats(ctx, fmt):
    """Agreement report (json) or the pair table (csv)."""
    store = open_store(ctx)
    matrix = AnnotationMatrix.from_store(store)
    if fmt == "json":
        click.echo(agreement_report(matrix).to_json(indent=2))
    else:
        click.echo(pair_confusion(matrix).to_csv(), nl=False)


@main.command()
@click.option("--strategy", type=click.Choice(list(resolve_mod.STRATEGIES)), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--resolve-first", is_flag=True, default=False,
              help="Binarize the resolved label instead of majority-of-binarized.")
@click.pass_context
@handle_errors
def resolve(ctx, strategy, out, resolve_first):
    """Resolve gold labels for every annotated posting."""
    store = open_store(ctx)
    records = resolve_mod.build_gold(store, strategy, resolve_first)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(resolve_mod.GOLD_COLUMNS) + "\n")
        for rec in records:
            text = store.postings[rec.posting_id].text.replace("\t", " ").replace("\n", " ")
            fh.write(f"{rec.posting_id}\t{text}\t{rec.gold_label}\t{rec.gold_binary}\n")
    click.echo(f"resolved {len(records)} gold records to {out}")


@main.command()
@click.option("--gold", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--dev-frac", type=float, default=0.10, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["tsv", "jsonl"]), default="tsv")
@click.pass_context
@handle_errors
def folds(ctx, gold, k, dev_frac, seed, out_dir, fmt):
    """Build stratified CV folds and export train/dev/test files."""
    store = open_store(ctx)
    records = resolve_mod.read_gold_tsv(gold)
    plan = resolve_mod.stratified_folds(records, k=k, dev_frac=dev_frac, seed=seed)
    for warning in plan.warnings:
        click.echo(f"warning: {warning}", err=True)
    paths = resolve_mod.export_training_set(store, records, plan, out_dir, fmt=fmt)
    click.echo(f"wrote {len(paths)} files to {out_dir}")


def _load_dataset(features, gold):
    if features in feats.SYNTHETIC:
        return feats.SYNTHETIC[features]()
    table = feats.load_features(features)
    records = resolve_mod.read_gold_tsv(gold)
    ids = [r.posting_id for r in records if r.posting_id in table]
    missing = [r.posting_id for r in records if r.posting_id not in table]
    if missing:
        raise ValidationError(f"no features for postings: {missing[:3]}")
    X = np.stack([table[pid] for pid in ids])
    by_id = {r.posting_id: r for r in records}
    y = np.array([by_id[pid].gold_label for pid in ids])
    return X, y, ids


@main.command()
@click.option("--kind", type=click.Choice(list(train_mod.heads.MODEL_KINDS)), required=True)
@click.option("--features", required=True,
              help="Feature file (jsonl/tsv) or one of: " + ", ".join(feats.SYNTHETIC))
@click.option("--gold", type=click.Path(exists=True), default=None)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--warmup-steps", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default="checkpoint.json", show_default=True)
@click.option("--history", type=click.Path(), default=None)
@click.pass_context
@handle_errors
def train(ctx, kind, features, gold, epochs, lr, hidden, batch_size, warmup_steps, seed, out, history):
    """Train a classification head on feature vectors."""
    if features not in feats.SYNTHETIC and gold is None:
        raise ValidationError("--gold is required with a feature file")
    X, y, _ids = _load_dataset(features, gold)
    config = train_mod.TrainConfig(
        learning_rate=lr,
        batch_size=batch_size,
        warmup_steps=warmup_steps,
        epochs=epochs,
        seed=seed,
        hidden=hidden,
    )
    model = train_mod.train(X, y, kind, config)
    train_mod.save_checkpoint(model, out)
    if history:
        with open(history, "w", encoding="utf-8") as fh:
            json.dump(model.loss_history, fh)
    click.echo(f"trained {kind} for {epochs} epochs; final loss {model.loss_history[-1]:.6f}"
               if model.loss_history else f"saved untrained {kind} model")
    click.echo(f"checkpoint: {out}")


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--features", required=True)
@click.option("--gold", type=click.Path(exists=True), default=None)
@click.option("--head", type=click.Choice(["binary", "ordinal"]), default=None)
@click.pass_context
@handle_errors
def evaluate(ctx, checkpoint, features, gold, head):
    """Evaluate a checkpoint: accuracy and F1-macro."""
    if features not in feats.SYNTHETIC and gold is None:
        raise ValidationError("--gold is required with a feature file")
    X, y, _ids = _load_dataset(features, gold)
    model = train_mod.load_checkpoint(checkpoint)
    acc, f1 = train_mod.evaluate(model, X, y, head=head)
    click.echo(json.dumps({"accuracy": acc, "f1_macro": f1}))


@main.command("grad-check")
@click.option("--kind", type=click.Choice(list(train_mod.heads.MODEL_KINDS)), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--step", type=float, default=1e-5, show_default=True)
@click.pass_context
@handle_errors
def grad_check(ctx, kind, seed, step):
    """Verify analytic gradients against central differences."""
    err = train_mod.grad_check(kind, seed=seed, h=step)
    click.echo(f"max relative error: {err:.3e}")
    if err > 1e-5:
        sys.exit(1)


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--tau-post", type=float, default=0.5, show_default=True)
@click.option("--tau-forum", type=float, default=0.10, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv")
@click.pass_context
@handle_errors
def flag(ctx, scores_path, tau_post, tau_forum, fmt):
    """Per-forum positive rates and flag decisions from a score file."""
    board = ScoreBoard()
    board.ingest(read_scores_jsonl(scores_path))
    reports = board.flag_forums(tau_post=tau_post, tau_forum=tau_forum)
    click.echo(
        reports_to_tsv(reports) if fmt == "tsv" else reports_to_json(reports), nl=False
    )
    click.echo()


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True, envvar="ANNOLAB_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="ANNOLAB_PORT")
@click.option("--tokens", "tokens_path", type=click.Path(exists=True), required=True,
              envvar="ANNOLAB_TOKENS")
@click.option("--scores", "scores_path", type=click.Path(), default=None,
              envvar="ANNOLAB_SCORES")
@click.option("--ui-dir", type=click.Path(), default=None, envvar="ANNOLAB_UI_DIR")
@click.pass_context
@handle_errors
def serve(ctx, host, port, tokens_path, scores_path, ui_dir):
    """Run the HTTP API (and the web UI, when a bundle directory is given)."""
    import uvicorn

    from .app import create_app, load_tokens

    store = open_store(ctx)
    board = ScoreBoard(scores_path)
    app = create_app(store, load_tokens(tokens_path), board, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
