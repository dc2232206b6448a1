"""overlapctl: end-to-end command line for the overlap analytics pipeline."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import click

from . import annotation_service, baseline_classifier, dataset_builder
from . import eval_metrics, experiment_harness, overlap_engine, synth, transcript_ingest


@click.group()
def main():
    """Turn-taking analytics: ingest transcripts, classify speaker switches,
    label overlaps, and train/evaluate interruption classifiers."""


def _parse_column_map(value: str | None) -> dict:
    if not value:
        return {}
    pairs = [kv.split("=", 1) for kv in value.split(",") if kv]
    return {k.strip(): v.strip() for k, v in pairs}


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--delimiter", default=",", show_default=True)
@click.option("--column-map", default=None, help="canonical=source pairs, comma-separated")
@click.option("--channel-map", default=None, help="source=channel pairs, comma-separated")
def ingest(input_path, out_path, delimiter, column_map, channel_map):
    """Parse transcript tables into the canonical turn file."""
    config = transcript_ingest.FormatConfig(
        delimiter=delimiter,
        columns=_parse_column_map(column_map),
        channel_map=_parse_column_map(channel_map),
    )
    paths = sorted(input_path.glob("*.csv")) if input_path.is_dir() else [input_path]
    dialogues = []
    for path in paths:
        with open(path, "rb") as fh:
            dialogues.extend(transcript_ingest.parse_transcript(fh, config))
    transcript_ingest.write_turns_jsonl(dialogues, out_path)
    click.echo(f"wrote {sum(len(d.turns) for d in dialogues)} turns "
               f"({len(dialogues)} dialogues) to {out_path}")


@main.command()
@click.option("--turns", "turns_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def pairs(turns_path, out_path):
    """Build classified switch events from a turn file."""
    dialogues = transcript_ingest.read_turns_jsonl(turns_path)
    events = [e for d in dialogues for e in overlap_engine.build_turn_pairs(d)]
    overlap_engine.write_events_jsonl(events, out_path)
    click.echo(f"wrote {len(events)} events to {out_path}")


@main.command("filter")
@click.option("--events", "events_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--min-overlap-ms", default=1000, show_default=True)
@click.option("--keep-unsuccessful", is_flag=True, default=False)
@click.option("--roles", default="agent,client", show_default=True)
def filter_cmd(events_path, out_path, min_overlap_ms, keep_unsuccessful, roles):
    """Apply the overlap filtration rules."""
    config = overlap_engine.FilterConfig(
        min_overlap_ms=min_overlap_ms,
        require_successful=not keep_unsuccessful,
        roles_kept=frozenset(r.strip() for r in roles.split(",") if r.strip()),
    )
    events = overlap_engine.read_events_jsonl(events_path)
    kept = overlap_engine.filter_overlaps(events, config)
    overlap_engine.write_events_jsonl(kept, out_path)
    click.echo(f"kept {len(kept)} of {len(events)} events -> {out_path}")


@main.command()
@click.option("--events", "events_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--labels", "labels_path", required=True, type=click.Path(path_type=Path))
@click.option("--turns", "turns_path", default=None, type=click.Path(exists=True, path_type=Path),
              help="turn file for context display (optional)")
@click.option("--static-dir", default=None, type=click.Path(path_type=Path))
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(events_path, labels_path, turns_path, static_dir, port, host):
    """Serve the annotation API and UI."""
    import uvicorn

    dialogues = transcript_ingest.read_turns_jsonl(turns_path) if turns_path else ()
    store = annotation_service.LabelStore(labels_path, dialogues)
    store.enqueue_candidates(overlap_engine.read_events_jsonl(events_path))
    app = annotation_service.create_app(store, static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command("export-labels")
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--events", "events_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def export_labels(labels_path, events_path, out_path):
    """Join the label log with events into labeled.jsonl."""
    events = {e.event_id: e for e in overlap_engine.read_events_jsonl(events_path)}
    n = annotation_service.export_labels_file(labels_path, events, out_path)
    click.echo(f"exported {n} labeled events to {out_path}")


@main.command()
@click.option("--labeled", "labeled_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--turns", "turns_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--variant", type=click.Choice(["interrupter", "both", "extended"]), default="both", show_default=True)
@click.option("--extension-width", default=8, show_default=True)
@click.option("--folds", default=10, show_default=True)
@click.option("--test-fold", default=9, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def dataset(labeled_path, turns_path, variant, extension_width, folds, test_fold, seed, out_path):
    """Build a fold-assigned model-input dataset from exported labels."""
    variant_name = {"interrupter": "interrupter_only", "both": "both_speakers", "extended": "extended"}[variant]
    labeled = annotation_service.read_labels_jsonl(labeled_path)
    events = {
        rec["event_id"]: overlap_engine.event_from_dict(rec["event"]) for rec in labeled
    }
    dialogues = transcript_ingest.read_turns_jsonl(turns_path)
    folded = dataset_builder.build_dataset(
        labeled,
        dialogues,
        events,
        dataset_builder.ContextVariant(variant_name, extension_width),
        n_folds=folds,
        test_fold=test_fold,
        seed=seed,
    )
    dataset_builder.write_dataset_jsonl(folded, out_path)
    click.echo(f"wrote {len(folded.inputs)} model inputs to {out_path}")


@main.command("train-baseline")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--folds", default=10, show_default=True)
@click.option("--test-fold", default=9, show_default=True)
@click.option("--ngrams", default="1,2", show_default=True)
@click.option("--min-df", default=2, show_default=True)
@click.option("--lr", default=0.1, show_default=True)
@click.option("--l2", default=1e-4, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--include-test-fold", is_flag=True, default=False,
              help="train on all folds instead of excluding the test fold")
def train_baseline(dataset_path, out_path, folds, test_fold, ngrams, min_df, lr, l2, epochs, include_test_fold):
    """Train the native bag-of-n-grams logistic regression."""
    folded = dataset_builder.read_dataset_jsonl(dataset_path, n_folds=folds, test_fold=test_fold)
    inputs = folded.inputs if include_test_fold else [
        x for x in folded.inputs if x.fold != test_fold
    ]
    lo, hi = (int(v) for v in ngrams.split(","))
    model, vocab = baseline_classifier.train_on_inputs(
        inputs, ngram_range=(lo, hi), min_df=min_df,
        l2_lambda=l2, learning_rate=lr, max_epochs=epochs,
    )
    baseline_classifier.save_model(model, vocab, out_path)
    click.echo(f"trained on {len(inputs)} inputs ({vocab.size} features), "
               f"final loss {model.training_log[-1]:.4f} -> {out_path}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--fold", "only_fold", default=None, type=int, help="score only this fold")
def score(model_path, dataset_path, out_path, only_fold):
    """Score a dataset with a trained baseline model."""
    model, vocab = baseline_classifier.load_model(model_path)
    folded = dataset_builder.read_dataset_jsonl(dataset_path)
    inputs = folded.inputs if only_fold is None else [
        x for x in folded.inputs if x.fold == only_fold
    ]
    scores = baseline_classifier.score_inputs(inputs, model, vocab)
    with open(out_path, "w", encoding="utf-8") as fh:
        for item, s in zip(inputs, scores):
            fh.write(json.dumps({
                "event_id": item.event_id,
                "fold": item.fold,
                "label": item.label,
                "score": s,
            }, ensure_ascii=False) + "\n")
    click.echo(f"scored {len(inputs)} inputs -> {out_path}")


@main.command("eval")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--criterion", type=click.Choice(["f1_macro", "balanced_accuracy"]), default="f1_macro", show_default=True)
def eval_cmd(scores_path, out_path, criterion):
    """Compute the metric report for a score file."""
    scores, labels = [], []
    raw = Path(scores_path).read_bytes()
    for line in raw.decode("utf-8").splitlines():
        if line.strip():
            obj = json.loads(line)
            scores.append(float(obj["score"]))
            labels.append(1 if obj["label"] == "competitive" else 0)
    report = eval_metrics.metrics_report(scores, labels, criterion=criterion)
    payload = report.to_dict()
    payload["provenance"] = {
        "scores_file": str(scores_path),
        "scores_sha256": hashlib.sha256(raw).hexdigest()[:16],
        "criterion": criterion,
        "n_examples": len(scores),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    click.echo(f"roc_auc={report.roc_auc:.4f} f1_macro={report.f1_macro:.4f} -> {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--trainer-cmd", default=None, help="overrides the config's trainer locator")
@click.option("--folds", default=10, show_default=True)
@click.option("--test-fold", default=9, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def experiment(config_path, dataset_path, trainer_cmd, folds, test_fold, out_path):
    """Run a learning-rate grid experiment against a trainer backend."""
    config = experiment_harness.load_experiment_config(config_path)
    if trainer_cmd:
        config.trainer = trainer_cmd
    if not config.trainer:
        raise click.UsageError("no trainer backend: set it in the config or via --trainer-cmd")
    folded = dataset_builder.read_dataset_jsonl(dataset_path, n_folds=folds, test_fold=test_fold)
    report = experiment_harness.run_experiment(config, folded)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    for row in report["rows"]:
        click.echo(f"{row['row_label']}: roc_auc={row['roc_auc_binary']:.4f} "
                   f"f1_macro={row['f1_macro']:.4f}")
    click.echo(f"report -> {out_path}")


@main.command("synth")
@click.option("--spec", "spec_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--n-dialogues", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--noise-rate", default=None, type=float)
@click.option("--out-dir", required=True, type=click.Path(path_type=Path))
def synth_cmd(spec_path, n_dialogues, seed, noise_rate, out_dir):
    """Generate a synthetic corpus with hidden ground-truth labels."""
    kwargs = {}
    if spec_path:
        kwargs = json.loads(Path(spec_path).read_text("utf-8"))
    if n_dialogues is not None:
        kwargs["n_dialogues"] = n_dialogues
    if seed is not None:
        kwargs["seed"] = seed
    if noise_rate is not None:
        kwargs["noise_rate"] = noise_rate
    spec = synth.SynthSpec(**kwargs)
    dialogues, labels = synth.generate_synthetic_corpus(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    synth.write_corpus_csv(dialogues, out_dir / "transcript.csv")
    with open(out_dir / "ground_truth_labels.jsonl", "w", encoding="utf-8") as fh:
        for record in labels:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(dialogues)} dialogues and {len(labels)} ground-truth labels to {out_dir}")


if __name__ == "__main__":
    main()
