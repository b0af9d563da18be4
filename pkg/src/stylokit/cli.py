"""Command-line interface.

Exit codes: 0 on success, 1 for usage errors (unknown flags, missing
arguments), 2 for data and processing errors. Human-readable output goes to
stdout; machine-readable artifacts are written to files named by --out, the
two are never mixed on one stream. Every randomized command echoes the seed
it used.
"""

from __future__ import annotations

import os
import random
import sys

import click

from stylokit import __version__, agreement, annotation, embedding, evalharness
from stylokit import corpus as corpus_mod
from stylokit import interpret
from stylokit import prompts as prompt_defs
from stylokit import stylevec, vocab
from stylokit._jsonl import atomic_write_text, write_json
from stylokit.errors import StylokitError


def _parse_config(path) -> dict[str, str]:
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}: line {lineno}: expected key=value")
            key, _, value = stripped.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def _cast_bool(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _cfg(ctx: click.Context, name: str, value, cast):
    """Resolve an option against the config file: explicit flags win, then
    `command.option` keys, then bare `option` keys, then the click default."""
    source = ctx.get_parameter_source(name)
    if source is not None and source.name != "DEFAULT":
        return value
    config = (ctx.obj or {}).get("config") or {}
    if not config:
        return value
    option = name.replace("_", "-")
    parts = []
    node = ctx
    while node.parent is not None:
        parts.append(node.info_name)
        node = node.parent
    command = "-".join(reversed(parts))
    for key in (f"{command}.{option}", option):
        if key in config:
            raw = config[key]
            try:
                return cast(raw) if cast is not _cast_bool else _cast_bool(raw)
            except (TypeError, ValueError):
                raise ValueError(f"config key {key!r}: cannot parse {raw!r}") from None
    return value


def _scorer_from_spec(spec: str, vocabulary):
    if spec == "lexical":
        return agreement.LexicalScorer()
    if spec.startswith("table:"):
        table = stylevec.ScoreTable.from_file(spec[len("table:"):])
        return stylevec.TableScorer(table, vocabulary)
    raise ValueError(f"unrecognized scorer spec {spec!r}; use 'lexical' or 'table:PATH'")


@click.group(name="stylokit")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="key=value defaults file; 'command.option' keys override bare 'option' keys")
@click.pass_context
def cli(ctx, config_path):
    """Interpretable style representations for author-attributed text."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _parse_config(config_path) if config_path else {}


@cli.command()
def version():
    """Print the package version."""
    click.echo(__version__)


@cli.group()
def corpus():
    """Corpus ingestion, sampling, and preprocessing."""


@corpus.command("ingest")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def corpus_ingest(in_path, out_path):
    """Validate a corpus file and write it back normalized."""
    loaded = corpus_mod.ingest_corpus(in_path)
    loaded.save(out_path)
    click.echo(f"documents: {len(loaded)}")
    click.echo(f"authors: {len(loaded.by_author)}")


@corpus.command("sample")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--authors", "n_authors", default=100, show_default=True, type=int)
@click.option("--posts", "posts_per_author", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.pass_context
def corpus_sample(ctx, in_path, out_path, n_authors, posts_per_author, seed):
    """Draw a seeded annotation subset of the corpus."""
    n_authors = _cfg(ctx, "n_authors", n_authors, int)
    posts_per_author = _cfg(ctx, "posts_per_author", posts_per_author, int)
    seed = _cfg(ctx, "seed", seed, int)
    loaded = corpus_mod.ingest_corpus(in_path)
    subset = corpus_mod.sample_annotation_subset(loaded, n_authors, posts_per_author, seed)
    subset.save(out_path)
    click.echo(f"seed: {seed}")
    click.echo(f"documents: {len(subset)}")
    click.echo(f"authors: {len(subset.by_author)}")


@corpus.command("preprocess")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def corpus_preprocess(in_path, out_path):
    """Alias emoji and truncate every document to 25 sentences."""
    loaded = corpus_mod.ingest_corpus(in_path)
    corpus_mod.preprocess_corpus(loaded).save(out_path)
    click.echo(f"documents: {len(loaded)}")


@cli.group()
def prompts():
    """Prompt template inspection."""


@prompts.command("list")
def prompts_list():
    """List every stage-1 prompt and the standardization prompt."""
    for sp in prompt_defs.stage1_prompts():
        name = sp.feature.name if sp.feature else sp.template.name
        click.echo(f"{sp.prompt_id}\t{sp.template.category}\t{name}")
    std = prompt_defs.standardization_template()
    click.echo(f"{std.prompt_id}\t{std.category}\t{std.name}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--client", "client_spec", required=True,
              help="completion client: 'replay:PATH' or an http(s) endpoint URL")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--cache-dir", default=None, type=click.Path(file_okay=False))
@click.option("--concurrency", default=1, show_default=True, type=int)
@click.option("--attempts", default=annotation.DEFAULT_RETRY_ATTEMPTS, show_default=True, type=int)
@click.pass_context
def annotate(ctx, corpus_path, client_spec, out_path, cache_dir, concurrency, attempts):
    """Annotate a corpus with the two-stage prompt protocol."""
    concurrency = _cfg(ctx, "concurrency", concurrency, int)
    cache_dir = _cfg(ctx, "cache_dir", cache_dir, str)
    loaded = corpus_mod.ingest_corpus(corpus_path)
    client = annotation.client_from_spec(client_spec)
    dataset = annotation.build_dataset(
        loaded, client, concurrency=concurrency, cache_dir=cache_dir, attempts=attempts
    )
    dataset.save(out_path)
    skipped = sum(r.skipped for r in dataset.records)
    click.echo(f"records: {len(dataset.records)}")
    click.echo(f"skipped: {skipped}")
    click.echo(f"distinct attributes: {len(dataset.distinct_attributes())}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--price-per-1k", default=annotation.DEFAULT_PRICE_PER_1K, show_default=True, type=float)
@click.option("--completion-tokens", default=annotation.DEFAULT_COMPLETION_TOKENS,
              show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.pass_context
def cost(ctx, corpus_path, price_per_1k, completion_tokens, out_path):
    """Estimate annotation cost for a corpus without spending anything."""
    price_per_1k = _cfg(ctx, "price_per_1k", price_per_1k, float)
    completion_tokens = _cfg(ctx, "completion_tokens", completion_tokens, int)
    loaded = corpus_mod.ingest_corpus(corpus_path)
    estimate = annotation.estimate_cost(loaded, price_per_1k, completion_tokens)
    click.echo(f"documents: {estimate.documents}")
    click.echo(f"prompts per document: {estimate.prompts_per_document}")
    click.echo(f"estimated tokens: {estimate.total_tokens}")
    click.echo(f"price per 1k tokens: ${estimate.price_per_1k}")
    click.echo(f"estimated cost: ${estimate.total_cost:,.2f}")
    if out_path:
        write_json(out_path, {
            "documents": estimate.documents,
            "prompts_per_document": estimate.prompts_per_document,
            "total_tokens": estimate.total_tokens,
            "price_per_1k": estimate.price_per_1k,
            "total_cost": estimate.total_cost,
        })


@cli.command("vocab")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dims", default=vocab.DEFAULT_DIMENSION, show_default=True, type=int)
@click.option("--dedup-threshold", default=vocab.DEFAULT_DEDUP_THRESHOLD, show_default=True, type=float)
@click.option("--min-authors", default=vocab.DEFAULT_MIN_AUTHORS, show_default=True, type=int)
@click.option("--max-authors", default=vocab.DEFAULT_MAX_AUTHORS, show_default=True, type=int)
@click.pass_context
def vocab_cmd(ctx, annotations_path, out_path, dims, dedup_threshold, min_authors, max_authors):
    """Select the attribute vocabulary from an annotation dataset."""
    dims = _cfg(ctx, "dims", dims, int)
    dedup_threshold = _cfg(ctx, "dedup_threshold", dedup_threshold, float)
    min_authors = _cfg(ctx, "min_authors", min_authors, int)
    max_authors = _cfg(ctx, "max_authors", max_authors, int)
    dataset = annotation.StyleGenomeDataset.load(annotations_path)
    vocabulary = vocab.select_vocabulary(
        dataset, d=dims, dedup_threshold=dedup_threshold,
        min_authors=min_authors, max_authors=max_authors,
    )
    vocabulary.save(out_path)
    targeted = sum(a.source == vocab.TARGETED_SOURCE for a in vocabulary.attributes)
    click.echo(f"dimensions: {vocabulary.dimension}")
    click.echo(f"targeted: {targeted}")
    click.echo(f"mined: {vocabulary.dimension - targeted}")


@cli.command("sample-batches")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--batches", "n_batches", default=1, show_default=True, type=int)
@click.option("--batch-size", default=agreement.DEFAULT_BATCH_SIZE, show_default=True, type=int)
@click.option("--pool-size", default=agreement.DEFAULT_POOL_SIZE, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.pass_context
def sample_batches(ctx, annotations_path, corpus_path, out_path, n_batches, batch_size,
                   pool_size, seed):
    """Sample class-balanced agreement batches into a training file."""
    n_batches = _cfg(ctx, "n_batches", n_batches, int)
    batch_size = _cfg(ctx, "batch_size", batch_size, int)
    pool_size = _cfg(ctx, "pool_size", pool_size, int)
    seed = _cfg(ctx, "seed", seed, int)
    if n_batches < 1:
        raise ValueError("--batches must be positive")
    loaded = corpus_mod.ingest_corpus(corpus_path)
    dataset = annotation.StyleGenomeDataset.load(annotations_path, loaded)
    sim = vocab.TrigramTfidfSimilarity(dataset.distinct_attributes())
    batches = [
        agreement.sample_batch(dataset, sim, batch_size, seed + i, pool_size)
        for i in range(n_batches)
    ]
    lines = agreement.export_training_file(batches, out_path)
    click.echo(f"seed: {seed}")
    click.echo(f"batches: {n_batches}")
    click.echo(f"examples: {lines}")


@cli.command("export-train")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--batches", "n_batches", default=1, show_default=True, type=int)
@click.option("--batch-size", default=agreement.DEFAULT_BATCH_SIZE, show_default=True, type=int)
@click.option("--pool-size", default=agreement.DEFAULT_POOL_SIZE, show_default=True, type=int)
@click.option("--holdout-attrs", default=agreement.DEFAULT_HOLDOUT_ATTRIBUTES,
              show_default=True, type=int)
@click.option("--min-examples", default=agreement.DEFAULT_MIN_EXAMPLES, show_default=True, type=int)
@click.option("--max-examples", default=agreement.DEFAULT_MAX_EXAMPLES, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.pass_context
def export_train(ctx, annotations_path, corpus_path, out_dir, n_batches, batch_size,
                 pool_size, holdout_attrs, min_examples, max_examples, seed):
    """Split attributes into train/validation and export training files."""
    n_batches = _cfg(ctx, "n_batches", n_batches, int)
    batch_size = _cfg(ctx, "batch_size", batch_size, int)
    pool_size = _cfg(ctx, "pool_size", pool_size, int)
    holdout_attrs = _cfg(ctx, "holdout_attrs", holdout_attrs, int)
    min_examples = _cfg(ctx, "min_examples", min_examples, int)
    max_examples = _cfg(ctx, "max_examples", max_examples, int)
    seed = _cfg(ctx, "seed", seed, int)
    if n_batches < 1:
        raise ValueError("--batches must be positive")
    loaded = corpus_mod.ingest_corpus(corpus_path)
    dataset = annotation.StyleGenomeDataset.load(annotations_path, loaded)
    split = agreement.holdout_split(dataset, holdout_attrs, min_examples, max_examples, seed)
    sim = vocab.TrigramTfidfSimilarity(split.train.distinct_attributes())
    batches = [
        agreement.sample_batch(split.train, sim, batch_size, seed + i, pool_size)
        for i in range(n_batches)
    ]
    os.makedirs(out_dir, exist_ok=True)
    train_path = os.path.join(out_dir, "train.txt")
    val_path = os.path.join(out_dir, "val.txt")
    train_lines = agreement.export_training_file(batches, train_path)
    atomic_write_text(
        val_path,
        "".join(agreement.format_example(e) + "\n" for e in split.validation),
    )
    click.echo(f"seed: {seed}")
    click.echo(f"train examples: {train_lines}")
    click.echo(f"validation attributes: {len(split.validation_attributes)}")
    click.echo(f"validation examples: {len(split.validation)}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_spec", default="lexical", show_default=True,
              help="'lexical' or 'table:PATH' with stored scores")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def vectorize(corpus_path, vocab_path, scorer_spec, out_path):
    """Build style vectors for every document of a corpus."""
    loaded = corpus_mod.preprocess_corpus(corpus_mod.ingest_corpus(corpus_path))
    vocabulary = vocab.Vocabulary.load(vocab_path)
    if scorer_spec.startswith("table:"):
        table = stylevec.ScoreTable.from_file(scorer_spec[len("table:"):])
        vectors = stylevec.vectorize_corpus_from_table(loaded, vocabulary, table)
    else:
        scorer = _scorer_from_spec(scorer_spec, vocabulary)
        vectors = stylevec.vectorize_corpus(loaded, vocabulary, scorer)
    stylevec.save_vectors(vectors, out_path)
    click.echo(f"vectors: {len(vectors)}")
    click.echo(f"dimensions: {vocabulary.dimension}")


@cli.command("train-embedding")
@click.option("--vectors", "vectors_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(embedding.KINDS), default=embedding.DIAGONAL,
              show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--margin", default=embedding.DEFAULT_MARGIN, show_default=True, type=float)
@click.option("--batch-size", default=embedding.DEFAULT_BATCH_SIZE, show_default=True, type=int)
@click.option("--learning-rate", default=embedding.DEFAULT_LEARNING_RATE, show_default=True, type=float)
@click.option("--patience", default=embedding.DEFAULT_PATIENCE, show_default=True, type=int)
@click.option("--max-epochs", default=embedding.DEFAULT_MAX_EPOCHS, show_default=True, type=int)
@click.option("--linear-dim", default=embedding.DEFAULT_LINEAR_DIM, show_default=True, type=int)
@click.option("--val-fraction", default=0.2, show_default=True, type=float)
@click.option("--per-anchor", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.pass_context
def train_embedding(ctx, vectors_path, kind, out_dir, margin, batch_size, learning_rate,
                    patience, max_epochs, linear_dim, val_fraction, per_anchor, seed):
    """Train an embedding layer on author triplets built from style vectors."""
    margin = _cfg(ctx, "margin", margin, float)
    batch_size = _cfg(ctx, "batch_size", batch_size, int)
    learning_rate = _cfg(ctx, "learning_rate", learning_rate, float)
    patience = _cfg(ctx, "patience", patience, int)
    max_epochs = _cfg(ctx, "max_epochs", max_epochs, int)
    linear_dim = _cfg(ctx, "linear_dim", linear_dim, int)
    val_fraction = _cfg(ctx, "val_fraction", val_fraction, float)
    per_anchor = _cfg(ctx, "per_anchor", per_anchor, int)
    seed = _cfg(ctx, "seed", seed, int)
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("--val-fraction must be strictly between 0 and 1")
    vectors = stylevec.load_vectors(vectors_path)
    triplets = embedding.build_triplets(vectors, seed=seed, per_anchor=per_anchor)
    if len(triplets) < 2:
        raise ValueError("need at least 2 triplets to split train and validation")
    rng = random.Random(seed)
    rng.shuffle(triplets)
    n_val = min(max(1, round(val_fraction * len(triplets))), len(triplets) - 1)
    val_triplets = triplets[:n_val]
    train_triplets = triplets[n_val:]
    config = embedding.TrainConfig(
        margin=margin, batch_size=batch_size, learning_rate=learning_rate,
        patience=patience, max_epochs=max_epochs, seed=seed, linear_dim=linear_dim,
    )
    layer, history = embedding.train(kind, train_triplets, val_triplets, config)
    os.makedirs(out_dir, exist_ok=True)
    layer_path = os.path.join(out_dir, "layer.json")
    layer.save(layer_path)
    write_json(os.path.join(out_dir, "history.json"), history)
    accuracy = embedding.triplet_accuracy(layer, val_triplets)
    click.echo(f"seed: {seed}")
    click.echo(f"backend: {history['backend']}")
    click.echo(f"triplets: {len(train_triplets)} train, {len(val_triplets)} validation")
    click.echo(f"best epoch: {history['best_epoch']}")
    click.echo(f"best validation loss: {history['best_val_loss']:.6f}")
    click.echo(f"validation triplet accuracy: {accuracy:.4f}")
    click.echo(f"layer: {layer_path}")


def _read_text_arg(text, file_path, label):
    if (text is None) == (file_path is None):
        raise click.UsageError(f"provide exactly one of --{label} or --{label}-file")
    if text is not None:
        return text
    with open(file_path, encoding="utf-8") as fh:
        return fh.read()


@cli.command()
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_spec", default="lexical", show_default=True)
@click.option("--text1", default=None)
@click.option("--text1-file", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--text2", default=None)
@click.option("--text2-file", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--layer", "layer_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--top-k", default=7, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.pass_context
def explain(ctx, vocab_path, scorer_spec, text1, text1_file, text2, text2_file,
            layer_path, top_k, out_path):
    """Explain the stylistic overlap and differences of two texts."""
    top_k = _cfg(ctx, "top_k", top_k, int)
    first = corpus_mod.preprocess(_read_text_arg(text1, text1_file, "text1"))
    second = corpus_mod.preprocess(_read_text_arg(text2, text2_file, "text2"))
    vocabulary = vocab.Vocabulary.load(vocab_path)
    scorer = _scorer_from_spec(scorer_spec, vocabulary)
    layer = embedding.EmbeddingLayer.load(layer_path) if layer_path else None
    result = interpret.explain_pair(first, second, vocabulary, scorer,
                                    top_k=top_k, layer=layer)
    click.echo(f"raw distance: {result.raw_distance:.6f}")
    if result.embedded_distance is not None:
        click.echo(f"embedded distance: {result.embedded_distance:.6f}")
    click.echo("top common attributes:")
    for ranked in result.common:
        click.echo(f"  {ranked.score:8.4f}  [{ranked.dim}] {ranked.attribute}")
    click.echo("top distinct attributes:")
    for ranked in result.distinct:
        click.echo(f"  {ranked.score:8.4f}  [{ranked.dim}] {ranked.attribute}")
    if out_path:
        write_json(out_path, result.to_json_dict())


@cli.group("eval")
def eval_group():
    """Evaluation harnesses."""


def _representation_from_options(vocab_path, scorer_spec, layer_path):
    vocabulary = vocab.Vocabulary.load(vocab_path)
    scorer = _scorer_from_spec(scorer_spec, vocabulary)
    layer = embedding.EmbeddingLayer.load(layer_path) if layer_path else None
    return evalharness.make_representation(vocabulary, scorer, layer)


@eval_group.command("stel")
@click.option("--instances", "instances_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_spec", default="lexical", show_default=True)
@click.option("--layer", "layer_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eval_stel(instances_path, vocab_path, scorer_spec, layer_path, out_path):
    """Alignment accuracy of a representation on STEL-style instances."""
    instances = evalharness.load_stel_instances(instances_path)
    representation = _representation_from_options(vocab_path, scorer_spec, layer_path)
    result = evalharness.run_stel(instances, representation)
    click.echo(f"instances: {len(instances)}")
    click.echo(f"accuracy: {result.accuracy:.4f}")
    if out_path:
        write_json(out_path, {"accuracy": result.accuracy, "decisions": result.decisions})


@eval_group.command("verify")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", "scorer_spec", default="lexical", show_default=True)
@click.option("--layer", "layer_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", default=None, type=float)
@click.option("--calibrate", is_flag=True, default=False,
              help="derive the threshold from the pairs instead of passing one")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eval_verify(pairs_path, vocab_path, scorer_spec, layer_path, threshold, calibrate, out_path):
    """Same-author verification accuracy at a distance threshold."""
    if (threshold is None) == (not calibrate):
        raise click.UsageError("provide exactly one of --threshold or --calibrate")
    pairs = evalharness.load_verification_pairs(pairs_path)
    representation = _representation_from_options(vocab_path, scorer_spec, layer_path)
    if calibrate:
        threshold = evalharness.calibrate_threshold(pairs, representation)
    result = evalharness.run_verification(pairs, representation, threshold)
    click.echo(f"pairs: {len(pairs)}")
    click.echo(f"threshold: {result['threshold']:.6f}")
    click.echo(f"accuracy: {result['accuracy']:.4f}")
    if out_path:
        write_json(out_path, result)


def _run_ablate(ctx, annotations_path, corpus_path, limits, holdout_attrs, min_examples,
                max_examples, threshold, seed, out_path):
    holdout_attrs = _cfg(ctx, "holdout_attrs", holdout_attrs, int)
    min_examples = _cfg(ctx, "min_examples", min_examples, int)
    max_examples = _cfg(ctx, "max_examples", max_examples, int)
    threshold = _cfg(ctx, "threshold", threshold, float)
    seed = _cfg(ctx, "seed", seed, int)
    try:
        parsed_limits = [int(part) for part in limits.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"--limits must be comma-separated integers, got {limits!r}") from None
    loaded = corpus_mod.ingest_corpus(corpus_path)
    dataset = annotation.StyleGenomeDataset.load(annotations_path, loaded)

    def metric(subset):
        return evalharness.lexical_holdout_f1(
            subset, holdout_attributes=holdout_attrs, min_examples=min_examples,
            max_examples=max_examples, seed=seed, threshold=threshold,
        )

    results = evalharness.ablation_sweep(dataset, parsed_limits, metric, seed=seed)
    click.echo(f"seed: {seed}")
    for row in results:
        click.echo(f"authors {row['authors']}: f1 {row['metric']:.4f}")
    if out_path:
        write_json(out_path, {"seed": seed, "metric": "lexical_holdout_f1", "results": results})


_ABLATE_OPTIONS = [
    click.option("--annotations", "annotations_path", required=True,
                 type=click.Path(exists=True, dir_okay=False)),
    click.option("--corpus", "corpus_path", required=True,
                 type=click.Path(exists=True, dir_okay=False)),
    click.option("--limits", required=True, help="comma-separated ascending author counts"),
    click.option("--holdout-attrs", default=2, show_default=True, type=int),
    click.option("--min-examples", default=1, show_default=True, type=int),
    click.option("--max-examples", default=agreement.DEFAULT_MAX_EXAMPLES,
                 show_default=True, type=int),
    click.option("--threshold", default=agreement.DEFAULT_THRESHOLD, show_default=True, type=float),
    click.option("--seed", default=0, show_default=True, type=int),
    click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False)),
]


def _with_ablate_options(fn):
    for option in reversed(_ABLATE_OPTIONS):
        fn = option(fn)
    return fn


@eval_group.command("ablate")
@_with_ablate_options
@click.pass_context
def eval_ablate(ctx, **kwargs):
    """Lexical-scorer holdout F1 across nested author subsets."""
    _run_ablate(ctx, **kwargs)


@cli.command("ablate")
@_with_ablate_options
@click.pass_context
def ablate_alias(ctx, **kwargs):
    """Shorthand for `eval ablate`."""
    _run_ablate(ctx, **kwargs)


def main(argv=None) -> int:
    """Entry point returning an exit code instead of raising SystemExit."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except (StylokitError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
