"""Command-line entry points for the full pipeline."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from . import aspects, corpus, simulate, svgplot
from .selection import SelectionConfig
from .session import build_catalog


@click.group()
def main():
    """Personalized, feedback-adaptive review summarization toolkit."""


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--min-words", default=3, show_default=True)
@click.option("--max-sents", default=20, show_default=True)
def ingest(in_path: str, out_path: str, min_words: int, max_sents: int):
    """Deduplicate raw reviews and split them into sentence tables."""
    with open(in_path, "r", encoding="utf-8") as fh:
        records, parse_errors = corpus.parse_raw_reviews(fh)
    result = corpus.ingest(records)
    for err in parse_errors + result.errors:
        click.echo(f"rejected record {err.index}: {err.reason}", err=True)
    tables = corpus.sentence_split(result.tables, min_words=min_words, max_sentences_per_review=max_sents)
    corpus.save_tables(tables, out_path)
    click.echo(
        f"wrote {len(tables.reviews)} reviews, {len(tables.sentences)} sentences to {out_path}"
    )


@main.command("discover-aspects")
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=10, show_default=True)
@click.option("--m", default=None, type=int, help="Fixed component count (overrides the variance target).")
@click.option("--variance-target", default=0.5, show_default=True, type=float)
@click.option("--r", default=10.0, show_default=True, type=float)
@click.option("--n-init", default=10, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--k-candidates", default=None, help="Comma list of K values to score (report to stderr).")
def discover_aspects(emb_path, corpus_path, k, m, variance_target, r, n_init, seed, out_path, k_candidates):
    """Fit PCA + k-means + temperature and write the aspect model JSON."""
    emb = aspects.normalize_rows(aspects.load_embeddings(emb_path))
    tables = corpus.load_tables(corpus_path)
    if len(tables.sentences) != emb.rows:
        raise click.ClickException(
            f"corpus has {len(tables.sentences)} sentences but embeddings have {emb.rows} rows"
        )
    kwargs = {"m": m} if m is not None else {"variance_target": variance_target}
    model, reduced = aspects.discover_aspects(emb, k, r=r, n_init=n_init, seed=seed, **kwargs)
    aspects.save_model(model, out_path)
    click.echo(f"wrote aspect model (K={model.k}, m={model.m}, tau={model.tau:.4f}) to {out_path}")
    if k_candidates:
        ks = [int(x) for x in k_candidates.split(",")]
        for row in aspects.k_selection_report(reduced, ks, n_init=n_init, seed=seed):
            click.echo(
                f"K={row.k}: silhouette={row.silhouette:.4f} "
                f"calinski_harabasz={row.calinski_harabasz:.1f} "
                f"davies_bouldin={row.davies_bouldin:.4f} inertia={row.inertia:.2f}",
                err=True,
            )
    phi = aspects.soft_assign(model, emb.data)
    mass = aspects.aspect_mass(phi)
    click.echo("aspect mass: " + " ".join(f"{v:.4f}" for v in mass))


def _run_config(config_path: str, require_drift: bool):
    cfg = simulate.load_config(config_path)
    if require_drift and cfg.oracle.drift is None:
        raise click.ClickException("this command needs an oracle with a drift schedule")
    result = simulate.run_experiment(cfg)
    for arm in cfg.arms:
        finals = result.final_metric(arm, "A_pref")
        regrets = result.final_metric(arm, "regret_avg")
        click.echo(
            f"{arm}: final A_pref mean={np.mean(finals):.4f} "
            f"min={np.min(finals):.4f} max={np.max(finals):.4f} "
            f"avg regret={np.mean(regrets):.5f}"
        )
    if cfg.out_dir:
        click.echo(f"CSV results in {cfg.out_dir}")


@main.command("simulate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def simulate_cmd(config_path: str):
    """Run a configured experiment over all arms and seeds."""
    _run_config(config_path, require_drift=False)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def drift(config_path: str):
    """Run a drift experiment (the oracle must carry a drift schedule)."""
    _run_config(config_path, require_drift=True)


@main.command("compare-profiles")
@click.option("--product", required=True)
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--lam", default=0.7, show_default=True)
@click.option("--k", "max_sentences", default=8, show_default=True)
def compare_profiles_cmd(product, profiles_path, model_path, corpus_path, emb_path, lam, max_sentences):
    """Select evidence for several target profiles and report overlap."""
    catalog = build_catalog(
        corpus.load_tables(corpus_path),
        aspects.load_embeddings(emb_path),
        aspects.load_model(model_path),
    )
    profiles = [np.asarray(p, dtype=np.float64) for p in json.loads(Path(profiles_path).read_text())]
    cfg = SelectionConfig(lam=lam, max_sentences=max_sentences)
    report = simulate.compare_profiles(catalog, product, profiles, cfg)
    for i, entry in enumerate(report.entries):
        click.echo(f"profile {i}: g_cos={entry.g_cos:.4f} picks={entry.sentence_ids}")
    for i in range(len(report.entries)):
        for j in range(i + 1, len(report.entries)):
            click.echo(f"jaccard({i},{j}) = {report.overlap(i, j):.4f}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--x", "x_col", default="round", show_default=True)
@click.option("--y", "y_cols", default="A_pref,A_evid", show_default=True)
@click.option("--title", default="")
def plot(in_path, out_path, x_col, y_cols, title):
    """Render chosen CSV columns as an SVG line chart."""
    with open(in_path, "r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise click.ClickException("empty CSV")
    series = {}
    for col in y_cols.split(","):
        col = col.strip()
        if col not in rows[0]:
            raise click.ClickException(f"column {col!r} not in CSV")
        series[col] = [(float(r[x_col]), float(r[col])) for r in rows]
    svgplot.line_chart(series, out_path, title=title, x_label=x_col)
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_dir", default="sessions", show_default=True, type=click.Path())
@click.option("--demo-oracle", "oracle_path", default=None, type=click.Path(exists=True))
def serve(model_path, corpus_path, emb_path, port, host, store_dir, oracle_path):
    """Start the interactive session service."""
    import uvicorn

    from .service import SessionStore, create_app

    catalog = build_catalog(
        corpus.load_tables(corpus_path),
        aspects.load_embeddings(emb_path),
        aspects.load_model(model_path),
    )
    oracle = None
    if oracle_path:
        doc = json.loads(Path(oracle_path).read_text(encoding="utf-8"))
        drift_doc = doc.get("drift")
        oracle = simulate.FeedbackOracle(
            w_true=np.asarray(doc["w_true"], dtype=np.float64) if "w_true" in doc else None,
            drift=simulate.DriftSchedule(
                w_start=np.asarray(drift_doc["w_start"], dtype=np.float64),
                w_end=np.asarray(drift_doc["w_end"], dtype=np.float64),
                t_begin=int(drift_doc["t_begin"]),
                t_end=int(drift_doc["t_end"]),
            )
            if drift_doc
            else None,
            gamma=float(doc.get("gamma", 8.0)),
            sigma=float(doc.get("sigma", 0.05)),
            seed=int(doc.get("seed", 0)),
        )
    app = create_app(catalog, SessionStore(store_dir), demo_oracle=oracle)
    click.echo(f"serving {len(catalog.candidates)} products on {host}:{port}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
