"""gardener command line.

Exit codes: 0 success, 2 usage error, 3 input/parse error, 4 internal error.
"""
from __future__ import annotations

import sys

import click

from . import __version__
from .config import GardenerConfig, load_config
from .exceptions import GardenerError, InputError, UsageError
from .oracle import compare as compare_rankings
from .oracle import load_oracle
from .pipeline import (
    analyze,
    curve_rows,
    load_measured,
    load_scores_file,
    open_model,
    parse_criteria,
    parse_int_list,
    parse_ratio,
    tables_from_scores,
)
from .pruner import CostConfig, apply_plan, estimate_cost, make_plan
from .ranking import WEIGHT_CRITERIA, as_criterion, explicit_select, gardener_select, random_select
from .report import TOOL, atomic_write_text, csv_text, dumps_json, format_table, write_csv, write_json
from .scoring import compute_block_statistics
from .tensor_store import write_checkpoint


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except GardenerError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except Exception as exc:  # anything unplanned is an invariant breach
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(4)


def _config(ctx, **overrides) -> GardenerConfig:
    return ctx.obj["config"].override(**overrides)


def _model_options(f):
    f = click.option("--block-pattern", default=None, help="Regex with one group capturing the block index.")(f)
    f = click.option("--index-base", type=click.IntRange(0, 1), default=None, help="Native index of the first block.")(f)
    return f


def _stat_options(f):
    f = click.option("--bins", "n_bins", type=click.IntRange(min=1), default=None, help="Histogram bin count K.")(f)
    f = click.option("--binning", type=click.Choice(["per_block", "per-block", "global"]), default=None)(f)
    f = click.option("--log-base", default=None, help="'e' (nats, default) or 2 (bits).")(f)
    return f


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="gardener")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON config file (default: $GARDENER_CONFIG).")
@click.pass_context
def cli(ctx, config_path):
    """Data-free block importance scoring and one-shot block pruning."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = load_config(config_path)


@cli.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@_model_options
@click.option("--json", "as_json", is_flag=True, help="Print the summary as JSON.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON summary here.")
@click.pass_context
def inspect(ctx, checkpoint, block_pattern, index_base, as_json, out):
    """Show the block partition of CHECKPOINT."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base)
    _, model = open_model(checkpoint, cfg)
    summary = {"tool": TOOL, "checkpoint": str(checkpoint), **model.summary()}
    if out:
        write_json(out, summary)
    if as_json:
        click.echo(dumps_json(summary), nl=False)
        return
    click.echo(f"L={model.L}  total_params={model.total_count}  residual_params={model.residual_count}")
    rows = [(b, model.param_counts[b], len(names), names[0] if names else "") for b, names in model.blocks]
    click.echo(format_table(["block", "params", "tensors", "first_tensor"], rows))
    click.echo(f"residual tensors: {', '.join(model.residual) or '-'}")


@cli.command("analyze")
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@_model_options
@_stat_options
@click.option("--criteria", default="all", show_default=True, help="Comma-separated criteria or 'all'.")
@click.option("--out-json", type=click.Path(dir_okay=False), default=None)
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None, help="Per-criterion scores and ranks.")
@click.option("--hist-csv", type=click.Path(dir_okay=False), default=None, help="Per-block histogram export.")
@click.pass_context
def analyze_cmd(ctx, checkpoint, block_pattern, index_base, n_bins, binning, log_base, criteria, out_json, out_csv, hist_csv):
    """Score every block of CHECKPOINT under the requested criteria."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base, n_bins=n_bins, binning=binning, log_base=log_base)
    crits = parse_criteria(criteria)
    ckpt, model = open_model(checkpoint, cfg)
    report = analyze(ckpt, model, crits, cfg)
    if out_json:
        write_json(out_json, report.to_dict())
    if out_csv:
        atomic_write_text(out_csv, report.scores_csv())
    if hist_csv:
        atomic_write_text(hist_csv, report.histogram_csv())
    names = sorted(report.score_tables)
    rows = [[b] + [report.score_tables[n].rank[b] for n in names] for b in model.block_ids]
    click.echo(format_table(["block"] + [f"{n}_rank" for n in names], rows))
    for name, err in sorted(report.errors.items()):
        click.echo(f"warning: {name} not computed: {err}", err=True)


def _score_source(cfg, checkpoint, scores_path, criteria):
    """Score tables for the weight criteria among ``criteria``; returns (tables, L)."""
    weight_crits = [c for c in criteria if c in WEIGHT_CRITERIA]
    model = None
    if checkpoint:
        ckpt, model = open_model(checkpoint, cfg)
    tables = {}
    if scores_path:
        scores, directions = load_scores_file(scores_path)
        missing = [c for c in weight_crits if c not in scores]
        if missing:
            raise InputError(f"scores file lacks criteria {missing}")
        tables = tables_from_scores({c: scores[c] for c in weight_crits}, cfg, directions)
    elif model is not None and weight_crits:
        stats = compute_block_statistics(model, ckpt, weight_crits, cfg.n_bins, cfg.binning, cfg.log_base)
        for c in weight_crits:
            if c in stats.errors:
                raise stats.errors[c]
        tables = tables_from_scores(stats.values, cfg)
    L = model.L if model is not None else (next(iter(tables.values())).L if tables else None)
    for c, t in tables.items():
        if L is not None and t.L != L:
            raise InputError(f"scores for {c} cover {t.L} blocks, checkpoint has {L}")
    return tables, L


@cli.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False), required=False)
@_model_options
@_stat_options
@click.option("--criterion", required=True)
@click.option("--ratio", default=None, help="Pruning ratio r in (0,1); fractions like 3/12 accepted.")
@click.option("--count", type=click.IntRange(min=1), default=None, help="Remove exactly this many blocks.")
@click.option("--seed", type=int, default=None, help="Seed for the random criterion.")
@click.option("--direction", type=click.Choice(["lowest", "highest"]), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Use precomputed scores (JSON) instead of a checkpoint.")
@click.option("--n-blocks", type=click.IntRange(min=2), default=None, help="Block count for --criterion random without a checkpoint.")
@click.option("--out-json", type=click.Path(dir_okay=False), default=None)
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def rank(ctx, checkpoint, block_pattern, index_base, n_bins, binning, log_base, criterion, ratio, count, seed,
         direction, scores_path, n_blocks, out_json, out_csv):
    """Rank blocks under one criterion and select the blocks to prune."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base, n_bins=n_bins, binning=binning,
                  log_base=log_base, seed=seed)
    if direction:
        cfg.directions = {**cfg.directions, as_criterion(criterion).name: direction}
    crit = as_criterion(criterion).name
    if crit == "external":
        raise UsageError("use 'compare' or 'curve' with --oracle for sensitivity rankings")
    if not checkpoint and not scores_path and crit != "random":
        raise UsageError("give a CHECKPOINT or --scores")
    r = parse_ratio(ratio) if ratio is not None else None
    if r is None and count is None:
        raise UsageError("give --ratio or --count")
    tables, L = _score_source(cfg, checkpoint, scores_path, [crit])
    L = L or n_blocks
    if crit == "random":
        if not L:
            raise UsageError("random criterion needs a CHECKPOINT, --scores or --n-blocks")
        sel = random_select(L, r, seed=cfg.seed, count=count)
        table = None
    else:
        table = tables[crit]
        sel = gardener_select(table, r, count)
    result = {"tool": TOOL, "selection": sel.to_dict(), "score_table": table.to_dict() if table else None,
              "config": cfg.to_dict()}
    if out_json:
        write_json(out_json, result)
    if out_csv and table:
        write_csv(out_csv, ["block", "raw", "normalized", "rank", "selected"],
                  [[b, table.raw[b], table.normalized[b], table.rank[b], int(b in sel.block_ids)] for b in sorted(table.raw)])
    click.echo(f"criterion={sel.criterion} remove={','.join(map(str, sel.block_ids))}")


@cli.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@_model_options
@_stat_options
@click.option("--criterion", default=None)
@click.option("--blocks", default=None, help="Explicit 1-based block ids, e.g. 10,11,12.")
@click.option("--ratio", default=None)
@click.option("--count", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--direction", type=click.Choice(["lowest", "highest"]), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Pruned checkpoint path.")
@click.option("--plan-json", type=click.Path(dir_okay=False), default=None)
@click.option("--cost-config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def prune(ctx, checkpoint, block_pattern, index_base, n_bins, binning, log_base, criterion, blocks, ratio, count,
          seed, direction, scores_path, out, plan_json, cost_config):
    """Remove blocks from CHECKPOINT and write the re-indexed result to --out."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base, n_bins=n_bins, binning=binning,
                  log_base=log_base, seed=seed)
    if (criterion is None) == (blocks is None):
        raise UsageError("give exactly one of --criterion or --blocks")
    ckpt, model = open_model(checkpoint, cfg)
    if blocks is not None:
        sel = explicit_select(parse_int_list(blocks), model.L)
    else:
        crit = as_criterion(criterion).name
        if direction:
            cfg.directions = {**cfg.directions, crit: direction}
        r = parse_ratio(ratio) if ratio is not None else None
        if r is None and count is None:
            raise UsageError("give --ratio or --count")
        if crit == "random":
            sel = random_select(model.L, r, seed=cfg.seed, count=count)
        elif crit == "external":
            raise UsageError("sensitivity pruning needs explicit --blocks")
        else:
            tables, _ = _score_source(cfg, checkpoint, scores_path, [crit])
            sel = gardener_select(tables[crit], r, count)
    plan = make_plan(model, sel)
    cost_cfg = CostConfig.from_file(cost_config) if cost_config else CostConfig.from_dict(cfg.cost) if cfg.cost else CostConfig()
    provenance = {"criterion": sel.criterion, "ratio": "" if sel.ratio is None else repr(sel.ratio), "tool": TOOL}
    if sel.seed is not None:
        provenance["seed"] = str(sel.seed)
    pruned = apply_plan(ckpt, plan, provenance)
    write_checkpoint(pruned, out)
    cost = estimate_cost(model, sel, cost_cfg)
    if plan_json:
        write_json(plan_json, {"tool": TOOL, "selection": sel.to_dict(), "plan": plan.to_dict(), "cost": cost,
                               "config": cfg.to_dict()})
    click.echo(f"removed blocks {','.join(map(str, plan.remove))}: L {plan.L} -> {plan.kept_L}, "
               f"params {cost['params_before']} -> {cost['params_after']}, "
               f"GFLOPs {cost['flops_before']:.1f} -> {cost['flops_after']:.1f}")


@cli.command("compare")
@click.option("--oracle", "oracle_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="CSV block_id,war with baseline row block_id=0.")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None)
@_model_options
@_stat_options
@click.option("--criteria", default="entropy_number", show_default=True)
@click.option("--k", "ks", default="1,3,5", show_default=True)
@click.option("--out-json", type=click.Path(dir_okay=False), default=None)
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def compare_cmd(ctx, oracle_path, checkpoint, scores_path, block_pattern, index_base, n_bins, binning, log_base,
                criteria, ks, out_json, out_csv):
    """Compare criterion rankings with oracle sensitivity rankings."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base, n_bins=n_bins, binning=binning, log_base=log_base)
    crits = [c for c in parse_criteria(criteria) if c not in ("external", "random")]
    if not crits:
        raise UsageError("need at least one weight criterion to compare")
    if not checkpoint and not scores_path:
        raise UsageError("give --checkpoint or --scores")
    oracle = load_oracle(oracle_path)
    tables, L = _score_source(cfg, checkpoint, scores_path, crits)
    k_list = parse_int_list(ks)
    results = {c: compare_rankings(tables[c], oracle, k_list) for c in crits}
    sens = oracle.score_table(L)
    report = {"tool": TOOL, "baseline_war": oracle.baseline_war, "config": cfg.to_dict(),
              "comparisons": {c: r.to_dict() for c, r in results.items()}}
    if out_json:
        write_json(out_json, report)
    if out_csv:
        header = ["block", "war", "drop"] + [f"{c}_rank" for c in crits] + ["oracle_rank"]
        rows = [[b, oracle.per_block[b].war, oracle.per_block[b].drop] + [tables[c].rank[b] for c in crits] + [sens.rank[b]]
                for b in sorted(sens.rank)]
        write_csv(out_csv, header, rows)
    click.echo(format_table(["criterion", "spearman", "kendall"] + [f"least@{k}" for k in k_list],
                            [[c, r.spearman_rho, r.kendall_tau] + [r.top_k_least[k] for k in k_list] for c, r in results.items()]))


@cli.command()
@click.option("--oracle", "oracle_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None)
@_model_options
@_stat_options
@click.option("--criteria", required=True, help="Comma-separated; 'sensitivity' and 'random' allowed.")
@click.option("--ratios", default=None, help="Comma-separated ratios, e.g. 1/12,3/12 (default: odd k/L).")
@click.option("--seed", type=int, default=None)
@click.option("--measured", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV criterion,n_removed,war of measured multi-block results.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Curve CSV path (default stdout).")
@click.pass_context
def curve(ctx, oracle_path, checkpoint, scores_path, block_pattern, index_base, n_bins, binning, log_base, criteria,
          ratios, seed, measured, out):
    """Selection schedule across pruning ratios, joined with oracle and measured results."""
    cfg = _config(ctx, block_pattern=block_pattern, index_base=index_base, n_bins=n_bins, binning=binning,
                  log_base=log_base, seed=seed)
    crits = parse_criteria(criteria)
    oracle = load_oracle(oracle_path)
    tables, L = _score_source(cfg, checkpoint, scores_path, crits)
    L = L or len(oracle.per_block)
    ratio_list = [parse_ratio(r) for r in ratios.split(",")] if ratios else [k / L for k in range(1, L, 2)]
    rows = curve_rows(tables, crits, ratio_list, oracle, L, cfg.seed, load_measured(measured) if measured else None)
    header = ["ratio", "n_removed", "criterion", "removed_blocks", "oracle_drop_sum", "oracle_overlap",
              "measured_war", "measured_delta"]
    table_rows = [[r["ratio"], r["n_removed"], r["criterion"], " ".join(map(str, r["removed_blocks"])),
                   r["oracle_drop_sum"], r["oracle_overlap"], r["measured_war"], r["measured_delta"]] for r in rows]
    if out:
        write_csv(out, header, table_rows)
    else:
        click.echo(csv_text(header, table_rows), nl=False)


def main(argv=None):
    return cli.main(args=argv, prog_name="gardener")


if __name__ == "__main__":
    sys.exit(main())
