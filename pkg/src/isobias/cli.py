"""Command-line interface: ``fit``, ``simulate`` and ``collapse``.

Exit codes: 0 success, 1 at least one gene failed to fit (the others are
still written), 2 usage error, 3 input/output or parse error.  Failures are
reported on stderr as one JSON object per line.
"""

import argparse
import json
import sys
from contextlib import nullcontext
from dataclasses import replace

from .collapse import ReadTypeTable, collapse_read_types
from .genefile import (
    FIT_COLUMNS,
    GeneFileError,
    GeneInstance,
    fold_change_flag,
    format_genes,
    parse_gene_file,
    rpkm,
)
from .model import PENALTY_MODES, UNIFORM, ModelError
from .sim import DESIGNS, METHODS, CustomDesign, SimulationSpec, run_study
from .solver import FIT_MODES, NO_BIAS, ONE_STEP, FitConfig, fit

EXIT_OK, EXIT_FIT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report_error("UsageError", message)
        self.print_usage(sys.stderr)
        sys.exit(EXIT_USAGE)


def _report_error(kind, message, gene_id=None):
    rec = {"status": "error", "error": kind, "message": message}
    if gene_id is not None:
        rec["gene_id"] = gene_id
    print(json.dumps(rec), file=sys.stderr)


def _lambda(value):
    if value == "auto":
        return value
    try:
        lam = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {value!r}") from None
    if not lam >= 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return lam


def _positive_float(value):
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _positive_int(value):
    x = int(value)
    if x < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return x


def _add_fit_options(p):
    p.add_argument("--lambda", dest="lam", type=_lambda, default="auto",
                   help="penalty level, or 'auto' for sqrt(max count) per gene")
    p.add_argument("--penalty", choices=PENALTY_MODES, default=UNIFORM)
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    p.add_argument("--max-iters", type=_positive_int, default=10000)
    p.add_argument("--output", choices=("tsv", "json"), default="tsv")
    p.add_argument("-o", "--out", default="-", help="output path ('-' for stdout)")


def build_parser():
    parser = _Parser(prog="isobias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="estimate isoform abundances per gene")
    p.add_argument("input", help="gene file (JSON lines, or single-gene .tsv)")
    p.add_argument("--mode", choices=FIT_MODES, default=ONE_STEP)
    _add_fit_options(p)

    p = sub.add_parser("simulate", help="run a simulation study")
    p.add_argument("--design", required=True,
                   help="example1, example2, example3 or custom=<json file with C, theta, b>")
    p.add_argument("--depth", type=_positive_float, nargs="+", default=[10.0, 100.0, 1000.0])
    p.add_argument("--replicates", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode-all", action="store_true",
                   help="report mean, sd, misidentified and failures for every method")
    _add_fit_options(p)

    p = sub.add_parser("collapse", help="merge proportional read types into categories")
    p.add_argument("input", help="gene file whose columns are read types")
    p.add_argument("--prop-tol", type=float, default=0.0)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("-o", "--out", default="-")
    return parser


def _open_out(path):
    return nullcontext(sys.stdout) if path == "-" else open(path, "w", encoding="utf-8")


def _fit_config(args, mode):
    return FitConfig(lam=args.lam, penalty=args.penalty, tol=args.tol,
                     max_iters=args.max_iters, mode=mode)


def _expression(gene, theta):
    if gene.has_lengths:
        return rpkm(theta, gene.rates, gene.lengths, gene.total_mapped_reads)
    return theta * gene.rates.sum(axis=1)


def fit_gene(gene, cfg):
    """Fit one gene in ``cfg.mode`` alongside the no-bias baseline."""
    res = fit(gene.counts, gene.rates, cfg)
    base = res if cfg.mode == NO_BIAS else fit(gene.counts, gene.rates, replace(cfg, mode=NO_BIAS))
    expr, expr_base = _expression(gene, res.theta), _expression(gene, base.theta)
    return {
        "gene_id": gene.gene_id,
        "mode": cfg.mode,
        "lambda": res.lam,
        "isoform_ids": list(gene.isoform_ids),
        "theta": res.theta.tolist(),
        "rpkm": expr.tolist() if gene.has_lengths else None,
        "theta_no_bias": base.theta.tolist(),
        "rpkm_no_bias": expr_base.tolist() if gene.has_lengths else None,
        "fold_change_flag": bool(fold_change_flag(expr.sum(), expr_base.sum())),
        "b": res.b.tolist(),
        "support": [gene.category_ids[j] for j in res.support],
        "objective": res.objective,
        "converged": bool(res.converged),
        "iterations": int(res.iterations),
    }


def _fmt(x):
    return "NA" if x is None else repr(float(x))


def _fit_rows(rec):
    support = ",".join(rec["support"]) or "."
    for i, iso in enumerate(rec["isoform_ids"]):
        yield [rec["gene_id"], iso, rec["mode"], _fmt(rec["theta"][i]),
               _fmt(rec["rpkm"][i] if rec["rpkm"] else None), _fmt(rec["theta_no_bias"][i]),
               _fmt(rec["rpkm_no_bias"][i] if rec["rpkm_no_bias"] else None),
               str(int(rec["fold_change_flag"])), support, _fmt(rec["objective"]),
               str(int(rec["converged"])), str(rec["iterations"])]


def cmd_fit(args):
    genes = parse_gene_file(args.input)
    cfg = _fit_config(args, args.mode)
    status = EXIT_OK
    with _open_out(args.out) as out:
        if args.output == "tsv":
            out.write("\t".join(FIT_COLUMNS) + "\n")
        for gene in genes:
            try:
                rec = fit_gene(gene, cfg)
            except ModelError as exc:
                _report_error(type(exc).__name__, str(exc), gene.gene_id)
                status = EXIT_FIT
                continue
            if args.output == "json":
                out.write(json.dumps(rec) + "\n")
            else:
                for row in _fit_rows(rec):
                    out.write("\t".join(row) + "\n")
    return status


def _design(value):
    if value in DESIGNS:
        return value
    if value.startswith("custom="):
        with open(value[len("custom="):], encoding="utf-8") as fh:
            spec = json.load(fh)
        try:
            return CustomDesign(C=spec["C"], theta=spec["theta"], b=spec["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GeneFileError(f"invalid custom design: {exc}") from None
    raise UsageError(f"unknown design {value!r}")


def simulation_table(reports, mode_all=False):
    """TSV text: the standard five-column table, or every summary field."""
    if not mode_all:
        lines = ["\t".join(["depth", "no_bias", "one_step", "two_step", "misidentified"])]
        lines += ["\t".join(r.table_row()) for r in reports]
    else:
        header = ["depth"]
        for m in METHODS:
            key = m.replace("-", "_")
            header += [f"{key}_{f}" for f in ("mean_l2", "sd_l2", "mean_misidentified",
                                              "sd_misidentified", "failures")]
        lines = ["\t".join(header)]
        for r in reports:
            row = [repr(r.depth)]
            for m in METHODS:
                s = r.methods[m]
                row += [f"{s.mean_l2:.6g}", f"{s.sd_l2:.6g}", f"{s.mean_misidentified:.6g}",
                        f"{s.sd_misidentified:.6g}", str(s.failures)]
            lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def cmd_simulate(args):
    design = _design(args.design)
    cfg = _fit_config(args, ONE_STEP)
    reports = [run_study(SimulationSpec(design, d, args.replicates, args.seed, cfg))
               for d in args.depth]
    with _open_out(args.out) as out:
        if args.output == "json":
            json.dump([r.to_dict() for r in reports], out, sort_keys=True)
            out.write("\n")
        else:
            out.write(simulation_table(reports, args.mode_all))
    return EXIT_OK


def cmd_collapse(args):
    if args.prop_tol < 0:
        raise UsageError("--prop-tol must be >= 0")
    genes = parse_gene_file(args.input)
    out_genes = []
    for g in genes:
        col = collapse_read_types(ReadTypeTable(g.rates, g.counts, g.category_ids), args.prop_tol)
        out_genes.append(GeneInstance(g.gene_id, g.isoform_ids, col.category_ids, col.rates,
                                      col.counts, g.lengths, g.total_mapped_reads))
    with _open_out(args.out) as out:
        out.write(format_genes(out_genes, tsv=args.format == "tsv"))
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "collapse": cmd_collapse}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _report_error("UsageError", str(exc))
        return EXIT_USAGE
    except GeneFileError as exc:
        _report_error("GeneFileError", str(exc), exc.gene_id)
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        _report_error(type(exc).__name__, str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
