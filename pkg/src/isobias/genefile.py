"""Per-gene input records, RPKM conversion and fit reports.

Two input layouts are accepted.

JSON lines (any extension other than ``.tsv``), one gene per line::

    {"gene_id": "G1", "isoform_ids": ["a"], "category_ids": ["e1", "e2"],
     "rates": [[10.0, 10.0]], "counts": [74, 10],
     "lengths": [2000], "total_mapped_reads": 1000000}

``lengths`` and ``total_mapped_reads`` are optional but go together.

TSV (``.tsv``), a single gene::

    #gene_id	G1
    #total_mapped_reads	1000000
    isoform	length	e1	e2
    a	2000	10.0	10.0
    #counts	74	10

with ``.`` in the length column when lengths are absent.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelError, check_instance


class GeneFileError(ValueError):
    """Malformed or invalid gene record."""

    def __init__(self, message, gene_id=None, line=None):
        where = []
        if gene_id is not None:
            where.append(f"gene {gene_id}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.gene_id = gene_id
        self.line = line
        self.detail = message


@dataclass(frozen=True)
class GeneInstance:
    gene_id: str
    isoform_ids: tuple
    category_ids: tuple
    rates: np.ndarray
    counts: np.ndarray
    lengths: np.ndarray | None = None
    total_mapped_reads: int | None = None

    def __post_init__(self):
        try:
            counts, rates = check_instance(self.counts, self.rates)
        except ModelError as exc:
            raise GeneFileError(str(exc), self.gene_id) from None
        I, J = rates.shape
        if len(self.isoform_ids) != I:
            raise GeneFileError(f"{len(self.isoform_ids)} isoform ids for {I} rate rows", self.gene_id)
        if len(self.category_ids) != J:
            raise GeneFileError(f"{len(self.category_ids)} category ids for {J} columns", self.gene_id)
        if (self.lengths is None) != (self.total_mapped_reads is None):
            raise GeneFileError("lengths and total_mapped_reads must be given together", self.gene_id)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "isoform_ids", tuple(str(x) for x in self.isoform_ids))
        object.__setattr__(self, "category_ids", tuple(str(x) for x in self.category_ids))
        if self.lengths is not None:
            lengths = np.asarray(self.lengths, dtype=float)
            if lengths.shape != (I,) or np.any(lengths <= 0) or np.any(lengths != np.round(lengths)):
                raise GeneFileError("lengths must be I positive integers", self.gene_id)
            total = self.total_mapped_reads
            if isinstance(total, bool) or not float(total).is_integer() or total <= 0:
                raise GeneFileError("total_mapped_reads must be a positive integer", self.gene_id)
            object.__setattr__(self, "lengths", lengths.astype(int))
            object.__setattr__(self, "total_mapped_reads", int(total))

    @property
    def has_lengths(self):
        return self.lengths is not None


def rpkm(theta, A, lengths, total_mapped_reads):
    """Expected reads per isoform, ``theta_i * sum_j A[i, j]``, in RPKM."""
    if lengths is None or total_mapped_reads is None:
        raise ValueError("RPKM needs isoform lengths and total mapped reads")
    reads = np.asarray(theta, dtype=float) * np.asarray(A, dtype=float).sum(axis=1)
    return reads * 1e9 / (np.asarray(lengths, dtype=float) * float(total_mapped_reads))


# --- JSON lines ---------------------------------------------------------------

_REQUIRED = ("gene_id", "isoform_ids", "category_ids", "rates", "counts")


def _int_list(values, what, gene_id, line):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not float(v).is_integer():
            raise GeneFileError(f"{what} must be integers, got {v!r}", gene_id, line)
        out.append(int(v))
    return out


def gene_from_dict(rec, line=None):
    if not isinstance(rec, dict):
        raise GeneFileError("record is not a JSON object", line=line)
    gene_id = rec.get("gene_id")
    missing = [k for k in _REQUIRED if k not in rec]
    if missing:
        raise GeneFileError(f"missing fields {missing}", gene_id, line)
    try:
        rates = np.asarray(rec["rates"], dtype=float)
    except (TypeError, ValueError):
        raise GeneFileError("rates must be a numeric I x J array", gene_id, line) from None
    if rates.ndim != 2:
        raise GeneFileError("rates must be a numeric I x J array", gene_id, line)
    counts = _int_list(rec["counts"], "counts", gene_id, line)
    lengths = rec.get("lengths")
    if lengths is not None:
        lengths = _int_list(lengths, "lengths", gene_id, line)
    try:
        return GeneInstance(
            gene_id=str(gene_id),
            isoform_ids=tuple(rec["isoform_ids"]),
            category_ids=tuple(rec["category_ids"]),
            rates=rates,
            counts=np.asarray(counts, dtype=float),
            lengths=lengths,
            total_mapped_reads=rec.get("total_mapped_reads"),
        )
    except GeneFileError as exc:
        raise GeneFileError(exc.detail, gene_id, line) from None


def gene_to_dict(gene):
    rec = {
        "gene_id": gene.gene_id,
        "isoform_ids": list(gene.isoform_ids),
        "category_ids": list(gene.category_ids),
        "rates": gene.rates.tolist(),
        "counts": [int(c) for c in gene.counts],
    }
    if gene.has_lengths:
        rec["lengths"] = [int(x) for x in gene.lengths]
        rec["total_mapped_reads"] = gene.total_mapped_reads
    return rec


def format_gene_json(gene):
    return json.dumps(gene_to_dict(gene))


def parse_json_lines(text):
    genes = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GeneFileError(f"invalid JSON ({exc.msg})", line=lineno) from None
        genes.append(gene_from_dict(rec, lineno))
    return genes


# --- TSV ----------------------------------------------------------------------

def parse_tsv(text):
    meta = {}
    header = None
    rows = []
    counts = None
    gene_id = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if fields[0] == "#counts":
            counts = (lineno, fields[1:])
        elif fields[0].startswith("#"):
            if len(fields) != 2:
                raise GeneFileError("metadata lines are '#key<TAB>value'", gene_id, lineno)
            meta[fields[0][1:]] = fields[1]
            gene_id = meta.get("gene_id", gene_id)
        elif header is None:
            if fields[:2] != ["isoform", "length"]:
                raise GeneFileError("header must start with 'isoform<TAB>length'", gene_id, lineno)
            header = fields[2:]
        else:
            rows.append((lineno, fields))
    if "gene_id" not in meta:
        raise GeneFileError("missing #gene_id line")
    if header is None or counts is None or not rows:
        raise GeneFileError("needs a header, at least one isoform row and a #counts row", gene_id)
    J = len(header)
    rates, iso, lengths = [], [], []
    for lineno, fields in rows:
        if len(fields) != J + 2:
            raise GeneFileError(f"expected {J + 2} fields, got {len(fields)}", gene_id, lineno)
        iso.append(fields[0])
        lengths.append(fields[1])
        try:
            rates.append([float(x) for x in fields[2:]])
        except ValueError:
            raise GeneFileError("non-numeric rate", gene_id, lineno) from None
    lineno, cfields = counts
    if len(cfields) != J:
        raise GeneFileError(f"expected {J} counts, got {len(cfields)}", gene_id, lineno)
    try:
        cvals = [int(x) for x in cfields]
    except ValueError:
        raise GeneFileError("counts must be integers", gene_id, lineno) from None
    if all(x == "." for x in lengths):
        lengths = None
    else:
        try:
            lengths = [int(x) for x in lengths]
        except ValueError:
            raise GeneFileError("lengths must be all integers or all '.'", gene_id) from None
    total = meta.get("total_mapped_reads")
    if total is not None:
        try:
            total = int(total)
        except ValueError:
            raise GeneFileError("total_mapped_reads must be an integer", gene_id) from None
    try:
        return [GeneInstance(gene_id, tuple(iso), tuple(header), np.asarray(rates),
                             np.asarray(cvals, dtype=float), lengths, total)]
    except GeneFileError as exc:
        raise GeneFileError(exc.detail, gene_id) from None


def format_tsv(gene):
    lines = [f"#gene_id\t{gene.gene_id}"]
    if gene.has_lengths:
        lines.append(f"#total_mapped_reads\t{gene.total_mapped_reads}")
    lines.append("\t".join(["isoform", "length", *gene.category_ids]))
    for i, iso in enumerate(gene.isoform_ids):
        length = str(int(gene.lengths[i])) if gene.has_lengths else "."
        lines.append("\t".join([iso, length, *(repr(float(x)) for x in gene.rates[i])]))
    lines.append("\t".join(["#counts", *(str(int(c)) for c in gene.counts)]))
    return "\n".join(lines) + "\n"


# --- files --------------------------------------------------------------------

def _is_tsv(path):
    return str(path).endswith(".tsv")


def parse_gene_file(path):
    """Read every gene record in ``path`` (TSV if it ends in ``.tsv``)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_tsv(text) if _is_tsv(path) else parse_json_lines(text)


def format_genes(genes, tsv=False):
    if tsv:
        if len(genes) != 1:
            raise ValueError("the TSV layout holds exactly one gene")
        return format_tsv(genes[0])
    return "".join(format_gene_json(g) + "\n" for g in genes)


def write_gene_file(genes, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_genes(genes, _is_tsv(path)))


# --- fit reports --------------------------------------------------------------

FIT_COLUMNS = ("gene_id", "isoform_id", "mode", "theta", "rpkm", "theta_no_bias",
               "rpkm_no_bias", "fold_change_flag", "support", "objective", "converged",
               "iterations")


def fold_change_flag(corrected_total, baseline_total):
    """True when the corrected/baseline ratio is outside [0.5, 2] or undefined."""
    if baseline_total == 0:
        return True
    ratio = corrected_total / baseline_total
    return not (0.5 <= ratio <= 2.0) or math.isnan(ratio)
