import json

import numpy as np
import pytest

from isobias.genefile import (
    GeneFileError,
    GeneInstance,
    fold_change_flag,
    format_genes,
    parse_gene_file,
    parse_json_lines,
    parse_tsv,
    rpkm,
    write_gene_file,
)

ONE = {"gene_id": "G1", "isoform_ids": ["a"], "category_ids": ["e1", "e2", "e3", "e4", "e5"],
       "rates": [[10.0] * 5], "counts": [74, 10, 9, 11, 8]}
TWO = {"gene_id": "G2", "isoform_ids": ["a", "b"], "category_ids": ["x", "y", "z"],
       "rates": [[5.0, 2.5, 0.0], [1.0, 0.0, 3.0]], "counts": [12, 3, 7],
       "lengths": [1500, 900], "total_mapped_reads": 2000000}


def _lines(*recs):
    return "".join(json.dumps(r) + "\n" for r in recs)


def test_valid_record():
    (g,) = parse_json_lines(_lines(ONE))
    assert g.rates.shape == (1, 5)
    np.testing.assert_array_equal(g.counts, [74, 10, 9, 11, 8])
    assert not g.has_lengths


def test_negative_count_rejected():
    bad = dict(ONE, counts=[74, -1, 9, 11, 8])
    with pytest.raises(GeneFileError) as exc:
        parse_json_lines(_lines(TWO, bad))
    assert exc.value.gene_id == "G1" and exc.value.line == 2


def test_dead_column_with_reads_rejected():
    bad = dict(TWO, counts=[12, 3, 7], rates=[[5.0, 0.0, 0.0], [1.0, 0.0, 3.0]])
    with pytest.raises(GeneFileError, match="positive count"):
        parse_json_lines(_lines(bad))


@pytest.mark.parametrize("change", [
    {"counts": [1.5, 2, 3]},
    {"lengths": [100, 200]},
    {"lengths": [100, 0], "total_mapped_reads": 10},
    {"total_mapped_reads": 0},
    {"category_ids": ["x", "y"]},
    {"isoform_ids": ["a"]},
    {"rates": [1, 2, 3]},
])
def test_invariant_violations(change):
    rec = dict(TWO, **change)
    if "lengths" in change and "total_mapped_reads" not in change:
        rec.pop("total_mapped_reads")
    with pytest.raises(GeneFileError):
        parse_json_lines(_lines(rec))


def test_missing_field_and_bad_json():
    with pytest.raises(GeneFileError, match="missing"):
        parse_json_lines(_lines({"gene_id": "X"}))
    with pytest.raises(GeneFileError) as exc:
        parse_json_lines(_lines(ONE) + "{not json\n")
    assert exc.value.line == 2


def test_json_round_trip_is_byte_identical(tmp_path):
    text = _lines(ONE, TWO)
    path = tmp_path / "genes.jsonl"
    path.write_text(text)
    genes = parse_gene_file(path)
    out = tmp_path / "again.jsonl"
    write_gene_file(genes, out)
    assert out.read_text() == text


@pytest.mark.parametrize("rec", [ONE, TWO])
def test_tsv_round_trip_is_byte_identical(tmp_path, rec):
    (g,) = parse_json_lines(_lines(rec))
    text = format_genes([g], tsv=True)
    path = tmp_path / "gene.tsv"
    path.write_text(text)
    (h,) = parse_gene_file(path)
    assert format_genes([h], tsv=True) == text
    np.testing.assert_array_equal(h.rates, g.rates)
    np.testing.assert_array_equal(h.counts, g.counts)


def test_tsv_errors():
    good = format_genes(parse_json_lines(_lines(TWO)), tsv=True)
    with pytest.raises(GeneFileError):
        parse_tsv(good.replace("#gene_id\tG2\n", ""))
    with pytest.raises(GeneFileError) as exc:
        parse_tsv(good.replace("#counts\t12\t3\t7", "#counts\t12\t3"))
    assert exc.value.gene_id == "G2"
    with pytest.raises(GeneFileError):
        parse_tsv(good.replace("1500", "x"))


def test_lengths_and_total_go_together():
    with pytest.raises(GeneFileError):
        GeneInstance("g", ("a",), ("x",), [[1.0]], [1], lengths=[100])


def test_rpkm_examples():
    # 1000 expected reads on a 1 kb isoform out of 1e6 mapped reads
    assert rpkm([100.0], [[4.0, 6.0]], [1000], 10**6)[0] == pytest.approx(1000.0)
    assert rpkm([0.0], [[4.0, 6.0]], [1000], 10**6)[0] == 0.0
    A, L = [[1.0, 2.0], [3.0, 0.5]], [800, 1200]
    np.testing.assert_allclose(rpkm([2.0, 5.0], A, L, 2 * 10**6),
                               rpkm([2.0, 5.0], A, L, 10**6) / 2, rtol=1e-15)
    with pytest.raises(ValueError):
        rpkm([1.0], [[1.0]], None, 10)


@pytest.mark.parametrize("corr, base, flag", [
    (2.0, 1.0, False), (0.5, 1.0, False), (2.01, 1.0, True), (0.49, 1.0, True),
    (1.0, 0.0, True), (0.0, 0.0, True), (1.0, 1.0, False),
])
def test_fold_change_flag(corr, base, flag):
    assert fold_change_flag(corr, base) is flag
