import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from widefs.report import (
    GlyphSpec,
    emit_glyph_svg,
    emit_rank_table,
    emit_samplesize_curve_svg,
    emit_scatter_svg,
)


def table_rows(selectors=("TOP3", "EX10", "ALL")):
    return [
        {
            "classifier": "LDC",
            "ranker": "SU",
            "selectors": selectors,
            "avg_ranks": {s: float(i + 1) for i, s in enumerate(selectors)},
            "best_group": {selectors[0]},
            "n_blocks": 6,
        },
        {
            "classifier": "LDC",
            "ranker": "RELIEFF",
            "selectors": selectors,
            "avg_ranks": {s: 2.0 for s in selectors},
            "best_group": set(selectors),
            "n_blocks": 6,
        },
    ]


def assert_well_formed_standalone_svg(path):
    root = ET.fromstring(path.read_text(encoding="utf-8"))
    assert root.tag.endswith("svg")
    body = path.read_text(encoding="utf-8")
    refs = [u for u in re.findall(r'https?://[^"\s]+', body) if "w3.org" not in u]
    assert refs == [], f"external references found: {refs}"


class TestDeterminism:
    def test_rank_table_bytes_stable(self, tmp_path):
        a_html, a_csv = emit_rank_table(table_rows(), tmp_path / "a.html")
        b_html, b_csv = emit_rank_table(table_rows(), tmp_path / "b.html")
        assert a_html.read_bytes() == b_html.read_bytes()
        assert a_csv.read_bytes() == b_csv.read_bytes()

    def test_glyph_bytes_stable(self, tmp_path):
        spec = GlyphSpec(
            spokes=("d1", "d2", "d3", "d4"),
            series=(("m1", (1.0, 2.0, 1.5, 2.5)), ("m2", (2.0, 1.0, 2.5, 1.5))),
        )
        a = emit_glyph_svg(spec, tmp_path / "a.svg")
        b = emit_glyph_svg(spec, tmp_path / "b.svg")
        assert a.read_bytes() == b.read_bytes()

    def test_scatter_bytes_stable(self, tmp_path):
        rng = np.random.default_rng(0)
        est, tru = rng.random(50), rng.random(50)
        panels = [("resub", est, tru, "best: [1,2]")]
        a = emit_scatter_svg(panels, tmp_path / "a.svg")
        b = emit_scatter_svg(panels, tmp_path / "b.svg")
        assert a.read_bytes() == b.read_bytes()

    def test_curve_bytes_stable(self, tmp_path):
        rows = [(0.6, 0.05, 900.0), (0.7, 0.05, 500.0), (0.6, 0.01, 1400.0), (0.7, 0.01, 800.0)]
        a = emit_samplesize_curve_svg(rows, tmp_path / "a.svg")
        b = emit_samplesize_curve_svg(rows, tmp_path / "b.svg")
        assert a.read_bytes() == b.read_bytes()


class TestRankTable:
    def test_two_cell_extremes(self, tmp_path):
        rows = [{
            "classifier": "LDC", "ranker": "SU", "selectors": ("A_SEL", "B_SEL"),
            "avg_ranks": {"A_SEL": 1.0, "B_SEL": 2.0}, "best_group": {"A_SEL"}, "n_blocks": 4,
        }]
        html, _ = emit_rank_table(rows, tmp_path / "t.html")
        body = html.read_text(encoding="utf-8")
        assert "background:#ff0000" in body  # pure red at the block minimum
        assert "background:#0000ff" in body  # pure blue at the block maximum

    def test_uniform_ranks_white_and_boxed(self, tmp_path):
        rows = [table_rows()[1]]
        html, _ = emit_rank_table(rows, tmp_path / "t.html")
        body = html.read_text(encoding="utf-8")
        assert body.count("background:#ffffff") == 3
        assert body.count("2px solid") == 3

    def test_missing_cell_blank_with_warning(self, tmp_path):
        rows = table_rows()
        del rows[0]["avg_ranks"]["EX10"]
        with pytest.warns(UserWarning, match="missing rank cell"):
            html, csv_path = emit_rank_table(rows, tmp_path / "t.html")
        assert '<td style="border:1px solid #bbb;padding:4px 8px"></td>' in html.read_text()
        assert ",," in csv_path.read_text().splitlines()[1]

    def test_csv_twin_contents(self, tmp_path):
        _, csv_path = emit_rank_table(table_rows(), tmp_path / "t.html")
        lines = csv_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "classifier,ranker,TOP3,EX10,ALL,best_group"
        assert lines[1].startswith("LDC,SU,1.0000,2.0000,3.0000")

    def test_full_layout_shape(self, tmp_path):
        selectors = ("BEST3", "EX10", "RND20", "TOP3", "TOP10", "TOP20", "ALL")
        rows = []
        rng = np.random.default_rng(1)
        for c in ("NN1", "DT", "LDC", "NB", "RF", "SVMG", "SVML"):
            for r in ("RF_IMP", "RELIEFF", "SVM_W", "SVM_RFE", "SU"):
                ranks = rng.permutation(7) + 1.0
                rows.append({
                    "classifier": c, "ranker": r, "selectors": selectors,
                    "avg_ranks": {s: float(v) for s, v in zip(selectors, ranks)},
                    "best_group": {selectors[int(np.argmin(ranks))]},
                    "n_blocks": 200,
                })
        html, _ = emit_rank_table(rows, tmp_path / "t.html")
        body = html.read_text(encoding="utf-8")
        assert body.count("<tr>") == 1 + 35  # header plus 7x5 rows
        assert body.count("<th") == 2 + 7


class TestGlyph:
    def test_constant_series_regular_polygon(self, tmp_path):
        spec = GlyphSpec(spokes=("a", "b", "c", "d", "e"), series=(("flat", (2.0,) * 5),))
        path = emit_glyph_svg(spec, tmp_path / "g.svg")
        body = path.read_text(encoding="utf-8")
        pts = re.search(r'polygon points="([^"]+)"', body).group(1).split()
        xy = np.array([[float(v) for v in p.split(",")] for p in pts])
        radii = np.hypot(xy[:, 0] - 320.0, xy[:, 1] - 320.0)
        assert np.allclose(radii, radii[0], atol=1e-6)

    def test_structure_20_spokes_7_series(self, tmp_path):
        rng = np.random.default_rng(2)
        spec = GlyphSpec(
            spokes=tuple(f"ds{i}" for i in range(20)),
            series=tuple((f"m{i}", tuple(rng.uniform(1, 7, 20))) for i in range(7)),
        )
        path = emit_glyph_svg(spec, tmp_path / "g.svg")
        body = path.read_text(encoding="utf-8")
        assert body.count("<polygon") == 7
        assert sum(1 for name in (f"ds{i}" for i in range(20)) if f">{name}<" in body) == 20
        assert_well_formed_standalone_svg(path)

    def test_doubling_scales_radially(self, tmp_path):
        base = (1.0, 1.2, 0.8)
        anchor = ("big", (4.0, 4.0, 4.0))  # pins the radial scale
        p1 = emit_glyph_svg(GlyphSpec(("a", "b", "c"), (anchor, ("s", base))), tmp_path / "a.svg")
        doubled = tuple(2 * v for v in base)
        p2 = emit_glyph_svg(GlyphSpec(("a", "b", "c"), (anchor, ("s", doubled))), tmp_path / "b.svg")

        def radii(path):
            body = path.read_text(encoding="utf-8")
            polys = re.findall(r'polygon points="([^"]+)"', body)
            xy = np.array([[float(v) for v in p.split(",")] for p in polys[-1].split()])
            return np.hypot(xy[:, 0] - 320.0, xy[:, 1] - 320.0)

        assert np.allclose(radii(p2), 2.0 * radii(p1), atol=1e-3)

    def test_legend_orders_worst_first(self, tmp_path):
        spec = GlyphSpec(
            spokes=("a", "b", "c"),
            series=(("good", (1.0, 1.0, 1.0)), ("bad", (3.0, 3.0, 3.0))),
        )
        body = emit_glyph_svg(spec, tmp_path / "g.svg").read_text(encoding="utf-8")
        assert body.index(">bad<") < body.index(">good<")

    def test_too_few_spokes(self):
        with pytest.raises(ValueError, match="3 spokes"):
            GlyphSpec(spokes=("a", "b"), series=(("s", (1.0, 2.0)),))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            GlyphSpec(spokes=("a", "b", "c"), series=(("s", (1.0, 2.0)),))


class TestScatter:
    def test_three_panels_1023_points(self, tmp_path):
        rng = np.random.default_rng(3)
        tru = rng.random(1023)
        panels = [
            (label, rng.random(1023), tru, f"best: [{label}]")
            for label in ("resubstitution", "counting LOO", "smoothed LOO")
        ]
        path = emit_scatter_svg(panels, tmp_path / "s.svg")
        body = path.read_text(encoding="utf-8")
        assert body.count("<circle") == 3 * 1023
        assert body.count("<rect") == 1 + 3  # background plus one frame per panel
        assert "best: [resubstitution]" in body
        assert_well_formed_standalone_svg(path)

    def test_perfectly_calibrated_points_on_diagonal(self, tmp_path):
        v = np.linspace(0.1, 0.9, 9)
        path = emit_scatter_svg([("cal", v, v, "")], tmp_path / "s.svg")
        body = path.read_text(encoding="utf-8")
        circles = re.findall(r'<circle cx="([0-9.]+)" cy="([0-9.]+)"', body)
        side, x0, y0 = 300.0, 44.0, 44.0
        for cx, cy in circles:
            est = (float(cx) - x0) / side
            tru = (y0 + side - float(cy)) / side
            assert est == pytest.approx(tru, abs=1e-6)

    def test_empty_panels_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_scatter_svg([], tmp_path / "s.svg")
        with pytest.raises(ValueError, match="non-empty"):
            emit_scatter_svg([("x", np.array([]), np.array([]), "")], tmp_path / "s.svg")
