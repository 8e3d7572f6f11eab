"""
A reduced benchmark grid, end to end
====================================

Runs the classifier x ranker x selector grid on the two shipped datasets
(three sampling runs, two fast classifiers), then builds the rank
analysis and the visual report.  Expect a couple of minutes; results are
reproducible byte for byte from the master seed.
"""

from pathlib import Path

from widefs.harness import GridConfig, load_manifest, run_grid
from widefs.report import GlyphSpec, emit_glyph_svg, emit_rank_table
from widefs.stats import combination_ranking, glyph_rank_series, selector_rank_table

DATA = Path(__file__).resolve().parent.parent / "data"

config = GridConfig(
    datasets=tuple(load_manifest(DATA / "manifest.csv")),
    per_class=10,
    runs=3,
    classifiers=("LDC", "NN1"),
    rankers=("SU", "RELIEFF"),
    selectors=("TOP3", "EX10", "RND20"),
    master_seed=20,
)
records = run_grid(config, out_path="demo_results.jsonl", workers=1)
print(f"grid complete: {len(records)} records -> demo_results.jsonl")

# Selector ranks per classifier/ranker pair, with the group of selectors
# statistically indistinguishable from the best one.
rows = selector_rank_table(records, metric="true")
for row in rows:
    ranks = ", ".join(f"{s}={v:.2f}" for s, v in row["avg_ranks"].items())
    print(f"  {row['classifier']}/{row['ranker']}: {ranks}  best group: {sorted(row['best_group'])}")
html, csv_twin = emit_rank_table(rows, "demo_rank_table.html")
print(f"wrote {html} and {csv_twin}")

# Every classifier/ranker/selector combination, ranked jointly.
combos = combination_ranking(records, metric="true")
print("\ntop 5 combinations (avg rank over dataset x run columns):")
for c, r, s, avg in combos[:5]:
    print(f"  {avg:6.2f}  {c} / {r or '-'} / {s}")

# Glyph plots put one spoke per dataset, so they need at least three
# datasets in the manifest; with the two shipped sets this politely
# skips.  Point the manifest at your own collection to populate it.
try:
    spokes, series = glyph_rank_series(records, "selector")
    spec = GlyphSpec(spokes=tuple(spokes), series=tuple((k, tuple(v)) for k, v in series.items()))
    print(f"wrote {emit_glyph_svg(spec, 'demo_glyph_selectors.svg')}")
except ValueError as exc:
    print(f"glyph skipped: {exc}")
