"""Replication-layer tests: tables, figures, diff report, rendering."""

import numpy as np
import pytest

from vaxsel import heckman, render, replicate
from vaxsel.panel import filter_percentile
from vaxsel.specs import ANCHOR_CELLS, ModelSpec, builtin_specs


@pytest.fixture(scope="module")
def table2(snapshot):
    return replicate.run_model_suite(snapshot)


class TestSpecs:
    def test_five_builtins(self):
        specs = builtin_specs()
        assert [s.name for s in specs] == [f"model{i}" for i in range(1, 6)]

    def test_days_never_in_selection(self):
        with pytest.raises(ValueError):
            ModelSpec("bad", ("cases", "days"), ("cases",))

    def test_soft_power_never_in_outcome(self):
        with pytest.raises(ValueError):
            ModelSpec("bad", ("cases",), ("soft_power_30",))

    def test_gov_eff_never_in_selection(self):
        with pytest.raises(ValueError):
            ModelSpec("bad", ("gov_eff",), ("cases",))


class TestDescriptiveTable:
    def test_counts_row(self, snapshot):
        table = replicate.descriptive_table(snapshot)
        assert table.observations == {"all": 189, "not_started": 133, "started": 56}

    def test_reference_means(self, snapshot):
        table = replicate.descriptive_table(snapshot)
        for code, want in (
            (("cases", "all"), 8.47),
            (("cases", "not_started"), 7.75),
            (("cases", "started"), 10.21),
            (("gov_eff", "all"), -0.05),
            (("gov_eff", "not_started"), -0.43),
            (("gov_eff", "started"), 0.83),
            (("pop_65", "all"), 0.55),
        ):
            assert table.cells[code].value == pytest.approx(want, abs=0.05)

    def test_single_record_group_has_blank_sd(self, snapshot):
        from vaxsel.panel import Panel

        one = Panel(records=snapshot.records[:1], defs=snapshot.defs,
                    snapshot_date=snapshot.snapshot_date)
        table = replicate.descriptive_table(one)
        for (row, col), cell in table.cells.items():
            assert cell.spread is None


class TestRunModelSuite:
    def test_anchor_pattern_table2(self, table2):
        t = table2
        for m in ("model1", "model2", "model3", "model4"):
            cell = t.cell("cases", f"{m}:selection")
            assert cell.value > 0 and cell.stars == "***"
        for m in ("model2", "model3"):
            cell = t.cell("soft_power_30", f"{m}:selection")
            assert cell.value > 0 and cell.stars == "***"
        assert t.cell("gdp", "model4:selection").value > 0
        assert t.cell("gdp", "model4:selection").stars == "***"
        assert t.cell("gdp_pc_ppp", "model5:selection").value > 0
        assert t.cell("gdp_pc_ppp", "model5:selection").stars == "***"
        for m in ("model1", "model2", "model3", "model4", "model5"):
            cell = t.cell("days", f"{m}:outcome")
            assert cell.value > 0 and cell.stars == "***"
        for m in ("model2", "model4"):
            cell = t.cell("gov_eff", f"{m}:outcome")
            assert cell.value > 0 and cell.stars == "***"
        assert t.cell("gov_eff", "model5:outcome").stars == ""

    def test_sign_pattern_models_2_to_4(self, table2):
        for m in ("model2", "model3", "model4"):
            if table2.cell("soft_power_30", f"{m}:selection"):
                assert table2.cell("soft_power_30", f"{m}:selection").value > 0
            assert table2.cell("cases", f"{m}:selection").value > 0
            assert table2.cell("days", f"{m}:outcome").value > 0
            if table2.cell("gov_eff", f"{m}:outcome"):
                assert table2.cell("gov_eff", f"{m}:outcome").value > 0

    def test_observations_row(self, table2):
        assert table2.observations["model1:selection"] == 165
        assert table2.observations["model2:selection"] == 187
        assert table2.observations["model5:selection"] == 148

    def test_cells_equal_fit_fields_exactly(self, snapshot, table2):
        fit = table2.fits["model2"]
        cell = table2.cell("gov_eff", "model2:outcome")
        j = fit.outcome_labels.index("gov_eff")
        assert cell.value == float(fit.outcome_coef[j])
        assert cell.spread == float(np.sqrt(fit.outcome_vcov[j, j]))

    def test_bad_spec_reported_in_cell_others_run(self, snapshot):
        specs = [
            builtin_specs()[0],
            ModelSpec("broken", ("cases", "mystery_var"), ("cases", "days")),
        ]
        table = replicate.run_model_suite(snapshot, specs)
        assert "broken:outcome" in table.column_errors
        assert "mystery_var" in table.column_errors["broken:outcome"]
        assert table.cell("cases", "model1:selection") is not None

    def test_rerun_is_identical(self, snapshot, table2):
        again = replicate.run_model_suite(snapshot)
        assert render.render_table_csv(again) == render.render_table_csv(table2)
        assert render.render_table_markdown(again) == render.render_table_markdown(table2)


class TestOutlierSuites:
    def test_identity_filters_reproduce_table2(self, snapshot, table2):
        same = filter_percentile(
            filter_percentile(snapshot, "gov_eff", 0.0, 1.0), "gdp", 0.0, 1.0
        )
        t = replicate.run_model_suite(same, builtin_specs())
        assert render.render_table_csv(t) == render.render_table_csv(table2)

    def test_robustness_patterns(self, snapshot):
        t3, t4 = replicate.run_outlier_suites(snapshot)
        assert t3.observations["model1:selection"] == 131
        assert t4.observations["model1:selection"] == 162
        for t, m4_req in ((t3, ("***",)), (t4, ("**", "***"))):
            for m in ("model2", "model4"):
                cell = t.cell("gov_eff", f"{m}:outcome")
                assert cell.value > 0
            assert t.cell("gov_eff", "model2:outcome").stars == "***"
            assert t.cell("gov_eff", "model4:outcome").stars in m4_req
            for m in ("model2", "model3", "model4"):
                assert t.cell("soft_power_30", f"{m}:selection").value > 0


class TestCorrelationMatrix:
    def test_self_correlation_is_one(self, snapshot):
        fig = replicate.correlation_matrix(snapshot, ["gov_eff", "gdp_pc_ppp"])
        lookup = {(a, b): v for a, b, v in fig.rows}
        assert lookup[("gov_eff", "gov_eff")] == pytest.approx(1.0, abs=1e-12)

    def test_negated_column_gives_minus_one(self, snapshot):
        import dataclasses

        from vaxsel.panel import Panel, VariableDef

        records = []
        for r in snapshot.records:
            values = dict(r.values)
            raw = dict(r.raw)
            v = values.get("gov_eff")
            values["neg_gov_eff"] = None if v is None else -v
            raw["neg_gov_eff"] = values["neg_gov_eff"]
            records.append(dataclasses.replace(r, values=values, raw=raw))
        pan = Panel(
            records=records,
            defs=snapshot.defs + [VariableDef("neg_gov_eff", "none")],
            snapshot_date=snapshot.snapshot_date,
        )
        fig = replicate.correlation_matrix(pan, ["gov_eff", "neg_gov_eff"])
        lookup = {(a, b): v for a, b, v in fig.rows}
        assert lookup[("gov_eff", "neg_gov_eff")] == pytest.approx(-1.0, abs=1e-12)

    def test_reference_correlation_anchor(self, snapshot):
        fig = replicate.correlation_matrix(snapshot, ["gov_eff", "gdp_pc_ppp"])
        lookup = {(a, b): v for a, b, v in fig.rows}
        assert lookup[("gov_eff", "gdp_pc_ppp")] == pytest.approx(0.83, abs=0.03)

    def test_constant_column_is_blank(self, snapshot):
        import dataclasses

        from vaxsel.panel import Panel, VariableDef

        records = [
            dataclasses.replace(
                r, values={**r.values, "flat": 1.0}, raw={**r.raw, "flat": 1.0}
            )
            for r in snapshot.records
        ]
        pan = Panel(records=records, defs=snapshot.defs + [VariableDef("flat", "none")],
                    snapshot_date=snapshot.snapshot_date)
        fig = replicate.correlation_matrix(pan, ["gov_eff", "flat"])
        lookup = {(a, b): v for a, b, v in fig.rows}
        assert lookup[("gov_eff", "flat")] is None


class TestFigures:
    def test_boxplot_reference_claims(self, snapshot):
        fig = replicate.gdp_boxplot_stats(snapshot)
        stats = {row[0]: row[1:] for row in fig.rows}
        mn, q1, med, q3, mx = stats["started"]
        mn0, q10, med0, q30, mx0 = stats["not_started"]
        assert med > med0
        assert q1 >= q30 - 0.5
        assert mn <= q1 <= med <= q3 <= mx

    def test_boxplot_single_value_group(self):
        from vaxsel.panel import CountryRecord, Panel, VariableDef

        defs = [VariableDef("gdp", "log"), VariableDef("started", "binary")]
        records = [
            CountryRecord("AAA", "A", {"gdp": 25.0, "started": 1.0},
                          {"gdp": np.exp(25.0), "started": 1.0}),
            CountryRecord("BBB", "B", {"gdp": 22.0, "started": 0.0},
                          {"gdp": np.exp(22.0), "started": 0.0}),
        ]
        fig = replicate.gdp_boxplot_stats(Panel(records=records, defs=defs))
        stats = {row[0]: row[1:] for row in fig.rows}
        assert stats["started"] == (25.0, 25.0, 25.0, 25.0, 25.0)
        assert stats["not_started"] == (22.0, 22.0, 22.0, 22.0, 22.0)

    def test_curve_monotone_and_banded(self, snapshot):
        fig = replicate.conditional_start_curve(snapshot, n_points=50)
        probs = np.array([r[1] for r in fig.rows])
        lowers = np.array([r[2] for r in fig.rows])
        uppers = np.array([r[3] for r in fig.rows])
        assert np.all(np.diff(probs) > 0)  # positive slope
        assert np.all(lowers <= probs) and np.all(probs <= uppers)
        t = fig.meta["slope"] / fig.meta["slope_se"]
        assert fig.meta["slope"] > 0 and t > 2.575829

    def test_curve_grid_validation(self, snapshot):
        with pytest.raises(ValueError):
            replicate.conditional_start_curve(snapshot, grid=[0.0, 50.0])

    def test_scatter_fit(self, snapshot):
        fig = replicate.goveff_scatter_fit(snapshot)
        assert len(fig.rows) == 56
        assert fig.meta["slope"] > 0
        assert fig.meta["p"] < 0.01

    def test_scatter_perfect_line(self):
        # perfectly collinear synthetic points: exact slope, p ~ 0
        import dataclasses

        from vaxsel.panel import CountryRecord, Panel, VariableDef

        defs = [
            VariableDef("gov_eff", "none"),
            VariableDef("vac_php", "log"),
            VariableDef("started", "binary"),
        ]
        records = []
        for i in range(8):
            x = float(i)
            records.append(
                CountryRecord(
                    iso3=f"C{i:02d}",
                    name=f"Land{i}",
                    values={"gov_eff": x, "vac_php": 1.0 + 2.0 * x, "started": 1.0},
                    raw={"gov_eff": x, "vac_php": np.exp(1.0 + 2.0 * x), "started": 1.0},
                )
            )
        pan = Panel(records=records, defs=defs)
        fig = replicate.goveff_scatter_fit(pan)
        assert fig.meta["slope"] == pytest.approx(2.0, abs=1e-9)
        assert fig.meta["p"] < 1e-12


class TestDiffReport:
    def test_contains_every_anchor(self, snapshot):
        text = replicate.replication_diff(snapshot)
        assert "0.718*** (0.217)" in text
        assert "0.400*** (0.127)" in text
        for a in ANCHOR_CELLS:
            assert f"| {a.table} | {a.model} | {a.stage} | {a.variable} |" in text

    def test_deterministic(self, snapshot):
        assert replicate.replication_diff(snapshot) == replicate.replication_diff(snapshot)


class TestRender:
    def test_round3_half_away_from_zero(self):
        assert render.round3(0.0005) == "0.001"
        assert render.round3(-0.0005) == "-0.001"
        assert render.round3(2.1285) == "2.129"
        assert render.round3(0.718) == "0.718"

    def test_markdown_contains_stars_and_parens(self, table2):
        text = render.render_table_markdown(table2)
        assert "| cases |" in text
        assert "***" in text and "(" in text
        assert "observations" in text

    def test_csv_full_precision(self, table2):
        text = render.render_table_csv(table2)
        cell = table2.cell("cases", "model2:selection")
        assert repr(cell.value) in text

    def test_svg_rendering_is_deterministic(self, snapshot):
        figs = replicate.all_figures(snapshot, grid_points=40)
        for fig in figs:
            assert render.render_figure_svg(fig) == render.render_figure_svg(fig)
            assert render.render_figure_svg(fig).startswith("<svg")

    def test_unknown_figure_id(self):
        with pytest.raises(ValueError):
            render.render_figure_svg(replicate.FigureData("figX", [], []))
