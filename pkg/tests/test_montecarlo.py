import dataclasses
import itertools
import random

import numpy as np
import pytest

from sepaird import SimParams
from sepaird.montecarlo import (
    BOX_COLUMNS,
    CSV_COLUMNS,
    DatasetError,
    MetricRow,
    QUANTILE_COLUMNS,
    Scenario,
    SweepDataset,
    SweepGrid,
    grid_from_text,
    notched_box,
    quantile_series,
    read_boxes,
    read_dataset,
    read_quantiles,
    replication_seed,
    sweep,
    validate_grid,
    write_boxes,
    write_dataset,
    write_manifest,
    write_quantiles,
)
from sepaird.params import ConfigError

BASE_SCENARIO = Scenario(0.02, 0.5, 0.99, True, 0.0)


def make_row(scenario, replication, step, **metrics):
    values = dict(
        mutation_prob=scenario.mutation_prob,
        cross_immunity=scenario.cross_immunity,
        cross_protection=scenario.cross_protection,
        isolate_symptomatic=scenario.isolate_symptomatic,
        social_distancing=scenario.social_distancing,
        replication=replication,
        step=step,
        share_infected=0.0,
        mortality=0.0,
        cumulative_infected_share=0.0,
        mean_r0=0.0,
        mean_adapted_ratio=1.0,
        max_antigenic_distance=0,
        mean_phylo_distance=0.0,
        mean_infectiousness=0.0,
        mean_latent_end=0.0,
        mean_incubation_end=0.0,
        mean_duration=0.0,
        mean_symptomatic_chance=0.0,
        mean_fatality=0.0,
        active_variant_count=1,
        extinct=False,
    )
    values.update(metrics)
    return MetricRow(**values)


@pytest.fixture(scope="module")
def mini_grid():
    base = SimParams(n_agents=200, n_initial_infected=5, seed=7)
    return SweepGrid(
        base=base,
        mutation_probs=(0.0, 0.05),
        cross_immunities=(0.5,),
        cross_protections=(0.99,),
        isolations=(False,),
        distancings=(0.0, 0.4),
        replications=2,
        horizon=15,
        base_seed=42,
    )


@pytest.fixture(scope="module")
def mini_dataset(mini_grid):
    return sweep(mini_grid)


# -- scenarios and grids ------------------------------------------------


def test_scenario_key_format_is_stable():
    # replication seeds hash this string; changing it would silently
    # reshuffle every published dataset
    assert BASE_SCENARIO.key() == (
        "mutation_prob=0.02,cross_immunity=0.5,cross_protection=0.99,"
        "isolate_symptomatic=true,social_distancing=0.0"
    )


def test_scenario_apply_round_trip(base_params):
    p = BASE_SCENARIO.apply(base_params)
    assert p.mutation_prob == 0.02
    assert p.isolate_symptomatic is True
    assert Scenario.from_params(p) == BASE_SCENARIO
    assert p.n_agents == base_params.n_agents  # untouched fields survive


def test_grid_enumerates_full_product(mini_grid):
    combos = mini_grid.scenarios()
    assert len(combos) == 4
    expected = [
        Scenario(m, 0.5, 0.99, False, d)
        for m, d in itertools.product((0.0, 0.05), (0.0, 0.4))
    ]
    assert combos == expected


def test_default_grid_size(base_params):
    assert len(SweepGrid(base=base_params).scenarios()) == 4 * 3 * 2 * 2 * 6


def test_validate_grid_accepts_default(mini_grid):
    assert validate_grid(mini_grid) is mini_grid


def test_validate_grid_rejects_bad_shapes(mini_grid):
    with pytest.raises(DatasetError, match="mutation_prob is empty"):
        validate_grid(dataclasses.replace(mini_grid, mutation_probs=()))
    with pytest.raises(DatasetError, match="replications"):
        validate_grid(dataclasses.replace(mini_grid, replications=0))
    with pytest.raises(DatasetError, match="horizon"):
        validate_grid(dataclasses.replace(mini_grid, horizon=0))
    with pytest.raises(ConfigError):
        validate_grid(dataclasses.replace(mini_grid, distancings=(1.5,)))


def test_grid_from_text_full(base_params):
    text = """
    # sweep dimensions
    mutation_prob = 0.0, 0.01
    cross_immunity = 0.9
    isolate_symptomatic = false, true

    social_distancing = 0.0, 0.5
    """
    grid = grid_from_text(text, base_params, replications=7)
    assert grid.mutation_probs == (0.0, 0.01)
    assert grid.cross_immunities == (0.9,)
    assert grid.cross_protections == (base_params.cross_protection,)
    assert grid.isolations == (False, True)
    assert grid.distancings == (0.0, 0.5)
    assert grid.replications == 7
    assert grid.horizon == base_params.horizon
    assert grid.base_seed == base_params.seed


def test_grid_from_text_trailing_commas(base_params):
    grid = grid_from_text("mutation_prob = 0.01,\n", base_params)
    assert grid.mutation_probs == (0.01,)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("mutation_prob 0.1", "expected key=value"),
        ("n_agents = 10", "unknown dimension"),
        ("mutation_prob = 0.1\nmutation_prob = 0.2", "duplicate"),
        ("mutation_prob =", "empty value list"),
        ("mutation_prob = abc", "bad value"),
        ("isolate_symptomatic = maybe", "bad value"),
    ],
)
def test_grid_from_text_rejects(text, fragment, base_params):
    with pytest.raises(DatasetError, match=fragment):
        grid_from_text(text, base_params)


def test_grid_from_text_reports_line_numbers(base_params):
    with pytest.raises(DatasetError, match="grid line 3"):
        grid_from_text("\n\nbogus = 1\n", base_params)


# -- seed derivation -----------------------------------------------------


def test_replication_seeds_ignore_grid_shape():
    # adding scenarios to a grid must never reshuffle existing streams
    s = replication_seed(42, BASE_SCENARIO, 3)
    assert s == replication_seed(42, BASE_SCENARIO, 3)
    assert s != replication_seed(42, BASE_SCENARIO, 4)
    assert s != replication_seed(43, BASE_SCENARIO, 3)
    other = dataclasses.replace(BASE_SCENARIO, social_distancing=0.2)
    assert s != replication_seed(42, other, 3)


def test_replication_seeds_spread():
    seeds = {
        replication_seed(42, BASE_SCENARIO, rep) for rep in range(500)
    }
    assert len(seeds) == 500


# -- sweeps ---------------------------------------------------------------


def test_sweep_row_count_and_order(mini_grid, mini_dataset):
    rows = mini_dataset.rows
    assert len(rows) == 4 * 2 * 15
    combos = mini_grid.scenarios()
    expected_order = [
        (sc, rep, step)
        for sc in combos
        for rep in range(2)
        for step in range(1, 16)
    ]
    assert [(r.scenario, r.replication, r.step) for r in rows] == expected_order


def test_sweep_is_deterministic(mini_grid, mini_dataset):
    again = sweep(mini_grid)
    assert again.rows == mini_dataset.rows


def test_sweep_workers_do_not_change_rows(mini_grid, mini_dataset):
    parallel = sweep(mini_grid, jobs=2)
    assert parallel.rows == mini_dataset.rows


def test_sweep_progress_callback(mini_grid):
    ticks = []
    sweep(dataclasses.replace(mini_grid, replications=1, horizon=3),
          progress=lambda done, total: ticks.append((done, total)))
    assert ticks == [(i, 4) for i in range(1, 5)]


def test_sweep_rows_reflect_scenario(mini_dataset):
    for row in mini_dataset.rows:
        assert row.mutation_prob in (0.0, 0.05)
        assert row.social_distancing in (0.0, 0.4)
        assert 0.0 <= row.share_infected <= 1.0
        assert 0.0 <= row.mortality <= 1.0


def test_dataset_scenarios_listing(mini_grid, mini_dataset):
    assert mini_dataset.scenarios() == mini_grid.scenarios()


# -- dataset serialization -------------------------------------------------


def test_dataset_csv_round_trip(tmp_path, mini_dataset):
    path = tmp_path / "dataset.csv"
    write_dataset(mini_dataset, path)
    assert read_dataset(path).rows == mini_dataset.rows


def test_dataset_csv_shape(tmp_path, mini_dataset):
    path = tmp_path / "dataset.csv"
    write_dataset(mini_dataset, path)
    raw = path.read_bytes().decode("utf-8")
    assert "\r" not in raw
    lines = raw.split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[-1] == ""  # trailing newline
    assert len(lines) == len(mini_dataset.rows) + 2
    first = lines[1].split(",")
    assert len(first) == len(CSV_COLUMNS)
    assert first[CSV_COLUMNS.index("isolate_symptomatic")] in ("true", "false")
    assert first[CSV_COLUMNS.index("extinct")] in ("true", "false")


def test_dataset_write_is_byte_stable(tmp_path, mini_dataset):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_dataset(mini_dataset, a)
    write_dataset(mini_dataset, b)
    assert a.read_bytes() == b.read_bytes()


def test_read_dataset_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(DatasetError, match="header mismatch"):
        read_dataset(path)


def test_read_dataset_reports_line_numbers(tmp_path, mini_dataset):
    path = tmp_path / "dataset.csv"
    write_dataset(mini_dataset, path)
    lines = path.read_text().splitlines()
    lines[3] = lines[3] + ",extra"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="line 4"):
        read_dataset(path)


def test_read_dataset_rejects_bad_cells(tmp_path, mini_dataset):
    path = tmp_path / "dataset.csv"
    write_dataset(mini_dataset, path)
    lines = path.read_text().splitlines()
    cells = lines[2].split(",")
    cells[CSV_COLUMNS.index("extinct")] = "perhaps"
    lines[2] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="line 3"):
        read_dataset(path)


# -- aggregation ------------------------------------------------------------


def test_quantile_series_linear_interpolation():
    rows = [
        make_row(BASE_SCENARIO, rep, 1, mortality=float(rep + 1))
        for rep in range(100)
    ]
    ds = SweepDataset(rows=tuple(rows))
    got = quantile_series(ds, "mortality", (0.05, 0.5, 0.95))
    values = np.arange(1.0, 101.0)
    assert [q.quantile for q in got] == [0.05, 0.5, 0.95]
    for row, level in zip(got, (0.05, 0.5, 0.95)):
        assert row.scenario == BASE_SCENARIO
        assert row.step == 1
        assert row.value == pytest.approx(np.quantile(values, level))
    assert got[1].value == pytest.approx(50.5)


def test_quantile_series_orders_levels_pointwise(mini_dataset):
    rows = quantile_series(mini_dataset, "share_infected")
    by_key = {}
    for row in rows:
        by_key.setdefault((row.scenario, row.step), []).append(row.value)
    for values in by_key.values():
        assert values == sorted(values)


def test_quantile_series_is_permutation_invariant(mini_dataset):
    shuffled = list(mini_dataset.rows)
    random.Random(99).shuffle(shuffled)
    ds = SweepDataset(rows=tuple(shuffled))
    assert quantile_series(ds, "mortality") == quantile_series(
        mini_dataset, "mortality"
    )


def test_quantile_series_rejects_bad_input(mini_dataset):
    with pytest.raises(DatasetError, match="unknown metric"):
        quantile_series(mini_dataset, "bogus")
    with pytest.raises(DatasetError, match="out of"):
        quantile_series(mini_dataset, "mortality", (1.5,))


def test_mortality_quantiles_never_decrease(mini_dataset):
    # cumulative metric: every quantile trace is monotone in the step
    rows = quantile_series(mini_dataset, "mortality")
    series = {}
    for row in rows:
        series.setdefault((row.scenario, row.quantile), []).append(
            (row.step, row.value)
        )
    for trace in series.values():
        ordered = [v for _, v in sorted(trace)]
        assert all(a <= b + 1e-15 for a, b in zip(ordered, ordered[1:]))


def test_notched_box_small_oracle():
    values = (1.0, 2.0, 3.0, 4.0, 100.0)
    rows = [
        make_row(BASE_SCENARIO, rep, 7, mortality=v) for rep, v in enumerate(values)
    ]
    ds = SweepDataset(rows=tuple(rows))
    (box,) = notched_box(ds, "mortality", step=7)
    assert box.scenario == BASE_SCENARIO
    assert box.median == 3.0
    assert (box.q1, box.q3) == (2.0, 4.0)
    assert (box.whisker_low, box.whisker_high) == (1.0, 4.0)
    assert box.outliers == (100.0,)
    half = 1.58 * 2.0 / np.sqrt(5)
    assert box.notch_low == pytest.approx(3.0 - half)
    assert box.notch_high == pytest.approx(3.0 + half)


def test_notched_box_requires_data_at_step(mini_dataset):
    with pytest.raises(DatasetError, match="no data at step"):
        notched_box(mini_dataset, "mortality", step=999)


def test_notched_box_per_scenario(mini_dataset):
    boxes = notched_box(mini_dataset, "cumulative_infected_share", step=15)
    assert [b.scenario for b in boxes] == sorted(mini_dataset.scenarios())
    for b in boxes:
        assert b.whisker_low <= b.q1 <= b.median <= b.q3 <= b.whisker_high


# -- aggregate serialization -------------------------------------------------


def test_quantiles_round_trip(tmp_path, mini_dataset):
    rows = quantile_series(mini_dataset, "mortality")
    path = tmp_path / "quantiles.csv"
    write_quantiles(rows, path)
    assert path.read_text().splitlines()[0] == ",".join(QUANTILE_COLUMNS)
    assert read_quantiles(path) == rows


def test_boxes_round_trip(tmp_path, mini_dataset):
    rows = notched_box(mini_dataset, "mortality", step=15)
    path = tmp_path / "boxes.csv"
    write_boxes(rows, path)
    assert path.read_text().splitlines()[0] == ",".join(BOX_COLUMNS)
    assert read_boxes(path) == rows


def test_boxes_round_trip_with_outliers(tmp_path):
    values = (1.0, 2.0, 3.0, 4.0, 100.0)
    rows = [
        make_row(BASE_SCENARIO, rep, 7, mortality=v) for rep, v in enumerate(values)
    ]
    boxes = notched_box(SweepDataset(rows=tuple(rows)), "mortality", step=7)
    path = tmp_path / "boxes.csv"
    write_boxes(boxes, path)
    assert read_boxes(path) == boxes


def test_manifest_lists_every_replication(tmp_path, mini_grid):
    path = tmp_path / "manifest.csv"
    write_manifest(mini_grid, path)
    lines = path.read_text().splitlines()
    assert lines[0].endswith(",replication,seed")
    assert len(lines) == 1 + 4 * 2
    first = lines[1].split(",")
    expected = replication_seed(42, mini_grid.scenarios()[0], 0)
    assert first[-2:] == ["0", str(expected)]
