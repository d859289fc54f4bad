use graphcorr::experiments::*;
use graphcorr::graph::GraphModel;
use graphcorr::io::read_matrix;

fn strip_timing(records: &[ExperimentRecord]) -> Vec<ExperimentRecord> {
    records
        .iter()
        .cloned()
        .map(|mut r| {
            r.wall_time_s = 0.0;
            r
        })
        .collect()
}

#[test]
fn distribution_entries_match_matrix_files() {
    let cfg = DistributionConfig {
        p: 12,
        density: 0.5,
        runs: 1,
        methods: vec![Method::Proposed],
        ..DistributionConfig::default()
    };
    let result = run_distribution_experiment(&cfg).unwrap();
    assert_eq!(result.records.len(), 1);
    assert_eq!(result.records[0].status, "solved");

    let dir = tempfile::tempdir().unwrap();
    let written = result.write(dir.path(), true).unwrap();
    assert!(written.contains(&"population_proposed.csv".to_string()));
    let m = read_matrix(&dir.path().join(matrix_file_name(0, Method::Proposed))).unwrap();
    let text = std::fs::read_to_string(dir.path().join("population_proposed.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "run,i,j,value");
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (i, j): (usize, usize) = (f[1].parse().unwrap(), f[2].parse().unwrap());
        let v: f64 = f[3].parse().unwrap();
        assert_eq!(v, m.get(i, j));
        rows += 1;
    }
    assert_eq!(rows, 2 * 33);
}

#[test]
fn distribution_population_sizes() {
    let cfg = DistributionConfig {
        p: 15,
        density: 0.5,
        runs: 3,
        ..DistributionConfig::default()
    };
    let result = run_distribution_experiment(&cfg).unwrap();
    let edges = (0.5_f64 * 105.0).round() as usize;
    assert_eq!(result.populations.len(), 3);
    for pop in &result.populations {
        assert_eq!(pop.entries.len(), 3 * 2 * edges, "{:?}", pop.method);
    }
    assert_eq!(result.records.len(), 9);
    assert_eq!(result.summaries.len(), 3);
}

#[test]
fn distribution_respects_mean_bound() {
    let cfg = DistributionConfig {
        p: 20,
        density: 0.9,
        runs: 2,
        b: 0.4,
        methods: vec![Method::Proposed],
        ..DistributionConfig::default()
    };
    let result = run_distribution_experiment(&cfg).unwrap();
    assert!(result.records.iter().all(|r| r.status == "solved"));
    let s = &result.summaries[0];
    assert!(s.mean >= 0.4 - 1e-6, "{}", s.mean);
}

#[test]
fn distribution_is_reproducible_and_order_free() {
    let base = DistributionConfig {
        p: 10,
        density: 0.4,
        runs: 3,
        ..DistributionConfig::default()
    };
    let a = run_distribution_experiment(&base).unwrap();
    let b = run_distribution_experiment(&DistributionConfig {
        parallel: false,
        ..base.clone()
    })
    .unwrap();
    assert_eq!(strip_timing(&a.records), strip_timing(&b.records));
    assert_eq!(a.matrices, b.matrices);
}

fn small_grid(model: GraphModel) -> FeasibilityConfig {
    FeasibilityConfig {
        grid: GridSpec {
            b_values: vec![-1.0, 0.3, 0.9],
            d_values: vec![0.2, 0.6, 1.0],
            runs: 2,
            model,
            p: 12,
        },
        ..FeasibilityConfig::default()
    }
}

#[test]
fn feasibility_grid_structure() {
    let result = run_feasibility_grid(&small_grid(GraphModel::ErdosRenyi)).unwrap();
    assert_eq!(result.cells.len(), 9);
    for d in 0..3 {
        assert_eq!(result.cell(0, d).unwrap().proportion, 1.0);
    }
    assert!(result.is_monotone_in_b());
    // Complete graph at b = 0.9: the all-0.9 pattern is PSD.
    assert_eq!(result.cell(2, 2).unwrap().proportion, 1.0);
    // Sparse graphs cannot reach a mean of 0.9.
    assert_eq!(result.cell(2, 0).unwrap().proportion, 0.0);
}

#[test]
fn complete_graph_reaches_unit_mean() {
    let cfg = FeasibilityConfig {
        grid: GridSpec {
            b_values: vec![-1.0, 1.0],
            d_values: vec![1.0],
            runs: 2,
            model: GraphModel::ErdosRenyi,
            p: 10,
        },
        ..FeasibilityConfig::default()
    };
    let result = run_feasibility_grid(&cfg).unwrap();
    assert_eq!(result.cell(1, 0).unwrap().proportion, 1.0);
}

#[test]
fn feasibility_cells_are_independent_of_execution_order() {
    let cfg = small_grid(GraphModel::WattsStrogatz { k: None, beta: 0.1 });
    let par = run_feasibility_grid(&cfg).unwrap();
    let seq = run_feasibility_grid(&FeasibilityConfig {
        parallel: false,
        ..cfg.clone()
    })
    .unwrap();
    assert_eq!(par.cells, seq.cells);
    assert_eq!(strip_timing(&par.records), strip_timing(&seq.records));
}

#[test]
fn feasibility_rejects_bad_grid() {
    let mut cfg = small_grid(GraphModel::ErdosRenyi);
    cfg.grid.b_values = vec![0.5, 0.1];
    assert!(cfg.validate().is_err());
    let mut cfg = small_grid(GraphModel::ErdosRenyi);
    cfg.grid.d_values = vec![0.0, 0.5];
    assert_eq!(cfg.validate().unwrap_err().0, "/d_values/0");
    let mut cfg = small_grid(GraphModel::ErdosRenyi);
    cfg.grid.runs = 0;
    assert!(run_feasibility_grid(&cfg).is_err());
}

#[test]
fn runtime_single_cell() {
    let cfg = RuntimeConfig {
        models: vec![GraphModel::ErdosRenyi],
        densities: vec![0.5],
        runs: 1,
        p: 15,
        ..RuntimeConfig::default()
    };
    let result = run_runtime_benchmark(&cfg).unwrap();
    assert_eq!(result.groups.len(), 1);
    assert_eq!(result.records.len(), 1);
    assert!(result.groups[0].median_s > 0.0);
}

#[test]
fn runtime_repeats_statuses_and_iterations() {
    let cfg = RuntimeConfig {
        densities: vec![0.3, 0.8],
        runs: 2,
        p: 15,
        ..RuntimeConfig::default()
    };
    let a = run_runtime_benchmark(&cfg).unwrap();
    let b = run_runtime_benchmark(&cfg).unwrap();
    assert_eq!(a.groups.len(), 8);
    assert_eq!(a.trends.len(), 4);
    assert_eq!(strip_timing(&a.records), strip_timing(&b.records));
    let dir = tempfile::tempdir().unwrap();
    let files = a.write(dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let back = read_records(&dir.path().join("records.csv")).unwrap();
    assert_eq!(back.len(), a.records.len());
    assert_eq!(back[0].graph_params, a.records[0].graph_params);
}
