use cocycle_lab::lyapunov::exact_exponent_base;
use cocycle_lab::regions::{classify, ParameterPoint};
use cocycle_lab_wasm::ops;
use serde_json::Value;

const LO: f64 = 1.01;
const HI: f64 = 6.0;
const CELLS: u32 = 64;

fn width() -> f64 {
    (HI - LO) / f64::from(CELLS)
}

fn cell_index(value: f64) -> usize {
    ((value - LO) / width()) as usize
}

fn cell_center(index: usize) -> f64 {
    LO + (index as f64 + 0.5) * width()
}

#[test]
fn grid_layout_matches_the_documented_indexing() {
    let alpha = 0.4;
    let p = 0.5;
    let grid = ops::region_grid(alpha, p, LO, HI, LO, HI, CELLS).unwrap();
    assert_eq!(grid.len(), (CELLS * CELLS) as usize);
    // spot-check corners, the primary orientation, and the swapped one
    for (row, col) in [(0, 0), (1, 2), (12, 38), (38, 2), (63, 63)] {
        let pt = ParameterPoint::new(cell_center(col), cell_center(row), alpha, p).unwrap();
        let expected = ops::display_code(&classify(&pt).labels);
        assert_eq!(grid[row * CELLS as usize + col], expected, "({row},{col})");
    }
}

#[test]
fn grid_codes_at_known_points() {
    let grid = ops::region_grid(0.4, 0.5, LO, HI, LO, HI, CELLS).unwrap();
    let idx = cell_index(2.0) * CELLS as usize + cell_index(4.0);
    assert_eq!(grid[idx], ops::CODE_BOCKER_VIANA);

    let grid = ops::region_grid(1.0, 0.5, LO, HI, LO, HI, CELLS).unwrap();
    let idx = cell_index(1.1) * CELLS as usize + cell_index(1.2);
    assert_eq!(grid[idx], ops::CODE_FIBER_BUNCHED);
}

#[test]
fn grid_rejects_bad_axes_and_sizes() {
    assert!(ops::region_grid(0.4, 0.5, 1.0, 6.0, LO, HI, 8).is_err());
    assert!(ops::region_grid(0.4, 0.5, LO, HI, 6.0, 2.0, 8).is_err());
    assert!(ops::region_grid(0.4, 0.5, LO, HI, LO, HI, 0).is_err());
    assert!(ops::region_grid(0.4, 0.5, LO, HI, LO, HI, ops::MAX_GRID_CELLS + 1).is_err());
}

#[test]
fn classify_point_reports_the_worked_labels() {
    let doc: Value =
        serde_json::from_str(&ops::classify_point_json(4.0, 2.0, 0.4, 0.5).unwrap()).unwrap();
    let labels: Vec<&str> = doc["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l.as_str().unwrap())
        .collect();
    assert_eq!(
        labels,
        ["THEOREM_A_DISCONTINUITY", "BOCKER_VIANA_DISCONTINUITY"]
    );
    assert_eq!(doc["point"]["sigma"], 4.0);
}

#[test]
fn curve_samples_the_closed_form() {
    let doc: Value = serde_json::from_str(&ops::exponent_curve_json(4.0, 2.0, 8).unwrap()).unwrap();
    assert_eq!(doc["locus_p"].as_f64().unwrap(), 0.33333333333333337);
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 8);
    for (i, point) in points.iter().enumerate() {
        let p = (i as f64 + 0.5) / 8.0;
        assert_eq!(point["p"].as_f64().unwrap(), p);
        assert_eq!(
            point["exact"].as_f64().unwrap(),
            exact_exponent_base(4.0, 2.0, p).unwrap()
        );
    }
    assert!(ops::exponent_curve_json(4.0, 2.0, 1).is_err());
}

#[test]
fn base_estimate_matches_the_native_run_bit_for_bit() {
    // same seed and budget as the CLI smoke run; the serial executor must
    // reproduce the threaded result exactly
    let doc: Value = serde_json::from_str(
        &ops::exponent_estimate_json(4.0, 2.0, 4.0 / 3.0, 0.5, 0, 2000, 8, 0).unwrap(),
    )
    .unwrap();
    let est = &doc["estimate"];
    assert_eq!(est["lambda_plus"].as_f64().unwrap(), 0.35853037914464053);
    assert_eq!(est["exact"].as_f64().unwrap(), 0.34657359027997264);
    assert_eq!(
        doc["lambda_minus"].as_f64().unwrap(),
        -est["lambda_plus"].as_f64().unwrap()
    );
}

#[test]
fn perturbed_estimate_has_no_exact_reference() {
    let doc: Value = serde_json::from_str(
        &ops::exponent_estimate_json(4.0, 2.0, 4.0 / 3.0, 0.5, 1, 2000, 4, 0).unwrap(),
    )
    .unwrap();
    assert!(doc["estimate"].get("exact").is_none());
    assert!(ops::exponent_estimate_json(4.0, 2.0, 4.0 / 3.0, 0.5, 0, ops::MAX_STEPS + 1, 4, 0).is_err());
}

#[test]
fn holder_table_stays_within_the_bound() {
    let doc: Value =
        serde_json::from_str(&ops::holder_table_json(4.0, 2.0, 0.4, 4.0 / 3.0, 3).unwrap())
            .unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["k"], i as u64 + 1);
        assert_eq!(row["within"], true);
        assert_eq!(row["decays"], true);
    }
    assert!(rows[2]["norm"].as_f64().unwrap() < rows[0]["norm"].as_f64().unwrap());
    assert!(ops::holder_table_json(4.0, 2.0, 0.4, 4.0 / 3.0, 4).is_err());
}

#[test]
fn locus_matches_the_frozen_value() {
    assert_eq!(ops::zero_locus_p(4.0, 2.0).unwrap(), 0.33333333333333337);
}
