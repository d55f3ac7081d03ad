use std::fs;

use thz_orient::orientation::max_post_pulse_orientation;
use thz_orient::propagator::PropagationConfig;
use thz_orient::scans::{scan_e0_t, Axis, Component, ScanGrid, ScanRunner};
use thz_orient::units::{molecule, to_reduced, PhysicalField, PhysicalMolecule};

fn small_grid() -> ScanGrid {
    ScanGrid::b_t(
        Axis::new("B", "cm^-1", vec![8.0, 14.0, 21.0]).unwrap(),
        Axis::new("T", "K", vec![0.0, 20.0, 60.0]).unwrap(),
        PhysicalField::reference(),
        1.0,
    )
    .unwrap()
}

fn matrices(r: &thz_orient::scans::ScanResult) -> Vec<Vec<Vec<Option<f64>>>> {
    Component::ALL
        .iter()
        .flat_map(|&c| [r.matrix(c), r.signed_matrix(c)])
        .collect()
}

#[test]
fn single_cell_matches_direct_run() {
    let grid = ScanGrid::b_t(
        Axis::new("B", "cm^-1", vec![10.0]).unwrap(),
        Axis::new("T", "K", vec![30.0]).unwrap(),
        PhysicalField::reference(),
        1.0,
    )
    .unwrap();
    let result = ScanRunner::new(grid).run().unwrap();
    let cell = result.cells[0].as_ref().unwrap().max().copied().unwrap();
    let params = to_reduced(
        &PhysicalMolecule::new("x", 10.0, 1.0).unwrap(),
        &PhysicalField::reference(),
        30.0,
    )
    .unwrap();
    let (direct, _) = max_post_pulse_orientation(&params, &PropagationConfig::default()).unwrap();
    assert_eq!(cell, direct);
}

#[test]
fn zero_field_column_is_zero() {
    let r = scan_e0_t(
        vec![0.0, 0.1],
        vec![0.0, 5.0],
        molecule("HF").unwrap(),
        5.0,
        0.5,
        &PropagationConfig::default(),
    )
    .unwrap();
    let m = r.matrix(Component::Total);
    assert_eq!(m[0], vec![Some(0.0), Some(0.0)]);
    assert!(m[1][0].unwrap() > 0.0);
}

#[test]
fn rerun_and_resume_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let full_path = dir.path().join("full.ndjson");
    let full = ScanRunner {
        checkpoint: Some(full_path.clone()),
        ..ScanRunner::new(small_grid())
    }
    .run()
    .unwrap();
    assert!(full.is_complete());

    let again = ScanRunner::new(small_grid()).run().unwrap();
    assert_eq!(matrices(&full), matrices(&again));

    // interrupted after 4 cells, then a torn write, then resumed
    let part_path = dir.path().join("part.ndjson");
    let partial = ScanRunner {
        checkpoint: Some(part_path.clone()),
        cell_budget: Some(4),
        ..ScanRunner::new(small_grid())
    }
    .run()
    .unwrap();
    assert!(!partial.is_complete());
    let mut text = fs::read_to_string(&part_path).unwrap();
    assert_eq!(text.lines().count(), 5);
    text.push_str("{\"index\":7,\"i\":2,\"j\":");
    fs::write(&part_path, text).unwrap();

    let resumed = ScanRunner {
        checkpoint: Some(part_path.clone()),
        workers: Some(1),
        ..ScanRunner::new(small_grid())
    }
    .run()
    .unwrap();
    assert!(resumed.is_complete());
    assert_eq!(matrices(&full), matrices(&resumed));
    assert_eq!(fs::read_to_string(&part_path).unwrap().lines().count(), 10);

    // resuming a finished checkpoint computes nothing new
    let noop = ScanRunner {
        checkpoint: Some(part_path.clone()),
        cell_budget: Some(0),
        ..ScanRunner::new(small_grid())
    }
    .run()
    .unwrap();
    assert_eq!(matrices(&full), matrices(&noop));
}

#[test]
fn checkpoint_from_other_scan_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ndjson");
    ScanRunner {
        checkpoint: Some(path.clone()),
        cell_budget: Some(1),
        ..ScanRunner::new(small_grid())
    }
    .run()
    .unwrap();
    let mut other = small_grid();
    other.axis2.values[2] = 70.0;
    let err = ScanRunner {
        checkpoint: Some(path),
        ..ScanRunner::new(other)
    }
    .run()
    .unwrap_err();
    assert!(err.to_string().contains("different scan"));
}

#[test]
fn failing_cells_are_marked_not_filled() {
    // a basis that can never be wide enough
    let runner = ScanRunner {
        propagation: PropagationConfig {
            truncation_tolerance: 1e-300,
            max_headroom_doublings: 0,
            ..PropagationConfig::default()
        },
        ..ScanRunner::new(small_grid())
    };
    let r = runner.run().unwrap();
    assert_eq!(r.failed_cells(), 9);
    assert!(r.matrix(Component::Total).iter().flatten().all(Option::is_none));
}
