use std::fs;

use kfs_core::sweep::{run_sweep, Axis, SweepSpec};
use kfs_core::ModelParams;

fn spec(dir: &std::path::Path, name: &str) -> SweepSpec {
    let base = ModelParams::new(16).with_pump(0.8, 0.0).with_kerr(0.3);
    SweepSpec::new(
        base,
        vec![
            Axis {
                param: "lam".into(),
                values: vec![0.0, 0.3, 0.6],
            },
            Axis {
                param: "eta".into(),
                values: vec![0.5, 1.0],
            },
        ],
        dir.join(name),
    )
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = spec(dir.path(), "one.csv");
    let four = spec(dir.path(), "four.csv");
    run_sweep(&one, 1).unwrap();
    run_sweep(&four, 4).unwrap();
    let a = fs::read(&one.output).unwrap();
    let b = fs::read(&four.output).unwrap();
    assert_eq!(a, b);
    assert!(one.sidecar_path().exists());
    assert!(one.timing_path().exists());
}

#[test]
fn measurement_free_points_have_no_negativity_from_feedback() {
    // with lam = 0 the cavity state is coherent and W is a Gaussian
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(dir.path(), "null.csv");
    s.base = ModelParams::new(40).with_pump(1.0, 0.0);
    s.axes = vec![Axis {
        param: "amp".into(),
        values: vec![0.5, 1.0, 1.5],
    }];
    let res = run_sweep(&s, 2).unwrap();
    assert_eq!(res.rows.len(), 3);
    for row in &res.rows {
        let m = row.outcome.as_ref().unwrap();
        assert!(m.negativity < 1e-6, "{:?}: {}", row.values, m.negativity);
        assert!((m.mean_n - 4.0 * row.values[0] * row.values[0]).abs() < 1e-6);
    }
}
