//! End-to-end checks of the `cvent` binary: schemas, determinism, exit
//! codes and the documented row-level behaviors, on small grids.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn estimate_surface_schema_and_zero_row() {
    let text = stdout_of(&[
        "estimate-surface",
        "--q-points",
        "3",
        "--l-points",
        "4",
        "--q-max",
        "0.9",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["q", "l_over_la", "estimate_nats"]);
    assert_eq!(rows.len(), 12);
    // q = 0 rows vanish identically.
    for row in rows.iter().filter(|r| r[0] == 0.0) {
        assert_eq!(row[2], 0.0);
    }
    // Each q block is nonincreasing along the length axis.
    for block in rows.chunks(4) {
        for pair in block.windows(2) {
            assert!(pair[1][2] <= pair[0][2] + 1e-12);
        }
    }
}

#[test]
fn bound_surface_flags_insufficient_truncation() {
    let text = stdout_of(&[
        "bound-surface",
        "--q-min",
        "0.2",
        "--q-max",
        "0.9",
        "--q-points",
        "2",
        "--l-min",
        "0.0",
        "--l-max",
        "0.5",
        "--l-points",
        "2",
        "--nmax",
        "6",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        vec!["q", "l_over_la", "bound_nats", "trace_deficit", "flag"]
    );
    // Low squeezing at a small cutoff is fine, strong squeezing is flagged.
    let low = rows.iter().find(|r| r[0] == 0.2 && r[1] == 0.0).unwrap();
    assert_eq!(low[4], 0.0);
    assert!(low[3] < 1e-3);
    let high = rows.iter().find(|r| r[0] == 0.9 && r[1] == 0.0).unwrap();
    assert_eq!(high[4], 1.0);
    assert!(high[3] > 1e-3);
}

#[test]
fn distance_curves_schema_ordering_and_determinism() {
    let args = [
        "distance-curves",
        "--l-min",
        "0.0",
        "--l-max",
        "0.3",
        "--l-points",
        "3",
    ];
    let text = stdout_of(&args);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        vec![
            "l_over_la",
            "ratio_nbar1",
            "ratio_nbar10",
            "ratio_nbar100",
            "ratio_nbar1000"
        ]
    );
    // Every curve is normalized to start at exactly 1.
    for v in &rows[0][1..] {
        assert!((v - 1.0).abs() < 1e-12, "row {:?}", rows[0]);
    }
    for row in rows.iter().skip(1) {
        // Stronger sources degrade relatively faster, every ratio in (0,1).
        for pair in row[1..].windows(2) {
            assert!(pair[1] < pair[0], "row {row:?}");
        }
        for v in &row[1..] {
            assert!(*v > 0.0 && *v < 1.0);
        }
    }
    // Identical invocations, identical bytes.
    assert_eq!(text, stdout_of(&args));
    // A different seed still converges to the same physics.
    let mut seeded = vec!["--seed", "7"];
    seeded.extend_from_slice(&args);
    let other = stdout_of(&seeded);
    let (_, other_rows) = parse_csv(&other);
    for (a, b) in rows.iter().zip(&other_rows) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn compare_emits_the_sandwich() {
    let text = stdout_of(&["compare", "--l-points", "3"]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["l_over_la", "bound", "estimate", "distance"]);
    for row in &rows {
        let (bound, estimate, distance) = (row[1], row[2], row[3]);
        assert!(distance <= estimate + 1e-6, "row {row:?}");
        assert!(estimate <= bound + 1e-6, "row {row:?}");
    }
    // Monotone nonincreasing columns.
    for col in 1..=3 {
        for pair in rows.windows(2) {
            assert!(pair[1][col] <= pair[0][col] + 1e-6);
        }
    }
}

#[test]
fn available_entanglement_schema_and_saturation() {
    let text = stdout_of(&[
        "available-entanglement",
        "--zeta-min",
        "1.0",
        "--zeta-max",
        "3.0",
        "--zeta-points",
        "3",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["zeta", "E_l0", "E_l001", "E_l01"]);
    for row in &rows {
        assert!(
            row[1] >= row[2] - 1e-6 && row[2] >= row[3] - 1e-6,
            "{row:?}"
        );
    }
    // The lossy column saturates: moving from zeta = 2 to 3 changes little.
    let e_mid = rows[1][3];
    let e_hi = rows[2][3];
    assert!((e_hi - e_mid).abs() < 0.05 * e_mid);
}

#[test]
fn fidelity_gain_comparison_shows_unit_gain_hazard() {
    let text = stdout_of(&[
        "fidelity",
        "--figure",
        "f1",
        "--zeta-min",
        "0.0",
        "--zeta-max",
        "4.0",
        "--zeta-points",
        "5",
        "--t2-min",
        "0.7",
        "--t2-max",
        "0.9",
        "--t2-points",
        "2",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        vec!["zeta", "t2", "f_unit_gain", "f_canonical_gain"]
    );
    let at = |zeta: f64, t2: f64| -> &Vec<f64> {
        rows.iter()
            .find(|r| (r[0] - zeta).abs() < 1e-9 && (r[1] - t2).abs() < 1e-9)
            .unwrap()
    };
    // Unit gain at |T2| = 0.7 dips below its zero-squeezing baseline...
    assert!(at(4.0, 0.7)[2] < at(0.0, 0.7)[2]);
    // ...while the canonical gain always improves on it.
    assert!(at(4.0, 0.7)[3] > at(0.0, 0.7)[3]);
    assert!(at(4.0, 0.9)[3] > at(0.0, 0.9)[3]);
}

#[test]
fn fidelity_range_curves_start_at_unity() {
    let text = stdout_of(&[
        "fidelity",
        "--figure",
        "f4",
        "--input",
        "fock",
        "--l2-points",
        "3",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["l2_over_la", "f_n1", "f_n5", "f_n10"]);
    for col in 1..=3 {
        assert!((rows[0][col] - 1.0).abs() < 1e-9);
        for pair in rows.windows(2) {
            assert!(pair[1][col] < pair[0][col]);
        }
    }
}

#[test]
fn fidelity_source_placement_stays_on_sender_half() {
    for input in ["fock", "squeezed"] {
        let text = stdout_of(&[
            "fidelity",
            "--figure",
            "f5",
            "--input",
            input,
            "--l12-points",
            "4",
        ]);
        let (header, rows) = parse_csv(&text);
        assert_eq!(
            header,
            vec!["l12_over_la", "l1_star_1", "l1_star_2", "l1_star_3"]
        );
        for row in &rows {
            for l1 in &row[1..] {
                assert!(*l1 >= 0.0 && *l1 < 0.5 * row[0], "{row:?}");
            }
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    // Unknown figure id.
    let out = run(&["fidelity", "--figure", "f9"]);
    assert_eq!(out.status.code(), Some(2));
    // Reversed axis.
    let out = run(&["estimate-surface", "--q-min", "0.9", "--q-max", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    // Out-of-range axis.
    let out = run(&["estimate-surface", "--q-max", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    // Too few points.
    let out = run(&["distance-curves", "--l-points", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_is_written() {
    let dir = std::env::temp_dir().join(format!("cvent-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let out = run(&[
        "estimate-surface",
        "--q-points",
        "2",
        "--l-points",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("q,l_over_la,estimate_nats\n"));
    assert!(text.ends_with('\n'));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn precision_flag_controls_digits() {
    let text = stdout_of(&[
        "estimate-surface",
        "--q-points",
        "2",
        "--l-points",
        "2",
        "--precision",
        "4",
    ]);
    let second_line = text.lines().nth(1).unwrap();
    assert_eq!(second_line.split(',').next().unwrap(), "0.000e0");
}
