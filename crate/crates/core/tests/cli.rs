use std::process::{Command, Output};

use fas_core::analytic::{outage_exact, outage_mrc};
use fas_core::channel::FasConfig;
use fas_core::quad::QuadratureSettings;

fn fas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fas"))
        .args(args)
        .output()
        .expect("run fas")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and rows of a CSV with `#` comment lines.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn outage_curve_is_nonincreasing_in_n() {
    let o = fas(&["outage-curve", "--sweep-n", "1:100:1", "--size-wl", "0.5", "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# fas "));
    let (h, rows) = csv(&text);
    assert_eq!(rows.len(), 100);
    let e = col(&h, "exact");
    let exact: Vec<f64> = rows.iter().map(|r| r[e].parse().unwrap()).collect();
    assert!(exact.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn csv_values_round_trip() {
    let o = fas(&["outage-curve", "--sweep-n", "3,7,20", "--size-wl", "2", "--snr-db", "-3"]);
    let (h, rows) = csv(&stdout(&o));
    let q = QuadratureSettings::default();
    for r in rows {
        let n: usize = r[0].parse().unwrap();
        let cfg = FasConfig::from_db(n, 2.0, -3.0).unwrap();
        let v: f64 = r[col(&h, "exact")].parse().unwrap();
        assert_eq!(v.to_bits(), outage_exact(&cfg, &q).unwrap().to_bits());
    }
}

#[test]
fn independent_ports_give_powers() {
    let o = fas(&["outage-curve", "--sweep-n", "1:12:1", "--independent", "--snr-db", "1.5"]);
    let (h, rows) = csv(&stdout(&o));
    let x = 10f64.powf(0.15);
    for r in rows {
        let n: i32 = r[0].parse().unwrap();
        let v: f64 = r[col(&h, "exact")].parse().unwrap();
        let want = (-(-x).exp_m1()).powi(n);
        assert!((v - want).abs() < 1e-12, "N={n}");
    }
}

#[test]
fn outage_curve_with_mc() {
    let o = fas(&[
        "outage-curve", "--sweep-w", "0.5,2", "--n-ports", "4", "--trials", "200000", "--seed", "9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    for r in &rows {
        let exact: f64 = r[col(&h, "exact")].parse().unwrap();
        let mc: f64 = r[col(&h, "mc")].parse().unwrap();
        let hw: f64 = r[col(&h, "mc_half_width_95")].parse().unwrap();
        assert!((mc - exact).abs() < 2.0 * hw, "{r:?}");
        assert_eq!(r[col(&h, "mc_trials")], "200000");
    }
    let again = fas(&[
        "outage-curve", "--sweep-w", "0.5,2", "--n-ports", "4", "--trials", "200000", "--seed", "9",
    ]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn rare_points_are_scaled_or_skipped() {
    let o = fas(&["outage-curve", "--sweep-n", "20", "--size-wl", "5", "--snr-db", "-10", "--trials", "1000"]);
    let (h, rows) = csv(&stdout(&o));
    let note = &rows[0][col(&h, "mc_note")];
    assert!(note.starts_with("rare_event_skipped"), "{note}");
    assert_eq!(rows[0][col(&h, "mc")], "");
}

#[test]
fn bad_sweeps_are_usage_errors() {
    for args in [
        vec!["outage-curve", "--sweep-n", "5:1:1"],
        vec!["outage-curve", "--sweep-n", ""],
        vec!["outage-curve"],
        vec!["outage-curve", "--sweep-n", "1:3:1", "--sweep-w", "1:2:1"],
        vec!["outage-curve", "--sweep-w", "-1,1"],
        vec!["outage-curve", "--sweep-n", "1:3:1", "--kappa", "0.9"],
        vec!["bounds-compare", "--sweep-n", "1:3:1", "--mrc-l", "0"],
        vec!["no-such-command"],
    ] {
        let o = fas(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn bounds_compare_columns() {
    let o = fas(&["bounds-compare", "--sweep-n", "2:12:1", "--size-wl", "0.2", "--mrc-l", "2,5", "--optimal-kappa"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    let (a, m, l2, ub, ubo) = (
        col(&h, "approx"),
        col(&h, "approx_out_of_regime"),
        col(&h, "mrc_L2"),
        col(&h, "upper_bound"),
        col(&h, "upper_bound_opt"),
    );
    col(&h, "mrc_L5");
    let level = outage_mrc(2, 1.0).unwrap();
    let mut flagged = 0;
    for r in &rows {
        let approx: f64 = r[a].parse().unwrap();
        assert_eq!(r[m], if approx < 0.0 { "1" } else { "0" });
        flagged += usize::from(r[m] == "1");
        assert_eq!(r[l2].parse::<f64>().unwrap().to_bits(), level.to_bits());
        assert!(r[ubo].parse::<f64>().unwrap() <= r[ub].parse::<f64>().unwrap());
    }
    assert!(flagged > 0);
    // First N whose exact outage beats two-branch MRC.
    let e = col(&h, "exact");
    let first = rows
        .iter()
        .find(|r| r[e].parse::<f64>().unwrap() < level)
        .map(|r| r[0].parse::<usize>().unwrap());
    assert_eq!(first, Some(7));
}

#[test]
fn design_answers() {
    let o = fas(&["design", "--mrc-l", "1", "--n-ports", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["config", "results", "guards", "version"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["results"][0]["min_size"]["value"], 0.0);

    // Infeasible is an answer, not an error.
    let o = fas(&["design", "--mrc-l", "2", "--n-ports", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"][0]["min_size"]["feasible"], false);
    assert!(v["guards"][0]["report"].as_str().unwrap().contains("complex"));

    let o = fas(&["design", "--size-wl", "5", "--mrc-l", "2,3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    assert!(v["results"][0]["min_ports"]["value"].as_u64().unwrap() >= 2);

    for k in ["1", "0.5"] {
        assert_eq!(fas(&["design", "--kappa", k, "--n-ports", "50"]).status.code(), Some(2));
    }
    assert_eq!(fas(&["design"]).status.code(), Some(2));
    assert_eq!(fas(&["design", "--n-ports", "3"]).status.code(), Some(2));
}

#[test]
fn design_frontier_is_nonincreasing() {
    let o = fas(&["design", "--sweep-n", "4:400:3", "--mrc-l", "2", "--kappa", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    let w = col(&h, "w_min");
    let vals: Vec<f64> = rows.iter().filter(|r| !r[w].is_empty()).map(|r| r[w].parse().unwrap()).collect();
    assert!(vals.len() > 10);
    assert!(vals.windows(2).all(|p| p[1] <= p[0]));
}

#[test]
fn design_kappa_sweep() {
    let o = fas(&["design", "--kappa-sweep", "1.5,2", "--mrc-l", "2", "--n-max", "3000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
}

#[test]
fn envelope_trace_csv() {
    let o = fas(&["envelope", "--n-ports", "8", "--duration", "0.05", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# max_doppler_hz:"));
    let (h, rows) = csv(&text);
    assert_eq!(h.len(), 8 + 3);
    assert_eq!(rows.len(), 500);
    assert_eq!(o.stdout, fas(&["envelope", "--n-ports", "8", "--duration", "0.05", "--seed", "3"]).stdout);
}

#[test]
fn envelope_at_rest_is_constant() {
    let o = fas(&["envelope", "--speed-kmh", "0", "--n-ports", "5", "--duration", "0.01"]);
    let (_, rows) = csv(&stdout(&o));
    for r in &rows[1..] {
        assert_eq!(r[1..], rows[0][1..]);
    }
}

#[test]
fn envelope_nyquist_is_usage_error() {
    assert_eq!(fas(&["envelope", "--sample-rate", "200"]).status.code(), Some(2));
}

#[test]
fn validate_quick_is_deterministic() {
    let args = ["validate", "--grid", "quick", "--trials", "100000", "--seed", "5"];
    let a = fas(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = fas(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["results"]["passed"], true);
}

#[test]
fn validate_flags_loose_tolerance() {
    let o = fas(&["validate", "--grid", "quick", "--trials", "20000", "--abs-tol", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["passed"], false);
    assert!(v["results"]["failed"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "quadrature_settings"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("fas-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let o = fas(&["outage-curve", "--sweep-n", "1:3:1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv(&text).1.len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_exits_zero() {
    let o = fas(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("outage-curve"));
}
