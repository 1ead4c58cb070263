use serde_json::json;

use super::*;

fn config(v: serde_json::Value) -> RunConfig {
    RunConfig::from_json(&v.to_string()).unwrap()
}

#[test]
fn empty_sample_gives_no_data() {
    let c = config(json!({
        "suite": "ricci_soliton_residual",
        "variant": "expanding",
        "background": {"name": "euclidean_static", "params": {"dim": 2}},
        "sample": {"kind": "explicit", "points": []}
    }));
    let rep = run(&c).unwrap();
    assert!(rep.records.is_empty());
    assert_eq!(rep.summary.status, Status::NoData);
    let doc: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(doc["records"], json!([]));
    assert_eq!(doc["summary"]["status"], "no_data");
}

#[test]
fn one_record_is_two_csv_lines() {
    let c = config(json!({
        "suite": "lott_match",
        "background": {"name": "euclidean_static", "params": {"dim": 3}},
        "mcf": {"name": "shrinking_sphere_flat"},
        "sample": {"kind": "explicit", "points": [[0.1, 1.0, 2.0]]}
    }));
    let rep = run(&c).unwrap();
    assert_eq!(rep.records.len(), 1);
    let csv = rep.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("index,t,point,n,quantity,value,scaled,error\n"));
    assert!(csv.contains("1;2"));
}

#[test]
fn flat_expanding_residual_passes() {
    let c = config(json!({
        "suite": "ricci_soliton_residual",
        "variant": "expanding",
        "background": {"name": "euclidean_static", "params": {"dim": 2}},
        "sample": {"kind": "random", "count": 5, "seed": 1}
    }));
    let rep = run(&c).unwrap();
    assert_eq!(rep.records.len(), 15);
    assert!(rep.passed(), "{:?}", rep.summary);
    assert_eq!(rep.summary.sups.len(), 3);
    assert_eq!(rep.provenance.seed, Some(1));
    assert_eq!(rep.provenance.minimal_admissible_n, Some(0.0));
}

#[test]
fn steady_flat_residual_is_an_exact_zero() {
    let c = config(json!({
        "suite": "ricci_soliton_residual",
        "variant": "steady",
        "background": {"name": "euclidean_static", "params": {"dim": 2, "direction": "backward"}},
        "sample": {"kind": "random", "count": 4, "seed": 2}
    }));
    let rep = run(&c).unwrap();
    assert!(rep.passed());
    assert!(rep.summary.notes.iter().any(|n| n.contains("vanishes")));
}

#[test]
fn reports_are_deterministic() {
    let c = config(json!({
        "suite": "mcf_soliton_residual",
        "variant": "expanding",
        "background": {"name": "euclidean_static", "params": {"dim": 3}},
        "mcf": {"name": "shrinking_sphere_flat"},
        "sample": {"kind": "random", "count": 6, "seed": 9}
    }));
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn point_errors_do_not_abort() {
    // the second point lies on the pole of the sphere chart
    let c = config(json!({
        "suite": "ricci_soliton_residual",
        "variant": "expanding",
        "background": {"name": "round_sphere", "params": {"dim": 2}},
        "n_list": [100, 200],
        "sample": {"kind": "explicit", "points": [[0.1, 1.0, 0.5], [0.1, 0.0, 0.5]]}
    }));
    let rep = run(&c).unwrap();
    assert_eq!(rep.records.len(), 4);
    assert!(rep.records[0].error.is_none());
    assert!(rep.records[2].error.is_some());
    assert_eq!(rep.summary.point_errors, 1);
    assert_eq!(rep.summary.status, Status::Fail);
}

#[test]
fn config_errors() {
    let bad = [
        json!({"suite": "nope", "background": {"name": "euclidean_static"}}),
        json!({"suite": "ricci_soliton_residual", "background": {"name": "euclidean_static"}, "n_list": [10, 5]}),
        json!({"suite": "ricci_soliton_residual", "background": {"name": "euclidean_static"}, "n_list": [-1, 5]}),
        json!({"suite": "ricci_soliton_residual", "background": {"name": "euclidean_static"}, "extra": 1}),
    ];
    for v in bad {
        assert!(matches!(RunConfig::from_json(&v.to_string()), Err(Error::Config(_))), "{v}");
    }
    let runtime_bad = [
        // no variant
        json!({"suite": "ricci_soliton_residual", "background": {"name": "euclidean_static"}}),
        // direction mismatch
        json!({"suite": "ricci_soliton_residual", "variant": "shrinking", "background": {"name": "euclidean_static"}}),
        json!({"suite": "ricci_soliton_residual", "variant": "expanding", "background": {"name": "torus"}}),
        json!({"suite": "lott_match", "background": {"name": "euclidean_static"}}),
        json!({"suite": "harnack_limits", "variant": "steady", "background": {"name": "euclidean_static", "params": {"direction": "backward"}}}),
        json!({"suite": "ricci_soliton_residual", "variant": "expanding", "background": {"name": "euclidean_static"}, "n_list": [100]}),
        json!({"suite": "ricci_soliton_residual", "variant": "expanding", "background": {"name": "euclidean_static"},
               "sample": {"kind": "random", "count": 3, "seed": 0, "t_range": [0.5, 0.1]}}),
    ];
    for v in runtime_bad {
        let c = RunConfig::from_json(&v.to_string()).unwrap();
        assert!(matches!(run(&c), Err(Error::Config(_))), "{v}");
    }
}

#[test]
fn n_list_alias() {
    let c = config(json!({
        "suite": "ricci_soliton_residual",
        "background": {"name": "euclidean_static"},
        "N_list": [1, 2]
    }));
    assert_eq!(c.n_list, vec![1.0, 2.0]);
}

#[test]
fn grid_sample_uses_cell_midpoints() {
    let s = SampleSpec::Grid {
        dims: vec![2, 1],
        t_count: 2,
        t_range: Some([0.5, 1.0]),
    };
    let pts = s.points(&[(0.0, 1.0), (-1.0, 1.0)], 1.0, 1.0).unwrap();
    assert_eq!(pts.len(), 4);
    assert_eq!(pts[0], (0.5, vec![0.25, 0.0]));
    assert_eq!(pts[3], (1.0, vec![0.75, 0.0]));
}

#[test]
fn functionals_suite_on_the_unit_ball() {
    let c = config(json!({
        "suite": "functionals",
        "background": {"name": "euclidean_static", "params": {"dim": 3}},
        "functional": {"grid": {"radial": 8, "polar": 32}, "expected": 16.0 * std::f64::consts::PI}
    }));
    let rep = run(&c).unwrap();
    assert!(rep.passed(), "{:?}", rep.summary);
    assert_eq!(rep.records.len(), 12);
}

#[test]
fn emit_writes_sidecar_for_csv() {
    let dir = std::env::temp_dir().join(format!("suite-emit-{}", std::process::id()));
    let c = config(json!({
        "suite": "lott_match",
        "background": {"name": "euclidean_static", "params": {"dim": 3}},
        "mcf": {"name": "shrinking_sphere_flat"},
        "sample": {"kind": "random", "count": 3, "seed": 4}
    }));
    let rep = run(&c).unwrap();
    let written = emit(&rep, &dir.join("out.csv"), Format::Csv).unwrap();
    assert_eq!(written[1], dir.join("out.summary.json"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&written[1]).unwrap()).unwrap();
    assert_eq!(side["summary"]["status"], "pass");
    assert!(side.get("records").is_none());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn family_errors_are_relative_to_the_family_scale() {
    let e = family_errors(&[vec![(1.0, 1.0), (0.0, 2e-11)], vec![(3.0, 3.3)], vec![]], 1e-12);
    assert!((e[0] - 2e-11).abs() < 1e-20);
    assert!((e[1] - 0.3 / 3.3).abs() < 1e-15);
    assert_eq!(e[2], 0.0);
    assert_eq!(relative_error(2e-14, 0.0, 0.0, 1e-12), 0.0);
}

#[test]
fn derived_crosscheck_passes_near_the_poles() {
    let c = config(json!({
        "suite": "christoffel_crosscheck",
        "variant": "steady",
        "background": {"name": "round_sphere", "params": {"dim": 3, "direction": "backward"}},
        "form": "derived",
        "N_list": [100],
        "sample": {"kind": "explicit", "points": [[0.75, 3.1258, 2.11, 4.86]]}
    }));
    let rep = run(&c).unwrap();
    assert!(rep.passed(), "{:?}", rep.summary.checks);
    assert_eq!(rep.provenance.closed_form, Some("derived"));
}
