use quadcycle::cli::{dispatch_with, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};

const TWO_CENTRES: &str = r#"{"lambda":0,"alpha":0,"beta":0,"gamma":0,"a":0.5,"c":-1}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("quadcycle").chain(args.iter().copied());
    let code = dispatch_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn equilibria_of_the_two_centre_system() {
    let (code, out, _) = run(&["equilibria", "--system", "canonical24", "--params", TWO_CENTRES]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mut pts: Vec<(f64, f64, String)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["location"]["x"].as_f64().unwrap(), e["location"]["y"].as_f64().unwrap(), e["kind"].as_str().unwrap().into()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(pts.len(), 2);
    assert!((pts[0].0 + 2.0).abs() < 1e-12 && pts[0].1.abs() < 1e-12);
    assert!(pts[1].0.abs() < 1e-12 && pts[1].1.abs() < 1e-12);
    assert!(pts.iter().all(|p| p.2 == "center_candidate"));
}

#[test]
fn rotation_check_is_reproducible() {
    let a = run(&["rotation-check", "--n", "1000", "--seed", "7"]);
    let b = run(&["rotation-check", "--n", "1000", "--seed", "7"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
    let mut lines = a.1.lines();
    assert_eq!(lines.next(), Some("point,id,delta_closed,delta_numeric,cross_sign,pass"));
    assert_eq!(lines.count(), 4000);
    let c = run(&["rotation-check", "--n", "1000", "--seed", "8"]);
    assert_ne!(a.1, c.1);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["equilibria", "--frob", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["equilibria", "--params", "{not json"]).0, EXIT_USAGE);
    assert_eq!(run(&["equilibria", "--params", r#"{"lambda":0}"#]).0, EXIT_USAGE);
    assert_eq!(run(&["simulate", "--params", TWO_CENTRES, "--start", "1"]).0, EXIT_USAGE);
    let (code, _, err) = run(&["portrait", "--params", TWO_CENTRES, "--bounds", "1,1,0,1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("bounds"));
}

#[test]
fn simulate_prints_round_trip_csv() {
    let (code, out, _) = run(&["simulate", "--params", TWO_CENTRES, "--start", "0.5,0", "--tmax", "1"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows[0], vec![0.0, 0.5, 0.0]);
    assert_eq!(rows.last().unwrap()[0], 1.0);
    assert!(out.lines().nth(2).unwrap().split(',').all(|v| v.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}

#[test]
fn cycles_and_general_system_agree() {
    let canon = run(&["cycles", "--params", r#"{"lambda":-0.09,"alpha":0,"beta":0,"gamma":0.1,"a":0.5,"c":-1}"#]);
    let general = run(&[
        "cycles",
        "--system",
        "general",
        "--params",
        r#"{"p01":-1,"p11":-1,"q10":1,"q01":0.01,"q20":0.5,"q11":0.1,"q02":-0.1}"#,
    ]);
    assert_eq!(canon.0, EXIT_OK);
    assert_eq!(general.0, EXIT_OK);
    // Same field up to the rounding of lambda + gamma.
    let v: serde_json::Value = serde_json::from_str(&canon.1).unwrap();
    let w: serde_json::Value = serde_json::from_str(&general.1).unwrap();
    assert_eq!(v["label"], "(1:0)");
    assert_eq!(w["label"], "(1:0)");
    assert_eq!(v["foci"][0]["cycles"][0]["stability"], "stable");
    let s = |x: &serde_json::Value| x["foci"][0]["cycles"][0]["s_star"].as_f64().unwrap();
    assert!((s(&v) - s(&w)).abs() < 1e-9);
}

#[test]
fn continue_writes_family_and_termination() {
    let (code, out, _) = run(&[
        "continue",
        "--params",
        r#"{"lambda":-0.09,"alpha":0,"beta":0,"gamma":0.1,"a":0.5,"c":-1}"#,
        "--param",
        "lambda",
        "--to",
        "-0.2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("mu,s_star,period,d_prime\n"));
    assert!(out.contains("# termination,shrinks_to_focus"));
}

#[test]
fn config_file_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, format!(r#"{{"system":"canonical24","params":{TWO_CENTRES},"portrait":{{"seed_grid":[2,2]}}}}"#)).unwrap();
    let svg = dir.path().join("p.svg");
    let (code, out, _) = run(&["portrait", "--config", cfg.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--no-cycles"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("\"orbits\":4"));
    let (code, _, _) = run(&["portrait", "--config", cfg.to_str().unwrap(), "--seeds", "3,1", "--bounds", "-3,1,-2,2", "--out", svg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("\"orbits\":3"));
}

#[test]
fn failed_scenario_exits_3_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mono.json");
    let (code, _, _) = run(&["scenario", "run", "monotone", "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(code, if v["passed"] == true { EXIT_OK } else { EXIT_ASSERTION });
    assert_eq!(v["scenario"], "monotone");
    assert_eq!(v["cyclicity_bound"], 3);
}
