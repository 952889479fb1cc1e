use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DISK: &str = r#"{"kind":"disk","center":[0,0],"radius":1}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vorotens"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn vorotens")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn digitize_unit_square() {
    let out = run(&[
        "digitize",
        "--shape",
        r#"{"kind":"rectangle","min":[0,0],"max":[1,1]}"#,
        "--a",
        "0.5",
    ]);
    let v = json_of(&out);
    assert_eq!(v["points"].as_array().unwrap().len(), 9);
    assert_eq!(v["a"], 0.5);
}

#[test]
fn pbm_round_trip_matches_shape_input() {
    let pbm = scratch("disk.pbm");
    let json = scratch("disk.json");
    let out = run(&[
        "digitize",
        "--shape",
        DISK,
        "--a",
        "0.1",
        "--out",
        json.to_str().unwrap(),
        "--pbm",
        pbm.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(Path::new(&format!("{}.json", pbm.display())).exists());

    let radii = "0.15,0.25,0.4";
    let from_shape = json_of(&run(&["estimate", "--shape", DISK, "--a", "0.1", "--radii", radii]));
    let from_pbm = json_of(&run(&["estimate", "--sample", pbm.to_str().unwrap(), "--radii", radii]));
    let from_json = json_of(&run(&["estimate", "--sample", json.to_str().unwrap(), "--radii", radii]));
    let est = |v: &Value| v["runs"][0]["estimate"]["tensors"].clone();
    assert_eq!(from_shape["runs"][0]["points"], from_pbm["runs"][0]["points"]);
    assert_eq!(est(&from_shape), est(&from_pbm));
    assert_eq!(est(&from_shape), est(&from_json));
    assert!(from_pbm["runs"][0].get("truth").is_none());
}

#[test]
fn report_is_reproducible_and_untimed() {
    let args = ["estimate", "--shape", DISK, "--a", "0.1", "--r", "1", "--s", "1"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v = json_of(&one);
    assert!(v["runs"][0].get("timing_ms").is_none());
    assert!(v["config"].get("threads").is_none());
    let timed = json_of(&run(&[&args[..], &["--timing"]].concat()));
    assert!(timed["runs"][0]["timing_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_codes() {
    // malformed input
    assert_eq!(code(&["estimate", "--shape", "{not json", "--a", "0.1"]), 2);
    assert_eq!(code(&["estimate", "--shape", "/no/such/file.json", "--a", "0.1"]), 2);
    assert_eq!(code(&["estimate", "--shape", DISK]), 2);
    assert_eq!(code(&["estimate", "--shape", DISK, "--a", "0.1", "--radii", "0.1,0.2"]), 2);
    assert_eq!(code(&["estimate", "--shape", DISK, "--a", "0.1", "--threads", "0"]), 2);
    assert_eq!(code(&["estimate", "--bogus"]), 2);
    assert_eq!(code(&["converge", "--shape", DISK, "--a", "0.1,0.05"]), 2);

    // radii reaching the declared reach
    let annulus = r#"{"kind":"annulus","center":[0,0],"inner":0.3,"outer":1}"#;
    assert_eq!(
        code(&["estimate", "--shape", annulus, "--a", "0.1", "--radii", "0.1,0.2,0.35"]),
        3
    );
    assert_eq!(
        code(&["estimate", "--shape", DISK, "--a", "0.1", "--radii", "0.1,0.2,0.3", "--reach", "0.25"]),
        3
    );
    // exact moments in 3D, degree cap, refinement bound
    let ball = r#"{"kind":"disk","center":[0,0,0],"radius":1}"#;
    assert_eq!(code(&["estimate", "--shape", ball, "--a", "0.5"]), 3);
    assert_eq!(code(&["estimate", "--shape", DISK, "--a", "0.1", "--s", "5"]), 3);
    assert_eq!(
        code(&["estimate", "--shape", DISK, "--a", "0.3", "--refined", "--radii", "0.2,0.3,0.4"]),
        3
    );
    // direction caps outside shell mode
    let cap = r#"{"direction":{"kind":"cap","axis":[1,0],"aperture":1.0}}"#;
    assert_eq!(code(&["estimate", "--shape", DISK, "--a", "0.1", "--region", cap]), 3);

    // ill-conditioned radii
    assert_eq!(
        code(&["estimate", "--shape", DISK, "--a", "0.1", "--radii", "0.2,0.2000001,0.2000002"]),
        4
    );
}

#[test]
fn converge_writes_table_and_summary() {
    let csv = scratch("conv.csv");
    let summary = scratch("conv.summary.json");
    let out = run(&[
        "converge",
        "--shape",
        DISK,
        "--a",
        "0.1,0.07,0.05",
        "--radii",
        "0.15,0.25,0.4",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# vorotens converge schema_version=1"));
    assert_eq!(
        lines.next().unwrap(),
        "a,points,hausdorff,hausdorff_over_a,err_0,maxcoef_0,err_1,maxcoef_1,err_2,maxcoef_2,runtime_ms"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(',')));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    for k in ["0", "1", "2"] {
        assert!(v["slopes"][k].as_f64().unwrap() > 0.0);
    }
    assert!(v["hausdorff_over_a"]["ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn shell_mode_with_direction_cap() {
    let cap = r#"{"direction":{"kind":"cap","axis":[1,0],"aperture":3.14159}}"#;
    let args = [
        "estimate", "--shape", DISK, "--a", "0.1", "--shell", "--radii", "0.2,0.4", "--region", cap,
    ];
    assert_eq!(code(&args), 3);
    let out = run(&[&args[..], &["--method", "mc", "--mc-n", "2000"]].concat());
    let v = json_of(&out);
    let est = &v["runs"][0]["estimate"];
    assert_eq!(est["variant"], "shell");
    // a half-circle cap sees about half the perimeter term
    let phi1 = est["tensors"]["1"]["coeffs"][0]["value"].as_f64().unwrap();
    assert!((phi1 - std::f64::consts::PI / 2.0).abs() < 0.4, "{phi1}");
    assert!(v["runs"][0].get("truth").is_none());
}

#[test]
fn reduced_mode_reports_volume_tensor() {
    let v = json_of(&run(&["estimate", "--shape", DISK, "--a", "0.05", "--reduced", "--radii", "0.2,0.4"]));
    let run0 = &v["runs"][0];
    let area = run0["volume_tensor_hat"]["coeffs"][0]["value"].as_f64().unwrap();
    assert!((area - std::f64::consts::PI).abs() < 0.05);
    assert_eq!(run0["estimate"]["variant"], "reduced");
    assert!(run0["errors"]["1"]["sup_norm"].as_f64().unwrap() < 0.6);
}

#[test]
fn cell_dump_of_lattice_site() {
    let v = json_of(&run(&[
        "cell-dump", "--shape", DISK, "--a", "0.1", "--site", "0.3,-0.2", "--radius", "0.3",
    ]));
    assert!((v["cell"]["site"][0].as_f64().unwrap() - 0.3).abs() < 1e-12);
    let boundary = v["cell"]["boundary"].as_array().unwrap();
    assert_eq!(boundary.len(), 4);
    assert!(boundary.iter().all(|p| p["type"] == "segment"));
    let area = v["moments"]["values"][0].as_f64().unwrap();
    assert!((area - 0.01).abs() < 1e-12);
    assert_eq!(code(&["cell-dump", "--shape", DISK, "--a", "0.1", "--site", "0.35,0", "--radius", "0.3"]), 3);
}
