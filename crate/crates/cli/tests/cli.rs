use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_nanofock");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        let text = fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        serde_json::from_str(&text).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap()
    }
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(config_dir().join(name)).unwrap()).unwrap()
}

fn run(tmp: &TempDir, config: &Value, args: &[&str]) -> Run {
    let n = fs::read_dir(tmp.path()).unwrap().count();
    let cfg = tmp.path().join(format!("config{n}.json"));
    let out = tmp.path().join(format!("out{n}"));
    fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let output = Command::new(BIN)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(args)
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap(),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
        out,
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn effective(config: &mut Value) -> &mut Value {
    &mut config["device"]["effective"]
}

fn physical(config: &mut Value) -> &mut Value {
    &mut config["device"]["physical"]
}

/// Columns of `sweep.csv` by header name, skipping the schema line.
fn sweep_column(run: &Run, name: &str) -> Vec<String> {
    let text = run.text("sweep.csv");
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# nanofock sweep v1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

fn numbers(column: Vec<String>) -> Vec<f64> {
    column.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn reference_device_report_matches_the_quoted_parameters() {
    let tmp = TempDir::new().unwrap();
    let r = run(&tmp, &load("reference.json"), &["device"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = r.json("derived.json");
    let o = &d["ordinary"];
    for (key, quoted) in [("omega_m_hz", 5.23e6), ("lambda_hz", 209e3), ("kappa_hz", 52.3e3)] {
        let got = f(&o[key]);
        assert!((got / quoted - 1.0).abs() < 0.05, "{key}: {got}");
    }
    for c in d["validation"]["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{c}");
    }
    let m = r.json("manifest.json");
    assert_eq!(m["config_sha256"], d["config_sha256"]);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["exit_code"], 0);
    assert!(f(&m["polarizability_unit_f_m"]) > 1e-30);
    assert!(r.stdout.contains("lambda/2pi"));
}

#[test]
fn external_coupling_above_one_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference.json");
    physical(&mut c)["cavity"]["external_coupling_fraction"] = json!(1.5);
    let r = run(&tmp, &c, &["device"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("external_coupling_fraction"), "{}", r.stderr);
}

#[test]
fn softening_beyond_buckling_is_a_regime_failure() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference.json");
    physical(&mut c)["softening"] = json!({"curvature": "-10 uN/m"});
    let r = run(&tmp, &c, &["device"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("buckling"), "{}", r.stderr);
    assert_eq!(r.json("manifest.json")["exit_code"], 2);
}

#[test]
fn bare_numbers_and_unknown_units_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference.json");
    physical(&mut c)["beam"]["length"] = json!(1e-6);
    let r = run(&tmp, &c, &["device"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("device.physical.beam.length"), "{}", r.stderr);

    let mut c = load("reference_effective.json");
    effective(&mut c)["kappa"] = json!("52.3 kHertz");
    let r = run(&tmp, &c, &["validate"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("device.effective.kappa"), "{}", r.stderr);
}

#[test]
fn validate_reports_each_broken_approximation() {
    let tmp = TempDir::new().unwrap();
    let check = |r: &Run, name: &str| -> String {
        let report: Value = serde_json::from_str(&r.stdout).unwrap();
        let c = report["checks"].as_array().unwrap().iter().find(|c| c["check"] == name).unwrap();
        c["status"].as_str().unwrap().to_string()
    };

    let r = run(&tmp, &load("reference_effective.json"), &["validate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));

    let mut c = load("reference_effective.json");
    effective(&mut c)["kappa"] = json!("5.23 MHz");
    let r = run(&tmp, &c, &["validate"]);
    assert_eq!(r.code, 2);
    assert_eq!(check(&r, "resolved_sideband"), "fail");

    let mut c = load("reference_effective.json");
    for d in effective(&mut c)["drives"].as_array_mut().unwrap() {
        d["coupling"] = json!("52.3 kHz");
    }
    let r = run(&tmp, &c, &["validate"]);
    assert_eq!(r.code, 2);
    assert_eq!(check(&r, "adiabatic_elimination"), "fail");
}

#[test]
fn reference_steady_state_is_a_one_phonon_fock_state() {
    let tmp = TempDir::new().unwrap();
    let r = run(&tmp, &load("reference_effective.json"), &["steady"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let p = r.json("populations.json");
    let red = &p["reduced"];
    assert!((f(&red["populations"][1]) - 0.91).abs() <= 0.05);
    assert!(f(&red["wigner_origin"]) <= -0.45);
    assert_eq!(p["wigner"]["source"], "reduced");
    assert!(f(&p["wigner"]["min_value"]) <= -0.45);
    let csv = r.text("wigner.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# nanofock wigner v1 config_sha256="));
    assert_eq!(lines.next().unwrap(), "x,p,w");
    assert_eq!(lines.count(), 201 * 201);
}

#[test]
fn undriven_mode_relaxes_to_the_thermal_state() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference_effective.json");
    effective(&mut c)["drives"] = json!([]);
    let r = run(&tmp, &c, &["steady", "--converge"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let n_bar = f(&r.json("manifest.json")["derived"]["n_bar"]);
    let p = r.json("populations.json");
    let pops = p["reduced"]["populations"].as_array().unwrap();
    for (n, x) in pops.iter().take(6).enumerate() {
        let thermal = (n_bar / (n_bar + 1.0)).powi(n as i32) / (n_bar + 1.0);
        assert!((f(x) / thermal - 1.0).abs() < 1e-6, "level {n}: {x} vs {thermal}");
    }
}

#[test]
fn full_and_reduced_paths_agree_level_by_level() {
    let tmp = TempDir::new().unwrap();
    let r = run(&tmp, &load("reference_effective.json"), &["steady", "--compare"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let p = r.json("populations.json");
    let cmp = &p["comparison"];
    assert_eq!(cmp["within_tolerance"], true);
    assert_eq!(cmp["levels"].as_array().unwrap().len(), 10);
    for l in cmp["levels"].as_array().unwrap() {
        assert!(f(&l["abs_diff"]) <= 0.05, "{l}");
    }
    assert_eq!(p["wigner"]["source"], "full");
    let m = r.json("manifest.json");
    assert!(f(&m["solver"][0]["residual"]) < 1e-2);
    assert!(r.stdout.contains("|dP|"));
}

#[test]
fn reference_spectrum_has_resolved_sideband_pairs() {
    let tmp = TempDir::new().unwrap();
    let r = run(&tmp, &load("reference_effective.json"), &["spectrum", "--selftest"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let peaks = r.json("peaks.json");
    assert_eq!(peaks["resolved"], true);
    let lines = peaks["peaks"].as_array().unwrap();
    let lambda = f(&peaks["line_spacing_hz"]);
    for w in lines[..4].windows(2) {
        let gap = f(&w[1]["offset_plus_hz"]) - f(&w[0]["offset_plus_hz"]);
        assert!((gap / lambda - 1.0).abs() < 1e-9);
        assert!(3.0 * f(&w[0]["linewidth_hz"]) < lambda);
    }
    let strongest = lines
        .iter()
        .flat_map(|l| [f(&l["height_plus"]), f(&l["height_minus"])])
        .fold(0.0, f64::max);
    assert_eq!(f(&lines[0]["height_plus"]), strongest);
    let rec = &peaks["reconstruction"];
    assert!((f(&rec["populations"][1]) - 0.91).abs() <= 0.05);
    assert!(f(&peaks["selftest"]["max_error"]) < 0.02);
    assert!(r.text("spectrum.csv").starts_with("# nanofock spectrum v1 config_sha256="));
}

#[test]
fn detuned_probe_warns_but_inverts() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference_effective.json");
    effective(&mut c)["probe"]["detuning"] = json!("52.3 kHz");
    let r = run(&tmp, &c, &["spectrum"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let peaks = r.json("peaks.json");
    assert!(!peaks["warnings"].as_array().unwrap().is_empty());
    assert!(r.stderr.contains("not resonant"), "{}", r.stderr);
}

#[test]
fn unresolved_lines_and_missing_probe_are_refused() {
    let tmp = TempDir::new().unwrap();
    let mut c = load("reference_effective.json");
    for d in effective(&mut c)["drives"].as_array_mut().unwrap() {
        d["coupling"] = json!("420 kHz");
    }
    let r = run(&tmp, &c, &["spectrum"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.json("peaks.json")["error"].as_str().unwrap().contains("not resolved"));
    assert!(r.out.join("spectrum.csv").exists());

    let mut c = load("reference_effective.json");
    effective(&mut c).as_object_mut().unwrap().remove("probe");
    let r = run(&tmp, &c, &["spectrum"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("device.effective.probe"), "{}", r.stderr);
}

#[test]
fn zeta_sweep_scales_lambda_quadratically() {
    let tmp = TempDir::new().unwrap();
    let r = run(
        &tmp,
        &load("reference.json"),
        &["sweep", "--param", "device.physical.softening.zeta", "--values", "1,2,4", "--converge"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(sweep_column(&r, "status"), ["ok", "ok", "ok"]);
    assert_eq!(sweep_column(&r, "value"), ["1.0", "2.0", "4.0"]);
    let lambda = numbers(sweep_column(&r, "lambda_hz"));
    assert!((lambda[1] / lambda[0] / 4.0 - 1.0).abs() < 1e-9);
    assert!((lambda[2] / lambda[0] / 16.0 - 1.0).abs() < 1e-9);
}

#[test]
fn temperature_sweep_degrades_the_negativity() {
    let tmp = TempDir::new().unwrap();
    let r = run(
        &tmp,
        &load("reference_effective.json"),
        &["sweep", "--param", "device.effective.temperature", "--values", "0 K,20 mK,100 mK", "--converge"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let w = numbers(sweep_column(&r, "w00"));
    assert!(w[0] < w[1] && w[1] < w[2], "{w:?}");
    assert!(w[0] < -0.45);
}

#[test]
fn heating_power_sweep_builds_up_the_fock_state() {
    let tmp = TempDir::new().unwrap();
    let r = run(
        &tmp,
        &load("reference.json"),
        &["sweep", "--param", "device.physical.drives.0.power", "--from", "0 W", "--to", "1.2 W", "--steps", "5"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(sweep_column(&r, "value"), ["0 W", "0.3 W", "0.6 W", "0.9 W", "1.2 W"]);
    let p1 = numbers(sweep_column(&r, "p1"));
    assert!(p1.windows(2).all(|w| w[1] > w[0]), "{p1:?}");
    assert!(p1[0] < 0.5 && p1[4] > 0.91 - 0.05, "{p1:?}");
}

#[test]
fn sweep_records_failures_in_row_and_rejects_unknown_paths() {
    let tmp = TempDir::new().unwrap();
    let r = run(
        &tmp,
        &load("reference.json"),
        &["sweep", "--param", "device.physical.softening.zeta", "--values", "4,0.5,4"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(sweep_column(&r, "status"), ["ok", "error", "ok"]);
    assert!(sweep_column(&r, "error")[1].contains("zeta"));

    let r = run(&tmp, &load("reference.json"), &["sweep", "--param", "device.physical.nothing", "--values", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("device.physical.nothing"));
}

#[test]
fn sweep_order_and_output_do_not_depend_on_threads() {
    let tmp = TempDir::new().unwrap();
    let args = |t: &'static str| {
        [
            "--threads",
            t,
            "sweep",
            "--param",
            "device.effective.drives.0.coupling",
            "--from",
            "5 kHz",
            "--to",
            "25 kHz",
            "--steps",
            "9",
        ]
    };
    let one = run(&tmp, &load("reference_effective.json"), &args("1"));
    let four = run(&tmp, &load("reference_effective.json"), &args("4"));
    assert_eq!(one.code, 0, "{}", one.stderr);
    assert_eq!(one.text("sweep.csv"), four.text("sweep.csv"));
    let index = numbers(sweep_column(&four, "index"));
    assert_eq!(index, (0..9).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let a = run(&tmp, &load("reference_effective.json"), &["spectrum"]);
    let b = run(&tmp, &load("reference_effective.json"), &["spectrum"]);
    for name in ["peaks.json", "spectrum.csv"] {
        assert_eq!(a.text(name), b.text(name), "{name}");
    }
    let names: Vec<_> = fs::read_dir(&a.out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("manifest")).count(), 1);
    let peaks = a.json("peaks.json");
    assert_eq!(peaks["config_sha256"], a.json("manifest.json")["config_sha256"]);
    // 17 significant digits throughout.
    let text = a.text("peaks.json");
    let line = text.lines().find(|l| l.contains("\"line_spacing_hz\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{line}");
}

#[test]
fn schema_is_printed_and_shipped_configs_parse() {
    let output = Command::new(BIN).arg("--print-schema").output().unwrap();
    assert!(output.status.success());
    let schema: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(schema["title"], "nanofock run config");

    let tmp = TempDir::new().unwrap();
    for name in ["reference.json", "reference_effective.json", "moderate.json"] {
        let r = run(&tmp, &load(name), &["validate"]);
        assert!(r.code == 0 || r.code == 2, "{name}: {}", r.stderr);
    }
}

#[test]
fn moderate_example_reaches_a_shallow_negative_peak() {
    let tmp = TempDir::new().unwrap();
    let r = run(&tmp, &load("moderate.json"), &["steady", "--converge"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let w0 = f(&r.json("populations.json")["reduced"]["wigner_origin"]);
    assert!((w0 + 0.13).abs() < 0.05, "W(0,0) = {w0}");
}
