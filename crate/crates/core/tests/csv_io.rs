use std::f64::consts::{FRAC_PI_4, PI};
use std::io::BufReader;

use ricci_core::io::{read_trace_csv, read_trace_file, write_trace_csv, write_trace_file, CSV_HEADER};
use ricci_core::solver::EvolveOptions;
use ricci_core::{evolve, make_initial, normalize_trace, Error, FlowTrace, ScenarioSpec, StepperConfig, StopRule};

fn band_csv(n: usize, steps: u64) -> String {
    let s0 = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, n)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::WallSteps(steps), EvolveOptions::every(10)).unwrap();
    let nt = normalize_trace(&run.trace, 1.0).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&run.trace, &nt, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn empty_trace_is_header_only() {
    let trace = FlowTrace::default();
    let nt = normalize_trace(&trace, 1.0).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&trace, &nt, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn sphere_band_first_row() {
    let text = band_csv(256, 0);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 28);
    assert_eq!(row[0], "0");
    let area: f64 = row[3].parse().unwrap();
    assert!((area - 2.0 * PI * 2f64.sqrt()).abs() < 1e-10, "{}", row[3]);
    assert!(row[3].starts_with("8.885765876"), "{}", row[3]);
    // 17 significant digits: one before the point, sixteen after.
    assert_eq!(row[3].split(['.', 'e']).nth(1).unwrap().len(), 16);
    assert_eq!(row[16], "boundary");
}

#[test]
fn output_is_deterministic() {
    assert_eq!(band_csv(64, 200), band_csv(64, 200));
}

#[test]
fn read_after_write_is_exact() {
    let text = band_csv(64, 200);
    let (trace, nt) = read_trace_csv(BufReader::new(text.as_bytes())).unwrap();
    let mut again = Vec::new();
    write_trace_csv(&trace, &nt, &mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
}

#[test]
fn header_mismatch_is_a_format_error() {
    let text = band_csv(64, 10).replacen("step,", "steps,", 1);
    let err = read_trace_csv(BufReader::new(text.as_bytes())).unwrap_err();
    let msg = Error::from(err).to_string();
    assert!(msg.starts_with("cli_io: trace csv format mismatch"), "{msg}");
}

#[test]
fn short_row_names_its_row() {
    let mut text = band_csv(64, 20);
    text.push_str("1,2,3\n");
    let msg = read_trace_csv(BufReader::new(text.as_bytes())).unwrap_err().to_string();
    assert!(msg.starts_with("trace csv row 4"), "{msg}");
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("ricci-csv-{}", std::process::id()));
    let path = dir.join("nested").join("trace.csv");
    let s0 = make_initial(&ScenarioSpec::flat(1.0, 32).with_bump(0.05, 1)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::WallSteps(30), EvolveOptions::every(3)).unwrap();
    let nt = normalize_trace(&run.trace, 2.0).unwrap();
    write_trace_file(&run.trace, &nt, &path).unwrap();
    let (trace, nt2) = read_trace_file(&path).unwrap();
    assert_eq!(trace.len(), run.trace.len());
    assert!(trace.records.iter().zip(&run.trace.records).all(|(a, b)| a.bits_eq(b)));
    assert_eq!(nt2, nt);
    std::fs::remove_dir_all(&dir).unwrap();
}
