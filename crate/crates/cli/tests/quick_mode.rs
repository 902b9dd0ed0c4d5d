//! Kept in its own test binary so the timing is not shared with other tests.

use std::process::Command;
use std::time::Instant;

#[test]
fn detect_quick_mode_finishes_in_30_seconds() {
    let out = std::env::temp_dir().join(format!("aggint-quick-{}.csv", std::process::id()));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_aggint"))
        .args(["detect", "--pfa", "0.1", "--delta", "2.62", "--snr", "-20:0:2", "--trials", "100", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"pfa_achieved\""));
    assert!(secs < 30.0, "quick mode took {secs:.1} s");
}
