//! Acceptance run: one PASS/FAIL line per criterion, default configuration.
//!
//! Criterion 10a cannot pass for p = q = 2. The H-norm of u(t) is
//! nonincreasing, so ||u||_{L2(0,8)} <= 4 ||u||_{L2(0,1/2)}, and the ratio at
//! T = 8 is at most 4 * 1.25 / 65 of the ratio at T = 1/2 (variation >= 13).
//! It is run and reported as it stands; the test fails if it ever starts
//! passing, so that the analysis gets revisited.

use std::io::Write;

use nle::{run_preset, ExperimentConfig, PRESETS};

const UNATTAINABLE: &[&str] = &["10a"];

#[test]
fn acceptance() {
    let cfg = ExperimentConfig::default();
    let out = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    let mut unexpected = Vec::new();
    for name in PRESETS {
        let report = run_preset(name, &cfg, Some(out.path())).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!report.artifacts.is_empty(), "{name} wrote no artifacts");
        for c in report.criteria {
            let blocked = UNATTAINABLE.contains(&c.id.as_str());
            let mut line = c.line();
            if blocked {
                line.push_str(" [unattainable for p=2: nonincreasing H-norm forces variation >= 13]");
            }
            if c.pass == blocked {
                unexpected.push(c.id.clone());
            }
            lines.push((c.id, line));
        }
    }
    lines.sort_by_key(|(id, _)| {
        let digits: String = id.chars().take_while(char::is_ascii_digit).collect();
        (digits.parse::<u32>().unwrap_or(u32::MAX), id.clone())
    });
    // direct handle write so the lines survive libtest output capture
    let mut err = std::io::stderr().lock();
    for (_, l) in &lines {
        writeln!(err, "{l}").unwrap();
    }
    drop(err);
    for want in ["1", "2", "3", "4", "5", "6", "7", "8a", "8b", "9", "10a", "10b", "11"] {
        assert!(lines.iter().any(|(id, _)| id == want), "criterion {want} not reported");
    }
    assert!(unexpected.is_empty(), "unexpected outcome for {unexpected:?}");
}
