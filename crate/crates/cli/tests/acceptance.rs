use std::collections::BTreeMap;
use std::io::Write;

use dce_kerr_cli::checks::{
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
    criterion_8, preset_suite, Check, SEED,
};

fn criterion(check: &Check) -> u32 {
    check
        .name
        .strip_prefix("criterion ")
        .and_then(|s| s.split(' ').next())
        .and_then(|n| n.parse().ok())
        .unwrap_or_else(|| panic!("not a criterion check: {}", check.name))
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut checks = vec![
        criterion_1(256),
        criterion_1(1024),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(100, SEED),
        criterion_7(),
        criterion_8(),
    ];
    checks.extend(preset_suite(dir.path()).expect("preset runs"));

    // Written to the process stdout rather than the captured test output, so the
    // report shows in a plain `cargo test` run.
    let mut out = std::io::stdout().lock();
    let mut by_criterion: BTreeMap<u32, Vec<&Check>> = BTreeMap::new();
    writeln!(out).unwrap();
    for c in &checks {
        writeln!(out, "  {c}").unwrap();
        by_criterion.entry(criterion(c)).or_default().push(c);
    }
    assert_eq!(by_criterion.keys().copied().collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    for (n, cs) in &by_criterion {
        let status = if cs.iter().all(|c| c.passed) {
            "PASS"
        } else if cs.iter().all(|c| c.acceptable()) {
            "FAIL at the stated tolerance (documented deviation; corrected companion passes)"
        } else {
            "FAIL"
        };
        writeln!(out, "criterion {n}: {status}").unwrap();
    }

    let bad: Vec<&Check> = checks.iter().filter(|c| !c.acceptable()).collect();
    assert!(bad.is_empty(), "failing: {bad:#?}");
    // A deviation that starts passing means the documented explanation is stale.
    for c in checks.iter().filter(|c| c.deviation.is_some()) {
        assert!(!c.passed, "deviation no longer needed: {}", c.name);
    }
}
