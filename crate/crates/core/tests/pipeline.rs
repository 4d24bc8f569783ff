use std::collections::BTreeMap;
use std::path::Path;

use effitest_core::report::config::AnalysisConfig;
use effitest_core::report::fixture::{write_fixture, FIXTURE_CONFIG};
use effitest_core::report::render::{render, tables};
use effitest_core::report::{run_and_write, OutputFormat, Report};

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        out.insert(rel, std::fs::read(&entry).unwrap());
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn fixture_run_is_clean_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture(tmp.path(), 11).unwrap();
    let mut cfg = AnalysisConfig::from_file(&tmp.path().join(FIXTURE_CONFIG)).unwrap();

    cfg.output_dir = tmp.path().join("run1");
    let (first, files) = run_and_write(&cfg).unwrap();
    cfg.output_dir = tmp.path().join("run2");
    run_and_write(&cfg).unwrap();

    let report = &first.report;
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    assert_eq!(report.markets.len(), 2);
    for m in &report.markets {
        assert_eq!(m.periods.len(), 5);
        let sum: usize = m.periods[1..].iter().map(|p| p.observations).sum();
        assert_eq!(sum, m.periods[0].observations);
    }
    assert!(report.cross.is_some());
    // 5 tables per market plus correlation
    assert_eq!(tables(report).len(), 11);
    assert_eq!(files.iter().filter(|f| f.ends_with(".svg")).count(), 2 * 5 * 6);

    let a = snapshot(&tmp.path().join("run1"));
    let b = snapshot(&tmp.path().join("run2"));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (k, v) in &a {
        assert!(v == &b[k], "{k} differs between runs");
    }

    let json = String::from_utf8(a["report.json"].clone()).unwrap();
    assert_eq!(&Report::from_json(&json).unwrap(), report);
    let md = String::from_utf8(render(report, OutputFormat::Markdown).unwrap().remove(0).1).unwrap();
    assert!(md.contains("| Nruns |"));
}
