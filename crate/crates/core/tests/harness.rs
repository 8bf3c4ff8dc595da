use ptt_core::harness::{
    encode_snapshot, load_snapshot, parse_config, run_scenario, save_snapshot, Scenario, ScenarioConfig,
};
use ptt_core::model::{make_initial_data, InitialData, ModelParams};
use ptt_core::spectral::Grid;
use ptt_core::PttError;

#[test]
fn snapshot_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(8).unwrap();
    let s = make_initial_data(g, &InitialData::global(0.02, 4)).unwrap();
    let path = dir.path().join("s.pttf");
    save_snapshot(&s, &ModelParams::default(), &path).unwrap();
    let back = load_snapshot(&path).unwrap();
    assert_eq!(back.state, s);
    assert_eq!(std::fs::read(&path).unwrap(), encode_snapshot(&back.state, &back.params));
    assert_eq!(&std::fs::read(&path).unwrap()[..4], b"PTTF");
    assert!(matches!(load_snapshot(&dir.path().join("missing.pttf")), Err(PttError::Io { .. })));
}

fn body(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn same_config_gives_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mk = |dir: &std::path::Path| {
        let mut cfg = parse_config("scenario=blowup\nn=8\ndt=5e-3\nt_max=0.2\nparticles=4\n").unwrap();
        cfg.output_dir = dir.to_path_buf();
        cfg
    };
    run_scenario(&mk(a.path())).unwrap();
    run_scenario(&mk(b.path())).unwrap();
    for f in ["energies.csv", "trajectories.csv", "riccati.csv"] {
        let strip = |s: String| s.lines().filter(|l| !l.starts_with("# output_dir")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(body(&a.path().join(f))), strip(body(&b.path().join(f))), "{f}");
    }
    let energies = body(&a.path().join("energies.csv"));
    let first_row = energies.lines().find(|l| !l.starts_with('#') && !l.starts_with('t')).unwrap();
    assert!(first_row.split(',').all(|v| v.contains('e') && v.parse::<f64>().is_ok()));
}

#[test]
fn linear_scenario_writes_semigroup_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        n: 8,
        dt: 5e-3,
        delta0: 0.1,
        output_dir: dir.path().to_path_buf(),
        ..ScenarioConfig::new(Scenario::Linear)
    };
    let rep = run_scenario(&cfg).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures());
    let table = body(&dir.path().join("semigroup.csv"));
    assert!(table.lines().any(|l| l.starts_with("ksq,t,n_uu")));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1 + 64 * 3);
    assert!(body(&dir.path().join("summary.txt")).contains("result=pass"));
}

#[test]
fn verify_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        n: 16,
        output_dir: dir.path().to_path_buf(),
        ..ScenarioConfig::new(Scenario::Verify)
    };
    let rep = run_scenario(&cfg).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures());
    assert_eq!(rep.exit_code(), 0);
}
