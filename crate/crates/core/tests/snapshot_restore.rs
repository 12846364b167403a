use polyflow::runner::{SimConfig, Simulation, Snapshot};

const CONFIG: &str = "\
nx = 8
nm = 16
L_m = 6
dt = 0.01
T = 0.06
solver = both
snapshot_interval = 0.03
initial_f = stretched_gaussian
";

#[test]
fn snapshots_on_disk_round_trip_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimConfig::parse(CONFIG).unwrap();
    cfg.output_dir = Some(dir.path().to_path_buf());
    let mut full = Simulation::new(cfg.clone()).unwrap();
    full.run().unwrap();

    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".pksn"))
        .collect();
    names.sort();
    assert_eq!(names, ["state_3.pksn", "state_6.pksn"]);
    assert!(dir.path().join("energy.csv").exists());
    assert!(dir.path().join("closure.csv").exists());

    let bytes = std::fs::read(dir.path().join("state_3.pksn")).unwrap();
    let mid = Snapshot::from_bytes(&bytes).unwrap();
    assert_eq!(mid.to_bytes(), bytes);
    assert_eq!(mid.step, 3);
    assert_eq!(mid.dims, [8, 8, 16]);
    assert_eq!(mid.config_hash, cfg.hash());

    let mut resumed = Simulation::restore(cfg.clone(), &mid).unwrap();
    resumed.run().unwrap();
    let last = Snapshot::load(&dir.path().join("state_6.pksn")).unwrap();
    assert!(resumed.snapshot().bit_identical(&last));
    assert!(full.snapshot().bit_identical(&last));
}

#[test]
fn restore_rejects_a_different_config() {
    let cfg = SimConfig::parse(CONFIG).unwrap();
    let snap = Simulation::new(cfg.clone()).unwrap().snapshot();
    let other = SimConfig { epsilon: 2.0, ..cfg };
    assert!(Simulation::restore(other, &snap).is_err());
}
