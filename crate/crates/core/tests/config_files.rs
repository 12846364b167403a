use std::io::Write;

use polyflow::runner::{load_config, DtPolicy, SolverKind};

fn write(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn loads_a_commented_file() {
    let f = write("# coupled run\nT = 0.5   # horizon\n\nsolver = kinetic\ndt = 0.002\n");
    let c = load_config(f.path()).unwrap();
    assert_eq!(c.t_final, 0.5);
    assert_eq!(c.solver, SolverKind::Kinetic);
    assert_eq!(c.dt, DtPolicy::Fixed(0.002));
}

#[test]
fn errors_carry_line_numbers() {
    let f = write("T = 1\n\nnx = 32\nviscosity = 2\n");
    let msg = load_config(f.path()).unwrap_err().to_string();
    assert!(msg.contains("line 4") && msg.contains("viscosity"), "{msg}");

    let f = write("T = 1\nepsilon = -1\n");
    let msg = load_config(f.path()).unwrap_err().to_string();
    assert!(msg.contains("line 2") && msg.contains("epsilon"), "{msg}");
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_config(&dir.path().join("absent.cfg")).is_err());
}

#[test]
fn hash_ignores_output_dir_only() {
    let a = load_config(write("T = 1\n").path()).unwrap();
    let b = load_config(write("T = 1\noutput_dir = elsewhere\n").path()).unwrap();
    let c = load_config(write("T = 1\nseed = 5\n").path()).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
}
