use std::process::Command;

fn scma_sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scma-sim"))
}

#[test]
fn rejects_unknown_config_keys_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "alist = \"x.alist\"\nchannels = [\"awgn\"]\nes_n0_db = [1.0]\nmodes = [\"mode2\"]\nbogus = 1\n",
    )
    .unwrap();
    let out = scma_sim().arg("sweep").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `bogus`"));
}

#[test]
fn make_code_writes_loadable_alist_and_generator() {
    let dir = tempfile::tempdir().unwrap();
    let alist = dir.path().join("c.alist");
    let generator = dir.path().join("c.gen");
    let out = scma_sim()
        .args(["make-code", "--bits", "96", "--seed", "4", "--out"])
        .arg(&alist)
        .arg("--generator")
        .arg(&generator)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let h = scma_core::ldpc::ParityCheckMatrix::load_alist(&alist).unwrap();
    assert_eq!((h.n_bits(), h.n_checks()), (96, 48));
    let enc = scma_core::ldpc::SystematicEncoder::load_for(&h, &std::fs::read(&generator).unwrap()).unwrap();
    assert_eq!(enc.n_info(), 48);
}

#[test]
fn tiny_sweep_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = scma_core::ldpc::data_dir();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(
        &cfg,
        format!(
            "alist = {:?}\ngenerator = {:?}\nchannels = [\"awgn\"]\nes_n0_db = [8.0]\nmodes = [\"mode2\"]\n\
             [stopping]\nmin_frames = 1\nmax_frames = 1\nbatch_frames = 1\n",
            data.join("peg_1024_3_6.alist"),
            data.join("peg_1024_3_6.gen")
        ),
    )
    .unwrap();
    let out = scma_sim().arg("sweep").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    assert!(csv.starts_with("channel,mode,es_n0_db,frames"));
    assert_eq!(csv.lines().count(), 2);
    assert!(dir.path().join("tiny_plot.py").exists());
}
