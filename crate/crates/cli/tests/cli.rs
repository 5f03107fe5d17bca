use std::path::Path;
use std::process::{Command, Output};

fn chansim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chansim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CONFIG: &str = "\
# small LOS job
frequency_ghz = 16.95
condition = LOS
tr_distance_m = 60
seed = 11
n_realizations = 40
tx_antenna = horn
rx_antenna = horn
output_dir = out
";

#[test]
fn version_lists_formats() {
    let d = tempfile::tempdir().unwrap();
    let o = chansim(&["--version"], d.path());
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains(env!("CARGO_PKG_VERSION")) && s.contains("ant3d format 1") && s.contains("manifest format 1"), "{s}");
}

#[test]
fn generate_writes_files_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("job.cfg"), CONFIG).unwrap();
    let o = chansim(&["--config", "job.cfg", "generate"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = d.path().join("out");
    for f in ["manifest.json", "components.csv", "pdp.csv", "summary.csv", "omni_ds_cdf.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let comps = std::fs::read_to_string(out.join("components.csv")).unwrap();
    assert!(comps.starts_with("realization,cluster,lobe,delay_ns,power_db,phase_rad,aod_deg,zod_deg,aoa_deg,zoa_deg\n"));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 41);

    // Same seed, other worker count, other directory: identical bytes.
    let o = chansim(&["--config", "job.cfg", "--out", "again", "generate", "--workers", "3"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["manifest.json", "components.csv", "summary.csv"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(d.path().join("again").join(f)).unwrap());
    }

    // A different seed changes the data.
    let o = chansim(&["--config", "job.cfg", "--seed", "12", "--out", "other", "generate"], d.path());
    assert!(o.status.success());
    assert_ne!(
        std::fs::read(out.join("components.csv")).unwrap(),
        std::fs::read(d.path().join("other/components.csv")).unwrap()
    );
}

#[test]
fn stats_and_ks_on_generated_summary() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("job.cfg"), CONFIG).unwrap();
    assert!(chansim(&["--config", "job.cfg", "generate"], d.path()).status.success());
    let o = chansim(&["--out", "cdf.csv", "stats", "out/summary.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("mu_log10 "));
    assert!(std::fs::read_to_string(d.path().join("cdf.csv")).unwrap().starts_with("value,probability\n"));

    let o = chansim(&["validate", "ks", "out/summary.csv", "out/summary.csv"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("statistic 0") && s.trim_end().ends_with("accept"), "{s}");
}

#[test]
fn antenna_tools_write_readable_patterns() {
    let d = tempfile::tempdir().unwrap();
    let o = chansim(&["--out", "p.ant3d", "antenna", "synth-3gpp", "--step-deg", "5"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let p = chansim::antenna::read_ant3d(d.path().join("p.ant3d")).unwrap();
    assert_eq!(p.peak_gain_dbi(), 8.0);

    std::fs::write(d.path().join("v.csv"), "angle_deg,gain_dbi\n-90,-10\n0,12\n90,-10\n").unwrap();
    std::fs::write(d.path().join("h.csv"), "angle_deg,gain_dbi\n0,12\n180,-8\n").unwrap();
    let o = chansim(
        &["--out", "cuts.ant3d", "antenna", "import-cuts", "--vcut", "v.csv", "--hcut", "h.csv", "--peak-gain-dbi", "12", "--step-deg", "10"],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let p = chansim::antenna::read_ant3d(d.path().join("cuts.ant3d")).unwrap();
    assert!((p.gain_at(0.0, 0.0) - 12.0).abs() < 1e-9);
}

#[test]
fn errors_are_categorized_with_nonzero_exit() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.cfg"), "frequency_ghz = sixteen\n").unwrap();
    let o = chansim(&["--config", "bad.cfg", "generate"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("config error: line 1"), "{}", stderr(&o));

    std::fs::write(d.path().join("ant.cfg"), "frequency_ghz = 16.95\nrx_antenna = missing.ant3d\noutput_dir = out\n").unwrap();
    let o = chansim(&["--config", "ant.cfg", "generate"], d.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("antenna error"));
    assert!(!d.path().join("out").exists());

    let o = chansim(&["generate"], d.path());
    assert_eq!(o.status.code(), Some(2));

    let o = chansim(&["stats", "nope.csv"], d.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("io error"));

    std::fs::write(d.path().join("x.csv"), "a,b\n1,2\n").unwrap();
    let o = chansim(&["stats", "x.csv"], d.path());
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("data error"));

    let o = chansim(&["--out", "p.ant3d", "antenna", "synth-3gpp", "--step-deg", "7"], d.path());
    assert_eq!(o.status.code(), Some(4));
}
