use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sfp::graph::save_realization;
use sfp::hierarchy::fixtures::{figure2, figure2_mutations, figure2_realization};
use sfp::hierarchy::{Hierarchy, SiteKey};

fn sfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfp")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_hierarchy(h: &Hierarchy, path: &Path) {
    let mut s = String::from("# sites\n");
    for (k, lv) in h.levels().iter().enumerate() {
        for (c, z) in lv.iter().enumerate() {
            let coords: Vec<String> = z.coords().iter().map(|x| x.to_string()).collect();
            s += &format!("s {} {}\n", SiteKey::new(k as u32 + 1, c as u64), coords.join(" "));
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn exponents_prints_one_row() {
    let o = sfp(&["exponents", "--dim", "1", "--alpha", "1.5", "--tau", "2.5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 2);
    assert!(data[0].starts_with("gamma,alpha1,alpha2"));
    assert!(data[1].starts_with("2.25,1.125,1.25,"));
    assert!(out.contains("# version="));
}

#[test]
fn usage_errors_exit_one() {
    let o = sfp(&["exponents", "--frobnicate"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(o.stdout.is_empty());
    assert_eq!(code(&sfp(&["exponents", "--tau", "0.5"])), 1);
    assert_eq!(code(&sfp(&["nonsense"])), 1);
    assert_eq!(code(&sfp(&["--version"])), 0);
}

#[test]
fn injected_failure_exits_two() {
    let o = sfp(&["verify", "--quick", "--only", "3", "--inject-failure"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("#verdict criterion_3 FAIL"));
    assert_eq!(code(&sfp(&["verify", "--quick", "--only", "3"])), 0);
}

#[test]
fn runtime_errors_exit_three() {
    let o = sfp(&["hierarchy", "check", "--realization", "/nonexistent/r", "--hierarchy", "/nonexistent/h"]);
    assert_eq!(code(&o), 3);
    // tau outside (2, 3) for the adjacent-edge experiment
    assert_eq!(code(&sfp(&["adjacent", "--tau", "3.5", "--replicates", "10"])), 3);
}

#[test]
fn config_file_is_merged_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# experiment settings\nalpha = 3/2\ntau = 3.5\ndim = 1\n").unwrap();
    let out = stdout(&sfp(&["exponents", "--config", cfg.to_str().unwrap(), "--tau", "2.5"]));
    assert!(out.contains("# alpha=1.5") && out.contains("# tau=2.5"), "{out}");
    fs::write(&cfg, "frobnicate = 1\n").unwrap();
    assert_eq!(code(&sfp(&["exponents", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn reports_go_to_file_and_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let args = |out: &str, threads: &str| {
        vec!["--threads".to_string(), threads.into(), "coupling".into(), "--replicates".into(), "5".into(), "--side".into(), "64".into(), "--out".into(), out.to_string()]
    };
    for (name, t) in [("a.csv", "1"), ("b.csv", "2")] {
        let a: Vec<String> = args(&f(name), t);
        let o = Command::new(env!("CARGO_BIN_EXE_sfp")).args(&a).output().unwrap();
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    let body = |n: &str| -> String {
        fs::read_to_string(f(n)).unwrap().lines().filter(|l| !l.starts_with("#wallclock")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(body("a.csv"), body("b.csv"));
    assert!(body("a.csv").contains("# seed=0"));
}

#[test]
fn hierarchy_check_reports_validity() {
    let dir = tempfile::tempdir().unwrap();
    let h = figure2();
    let rp = dir.path().join("fig2.realization");
    let hp = dir.path().join("fig2.hierarchy");
    save_realization(&figure2_realization(&h), &rp).unwrap();
    write_hierarchy(&h, &hp);
    let args = |r: &Path, h: &Path| sfp(&["hierarchy", "check", "--realization", r.to_str().unwrap(), "--hierarchy", h.to_str().unwrap()]);
    let o = args(&rp, &hp);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for (cond, hm, rm) in figure2_mutations() {
        let rp = dir.path().join(format!("m{cond}.realization"));
        let hp = dir.path().join(format!("m{cond}.hierarchy"));
        save_realization(&rm, &rp).unwrap();
        write_hierarchy(&hm, &hp);
        let o = args(&rp, &hp);
        assert_eq!(code(&o), 2);
        assert!(stdout(&o).contains(&format!("condition={cond}")), "{}", stdout(&o));
    }
}

#[test]
fn generate_writes_a_loadable_realization() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("box.txt");
    let o = sfp(&["generate", "--dim", "2", "--alpha", "3", "--side", "10", "--origin", "-5,-5", "--seed", "9", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = sfp::graph::load_realization(&p).unwrap();
    assert_eq!(r.seed(), 9);
    assert_eq!(r.spec().origin().coords(), &[-5, -5]);
}

#[test]
fn moments_subcommands_run() {
    let o = sfp(&["moments", "adjacent", "--r-xy", "21.544346900318835", "--r-yz", "4.641588833612778"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0.01397366"));
    assert_eq!(code(&sfp(&["moments", "second", "--r", "2,4,8"])), 0);
    assert_eq!(code(&sfp(&["moments", "convolution", "--u", "0", "--v", "5", "--radius", "40"])), 0);
}
