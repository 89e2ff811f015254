//! One PASS/FAIL line per acceptance criterion at full scale.

use std::process::{Command, ExitCode};

use sfp::verify::{criterion, CriterionResult, Scale, VerifyOptions, CRITERIA, NAMES};

fn cli_body(threads: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sfp"))
        .args(["--threads", threads, "verify", "--quick", "--seed", "0"])
        .output()
        .map_err(|e| e.to_string())?;
    if !matches!(out.status.code(), Some(0) | Some(2)) {
        return Err(format!("threads={threads}: exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok(text.lines().filter(|l| !l.starts_with("#wallclock")).map(|l| format!("{l}\n")).collect())
}

fn determinism(opts: &VerifyOptions) -> CriterionResult {
    let mut r = criterion(12, opts);
    let (a, b) = (cli_body("1"), cli_body("3"));
    let same = match (&a, &b) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    r.pass &= same;
    r.value = format!("{} cli_identical={same}", r.value);
    r.detail = match (a, b) {
        (Err(e), _) | (_, Err(e)) => e,
        _ => "verify --quick with --threads 1 and 3".into(),
    };
    r
}

fn main() -> ExitCode {
    let opts = VerifyOptions::new(Scale::Full, 0);
    let mut failed = 0;
    for id in 1..=CRITERIA {
        let r = if id == 12 { determinism(&opts) } else { criterion(id, &opts) };
        debug_assert_eq!(r.name, NAMES[id as usize - 1]);
        println!("{}", r.line());
        if !r.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {CRITERIA} criteria passed", CRITERIA as usize - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
