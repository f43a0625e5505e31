use std::path::Path;
use std::process::{Command, Output};

use dnls_cli::output::{RunManifest, RunStatus};
use dnls_core::LatticeField;

fn dnls(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnls"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn verified(dir: &Path) -> RunManifest {
    let m = RunManifest::load(dir).unwrap();
    assert!(
        m.verify(dir).unwrap().is_empty(),
        "digest mismatch in {}",
        dir.display()
    );
    m
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn soliton_writes_params_profile_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(d.path(), &["soliton", "--set", "m=25", "--set", "grid=64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&d.path().join("soliton.json"));
    assert_eq!(r["params"]["branch"], "Dnoidal");
    assert!(r["energy"].as_f64().unwrap() < -156.25);
    let csv = std::fs::read_to_string(d.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,q"));
    assert_eq!(csv.lines().count(), 65);
    let m = verified(d.path());
    assert_eq!(m.status, RunStatus::Complete);
    assert_eq!(m.command, "soliton");
    assert_eq!(m.config["params"]["m"], 25.0);
}

#[test]
fn missing_required_key_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(d.path(), &["soliton"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`m`"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(d.path(), &["rankcheck", "--set", "point=3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("points"), "{}", stderr(&o));
}

#[test]
fn conflicting_beta_settings_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(d.path(), &["concentrate", "--set", "beta=3", "--set", "schedule.a=2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_and_json_tables() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(
        &cfg,
        "format = \"json\"\n[rankcheck]\nn_min = 2\nn_max = 4\npoints = 20\n",
    )
    .unwrap();
    let out = d.path().join("out");
    let o = dnls(&out, &["--config", cfg.to_str().unwrap(), "rankcheck"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = json(&out.join("rankcheck.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["pass"] == true));
    verified(&out);
}

#[test]
fn discrete_soliton_feeds_distance() {
    let d = tempfile::tempdir().unwrap();
    let sol = d.path().join("sol");
    let o = dnls(&sol, &["soliton-discrete", "--set", "n=32", "--set", "m=25"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&sol.join("result.json"));
    assert!(r["energy"].as_f64().unwrap() < -156.25);
    assert!(r["grad_norm"].as_f64().unwrap() <= 1e-10);
    let field = LatticeField::load(&sol.join("field.bin")).unwrap();
    assert_eq!(field.n(), 32);

    let dist = d.path().join("dist");
    let a = format!("a.file={:?}", sol.join("field.bin").to_str().unwrap());
    let o = dnls(&dist, &["distance", "--set", &a, "--set", "b.soliton=25.0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dist.join("distance.json"));
    let v = r["distance"].as_f64().unwrap();
    assert!(v > 0.0 && v < 2.0, "distance {v}");

    // a field against itself
    let o = dnls(&dist, &["distance", "--set", &a, "--set", &a.replacen("a.", "b.", 1)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(json(&dist.join("distance.json"))["distance"].as_f64().unwrap() < 1e-6);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let args = |threads: &'static str| {
        vec![
            "--seed",
            "11",
            "--threads",
            threads,
            "simulate",
            "--set",
            "t_final=0.5",
            "--set",
            "snapshots=2",
            "--set",
            "sde.n=16",
            "--set",
            "sde.m=2.0",
            "--set",
            "sde.beta=10.0",
            "--set",
            "sde.record_every=100",
        ]
    };
    let a = d.path().join("a");
    let b = d.path().join("b");
    assert_eq!(code(&dnls(&a, &args("1"))), 0);
    assert_eq!(code(&dnls(&b, &args("2"))), 0);
    for f in ["observables.csv", "final.bin", "state_0001.bin", "state_0002.bin"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let s = json(&a.join("summary.json"));
    assert!(s["max_mass_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(
        std::fs::read(a.join("state_0002.bin")).unwrap(),
        std::fs::read(a.join("final.bin")).unwrap()
    );
    verified(&a);
}

#[test]
fn zero_temperature_simulation_reports_monotone_energy() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(
        d.path(),
        &[
            "simulate",
            "--set",
            "t_final=1.0",
            "--set",
            "init.soliton-plus-noise=0.2",
            "--set",
            "monotonicity=true",
            "--set",
            "distance=true",
            "--set",
            "sde.n=16",
            "--set",
            "sde.m=25.0",
            "--set",
            "sde.beta=\"inf\"",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&d.path().join("summary.json"));
    assert!(s["max_energy_increase"].as_f64().unwrap() <= s["energy_increase_tolerance"].as_f64().unwrap());
    assert!(s["final_distance"].as_f64().is_some());
}

#[test]
fn sample_writes_chain_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(
        d.path(),
        &[
            "sample",
            "--set",
            "n=8",
            "--set",
            "m=1.0",
            "--set",
            "beta=2.0",
            "--set",
            "chains=2",
            "--set",
            "save_last=true",
            "--set",
            "mcmc.steps=20000",
            "--set",
            "mcmc.burn_in=2000",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let chains = std::fs::read_to_string(d.path().join("chains.csv")).unwrap();
    assert_eq!(chains.lines().count(), 3);
    let last = LatticeField::load(&d.path().join("last_001.bin")).unwrap();
    assert_eq!(last.n(), 8);
    assert_eq!(verified(d.path()).seeds.len(), 2);
}

#[test]
fn ldtest_orders_estimate_and_bounds() {
    let d = tempfile::tempdir().unwrap();
    let o = dnls(d.path(), &["ldtest", "--set", "samples=200000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("ldtest.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn gncheck_flags_a_too_small_constant() {
    let d = tempfile::tempdir().unwrap();
    let small = ["gncheck", "--set", "samples=2000", "--set", "n_max=16"];
    let o = dnls(d.path(), &small);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&d.path().join("gncheck.json"));
    assert_eq!(r["violations"], 0);

    let mut args = small.to_vec();
    args.extend(["--set", "c=0.5"]);
    let o = dnls(d.path(), &args);
    assert_eq!(code(&o), 4);
    let m = verified(d.path());
    assert_eq!(m.status, RunStatus::Failed);
    assert!(json(&d.path().join("gncheck.json"))["violations"].as_u64().unwrap() > 0);
}

#[test]
fn concentrate_and_headline_small_runs() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("c");
    let o = dnls(
        &c,
        &[
            "concentrate",
            "--set",
            "n_list=[8]",
            "--set",
            "chains=2",
            "--set",
            "mcmc.steps=20000",
            "--set",
            "mcmc.burn_in=5000",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(c.join("concentration.csv")).unwrap();
    assert!(csv.starts_with("n,beta_n,e0n,probability"));

    for method in ["mcmc", "sde"] {
        let h = d.path().join(method);
        let set_method = format!("method=\"{method}\"");
        let o = dnls(
            &h,
            &[
                "headline",
                "--set",
                &set_method,
                "--set",
                "m=0.5",
                "--set",
                "schedule.beta=1000.0",
                "--set",
                "eps=0.1",
                "--set",
                "n_list=[8]",
                "--set",
                "chains=2",
                "--set",
                "mcmc.steps=10000",
                "--set",
                "mcmc.burn_in=2000",
                "--set",
                "sde.t_burn=1.0",
                "--set",
                "sde.t_sample=2.0",
            ],
        );
        assert_eq!(code(&o), 0, "{method}: {}", stderr(&o));
        let csv = std::fs::read_to_string(h.join("headline.csv")).unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let p: f64 = row[6].parse().unwrap();
        // constant soliton at small mass and beta_n = 1000 * 8^1.5: samples hug it
        assert!(p > 0.9, "{method}: probability {p}");
        verified(&h);
    }
}
