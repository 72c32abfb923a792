use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use supernorm::algebra::serialize::{field_from_text, from_text, to_text};
use supernorm::gaussian::{combined_expectation, expect_theta, lift_index, primed_index};
use supernorm::norms::{tphi_certified, verify_certificate};
use supernorm::regulators::{log_regulator, mc_csv, regulator_expectation_mc, ProbeFamily, RegulatorKind, RegulatorParams};
use supernorm::verify::{lookup, run_suite, PropertyReport};
use supernorm::{BijectionMap, CovariancePair, Cq, Field, Kind, NElement, NormParams, Weight, C64};

use crate::config::RunConfig;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Violation = 1,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn table(reports: &[PropertyReport]) -> String {
    let mut out = format!("{:<32} {:>7} {:>10} {:>12} {:>10}\n", "suite", "trials", "violations", "worst_slack", "ms");
    for r in reports {
        let slack = r.worst_slack.map_or("-".to_string(), |s| format!("{s:.3e}"));
        out.push_str(&format!("{:<32} {:>7} {:>10} {:>12} {:>10.1}\n", r.id, r.trials, r.violations, slack, r.runtime_ms));
    }
    out
}

fn summary_csv(reports: &[PropertyReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "trials", "violations", "worst_slack", "runtime_ms", "fingerprint"])?;
    for r in reports {
        let slack = r.worst_slack.map_or(String::new(), |s| s.to_string());
        w.write_record([&r.id, &r.trials.to_string(), &r.violations.to_string(), &slack, &r.runtime_ms.to_string(), &r.fingerprint])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Runs the selected suites. Reports go to `<out>/reports.jsonl` with a
/// `summary.csv` beside them, or to stdout as JSON lines when no output
/// directory is set; the table goes to whichever stream is free.
pub fn verify(cfg: &RunConfig) -> Result<Status> {
    let spec = cfg.instance_spec();
    let mut reports = Vec::new();
    for id in cfg.suite_ids() {
        let trials = cfg.trials.unwrap_or(lookup(id)?.default_trials);
        let r = run_suite(id, &spec, trials)?;
        if cfg.output.dir.is_none() {
            println!("{}", r.to_json_line());
        }
        reports.push(r);
    }
    match &cfg.output.dir {
        Some(dir) => {
            create_dir(dir)?;
            let lines: String = reports.iter().map(|r| r.to_json_line() + "\n").collect();
            write(&dir.join("reports.jsonl"), &lines)?;
            write(&dir.join("summary.csv"), &summary_csv(&reports)?)?;
            print!("{}", table(&reports));
        }
        None => eprint!("{}", table(&reports)),
    }
    for r in reports.iter().filter(|r| !r.passed()) {
        for f in &r.failures {
            eprintln!("{} trial {}: {}", r.id, f.trial, f.message);
        }
    }
    Ok(if reports.iter().all(PropertyReport::passed) { Status::Pass } else { Status::Violation })
}

/// Prints `||F||_{T_phi}` and its upper bound, writes the certificate and
/// re-verifies it from the file.
pub fn norm(cfg: &RunConfig, element: &Path, field: &Path, certificate: Option<PathBuf>) -> Result<Status> {
    let f: NElement<C64> = from_text(&read(element)?).with_context(|| format!("in {}", element.display()))?;
    let phi: Field<C64> = field_from_text(&f.layout, &read(field)?).with_context(|| format!("in {}", field.display()))?;
    let torus = cfg.torus()?;
    let n = &cfg.norm;
    let weight = Weight::uniform(n.h, f.layout.species.len(), n.p_phi, torus.r as f64)?;
    let mut params = NormParams::new(n.p_n, weight, n.mode);
    params.grid = n.grid;
    let (value, cert) = tphi_certified(&f, &phi, &params, (n.p_phi > 0).then_some(&torus))?;

    let path = certificate.unwrap_or_else(|| cfg.output.dir.clone().unwrap_or_default().join("certificate.json"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write(&path, &serde_json::to_string_pretty(&cert)?)?;
    let reread = serde_json::from_str(&read(&path)?)?;
    let check = verify_certificate(&f, &phi, &reread)?;

    // `+ 0.0` prints a zero norm as 0 rather than -0
    println!("value {}", value.value + 0.0);
    println!("upper {}", value.upper + 0.0);
    println!("certificate {}", path.display());
    println!("recheck relative_error {:e} phi_norm {}", check.relative_error, check.phi_norm);
    if !check.holds() {
        eprintln!("certificate re-verification failed");
        return Ok(Status::Violation);
    }
    Ok(Status::Pass)
}

/// Covariance blocks for every pair species, sized to its sites.
fn covariance(cfg: &RunConfig, f: &NElement<Cq>) -> Result<CovariancePair<Cq>> {
    let mut blocks = Vec::new();
    for (s, sp) in f.layout.species.iter().enumerate() {
        if !sp.pair {
            continue;
        }
        let (cb, cf) = cfg.covariances(sp.sites)?;
        blocks.push((s as u16, if sp.kind == Kind::Boson { cb } else { cf }));
    }
    Ok(CovariancePair::new(&f.layout, blocks)?)
}

/// Full Gaussian expectation `E_C F`, or `E_C theta F` with `theta`.
pub fn expect(cfg: &RunConfig, element: &Path, theta: bool, out: Option<&Path>) -> Result<Status> {
    let f: NElement<Cq> = from_text(&read(element)?).with_context(|| format!("in {}", element.display()))?;
    if let Some(cap) = f.trunc {
        bail!("{}: element is a series truncated at degree {cap}, not a polynomial", element.display());
    }
    let c = covariance(cfg, &f)?;
    let b = BijectionMap::for_covariance(&f.layout, &c);
    let e = if theta {
        expect_theta(&f, &c, &b)?
    } else {
        // integrate every covered field: move it to the primed copy
        let dl = b.doubled_layout(&f.layout);
        let g = f.relabel(&dl, |u| primed_index(&b, u).unwrap_or_else(|| lift_index(u)));
        combined_expectation(&g, &c, &f.layout)?
    };
    let text = to_text(&e);
    if from_text::<Cq>(&text)? != e {
        bail!("result does not round-trip through the element format");
    }
    match out {
        Some(p) => write(p, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(Status::Pass)
}

/// Monte-Carlo `E G^t(X)` for each block set and power; with
/// `regulator.large_field` also tabulates `log G` and `log G~` on the
/// probe family.
pub fn sample(cfg: &RunConfig) -> Result<Status> {
    let torus = cfg.torus()?;
    let r = &cfg.regulator;
    let cb = cfg.covariances(torus.num_sites())?.0.to_f64();
    let sets: Vec<BTreeSet<usize>> = if r.blocks.is_empty() {
        vec![(0..torus.num_blocks()).collect()]
    } else {
        r.blocks.iter().map(|x| x.iter().copied().collect()).collect()
    };
    let mut reports = Vec::new();
    for x in &sets {
        for &t in &r.t {
            let reg = RegulatorParams::new(cfg.norm.ell, cfg.norm.h, r.d_pi, r.alpha_g, t)?;
            let rep = regulator_expectation_mc(&torus, x, &reg, &cb, r.samples, cfg.seed)?;
            for flag in &rep.flags {
                eprintln!("X = {:?}, t = {t}: {flag}", rep.blocks);
            }
            reports.push(rep);
        }
    }
    let csv = mc_csv(&reports);
    match &cfg.output.dir {
        Some(dir) => {
            create_dir(dir)?;
            write(&dir.join("mc.csv"), &csv)?;
        }
        None => print!("{csv}"),
    }
    if r.large_field {
        let reg = RegulatorParams::new(cfg.norm.ell, cfg.norm.h, r.d_pi, r.alpha_g, r.t[0])?;
        let probes = ProbeFamily { seed: cfg.seed, ..ProbeFamily::default() }.probes(&torus, cfg.norm.h);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["X", "probe", "log_g", "log_gtilde"])?;
        for x in &sets {
            let sites: BTreeSet<usize> = x.iter().flat_map(|&b| torus.block_sites(b)).collect();
            let label: Vec<String> = x.iter().map(|b| b.to_string()).collect();
            for p in &probes {
                let g = log_regulator(RegulatorKind::Fluctuation, &torus, &sites, &p.field, &reg)?;
                let gt = log_regulator(RegulatorKind::LargeField, &torus, &sites, &p.field, &reg)?;
                w.write_record([label.join(";"), p.name.clone(), g.to_string(), gt.to_string()])?;
            }
        }
        let table = String::from_utf8(w.into_inner()?)?;
        match &cfg.output.dir {
            Some(dir) => write(&dir.join("probes.csv"), &table)?,
            None => print!("\n{table}"),
        }
    }
    Ok(Status::Pass)
}
