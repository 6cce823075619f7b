use std::io::Write;
use std::path::Path;

use qms_core::generator::{DetailedBalanceGenerator, GeneratorDiagnostics};
use qms_core::inequalities::{implication_suite, Constant, FunctionalReport, SuiteOptions};
use qms_core::transport::{w2_distance, W2Options};

use crate::args::Common;
use crate::input::{load_generator, parse_state, read_generator_source, Failure, GeneratorSource};

pub type Outcome = Result<bool, Failure>;

fn w2_options(common: &Common) -> W2Options {
    let mut opts = W2Options::default();
    if let Some(tol) = common.tol {
        opts.tol = tol;
    }
    if let Some(points) = common.path_points {
        opts.segments = points as usize - 1;
    }
    opts
}

fn suite_options(common: &Common) -> SuiteOptions {
    let mut opts = SuiteOptions {
        seed: common.seed,
        w2: w2_options(common),
        kappa_override: common.kappa,
        ..SuiteOptions::default()
    };
    if let Some(n) = common.samples {
        opts.n_random = n as usize;
    }
    opts
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_report(common: &Common, report: &FunctionalReport) -> Result<(), Failure> {
    if let Some(p) = &common.json_out {
        write_file(p, &report.to_json())?;
    }
    if let Some(p) = &common.csv_out {
        write_file(p, &report.to_csv()?)?;
    }
    Ok(())
}

fn print_diagnostics(diag: &GeneratorDiagnostics) {
    for c in &diag.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:<52} residual {:.3e}  tolerance {:.1e}",
            c.name, c.residual, c.tolerance
        );
    }
    if diag.all_pass() {
        let tag = if diag.is_primitive() { "PASS" } else { "FAIL" };
        println!("{tag} {:<52} kernel dimension {}", "primitivity", diag.kernel_dim);
    } else {
        println!("SKIP {:<52} invariants failed", "primitivity");
    }
}

pub fn validate(common: &Common) -> Outcome {
    let diag = match read_generator_source(&common.generator)? {
        GeneratorSource::Builtin(g) => DetailedBalanceGenerator::diagnose(g.sigma(), g.modes())?,
        GeneratorSource::File(f) => {
            let (sigma, modes) = f.decode().map_err(|e| Failure::Usage(e.to_string()))?;
            DetailedBalanceGenerator::diagnose(&sigma, &modes)?
        }
    };
    print_diagnostics(&diag);
    Ok(diag.all_pass() && diag.is_primitive())
}

fn constant_row(name: &str, c: &Constant) {
    let direction = serde_json::to_value(c.direction)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    println!("{name:<10} {:>16.10} {direction:<12} {}", c.value, c.source);
}

fn print_constants(report: &FunctionalReport) {
    let c = &report.constants;
    println!("{:<10} {:>16} {:<12} source", "constant", "value", "direction");
    constant_row("lambda", &c.lambda_hat);
    constant_row("alpha1", &c.alpha1_hat);
    constant_row("c2", &c.c2_hat);
    constant_row("c", &c.c_hat);
    constant_row("kappa", &c.kappa_hat);
    constant_row("diameter", &c.diam_hat);
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

fn run_suite(common: &Common) -> Result<FunctionalReport, Failure> {
    let gen = load_generator(&common.generator)?;
    let report = implication_suite(&gen, &suite_options(common))?;
    write_report(common, &report)?;
    Ok(report)
}

pub fn constants(common: &Common) -> Outcome {
    let report = run_suite(common)?;
    print_constants(&report);
    Ok(true)
}

pub fn suite(common: &Common) -> Outcome {
    let report = run_suite(common)?;
    print_constants(&report);
    println!();
    for row in &report.checks {
        let tag = match row.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let residual = row.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        let note = row.note.as_deref().unwrap_or("");
        println!("{tag} {:<32} residual {residual:<10} {note}", row.name);
    }
    Ok(report.all_pass())
}

pub fn w2(common: &Common, from: &str, to: &str) -> Outcome {
    let gen = load_generator(&common.generator)?;
    let a = parse_state(from, &gen)?;
    let b = parse_state(to, &gen)?;
    let r = w2_distance(&gen, &a, &b, &w2_options(common))?;
    println!("W2 = {:.10}", r.value);
    println!("stationarity {:.3e} after {} iterations", r.stationarity, r.iterations);
    if let Some(levels) = &r.regularized {
        for (eps, v) in levels {
            println!("regularised at {eps:.0e}: {v:.10}");
        }
    }
    if let Some(w) = &r.warning {
        println!("warning: {w}");
    }
    if let Some(p) = &common.json_out {
        write_file(p, &r.path.to_json())?;
    }
    if let Some(p) = &common.csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
        w.write_record(["iteration", "energy"]).map_err(csv_err)?;
        for (i, e) in r.energy_history.iter().enumerate() {
            w.write_record([i.to_string(), format!("{e:.17e}")]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
        std::fs::File::create(p)
            .and_then(|mut f| f.write_all(&bytes))
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(true)
}
