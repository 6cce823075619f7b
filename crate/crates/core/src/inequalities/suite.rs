use serde::Serialize;

use super::*;
use crate::curvature::{
    displacement_convexity_check, estimate_ricci_lower_bound, evi_check, gradient_estimate_check,
    reverse_poincare_check, HessianSampleFile, RicciOptions,
};
use crate::generator::{to_rows, MatrixRows};
use crate::operator::{random_traceless_hermitian, CMat};
use crate::transport::diameter_estimate;

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub n_random: usize,
    pub n_pure: usize,
    pub w2: W2Options,
    pub ricci: RicciOptions,
    pub mlsi: MlsiOptions,
    pub diameter_pairs: usize,
    /// A diameter known to bound every distance, if available.
    pub certified_diameter: Option<f64>,
    /// Use this curvature instead of estimating it.
    pub kappa_override: Option<f64>,
    pub diameter_mlsi_threshold: f64,
    pub t_grid: Vec<f64>,
    pub evi_step: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            n_random: 50,
            n_pure: 10,
            w2: W2Options::default(),
            ricci: RicciOptions::default(),
            mlsi: MlsiOptions::default(),
            diameter_pairs: 8,
            certified_diameter: None,
            kappa_override: None,
            diameter_mlsi_threshold: DIAMETER_MLSI_THRESHOLD,
            t_grid: vec![0.05, 0.2, 0.5, 1.0],
            evi_step: 1e-2,
        }
    }
}

/// Below this many random states the report carries a warning.
const LOW_SAMPLE_COUNT: usize = 10;
const LOCAL_TOL: f64 = 1e-6;
const REVERSE_POINCARE_TIME: f64 = 0.5;
const CONTRACTION_TIME: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct Constant {
    pub value: f64,
    pub direction: Direction,
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Constants {
    pub lambda_hat: Constant,
    pub alpha1_hat: Constant,
    pub c2_hat: Constant,
    pub c_hat: Constant,
    pub kappa_hat: Constant,
    pub diam_hat: Constant,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub source: &'static str,
    /// `None` when the check does not apply.
    pub pass: Option<bool>,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub direction: &'static str,
    pub note: Option<String>,
    pub witness: Option<serde_json::Value>,
}

impl CheckRow {
    fn new(name: &'static str, source: &'static str, direction: &'static str) -> Self {
        Self {
            name,
            source,
            pass: None,
            residual: None,
            tolerance: None,
            direction,
            note: None,
            witness: None,
        }
    }

    fn measured(mut self, residual: f64, tolerance: f64) -> Self {
        self.pass = Some(residual <= tolerance);
        self.residual = Some(residual);
        self.tolerance = Some(tolerance);
        self
    }

    fn skipped(mut self, why: impl Into<String>) -> Self {
        self.pass = None;
        self.note = Some(why.into());
        self
    }

    fn with_witness(mut self, rows: MatrixRows) -> Self {
        self.witness = serde_json::to_value(rows).ok();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Seeds {
    pub base: u64,
    pub battery: u64,
    pub curvature: u64,
    pub diameter: u64,
    pub potentials: u64,
}

impl Seeds {
    fn derive(base: u64) -> Self {
        Self {
            base,
            battery: base,
            curvature: base.wrapping_add(1),
            diameter: base.wrapping_add(2),
            potentials: base.wrapping_add(3),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    /// Target relative suboptimality of every distance.
    pub w2_tol: f64,
    /// Largest stationarity residual reported by the distance solver.
    pub w2_max_stationarity: f64,
    pub local: f64,
    pub evi_step: f64,
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub path_segments: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub generator: String,
    pub constants: Constants,
    pub checks: Vec<CheckRow>,
    pub seeds: Seeds,
    pub tolerances: Tolerances,
    pub assumptions: Vec<&'static str>,
    pub warnings: Vec<String>,
    pub curvature_witness: HessianSampleFile,
    pub mlsi_witness: MatrixRows,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    source: &'a str,
    pass: &'a str,
    residual: Option<f64>,
    tolerance: Option<f64>,
    direction: &'a str,
    note: &'a str,
}

impl FunctionalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            let pass = match c.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "skipped",
            };
            w.serialize(CsvRow {
                name: c.name,
                source: c.source,
                pass,
                residual: c.residual,
                tolerance: c.tolerance,
                direction: c.direction,
                note: c.note.as_deref().unwrap_or(""),
            })
            .map_err(|e| QmsError::InternalError(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| QmsError::InternalError(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| QmsError::InternalError(e.to_string()))
    }

    /// No applicable check failed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| c.pass == Some(false))
    }
}

struct Consequences {
    gradient: f64,
    reverse: f64,
    evi: f64,
    evi_tol: f64,
    convexity: f64,
    convexity_tol: f64,
    contraction: f64,
    pair_w2: f64,
}

fn consequences(
    gen: &DetailedBalanceGenerator,
    kappa: f64,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    u: &CMat,
    w_sigma: f64,
    opts: &SuiteOptions,
) -> Result<Consequences> {
    let tol = opts.w2.tol;
    let gradient = gradient_estimate_check(gen, kappa, rho, u, &opts.t_grid)?;
    let rp = reverse_poincare_check(gen, kappa, rho, u, REVERSE_POINCARE_TIME)?;
    let reverse = if rp.rhs > 0.0 {
        (rp.rhs - rp.lhs) / rp.rhs
    } else {
        rp.rhs - rp.lhs
    };
    let evi = evi_check(gen, kappa, rho, omega, opts.evi_step, &opts.w2)?;
    let pair = w2_distance(gen, rho, omega, &opts.w2)?;
    let conv = displacement_convexity_check(gen, kappa, &pair.path)?;
    let scale = 1.0 + entropy_to_sigma(gen, rho) + entropy_to_sigma(gen, omega) + pair.value * pair.value;
    let rho_t = gen.evolve(rho, CONTRACTION_TIME)?;
    let w_t = w2_distance(gen, &rho_t, gen.sigma(), &opts.w2)?.value;
    let contraction = if w_sigma > 0.0 {
        w_t / ((-kappa * CONTRACTION_TIME).exp() * w_sigma) - 1.0
    } else {
        w_t
    };
    Ok(Consequences {
        gradient,
        reverse,
        evi: evi.residual,
        evi_tol: evi.tolerance,
        convexity: conv.worst,
        convexity_tol: 5.0 * tol * scale,
        contraction,
        pair_w2: pair.value,
    })
}

fn max_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> (f64, usize) {
    items.iter().enumerate().fold((f64::NEG_INFINITY, 0), |(m, k), (i, x)| {
        let v = f(x);
        if v > m {
            (v, i)
        } else {
            (m, k)
        }
    })
}

/// Runs every estimator and evaluates the implications between the
/// functional inequalities, the curvature bound and the diameter.
pub fn implication_suite(gen: &DetailedBalanceGenerator, opts: &SuiteOptions) -> Result<FunctionalReport> {
    gen.require_primitive()?;
    if opts.n_random == 0 {
        return Err(QmsError::InvalidInput("need at least one random sample".into()));
    }
    let d = gen.dim();
    let tol = opts.w2.tol;
    let seeds = Seeds::derive(opts.seed);
    let mut warnings = Vec::new();
    if opts.n_random < LOW_SAMPLE_COUNT {
        warnings.push(format!(
            "low sample count: {} random states, constants are crude",
            opts.n_random
        ));
    }

    let battery = Battery::new(d, opts.n_random, opts.n_pure, seeds.battery)?;
    let gap = spectral_gap(gen)?;
    let samples = transport_samples(gen, &battery.states, &opts.w2)?;
    for s in &samples {
        if let Some(w) = &s.warning {
            warnings.push(format!("distance to sigma: {w}"));
        }
    }

    let ricci = estimate_ricci_lower_bound(gen, seeds.curvature, &opts.ricci)?;
    if let Some(w) = &ricci.warning {
        warnings.push(format!("curvature search: {w}"));
    }
    let (kappa, kappa_direction, kappa_source) = match opts.kappa_override {
        Some(k) => (k, Direction::Estimate, "user override"),
        None => (ricci.kappa_hat, Direction::UpperBound, "estimate_ricci_lower_bound"),
    };

    let local = local_constants(gen)?;
    let mlsi = mlsi_constant_estimate(gen, &battery.states, &opts.mlsi)?;
    let (alpha, mlsi_witness) = if local.alpha1 < mlsi.alpha1_hat {
        (local.alpha1, gen.sigma().clone())
    } else {
        (mlsi.alpha1_hat, mlsi.witness.clone())
    };
    let tc2 = tc2_constant_estimate(&samples);
    let c2_hat = tc2.c2_hat.max(local.c2);
    let c2_witness = tc2.witness.filter(|_| tc2.c2_hat >= local.c2);
    let c_hat = mlsi_tc2_constant_estimate(&samples).max(local.c);
    let diam = diameter_estimate(gen, opts.diameter_pairs, seeds.diameter, &opts.w2)?;

    let constants = Constants {
        lambda_hat: Constant {
            value: gap.value,
            direction: Direction::Exact,
            source: "spectral_gap",
        },
        alpha1_hat: Constant {
            value: alpha,
            direction: Direction::UpperBound,
            source: "mlsi_constant_estimate, local_constants",
        },
        c2_hat: Constant {
            value: c2_hat,
            direction: Direction::Estimate,
            source: "tc2_constant_estimate, local_constants",
        },
        c_hat: Constant {
            value: c_hat,
            direction: Direction::Estimate,
            source: "mlsi_tc2_constant_estimate, local_constants",
        },
        kappa_hat: Constant {
            value: kappa,
            direction: kappa_direction,
            source: kappa_source,
        },
        diam_hat: Constant {
            value: diam.value,
            direction: Direction::LowerBound,
            source: "diameter_estimate",
        },
    };

    let mut checks = Vec::new();

    checks.push(
        CheckRow::new(
            "MLSI => PI",
            "spectral_gap",
            "alpha1_hat is an upper bound; lambda >= alpha assumed with constant 1",
        )
        .measured(alpha * (1.0 - 5.0 * tol) - gap.value, 0.0),
    );

    let mut row = CheckRow::new(
        "MLSI => TC2",
        "tc2_constant_estimate",
        "c2_hat uses distance upper bounds",
    );
    row = if alpha > 0.0 {
        row.measured(c2_hat - (1.0 + 5.0 * tol) / alpha, 0.0)
    } else {
        row.skipped("alpha1_hat is not positive")
    };
    if let Some(k) = c2_witness {
        row = row.with_witness(to_rows(samples[k].rho.matrix()));
    }
    checks.push(row);

    let row = CheckRow::new(
        "MLSI => MLSI+TC2",
        "mlsi_tc2_check",
        "distance upper bounds on the left side",
    );
    checks.push(if alpha > 0.0 {
        let rate = mlsi_tc2_check(1.0 / alpha, &samples, tol)?;
        row.measured(1.0 - rate, 0.0)
    } else {
        row.skipped("alpha1_hat is not positive")
    });

    let hwi = hwi_check(kappa, &samples, tol)?;
    let mut row = CheckRow::new(
        "Ric => HWI",
        "hwi_check",
        "distance upper bounds; shrunk distances recorded in note",
    )
    .measured(hwi.worst, 5.0 * tol);
    row.note = Some(format!(
        "worst with distances shrunk by (1 - tol): {:.6e}",
        hwi.worst_shrunk
    ));
    if let Some(k) = hwi.witness {
        row = row.with_witness(to_rows(samples[k].rho.matrix()));
    }
    checks.push(row);

    let row = CheckRow::new("TC2 + HWI => MLSI", "interpolation_alpha", "compares two estimates");
    checks.push(match interpolation_alpha(kappa, c2_hat) {
        Ok(a) => row.measured(a * (1.0 - 5.0 * tol) - alpha, 0.0),
        Err(e) => row.skipped(e.to_string()),
    });

    let row = CheckRow::new("Ric + MLSI+TC2 => MLSI", "mlsi_from_lst2", "compares two estimates");
    let kappa_lst2 = if c_hat > 0.0 && kappa > 1.0 / c_hat && kappa <= (1.0 + tol) / c_hat {
        1.0 / c_hat
    } else {
        kappa
    };
    checks.push(match mlsi_from_lst2(kappa_lst2, c_hat) {
        Ok(a) => row.measured(a * (1.0 - 5.0 * tol) - alpha, 0.0),
        Err(e) => row.skipped(e.to_string()),
    });

    let row = CheckRow::new(
        "Ric > 0 => MLSI",
        "mlsi_constant_estimate",
        "both constants are upper bounds",
    );
    checks.push(if kappa > 0.0 {
        row.measured(kappa - alpha, 2.0 * tol)
    } else {
        row.skipped("curvature estimate is not positive")
    });

    let row = CheckRow::new(
        "Ric >= 0 + diam => PI",
        "diameter_poincare_check",
        "diameter lower bound makes the bound optimistic",
    );
    checks.push(
        match diameter_poincare_check(gen, kappa, diam.value, opts.certified_diameter, tol) {
            Ok(r) => {
                let mut row = row.measured(r.bound * (1.0 - 1e-6) - r.lambda_hat, 0.0);
                if let (Some(b), Some(ok)) = (r.certified_bound, r.certified_ok) {
                    row.note = Some(format!(
                        "certified diameter bound {b:.6e}: {}",
                        if ok { "pass" } else { "fail" }
                    ));
                    row.pass = row.pass.map(|p| p && ok);
                }
                row
            }
            Err(e) => row.skipped(e.to_string()),
        },
    );

    let row = CheckRow::new(
        "unital + diam => MLSI",
        "diameter_mlsi_check",
        "trend check, universal constant unknown",
    );
    checks.push(
        match diameter_mlsi_check(gen, kappa, alpha, diam.value, opts.diameter_mlsi_threshold, tol) {
            Ok(r) => {
                let mut row = row.measured(r.threshold - r.product, 0.0);
                row.note = Some(format!("alpha1_hat * diam_hat^2 = {:.6e}", r.product));
                row
            }
            Err(e) => row.skipped(e.to_string()),
        },
    );

    let randoms = battery.random_states();
    let n = randoms.len();
    let mut rng = seeded_rng(seeds.potentials);
    let potentials: Vec<CMat> = (0..n).map(|_| random_traceless_hermitian(d, &mut rng)).collect();
    let idx: Vec<usize> = (0..n).collect();
    let conseq: Vec<Consequences> = crate::par::map(&idx, |&i| {
        consequences(
            gen,
            kappa,
            &randoms[i],
            &randoms[(i + 1) % n],
            &potentials[i],
            samples[i].w2,
            opts,
        )
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let (worst, k) = max_by(&conseq, |c| c.gradient);
    checks.push(
        CheckRow::new(
            "Ric => gradient estimate",
            "gradient_estimate_check",
            "exact evolution, no distances",
        )
        .measured(worst, LOCAL_TOL)
        .with_witness(to_rows(randoms[k].matrix())),
    );
    let (worst, k) = max_by(&conseq, |c| c.reverse);
    checks.push(
        CheckRow::new(
            "Ric => reverse Poincare",
            "reverse_poincare_check",
            "exact evolution, no distances",
        )
        .measured(worst, LOCAL_TOL)
        .with_witness(to_rows(randoms[k].matrix())),
    );
    let (_, k) = max_by(&conseq, |c| c.evi - c.evi_tol);
    checks.push(
        CheckRow::new("Ric => EVI", "evi_check", "forward difference of distance upper bounds")
            .measured(conseq[k].evi, conseq[k].evi_tol)
            .with_witness(to_rows(randoms[k].matrix())),
    );
    let (_, k) = max_by(&conseq, |c| c.convexity - c.convexity_tol);
    checks.push(
        CheckRow::new(
            "Ric => displacement convexity",
            "displacement_convexity_check",
            "near-geodesic discrete paths",
        )
        .measured(conseq[k].convexity, conseq[k].convexity_tol)
        .with_witness(to_rows(randoms[k].matrix())),
    );
    let (worst, k) = max_by(&conseq, |c| c.contraction);
    checks.push(
        CheckRow::new(
            "Ric => W2 contraction",
            "w2_distance",
            "ratio of two distance upper bounds",
        )
        .measured(worst, 5.0 * tol)
        .with_witness(to_rows(randoms[k].matrix())),
    );

    let row = CheckRow::new(
        "Bonnet-Myers",
        "bonnet_myers_check",
        "distance upper bounds on the left side",
    );
    let mut pairs: Vec<(&DensityMatrix, &DensityMatrix, f64)> = (0..n)
        .map(|i| (&randoms[i], &randoms[(i + 1) % n], conseq[i].pair_w2))
        .collect();
    pairs.push((&diam.pair.0, &diam.pair.1, diam.value));
    checks.push(match bonnet_myers_check(gen, kappa, &pairs, tol) {
        Ok(r) => row.measured(r.worst, 5.0 * tol),
        Err(e) => row.skipped(e.to_string()),
    });

    let w2_max_stationarity = samples.iter().map(|s| s.stationarity).fold(0.0, f64::max);
    Ok(FunctionalReport {
        generator: gen.spec_hash(),
        constants,
        checks,
        seeds,
        tolerances: Tolerances {
            w2_tol: tol,
            w2_max_stationarity,
            local: LOCAL_TOL,
            evi_step: opts.evi_step,
            t_grid: opts.t_grid.clone(),
            samples: battery.states.len(),
            path_segments: opts.w2.segments,
        },
        assumptions: vec![
            "MLSI => PI is checked with proportionality constant 1",
            "the unital diameter MLSI row is a trend check against a fixed threshold",
            "distances are lengths of optimised discrete paths and bound the true distance from above up to discretisation",
        ],
        warnings,
        curvature_witness: ricci.witness.to_file(),
        mlsi_witness: to_rows(mlsi_witness.matrix()),
    })
}
