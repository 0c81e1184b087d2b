//! `rsavg`: command-line driver for the central-value library.
//!
//! Subcommands: lvalue, average, expsum, weierstrass, padic, accept.
//! Exit codes: 0 success, 2 validation / bad input, 3 numerical
//! non-convergence, 4 acceptance failure.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rsavg_core::{
    arith::{build_field, picard_group},
    asymptotic_report,
    characters::{dirichlet_family, galois_orbits, ring_class_family},
    central_value_afe, direct_average, exact_formula_average, galois_average, load_newform,
    primitive_average, render_report, run_all,
    expsums::{
        crt_gauss_factorization, kloosterman4_all, salie_evaluate, tau_fourth_power_sum,
        ExpSumContext, SalieOutcome,
    },
    builtin_11a,
    padic::{
        specialize, weierstrass_prep, zero_count_bound, CyclotomicModel, DVRSeries,
    },
    AverageMode, AverageReport, CutoffSpec, Error as CoreError, HeckeCharacterW, NewformData,
    Profile,
};
use std::collections::HashMap;
use std::io::Read;

#[derive(Parser)]
#[command(name = "rsavg", version, about = "Rankin-Selberg central values for ring-class by cyclotomic twists: exact averages, exponential sums, and p-adic nonvanishing machinery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// shared family / cutoff configuration; a key=value config file can supply
/// any of these, explicit flags win
#[derive(Args, Clone)]
struct RunConfig {
    /// plain-text config file with key=value lines (flags override)
    #[arg(long)]
    config: Option<String>,
    /// newform coefficient file (default: built-in level-11 weight-2 form)
    #[arg(long)]
    newform: Option<String>,
    /// fundamental discriminant of the imaginary quadratic field
    #[arg(long, allow_hyphen_values = true)]
    disc: Option<i64>,
    /// odd prime, inert in K, coprime to level and discriminant
    #[arg(long)]
    p: Option<i64>,
    /// ring-class conductor exponent
    #[arg(long)]
    alpha: Option<u32>,
    /// cyclotomic conductor exponent
    #[arg(long)]
    beta: Option<u32>,
    /// cutoff test profile: one | cosh:A | expsq:A
    #[arg(long)]
    profile: Option<String>,
    /// quadrature contour height
    #[arg(long)]
    contour_height: Option<f64>,
    /// quadrature step
    #[arg(long)]
    step: Option<f64>,
    /// conductor model multiplier M
    #[arg(long)]
    conductor_m: Option<f64>,
    /// seed for randomized demonstrations
    #[arg(long)]
    seed: Option<u64>,
}

struct Resolved {
    nf: NewformData,
    disc: i64,
    p: i64,
    alpha: u32,
    beta: u32,
    spec: CutoffSpec,
    #[allow(dead_code)]
    seed: u64,
}

impl RunConfig {
    fn resolve(&self, coeff_bound: i64) -> Result<Resolved, CoreError> {
        let mut file: HashMap<String, String> = HashMap::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(CoreError::Io)?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    CoreError::Validation(format!("{path}:{}: expected key=value", lineno + 1))
                })?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        fn pick<T: std::str::FromStr>(
            flag: &Option<T>,
            file: &HashMap<String, String>,
            key: &str,
            default: T,
        ) -> Result<T, CoreError>
        where
            T: Clone,
        {
            if let Some(v) = flag {
                return Ok(v.clone());
            }
            match file.get(key) {
                Some(s) => s.parse::<T>().map_err(|_| {
                    CoreError::Validation(format!("config key {key}: cannot parse {s:?}"))
                }),
                None => Ok(default),
            }
        }
        let disc = pick(&self.disc, &file, "disc", -7)?;
        let p = pick(&self.p, &file, "p", 3)?;
        let alpha = pick(&self.alpha, &file, "alpha", 0)?;
        let beta = pick(&self.beta, &file, "beta", 0)?;
        let seed = pick(&self.seed, &file, "seed", 0)?;
        let profile_s = pick(&self.profile, &file, "profile", "one".to_string())?;
        let profile = parse_profile(&profile_s)?;
        let mut spec = CutoffSpec { profile, ..CutoffSpec::default() };
        spec.contour_height = pick(&self.contour_height, &file, "contour_height", spec.contour_height)?;
        spec.step = pick(&self.step, &file, "step", spec.step)?;
        spec.conductor_model_m = pick(&self.conductor_m, &file, "conductor_m", spec.conductor_model_m)?;
        if spec.step <= 0.0 || spec.contour_height <= 0.0 || spec.conductor_model_m <= 0.0 {
            return Err(CoreError::Validation("cutoff parameters must be positive".into()));
        }
        let newform_path = match &self.newform {
            Some(s) => Some(s.clone()),
            None => file.get("newform").cloned(),
        };
        let nf = match newform_path {
            Some(path) => load_newform(&path, coeff_bound)?,
            None => builtin_11a(coeff_bound),
        };
        Ok(Resolved { nf, disc, p, alpha, beta, spec, seed })
    }
}

fn parse_profile(s: &str) -> Result<Profile, CoreError> {
    if s == "one" {
        return Ok(Profile::One);
    }
    if let Some(a) = s.strip_prefix("cosh:") {
        let a: f64 = a
            .parse()
            .map_err(|_| CoreError::Validation(format!("bad profile parameter in {s:?}")))?;
        return Ok(Profile::Cosh(a));
    }
    if let Some(a) = s.strip_prefix("expsq:") {
        let a: f64 = a
            .parse()
            .map_err(|_| CoreError::Validation(format!("bad profile parameter in {s:?}")))?;
        return Ok(Profile::ExpSq(a));
    }
    Err(CoreError::Validation(format!(
        "unknown profile {s:?} (expected one | cosh:A | expsq:A)"
    )))
}

#[derive(Subcommand)]
enum Command {
    /// Central value of one family member
    Lvalue {
        #[command(flatten)]
        cfg: RunConfig,
        /// index of the ring-class character in the deterministic family order
        #[arg(long, default_value_t = 0)]
        rho_index: usize,
        /// index of the Dirichlet character in the deterministic family order
        #[arg(long, default_value_t = 0)]
        chi_index: usize,
    },
    /// Family averages: direct, exact-formula, primitive, Galois, asymptotic
    Average {
        #[command(flatten)]
        cfg: RunConfig,
        /// single | double | primitive | galois | asymptotic
        #[arg(long, default_value = "double")]
        mode: String,
        /// ring-class character index (single / galois modes)
        #[arg(long, default_value_t = 0)]
        rho_index: usize,
        /// Dirichlet character index selecting the Galois orbit
        #[arg(long, default_value_t = 0)]
        chi_index: usize,
        /// largest beta of the ascending range (asymptotic mode)
        #[arg(long)]
        beta_max: Option<u32>,
        /// cut for the main-term partial sums (asymptotic mode)
        #[arg(long, default_value_t = 2_000_000)]
        main_term_cut: i64,
        /// write the flat CSV here instead of stdout
        #[arg(long)]
        csv: Option<String>,
    },
    /// Exponential-sum identity tables
    Expsum {
        #[command(subcommand)]
        sub: ExpsumCmd,
    },
    /// Weierstrass preparation of a series given as: p Nprec Ntrunc c0 c1 ...
    Weierstrass {
        /// series data; read from stdin when omitted
        data: Vec<u64>,
    },
    /// p-adic pipeline demonstrations
    Padic {
        #[command(subcommand)]
        sub: PadicCmd,
    },
    /// Run the acceptance suite and print the pass/fail table
    Accept,
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// verify the Salie / hyper-Kloosterman / Gauss-sum identities
    Verify {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        beta: u32,
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },
}

#[derive(Subcommand)]
enum PadicCmd {
    /// planted-zero pipeline: preparation, degree bound, vanishing list
    Demo,
}

fn exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Validation(_) | CoreError::Unsupported(_) | CoreError::Io(_) => 2,
        CoreError::Numerical(_) | CoreError::Precision(_) => 3,
    }
}

fn main() {
    if let Ok(v) = std::env::var("RSAVG_WORKERS") {
        if v.parse::<usize>().map(|n| n >= 1) != Ok(true) {
            eprintln!("error: RSAVG_WORKERS must be a positive integer");
            std::process::exit(2);
        }
        // evaluation is single-threaded in this build; the override is
        // accepted for config compatibility
    }
    let cli = Cli::parse();
    let status = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(status);
}

fn c(z: Complex64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

fn run(cli: Cli) -> Result<i32, CoreError> {
    match cli.command {
        Command::Lvalue { cfg, rho_index, chi_index } => {
            let r = cfg.resolve(800_000)?;
            let k = build_field(r.disc)?;
            let order = picard_group(&k, r.p, r.alpha)?;
            let rhos = ring_class_family(&k, &order)?;
            let chis = dirichlet_family(r.p, r.beta)?;
            let rho = rhos
                .get(rho_index)
                .ok_or_else(|| {
                    CoreError::Validation(format!(
                        "rho index {rho_index} out of range (family size {})",
                        rhos.len()
                    ))
                })?
                .clone();
            let chi = chis
                .get(chi_index)
                .ok_or_else(|| {
                    CoreError::Validation(format!(
                        "chi index {chi_index} out of range (family size {})",
                        chis.len()
                    ))
                })?
                .clone();
            let w = HeckeCharacterW { rho, chi };
            println!("member={}", w.label(r.alpha));
            let cv = central_value_afe(&r.nf, &w, &k, &order, r.p, &r.spec)?;
            println!("value={}", c(cv.value));
            println!("root_number={}", c(cv.epsilon));
            println!("root_number_source={:?}", cv.eps_source);
            println!("conductor_scale_x={:.12e}", cv.scale_x);
            println!("first_sum={}", c(cv.first_sum));
            println!("second_sum={}", c(cv.second_sum));
            println!("fe_flatness_gap={:.3e}", cv.eps_quality);
            Ok(0)
        }
        Command::Average { cfg, mode, rho_index, chi_index, beta_max, main_term_cut, csv } => {
            let r = cfg.resolve(800_000)?;
            let k = build_field(r.disc)?;
            let mut rows: Vec<AverageReport> = Vec::new();
            match mode.as_str() {
                "double" | "single" => {
                    let am = if mode == "double" {
                        AverageMode::Double
                    } else {
                        let order = picard_group(&k, r.p, r.alpha)?;
                        let rhos = ring_class_family(&k, &order)?;
                        let rho = rhos
                            .get(rho_index)
                            .ok_or_else(|| {
                                CoreError::Validation(format!(
                                    "rho index {rho_index} out of range (family size {})",
                                    rhos.len()
                                ))
                            })?
                            .clone();
                        AverageMode::Single(rho)
                    };
                    let rep = match exact_formula_average(
                        &r.nf, &k, r.p, r.alpha, r.beta, &r.spec, &am,
                    ) {
                        Ok(rep) => rep,
                        Err(CoreError::Unsupported(_)) => {
                            // formula route unavailable: direct only
                            direct_average(&r.nf, &k, r.p, r.alpha, r.beta, &r.spec, &am)?
                        }
                        Err(e) => return Err(e),
                    };
                    print_average_record(&rep);
                    rows.push(rep);
                }
                "primitive" => {
                    let rep = primitive_average(&r.nf, &k, r.p, r.alpha, r.beta, &r.spec)?;
                    println!("record=primitive disc={} p={} alpha={} beta={}", r.disc, r.p, r.alpha, r.beta);
                    println!("p_size={}", rep.p_size);
                    println!("value={}", c(rep.value));
                    println!("direct_primitive={}", c(rep.direct_primitive));
                    println!("inversion_gap={:.3e}", (rep.value - rep.direct_primitive).norm());
                    for (x, y, mu, fam, sum) in &rep.inversion_terms {
                        println!("term alpha={x} beta={y} mu={mu} family={fam} total={}", c(*sum));
                    }
                }
                "galois" => {
                    let order = picard_group(&k, r.p, r.alpha)?;
                    let rhos = ring_class_family(&k, &order)?;
                    let rho = rhos
                        .get(rho_index)
                        .ok_or_else(|| CoreError::Validation("rho index out of range".into()))?;
                    let chis = dirichlet_family(r.p, r.beta)?;
                    if chi_index >= chis.len() {
                        return Err(CoreError::Validation("chi index out of range".into()));
                    }
                    let orbits = galois_orbits(&chis);
                    let orbit: Vec<_> = orbits
                        .iter()
                        .find(|o| o.contains(&chi_index))
                        .expect("every character lies in an orbit")
                        .iter()
                        .map(|&i| chis[i].clone())
                        .collect();
                    let g = galois_average(&r.nf, &k, r.p, r.alpha, &r.spec, rho, &orbit)?;
                    println!(
                        "record=galois disc={} p={} alpha={} beta={} orbit_size={}",
                        r.disc, r.p, r.alpha, r.beta, orbit.len()
                    );
                    println!("orbit_average={}", c(g));
                    println!("nonzero_certifies_members={}", g.norm() > 1e-8);
                }
                "asymptotic" => {
                    let top = beta_max.unwrap_or(r.beta.max(1));
                    if top < r.beta {
                        return Err(CoreError::Validation("beta_max must be >= beta".into()));
                    }
                    let betas: Vec<u32> = (r.beta..=top).collect();
                    let reps = asymptotic_report(
                        &r.nf, &k, r.p, &betas, r.alpha, &r.spec, main_term_cut,
                    )?;
                    for rep in reps {
                        print_average_record(&rep);
                        rows.push(rep);
                    }
                }
                other => {
                    return Err(CoreError::Validation(format!(
                        "unknown mode {other:?} (expected single|double|primitive|galois|asymptotic)"
                    )))
                }
            }
            if !rows.is_empty() {
                let csv_text = average_csv(&rows);
                match csv {
                    Some(path) => std::fs::write(&path, csv_text).map_err(CoreError::Io)?,
                    None => print!("{csv_text}"),
                }
            }
            Ok(0)
        }
        Command::Expsum { sub: ExpsumCmd::Verify { p, beta, disc } } => {
            let k = build_field(disc)?;
            let ctx = ExpSumContext::new(p, beta)?;
            let q = ctx.q;
            let k4 = kloosterman4_all(&ctx);
            println!("identity lhs rhs |difference|");
            let mut worst = 0.0f64;
            for j in 1..q {
                if j % p == 0 {
                    continue;
                }
                let rhs = k4[j as usize];
                let (name, lhs) = match salie_evaluate(j, &ctx)? {
                    SalieOutcome::Value(v) => (format!("salie_J={j}"), v),
                    SalieOutcome::NoQuarticRoot => {
                        (format!("salie_J={j}_no_quartic_root"), Complex64::new(0.0, 0.0))
                    }
                    SalieOutcome::NotCertified => {
                        println!("salie_J={j} not_certified - -");
                        continue;
                    }
                };
                let d = (lhs - rhs).norm();
                worst = worst.max(d);
                println!("{name} {} {} {d:.3e}", c(lhs), c(rhs), d = d);
            }
            let (l1, r1) = crt_gauss_factorization(&k, 1, &ctx)?;
            println!("crt_gauss_factorization {} {} {:.3e}", c(l1), c(r1), (l1 - r1).norm());
            worst = worst.max((l1 - r1).norm());
            let (l4, r4) = tau_fourth_power_sum(p, beta, &k)?;
            println!("tau_fourth_power {} {} {:.3e}", c(l4), c(r4), (l4 - r4).norm());
            worst = worst.max((l4 - r4).norm() / r4.norm().max(1.0));
            println!("max_difference={worst:.3e}");
            if worst > 1e-8 {
                return Err(CoreError::Numerical(format!(
                    "identity residual {worst:.3e} exceeds 1e-8"
                )));
            }
            Ok(0)
        }
        Command::Weierstrass { data } => {
            let data = if data.is_empty() {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(CoreError::Io)?;
                s.split_whitespace()
                    .map(|t| {
                        t.parse::<u64>().map_err(|_| {
                            CoreError::Validation(format!("bad series token {t:?}"))
                        })
                    })
                    .collect::<Result<Vec<u64>, _>>()?
            } else {
                data
            };
            if data.len() < 4 {
                return Err(CoreError::Validation(
                    "need: p Nprec Ntrunc c0 [c1 ...]".into(),
                ));
            }
            let p = data[0] as i64;
            let nprec = data[1] as u32;
            let ntrunc = data[2] as usize;
            let f = DVRSeries::new(p, nprec, ntrunc, data[3..].to_vec())?;
            let w = weierstrass_prep(&f)?;
            println!("mu={}", w.mu);
            println!("wdeg={}", w.wdeg);
            let gc: Vec<String> =
                w.g.coeffs[..=w.wdeg].iter().map(|x| x.to_string()).collect();
            println!("g={}", gc.join(" "));
            let uc: Vec<String> = w.u.coeffs.iter().map(|x| x.to_string()).collect();
            println!("u={}", uc.join(" "));
            let ok = w.reconstruct(nprec)? == f;
            println!("reconstruction_exact={ok}");
            if !ok {
                return Err(CoreError::Numerical("reconstruction mismatch".into()));
            }
            Ok(0)
        }
        Command::Padic { sub: PadicCmd::Demo } => {
            // plant the two conductor-3 zeros via Phi_3(1+T) times a unit,
            // then recover them through preparation and specialization
            let p = 3i64;
            let phi = DVRSeries::new(p, 9, 12, vec![3, 3, 1])?;
            let unit = DVRSeries::new(p, 9, 12, vec![1, 1, 0, 3])?;
            let f = phi.mul(&unit)?;
            println!("series={:?}", f.coeffs);
            let w = weierstrass_prep(&f)?;
            println!("mu={} wdeg={}", w.mu, w.wdeg);
            let zc = zero_count_bound(&f, 4)?;
            println!("vanishing_characters={:?}", zc.vanishing);
            println!("indeterminate={:?}", zc.indeterminate);
            println!("vanish_count_le_wdeg={}", zc.vanishing.len() <= zc.wdeg);
            // show a nonzero specialization for contrast
            let m2 = CyclotomicModel::new(p, 9, 2)?;
            let v = specialize(&f, 2, 1)?;
            println!("conductor_9_specialization_zero={}", m2.is_zero(&v));
            Ok(0)
        }
        Command::Accept => {
            let results = run_all();
            print!("{}", render_report(&results));
            if results.iter().all(|r| r.passed) {
                Ok(0)
            } else {
                Ok(4)
            }
        }
    }
}

fn print_average_record(rep: &AverageReport) {
    println!(
        "record=average disc={} p={} alpha={} beta={} mode={} family_size={}",
        rep.disc, rep.p, rep.alpha, rep.beta, rep.mode, rep.family_size
    );
    println!("direct_value={}", c(rep.direct_value));
    if let Some(v) = rep.d_term {
        println!("d_term={}", c(v));
    }
    if let Some(v) = rep.d_star_term {
        println!("d_star_term={}", c(v));
    }
    if let Some(v) = rep.correction_e {
        println!("correction_e={}", c(v));
    }
    if let Some(v) = rep.correction_e_star {
        println!("correction_e_star={}", c(v));
    }
    if let Some(v) = rep.formula_value {
        println!("formula_value={}", c(v));
    }
    if let Some(v) = rep.difference {
        println!("difference={}", c(v));
    }
    if let Some(v) = rep.rn_identity_gap {
        println!("rn_identity_gap={v:.3e}");
        println!("salie_certified={}", rep.salie_certified);
    }
    if let Some(v) = rep.main_term {
        println!("main_term={}", c(v));
    }
    if let Some(v) = rep.main_term_gap {
        println!("main_term_gap={v:.3e}");
    }
    if let Some(v) = rep.main_term_bound {
        println!("main_term_bound={v:.3e}");
    }
    if let Some(v) = rep.fitted_decay_exponent {
        println!("fitted_decay_exponent={v:.6}");
        println!("theta_reference={:.6}", rep.theta_reference);
    }
}

fn opt_c(v: Option<Complex64>) -> String {
    match v {
        Some(z) => format!("{:.12e},{:.12e}", z.re, z.im),
        None => ",".to_string(),
    }
}

fn opt_f(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.12e}"),
        None => String::new(),
    }
}

fn average_csv(rows: &[AverageReport]) -> String {
    let mut out = String::from(
        "disc,p,alpha,beta,mode,family_size,direct_re,direct_im,d_re,d_im,d_star_re,d_star_im,e_re,e_im,e_star_re,e_star_im,formula_re,formula_im,difference_re,difference_im,rn_identity_gap,salie_certified,main_re,main_im,main_term_gap,main_term_bound,fitted_decay_exponent,theta_reference\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.12e},{:.12e},{},{},{},{},{},{},{},{},{},{:.6}\n",
            r.disc,
            r.p,
            r.alpha,
            r.beta,
            r.mode,
            r.family_size,
            r.direct_value.re,
            r.direct_value.im,
            opt_c(r.d_term),
            opt_c(r.d_star_term),
            opt_c(r.correction_e),
            opt_c(r.correction_e_star),
            opt_c(r.formula_value),
            opt_c(r.difference),
            opt_f(r.rn_identity_gap),
            if r.rn_identity_gap.is_some() {
                r.salie_certified.to_string()
            } else {
                String::new()
            },
            [
                opt_c(r.main_term),
                opt_f(r.main_term_gap),
                opt_f(r.main_term_bound),
                opt_f(r.fitted_decay_exponent),
            ]
            .join(","),
            r.theta_reference
        ));
    }
    out
}
