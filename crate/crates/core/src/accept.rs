//! The acceptance suite: twelve pinned, deterministic criteria covering the
//! exponential-sum closed forms, class-group and Gauss-sum foundations, the
//! AFE engine, the exact average identities, the main-term estimators, and
//! the p-adic pipeline. Criterion 12 reruns the other eleven and demands a
//! byte-identical report.
//!
//! Every criterion is run through a catch-all wrapper: an error anywhere
//! becomes a failed criterion with the error text in the details, never a
//! panic. Details carry no timings or addresses so that reports are
//! reproducible byte for byte; runtime limits are checked and reported as
//! boolean flags only.

use crate::arith::{build_field, dedekind_h, ideal_counts, picard_group};
use crate::averages::{
    exact_formula_average, main_term_two_ways, primitive_average, AverageMode,
};
use crate::characters::{
    all_characters, dirichlet_family, primitivize, product_character, ring_class_family,
    HeckeCharacterW,
};
use crate::cutoff::{CutoffSpec, Profile};
use crate::expsums::{
    gauss_sum, kloosterman4_all, kloosterman4_bruteforce, salie_evaluate, tau_fourth_power_sum,
    crt_gauss_factorization, ExpSumContext, SalieOutcome,
};
use crate::lfunction::central_value_afe;
use crate::lfunction::gl2_twisted_value;
use crate::newform::{builtin_11a, NewformData};
use crate::padic::{
    twist_norm_interpolation_check, weierstrass_prep, zero_count_bound, DVRSeries,
    IwasawaElement,
};
use crate::Result;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub details: String,
}

fn wrap(id: u32, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let (passed, details) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name: name.to_string(), passed, details }
}

/// coefficient supply shared by the analytic criteria (enough for the
/// largest conductor scale exercised below)
fn newform() -> NewformData {
    builtin_11a(740_000)
}

fn crit_1_expsums() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, beta) in [(3i64, 2u32), (3, 3), (5, 2), (5, 3), (7, 2), (7, 3)] {
        let q = p.pow(beta);
        if q > 343 {
            continue;
        }
        let ctx = ExpSumContext::new(p, beta)?;
        let k4 = kloosterman4_all(&ctx);
        let norm = (q as f64).powf(1.5);
        let mut max_gap = 0.0f64;
        let mut no_root = 0usize;
        for j in 1..q {
            if j % p == 0 {
                continue;
            }
            match salie_evaluate(j, &ctx)? {
                SalieOutcome::Value(v) => {
                    let g = (v - k4[j as usize]).norm() / norm;
                    if g > max_gap {
                        max_gap = g;
                    }
                }
                SalieOutcome::NoQuarticRoot => {
                    // closed form says the sum vanishes when J has no 4th root
                    let g = k4[j as usize].norm() / norm;
                    if g > max_gap {
                        max_gap = g;
                    }
                    no_root += 1;
                }
                SalieOutcome::NotCertified => {
                    ok = false;
                }
            }
        }
        // tie the convolution evaluator to the literal quadruple sum on a
        // deterministic sample of admissible J
        let mut brute_gap = 0.0f64;
        for j in [1i64, 2, q / 2, q - 2, q - 1] {
            if j % p == 0 || j <= 0 || j >= q {
                continue;
            }
            let b = kloosterman4_bruteforce(j, &ctx)?;
            brute_gap = brute_gap.max((b - k4[j as usize]).norm() / norm);
        }
        if max_gap > 1e-8 || brute_gap > 1e-8 {
            ok = false;
        }
        lines.push(format!(
            "q={q}: salie-vs-convolution {max_gap:.2e}, convolution-vs-quadruple {brute_gap:.2e}, rootless J {no_root}"
        ));
    }
    // Gauss-sum factorization and fourth-power identities
    for (p, beta) in [(3i64, 2u32), (5, 2)] {
        for disc in [-3i64, -4, -7] {
            if disc % p == 0 {
                lines.push(format!("q={}, disc={disc}: skipped (p | disc)", p.pow(beta)));
                continue;
            }
            let k = build_field(disc)?;
            let ctx = ExpSumContext::new(p, beta)?;
            let (l, r) = crt_gauss_factorization(&k, 1, &ctx)?;
            let g1 = (l - r).norm();
            let (l4, r4) = tau_fourth_power_sum(p, beta, &k)?;
            let g4 = (l4 - r4).norm() / r4.norm().max(1.0);
            if g1 > 1e-8 || g4 > 1e-8 {
                ok = false;
            }
            lines.push(format!(
                "q={}, disc={disc}: factorization {g1:.2e}, fourth-power {g4:.2e}",
                p.pow(beta)
            ));
        }
    }
    let within_time = start.elapsed().as_secs() < 120;
    lines.push(format!("runtime within 2 min: {within_time}"));
    Ok((ok && within_time, lines.join("; ")))
}

fn crit_2_gauss_modulus() -> Result<(bool, String)> {
    let mut max_gap = 0.0f64;
    let mut count = 0usize;
    for q in 2..=343i64 {
        for chi in all_characters(q) {
            if !chi.primitive {
                continue;
            }
            let t = gauss_sum(&chi);
            let gap = (t.norm() - (q as f64).sqrt()).abs();
            max_gap = max_gap.max(gap);
            count += 1;
        }
    }
    Ok((
        max_gap < 1e-10,
        format!("{count} primitive characters, max | |tau| - sqrt(q) | = {max_gap:.2e}"),
    ))
}

fn crit_3_class_groups() -> Result<(bool, String)> {
    let mut ok = true;
    let mut lines = Vec::new();
    for disc in [-3i64, -4, -7, -8, -11] {
        let k = build_field(disc)?;
        for p in [3i64, 5] {
            if disc % p == 0 {
                lines.push(format!("disc={disc}, p={p}: skipped (p | disc)"));
                continue;
            }
            for alpha in 0..=2u32 {
                let order = picard_group(&k, p, alpha)?;
                let h = dedekind_h(&k, p, alpha)?;
                if order.h != h {
                    ok = false;
                    lines.push(format!(
                        "disc={disc}, p={p}, alpha={alpha}: picard {} != dedekind {h}",
                        order.h
                    ));
                    continue;
                }
                // brute-force lattice enumeration per class representative
                let table = ideal_counts(&order, 500);
                let w = order.unit_weight();
                let mut bad = 0usize;
                for (cls, form) in order.form_reps.iter().enumerate() {
                    let mut counts = vec![0i64; 501];
                    let xmax = (500.0 * 4.0 * form.c as f64
                        / (4 * form.a * form.c - form.b * form.b) as f64)
                        .sqrt() as i64
                        + 2;
                    let ymax = (500.0 * 4.0 * form.a as f64
                        / (4 * form.a * form.c - form.b * form.b) as f64)
                        .sqrt() as i64
                        + 2;
                    for x in -xmax..=xmax {
                        for y in -ymax..=ymax {
                            let v = form.eval(x, y);
                            if (1..=500).contains(&v) {
                                counts[v as usize] += 1;
                            }
                        }
                    }
                    for n in 1..=500i64 {
                        if counts[n as usize] % w != 0
                            || counts[n as usize] / w != table.r(cls, n)
                        {
                            bad += 1;
                        }
                    }
                }
                if bad > 0 {
                    ok = false;
                    lines.push(format!(
                        "disc={disc}, p={p}, alpha={alpha}: {bad} count mismatches"
                    ));
                } else {
                    lines.push(format!("disc={disc}, p={p}, alpha={alpha}: h={h}, counts exact"));
                }
            }
        }
    }
    Ok((ok, lines.join("; ")))
}

fn crit_4_afe_robustness(nf: &NewformData) -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let p = 3i64;
    let order1 = picard_group(&k, p, 1)?;
    let rhos = ring_class_family(&k, &order1)?;
    let chis = dirichlet_family(p, 2)?;
    let specs: Vec<CutoffSpec> = [
        (Profile::One, 30.0),
        (Profile::One, 38.0),
        (Profile::Cosh(0.5), 30.0),
        (Profile::Cosh(0.5), 38.0),
    ]
    .into_iter()
    .map(|(profile, h)| CutoffSpec { profile, contour_height: h, ..CutoffSpec::default() })
    .collect();
    let mut max_rel = 0.0f64;
    let mut members = 0usize;
    for rho in &rhos {
        for chi in &chis {
            let w = HeckeCharacterW { rho: rho.clone(), chi: chi.clone() };
            let mut vals = Vec::new();
            for spec in &specs {
                vals.push(central_value_afe(nf, &w, &k, &order1, p, spec)?.value);
            }
            let scale = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max).max(1.0);
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    max_rel = max_rel.max((vals[i] - vals[j]).norm() / scale);
                }
            }
            members += 1;
        }
    }
    Ok((
        max_rel < 1e-6,
        format!(
            "{members} members x {} cutoff configurations, max relative spread {max_rel:.2e}",
            specs.len()
        ),
    ))
}

fn crit_5_artin_factorization(nf: &NewformData) -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let p = 3i64;
    let spec = CutoffSpec::default();
    let order0 = picard_group(&k, p, 0)?;
    let rho0 = ring_class_family(&k, &order0)?.remove(0);
    let mut max_gap = 0.0f64;
    let mut count = 0usize;
    for beta in 1..=2u32 {
        for chi in dirichlet_family(p, beta)? {
            if !chi.primitive {
                continue;
            }
            let w = HeckeCharacterW { rho: rho0.clone(), chi: chi.clone() };
            let lhs = central_value_afe(nf, &w, &k, &order0, p, &spec)?.value;
            let chip = primitivize(&chi);
            let eta = crate::characters::eta_character(&k);
            let t1 = gl2_twisted_value(nf, &chip, &spec)?.value;
            let t2 = gl2_twisted_value(nf, &primitivize(&product_character(&eta, &chip)), &spec)?
                .value;
            let gap = (lhs - t1 * t2).norm();
            max_gap = max_gap.max(gap);
            count += 1;
        }
    }
    Ok((
        max_gap <= 1e-5,
        format!("{count} primitive twists, max |L(pi x chi o N) - L(pi, chi) L(pi, eta chi)| = {max_gap:.2e}"),
    ))
}

fn crit_6_average_formula(nf: &NewformData) -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let spec = CutoffSpec::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for (alpha, beta) in [(0u32, 1u32), (0, 2), (1, 1), (1, 2)] {
        let rep = exact_formula_average(nf, &k, 3, alpha, beta, &spec, &AverageMode::Double)?;
        let diff = rep.difference.expect("formula run").norm();
        if diff >= 1e-6 {
            ok = false;
        }
        lines.push(format!("alpha={alpha}, beta={beta}: |direct - formula| = {diff:.2e}"));
    }
    // correction-size trend at alpha = 0 from beta = 1 to 3
    let mut trend = Vec::new();
    for beta in 1..=3u32 {
        let rep = exact_formula_average(nf, &k, 3, 0, beta, &spec, &AverageMode::Double)?;
        let e = rep.correction_e.expect("formula run").norm()
            + rep.correction_e_star.expect("formula run").norm();
        trend.push(e);
    }
    lines.push(format!(
        "|E| + |E*| at alpha=0, beta=1..3: {:.4e}, {:.4e}, {:.4e}",
        trend[0], trend[1], trend[2]
    ));
    Ok((ok, lines.join("; ")))
}

fn crit_7_moebius(nf: &NewformData) -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let spec = CutoffSpec::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for (alpha, beta) in [(0u32, 1u32), (0, 2), (1, 1), (1, 2)] {
        let rep = primitive_average(nf, &k, 3, alpha, beta, &spec)?;
        let gap = (rep.value - rep.direct_primitive).norm();
        // exact membership bookkeeping
        let h = |a: i64| -> Result<i64> {
            if a < 0 {
                Ok(0)
            } else {
                dedekind_h(&k, 3, a as u32)
            }
        };
        let phi = |b: i64| -> i64 {
            if b < 0 {
                0
            } else if b == 0 {
                1
            } else {
                3i64.pow(b as u32) - 3i64.pow(b as u32 - 1)
            }
        };
        let expected = (h(alpha as i64)? - h(alpha as i64 - 1)?)
            * (phi(beta as i64) - if beta == 0 { 0 } else { phi(beta as i64 - 1) });
        if gap >= 1e-8 || rep.p_size as i64 != expected {
            ok = false;
        }
        lines.push(format!(
            "alpha={alpha}, beta={beta}: |P|={} (expected {expected}), |inverted - direct| = {gap:.2e}",
            rep.p_size
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn crit_8_main_term() -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let mut ok = true;
    let mut lines = Vec::new();
    for beta in 0..=2u32 {
        let (v1, b1, v2, b2) = main_term_two_ways(&k, 3, beta, 2_000_000)?;
        let gap = (v1 - v2).norm();
        if gap > b1 + b2 {
            ok = false;
        }
        lines.push(format!(
            "beta={beta}: |character route - congruence route| = {gap:.2e} <= {:.2e}",
            b1 + b2
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn crit_9_weierstrass() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for p in [3i64, 5, 7] {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + p as u64);
        let nprec = 10u32;
        let ntrunc = 9usize;
        let m = (p as u64).pow(nprec);
        let mut recon_fail = 0usize;
        let mut addit_fail = 0usize;
        let mut pairs = 0usize;
        let mut last: Option<(DVRSeries, u32, usize)> = None;
        for _ in 0..10_000 {
            let s = DVRSeries::new(
                p,
                nprec,
                ntrunc,
                (0..5).map(|_| rng.gen_range(0..m)).collect(),
            )?;
            if s.is_zero() {
                continue;
            }
            let w = weierstrass_prep(&s)?;
            if w.reconstruct(nprec)? != s {
                recon_fail += 1;
            }
            if let Some((prev, pmu, pdeg)) = last.take() {
                if w.mu + pmu < nprec && w.wdeg + pdeg < ntrunc {
                    let prod = s.mul(&prev)?;
                    let wp = weierstrass_prep(&prod)?;
                    if wp.mu != w.mu + pmu || wp.wdeg != w.wdeg + pdeg {
                        addit_fail += 1;
                    }
                    pairs += 1;
                }
            } else {
                last = Some((s, w.mu, w.wdeg));
            }
        }
        if recon_fail > 0 || addit_fail > 0 {
            ok = false;
        }
        lines.push(format!(
            "p={p}: 10000 reconstructions ({recon_fail} failures), {pairs} product pairs ({addit_fail} additivity failures)"
        ));
    }
    // planted-zero pipeline: Phi_3(1+T) * unit vanishes at exactly the two
    // conductor-3 characters among all conductors <= 3^4
    let phi = DVRSeries::new(3, 9, 12, vec![3, 3, 1])?;
    let unit = DVRSeries::new(3, 9, 12, vec![1, 1, 0, 3])?;
    let f = phi.mul(&unit)?;
    let zc = zero_count_bound(&f, 4)?;
    let planted_ok = zc.wdeg == 2
        && zc.vanishing == vec![(1, 1), (1, 2)]
        && zc.indeterminate.is_empty();
    if !planted_ok {
        ok = false;
    }
    lines.push(format!(
        "planted zeros: wdeg={}, vanishing={:?}, indeterminate={:?}",
        zc.wdeg, zc.vanishing, zc.indeterminate
    ));
    let within_time = start.elapsed().as_secs() < 60;
    lines.push(format!("runtime within 1 min: {within_time}"));
    Ok((ok && within_time, lines.join("; ")))
}

fn crit_10_twist_norm() -> Result<(bool, String)> {
    let mut ok = true;
    let mut lines = Vec::new();
    let elems = [
        IwasawaElement::new(3, 6, 4, 8, vec![vec![1, 1], vec![1]])?,
        IwasawaElement::new(3, 6, 4, 8, vec![vec![1, 0, 1], vec![3], vec![0, 1]])?,
        IwasawaElement::new(3, 6, 4, 8, vec![vec![2, 0, 0, 1], vec![0, 3], vec![1]])?,
    ];
    for (i, elem) in elems.iter().enumerate() {
        for alpha in 0..=2u32 {
            match twist_norm_interpolation_check(elem, alpha, 2) {
                Ok(n) => lines.push(format!("elem {i}, alpha={alpha}: {n} identities exact")),
                Err(e) => {
                    ok = false;
                    lines.push(format!("elem {i}, alpha={alpha}: {e}"));
                }
            }
        }
    }
    Ok((ok, lines.join("; ")))
}

fn crit_11_forced_vanishing(nf: &NewformData) -> Result<(bool, String)> {
    let k = build_field(-7)?;
    let p = 3i64;
    let spec = CutoffSpec::default();
    let order1 = picard_group(&k, p, 1)?;
    let rhos = ring_class_family(&k, &order1)?;
    let chis = dirichlet_family(p, 1)?;
    let mut found = 0usize;
    let mut max_l = 0.0f64;
    for rho in &rhos {
        for chi in &chis {
            let w = HeckeCharacterW { rho: rho.clone(), chi: chi.clone() };
            if !w.is_self_dual() {
                continue;
            }
            let cv = central_value_afe(nf, &w, &k, &order1, p, &spec)?;
            if (cv.epsilon - Complex64::new(-1.0, 0.0)).norm() < 1e-6 {
                found += 1;
                max_l = max_l.max(cv.value.norm());
            }
        }
    }
    if found == 0 {
        return Ok((false, "no self-dual member with root number -1 found".into()));
    }
    Ok((
        max_l < 1e-5,
        format!("{found} self-dual members with epsilon = -1, max |L| = {max_l:.2e}"),
    ))
}

fn run_once() -> Vec<CriterionResult> {
    let nf = newform();
    vec![
        wrap(1, "exponential-sum closed forms", crit_1_expsums),
        wrap(2, "Gauss-sum modulus", crit_2_gauss_modulus),
        wrap(3, "class groups and ideal counts", crit_3_class_groups),
        wrap(4, "AFE cutoff robustness", || crit_4_afe_robustness(&nf)),
        wrap(5, "Artin factorization of norm twists", || crit_5_artin_factorization(&nf)),
        wrap(6, "exact average formula", || crit_6_average_formula(&nf)),
        wrap(7, "Moebius inversion to primitive members", || crit_7_moebius(&nf)),
        wrap(8, "main-term estimators", crit_8_main_term),
        wrap(9, "Weierstrass preparation suite", crit_9_weierstrass),
        wrap(10, "twist-norm interpolation", crit_10_twist_norm),
        wrap(11, "forced vanishing at root number -1", || crit_11_forced_vanishing(&nf)),
    ]
}

/// Render a deterministic plain-text report.
pub fn render_report(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(
            out,
            "[{}] criterion {:2}: {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.details
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", results.len());
    out
}

/// Run all twelve criteria. Criterion 12 (determinism) executes the other
/// eleven a second time and compares the rendered reports byte for byte.
pub fn run_all() -> Vec<CriterionResult> {
    let first = run_once();
    let second = run_once();
    let identical = render_report(&first) == render_report(&second);
    let mut results = first;
    results.push(CriterionResult {
        id: 12,
        name: "determinism".to_string(),
        passed: identical,
        details: if identical {
            "repeat run produced a byte-identical report".to_string()
        } else {
            "repeat run differed".to_string()
        },
    });
    results
}
