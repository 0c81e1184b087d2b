//! First-moment averages of the central values over the (rho, chi) family
//! grid, computed two independent ways:
//!
//! * directly, member by member, through the AFE engine;
//! * by the exact orthogonality rearrangement: stratify the grid by the
//!   reduced conductor exponent k = max(x_eff, y_psi), sum the coefficient
//!   functions of each cumulative stratum in closed form (character
//!   orthogonality turns the rho-sum into a class-kernel indicator and the
//!   cyclotomic sum into a congruence condition u = m^2 d = +-1 mod p^j),
//!   and resum by parts against the cutoff kernels. The top stratum paired
//!   with V at the top conductor scale is the D/D* term; the kernel
//!   differences V(y/p^2) - V(y) against the lower cumulative sums are the
//!   corrections E/E*.
//!
//! The root-number side uses the closed form
//! eps = -eta(N) chi^2(N D) tau(chi)^4 / q^2 summed over the cyclotomic
//! family; the underlying quadruple Gauss-sum averages are validated against
//! the hyper-Kloosterman closed form sum_{chi prim mod p^y} tau(chi)^4
//! conj(chi)(w) = phi(p^y) K4(w; p^y) - [y = 1] supplied by the expsums
//! module (Salie evaluation where certified, brute-force convolution
//! otherwise).
//!
//! Everything here needs the 2-part of (Z/p)^* to be exactly {+-1}, i.e.
//! p = 3 mod 4; other p are rejected (the direct route has no such limit).

use crate::arith::{self, level_map, picard_group, OrderClassData, QuadraticFieldData};
use crate::characters::{
    all_characters, dirichlet_family, eta_character, primitivize, product_character,
    ring_class_family, DirichletCharacter, HeckeCharacterW, RingClassCharacter,
};
use crate::cutoff::{cutoff_v, CutoffSpec};
use crate::expsums::{gauss_sum, kloosterman4_all, salie_evaluate, ExpSumContext, SalieOutcome};
use crate::lfunction::{
    central_value_afe, chi_split, closed_form_epsilon, dirichlet_L_at_1, exact_level_descend,
    genus_on_classes, reduce_member, rs_coefficients_reduced, shared_ideal_table,
};
use crate::newform::NewformData;
use crate::{Error, Result, THETA};
use num_complex::Complex64;

/// Which family the average runs over: the full (rho, chi) grid or a single
/// fixed ring-class character against the cyclotomic family.
#[derive(Clone)]
pub enum AverageMode {
    Double,
    Single(RingClassCharacter),
}

impl AverageMode {
    fn label(&self) -> &'static str {
        match self {
            AverageMode::Double => "double",
            AverageMode::Single(_) => "single",
        }
    }
}

/// Everything one average run produces. Fields not computed by the chosen
/// entry point stay `None`.
#[derive(Clone, Debug)]
pub struct AverageReport {
    pub disc: i64,
    pub p: i64,
    pub alpha: u32,
    pub beta: u32,
    pub mode: String,
    pub family_size: usize,
    pub direct_value: Complex64,
    pub d_term: Option<Complex64>,
    pub d_star_term: Option<Complex64>,
    pub correction_e: Option<Complex64>,
    pub correction_e_star: Option<Complex64>,
    pub formula_value: Option<Complex64>,
    /// direct - (D + D* + E + E*)
    pub difference: Option<Complex64>,
    /// max gap of the quadruple Gauss-sum vs hyper-Kloosterman identity,
    /// relative to q^2, over the conductor levels of the family
    pub rn_identity_gap: Option<f64>,
    /// true when every admissible J at levels >= 2 was confirmed by the
    /// Salie closed form (otherwise the brute-force convolution was the
    /// only evaluator)
    pub salie_certified: bool,
    pub main_term: Option<Complex64>,
    /// |difference of the two main-term estimators|
    pub main_term_gap: Option<f64>,
    /// combined certified tail bound of the two estimators
    pub main_term_bound: Option<f64>,
    pub fitted_decay_exponent: Option<f64>,
    pub theta_reference: f64,
}

impl AverageReport {
    fn new(disc: i64, p: i64, alpha: u32, beta: u32, mode: &AverageMode) -> AverageReport {
        AverageReport {
            disc,
            p,
            alpha,
            beta,
            mode: mode.label().to_string(),
            family_size: 0,
            direct_value: Complex64::new(0.0, 0.0),
            d_term: None,
            d_star_term: None,
            correction_e: None,
            correction_e_star: None,
            formula_value: None,
            difference: None,
            rn_identity_gap: None,
            salie_certified: false,
            main_term: None,
            main_term_gap: None,
            main_term_bound: None,
            fitted_decay_exponent: None,
            theta_reference: 2.0 * THETA - 1.5,
        }
    }
}

/// Moebius-inverted average over the primitive members only.
#[derive(Clone, Debug)]
pub struct PrimitiveAverageReport {
    pub disc: i64,
    pub p: i64,
    pub alpha: u32,
    pub beta: u32,
    pub p_size: usize,
    /// the inverted value
    pub value: Complex64,
    /// mean over the primitive members computed directly
    pub direct_primitive: Complex64,
    /// rows (x, y, moebius weight, family size h_x phi(p^y), family total)
    pub inversion_terms: Vec<(u32, u32, i64, i64, Complex64)>,
}

fn rho_range(
    K: &QuadraticFieldData,
    order_alpha: &OrderClassData,
    mode: &AverageMode,
) -> Result<Vec<RingClassCharacter>> {
    match mode {
        AverageMode::Double => ring_class_family(K, order_alpha),
        AverageMode::Single(r) => Ok(vec![r.clone()]),
    }
}

/// Mean of the central values over the family grid, member by member.
pub fn direct_average(
    nf: &NewformData,
    K: &QuadraticFieldData,
    p: i64,
    alpha: u32,
    beta: u32,
    spec: &CutoffSpec,
    mode: &AverageMode,
) -> Result<AverageReport> {
    let order_alpha = picard_group(K, p, alpha)?;
    let rhos = rho_range(K, &order_alpha, mode)?;
    let chis = dirichlet_family(p, beta)?;
    let mut report = AverageReport::new(K.disc, p, alpha, beta, mode);
    report.family_size = rhos.len() * chis.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for rho in &rhos {
        for chi in &chis {
            let w = HeckeCharacterW {
                rho: rho.clone(),
                chi: chi.clone(),
            };
            let cv = central_value_afe(nf, &w, K, &order_alpha, p, spec).map_err(|e| {
                Error::Numerical(format!("member {} failed: {e}", w.label(alpha)))
            })?;
            acc += cv.value;
        }
    }
    report.direct_value = acc / report.family_size as f64;
    Ok(report)
}

/// Per-(rho, parity) data for the stratified closed forms: the character
/// values on the classes of the working order and the exact level of
/// rho * (chi_2 o N)^delta.
struct RhoBranch {
    /// rho on the classes of the working order (no genus factor: the grid
    /// coefficient functions carry rho itself, the genus only moves the
    /// member between strata)
    values: Vec<Complex64>,
    /// exact level of rho * (genus)^delta, indexed by delta
    level: [u32; 2],
}

/// The quadruple Gauss-sum vs hyper-Kloosterman validation for all levels
/// 1..=beta: returns (max relative gap, salie fully certified).
pub fn rn_identity_check(p: i64, beta: u32) -> Result<(f64, bool)> {
    let mut max_gap = 0.0f64;
    let mut salie_ok = true;
    for y in 1..=beta {
        let ctx = ExpSumContext::new(p, y)?;
        let q = ctx.q;
        let k4 = kloosterman4_all(&ctx);
        if y >= 2 {
            for j in 1..q {
                if j % p != 0 {
                    match salie_evaluate(j, &ctx)? {
                        SalieOutcome::Value(v) => {
                            if (v - k4[j as usize]).norm() / (q as f64).powf(1.5) > 1e-8 {
                                salie_ok = false;
                            }
                        }
                        SalieOutcome::NoQuarticRoot => {}
                        SalieOutcome::NotCertified => salie_ok = false,
                    }
                }
            }
        }
        let fam = all_characters(q);
        let phi = fam.len() as f64;
        for w in 1..q {
            if w % p == 0 {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for chi in &fam {
                if chi.primitive {
                    let t = gauss_sum(chi);
                    s += t * t * t * t * chi.conjugate().eval(w);
                }
            }
            let mut expect = phi * k4[w as usize];
            if y == 1 {
                expect -= 1.0;
            }
            let gap = (s - expect).norm() / (q * q) as f64;
            if gap > max_gap {
                max_gap = gap;
            }
        }
    }
    Ok((max_gap, salie_ok))
}

/// The exact rearrangement of the direct average: D + D* + E + E*.
/// Also computes the direct value and asserts the identity loosely (callers
/// pin the tight tolerance); the report carries the residual.
pub fn exact_formula_average(
    nf: &NewformData,
    K: &QuadraticFieldData,
    p: i64,
    alpha: u32,
    beta: u32,
    spec: &CutoffSpec,
    mode: &AverageMode,
) -> Result<AverageReport> {
    if p % 4 != 3 {
        return Err(Error::Unsupported(
            "the orthogonality rearrangement needs the 2-part of (Z/p)^* to be {+-1} (p = 3 mod 4)"
                .into(),
        ));
    }
    let mut report = direct_average(nf, K, p, alpha, beta, spec, mode)?;
    let order_alpha = picard_group(K, p, alpha)?;
    let rhos = rho_range(K, &order_alpha, mode)?;
    let chis = dirichlet_family(p, beta)?;
    let family_size = rhos.len() * chis.len();

    // working order: level max(alpha, 1) so genus values exist
    let lev_l = alpha.max(1);
    let order_l = picard_group(K, p, lev_l)?;
    let chi2 = dirichlet_family(p, 1)?
        .into_iter()
        .find(|c| c.order == 2)
        .ok_or_else(|| Error::Unsupported("no quadratic character mod p".into()))?;
    let genus = genus_on_classes(&order_l, &chi2, p)?;
    let hl = order_l.h as usize;
    let lift: Vec<usize> = if alpha >= 1 {
        (0..hl).collect()
    } else {
        level_map(&order_l, &order_alpha)?
    };

    // per-rho branch data
    let mut branches = Vec::with_capacity(rhos.len());
    for rho in &rhos {
        let values: Vec<Complex64> = lift.iter().map(|&i| rho.eval(i)).collect();
        let mut level = [0u32; 2];
        for delta in 0..2 {
            let v: Vec<Complex64> = values
                .iter()
                .zip(&genus)
                .map(|(v, g)| if delta == 1 { v * *g } else { *v })
                .collect();
            let (ord, _) = exact_level_descend(K, p, &order_l, &v)?;
            level[delta] = ord.conductor_exponent;
        }
        branches.push(RhoBranch { values, level });
    }

    // odd parts and parities of the cyclotomic family
    let q_beta = p.pow(beta);
    struct ChiData {
        delta: usize,
        y_odd: u32,
    }
    let mut chi_data = Vec::with_capacity(chis.len());
    for chi in &chis {
        let (c2, psi) = chi_split(chi);
        let delta = usize::from(c2.modulus > 1);
        let pp = primitivize(&psi);
        let mut y_odd = 0u32;
        let mut m = pp.modulus.max(1);
        while m % p == 0 {
            m /= p;
            y_odd += 1;
        }
        chi_data.push(ChiData { delta, y_odd });
    }

    // horizon K over the whole grid
    let mut k_top = 0u32;
    for b in &branches {
        for cd in &chi_data {
            k_top = k_top.max(b.level[cd.delta].max(cd.y_odd));
        }
    }

    let grid = cutoff_v(spec, 2, nf.weight);
    let scale = |k: u32| {
        nf.level as f64
            * K.abs_rel_disc as f64
            * (p as f64).powi(2 * k as i32)
            * spec.conductor_model_m
    };
    let bound = (2.0 * scale(k_top) * grid.tail_cut(1e-13)).ceil() as i64;
    if nf.bound() < bound {
        return Err(Error::Validation(format!(
            "coefficient supply too short: need a(n) to {bound}, have {}",
            nf.bound()
        )));
    }
    let table = shared_ideal_table(&order_l, bound);

    // cumulative class weights wt_{k,delta}(A) = sum over admitted rho of
    // rho(A), and the d-vectors RW_{k,delta}(d) = sum_A wt(A) r_A(d)
    let kk = k_top as usize;
    let mut rw = vec![[vec![Complex64::new(0.0, 0.0); bound as usize + 1],
                       vec![Complex64::new(0.0, 0.0); bound as usize + 1]]; kk + 1];
    #[allow(clippy::needless_range_loop)]
    for k in 0..=kk {
        for delta in 0..2 {
            let mut wt = vec![Complex64::new(0.0, 0.0); hl];
            for b in &branches {
                if b.level[delta] <= k as u32 {
                    for (w, v) in wt.iter_mut().zip(&b.values) {
                        *w += v;
                    }
                }
            }
            let dst = &mut rw[k][delta];
            for d in 1..=bound {
                if d % p == 0 {
                    continue;
                }
                let mut s = Complex64::new(0.0, 0.0);
                for (cls, w) in wt.iter().enumerate() {
                    if w.norm() > 0.0 {
                        let c = table.r(cls, d);
                        if c != 0 {
                            s += w * c as f64;
                        }
                    }
                }
                dst[d as usize] = s;
            }
        }
    }

    // epsilon tables U_{k,delta}(u) over units u mod p^beta
    let qb = q_beta as usize;
    let mut odd_psis: Vec<(u32, DirichletCharacter)> = Vec::new();
    for chi in &chis {
        if chi.order % 2 == 1 {
            let ppr = primitivize(chi);
            let mut y = 0u32;
            let mut m = ppr.modulus.max(1);
            while m % p == 0 {
                m /= p;
                y += 1;
            }
            odd_psis.push((y, chi.clone()));
        }
    }
    let mut u_table = vec![[vec![Complex64::new(0.0, 0.0); qb],
                            vec![Complex64::new(0.0, 0.0); qb]]; kk + 1];
    let has_quad_branch = beta >= 1;
    for (k, ut) in u_table.iter_mut().enumerate() {
        let j = (k as u32).min(beta);
        for delta in 0..2 {
            if delta == 1 && !has_quad_branch {
                continue;
            }
            for (y, psi) in &odd_psis {
                if *y > j {
                    continue;
                }
                let full = if delta == 0 {
                    psi.clone()
                } else {
                    product_character(&chi2, psi)
                };
                let eps = closed_form_epsilon(nf, &primitivize(&full), K);
                for u in 0..qb as i64 {
                    let ev = full.conjugate().eval(u);
                    if ev.norm() > 0.0 {
                        ut[delta][u as usize] += eps * ev;
                    }
                }
            }
        }
    }

    // pair a cumulative stratum against a kernel: kernel(n) is V(n / X) or a
    // difference of two V's; the congruence u = +-1 mod p^j gates the
    // cyclotomic orthogonality of the A-side
    let n_odd = |j: u32| -> f64 {
        if j == 0 {
            1.0
        } else {
            (p.pow(j) - p.pow(j - 1)) as f64 / 2.0
        }
    };
    let pair = |k: usize, kernel: &dyn Fn(f64) -> f64| -> (Complex64, Complex64) {
        let j = (k as u32).min(beta);
        let pj = p.pow(j);
        let mut a_side = Complex64::new(0.0, 0.0);
        let mut e_side = Complex64::new(0.0, 0.0);
        let kpow = (nf.weight as f64 - 1.0) / 2.0;
        let mut m = 1i64;
        while m * m <= bound {
            if m % p == 0 || arith::gcd(m, nf.level) != 1 || K.eta(m) == 0 {
                m += 1;
                continue;
            }
            let em = K.eta(m) as f64;
            let mm = m * m;
            for d in 1..=bound / mm {
                if d % p == 0 {
                    continue;
                }
                let r0 = rw[k][0][d as usize];
                let r1 = rw[k][1][d as usize];
                if r0.norm() == 0.0 && r1.norm() == 0.0 {
                    continue;
                }
                let n = mm * d;
                let v = kernel(n as f64);
                if v == 0.0 {
                    continue;
                }
                let lam = nf.a(d) as f64 / (d as f64).powf(kpow);
                if lam == 0.0 {
                    continue;
                }
                let base = em * lam * v / (n as f64).sqrt();
                let u = n % q_beta;
                // A side: congruence condition from cyclotomic orthogonality
                let um = u % pj;
                if um == 1 % pj || um == (pj - 1) % pj {
                    let mut s = r0;
                    if has_quad_branch {
                        s += chi2.eval(u).re * r1;
                    }
                    a_side += base * n_odd(j) * s;
                }
                // eps side: the U tables carry the cyclotomic sums
                let ue = u_table[k][0][u as usize] * r0.conj()
                    + u_table[k][1][u as usize] * r1.conj();
                e_side += base * ue;
            }
            m += 1;
        }
        (a_side, e_side)
    };

    // p-part of the level-zero stratum: those members are the only ones
    // whose series keep the p-divisible terms, which the closed forms above
    // exclude; add their p-supported coefficients at every cumulative level
    // (they telescope back to the k = 0 kernel).
    let mut t0 = vec![Complex64::new(0.0, 0.0); bound as usize + 1];
    let mut t0_star = vec![Complex64::new(0.0, 0.0); bound as usize + 1];
    for rho in &rhos {
        for chi in &chis {
            let w = HeckeCharacterW {
                rho: rho.clone(),
                chi: chi.clone(),
            };
            let red = reduce_member(&w, K, &order_alpha, p)?;
            if !red.is_effectively_trivial() {
                continue;
            }
            let co = rs_coefficients_reduced(nf, &red, K, p, bound)?;
            let eps = closed_form_epsilon(nf, &primitivize(chi), K);
            for n in (p..=bound).step_by(p as usize) {
                t0[n as usize] += co.a[n as usize];
                t0_star[n as usize] += eps * co.dual_a[n as usize];
            }
        }
    }
    let t0_pair = |kernel: &dyn Fn(f64) -> f64| -> (Complex64, Complex64) {
        let mut a_side = Complex64::new(0.0, 0.0);
        let mut e_side = Complex64::new(0.0, 0.0);
        for n in (p..=bound).step_by(p as usize) {
            let (ca, ce) = (t0[n as usize], t0_star[n as usize]);
            if ca.norm() == 0.0 && ce.norm() == 0.0 {
                continue;
            }
            let v = kernel(n as f64);
            if v != 0.0 {
                let w = v / (n as f64).sqrt();
                a_side += ca * w;
                e_side += ce * w;
            }
        }
        (a_side, e_side)
    };

    let inv = 1.0 / family_size as f64;
    let top_kernel = |n: f64| grid.eval(n / scale(k_top));
    let (mut d_term, mut d_star) = pair(kk, &top_kernel);
    let (ta, te) = t0_pair(&top_kernel);
    d_term += ta;
    d_star += te;
    d_term *= inv;
    d_star *= inv;

    let mut corr_e = Complex64::new(0.0, 0.0);
    let mut corr_es = Complex64::new(0.0, 0.0);
    for k in 0..kk {
        let diff_kernel =
            |n: f64| grid.eval(n / scale(k as u32 + 1)) - grid.eval(n / scale(k as u32));
        let (a, e) = pair(k, &diff_kernel);
        let (ta, te) = t0_pair(&diff_kernel);
        corr_e -= (a + ta) * inv;
        corr_es -= (e + te) * inv;
    }

    let formula = d_term + d_star + corr_e + corr_es;
    let difference = report.direct_value - formula;
    let (rn_gap, salie_ok) = rn_identity_check(p, beta)?;
    report.d_term = Some(d_term);
    report.d_star_term = Some(d_star);
    report.correction_e = Some(corr_e);
    report.correction_e_star = Some(corr_es);
    report.formula_value = Some(formula);
    report.difference = Some(difference);
    report.rn_identity_gap = Some(rn_gap);
    report.salie_certified = salie_ok;
    if difference.norm() > 1e-5 * (1.0 + report.direct_value.norm()) {
        return Err(Error::Numerical(format!(
            "orthogonality rearrangement does not match the direct average \
             (residual {:.3e})",
            difference.norm()
        )));
    }
    Ok(report)
}

/// Moebius inversion to the primitive members: only levels alpha-1, alpha
/// and beta-1, beta survive. Cross-checked against the direct mean over
/// primitive members.
pub fn primitive_average(
    nf: &NewformData,
    K: &QuadraticFieldData,
    p: i64,
    alpha: u32,
    beta: u32,
    spec: &CutoffSpec,
) -> Result<PrimitiveAverageReport> {
    let mut terms = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    for dx in 0..=alpha.min(1) {
        for dy in 0..=beta.min(1) {
            let (x, y) = (alpha - dx, beta - dy);
            let mu = if (dx + dy) % 2 == 0 { 1i64 } else { -1 };
            let rep = direct_average(nf, K, p, x, y, spec, &AverageMode::Double)?;
            let fam = rep.family_size as i64;
            let sum = rep.direct_value * fam as f64;
            terms.push((x, y, mu, fam, sum));
            total += sum * mu as f64;
        }
    }
    // direct primitive mean
    let order_alpha = picard_group(K, p, alpha)?;
    let rhos = ring_class_family(K, &order_alpha)?;
    let chis = dirichlet_family(p, beta)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for rho in &rhos {
        if rho.conductor_exponent != alpha {
            continue;
        }
        for chi in &chis {
            if beta > 0 && !chi.primitive {
                continue;
            }
            let w = HeckeCharacterW {
                rho: rho.clone(),
                chi: chi.clone(),
            };
            let cv = central_value_afe(nf, &w, K, &order_alpha, p, spec)?;
            acc += cv.value;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Validation(
            "no primitive members at the requested levels".into(),
        ));
    }
    Ok(PrimitiveAverageReport {
        disc: K.disc,
        p,
        alpha,
        beta,
        p_size: count,
        value: total / count as f64,
        direct_primitive: acc / count as f64,
        inversion_terms: terms,
    })
}

/// Mean of the central values over a Galois orbit of Dirichlet characters
/// for a fixed ring-class character. A nonzero mean certifies a nonzero
/// member (the values are an orbit of algebraic conjugates).
pub fn galois_average(
    nf: &NewformData,
    K: &QuadraticFieldData,
    p: i64,
    alpha: u32,
    spec: &CutoffSpec,
    rho: &RingClassCharacter,
    orbit: &[DirichletCharacter],
) -> Result<Complex64> {
    if orbit.is_empty() {
        return Err(Error::Validation("empty Galois orbit".into()));
    }
    let order_alpha = picard_group(K, p, alpha)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for chi in orbit {
        let w = HeckeCharacterW {
            rho: rho.clone(),
            chi: chi.clone(),
        };
        acc += central_value_afe(nf, &w, K, &order_alpha, p, spec)?.value;
    }
    Ok(acc / orbit.len() as f64)
}

/// The main term phi(p^beta)^{-1} sum_xi L(1, eta xi^2) computed two ways:
/// character by character with the Polya-Vinogradov tail, and as the
/// congruence-restricted sum over m = +-1 mod p^beta with the window
/// cancellation tail. Returns (value_1, bound_1, value_2, bound_2).
pub fn main_term_two_ways(
    K: &QuadraticFieldData,
    p: i64,
    beta: u32,
    cut: i64,
) -> Result<(Complex64, f64, Complex64, f64)> {
    let eta = eta_character(K);
    let chis = dirichlet_family(p, beta)?;
    let phi = chis.len() as f64;
    let mut v1 = Complex64::new(0.0, 0.0);
    let mut b1 = 0.0f64;
    for xi in &chis {
        let comp = product_character(&eta, &xi.power(2));
        let (val, bound) = dirichlet_L_at_1(&comp, cut)?;
        v1 += val;
        b1 += bound;
    }
    v1 /= phi;
    b1 /= phi;
    // congruence route: (1/phi) sum_xi xi(m^2) = [m^2 = 1 mod p^beta], and
    // for odd p that means m = +-1
    let pb = p.pow(beta);
    let mut v2 = 0.0f64;
    for m in 1..=cut {
        if m % pb == 1 % pb || m % pb == (pb - 1) % pb {
            let e = K.eta(m);
            if e != 0 {
                v2 += e as f64 / m as f64;
            }
        }
    }
    // eta sums to zero over any full period inside a progression window, so
    // partial sums along each progression are bounded by the discriminant;
    // Abel gives 2 D / cut per progression, two progressions
    let b2 = 4.0 * K.abs_rel_disc as f64 / cut as f64;
    Ok((v1, b1, Complex64::new(v2, 0.0), b2))
}

/// One row per beta: direct average, main term (both estimators), their
/// difference, and at the end a least-squares fit of log |difference|
/// against log N(p^beta) shared by all rows.
pub fn asymptotic_report(
    nf: &NewformData,
    K: &QuadraticFieldData,
    p: i64,
    betas: &[u32],
    alpha: u32,
    spec: &CutoffSpec,
    cut: i64,
) -> Result<Vec<AverageReport>> {
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("beta range must be ascending".into()));
    }
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &beta in betas {
        let mut rep = direct_average(nf, K, p, alpha, beta, spec, &AverageMode::Double)?;
        let (v1, b1, v2, b2) = main_term_two_ways(K, p, beta, cut)?;
        rep.main_term = Some(v1);
        rep.main_term_gap = Some((v1 - v2).norm());
        rep.main_term_bound = Some(b1 + b2);
        let diff = rep.direct_value - v1;
        rep.difference = Some(diff);
        if diff.norm() > 0.0 {
            // N(p^beta) = p^{2 beta} for inert p
            pts.push((2.0 * beta as f64 * (p as f64).ln(), diff.norm().ln()));
        }
        rows.push(rep);
    }
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|q| q.0).sum();
        let sy: f64 = pts.iter().map(|q| q.1).sum();
        let sxx: f64 = pts.iter().map(|q| q.0 * q.0).sum();
        let sxy: f64 = pts.iter().map(|q| q.0 * q.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        for r in &mut rows {
            r.fitted_decay_exponent = Some(slope);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_field;
    use crate::characters::galois_orbits;
    use crate::newform::builtin_11a;
    use once_cell::sync::Lazy;

    static NF: Lazy<NewformData> = Lazy::new(|| builtin_11a(120_000));

    #[test]
    fn formula_matches_direct_small() {
        let k = build_field(-7).unwrap();
        let spec = CutoffSpec::default();
        let rep =
            exact_formula_average(&NF, &k, 3, 0, 1, &spec, &AverageMode::Double).unwrap();
        assert_eq!(rep.family_size, 2);
        let diff = rep.difference.unwrap().norm();
        assert!(diff < 1e-8, "residual {diff:e}");
        assert!(rep.rn_identity_gap.unwrap() < 1e-10);
    }

    #[test]
    fn formula_matches_direct_alpha_one() {
        let k = build_field(-7).unwrap();
        let spec = CutoffSpec::default();
        let rep =
            exact_formula_average(&NF, &k, 3, 1, 1, &spec, &AverageMode::Double).unwrap();
        assert_eq!(rep.family_size, 8);
        let diff = rep.difference.unwrap().norm();
        assert!(diff < 1e-8, "residual {diff:e}");
    }

    #[test]
    fn moebius_inversion_small() {
        let k = build_field(-7).unwrap();
        let spec = CutoffSpec::default();
        let rep = primitive_average(&NF, &k, 3, 0, 1, &spec).unwrap();
        assert_eq!(rep.p_size, 1);
        assert!(
            (rep.value - rep.direct_primitive).norm() < 1e-9,
            "{} vs {}",
            rep.value,
            rep.direct_primitive
        );
    }

    #[test]
    fn main_term_estimators_agree() {
        let k = build_field(-7).unwrap();
        let (v1, b1, v2, b2) = main_term_two_ways(&k, 3, 1, 200_000).unwrap();
        assert!(
            (v1 - v2).norm() <= b1 + b2 + 1e-9,
            "{v1} vs {v2}, bounds {b1:e} + {b2:e}"
        );
    }

    #[test]
    fn galois_orbit_average() {
        let k = build_field(-7).unwrap();
        let spec = CutoffSpec::default();
        let order0 = picard_group(&k, 3, 0).unwrap();
        let rho0 = ring_class_family(&k, &order0).unwrap().remove(0);
        let chis = dirichlet_family(3, 1).unwrap();
        let orbits = galois_orbits(&chis);
        // quadratic character: singleton orbit, mean equals the single value
        let orb: Vec<DirichletCharacter> =
            orbits[0].iter().map(|&i| chis[i].clone()).collect();
        assert_eq!(orb.len(), 1);
        let g = galois_average(&NF, &k, 3, 0, &spec, &rho0, &orb).unwrap();
        let w = HeckeCharacterW {
            rho: rho0,
            chi: orb[0].clone(),
        };
        let cv = central_value_afe(&NF, &w, &k, &order0, 3, &spec).unwrap();
        assert!((g - cv.value).norm() < 1e-12);
    }

    #[test]
    fn single_mode_formula() {
        let k = build_field(-7).unwrap();
        let spec = CutoffSpec::default();
        let order1 = picard_group(&k, 3, 1).unwrap();
        let rho = ring_class_family(&k, &order1)
            .unwrap()
            .into_iter()
            .find(|r| r.order > 2)
            .unwrap();
        let rep = exact_formula_average(
            &NF,
            &k,
            3,
            1,
            1,
            &spec,
            &AverageMode::Single(rho),
        )
        .unwrap();
        assert_eq!(rep.family_size, 2);
        let diff = rep.difference.unwrap().norm();
        assert!(diff < 1e-8, "residual {diff:e}");
    }
}
