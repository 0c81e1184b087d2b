//! Dirichlet characters of arbitrary (small) modulus, ring-class characters
//! on Pic(O_{p^alpha}), and the composite Hecke characters W = rho * (chi o N).
//!
//! Characters are stored as exact root-of-unity exponents on a unit-group
//! generator basis; complex values appear only at evaluation boundaries, so
//! orthogonality relations hold exactly in integer arithmetic.

use crate::arith::{extgcd, gcd, level_kernel, picard_group_conductor, OrderClassData,
    QuadraticFieldData};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// Generators of (Z/q)^x with their orders, via CRT over prime powers.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    pub modulus: i64,
    pub gens: Vec<i64>,
    pub orders: Vec<i64>,
    /// dlog[x] = exponent vector of x on gens, None for non-units
    dlogs: Vec<Option<Vec<i64>>>,
}

fn primitive_root_odd_prime_power(p: i64, k: u32) -> i64 {
    let q = p.pow(k);
    let phi_p = p - 1;
    // primitive root mod p by exhaustion
    let mut g = 0;
    'outer: for cand in 2..p {
        let mut x = 1i64;
        for _ in 0..phi_p - 1 {
            x = x * cand % p;
            if x == 1 {
                continue 'outer;
            }
        }
        g = cand;
        break;
    }
    assert!(g > 0, "no primitive root mod {p}");
    if k == 1 {
        return g;
    }
    // lift: g works mod p^k unless g^(p-1) = 1 mod p^2, then g + p does
    let mut x = 1i64;
    for _ in 0..phi_p {
        x = x * g % (p * p);
    }
    if x == 1 {
        g + p
    } else {
        g
    }
    .rem_euclid(q)
}

impl UnitGroup {
    pub fn new(q: i64) -> UnitGroup {
        assert!(q >= 1);
        // factor q
        let mut m = q;
        let mut comps: Vec<(i64, u32)> = Vec::new();
        let mut p = 2i64;
        while p * p <= m {
            if m % p == 0 {
                let mut k = 0u32;
                while m % p == 0 {
                    m /= p;
                    k += 1;
                }
                comps.push((p, k));
            }
            p += 1;
        }
        if m > 1 {
            comps.push((m, 1));
        }
        let mut gens: Vec<i64> = Vec::new();
        let mut orders: Vec<i64> = Vec::new();
        for &(p, k) in &comps {
            let pk = p.pow(k);
            let rest = q / pk;
            // lift a to x = a mod p^k, 1 mod rest
            let lift = |a: i64| -> i64 {
                if rest == 1 {
                    return a.rem_euclid(q);
                }
                let (_, u, v) = extgcd(pk, rest);
                // x = a * rest * v + 1 * pk * u
                let x = (a as i128 * rest as i128 * v as i128 + pk as i128 * u as i128)
                    .rem_euclid(q as i128);
                x as i64
            };
            if p == 2 {
                match k {
                    1 => {}
                    2 => {
                        gens.push(lift(3));
                        orders.push(2);
                    }
                    _ => {
                        gens.push(lift(pk - 1));
                        orders.push(2);
                        gens.push(lift(5));
                        orders.push(pk / 4);
                    }
                }
            } else {
                let g = primitive_root_odd_prime_power(p, k);
                gens.push(lift(g));
                orders.push(pk / p * (p - 1));
            }
        }
        // dlog table by enumerating all exponent tuples
        let mut dlogs: Vec<Option<Vec<i64>>> = vec![None; q as usize];
        let ngen = gens.len();
        let mut tuple = vec![0i64; ngen];
        // iterate lexicographically, maintaining the product incrementally is
        // fiddly with carries; q is small, recompute per tuple
        loop {
            let mut prod: i128 = 1 % q as i128;
            for (i, &t) in tuple.iter().enumerate() {
                let mut e = t;
                let mut b = gens[i] as i128;
                while e > 0 {
                    if e & 1 == 1 {
                        prod = prod * b % q as i128;
                    }
                    b = b * b % q as i128;
                    e >>= 1;
                }
            }
            let x = prod as i64;
            if dlogs[x as usize].is_none() {
                dlogs[x as usize] = Some(tuple.clone());
            }
            let mut i = 0;
            loop {
                if i == ngen {
                    return UnitGroup {
                        modulus: q,
                        gens,
                        orders,
                        dlogs,
                    };
                }
                tuple[i] += 1;
                if tuple[i] < orders[i] {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
        }
    }

    pub fn phi(&self) -> i64 {
        self.orders.iter().product()
    }

    pub fn dlog(&self, x: i64) -> Option<&Vec<i64>> {
        self.dlogs[x.rem_euclid(self.modulus) as usize].as_ref()
    }
}

/// A Dirichlet character, stored as an exact exponent table: chi(x) =
/// exp(2 pi i * table[x] / denom) on units, zero elsewhere.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub modulus: i64,
    /// exponents on the unit-group generators (empty for composite-built
    /// characters that did not come from a generator basis)
    pub generator_images: Vec<i64>,
    pub order: i64,
    pub primitive: bool,
    pub conductor: i64,
    pub denom: i64,
    table: Vec<Option<i64>>,
}

impl DirichletCharacter {
    fn from_table(modulus: i64, generator_images: Vec<i64>, denom: i64, table: Vec<Option<i64>>)
        -> DirichletCharacter {
        // order = lcm of denominators of table entries
        let mut order = 1i64;
        for t in table.iter().flatten() {
            let g = gcd(*t, denom);
            order = lcm(order, denom / g.max(1));
        }
        if order == 0 {
            order = 1;
        }
        // conductor: smallest d | modulus with chi trivial on units = 1 mod d
        let mut conductor = modulus;
        let mut d = 1;
        'dloop: while d <= modulus {
            if modulus % d == 0 {
                let mut x = 1i64;
                let mut ok = true;
                loop {
                    if let Some(&Some(t)) = table.get(x as usize) {
                        if t % denom != 0 {
                            ok = false;
                        }
                    }
                    x += d;
                    if x >= modulus || modulus == 1 {
                        break;
                    }
                }
                if modulus == 1 {
                    ok = true;
                }
                if ok {
                    conductor = d.max(1);
                    break 'dloop;
                }
            }
            d += 1;
        }
        DirichletCharacter {
            modulus,
            generator_images,
            order,
            primitive: conductor == modulus,
            conductor,
            denom,
            table,
        }
    }

    /// chi(n) as an exact exponent k meaning exp(2 pi i k / denom); None if
    /// gcd(n, modulus) > 1.
    pub fn exponent(&self, n: i64) -> Option<i64> {
        if self.modulus == 1 {
            return Some(0);
        }
        self.table[n.rem_euclid(self.modulus) as usize]
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        match self.exponent(n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.denom as f64),
        }
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    pub fn conjugate(&self) -> DirichletCharacter {
        let table = self
            .table
            .iter()
            .map(|t| t.map(|k| (-k).rem_euclid(self.denom)))
            .collect();
        let gi = self.generator_images.clone();
        DirichletCharacter::from_table(self.modulus, gi, self.denom, table)
    }

    /// chi^k (k >= 0)
    pub fn power(&self, k: i64) -> DirichletCharacter {
        let table = self
            .table
            .iter()
            .map(|t| t.map(|e| (e * k).rem_euclid(self.denom)))
            .collect();
        DirichletCharacter::from_table(self.modulus, Vec::new(), self.denom, table)
    }

    /// Serialized label "p^beta:e" (single generator) or "q:(e1,...)".
    pub fn label(&self) -> String {
        if self.generator_images.len() == 1 {
            format!("{}:{}", self.modulus, self.generator_images[0])
        } else if self.generator_images.is_empty() {
            format!("{}:*", self.modulus)
        } else {
            let es: Vec<String> = self.generator_images.iter().map(|e| e.to_string()).collect();
            format!("{}:({})", self.modulus, es.join(","))
        }
    }
}

/// All characters mod q (general small modulus), ordered by exponent tuples.
pub fn all_characters(q: i64) -> Vec<DirichletCharacter> {
    let ug = UnitGroup::new(q);
    let denom: i64 = ug.orders.iter().fold(1, |acc, &o| lcm(acc, o));
    let ngen = ug.gens.len();
    let mut out = Vec::new();
    let mut exps = vec![0i64; ngen];
    loop {
        let mut table: Vec<Option<i64>> = vec![None; q.max(1) as usize];
        for x in 0..q.max(1) {
            if let Some(dl) = ug.dlog(x) {
                let mut t = 0i64;
                for i in 0..ngen {
                    t = (t + exps[i] * dl[i] % denom * (denom / ug.orders[i])) % denom;
                }
                table[x as usize] = Some(t.rem_euclid(denom));
            }
        }
        if q == 1 {
            table = vec![Some(0)];
        }
        out.push(DirichletCharacter::from_table(
            q,
            exps.clone(),
            denom,
            table,
        ));
        let mut i = 0;
        loop {
            if i == ngen {
                return out;
            }
            exps[i] += 1;
            if exps[i] < ug.orders[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// The family of all phi(p^beta) characters mod p^beta, p odd.
pub fn dirichlet_family(p: i64, beta: u32) -> Result<Vec<DirichletCharacter>> {
    if p % 2 == 0 {
        return Err(Error::Unsupported("p must be odd".into()));
    }
    Ok(all_characters(p.pow(beta)))
}

/// The quadratic character eta = (disc | .) as a Dirichlet character mod |disc|.
pub fn eta_character(K: &QuadraticFieldData) -> DirichletCharacter {
    let q = K.abs_rel_disc;
    let table: Vec<Option<i64>> = (0..q)
        .map(|x| match K.eta(x) {
            0 => None,
            1 => Some(0),
            _ => Some(1),
        })
        .collect();
    DirichletCharacter::from_table(q, Vec::new(), 2, table)
}

/// Pointwise product of characters extended to modulus lcm (used for eta*chi^2
/// of modulus D*p^beta).
pub fn product_character(a: &DirichletCharacter, b: &DirichletCharacter) -> DirichletCharacter {
    let q = lcm(a.modulus.max(1), b.modulus.max(1));
    let denom = lcm(a.denom, b.denom);
    let table: Vec<Option<i64>> = (0..q)
        .map(|x| match (a.exponent(x), b.exponent(x)) {
            (Some(u), Some(v)) => {
                Some((u * (denom / a.denom) + v * (denom / b.denom)).rem_euclid(denom))
            }
            _ => None,
        })
        .collect();
    DirichletCharacter::from_table(q, Vec::new(), denom, table)
}

/// The primitive character inducing `chi` (modulus = conductor of chi).
pub fn primitivize(chi: &DirichletCharacter) -> DirichletCharacter {
    if chi.primitive || chi.modulus <= 1 {
        return chi.clone();
    }
    let c = chi.conductor;
    for cand in all_characters(c) {
        let mut ok = true;
        for n in 1..chi.modulus {
            if crate::arith::gcd(n, chi.modulus) != 1 {
                continue;
            }
            if (cand.eval(n) - chi.eval(n)).norm() > 1e-9 {
                ok = false;
                break;
            }
        }
        if ok {
            return cand;
        }
    }
    unreachable!("every character is induced by a primitive one")
}

/// Orbits of the primitive members under chi -> chi^k, gcd(k, ord chi) = 1.
/// Returns index sets into the input list; canonical member first.
pub fn galois_orbits(family: &[DirichletCharacter]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; family.len()];
    let mut orbits = Vec::new();
    for i in 0..family.len() {
        if seen[i] || !family[i].primitive {
            continue;
        }
        let mut orbit = Vec::new();
        for k in 1..=family[i].order {
            if gcd(k, family[i].order) != 1 {
                continue;
            }
            let pk = family[i].power(k);
            for (j, c) in family.iter().enumerate() {
                if seen[j] || !c.primitive {
                    continue;
                }
                if c.denom == pk.denom
                    && (0..c.modulus).all(|x| c.exponent(x) == pk.exponent(x))
                {
                    seen[j] = true;
                    orbit.push(j);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

/// A character of Pic(O_{p^alpha}) with its exact conductor exponent.
#[derive(Clone, Debug)]
pub struct RingClassCharacter {
    /// exponents on the group basis of the OrderClassData
    pub generator_images: Vec<i64>,
    /// exact conductor exponent alpha0 <= alpha
    pub conductor_exponent: u32,
    pub order: i64,
    pub denom: i64,
    /// exact exponent per class: rho(A) = exp(2 pi i exps[A] / denom)
    pub class_exponents: Vec<i64>,
}

impl RingClassCharacter {
    pub fn eval(&self, class: usize) -> Complex64 {
        Complex64::from_polar(
            1.0,
            2.0 * PI * self.class_exponents[class] as f64 / self.denom as f64,
        )
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.class_exponents.len()).map(|a| self.eval(a)).collect()
    }

    pub fn conjugate(&self) -> RingClassCharacter {
        RingClassCharacter {
            generator_images: self
                .generator_images
                .iter()
                .map(|e| -e)
                .collect(),
            conductor_exponent: self.conductor_exponent,
            order: self.order,
            denom: self.denom,
            class_exponents: self
                .class_exponents
                .iter()
                .map(|e| (-e).rem_euclid(self.denom))
                .collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    pub fn label(&self, alpha: u32) -> String {
        let es: Vec<String> = self.generator_images.iter().map(|e| e.to_string()).collect();
        format!("{}:({})", alpha, es.join(","))
    }
}

/// All h characters of Pic(O_{p^alpha}) with exact conductor exponents,
/// computed against the kernels of the maps to the lower-level orders.
pub fn ring_class_family(
    K: &QuadraticFieldData,
    order: &OrderClassData,
) -> Result<Vec<RingClassCharacter>> {
    let denom: i64 = order
        .group_structure
        .iter()
        .fold(1, |acc, &o| lcm(acc, o));
    // kernels of Pic(O_{p^alpha}) -> Pic(O_{p^x}) for x < alpha
    let mut kernels: Vec<Vec<usize>> = Vec::new();
    for x in 0..order.conductor_exponent {
        let cx = if x == 0 {
            1
        } else {
            // conductor is p^alpha; recover p from it
            let p = smallest_prime_factor(order.conductor);
            p.pow(x)
        };
        let gx = picard_group_conductor(K, cx, x)?;
        kernels.push(level_kernel(order, &gx)?);
    }
    let k = order.basis.len();
    let mut out = Vec::new();
    let mut exps = vec![0i64; k];
    loop {
        let class_exponents: Vec<i64> = order
            .coords
            .iter()
            .map(|co| {
                let mut t = 0i64;
                for i in 0..k {
                    t = (t + exps[i] * co[i] % denom * (denom / order.group_structure[i])) % denom;
                }
                t.rem_euclid(denom)
            })
            .collect();
        let mut ord = 1i64;
        for &e in &class_exponents {
            let g = gcd(e, denom);
            ord = lcm(ord, denom / g.max(1));
        }
        // exact conductor: smallest x with rho trivial on ker(-> level x)
        let mut cexp = order.conductor_exponent;
        for (x, ker) in kernels.iter().enumerate() {
            if ker.iter().all(|&a| class_exponents[a] % denom == 0) {
                cexp = x as u32;
                break;
            }
        }
        out.push(RingClassCharacter {
            generator_images: exps.clone(),
            conductor_exponent: cexp,
            order: ord,
            denom,
            class_exponents,
        });
        let mut i = 0;
        loop {
            if i == k {
                return Ok(out);
            }
            exps[i] += 1;
            if exps[i] < order.group_structure[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

fn smallest_prime_factor(n: i64) -> i64 {
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

/// The Hecke character W = rho * (chi o N) on ideals coprime to p.
#[derive(Clone, Debug)]
pub struct HeckeCharacterW {
    pub rho: RingClassCharacter,
    pub chi: DirichletCharacter,
}

impl HeckeCharacterW {
    /// W(a) = rho([a]) * chi(Na) for Na prime to p; zero when p | Na.
    pub fn evaluate(&self, class: usize, norm: i64) -> Complex64 {
        let c = self.chi.eval(norm);
        if c == Complex64::new(0.0, 0.0) {
            return c;
        }
        self.rho.eval(class) * c
    }

    pub fn is_trivial(&self) -> bool {
        self.rho.is_trivial() && self.chi.order == 1
    }

    /// Self-dual <=> both components real-valued.
    pub fn is_self_dual(&self) -> bool {
        self.rho.is_real() && self.chi.is_real()
    }

    pub fn label(&self, alpha: u32) -> String {
        format!("[{} x {}]", self.rho.label(alpha), self.chi.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{build_field, picard_group};

    #[test]
    fn unit_group_structure() {
        for q in 1..100i64 {
            let ug = UnitGroup::new(q);
            let phi = (1..=q).filter(|&x| gcd(x, q) == 1).count() as i64;
            assert_eq!(ug.phi().max(1), phi.max(1), "q = {q}");
            for x in 1..q {
                assert_eq!(ug.dlog(x).is_some(), gcd(x, q) == 1);
            }
        }
    }

    #[test]
    fn family_counts_and_multiplicativity() {
        let fam = dirichlet_family(3, 2).unwrap();
        assert_eq!(fam.len(), 6);
        assert_eq!(fam.iter().filter(|c| c.primitive).count(), 4);
        for c in &fam {
            for a in 1..9i64 {
                for b in 1..9i64 {
                    let lhs = c.eval(a * b);
                    let rhs = c.eval(a) * c.eval(b);
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
            assert_eq!(c.exponent(3), None);
        }
        assert_eq!(dirichlet_family(3, 0).unwrap().len(), 1);
        assert!(dirichlet_family(2, 1).is_err());
    }

    #[test]
    fn orthogonality_exact() {
        for &(p, beta) in &[(3i64, 1u32), (3, 2), (5, 1), (5, 2), (7, 2), (7, 3)] {
            let q = p.pow(beta);
            if q > 343 {
                continue;
            }
            let fam = dirichlet_family(p, beta).unwrap();
            for a in 1..q {
                if gcd(a, q) != 1 {
                    continue;
                }
                let s: Complex64 = fam.iter().map(|c| c.eval(a)).sum();
                let expect = if a % q == 1 { fam.len() as f64 } else { 0.0 };
                assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-9, "a={a} q={q}");
            }
        }
    }

    #[test]
    fn conductors_and_primitivity() {
        let fam = dirichlet_family(3, 2).unwrap();
        for c in &fam {
            assert_eq!(c.primitive, c.conductor == 9);
            // conductor divides modulus and matches order structure:
            // order 1 -> conductor 1; order 2 -> conductor 3 (quadratic mod 9
            // is induced from mod 3)
            match c.order {
                1 => assert_eq!(c.conductor, 1),
                2 => assert_eq!(c.conductor, 3),
                3 | 6 => assert_eq!(c.conductor, 9),
                o => panic!("unexpected order {o}"),
            }
        }
    }

    #[test]
    fn orbit_partitions() {
        let fam = dirichlet_family(3, 2).unwrap();
        let orbits = galois_orbits(&fam);
        let mut sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2]);
        let fam5 = dirichlet_family(5, 1).unwrap();
        let orbits5 = galois_orbits(&fam5);
        let mut sizes5: Vec<usize> = orbits5.iter().map(|o| o.len()).collect();
        sizes5.sort_unstable();
        assert_eq!(sizes5, vec![1, 2]);
        // quadratic character: singleton orbit
        for o in &orbits5 {
            if o.len() == 1 {
                assert_eq!(fam5[o[0]].order, 2);
            }
        }
    }

    #[test]
    fn ring_class_orthogonality_and_conductors() {
        let k = build_field(-7).unwrap();
        let g = picard_group(&k, 3, 1).unwrap();
        let fam = ring_class_family(&k, &g).unwrap();
        assert_eq!(fam.len() as i64, g.h);
        let id = g.identity_index();
        for a in 0..g.form_reps.len() {
            let s: Complex64 = fam.iter().map(|r| r.eval(a)).sum();
            let expect = if a == id { g.h as f64 } else { 0.0 };
            assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-9);
        }
        // h(O_K) = 1: only the trivial rho factors through level 0
        assert_eq!(
            fam.iter().filter(|r| r.conductor_exponent == 0).count(),
            1
        );
        assert_eq!(
            fam.iter().filter(|r| r.conductor_exponent == 1).count(),
            3
        );
    }

    #[test]
    fn chardecomposition_counts() {
        // |X_{alpha,beta}| = sum over (x,y) of |P_{x,y}|
        let k = build_field(-7).unwrap();
        let alpha = 1u32;
        let beta = 2u32;
        let g = picard_group(&k, 3, alpha).unwrap();
        let rfam = ring_class_family(&k, &g).unwrap();
        let dfam = dirichlet_family(3, beta).unwrap();
        let total = rfam.len() * dfam.len();
        let mut by_strata = 0usize;
        for x in 0..=alpha {
            for y in 0..=beta {
                let nx = rfam.iter().filter(|r| r.conductor_exponent == x).count();
                let ny = dfam
                    .iter()
                    .filter(|c| c.conductor == 3i64.pow(y))
                    .count();
                by_strata += nx * ny;
            }
        }
        assert_eq!(total, by_strata);
    }

    #[test]
    fn hecke_w_evaluation() {
        let k = build_field(-7).unwrap();
        let g = picard_group(&k, 3, 1).unwrap();
        let rfam = ring_class_family(&k, &g).unwrap();
        let dfam = dirichlet_family(3, 1).unwrap();
        let w = HeckeCharacterW {
            rho: rfam[0].clone(),
            chi: dfam[1].clone(),
        };
        for a in 0..g.form_reps.len() {
            for n in [1i64, 2, 4, 5, 7] {
                let v = w.evaluate(a, n);
                assert!((v.norm() - 1.0).abs() < 1e-12, "unitary on coprime ideals");
            }
            assert_eq!(w.evaluate(a, 6), Complex64::new(0.0, 0.0));
        }
        // rho trivial: W = chi o N
        let wt = HeckeCharacterW {
            rho: rfam
                .iter()
                .find(|r| r.is_trivial())
                .unwrap()
                .clone(),
            chi: dfam[1].clone(),
        };
        for a in 0..g.form_reps.len() {
            assert!((wt.evaluate(a, 5) - dfam[1].eval(5)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_character_eta_chi_squared() {
        let k = build_field(-7).unwrap();
        let eta = eta_character(&k);
        let fam = dirichlet_family(3, 2).unwrap();
        let chi = fam.iter().find(|c| c.order == 6).unwrap();
        let comp = product_character(&eta, &chi.power(2));
        assert_eq!(comp.modulus, 63);
        for x in 1..63i64 {
            let lhs = comp.eval(x);
            let rhs = eta.eval(x) * chi.eval(x) * chi.eval(x);
            assert!((lhs - rhs).norm() < 1e-12);
        }
        // eta odd quadratic mod 7 and chi^2 of conductor 9: product primitive mod 63
        assert!(comp.primitive);
    }
}
