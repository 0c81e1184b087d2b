//! Exact arithmetic for imaginary quadratic orders: binary quadratic forms,
//! Gaussian composition, Picard groups Pic(O_c), the Dedekind class-number
//! formula, and ideal counts r_A(n) by class.

use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

/// Kronecker symbol (d|n), fully general (n may be 0, negative handled via |n|
/// with the sign convention for d mod 4).
pub fn kronecker(d: i64, n: i64) -> i64 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut a = d;
    let mut b = n;
    let mut k = 1i64;
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    // pull out the 2-part of b via the (a|2) supplement
    let mut v = 0;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    if v % 2 == 1 {
        let m = a.rem_euclid(8);
        if m == 3 || m == 5 {
            k = -k;
        }
    }
    a = a.rem_euclid(b);
    while a != 0 {
        let mut va = 0;
        while a % 2 == 0 {
            a /= 2;
            va += 1;
        }
        if va % 2 == 1 {
            let m = b.rem_euclid(8);
            if m == 3 || m == 5 {
                k = -k;
            }
        }
        // quadratic reciprocity for odd positive a, b
        if a.rem_euclid(4) == 3 && b.rem_euclid(4) == 3 {
            k = -k;
        }
        let t = a;
        a = b.rem_euclid(t);
        b = t;
    }
    if b == 1 {
        k
    } else {
        0
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g, g >= 0.
pub fn extgcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = extgcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Inverse of a mod m (m > 0, gcd(a, m) = 1).
pub fn inv_mod(a: i64, m: i64) -> i64 {
    let (g, x, _) = extgcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1, "inv_mod: {a} not invertible mod {m}");
    x.rem_euclid(m)
}

pub fn pow_mod(mut b: i64, mut e: u64, m: i64) -> i64 {
    let mut r = 1i128;
    let mm = m as i128;
    let mut bb = (b.rem_euclid(m)) as i128;
    b = 0;
    let _ = b;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    r as i64
}

/// Primitive positive-definite binary quadratic form a x^2 + b x y + c y^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// Standard reduction to the unique reduced representative
    /// (|b| <= a <= c, and b >= 0 when |b| = a or a = c).
    pub fn reduce(mut self) -> QuadForm {
        loop {
            if self.a > self.c {
                self = QuadForm {
                    a: self.c,
                    b: -self.b,
                    c: self.a,
                };
            }
            if self.b.abs() > self.a {
                // b -> b + 2ka into [-a, a]
                let k = (-self.b).div_euclid(2 * self.a)
                    + if (-self.b).rem_euclid(2 * self.a) > self.a {
                        1
                    } else {
                        0
                    };
                let nb = self.b + 2 * k * self.a;
                let nc = (nb * nb - self.disc()) / (4 * self.a);
                self = QuadForm {
                    a: self.a,
                    b: nb,
                    c: nc,
                };
                continue;
            }
            if self.a == self.c && self.b < 0 {
                self.b = -self.b;
            }
            if self.b == -self.a {
                self.b = self.a;
                // c unchanged: (b^2 - D)/4a invariant under b -> -b
            }
            return self;
        }
    }

    /// Apply an SL2(Z) substitution (x, y) -> (p x + q y, r x + s y).
    fn transform(&self, p: i64, q: i64, r: i64, s: i64) -> QuadForm {
        debug_assert_eq!(p * s - q * r, 1);
        let a = self.eval(p, r);
        let c = self.eval(q, s);
        let b = 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s;
        QuadForm { a, b, c }
    }

    /// An equivalent form whose leading coefficient is coprime to m.
    fn with_leading_coprime_to(&self, m: i64) -> QuadForm {
        if gcd(self.a, m) == 1 {
            return *self;
        }
        for bound in 1..64i64 {
            for x in -bound..=bound {
                for y in -bound..=bound {
                    if x.abs() != bound && y.abs() != bound {
                        continue;
                    }
                    if gcd(x, y) != 1 {
                        continue;
                    }
                    let v = self.eval(x, y);
                    if v != 0 && gcd(v, m) == 1 {
                        let (_, s, t) = extgcd(x, y);
                        // matrix [[x, -t],[y, s]], det = x s + t y = 1
                        return self.transform(x, -t, y, s);
                    }
                }
            }
        }
        unreachable!("primitive form represents values coprime to {m}")
    }
}

/// Principal (identity) form of discriminant d < 0.
pub fn principal_form(d: i64) -> QuadForm {
    let e = d.rem_euclid(2);
    QuadForm {
        a: 1,
        b: e,
        c: (e * e - d) / 4,
    }
    .reduce()
}

/// Gaussian (Dirichlet) composition of two primitive forms of equal
/// discriminant, as a reduced form.
pub fn compose(f1: QuadForm, f2: QuadForm) -> QuadForm {
    let d = f1.disc();
    debug_assert_eq!(d, f2.disc());
    // move to united representatives: gcd(a1, a2) = 1
    let g1 = f1;
    let g2 = f2.with_leading_coprime_to(f1.a);
    let (a1, b1) = (g1.a, g1.b);
    let (a2, b2) = (g2.a, g2.b);
    debug_assert_eq!(gcd(a1, a2), 1);
    // b3 = b1 mod 2 a1, b3 = b2 mod 2 a2 (solvable: b1, b2 have the parity of d)
    let t = ((b2 - b1) / 2).rem_euclid(a2) * inv_mod(a1.rem_euclid(a2), a2) % a2;
    let a3 = a1 * a2;
    let b3 = b1 + 2 * a1 * t;
    let c3 = (b3 * b3 - d) / (4 * a3);
    debug_assert_eq!((b3 * b3 - d) % (4 * a3), 0);
    QuadForm {
        a: a3,
        b: b3,
        c: c3,
    }
    .reduce()
}

pub fn form_inverse(f: QuadForm) -> QuadForm {
    QuadForm {
        a: f.a,
        b: -f.b,
        c: f.c,
    }
    .reduce()
}

/// All reduced primitive forms of discriminant d < 0.
pub fn reduced_forms(d: i64) -> Vec<QuadForm> {
    assert!(d < 0 && (d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1));
    let mut out = Vec::new();
    let mut a = 1i64;
    while 4 * a * a <= -d + a * a {
        // |b| <= a, b = d mod 2
        let mut b = -a + (d.rem_euclid(2) + a.rem_euclid(2)).rem_euclid(2);
        while b <= a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a {
                    let f = QuadForm { a, b, c };
                    // primitivity
                    if gcd(gcd(a, b), c) == 1 && f.reduce() == f {
                        out.push(f);
                    }
                }
            }
            b += 2;
        }
        a += 1;
    }
    out.sort();
    out
}

/// The imaginary quadratic field K = Q(sqrt(disc)).
#[derive(Clone, Debug)]
pub struct QuadraticFieldData {
    pub disc: i64,
    pub abs_rel_disc: i64,
    pub class_number_maximal: i64,
}

impl QuadraticFieldData {
    /// eta(n) = Kronecker(disc, n); completely multiplicative, 0 iff
    /// gcd(n, disc) > 1.
    pub fn eta(&self, n: i64) -> i64 {
        kronecker(self.disc, n)
    }
}

fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let squarefree = |m: i64| {
        let m = m.abs();
        let mut k = 2;
        while k * k <= m {
            if m % (k * k) == 0 {
                return false;
            }
            k += 1;
        }
        true
    };
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let q = d / 4;
            squarefree(q) && (q.rem_euclid(4) == 2 || q.rem_euclid(4) == 3)
        }
        _ => false,
    }
}

pub fn build_field(disc: i64) -> Result<QuadraticFieldData> {
    if !is_fundamental(disc) {
        return Err(Error::Validation(format!(
            "discriminant {disc} is not a negative fundamental discriminant"
        )));
    }
    let h = reduced_forms(disc).len() as i64;
    Ok(QuadraticFieldData {
        disc,
        abs_rel_disc: -disc,
        class_number_maximal: h,
    })
}

/// Pic(O_c) for the order of conductor c, as a form class group with an
/// explicit basis of its cyclic factors.
#[derive(Clone, Debug)]
pub struct OrderClassData {
    pub disc_field: i64,
    pub conductor_exponent: u32,
    pub conductor: i64,
    pub disc_order: i64,
    pub form_reps: Vec<QuadForm>,
    pub h: i64,
    /// basis elements (indices into form_reps) and their orders; the group is
    /// the direct product of the cyclic groups they generate
    pub basis: Vec<usize>,
    pub group_structure: Vec<i64>,
    /// exponent coordinates of every class on the basis
    pub coords: Vec<Vec<i64>>,
    index: HashMap<QuadForm, usize>,
}

impl OrderClassData {
    pub fn class_index(&self, f: QuadForm) -> usize {
        *self
            .index
            .get(&f.reduce())
            .unwrap_or_else(|| panic!("form {f:?} not of discriminant {}", self.disc_order))
    }

    pub fn identity_index(&self) -> usize {
        self.class_index(principal_form(self.disc_order))
    }

    pub fn compose_indices(&self, i: usize, j: usize) -> usize {
        self.class_index(compose(self.form_reps[i], self.form_reps[j]))
    }

    /// Unit weight of the order: #(O^x)/2 extra automorphisms.
    pub fn unit_weight(&self) -> i64 {
        match self.disc_order {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

fn group_basis(
    elems: &[QuadForm],
    index: &HashMap<QuadForm, usize>,
    id: usize,
) -> (Vec<usize>, Vec<i64>, Vec<Vec<i64>>) {
    let h = elems.len();
    let mul = |i: usize, j: usize| -> usize { index[&compose(elems[i], elems[j])] };
    let order_of = |i: usize| -> i64 {
        let mut o = 1i64;
        let mut x = i;
        while x != id {
            x = mul(x, i);
            o += 1;
        }
        o
    };
    // Sylow-by-Sylow basis extraction; desk scale (h <= a few hundred), so a
    // recursive max-order-element split on each Sylow subgroup is plenty.
    let mut n = h as i64;
    let mut primes = Vec::new();
    let mut q = 2i64;
    while q * q <= n {
        if n % q == 0 {
            primes.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    let pow_elem = |i: usize, mut e: i64| -> usize {
        let mut r = id;
        let mut b = i;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let mut basis: Vec<usize> = Vec::new();
    let mut orders: Vec<i64> = Vec::new();
    for &q in &primes {
        let mut vq = 0;
        let mut hh = h as i64;
        while hh % q == 0 {
            hh /= q;
            vq += 1;
        }
        let cof = (h as i64) / q.pow(vq);
        // Sylow q-subgroup = image of x -> x^cof
        let mut sylow: Vec<usize> = Vec::new();
        for i in 0..h {
            let y = pow_elem(i, cof);
            if !sylow.contains(&y) {
                sylow.push(y);
            }
        }
        // recursively split: pick max-order g, then lift a basis of Q/<g>
        fn split(
            group: &[usize],
            id: usize,
            mul: &dyn Fn(usize, usize) -> usize,
            order_of: &dyn Fn(usize) -> i64,
            pow_elem: &dyn Fn(usize, i64) -> usize,
        ) -> Vec<(usize, i64)> {
            if group.len() == 1 {
                return vec![];
            }
            let &g = group
                .iter()
                .max_by_key(|&&x| order_of(x))
                .expect("nonempty");
            let e = order_of(g);
            // cosets of <g>
            let mut cyc = vec![id];
            let mut x = g;
            while x != id {
                cyc.push(x);
                x = mul(x, g);
            }
            let mut coset_rep: HashMap<usize, usize> = HashMap::new();
            for &a in group {
                let rep = cyc.iter().map(|&c| mul(a, c)).min().expect("nonempty");
                coset_rep.insert(a, rep);
            }
            let mut quotient: Vec<usize> = coset_rep.values().cloned().collect();
            quotient.sort_unstable();
            quotient.dedup();
            let qid = coset_rep[&id];
            let qmul = |a: usize, b: usize| -> usize { coset_rep[&mul(a, b)] };
            let qorder = |a: usize| -> i64 {
                let mut o = 1i64;
                let mut x = a;
                while x != qid {
                    x = qmul(x, a);
                    o += 1;
                }
                o
            };
            let qpow = |a: usize, mut k: i64| -> usize {
                let mut r = qid;
                let mut b = a;
                while k > 0 {
                    if k & 1 == 1 {
                        r = qmul(r, b);
                    }
                    b = qmul(b, b);
                    k >>= 1;
                }
                r
            };
            let sub = split(&quotient, qid, &qmul, &qorder, &qpow);
            let mut out = vec![(g, e)];
            for (xbar, d) in sub {
                // lift: adjust xbar by a power of g so its order drops to d
                let xd = pow_elem(xbar, d);
                // xd lies in <g>: find s with g^s = xd
                let mut s = 0i64;
                let mut y = id;
                while y != xd {
                    y = mul(y, g);
                    s += 1;
                }
                debug_assert_eq!(s % d, 0);
                let t = (e - s / d).rem_euclid(e);
                let lifted = mul(xbar, pow_elem(g, t));
                debug_assert_eq!(order_of(lifted), d);
                out.push((lifted, d));
            }
            out
        }
        let parts = split(
            &sylow,
            id,
            &|a, b| mul(a, b),
            &|a| order_of(a),
            &|a, e| pow_elem(a, e),
        );
        for (g, o) in parts {
            basis.push(g);
            orders.push(o);
        }
    }
    if basis.is_empty() {
        basis.push(id);
        orders.push(1);
    }
    // coordinates of every element: enumerate all exponent tuples
    let mut coords = vec![Vec::new(); h];
    let k = basis.len();
    let mut tuple = vec![0i64; k];
    loop {
        let mut x = id;
        for (i, &t) in tuple.iter().enumerate() {
            x = mul(x, pow_elem(basis[i], t));
        }
        if coords[x].is_empty() {
            coords[x] = tuple.clone();
        }
        // increment
        let mut i = 0;
        loop {
            if i == k {
                // verify every element was reached
                debug_assert!(coords.iter().all(|c| !c.is_empty() || k == 0));
                return (basis, orders, coords);
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

/// Pic(O_{p^alpha}) via reduced forms of discriminant disc * p^(2 alpha).
pub fn picard_group(K: &QuadraticFieldData, p: i64, alpha: u32) -> Result<OrderClassData> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::Unsupported(format!("p = {p} must be an odd prime")));
    }
    if K.disc % p == 0 {
        return Err(Error::Unsupported(format!(
            "p = {p} divides the discriminant {}; the relative discriminant must be prime to p",
            K.disc
        )));
    }
    picard_group_conductor(K, p.pow(alpha), alpha)
}

/// Test-only general-conductor variant (also serves alpha = 0 uniformly).
pub fn picard_group_conductor(
    K: &QuadraticFieldData,
    c: i64,
    conductor_exponent: u32,
) -> Result<OrderClassData> {
    let d = K.disc * c * c;
    let form_reps = reduced_forms(d);
    let h = form_reps.len() as i64;
    let index: HashMap<QuadForm, usize> = form_reps
        .iter()
        .enumerate()
        .map(|(i, &f)| (f, i))
        .collect();
    let id = index[&principal_form(d)];
    let (basis, group_structure, coords) = group_basis(&form_reps, &index, id);
    Ok(OrderClassData {
        disc_field: K.disc,
        conductor_exponent,
        conductor: c,
        disc_order: d,
        form_reps,
        h,
        basis,
        group_structure,
        coords,
        index,
    })
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Dedekind's formula for h(O_c), c = p^alpha, as an exact integer.
pub fn dedekind_h(K: &QuadraticFieldData, p: i64, alpha: u32) -> Result<i64> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::Unsupported(format!("p = {p} must be an odd prime")));
    }
    dedekind_h_conductor(K, p.pow(alpha))
}

/// General-conductor Dedekind formula (test-only beyond prime powers):
/// h(O_c) = h(O_K) * c * prod_{l | c} (1 - eta(l)/l) / [O_K^x : O_c^x].
pub fn dedekind_h_conductor(K: &QuadraticFieldData, c: i64) -> Result<i64> {
    if c <= 0 {
        return Err(Error::Validation("conductor must be positive".into()));
    }
    let unit_index = if c == 1 {
        1
    } else {
        match K.disc {
            -3 => 3,
            -4 => 2,
            _ => 1,
        }
    };
    // exact rational: h_K * c * prod (1 - eta(l)/l) = h_K * c * prod (l - eta(l)) / l
    let mut num = K.class_number_maximal * c;
    let mut den = 1i64;
    let mut m = c;
    let mut l = 2i64;
    while l * l <= m {
        if m % l == 0 {
            num = num / l * (l - K.eta(l)); // c contributes at least one factor l
            den *= 1;
            while m % l == 0 {
                m /= l;
            }
        }
        l += 1;
    }
    if m > 1 {
        num = num / m * (m - K.eta(m));
    }
    den *= unit_index;
    if num % den != 0 {
        return Err(Error::Numerical(format!(
            "Dedekind formula non-integral for disc {}, c {}: {}/{}",
            K.disc, c, num, den
        )));
    }
    Ok(num / den)
}

/// Counts r_A(n) of representations of n by the form of class A, weighted by
/// the unit group of the order (raw lattice counts / w).
#[derive(Clone, Debug)]
pub struct IdealCountTable {
    pub bound: i64,
    /// counts[class][n]
    pub counts: Vec<Vec<u32>>,
}

impl IdealCountTable {
    pub fn r(&self, class: usize, n: i64) -> i64 {
        self.counts[class][n as usize] as i64
    }

    pub fn r_total(&self, n: i64) -> i64 {
        self.counts.iter().map(|c| c[n as usize] as i64).sum()
    }
}

pub fn ideal_counts(order: &OrderClassData, bound: i64) -> IdealCountTable {
    let w = order.unit_weight();
    let d = order.disc_order;
    let mut counts = Vec::with_capacity(order.form_reps.len());
    for f in &order.form_reps {
        let mut row = vec![0u32; (bound + 1) as usize];
        // positive definite: a x^2 + b x y + c y^2 <= B bounds y by
        // 4 a B / |d| >= y^2
        let ymax = ((4.0 * f.a as f64 * bound as f64 / (-d) as f64).sqrt() as i64) + 1;
        for y in -ymax..=ymax {
            // solve a x^2 + (b y) x + (c y^2 - B) <= 0
            let bb = f.b * y;
            let disc = bb * bb - 4 * f.a * (f.c * y * y - bound);
            if disc < 0 {
                continue;
            }
            let sq = (disc as f64).sqrt() as i64 + 2;
            let lo = (-bb - sq) / (2 * f.a) - 2;
            let hi = (-bb + sq) / (2 * f.a) + 2;
            for x in lo..=hi {
                let v = f.eval(x, y);
                if v >= 1 && v <= bound {
                    row[v as usize] += 1;
                }
            }
        }
        debug_assert!(row.iter().all(|&r| r as i64 % w == 0));
        for r in &mut row {
            *r /= w as u32;
        }
        counts.push(row);
    }
    IdealCountTable {
        bound,
        counts,
    }
}

/// r_rho(n) = sum_A rho(A) r_A(n) for a ring class character rho given by its
/// values on the classes.
pub fn r_rho(table: &IdealCountTable, rho_values: &[Complex64], n: i64) -> Result<Complex64> {
    if rho_values.len() != table.counts.len() {
        return Err(Error::Validation(format!(
            "character on {} classes, table has {}",
            rho_values.len(),
            table.counts.len()
        )));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for (a, v) in rho_values.iter().enumerate() {
        let r = table.counts[a][n as usize];
        if r > 0 {
            s += v * r as f64;
        }
    }
    Ok(s)
}

/// The natural surjection Pic(O_{p^alpha}) -> Pic(O_{p^x}) on class indices:
/// an ideal prime to p generates the same ideal in the larger order. On a
/// form (a, b, c) with gcd(a, p) = 1 the image has leading coefficient a and
/// middle coefficient computed exactly from the module generated by
/// {a, a w, u + p^(alpha-x) w} in the basis {1, w} of O_{p^x}.
pub fn level_map(from: &OrderClassData, to: &OrderClassData) -> Result<Vec<usize>> {
    if from.disc_field != to.disc_field {
        return Err(Error::Validation("field mismatch in level map".into()));
    }
    if from.conductor % to.conductor != 0 {
        return Err(Error::Validation(
            "level map needs conductor of target dividing source".into(),
        ));
    }
    let pk = from.conductor / to.conductor; // p^(alpha - x)
    let mut out = Vec::with_capacity(from.form_reps.len());
    for f in &from.form_reps {
        let g = f.with_leading_coprime_to(pk * 2); // also keep a odd-safe: only p-coprimality needed
        let a = g.a;
        let dx = to.disc_order;
        let e = dx.rem_euclid(2);
        // u = (-b - pk * e) / 2, v = u * inv(pk) mod a, image b'' = -2v - e
        let u = (-g.b - pk * e) / 2;
        debug_assert_eq!((-g.b - pk * e) % 2, 0);
        let v = ((u.rem_euclid(a)) * inv_mod(pk.rem_euclid(a).max(1), a)).rem_euclid(a);
        let b2 = -2 * v - e;
        let num = b2 * b2 - dx;
        debug_assert_eq!(num % (4 * a), 0);
        let img = QuadForm {
            a,
            b: b2,
            c: num / (4 * a),
        }
        .reduce();
        out.push(to.class_index(img));
    }
    Ok(out)
}

/// Indices of classes of `from` in the kernel of the map to `to`.
pub fn level_kernel(from: &OrderClassData, to: &OrderClassData) -> Result<Vec<usize>> {
    let map = level_map(from, to)?;
    let id = to.identity_index();
    Ok((0..from.form_reps.len())
        .filter(|&i| map[i] == id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_agrees_with_legendre() {
        // odd primes: Euler criterion
        for &p in &[3i64, 5, 7, 11, 13, 17, 19] {
            for a in -20..20i64 {
                let k = kronecker(a, p);
                let e = pow_mod(a.rem_euclid(p), ((p - 1) / 2) as u64, p);
                let e = if e == p - 1 { -1 } else { e };
                assert_eq!(k, e, "({a}|{p})");
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for d in [-3i64, -4, -7, -8, -11] {
            for m in 1..60i64 {
                for n in 1..60i64 {
                    assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
                }
            }
        }
    }

    #[test]
    fn field_construction() {
        assert_eq!(build_field(-4).unwrap().class_number_maximal, 1);
        assert_eq!(build_field(-3).unwrap().eta(2), -1);
        assert_eq!(build_field(-4).unwrap().eta(1), 1);
        assert_eq!(build_field(-23).unwrap().class_number_maximal, 3);
        assert!(build_field(-12).is_err());
        assert!(build_field(5).is_err());
    }

    #[test]
    fn class_numbers_match_dedekind() {
        for &disc in &[-3i64, -4, -7, -8, -11] {
            let k = build_field(disc).unwrap();
            for &p in &[3i64, 5] {
                if disc % p == 0 {
                    continue;
                }
                for alpha in 0..=2u32 {
                    let g = picard_group(&k, p, alpha).unwrap();
                    let h = dedekind_h(&k, p, alpha).unwrap();
                    assert_eq!(g.h, h, "disc {disc}, p {p}, alpha {alpha}");
                    assert_eq!(
                        g.group_structure.iter().product::<i64>(),
                        h,
                        "structure product"
                    );
                }
            }
        }
    }

    #[test]
    fn dedekind_examples() {
        let k4 = build_field(-4).unwrap();
        assert_eq!(dedekind_h(&k4, 5, 1).unwrap(), 2);
        assert_eq!(dedekind_h_conductor(&k4, 1).unwrap(), 1);
        let k3 = build_field(-3).unwrap();
        assert_eq!(dedekind_h_conductor(&k3, 2).unwrap(), 1);
        assert_eq!(
            picard_group_conductor(&k3, 2, 0).unwrap().h,
            1,
            "disc -12 form count"
        );
    }

    #[test]
    fn composition_group_axioms() {
        for &(disc, p, alpha) in &[(-7i64, 3i64, 1u32), (-4, 5, 1), (-3, 5, 2), (-11, 3, 2)] {
            let k = build_field(disc).unwrap();
            let g = picard_group(&k, p, alpha).unwrap();
            let id = g.identity_index();
            let n = g.form_reps.len();
            if (n as i64) > 64 {
                continue;
            }
            for i in 0..n {
                assert_eq!(g.compose_indices(i, id), i);
                let inv = g.class_index(form_inverse(g.form_reps[i]));
                assert_eq!(g.compose_indices(i, inv), id);
                for j in 0..n {
                    let ij = g.compose_indices(i, j);
                    assert_eq!(ij, g.compose_indices(j, i));
                    for l in 0..n {
                        assert_eq!(
                            g.compose_indices(ij, l),
                            g.compose_indices(i, g.compose_indices(j, l)),
                            "associativity"
                        );
                    }
                }
            }
            // declared orders
            for (bi, (&b, &o)) in g.basis.iter().zip(&g.group_structure).enumerate() {
                let mut x = b;
                let mut ord = 1;
                while x != id {
                    x = g.compose_indices(x, b);
                    ord += 1;
                }
                assert_eq!(ord, o, "basis element {bi}");
            }
        }
    }

    #[test]
    fn ideal_counts_against_divisor_sum() {
        // maximal order: #ideals of norm n = sum_{d | n} eta(d)
        for &disc in &[-3i64, -4, -7, -8, -11] {
            let k = build_field(disc).unwrap();
            let g = picard_group_conductor(&k, 1, 0).unwrap();
            let t = ideal_counts(&g, 300);
            for n in 1..=300i64 {
                let expect: i64 = (1..=n).filter(|d| n % d == 0).map(|d| k.eta(d)).sum();
                assert_eq!(t.r_total(n), expect, "disc {disc}, n {n}");
            }
        }
    }

    #[test]
    fn ideal_count_examples() {
        let k = build_field(-4).unwrap();
        let g = picard_group_conductor(&k, 1, 0).unwrap();
        let t = ideal_counts(&g, 10);
        assert_eq!(t.r_total(5), 2);
        assert_eq!(t.r_total(3), 0);
        assert_eq!(t.r(g.identity_index(), 1), 1);
        for a in 0..g.form_reps.len() {
            if a != g.identity_index() {
                assert_eq!(t.r(a, 1), 0);
            }
        }
    }

    #[test]
    fn r_rho_triangle_and_trivial() {
        let k = build_field(-7).unwrap();
        let g = picard_group(&k, 3, 1).unwrap();
        assert_eq!(g.h, 4);
        let t = ideal_counts(&g, 200);
        let triv = vec![Complex64::new(1.0, 0.0); g.form_reps.len()];
        // an order-4 character on the cyclic basis
        let i4 = Complex64::new(0.0, 1.0);
        let vals: Vec<Complex64> = (0..g.form_reps.len())
            .map(|a| i4.powi(g.coords[a][0] as i32))
            .collect();
        for n in 1..=200i64 {
            let rt = r_rho(&t, &triv, n).unwrap();
            assert!((rt.re - t.r_total(n) as f64).abs() < 1e-12);
            let rv = r_rho(&t, &vals, n).unwrap();
            assert!(rv.norm() <= t.r_total(n) as f64 + 1e-12);
        }
    }

    #[test]
    fn level_map_is_surjective_homomorphism() {
        for &(disc, p) in &[(-7i64, 3i64), (-4, 5), (-11, 3), (-8, 5)] {
            let k = build_field(disc).unwrap();
            let g2 = picard_group(&k, p, 2).unwrap();
            for x in 0..=1u32 {
                let gx = picard_group(&k, p, x).unwrap();
                let map = level_map(&g2, &gx).unwrap();
                // homomorphism
                let n = g2.form_reps.len();
                for i in 0..n.min(12) {
                    for j in 0..n.min(12) {
                        assert_eq!(
                            map[g2.compose_indices(i, j)],
                            gx.compose_indices(map[i], map[j])
                        );
                    }
                }
                // kernel size
                let ker = level_kernel(&g2, &gx).unwrap();
                assert_eq!(ker.len() as i64 * gx.h, g2.h, "disc {disc}, p {p}, x {x}");
                // surjective
                let mut img: Vec<usize> = map.clone();
                img.sort_unstable();
                img.dedup();
                assert_eq!(img.len(), gx.form_reps.len());
            }
        }
    }

    #[test]
    fn picard_rejects_bad_p() {
        let k = build_field(-7).unwrap();
        assert!(picard_group(&k, 2, 1).is_err());
        assert!(picard_group(&k, 7, 1).is_err());
    }
}
