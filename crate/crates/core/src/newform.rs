//! Newform eigenvalue ingestion and the built-in level-11 weight-2 form
//! (the eta product q prod (1-q^n)^2 (1-q^{11n})^2), with Hecke
//! reconstruction from prime data and Deligne-bound sanity checks.

use crate::{Error, Result};

/// A holomorphic newform: integral coefficients a(n), analytic normalization
/// lambda(n) = a(n) / n^((k-1)/2).
#[derive(Clone, Debug)]
pub struct NewformData {
    pub level: i64,
    pub weight: u32,
    /// sign of the functional equation of L(s, pi)
    pub sign: i64,
    /// a[n] for 0 <= n <= bound (a[0] unused)
    pub a: Vec<i64>,
}

impl NewformData {
    pub fn bound(&self) -> i64 {
        self.a.len() as i64 - 1
    }

    pub fn a(&self, n: i64) -> i64 {
        self.a[n as usize]
    }

    pub fn lambda(&self, n: i64) -> f64 {
        self.a[n as usize] as f64 / (n as f64).powf((self.weight as f64 - 1.0) / 2.0)
    }

    /// Check lambda(1) = 1, Hecke multiplicativity, recursion at prime powers
    /// and the Deligne bound off the level.
    pub fn validate(&self, up_to: i64) -> Result<()> {
        let b = self.bound().min(up_to);
        if self.a.len() < 2 || self.a[1] != 1 {
            return Err(Error::Validation("a(1) must be 1".into()));
        }
        let kk = self.weight as i64 - 1;
        for p in primes_up_to(b) {
            if p > b {
                break;
            }
            if self.level % p != 0 {
                let bound = 2.0 * (p as f64).powf(kk as f64 / 2.0);
                if (self.a(p) as f64).abs() > bound + 1e-9 {
                    return Err(Error::Validation(format!(
                        "|a({p})| = {} violates the Deligne bound {bound}",
                        self.a(p)
                    )));
                }
            }
            // recursion a(p^{j+1}) = a(p) a(p^j) - p^{k-1} a(p^{j-1}) off level
            let mut pj = p * p;
            let mut j = 1;
            while pj <= b {
                let expect = if self.level % p == 0 {
                    self.a(p) * self.a(pj / p)
                } else {
                    self.a(p) * self.a(pj / p) - p.pow(kk as u32) * self.a(pj / p / p)
                };
                if self.a(pj) != expect {
                    return Err(Error::Validation(format!(
                        "Hecke recursion fails at {p}^{}",
                        j + 1
                    )));
                }
                pj *= p;
                j += 1;
            }
        }
        // coprime multiplicativity on a sample
        for m in 2..=b.min(60) {
            for n in 2..=b.min(60) {
                if m * n > b || crate::arith::gcd(m, n) != 1 {
                    continue;
                }
                if self.a(m * n) != self.a(m) * self.a(n) {
                    return Err(Error::Validation(format!(
                        "multiplicativity fails at {m} * {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn primes_up_to(b: i64) -> Vec<i64> {
    let b = b.max(1) as usize;
    let mut sieve = vec![true; b + 1];
    let mut out = Vec::new();
    for p in 2..=b {
        if sieve[p] {
            out.push(p as i64);
            let mut m = p * p;
            while m <= b {
                sieve[m] = false;
                m += p;
            }
        }
    }
    out
}

/// Dense coefficients of the weight-2 level-11 eta product
/// q prod_{n>=1} (1 - q^n)^2 (1 - q^{11 n})^2, for 1 <= n <= bound.
pub fn eta_product_11(bound: i64) -> Vec<i64> {
    let b = bound as usize;
    // sparse Euler pentagonal expansion of prod (1 - q^n)
    let mut pent: Vec<(usize, i64)> = vec![(0, 1)];
    let mut k = 1i64;
    loop {
        let g1 = k * (3 * k - 1) / 2;
        let g2 = k * (3 * k + 1) / 2;
        if g1 as usize > b && g2 as usize > b {
            break;
        }
        let s = if k % 2 == 0 { 1 } else { -1 };
        if (g1 as usize) <= b {
            pent.push((g1 as usize, s));
        }
        if (g2 as usize) <= b {
            pent.push((g2 as usize, s));
        }
        k += 1;
    }
    let mul_sparse = |dense: &[i64], scale: usize| -> Vec<i64> {
        let mut out = vec![0i64; b + 1];
        for &(g, c) in &pent {
            let off = g * scale;
            if off > b {
                continue;
            }
            for i in 0..=(b - off) {
                out[i + off] += c * dense[i];
            }
        }
        out
    };
    let mut dense = vec![0i64; b + 1];
    dense[0] = 1;
    dense = mul_sparse(&dense, 1);
    dense = mul_sparse(&dense, 1);
    dense = mul_sparse(&dense, 11);
    dense = mul_sparse(&dense, 11);
    // shift by one power of q
    let mut a = vec![0i64; b + 1];
    for n in 1..=b {
        a[n] = dense[n - 1];
    }
    a
}

/// The built-in level-11 weight-2 newform with coefficients to `bound`.
pub fn builtin_11a(bound: i64) -> NewformData {
    NewformData {
        level: 11,
        weight: 2,
        sign: 1,
        a: eta_product_11(bound),
    }
}

/// Parse the newform text format: header lines `level=`, `weight=`, `sign=`,
/// then lines `n a(n)`; missing composite entries are reconstructed from the
/// supplied primes via the Hecke relations.
pub fn load_newform_str(text: &str, bound: i64) -> Result<NewformData> {
    let mut level = None;
    let mut weight = None;
    let mut sign = None;
    let mut entries: Vec<(i64, i64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("level=") {
            level = Some(v.trim().parse::<i64>().map_err(bad(lineno))?);
        } else if let Some(v) = line.strip_prefix("weight=") {
            weight = Some(v.trim().parse::<u32>().map_err(bad(lineno))?);
        } else if let Some(v) = line.strip_prefix("sign=") {
            sign = Some(v.trim().parse::<i64>().map_err(bad(lineno))?);
        } else {
            let mut it = line.split_whitespace();
            let n = it
                .next()
                .ok_or_else(|| Error::Validation(format!("line {}: missing n", lineno + 1)))?
                .parse::<i64>()
                .map_err(bad(lineno))?;
            let an = it
                .next()
                .ok_or_else(|| Error::Validation(format!("line {}: missing a(n)", lineno + 1)))?
                .parse::<i64>()
                .map_err(bad(lineno))?;
            entries.push((n, an));
        }
    }
    let level = level.ok_or_else(|| Error::Validation("missing level=".into()))?;
    let weight = weight.ok_or_else(|| Error::Validation("missing weight=".into()))?;
    let sign = sign.ok_or_else(|| Error::Validation("missing sign=".into()))?;
    if sign != 1 && sign != -1 {
        return Err(Error::Validation("sign must be +1 or -1".into()));
    }
    // collect prime data and rebuild multiplicatively
    let mut ap: std::collections::HashMap<i64, i64> = std::collections::HashMap::new();
    for &(n, an) in &entries {
        if is_prime_small(n) {
            ap.insert(n, an);
        }
    }
    let kk = weight as i64 - 1;
    let mut a = vec![0i64; bound as usize + 1];
    if bound >= 1 {
        a[1] = 1;
    }
    for p in primes_up_to(bound) {
        let apv = match ap.get(&p) {
            Some(&v) => v,
            None => {
                return Err(Error::Validation(format!(
                    "coefficient supply too short: missing a({p}) for bound {bound}"
                )))
            }
        };
        // fill prime powers
        let mut prev = 1i64; // a(p^0)
        let mut cur = apv; // a(p^1)
        let mut pj = p;
        while pj <= bound {
            a[pj as usize] = cur;
            let next = if level % p == 0 {
                apv * cur
            } else {
                apv.checked_mul(cur)
                    .and_then(|x| x.checked_sub(p.pow(kk as u32).checked_mul(prev)?))
                    .ok_or_else(|| Error::Validation("coefficient overflow".into()))?
            };
            prev = cur;
            cur = next;
            match pj.checked_mul(p) {
                Some(v) => pj = v,
                None => break,
            }
        }
    }
    // multiplicative fill by smallest prime factor
    let mut spf = vec![0i64; bound as usize + 1];
    for p in primes_up_to(bound) {
        let mut m = p;
        while m <= bound {
            if spf[m as usize] == 0 {
                spf[m as usize] = p;
            }
            m += p;
        }
    }
    for n in 2..=bound {
        let p = spf[n as usize];
        let mut pk = p;
        let mut m = n / p;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        if m > 1 {
            a[n as usize] = a[pk as usize] * a[m as usize];
        }
    }
    // declared non-prime entries must agree
    for &(n, an) in &entries {
        if n <= bound && a[n as usize] != an {
            return Err(Error::Validation(format!(
                "declared a({n}) = {an} conflicts with Hecke reconstruction {}",
                a[n as usize]
            )));
        }
    }
    let nf = NewformData {
        level,
        weight,
        sign,
        a,
    };
    nf.validate(bound.min(2000))?;
    Ok(nf)
}

fn is_prime_small(n: i64) -> bool {
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

fn bad(lineno: usize) -> impl Fn(std::num::ParseIntError) -> Error {
    move |e| Error::Validation(format!("line {}: {e}", lineno + 1))
}

/// Load from a file path, or the built-in "builtin:11a".
pub fn load_newform(path: &str, bound: i64) -> Result<NewformData> {
    if path == "builtin:11a" {
        return Ok(builtin_11a(bound));
    }
    let text = std::fs::read_to_string(path)?;
    load_newform_str(&text, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_product_values() {
        let f = builtin_11a(200);
        assert_eq!(f.a(1), 1);
        assert_eq!(f.a(2), -2);
        assert_eq!(f.a(3), -1);
        assert_eq!(f.a(4), 2);
        assert_eq!(f.a(5), 1);
        assert_eq!(f.a(11), 1);
        assert_eq!(f.a(12), -2);
        assert!((f.lambda(2) + 2.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((f.lambda(6) - f.lambda(2) * f.lambda(3)).abs() < 1e-12);
        assert!((f.lambda(4) - (f.lambda(2) * f.lambda(2) - 1.0)).abs() < 1e-12);
        f.validate(200).unwrap();
    }

    #[test]
    fn reconstruction_from_primes_matches_eta() {
        let f = builtin_11a(500);
        let mut text = String::from("level=11\nweight=2\nsign=1\n");
        for p in primes_up_to(500) {
            text.push_str(&format!("{} {}\n", p, f.a(p)));
        }
        let g = load_newform_str(&text, 500).unwrap();
        assert_eq!(f.a, g.a);
    }

    #[test]
    fn ingest_rejects_bad_data() {
        assert!(load_newform_str("weight=2\nsign=1\n2 -2\n", 10).is_err());
        // Deligne violation at 3 (|a(3)| > 2 sqrt 3)
        let t = "level=11\nweight=2\nsign=1\n2 -2\n3 9\n5 1\n7 -2\n";
        assert!(load_newform_str(t, 10).is_err());
        // conflicting composite value
        let t2 = "level=11\nweight=2\nsign=1\n2 -2\n3 -1\n5 1\n7 -2\n6 5\n";
        assert!(load_newform_str(t2, 10).is_err());
        // short supply
        let t3 = "level=11\nweight=2\nsign=1\n2 -2\n";
        assert!(load_newform_str(t3, 10).is_err());
    }
}
