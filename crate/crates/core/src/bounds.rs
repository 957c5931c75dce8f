//! Closed-form bounds: Singleton-type limits, qTB and fqTB distance bounds, decoding radii,
//! q-ary entropy, the Vandermonde-minor uncertainty check, and the appendix inequalities.
//!
//! Expressions of the form a + b√c are kept exact in [`Surd`]; only the list-decoding
//! radius e', which raises a rational to an irrational power, is computed in floating point.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{is_prime, prime_factors, FieldCtx};
use crate::linalg::Matrix;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// a + b√c with rational a, b and c ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl Surd {
    pub fn rational(a: BigRational) -> Self {
        Surd { a, b: BigRational::zero(), c: BigRational::zero() }
    }

    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Self {
        assert!(!c.is_negative(), "radicand must be nonnegative");
        Surd { a, b, c }
    }

    pub fn scale(&self, k: &BigRational) -> Surd {
        Surd { a: &self.a * k, b: &self.b * k, c: self.c.clone() }
    }

    pub fn add_rational(&self, t: &BigRational) -> Surd {
        Surd { a: &self.a + t, b: self.b.clone(), c: self.c.clone() }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * self.c.to_f64().unwrap().sqrt()
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, t: &BigRational) -> Ordering {
        let u = &self.a - t;
        if self.b.is_zero() || self.c.is_zero() {
            return u.cmp(&BigRational::zero());
        }
        let v_sign = self.b.cmp(&BigRational::zero());
        let u_sign = u.cmp(&BigRational::zero());
        if u_sign == Ordering::Equal {
            return v_sign;
        }
        if u_sign == v_sign {
            return u_sign;
        }
        // opposite signs: compare u^2 with b^2 c
        let lhs = &u * &u;
        let rhs = &self.b * &self.b * &self.c;
        match u_sign {
            Ordering::Greater => lhs.cmp(&rhs),
            _ => rhs.cmp(&lhs),
        }
    }

    pub fn floor(&self) -> BigInt {
        let mut k = BigInt::from(self.to_f64().floor() as i64);
        while self.cmp_rational(&BigRational::from_integer(k.clone())) == Ordering::Less {
            k -= 1;
        }
        while self.cmp_rational(&BigRational::from_integer(&k + 1)) != Ordering::Less {
            k += 1;
        }
        k
    }

    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if self.cmp_rational(&BigRational::from_integer(f.clone())) == Ordering::Equal {
            f
        } else {
            f + 1
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})*sqrt({})", self.a, self.b, self.c)
    }
}

fn is_prime_power(q: u64) -> bool {
    q >= 2 && prime_factors(q).len() == 1
}

/// Shared checks for (q, r, ℓ): prime power q, r ≥ 2 dividing q-1, ⌈q/2⌉ ≤ ℓ < q.
fn check_qtb(q: u64, r: usize, ell: usize) -> Result<()> {
    if !is_prime_power(q) {
        return Err(Error::InvalidParameter(format!("q = {q} is not a prime power")));
    }
    if r < 2 || (q - 1) % r as u64 != 0 {
        return Err(Error::NotADivisor { r, order: q as usize - 1 });
    }
    if ell == 0 || ell as u64 >= q {
        return Err(Error::BadDegree { q: q as u32, ell });
    }
    if 2 * ell as u64 <= q - 1 {
        return Err(Error::DegreeTooSmall { q: q as u32, ell });
    }
    Ok(())
}

fn require_prime_r(r: usize) -> Result<()> {
    if !is_prime(r as u64) {
        return Err(Error::HypothesisViolated(format!("r = {r} is not prime")));
    }
    Ok(())
}

/// Largest d with k ≤ n - 2(d - 1).
pub fn singleton_quantum(n: usize, k: usize) -> usize {
    (n - k) / 2 + 1
}

/// Largest d with k ≤ n - (d - 1).
pub fn singleton_classical(n: usize, k: usize) -> usize {
    n - k + 1
}

/// n - 2(d-1) - ⌊(n-(d-1))/r⌋ - ⌊(n - 2(d-1) - ⌊(n-(d-1))/r⌋)/r⌋.
pub fn singleton_qlrc_general(n: usize, d: usize, r: usize) -> i64 {
    let (n, d, r) = (n as i64, d as i64, r as i64);
    let a = (n - (d - 1)).div_euclid(r);
    let rest = n - 2 * (d - 1) - a;
    rest - rest.div_euclid(r)
}

/// (1 - 2/r) n - 2(d - 1 - ⌈(d-1)/(r-1)⌉), for recovery sets that partition the positions.
pub fn singleton_qlrc_partition(n: usize, d: usize, r: usize) -> BigRational {
    let dm = d as i64 - 1;
    let ceil = (dm + r as i64 - 2).div_euclid(r as i64 - 1);
    (int(1) - rat(2, r as i64)) * int(n as i64) - int(2 * (dm - ceil))
}

/// Largest d allowed by the partition bound at dimension k.
pub fn singleton_partition_cap(n: usize, k: usize, r: usize) -> usize {
    // r times the bound, in integers; nonincreasing in d
    let allowed = |d: usize| {
        let (n, dm, r) = (n as i128, d as i128 - 1, r as i128);
        let ceil = (dm + r - 2).div_euclid(r - 1);
        (r - 2) * n - 2 * r * (dm - ceil) >= k as i128 * r
    };
    let (mut lo, mut hi) = (1, n + 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if allowed(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// (q-1)(1 - 1/(2r) - √(1/(4r²) + ((r-1)/r)(ℓ-1)/(q-1))).
pub fn qtb_distance_lower(q: u64, r: usize, ell: usize) -> Result<Surd> {
    check_qtb(q, r, ell)?;
    require_prime_r(r)?;
    Ok(johnson_like(q, r, ell as i64 - 1))
}

/// (q-1)(1 - 1/(2r) - √(1/(4r²) + ((r-1)/r) x/(q-1))).
fn johnson_like(q: u64, r: usize, x: i64) -> Surd {
    let n = int(q as i64 - 1);
    let r = r as i64;
    let a = &n * (int(1) - rat(1, 2 * r));
    let c = rat(1, 4 * r * r) + rat(r - 1, r) * int(x) / &n;
    Surd::new(a, -n, c)
}

/// (1 - 1/r)(q - ℓ) + 5.
pub fn qtb_distance_upper(q: u64, r: usize, ell: usize) -> Result<BigRational> {
    check_qtb(q, r, ell)?;
    Ok((int(1) - rat(1, r as i64)) * int(q as i64 - ell as i64) + int(5))
}

fn check_fold(q: u64, r: usize, s: usize) -> Result<()> {
    let coset_count = (q as usize - 1) / r;
    if s == 0 || coset_count % s != 0 {
        return Err(Error::FoldNotDividing { s, coset_count });
    }
    Ok(())
}

fn lambda(q: u64, ell: usize) -> BigRational {
    int(1) - rat(ell as i64 - 1, q as i64 - 1)
}

/// ε = max_{1≤m≤r} min{λ(m-1)/r, 1/m + (m-1)/s}, with the maximizing m.
pub fn eps_for(lambda: &BigRational, r: usize, s: &BigRational) -> (BigRational, usize) {
    let mut best = (int(-1), 0);
    for m in 1..=r as i64 {
        let a = lambda * int(m - 1) / int(r as i64);
        let b = rat(1, m) + int(m - 1) / s;
        let v = if a < b { a } else { b };
        if v > best.0 {
            best = (v, m as usize);
        }
    }
    best
}

fn require_uncertainty(q: u64, r: usize) -> Result<()> {
    if !uncertainty_holds(q, r)? {
        return Err(Error::UncertaintyUnverified { q: q as u32, r });
    }
    Ok(())
}

pub fn fqtb_eps(q: u64, r: usize, ell: usize, s: usize) -> Result<(BigRational, usize)> {
    check_qtb(q, r, ell)?;
    check_fold(q, r, s)?;
    Ok(eps_for(&lambda(q, ell), r, &int(s as i64)))
}

/// (q-1)/s (1 - (ℓ-1)/(q-1) - ε).
pub fn fqtb_distance_lower(q: u64, r: usize, ell: usize, s: usize) -> Result<BigRational> {
    let (eps, _) = fqtb_eps(q, r, ell, s)?;
    require_prime_r(r)?;
    require_uncertainty(q, r)?;
    Ok(rat(q as i64 - 1, s as i64) * (lambda(q, ell) - eps))
}

/// (q-1)/s (λ - (1 + r²/s) √(λ/r)), valid for s ≥ 2r².
pub fn fqtb_distance_simple(q: u64, r: usize, ell: usize, s: usize) -> Result<Surd> {
    check_qtb(q, r, ell)?;
    check_fold(q, r, s)?;
    require_prime_r(r)?;
    if s < 2 * r * r {
        return Err(Error::HypothesisViolated(format!("s = {s} < 2r² = {}", 2 * r * r)));
    }
    require_uncertainty(q, r)?;
    let lam = lambda(q, ell);
    let k = rat(q as i64 - 1, s as i64);
    let coef = -(int(1) + rat((r * r) as i64, s as i64));
    Ok(Surd::new(lam.clone(), coef, lam / int(r as i64)).scale(&k))
}

/// (q-1) ½ (1 - 1/(2r) - √(1/(4r²) + ((r-1)/r) ℓ/(q-1))).
pub fn decode_radius_qtb_value(q: u64, r: usize, ell: usize) -> Result<Surd> {
    check_qtb(q, r, ell)?;
    require_prime_r(r)?;
    Ok(johnson_like(q, r, ell as i64).scale(&rat(1, 2)))
}

pub fn decode_radius_qtb(q: u64, r: usize, ell: usize) -> Result<i64> {
    Ok(decode_radius_qtb_value(q, r, ell)?.floor().to_i64().unwrap())
}

/// (q-1)/s (1 - (1 + 2/√s) R^(1 - 1/√s)) - 2 with R = ℓ/(q-1).
pub fn frs_theorem_radius(q: u64, ell: usize, s: usize) -> f64 {
    let n = q as f64 - 1.0;
    let rs = (s as f64).sqrt();
    n / s as f64 * (1.0 - (1.0 + 2.0 / rs) * (ell as f64 / n).powf(1.0 - 1.0 / rs)) - 2.0
}

/// (q-1) (1 - √(ℓ/(q-1))).
pub fn rs_johnson_radius(q: u64, ell: usize) -> Surd {
    let n = int(q as i64 - 1);
    Surd::new(n.clone(), -n, rat(ell as i64, q as i64 - 1))
}

/// e' = (q-1)/s (1 - 1/(2r) - √(1/(4r²) + ((r-1)/r)((1+2/√s)(ℓ/(q-1))^(1-1/√s) + 2s/(q-1)))).
pub fn frs_e_prime(q: u64, r: usize, ell: usize, s: usize) -> Result<f64> {
    check_qtb(q, r, ell)?;
    check_fold(q, r, s)?;
    let (n, rf, sf) = (q as f64 - 1.0, r as f64, s as f64);
    let rs = sf.sqrt();
    let inner = (1.0 + 2.0 / rs) * (ell as f64 / n).powf(1.0 - 1.0 / rs) + 2.0 * sf / n;
    Ok(n / sf * (1.0 - 1.0 / (2.0 * rf) - (1.0 / (4.0 * rf * rf) + (rf - 1.0) / rf * inner).sqrt()))
}

/// min(⌊d/2⌋ - 1, ⌊e'⌋) with d the folded distance lower bound.
pub fn decode_radius_fqtb(q: u64, r: usize, ell: usize, s: usize) -> Result<i64> {
    let d = fqtb_distance_lower(q, r, ell, s)?;
    let half = (d / int(2)).floor().to_integer().to_i64().unwrap() - 1;
    let ep = frs_e_prime(q, r, ell, s)?.floor() as i64;
    Ok(half.min(ep))
}

/// H_q(x) = x log_q(q-1) - x log_q x - (1-x) log_q(1-x), with 0 log 0 = 0.
pub fn entropy_q(x: f64, q: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || q < 2 {
        return Err(Error::DomainError(format!("entropy needs x in [0,1], q ≥ 2; got x={x}, q={q}")));
    }
    let lq = (q as f64).ln();
    let xlogx = |t: f64| if t <= 0.0 { 0.0 } else { t * t.ln() };
    Ok((x * ((q - 1) as f64).ln() - xlogx(x) - xlogx(1.0 - x)) / lq)
}

/// ⌈(H_q(δ) + ε) n⌉.
pub fn gv_ell(delta: f64, eps: f64, n: usize, q: u64) -> Result<usize> {
    Ok(((entropy_q(delta, q)? + eps) * n as f64).ceil() as usize)
}

/// Every square minor of (ω_r^{ij})_{i,j<r} over GF(q) is nonzero.
///
/// Results are memoized per (q, r) for the life of the process.
pub fn uncertainty_holds(q: u64, r: usize) -> Result<bool> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), bool>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&v) = cache.lock().unwrap().get(&(q, r)) {
        return Ok(v);
    }
    let v = uncertainty_search(q, r)?;
    cache.lock().unwrap().insert((q, r), v);
    Ok(v)
}

fn uncertainty_search(q: u64, r: usize) -> Result<bool> {
    if !is_prime(r as u64) {
        return Err(Error::HypothesisViolated(format!("r = {r} is not prime")));
    }
    if r > 13 {
        let mut required: u128 = 1;
        for i in 0..r as u128 {
            required = match required.checked_mul(2 * r as u128 - i) {
                Some(v) => v / (i + 1),
                None => u128::MAX,
            };
            if required == u128::MAX {
                break;
            }
        }
        return Err(Error::CapExceeded { required, cap: 10_400_600 });
    }
    let ctx = FieldCtx::from_order(q)?;
    let w = ctx.root_of_unity(r)?;
    let v: Vec<Vec<u32>> = (0..r).map(|i| (0..r).map(|j| ctx.pow(w, (i * j) as u64)).collect()).collect();
    for k in 1..=r {
        let mut rows: Vec<usize> = (0..k).collect();
        loop {
            let mut cols: Vec<usize> = (0..k).collect();
            loop {
                let sub: Vec<Vec<u32>> = rows.iter().map(|&i| cols.iter().map(|&j| v[i][j]).collect()).collect();
                if Matrix::from_rows(&sub, k).determinant(&ctx) == 0 {
                    return Ok(false);
                }
                if !crate::classical::next_combination(&mut cols, r) {
                    break;
                }
            }
            if !crate::classical::next_combination(&mut rows, r) {
                break;
            }
        }
    }
    Ok(true)
}

/// ε for s = c r² is at most (1 + 1/c) √(λ/r); exact.
pub fn lemma_a2_holds(r: usize, c: &BigRational, lam: &BigRational) -> bool {
    let s = c * int((r * r) as i64);
    let (eps, _) = eps_for(lam, r, &s);
    let bound = Surd::new(BigRational::zero(), int(1) + c.recip(), lam / int(r as i64));
    bound.cmp_rational(&eps) != Ordering::Less
}

/// RHS - LHS of ½(1-x-√(x²+(1-2x)y)) ≤ 1-x-√(x²+(1-2x)√y).
pub fn lemma_a3_margin(x: f64, y: f64) -> f64 {
    let lhs = 0.5 * (1.0 - x - (x * x + (1.0 - 2.0 * x) * y).sqrt());
    let rhs = 1.0 - x - (x * x + (1.0 - 2.0 * x) * y.sqrt()).sqrt();
    rhs - lhs
}

/// RHS - LHS of ½(y - √(2xy)) ≤ 1-x-√(x²+(1-2x)(1-y)).
pub fn lemma_a4_margin(x: f64, y: f64) -> f64 {
    let lhs = 0.5 * (y - (2.0 * x * y).sqrt());
    let rhs = 1.0 - x - (x * x + (1.0 - 2.0 * x) * (1.0 - y)).sqrt();
    rhs - lhs
}

/// Floating slack for the two nested-radical lemmas, which hold with equality on an edge.
pub const APPENDIX_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub lemma: String,
    pub points: usize,
    pub violations: usize,
    pub min_margin: f64,
}

/// Evaluates the three appendix inequalities on density × density grids of their domains.
pub fn verify_appendix_inequalities(density: usize) -> Result<Vec<AppendixReport>> {
    if density < 100 {
        return Err(Error::InvalidParameter(format!("grid density {density} < 100")));
    }
    let mut out = Vec::new();
    // A.2: r over small primes, c in [2, 2 + 8], λ in [0, 1]; exact rationals
    let mut pts = 0;
    let mut bad = 0;
    let mut min_margin = f64::INFINITY;
    let primes = [2usize, 3, 5, 7, 11, 13];
    for (ci, r) in (0..density).zip(primes.iter().cycle()) {
        let c = int(2) + rat(8 * ci as i64, density as i64);
        for li in 0..density {
            let lam = rat(li as i64, density as i64 - 1);
            pts += 1;
            if !lemma_a2_holds(*r, &c, &lam) {
                bad += 1;
            }
            let s = &c * int((r * r) as i64);
            let eps = eps_for(&lam, *r, &s).0.to_f64().unwrap();
            let bound = (1.0 + 1.0 / c.to_f64().unwrap()) * (lam.to_f64().unwrap() / *r as f64).sqrt();
            min_margin = min_margin.min(bound - eps);
        }
    }
    out.push(AppendixReport { lemma: "boundloss".into(), points: pts, violations: bad, min_margin });
    for (name, f, y0, y1) in [
        ("twojohnsons", lemma_a3_margin as fn(f64, f64) -> f64, 0.5, 1.0),
        ("johnsonvsfrs", lemma_a4_margin as fn(f64, f64) -> f64, 0.0, 0.5),
    ] {
        let mut pts = 0;
        let mut bad = 0;
        let mut min_margin = f64::INFINITY;
        for i in 0..density {
            let x = (1.0 / 6.0) * i as f64 / (density - 1) as f64;
            for j in 0..density {
                let y = y0 + (y1 - y0) * j as f64 / (density - 1) as f64;
                let m = f(x, y);
                pts += 1;
                min_margin = min_margin.min(m);
                if m < -APPENDIX_TOLERANCE {
                    bad += 1;
                }
            }
        }
        out.push(AppendixReport { lemma: name.into(), points: pts, violations: bad, min_margin });
    }
    if let Some(r) = out.iter().find(|r| r.violations > 0) {
        return Err(Error::ViolationFound(format!("{} fails at {} of {} points", r.lemma, r.violations, r.points)));
    }
    Ok(out)
}

/// A named bound with its inputs and the hypotheses it relies on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: Option<f64>,
    pub hypotheses: Vec<(String, bool)>,
    pub certified: bool,
}

impl BoundReport {
    pub fn new(name: &str, inputs: Vec<(String, f64)>, value: Option<f64>, hypotheses: Vec<(String, bool)>) -> Self {
        let certified = value.is_some() && hypotheses.iter().all(|(_, ok)| *ok);
        BoundReport { name: name.into(), inputs, value, hypotheses, certified }
    }
}

/// Reports for every bound applicable to (q, r, ℓ, s); s = 1 means unfolded.
pub fn bound_reports(q: u64, r: usize, ell: usize, s: usize) -> Vec<BoundReport> {
    let inputs = vec![("q".to_string(), q as f64), ("r".into(), r as f64), ("ell".into(), ell as f64), ("s".into(), s as f64)];
    let prime = is_prime(r as u64);
    let unc = if prime { uncertainty_holds(q, r).unwrap_or(false) } else { false };
    let big_s = s >= 2 * r * r;
    let v = |x: Result<f64>| x.ok();
    let mut out = vec![
        BoundReport::new("qtb_distance_lower", inputs.clone(), v(qtb_distance_lower(q, r, ell).map(|x| x.to_f64())), vec![("r prime".into(), prime)]),
        BoundReport::new("qtb_distance_upper", inputs.clone(), v(qtb_distance_upper(q, r, ell).map(|x| x.to_f64().unwrap())), vec![]),
        BoundReport::new("decode_radius_qtb", inputs.clone(), v(decode_radius_qtb(q, r, ell).map(|x| x as f64)), vec![("r prime".into(), prime)]),
    ];
    if s > 1 {
        let fold_hyp = vec![("r prime".to_string(), prime), ("uncertainty holds".into(), unc)];
        out.push(BoundReport::new("fqtb_eps", inputs.clone(), v(fqtb_eps(q, r, ell, s).map(|x| x.0.to_f64().unwrap())), vec![]));
        out.push(BoundReport::new(
            "fqtb_distance_lower",
            inputs.clone(),
            v(fqtb_distance_lower(q, r, ell, s).map(|x| x.to_f64().unwrap())),
            fold_hyp.clone(),
        ));
        let mut simple_hyp = fold_hyp.clone();
        simple_hyp.push(("s >= 2r^2".into(), big_s));
        out.push(BoundReport::new(
            "fqtb_distance_simple",
            inputs.clone(),
            v(fqtb_distance_simple(q, r, ell, s).map(|x| x.to_f64())),
            simple_hyp,
        ));
        out.push(BoundReport::new("frs_e_prime", inputs.clone(), v(frs_e_prime(q, r, ell, s)), vec![]));
        out.push(BoundReport::new(
            "decode_radius_fqtb",
            inputs,
            v(decode_radius_fqtb(q, r, ell, s).map(|x| x as f64)),
            fold_hyp,
        ));
    }
    out
}
