//! Arithmetic in GF(p^m).
//!
//! Elements are stored as their canonical integer: the coefficient vector of the
//! polynomial-basis representative read as base-p digits, constant term least
//! significant. Fields up to 2^22 elements use exponential/logarithm tables
//! (plus Zech logarithms for odd-characteristic extensions); larger fields fall
//! back to direct polynomial arithmetic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CACHED_ORDER: u64 = 1 << 16;

/// A field element as its canonical integer in `[0, q)`.
pub type Felt = u32;

const TABLE_LIMIT: u64 = 1 << 22;
const ZECH_NONE: u32 = u32::MAX;

/// Serializable identity of a field: enough to rebuild it bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub m: u32,
    /// Monic modulus, constant term first. Empty for prime fields.
    pub modulus: Vec<u32>,
    pub omega: Felt,
}

#[derive(Debug)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

/// GF(p^m) with its canonical modulus and primitive element.
#[derive(Debug)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    omega: Felt,
    tables: Option<Tables>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus && self.omega == other.omega
    }
}

impl Eq for FieldCtx {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---- polynomials over GF(p) with u64 coefficients, constant term first ----

fn ptrim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn prem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    ptrim(&mut r);
    let df = f.len() - 1;
    let inv_lead = modpow(f[df], p - 2, p);
    while r.len() > df {
        let top = r.len() - 1;
        let c = r[top] * inv_lead % p;
        let shift = top - df;
        for (i, &fi) in f.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * fi % p) % p;
        }
        ptrim(&mut r);
    }
    r
}

fn pmulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    prem(&prod, f, p)
}

fn ppowmod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut base = prem(a, f, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = pmulmod(&acc, &base, f, p);
        }
        base = pmulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    ptrim(&mut x);
    ptrim(&mut y);
    while !y.is_empty() {
        let r = prem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Rabin's irreducibility test for a monic polynomial over GF(p).
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // x^(p^k) mod f for k = 1..m
    let mut powers = Vec::with_capacity(m + 1);
    powers.push(prem(&x, f, p));
    for k in 1..=m {
        let next = ppowmod(&powers[k - 1], p, f, p);
        powers.push(next);
    }
    let sub_x = |a: &[u64]| -> Vec<u64> {
        let mut v = a.to_vec();
        if v.len() < 2 {
            v.resize(2, 0);
        }
        v[1] = (v[1] + p - 1) % p;
        ptrim(&mut v);
        v
    };
    if !sub_x(&powers[m]).is_empty() {
        return false;
    }
    for t in prime_factors(m as u64) {
        let g = pgcd(f, &sub_x(&powers[m / t as usize]), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl FieldCtx {
    /// Builds GF(p^m) with the smallest irreducible modulus and smallest primitive element.
    pub fn new(p: u64, m: u32) -> Result<Arc<FieldCtx>> {
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("extension degree must be at least 1".into()));
        }
        let q = (p as u128).checked_pow(m).filter(|&q| q < (1u128 << 32)).ok_or(Error::Overflow { p, m })? as u64;
        // canonical fields are immutable, so small ones are built once per process
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FieldCtx>>>> = OnceLock::new();
        let cacheable = q <= CACHED_ORDER;
        if cacheable {
            if let Some(f) = CACHE.get_or_init(Default::default).lock().unwrap().get(&q) {
                return Ok(f.clone());
            }
        }
        let modulus = if m == 1 { Vec::new() } else { Self::smallest_irreducible(p, m) };
        let f = Self::build(p as u32, m, q as u32, modulus, None)?;
        if cacheable {
            CACHE.get_or_init(Default::default).lock().unwrap().insert(q, f.clone());
        }
        Ok(f)
    }

    /// Builds the field of order q (a prime power).
    pub fn from_order(q: u64) -> Result<Arc<FieldCtx>> {
        let fs = prime_factors(q);
        if fs.len() != 1 {
            return Err(Error::NonPrimeCharacteristic(q));
        }
        let p = fs[0];
        let mut m = 0u32;
        let mut t = q;
        while t > 1 {
            t /= p;
            m += 1;
        }
        Self::new(p, m)
    }

    /// Rebuilds a field from a descriptor, checking that it matches the canonical choice.
    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Arc<FieldCtx>> {
        let ctx = Self::new(d.p as u64, d.m)?;
        if ctx.modulus != d.modulus || ctx.omega != d.omega {
            return Err(Error::InvalidParameter("descriptor modulus/omega differ from the canonical choice".into()));
        }
        Ok(ctx)
    }

    /// Builds GF(p^m) with a caller-chosen modulus; fails if it is reducible.
    pub fn with_modulus(p: u64, modulus: &[u32]) -> Result<Arc<FieldCtx>> {
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        let m = modulus.len().saturating_sub(1) as u32;
        if m < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidParameter("modulus must be monic of degree >= 2".into()));
        }
        let f: Vec<u64> = modulus.iter().map(|&c| c as u64 % p).collect();
        if !is_irreducible(&f, p) {
            return Err(Error::ReducibleModulus { p: p as u32 });
        }
        let q = (p as u128).checked_pow(m).filter(|&q| q < (1u128 << 32)).ok_or(Error::Overflow { p, m })? as u64;
        Self::build(p as u32, m, q as u32, modulus.to_vec(), None)
    }

    fn smallest_irreducible(p: u64, m: u32) -> Vec<u32> {
        let count = p.pow(m);
        for code in 0..count {
            let mut f = Vec::with_capacity(m as usize + 1);
            let mut c = code;
            for _ in 0..m {
                f.push(c % p);
                c /= p;
            }
            if f[0] == 0 {
                continue;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return f.into_iter().map(|c| c as u32).collect();
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    fn build(p: u32, m: u32, q: u32, modulus: Vec<u32>, omega: Option<Felt>) -> Result<Arc<FieldCtx>> {
        let mut ctx = FieldCtx { p, m, q, modulus, omega: 1, tables: None };
        let n = (q - 1) as u64;
        let factors = prime_factors(n);
        ctx.omega = match omega {
            Some(w) => w,
            None => (1..q)
                .find(|&g| factors.iter().all(|&f| ctx.slow_pow(g, n / f) != 1))
                .expect("the multiplicative group is cyclic"),
        };
        if (q as u64) <= TABLE_LIMIT {
            let nn = n as usize;
            let mut exp = vec![0u32; 2 * nn.max(1)];
            let mut log = vec![0u32; q as usize];
            let mut x: Felt = 1;
            for i in 0..nn {
                exp[i] = x;
                log[x as usize] = i as u32;
                x = ctx.slow_mul(x, ctx.omega);
            }
            for i in nn..2 * nn {
                exp[i] = exp[i - nn];
            }
            let zech = if m > 1 && p != 2 {
                (0..nn)
                    .map(|d| {
                        let v = ctx.digit_add(1, exp[d]);
                        if v == 0 {
                            ZECH_NONE
                        } else {
                            log[v as usize]
                        }
                    })
                    .collect()
            } else {
                Vec::new()
            };
            ctx.tables = Some(Tables { exp, log, zech });
        }
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Size of the multiplicative group, q-1.
    pub fn order(&self) -> usize {
        (self.q - 1) as usize
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn omega(&self) -> Felt {
        self.omega
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.p, m: self.m, modulus: self.modulus.clone(), omega: self.omega }
    }

    /// Base-p digits of an element (length m).
    pub fn digits(&self, a: Felt) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.m as usize);
        let mut c = a;
        for _ in 0..self.m {
            out.push(c % self.p);
            c /= self.p;
        }
        out
    }

    pub fn from_digits(&self, d: &[u32]) -> Felt {
        d.iter().rev().fold(0u32, |acc, &x| acc * self.p + x % self.p)
    }

    fn digit_add(&self, a: Felt, b: Felt) -> Felt {
        let (mut x, mut y) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.m {
            let s = (x % self.p + y % self.p) % self.p;
            out += s * place;
            x /= self.p;
            y /= self.p;
            place = place.wrapping_mul(self.p);
        }
        out
    }

    fn digit_neg(&self, a: Felt) -> Felt {
        let mut x = a;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.m {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * place;
            x /= self.p;
            place = place.wrapping_mul(self.p);
        }
        out
    }

    fn slow_mul(&self, a: Felt, b: Felt) -> Felt {
        let p = self.p as u64;
        if self.m == 1 {
            return ((a as u64 * b as u64) % p) as Felt;
        }
        let da: Vec<u64> = self.digits(a).into_iter().map(u64::from).collect();
        let db: Vec<u64> = self.digits(b).into_iter().map(u64::from).collect();
        let f: Vec<u64> = self.modulus.iter().map(|&c| c as u64).collect();
        let mut r = pmulmod(&da, &db, &f, p);
        r.resize(self.m as usize, 0);
        let digits: Vec<u32> = r.into_iter().map(|c| c as u32).collect();
        self.from_digits(&digits)
    }

    fn slow_pow(&self, a: Felt, mut e: u64) -> Felt {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn add(&self, a: Felt, b: Felt) -> Felt {
        if self.p == 2 {
            return a ^ b;
        }
        if self.m == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        match &self.tables {
            Some(t) => {
                if a == 0 {
                    return b;
                }
                if b == 0 {
                    return a;
                }
                let la = t.log[a as usize];
                let lb = t.log[b as usize];
                let n = self.q - 1;
                let d = if lb >= la { lb - la } else { lb + n - la };
                let z = t.zech[d as usize];
                if z == ZECH_NONE {
                    0
                } else {
                    t.exp[(la + z) as usize]
                }
            }
            None => self.digit_add(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Felt) -> Felt {
        if self.p == 2 || a == 0 {
            return a;
        }
        if self.m == 1 {
            return self.p - a;
        }
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + (self.q - 1) / 2) as usize],
            None => self.digit_neg(a),
        }
    }

    #[inline]
    pub fn sub(&self, a: Felt, b: Felt) -> Felt {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Felt, b: Felt) -> Felt {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => self.slow_mul(a, b),
        }
    }

    pub fn try_inv(&self, a: Felt) -> Option<Felt> {
        if a == 0 {
            return None;
        }
        Some(match &self.tables {
            Some(t) => {
                let l = t.log[a as usize];
                if l == 0 {
                    1
                } else {
                    t.exp[(self.q - 1 - l) as usize]
                }
            }
            None => self.slow_pow(a, self.q as u64 - 2),
        })
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self, a: Felt) -> Felt {
        self.try_inv(a).expect("inverse of zero")
    }

    pub fn div(&self, a: Felt, b: Felt) -> Felt {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Felt, e: u64) -> Felt {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        match &self.tables {
            Some(t) => {
                let n = (self.q - 1) as u64;
                t.exp[((t.log[a as usize] as u64 * (e % n)) % n) as usize]
            }
            None => self.slow_pow(a, e),
        }
    }

    /// omega^i, i.e. the value at evaluation position i.
    #[inline]
    pub fn exp(&self, i: usize) -> Felt {
        let n = self.order();
        match &self.tables {
            Some(t) => t.exp[i % n],
            None => self.slow_pow(self.omega, (i % n) as u64),
        }
    }

    /// Discrete logarithm to base omega; `None` for zero.
    pub fn log(&self, a: Felt) -> Option<usize> {
        if a == 0 {
            return None;
        }
        if let Some(t) = &self.tables {
            return Some(t.log[a as usize] as usize);
        }
        // baby-step giant-step
        let n = self.order() as u64;
        let step = (n as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(step as usize);
        let mut x = 1;
        for j in 0..step {
            baby.entry(x).or_insert(j);
            x = self.slow_mul(x, self.omega);
        }
        let giant = self.slow_pow(self.inv(self.slow_pow(self.omega, step)), 1);
        let mut y = a;
        for i in 0..=step {
            if let Some(&j) = baby.get(&y) {
                return Some(((i * step + j) % n) as usize);
            }
            y = self.slow_mul(y, giant);
        }
        None
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: Felt) -> usize {
        let n = self.order() as u64;
        let mut ord = n;
        for f in prime_factors(n) {
            while ord % f == 0 && self.pow(a, ord / f) == 1 {
                ord /= f;
            }
        }
        ord as usize
    }

    /// dst += c * src
    #[inline]
    pub fn axpy(&self, dst: &mut [Felt], c: Felt, src: &[Felt]) {
        if c == 0 {
            return;
        }
        match &self.tables {
            Some(t) => {
                let lc = t.log[c as usize];
                for (d, &s) in dst.iter_mut().zip(src) {
                    if s != 0 {
                        let prod = t.exp[(lc + t.log[s as usize]) as usize];
                        *d = self.add(*d, prod);
                    }
                }
            }
            None => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = self.add(*d, self.mul(c, s));
                }
            }
        }
    }

    pub fn scale(&self, v: &mut [Felt], c: Felt) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    pub fn dot(&self, a: &[Felt], b: &[Felt]) -> Felt {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Componentwise a - b.
    pub fn vsub(&self, a: &[Felt], b: &[Felt]) -> Vec<Felt> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    /// Componentwise a + b.
    pub fn vadd(&self, a: &[Felt], b: &[Felt]) -> Vec<Felt> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    /// Absolute trace into the prime subfield.
    pub fn trace(&self, a: Felt) -> Felt {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.m {
            acc = self.add(acc, x);
            x = self.pow(x, self.p as u64);
        }
        acc
    }

    /// The embedding of an integer into the prime subfield.
    pub fn from_int(&self, v: i64) -> Felt {
        v.rem_euclid(self.p as i64) as Felt
    }

    /// omega^((q-1)/r), a primitive r-th root of unity.
    pub fn root_of_unity(&self, r: usize) -> Result<Felt> {
        let n = self.order();
        if r == 0 || n % r != 0 {
            return Err(Error::NotADivisor { r, order: n });
        }
        Ok(self.exp(n / r))
    }

    /// The coset x * Omega_r listed as x, x w_r, x w_r^2, ...
    pub fn coset(&self, r: usize, x: Felt) -> Result<Vec<Felt>> {
        let w = self.root_of_unity(r)?;
        if x == 0 {
            return Err(Error::ZeroElement);
        }
        let mut out = Vec::with_capacity(r);
        let mut y = x;
        for _ in 0..r {
            out.push(y);
            y = self.mul(y, w);
        }
        Ok(out)
    }
}
