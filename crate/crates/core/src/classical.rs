//! Classical GF(q)-linear codes, exhaustive distance oracles, erasure decoding and local recovery.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::linalg::{Matrix, Rref};
use crate::polycode::{block_weight, support_rs, support_tb, SupportSet};

/// Default budget for exhaustive enumeration: q^dim(C) evaluations.
pub const DEFAULT_CAP: u128 = 1 << 30;

/// A linear code given by a full-rank generator matrix.
#[derive(Clone, Debug)]
pub struct LinearCode {
    ctx: Arc<FieldCtx>,
    basis: Matrix,
    rref: Rref,
    support: Option<SupportSet>,
}

impl PartialEq for LinearCode {
    /// Equality as subspaces.
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.rref == other.rref && *self.ctx == *other.ctx
    }
}

impl LinearCode {
    /// Row span of `generator`; dependent rows are dropped.
    pub fn from_generator(ctx: &Arc<FieldCtx>, generator: Matrix) -> Self {
        let rref = generator.rref(ctx);
        let basis = if rref.rank() == generator.rows() { generator } else { rref.matrix.clone() };
        LinearCode { ctx: ctx.clone(), basis, rref, support: None }
    }

    pub fn from_rows(ctx: &Arc<FieldCtx>, rows: &[Vec<Felt>], n: usize) -> Self {
        Self::from_generator(ctx, Matrix::from_rows(rows, n))
    }

    /// ev(F_q[X]^S), with rows ev(X^j) in increasing j.
    pub fn from_support(support: &SupportSet) -> Self {
        let mut code = Self::from_generator(support.ctx(), support.generator_matrix());
        code.support = Some(support.clone());
        code
    }

    /// The kernel of a parity-check matrix.
    pub fn from_parity_checks(ctx: &Arc<FieldCtx>, h: &Matrix) -> Self {
        Self::from_generator(ctx, h.nullspace(ctx))
    }

    pub fn zero(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        Self::from_generator(ctx, Matrix::zeros(0, n))
    }

    pub fn full(ctx: &Arc<FieldCtx>, n: usize) -> Self {
        Self::from_generator(ctx, Matrix::identity(n))
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    pub fn n(&self) -> usize {
        self.basis.cols()
    }
    pub fn k(&self) -> usize {
        self.basis.rows()
    }
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }
    pub fn rref(&self) -> &Rref {
        &self.rref
    }
    pub fn support(&self) -> Option<&SupportSet> {
        self.support.as_ref()
    }

    pub fn dual(&self) -> LinearCode {
        let ns = self.rref.nullspace(&self.ctx);
        let mut ns = ns;
        if self.rref.rank() == 0 {
            ns = Matrix::identity(self.n());
        }
        Self::from_generator(&self.ctx, ns)
    }

    pub fn contains(&self, v: &[Felt]) -> bool {
        v.len() == self.n() && self.rref.contains(&self.ctx, v)
    }

    pub fn is_subcode_of(&self, other: &LinearCode) -> bool {
        self.n() == other.n() && self.basis.row_iter().all(|r| other.contains(r))
    }

    /// Message times generator.
    pub fn encode(&self, msg: &[Felt]) -> Vec<Felt> {
        self.basis.combine_rows(&self.ctx, msg)
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Felt> {
        let q = self.ctx.q();
        let msg: Vec<Felt> = (0..self.k()).map(|_| rng.gen_range(0..q)).collect();
        self.encode(&msg)
    }

    /// H v for H a basis of the dual.
    pub fn syndrome(&self, h: &Matrix, v: &[Felt]) -> Vec<Felt> {
        h.mul_vec(&self.ctx, v)
    }

    /// Dimension of the subcode supported inside `inside` (true = allowed position).
    pub fn dim_supported_in(&self, inside: &[bool]) -> usize {
        let outside: Vec<usize> = (0..self.n()).filter(|&j| !inside[j]).collect();
        self.k() - self.basis.select_columns(&outside).rank(&self.ctx)
    }

    /// Basis (as codewords) of the subcode supported inside `inside`.
    pub fn subcode_supported_in(&self, inside: &[bool]) -> Matrix {
        let outside: Vec<usize> = (0..self.n()).filter(|&j| !inside[j]).collect();
        let g_out = self.basis.select_columns(&outside);
        let msgs = g_out.transpose().nullspace(&self.ctx);
        let mut out = Matrix::zeros(0, self.n());
        for m in msgs.row_iter() {
            out.push_row(&self.encode(m));
        }
        out
    }
}

/// A code whose coordinates are grouped into consecutive blocks of size s.
#[derive(Clone, Debug)]
pub struct FoldedCode {
    pub code: LinearCode,
    pub s: usize,
}

impl FoldedCode {
    pub fn new(code: LinearCode, s: usize) -> Result<Self> {
        let n = code.n();
        if s == 0 || n % s != 0 {
            return Err(Error::FoldMismatch { s, n });
        }
        Ok(FoldedCode { code, s })
    }
    pub fn block_count(&self) -> usize {
        self.code.n() / self.s
    }
}

pub fn rs_code(ctx: &Arc<FieldCtx>, ell: usize) -> Result<LinearCode> {
    Ok(LinearCode::from_support(&support_rs(ctx, ell)?))
}

pub fn tb_code(ctx: &Arc<FieldCtx>, r: usize, ell: usize) -> Result<LinearCode> {
    Ok(LinearCode::from_support(&support_tb(ctx, r, ell)?))
}

pub fn frs_code(ctx: &Arc<FieldCtx>, ell: usize, s: usize) -> Result<FoldedCode> {
    FoldedCode::new(rs_code(ctx, ell)?, s)
}

/// A minimum-weight word together with its weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinWeight {
    pub weight: usize,
    pub witness: Vec<Felt>,
}

fn checked_power(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Extends a basis of `d` by rows of `c` to a basis of `c`; returns the complement rows.
fn complement_rows(c: &LinearCode, d: &LinearCode) -> Vec<Vec<Felt>> {
    let f = c.ctx();
    let mut acc = d.basis().clone();
    let mut rref = acc.rref(f);
    let mut out = Vec::new();
    for row in c.basis().row_iter() {
        if !rref.contains(f, row) {
            acc.push_row(row);
            rref = acc.rref(f);
            out.push(row.to_vec());
        }
    }
    out
}

/// Minimum Hamming weight over C \ D, `None` when C = D.
pub fn min_weight_excluding(c: &LinearCode, d: &LinearCode, cap: u128) -> Result<Option<MinWeight>> {
    min_block_weight_excluding(c, d, 1, cap)
}

/// Minimum number of nonzero size-s blocks over C \ D, `None` when C = D.
///
/// Enumerates one representative per projective class of C/D times all of D, so the
/// work is about q^dim(C) / (q-1) word evaluations. The budget check uses q^dim(C).
pub fn min_block_weight_excluding(c: &LinearCode, d: &LinearCode, s: usize, cap: u128) -> Result<Option<MinWeight>> {
    if c.n() != d.n() || s == 0 || c.n() % s != 0 {
        return Err(Error::DimensionMismatch("codes must share length divisible by s".into()));
    }
    if !d.is_subcode_of(c) {
        return Err(Error::NotASubcode);
    }
    let f = c.ctx().clone();
    let q = f.q() as u128;
    let required = checked_power(q, c.k());
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    let comp = complement_rows(c, d);
    if comp.is_empty() {
        return Ok(None);
    }
    let n = c.n();
    let p = f.p() as usize;
    let m = f.m() as usize;
    // GF(p)-generators: every free row times every power of the polynomial basis element x.
    let scaled = |row: &[Felt]| -> Vec<Vec<Felt>> {
        (0..m)
            .map(|t| {
                let xt = f.from_digits(&(0..m).map(|i| u32::from(i == t)).collect::<Vec<_>>());
                row.iter().map(|&v| f.mul(v, xt)).collect()
            })
            .collect()
    };
    let d_gens: Vec<Vec<Felt>> = d.basis().row_iter().flat_map(|r| scaled(r)).collect();

    // Work items: the leading complement row t, then a prefix of the top free digits.
    struct Item {
        start: Vec<Felt>,
        gens: Arc<Vec<Vec<Felt>>>,
        low: usize,
    }
    let mut items = Vec::new();
    for t in 0..comp.len() {
        let mut gens: Vec<Vec<Felt>> = d_gens.clone();
        for row in &comp[t + 1..] {
            gens.extend(scaled(row));
        }
        // split off the top digits so there are enough parallel items
        let mut high = 0;
        while high < gens.len() && p.pow(high as u32) < 256 {
            high += 1;
        }
        let low = gens.len() - high;
        let gens = Arc::new(gens);
        for prefix in 0..p.pow(high as u32) {
            let mut start = comp[t].clone();
            let mut x = prefix;
            for g in &gens[low..] {
                let digit = (x % p) as Felt;
                x /= p;
                if digit != 0 {
                    f.axpy(&mut start, f.from_int(digit as i64), g);
                }
            }
            items.push(Item { start, gens: gens.clone(), low });
        }
    }

    let best = items
        .par_iter()
        .enumerate()
        .map(|(idx, item)| {
            let mut word = item.start.clone();
            let mut digits = vec![0usize; item.low];
            let mut best_w = block_weight(&word, s);
            let mut best_word = word.clone();
            loop {
                // odometer step: adding g_i once per increment, wraps cancel since p g_i = 0
                let mut i = 0;
                while i < item.low {
                    f.axpy(&mut word, 1, &item.gens[i]);
                    digits[i] += 1;
                    if digits[i] < p {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == item.low {
                    break;
                }
                let w = if s == 1 { word.iter().filter(|&&x| x != 0).count() } else { block_weight(&word, s) };
                if w < best_w {
                    best_w = w;
                    best_word.copy_from_slice(&word);
                }
            }
            (best_w, idx, best_word)
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .expect("at least one work item");
    debug_assert_eq!(best.2.len(), n);
    Ok(Some(MinWeight { weight: best.0, witness: best.2 }))
}

/// Searches supports of increasing size up to `max_weight` for a word of C \ D.
/// Returns the first (minimum-weight) one found, or `None` if every word of C \ D is heavier.
pub fn find_low_weight_excluding(c: &LinearCode, d: &LinearCode, max_weight: usize) -> Result<Option<MinWeight>> {
    if !d.is_subcode_of(c) {
        return Err(Error::NotASubcode);
    }
    let n = c.n();
    for w in 1..=max_weight.min(n) {
        let mut combo: Vec<usize> = (0..w).collect();
        loop {
            let mut inside = vec![false; n];
            for &i in &combo {
                inside[i] = true;
            }
            if c.dim_supported_in(&inside) > d.dim_supported_in(&inside) {
                let sub = c.subcode_supported_in(&inside);
                let witness = sub.row_iter().find(|r| !d.contains(r)).expect("dimension gap gives a witness").to_vec();
                let weight = witness.iter().filter(|&&x| x != 0).count();
                return Ok(Some(MinWeight { weight, witness }));
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Ok(None)
}

/// Advances a sorted k-subset of [n] in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Recovers a codeword from its unerased symbols (`None` marks an erasure).
pub fn erasure_decode(c: &LinearCode, word: &[Option<Felt>]) -> Result<Vec<Felt>> {
    if word.len() != c.n() {
        return Err(Error::DimensionMismatch(format!("word length {} vs n = {}", word.len(), c.n())));
    }
    let f = c.ctx();
    let known: Vec<usize> = (0..c.n()).filter(|&j| word[j].is_some()).collect();
    let a = c.basis().select_columns(&known).transpose();
    let b: Vec<Felt> = known.iter().map(|&j| word[j].unwrap()).collect();
    let rank = a.rank(f);
    let msg = a.solve(f, &b).ok_or(Error::Inconsistent)?;
    if rank < c.k() {
        return Err(Error::AmbiguousErasure { dim: c.k() - rank });
    }
    Ok(c.encode(&msg))
}

/// The value at position i forced by a parity check whose support contains i.
pub fn local_recover_symbol(c: &LinearCode, word: &[Felt], i: usize, check: &[Felt]) -> Result<Felt> {
    let f = c.ctx();
    if check.len() != c.n() || c.basis().row_iter().any(|r| f.dot(r, check) != 0) {
        return Err(Error::CheckNotInDual);
    }
    if check[i] == 0 {
        return Err(Error::ZeroPivot(i));
    }
    let mut acc = 0;
    for j in 0..c.n() {
        if j != i && check[j] != 0 {
            acc = f.add(acc, f.mul(check[j], word[j]));
        }
    }
    Ok(f.neg(f.div(acc, check[i])))
}
