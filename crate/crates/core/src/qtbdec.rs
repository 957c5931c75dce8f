//! Syndrome decoding for qTB and folded qTB codes via list decoding of the twisted differences
//! a(ω_r^i x) ω_r^{-i} - a(x), which kill the piecewise-linear part of the received word.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{decode_radius_fqtb, decode_radius_qtb};
use crate::css::{css_decode, syndrome, ClassicalDecoder, PauliError};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::listdec::{johnson_radius, list_decode_rs, FrsListDecoder};
use crate::polycode::{DensePoly, EvalWord};
use crate::qtb::{coset_positions, FqtbCode, QtbCode};

/// Distance from a word to the nearest piecewise-linear word, with that word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseFit {
    pub distance: usize,
    pub nearest: Vec<Felt>,
}

/// Hamming distance to the piecewise-linear words: per coset, the most common b(y)/y wins.
pub fn dist_to_piecewise(f: &FieldCtx, b: &[Felt], r: usize) -> Result<PiecewiseFit> {
    let n = b.len();
    if r == 0 || n % r != 0 {
        return Err(Error::NotADivisor { r, order: n });
    }
    let mut nearest = vec![0; n];
    let mut distance = 0;
    for coset in coset_positions(n, r) {
        let ratios: Vec<Felt> = coset.iter().map(|&j| f.div(b[j], f.exp(j))).collect();
        let mut best = (0usize, 0 as Felt);
        for &beta in &ratios {
            let c = ratios.iter().filter(|&&x| x == beta).count();
            if c > best.0 || (c == best.0 && beta < best.1) {
                best = (c, beta);
            }
        }
        distance += r - best.0;
        for &j in &coset {
            nearest[j] = f.mul(best.1, f.exp(j));
        }
    }
    Ok(PiecewiseFit { distance, nearest })
}

/// Block distance (blocks of s) to the piecewise-linear words.
///
/// Each group of r sibling blocks carries s cosets; a piecewise-linear word agrees with b on a
/// block exactly when its s slopes match that block, so the candidates are the r blocks' own slopes.
pub fn dist_to_piecewise_folded(f: &FieldCtx, b: &[Felt], r: usize, s: usize) -> Result<PiecewiseFit> {
    let n = b.len();
    if r == 0 || n % r != 0 {
        return Err(Error::NotADivisor { r, order: n });
    }
    let stride = n / r;
    if s == 0 || stride % s != 0 {
        return Err(Error::FoldNotDividing { s, coset_count: stride });
    }
    let groups = stride / s;
    let mut nearest = vec![0; n];
    let mut distance = 0;
    for g in 0..groups {
        let slopes: Vec<Vec<Felt>> = (0..r)
            .map(|t| {
                let start = g * s + t * stride;
                (start..start + s).map(|p| f.div(b[p], f.exp(p))).collect()
            })
            .collect();
        let mut best = (0usize, 0usize);
        for (t, cand) in slopes.iter().enumerate() {
            let c = slopes.iter().filter(|x| *x == cand).count();
            if c > best.0 || (c == best.0 && *cand < slopes[best.1]) {
                best = (c, t);
            }
        }
        distance += r - best.0;
        for t in 0..r {
            let start = g * s + t * stride;
            for (j, p) in (start..start + s).enumerate() {
                nearest[p] = f.mul(slopes[best.1][j], f.exp(p));
            }
        }
    }
    Ok(PiecewiseFit { distance, nearest })
}

/// ω_r^{-i} a(ω_r^i x) - a(x) as an evaluation vector.
pub fn twisted_difference(f: &FieldCtx, a: &[Felt], r: usize, i: usize) -> Vec<Felt> {
    let n = a.len();
    let shift = i * (n / r);
    let tw = f.exp((n - shift % n) % n);
    (0..n).map(|p| f.sub(f.mul(tw, a[(p + shift) % n]), a[p])).collect()
}

/// Statistics of one list-decoding call.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListCall {
    pub i: usize,
    pub radius: usize,
    pub list_len: usize,
    pub kept: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecOutcome {
    pub word: Vec<Felt>,
    pub coeffs: Vec<Felt>,
    pub candidates: usize,
    pub calls: Vec<ListCall>,
    /// Distance from word - a to the piecewise-linear words (blocks when folded).
    pub distance: usize,
}

/// N - ⌈(r (N-e)^2 - N (N-e)) / ((r-1) N)⌉: the averaging bound on the weight of some twisted error.
pub fn averaging_radius(n: usize, r: usize, e: usize) -> usize {
    if e >= n {
        return n;
    }
    let t = (n - e) as i128;
    let (n_, r_) = (n as i128, r as i128);
    let num = r_ * t * t - n_ * t;
    let den = (r_ - 1) * n_;
    if num <= 0 {
        return n;
    }
    let agree = (num + den - 1) / den;
    n.saturating_sub(agree as usize)
}

fn recover_coeffs(f: &FieldCtx, n: usize, r: usize, i: usize, gi: &DensePoly) -> Option<Vec<Felt>> {
    let stride = n / r;
    let c = gi.coeffs();
    if c.iter().enumerate().any(|(j, &x)| x != 0 && (j % r == 1 % r || j % r == r - 1)) {
        return None;
    }
    let mut g = c.to_vec();
    for (j, x) in g.iter_mut().enumerate() {
        if *x == 0 {
            continue;
        }
        let k = ((j + r - 1) % r) * i % r;
        let d = f.sub(f.exp(k * stride), 1);
        assert!(d != 0, "ω_r^(j-1)i - 1 vanished for prime r");
        *x = f.div(*x, d);
    }
    Some(g)
}

fn finish(
    code: &QtbCode,
    a: &[Felt],
    e: usize,
    calls: Vec<ListCall>,
    cands: BTreeSet<Vec<Felt>>,
    dist: impl Fn(&[Felt]) -> Result<usize>,
) -> Result<DecOutcome> {
    let f = code.ctx();
    let mut best: Option<(usize, Vec<Felt>, Vec<Felt>)> = None;
    for g in &cands {
        let w = DensePoly::new(f, g.clone()).evaluate()?.into_values();
        let d = dist(&f.vsub(&w, a))?;
        // BTreeSet order breaks ties by coefficients
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, g.clone(), w));
        }
    }
    let (distance, mut coeffs, word) = best.ok_or_else(|| Error::DecodingFailed("every list came back empty".into()))?;
    if !code.classical().contains(&word) {
        return Err(Error::DecodingFailed("candidate left the code".into()));
    }
    if distance > e {
        return Err(Error::DecodingFailed(format!("closest candidate at distance {distance} > {e}")));
    }
    while coeffs.last() == Some(&0) {
        coeffs.pop();
    }
    Ok(DecOutcome { word, coeffs, candidates: cands.len(), calls, distance })
}

fn check_input(code: &QtbCode, a: &[Felt]) -> Result<()> {
    if a.len() != code.n() {
        return Err(Error::DimensionMismatch(format!("word of length {} vs n = {}", a.len(), code.n())));
    }
    if !crate::gf::is_prime(code.r() as u64) {
        return Err(Error::CompositeLocality(code.r()));
    }
    Ok(())
}

/// Algorithm for C = TB + B^⊥: returns c' ∈ C with dis(c' - a, B^⊥) ≤ e, for a = c + b, |b| ≤ e.
pub fn dec_c_with_radius(code: &QtbCode, a: &[Felt], e: usize) -> Result<DecOutcome> {
    check_input(code, a)?;
    let f = code.ctx();
    let (n, r, ell) = (code.n(), code.r(), code.ell());
    let radius = johnson_radius(n, ell).min(2 * e).min(averaging_radius(n, r, e));
    let mut calls = Vec::new();
    let mut cands = BTreeSet::new();
    for i in 1..r {
        let ai = twisted_difference(f, a, r, i);
        let list = list_decode_rs(f, ell, &ai, radius)?;
        let mut kept = 0;
        for gi in &list {
            if let Some(g) = recover_coeffs(f, n, r, i, gi) {
                kept += 1;
                cands.insert(g);
            }
        }
        calls.push(ListCall { i, radius, list_len: list.len(), kept });
    }
    finish(code, a, e, calls, cands, |b| Ok(dist_to_piecewise(f, b, r)?.distance))
}

/// [`dec_c_with_radius`] at the proven radius.
pub fn dec_c(code: &QtbCode, a: &[Felt]) -> Result<DecOutcome> {
    let e = decode_radius_qtb(code.q() as u64, code.r(), code.ell())?;
    dec_c_with_radius(code, a, e.max(0) as usize)
}

/// Folded variant: distances count blocks of s and the lists come from the folded RS decoder.
pub fn dec_c_folded_with_radius(code: &FqtbCode, a: &[Felt], e: usize) -> Result<DecOutcome> {
    let base = code.base();
    check_input(base, a)?;
    let f = base.ctx();
    let (n, r, ell, s) = (base.n(), base.r(), base.ell(), code.s());
    let blocks = n / s;
    let dec = FrsListDecoder::best(f, ell, s)?;
    let max = dec.radius().unwrap_or(0);
    let radius = max.min(2 * e).min(averaging_radius(blocks, r, e));
    if dec.radius().is_none() {
        return Err(Error::RadiusTooLarge { e: radius, max: 0 });
    }
    let mut calls = Vec::new();
    let mut cands = BTreeSet::new();
    for i in 1..r {
        let ai = EvalWord::new(f, twisted_difference(f, a, r, i))?.fold(s)?;
        let list = dec.decode(&ai, radius)?;
        let mut kept = 0;
        for gi in &list {
            if let Some(g) = recover_coeffs(f, n, r, i, gi) {
                kept += 1;
                cands.insert(g);
            }
        }
        calls.push(ListCall { i, radius, list_len: list.len(), kept });
    }
    finish(base, a, e, calls, cands, |b| Ok(dist_to_piecewise_folded(f, b, r, s)?.distance))
}

pub fn dec_c_folded(code: &FqtbCode, a: &[Felt]) -> Result<DecOutcome> {
    let base = code.base();
    let e = decode_radius_fqtb(base.q() as u64, base.r(), base.ell(), code.s())?;
    dec_c_folded_with_radius(code, a, e.max(0) as usize)
}

/// [`ClassicalDecoder`] over C for one CSS side; `s = 1` means unfolded.
pub struct QtbDecoder<'a> {
    code: &'a FqtbCode,
    e: usize,
}

impl<'a> QtbDecoder<'a> {
    pub fn new(code: &'a FqtbCode, e: usize) -> Self {
        QtbDecoder { code, e }
    }
}

impl ClassicalDecoder for QtbDecoder<'_> {
    fn decode(&self, word: &[Felt]) -> Result<Vec<Felt>> {
        let out = if self.code.s() == 1 {
            dec_c_with_radius(self.code.base(), word, self.e)
        } else {
            dec_c_folded_with_radius(self.code, word, self.e)
        };
        Ok(out?.word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumOutcome {
    pub correction: PauliError,
    pub residual: PauliError,
    pub logical_identity: bool,
}

/// Syndrome decoding of a Pauli error; the residual is a stabilizer whenever the
/// error has (block) weight at most e on each side.
pub fn quantum_decode(code: &FqtbCode, err: &PauliError, e: usize) -> Result<QuantumOutcome> {
    let css = code.css();
    let f = css.ctx();
    let (sx, sz) = syndrome(css, err);
    let dec = QtbDecoder::new(code, e);
    let correction = css_decode(css, &sx, &sz, &dec, &dec)?;
    let residual = err.minus(f, &correction);
    let logical_identity = css.is_logical_identity(&residual);
    Ok(QuantumOutcome { correction, residual, logical_identity })
}
