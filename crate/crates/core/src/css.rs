//! CSS codes in the symplectic picture: validation, distance, syndromes, decoding, erasures and
//! single-qudit local recovery.
//!
//! Convention: X-syndromes are taken against a basis H_X of C_X^⊥, so an X error is decoded in C_X
//! and a residual is harmless when it lies in C_Z^⊥ (and symmetrically for Z).

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{min_block_weight_excluding, next_combination, LinearCode, MinWeight};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::linalg::Matrix;
use crate::polycode::block_weight;

#[derive(Clone, Debug)]
pub struct CssCode {
    cx: LinearCode,
    cz: LinearCode,
    cx_dual: LinearCode,
    cz_dual: LinearCode,
    fold: usize,
    recovery_sets: Option<Vec<Vec<usize>>>,
}

/// A Pauli X^bx Z^bz modulo phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliError {
    pub bx: Vec<Felt>,
    pub bz: Vec<Felt>,
}

impl PauliError {
    pub fn identity(n: usize) -> Self {
        PauliError { bx: vec![0; n], bz: vec![0; n] }
    }

    pub fn x_only(bx: Vec<Felt>) -> Self {
        let n = bx.len();
        PauliError { bx, bz: vec![0; n] }
    }

    pub fn z_only(bz: Vec<Felt>) -> Self {
        let n = bz.len();
        PauliError { bx: vec![0; n], bz }
    }

    pub fn len(&self) -> usize {
        self.bx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bx.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.bx[i] != 0 || self.bz[i] != 0).collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Number of size-s blocks touched.
    pub fn block_weight(&self, s: usize) -> usize {
        (0..self.len() / s)
            .filter(|&b| (b * s..(b + 1) * s).any(|i| self.bx[i] != 0 || self.bz[i] != 0))
            .count()
    }

    pub fn minus(&self, f: &FieldCtx, other: &PauliError) -> PauliError {
        PauliError { bx: f.vsub(&self.bx, &other.bx), bz: f.vsub(&self.bz, &other.bz) }
    }

    /// Uniform nonidentity Pauli on each of the given positions.
    pub fn random_on<R: Rng + ?Sized>(f: &FieldCtx, n: usize, positions: &[usize], rng: &mut R) -> PauliError {
        let q = f.q();
        let mut e = PauliError::identity(n);
        for &i in positions {
            loop {
                let (a, b) = (rng.gen_range(0..q), rng.gen_range(0..q));
                if a != 0 || b != 0 {
                    e.bx[i] = a;
                    e.bz[i] = b;
                    break;
                }
            }
        }
        e
    }
}

/// A classical decoder for one side of a CSS pair.
pub trait ClassicalDecoder {
    /// Returns some codeword c' with c' - c in the opposite dual whenever the input is
    /// within the decoder's radius of a codeword c.
    fn decode(&self, word: &[Felt]) -> Result<Vec<Felt>>;
}

impl CssCode {
    pub fn new(cx: LinearCode, cz: LinearCode) -> Result<Self> {
        css_new(cx, cz)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.cx.ctx()
    }
    pub fn n(&self) -> usize {
        self.cx.n()
    }
    pub fn k(&self) -> usize {
        self.cz.k() - self.cx_dual.k()
    }
    pub fn cx(&self) -> &LinearCode {
        &self.cx
    }
    pub fn cz(&self) -> &LinearCode {
        &self.cz
    }
    pub fn cx_dual(&self) -> &LinearCode {
        &self.cx_dual
    }
    pub fn cz_dual(&self) -> &LinearCode {
        &self.cz_dual
    }
    /// H_X, rows spanning C_X^⊥.
    pub fn hx(&self) -> &Matrix {
        self.cx_dual.basis()
    }
    /// H_Z, rows spanning C_Z^⊥.
    pub fn hz(&self) -> &Matrix {
        self.cz_dual.basis()
    }
    pub fn fold(&self) -> usize {
        self.fold
    }
    pub fn recovery_sets(&self) -> Option<&[Vec<usize>]> {
        self.recovery_sets.as_deref()
    }

    /// Groups coordinates into blocks of size s for weight purposes.
    pub fn with_fold(mut self, s: usize) -> Result<Self> {
        if s == 0 || self.n() % s != 0 {
            return Err(Error::FoldMismatch { s, n: self.n() });
        }
        self.fold = s;
        Ok(self)
    }

    /// Attaches candidate recovery sets; `local_recovery_sets` searches these first.
    pub fn with_recovery_sets(mut self, sets: Vec<Vec<usize>>) -> Self {
        self.recovery_sets = Some(sets);
        self
    }

    /// The residual is a stabilizer.
    pub fn is_logical_identity(&self, e: &PauliError) -> bool {
        self.cz_dual.contains(&e.bx) && self.cx_dual.contains(&e.bz)
    }
}

/// Validates C_X^⊥ ⊆ C_Z by checking every pair of dual basis rows.
pub fn css_new(cx: LinearCode, cz: LinearCode) -> Result<CssCode> {
    if cx.n() != cz.n() || **cx.ctx() != **cz.ctx() {
        return Err(Error::DimensionMismatch("C_X and C_Z must share field and length".into()));
    }
    let f = cx.ctx().clone();
    let cx_dual = cx.dual();
    let cz_dual = cz.dual();
    for (i, a) in cx_dual.basis().row_iter().enumerate() {
        for (j, b) in cz_dual.basis().row_iter().enumerate() {
            if f.dot(a, b) != 0 {
                return Err(Error::OrthogonalityViolation { x_row: i, z_row: j, x_check: a.to_vec(), z_check: b.to_vec() });
            }
        }
    }
    Ok(CssCode { cx, cz, cx_dual, cz_dual, fold: 1, recovery_sets: None })
}

/// Exact distance (in blocks when folded) with a minimum-weight logical as witness.
pub fn css_distance_witness(code: &CssCode, cap: u128) -> Result<Option<MinWeight>> {
    let s = code.fold;
    let a = min_block_weight_excluding(&code.cz, &code.cx_dual, s, cap)?;
    let b = if code.cx == code.cz && code.cx_dual == code.cz_dual {
        None
    } else {
        min_block_weight_excluding(&code.cx, &code.cz_dual, s, cap)?
    };
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(if b.weight < a.weight { b } else { a }),
        (a, b) => a.or(b),
    })
}

/// Exact CSS distance; a code with k = 0 reports n + 1.
pub fn css_distance_brute(code: &CssCode, cap: u128) -> Result<usize> {
    Ok(css_distance_witness(code, cap)?.map_or(code.n() / code.fold + 1, |m| m.weight))
}

/// (H_X bx, H_Z bz).
pub fn syndrome(code: &CssCode, e: &PauliError) -> (Vec<Felt>, Vec<Felt>) {
    let f = code.ctx();
    (code.hx().mul_vec(f, &e.bx), code.hz().mul_vec(f, &e.bz))
}

fn decode_side(f: &FieldCtx, h: &Matrix, s: &[Felt], dec: &dyn ClassicalDecoder) -> Result<Vec<Felt>> {
    if s.iter().all(|&x| x == 0) {
        return Ok(vec![0; h.cols()]);
    }
    let a = h.solve(f, s).ok_or_else(|| Error::DecoderFailure("syndrome outside the image of H".into()))?;
    let c = dec.decode(&a)?;
    Ok(f.vsub(&a, &c))
}

/// A Pauli correction consistent with both syndromes.
pub fn css_decode(
    code: &CssCode,
    sx: &[Felt],
    sz: &[Felt],
    dec_x: &dyn ClassicalDecoder,
    dec_z: &dyn ClassicalDecoder,
) -> Result<PauliError> {
    let f = code.ctx();
    let bx = decode_side(f, code.hx(), sx, dec_x)?;
    let bz = decode_side(f, code.hz(), sz, dec_z)?;
    Ok(PauliError { bx, bz })
}

/// Coset-leader decoder for a code up to a fixed radius (in blocks of size s).
///
/// Patterns are tried in order of weight, so among equal syndromes the lightest wins.
pub struct TableDecoder {
    ctx: Arc<FieldCtx>,
    h: Matrix,
    table: HashMap<Vec<Felt>, Vec<Felt>>,
}

impl TableDecoder {
    pub fn new(code: &LinearCode, radius: usize, cap: u128) -> Result<Self> {
        Self::folded(code, radius, 1, cap)
    }

    pub fn folded(code: &LinearCode, radius: usize, s: usize, cap: u128) -> Result<Self> {
        let f = code.ctx().clone();
        let n = code.n();
        if s == 0 || n % s != 0 {
            return Err(Error::FoldMismatch { s, n });
        }
        let nb = n / s;
        let q = f.q() as u128;
        let per_block = q.saturating_pow(s as u32).saturating_sub(1);
        let mut required: u128 = 0;
        let mut binom: u128 = 1;
        for w in 0..=radius.min(nb) {
            if w > 0 {
                binom = binom * (nb - w + 1) as u128 / w as u128;
            }
            required = required.saturating_add(binom.saturating_mul(per_block.saturating_pow(w as u32)));
        }
        if required > cap {
            return Err(Error::CapExceeded { required, cap });
        }
        let h = code.dual().basis().clone();
        let mut table = HashMap::new();
        table.insert(vec![0; h.rows()], vec![0; n]);
        for w in 1..=radius.min(nb) {
            let mut blocks: Vec<usize> = (0..w).collect();
            loop {
                // every nonzero value assignment on the chosen blocks
                let mut vals = vec![1u128; w];
                loop {
                    let mut e = vec![0; n];
                    for (t, &b) in blocks.iter().enumerate() {
                        let mut x = vals[t];
                        for j in 0..s {
                            e[b * s + j] = (x % q) as Felt;
                            x /= q;
                        }
                    }
                    table.entry(h.mul_vec(&f, &e)).or_insert(e);
                    let mut t = 0;
                    while t < w {
                        vals[t] += 1;
                        if vals[t] <= per_block {
                            break;
                        }
                        vals[t] = 1;
                        t += 1;
                    }
                    if t == w {
                        break;
                    }
                }
                if !next_combination(&mut blocks, nb) {
                    break;
                }
            }
        }
        Ok(TableDecoder { ctx: f, h, table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Lightest error pattern with the given syndrome, if within radius.
    pub fn leader(&self, syn: &[Felt]) -> Option<&[Felt]> {
        self.table.get(syn).map(|v| v.as_slice())
    }
}

impl ClassicalDecoder for TableDecoder {
    fn decode(&self, word: &[Felt]) -> Result<Vec<Felt>> {
        let syn = self.h.mul_vec(&self.ctx, word);
        let e = self.table.get(&syn).ok_or_else(|| Error::DecoderFailure("syndrome not in table".into()))?;
        Ok(self.ctx.vsub(word, e))
    }
}

fn supported_gap(big: &LinearCode, small: &LinearCode, inside: &[bool]) -> bool {
    big.dim_supported_in(inside) > small.dim_supported_in(inside)
}

/// True iff no logical operator is supported inside the erased set.
pub fn can_decode_erasures(code: &CssCode, erased: &[usize]) -> bool {
    let n = code.n();
    let mut inside = vec![false; n];
    for &i in erased {
        if i < n {
            inside[i] = true;
        }
    }
    !supported_gap(&code.cz, &code.cx_dual, &inside) && !supported_gap(&code.cx, &code.cz_dual, &inside)
}

/// Checks c_X' in C_X^⊥ and c_Z' in C_Z^⊥ covering one position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRecovery {
    pub position: usize,
    pub set: Vec<usize>,
    pub check_x: Vec<Felt>,
    pub check_z: Vec<Felt>,
}

fn check_in(code: &LinearCode, inside: &[bool], i: usize) -> Option<Vec<Felt>> {
    code.subcode_supported_in(inside).row_iter().find(|r| r[i] != 0).map(|r| r.to_vec())
}

fn try_set(code: &CssCode, i: usize, set: &[usize]) -> Option<LocalRecovery> {
    let mut inside = vec![false; code.n()];
    for &j in set {
        inside[j] = true;
    }
    let cx = check_in(&code.cx_dual, &inside, i)?;
    let cz = check_in(&code.cz_dual, &inside, i)?;
    let mut used: Vec<usize> = (0..code.n()).filter(|&j| cx[j] != 0 || cz[j] != 0).collect();
    used.sort_unstable();
    Some(LocalRecovery { position: i, set: used, check_x: cx, check_z: cz })
}

/// For every position, two covering checks whose joint support has size at most r.
///
/// Attached recovery sets are tried first; otherwise all r-subsets containing the position
/// are searched.
pub fn local_recovery_sets(code: &CssCode, r: usize) -> Result<Vec<LocalRecovery>> {
    let n = code.n();
    let r = r.min(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut found = None;
        if let Some(sets) = &code.recovery_sets {
            for set in sets.iter().filter(|s| s.contains(&i) && s.len() <= r) {
                found = try_set(code, i, set);
                if found.is_some() {
                    break;
                }
            }
        }
        if found.is_none() && r > 0 {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let mut combo: Vec<usize> = (0..r - 1).collect();
            loop {
                let mut set: Vec<usize> = combo.iter().map(|&c| others[c]).collect();
                set.push(i);
                found = try_set(code, i, &set);
                if found.is_some() || !next_combination(&mut combo, others.len()) {
                    break;
                }
            }
        }
        out.push(found.ok_or(Error::NoCoveringCheck { position: i, r })?);
    }
    Ok(out)
}

/// Local syndromes (c_X' · bx, c_Z' · bz) of an error.
pub fn local_syndromes(f: &FieldCtx, rec: &LocalRecovery, e: &PauliError) -> (Felt, Felt) {
    (f.dot(&rec.check_x, &e.bx), f.dot(&rec.check_z, &e.bz))
}

/// The single-qudit Pauli at `rec.position` explaining the two local syndromes.
pub fn recover_pauli(code: &CssCode, rec: &LocalRecovery, sx: Felt, sz: Felt) -> PauliError {
    let f = code.ctx();
    let i = rec.position;
    let mut e = PauliError::identity(code.n());
    e.bx[i] = f.div(sx, rec.check_x[i]);
    e.bz[i] = f.div(sz, rec.check_z[i]);
    e
}

/// Weight of a vector in blocks of size s; s = 1 is Hamming weight.
pub fn folded_weight(v: &[Felt], s: usize) -> usize {
    block_weight(v, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{rs_code, DEFAULT_CAP};
    use crate::polycode::support_qtb;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qtb(q: u64, r: usize, ell: usize) -> CssCode {
        let f = FieldCtx::from_order(q).unwrap();
        let c = LinearCode::from_support(&support_qtb(&f, r, ell).unwrap());
        css_new(c.clone(), c).unwrap()
    }

    // Direct enumeration of the symplectic definition over all of F_q^n.
    fn naive_distance(code: &CssCode) -> usize {
        let f = code.ctx();
        let (n, q) = (code.n(), f.q() as usize);
        let mut best = n + 1;
        for idx in 1..q.pow(n as u32) {
            let mut x = idx;
            let v: Vec<Felt> = (0..n)
                .map(|_| {
                    let d = (x % q) as Felt;
                    x /= q;
                    d
                })
                .collect();
            let logical = (code.cz.contains(&v) && !code.cx_dual.contains(&v))
                || (code.cx.contains(&v) && !code.cz_dual.contains(&v));
            if logical {
                best = best.min(v.iter().filter(|&&a| a != 0).count());
            }
        }
        best
    }

    #[test]
    fn qtb_dimensions() {
        assert_eq!(qtb(13, 3, 8).k(), 2);
        assert_eq!(qtb(7, 3, 4).k(), 2);
        let code = qtb(13, 3, 8);
        assert_eq!(code.k(), code.n() - code.cx_dual().k() - code.cz_dual().k());
    }

    #[test]
    fn rs_13_4_is_rejected_with_witness() {
        let f = FieldCtx::from_order(13).unwrap();
        let c = rs_code(&f, 4).unwrap();
        match css_new(c.clone(), c.clone()) {
            Err(Error::OrthogonalityViolation { x_check, z_check, .. }) => {
                let d = c.dual();
                assert!(d.contains(&x_check) && d.contains(&z_check));
                assert_ne!(f.dot(&x_check, &z_check), 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn qtb_7_3_4_distance() {
        let code = qtb(7, 3, 4);
        assert_eq!(css_distance_brute(&code, DEFAULT_CAP).unwrap(), 2);
        assert_eq!(naive_distance(&code), 2);
    }

    #[test]
    fn small_rs_css_distance_matches_naive() {
        let f = FieldCtx::from_order(5).unwrap();
        let c = rs_code(&f, 3).unwrap();
        let code = css_new(c.clone(), c).unwrap();
        let d = css_distance_brute(&code, DEFAULT_CAP).unwrap();
        assert_eq!(d, naive_distance(&code));
        assert!(2 * d <= code.n() - code.k() + 2);
    }

    #[test]
    fn asymmetric_pair_distance_matches_naive() {
        let f = FieldCtx::from_order(5).unwrap();
        let cx = rs_code(&f, 3).unwrap();
        let cz = rs_code(&f, 2).unwrap();
        let code = css_new(cx, cz).unwrap();
        assert_eq!(code.k(), 1);
        assert_eq!(css_distance_brute(&code, DEFAULT_CAP).unwrap(), naive_distance(&code));
    }

    #[test]
    fn cap_is_enforced() {
        let code = qtb(13, 3, 8);
        assert!(matches!(css_distance_brute(&code, 1000), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn zero_and_stabilizer_errors() {
        let code = qtb(13, 3, 8);
        let f = code.ctx().clone();
        let dec = TableDecoder::new(code.cx(), 1, DEFAULT_CAP).unwrap();
        let zero = PauliError::identity(12);
        let (sx, sz) = syndrome(&code, &zero);
        assert!(sx.iter().chain(&sz).all(|&v| v == 0));
        let corr = css_decode(&code, &sx, &sz, &dec, &dec).unwrap();
        assert!(code.is_logical_identity(&zero.minus(&f, &corr)));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stab = PauliError { bx: code.cz_dual().random_codeword(&mut rng), bz: code.cx_dual().random_codeword(&mut rng) };
        let (sx, sz) = syndrome(&code, &stab);
        assert!(sx.iter().chain(&sz).all(|&v| v == 0));
        let corr = css_decode(&code, &sx, &sz, &dec, &dec).unwrap();
        assert!(code.is_logical_identity(&stab.minus(&f, &corr)));
    }

    #[test]
    fn every_single_qudit_error_is_corrected() {
        let code = qtb(13, 3, 8);
        let f = code.ctx().clone();
        let dec = TableDecoder::new(code.cx(), 1, DEFAULT_CAP).unwrap();
        for i in 0..12 {
            for a in 0..13 {
                for b in 0..13 {
                    let mut e = PauliError::identity(12);
                    e.bx[i] = a;
                    e.bz[i] = b;
                    let (sx, sz) = syndrome(&code, &e);
                    let corr = css_decode(&code, &sx, &sz, &dec, &dec).unwrap();
                    assert!(code.is_logical_identity(&e.minus(&f, &corr)));
                }
            }
        }
    }

    #[test]
    fn erasure_examples() {
        let code = qtb(7, 3, 4);
        assert!(can_decode_erasures(&code, &[]));
        for i in 0..6 {
            assert!(can_decode_erasures(&code, &[i]));
        }
        let w = css_distance_witness(&code, DEFAULT_CAP).unwrap().unwrap();
        let supp: Vec<usize> = (0..6).filter(|&i| w.witness[i] != 0).collect();
        assert_eq!(supp.len(), 2);
        assert!(!can_decode_erasures(&code, &supp));
    }

    #[test]
    fn erasures_consistent_with_distance() {
        let code = qtb(7, 3, 4);
        let d = css_distance_brute(&code, DEFAULT_CAP).unwrap();
        let mut some_fail = false;
        for mask in 0u32..64 {
            let set: Vec<usize> = (0..6).filter(|&i| mask >> i & 1 == 1).collect();
            let ok = can_decode_erasures(&code, &set);
            if set.len() < d {
                assert!(ok);
            }
            if set.len() == d && !ok {
                some_fail = true;
            }
        }
        assert!(some_fail);
    }

    #[test]
    fn qtb_recovery_sets_are_cosets() {
        let code = qtb(13, 3, 8);
        let f = code.ctx().clone();
        let recs = local_recovery_sets(&code, 3).unwrap();
        let mut sets: Vec<Vec<usize>> = recs.iter().map(|r| r.set.clone()).collect();
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.set.len(), 3);
            let coset: Vec<usize> = {
                let mut c: Vec<usize> = f.coset(3, f.exp(i)).unwrap().iter().map(|&v| f.log(v).unwrap()).collect();
                c.sort_unstable();
                c
            };
            assert_eq!(r.set, coset);
        }
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let i = rng.gen_range(0..12);
            let e = PauliError::random_on(&f, 12, &[i], &mut rng);
            let (sx, sz) = local_syndromes(&f, &recs[i], &e);
            assert_eq!(recover_pauli(&code, &recs[i], sx, sz), e);
        }
    }

    #[test]
    fn rs_css_has_no_local_checks() {
        let f = FieldCtx::from_order(13).unwrap();
        let c = rs_code(&f, 8).unwrap();
        let code = css_new(c.clone(), c).unwrap();
        assert_eq!(local_recovery_sets(&code, 3).unwrap_err(), Error::NoCoveringCheck { position: 0, r: 3 });
    }

    #[test]
    fn pauli_serializes_as_two_arrays() {
        let e = PauliError { bx: vec![1, 0], bz: vec![0, 2] };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"bx":[1,0],"bz":[0,2]}"#);
        assert_eq!(serde_json::from_str::<PauliError>(&s).unwrap(), e);
    }

    proptest! {
        #[test]
        fn erasure_monotone(mask in 0u32..4096, drop in 0usize..12) {
            let code = qtb(13, 3, 8);
            let set: Vec<usize> = (0..12).filter(|&i| mask >> i & 1 == 1).collect();
            if can_decode_erasures(&code, &set) {
                let sub: Vec<usize> = set.iter().copied().filter(|&i| i != drop).collect();
                prop_assert!(can_decode_erasures(&code, &sub));
            }
        }

        #[test]
        fn css_new_iff_self_orthogonal(rows in proptest::collection::vec(proptest::collection::vec(0u32..3, 4), 0..4)) {
            let f = FieldCtx::from_order(3).unwrap();
            let c = LinearCode::from_rows(&f, &rows, 4);
            let contains = c.dual().is_subcode_of(&c);
            prop_assert_eq!(css_new(c.clone(), c).is_ok(), contains);
        }
    }
}
