//! Monomial-support polynomial spaces, evaluation on GF(q)*, and folding.
//!
//! Position i of an evaluation word holds the value at omega^i.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::linalg::Matrix;

/// A sorted set of exponents in [0, q-2].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    ctx: Arc<FieldCtx>,
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(ctx: &Arc<FieldCtx>, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&top) = indices.last() {
            if top >= ctx.order() {
                return Err(Error::DegreeOverflow { degree: top, n: ctx.order() });
            }
        }
        Ok(SupportSet { ctx: ctx.clone(), indices })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
    pub fn len(&self) -> usize {
        self.indices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Exponents in `self` but not in `other`.
    pub fn difference(&self, other: &SupportSet) -> Vec<usize> {
        self.indices.iter().copied().filter(|&i| !other.contains(i)).collect()
    }

    /// Rows ev(X^j) for j in the set, in increasing j.
    pub fn generator_matrix(&self) -> Matrix {
        let n = self.ctx.order();
        let mut m = Matrix::zeros(self.indices.len(), n);
        for (row, &j) in self.indices.iter().enumerate() {
            for i in 0..n {
                m.set(row, i, self.ctx.exp((i * j) % n));
            }
        }
        m
    }
}

fn check_locality(ctx: &FieldCtx, r: usize) -> Result<()> {
    if r < 3 {
        return Err(Error::BadLocality { q: ctx.q(), r, reason: "locality must be at least 3" });
    }
    if ctx.order() % r != 0 {
        return Err(Error::BadLocality { q: ctx.q(), r, reason: "locality must divide q-1" });
    }
    Ok(())
}

fn check_degree(ctx: &FieldCtx, ell: usize) -> Result<()> {
    if ell == 0 || ell >= ctx.q() as usize {
        return Err(Error::BadDegree { q: ctx.q(), ell });
    }
    Ok(())
}

/// [ell], the Reed-Solomon message space.
pub fn support_rs(ctx: &Arc<FieldCtx>, ell: usize) -> Result<SupportSet> {
    check_degree(ctx, ell)?;
    SupportSet::new(ctx, (0..ell).collect())
}

/// {i in [ell] : i != r-1 mod r}
pub fn support_tb(ctx: &Arc<FieldCtx>, r: usize, ell: usize) -> Result<SupportSet> {
    check_locality(ctx, r)?;
    check_degree(ctx, ell)?;
    SupportSet::new(ctx, (0..ell).filter(|i| i % r != r - 1).collect())
}

fn check_qtb(ctx: &FieldCtx, r: usize, ell: usize) -> Result<()> {
    check_locality(ctx, r)?;
    check_degree(ctx, ell)?;
    if 2 * ell < ctx.q() as usize {
        return Err(Error::DegreeTooSmall { q: ctx.q(), ell });
    }
    Ok(())
}

/// Exponents congruent to 1 mod r in [q-1]: the piecewise-linear space.
pub fn support_piecewise(ctx: &Arc<FieldCtx>, r: usize) -> Result<SupportSet> {
    if r == 0 || ctx.order() % r != 0 {
        return Err(Error::NotADivisor { r, order: ctx.order() });
    }
    SupportSet::new(ctx, (0..ctx.order()).filter(|i| i % r == 1 % r).collect())
}

/// TB support together with every exponent congruent to 1 mod r.
pub fn support_qtb(ctx: &Arc<FieldCtx>, r: usize, ell: usize) -> Result<SupportSet> {
    check_qtb(ctx, r, ell)?;
    let n = ctx.order();
    SupportSet::new(ctx, (0..n).filter(|&i| (i < ell && i % r != r - 1) || i % r == 1).collect())
}

/// Support of the dual of the qTB classical code.
pub fn support_qtb_dual(ctx: &Arc<FieldCtx>, r: usize, ell: usize) -> Result<SupportSet> {
    check_qtb(ctx, r, ell)?;
    let q = ctx.q() as usize;
    let n = ctx.order();
    SupportSet::new(ctx, (0..n).filter(|&i| (i >= 1 && i < q - ell && i % r != r - 1) || i % r == 1).collect())
}

/// Dense univariate polynomial, coefficient i multiplies X^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensePoly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<Felt>,
}

impl DensePoly {
    pub fn new(ctx: &Arc<FieldCtx>, mut coeffs: Vec<Felt>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        DensePoly { ctx: ctx.clone(), coeffs }
    }

    pub fn monomial(ctx: &Arc<FieldCtx>, degree: usize, c: Felt) -> Self {
        let mut v = vec![0; degree + 1];
        v[degree] = c;
        Self::new(ctx, v)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    pub fn coeffs(&self) -> &[Felt] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn coeff(&self, i: usize) -> Felt {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, x: Felt) -> Felt {
        poly_eval(&self.ctx, &self.coeffs, x)
    }

    /// Values at omega^0, ..., omega^(q-2).
    pub fn evaluate(&self) -> Result<EvalWord> {
        let n = self.ctx.order();
        if let Some(d) = self.degree() {
            if d >= n {
                return Err(Error::DegreeOverflow { degree: d, n });
            }
        }
        let values = (0..n).map(|i| self.eval(self.ctx.exp(i))).collect();
        Ok(EvalWord { ctx: self.ctx.clone(), values })
    }

    /// f mod (X^r - c): coefficient i is sum_j f_{i+rj} c^j.
    pub fn mod_reduce(&self, r: usize, c: Felt) -> Result<DensePoly> {
        if c == 0 {
            return Err(Error::ZeroShift);
        }
        if r == 0 {
            return Err(Error::InvalidParameter("modulus degree must be positive".into()));
        }
        let f = &self.ctx;
        let mut out = vec![0; r.min(self.coeffs.len())];
        let mut cj = 1;
        for (block, chunk) in self.coeffs.chunks(r).enumerate() {
            if block > 0 {
                cj = f.mul(cj, c);
            }
            f.axpy(&mut out[..chunk.len()], cj, chunk);
        }
        Ok(DensePoly::new(f, out))
    }
}

pub(crate) fn poly_eval(f: &FieldCtx, coeffs: &[Felt], x: Felt) -> Felt {
    coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

/// A word indexed by positions omega^0, ..., omega^(q-2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalWord {
    ctx: Arc<FieldCtx>,
    values: Vec<Felt>,
}

impl EvalWord {
    pub fn new(ctx: &Arc<FieldCtx>, values: Vec<Felt>) -> Result<Self> {
        if values.len() != ctx.order() {
            return Err(Error::DimensionMismatch(format!("word length {} but q-1 = {}", values.len(), ctx.order())));
        }
        Ok(EvalWord { ctx: ctx.clone(), values })
    }
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    pub fn values(&self) -> &[Felt] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Felt> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Groups positions si..si+s-1 into block i.
    pub fn fold(&self, s: usize) -> Result<FoldedWord> {
        let n = self.values.len();
        if s == 0 || n % s != 0 {
            return Err(Error::FoldMismatch { s, n });
        }
        let blocks = self.values.chunks(s).map(|c| c.to_vec()).collect();
        Ok(FoldedWord { ctx: self.ctx.clone(), s, blocks })
    }
}

/// An evaluation word regrouped into blocks of s consecutive positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedWord {
    ctx: Arc<FieldCtx>,
    s: usize,
    blocks: Vec<Vec<Felt>>,
}

impl FoldedWord {
    pub fn new(ctx: &Arc<FieldCtx>, s: usize, blocks: Vec<Vec<Felt>>) -> Result<Self> {
        let n = ctx.order();
        if s == 0 || n % s != 0 {
            return Err(Error::FoldMismatch { s, n });
        }
        if blocks.len() != n / s || blocks.iter().any(|b| b.len() != s) {
            return Err(Error::DimensionMismatch("folded word has the wrong shape".into()));
        }
        Ok(FoldedWord { ctx: ctx.clone(), s, blocks })
    }
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn blocks(&self) -> &[Vec<Felt>] {
        &self.blocks
    }
    pub fn unfold(&self) -> EvalWord {
        EvalWord { ctx: self.ctx.clone(), values: self.blocks.concat() }
    }
}

/// Number of blocks of size s containing a nonzero entry.
pub fn block_weight(v: &[Felt], s: usize) -> usize {
    v.chunks(s).filter(|c| c.iter().any(|&x| x != 0)).count()
}

/// Number of nonzero entries.
pub fn weight(v: &[Felt]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u64) -> Arc<FieldCtx> {
        FieldCtx::from_order(q).unwrap()
    }

    #[test]
    fn support_examples() {
        let f13 = gf(13);
        assert_eq!(support_tb(&f13, 3, 8).unwrap().indices(), &[0, 1, 3, 4, 6, 7]);
        assert_eq!(support_tb(&gf(7), 3, 4).unwrap().indices(), &[0, 1, 3]);
        assert_eq!(support_tb(&f13, 3, 1).unwrap().indices(), &[0]);
        assert_eq!(support_qtb(&f13, 3, 8).unwrap().indices(), &[0, 1, 3, 4, 6, 7, 10]);
        assert_eq!(support_qtb(&gf(7), 3, 4).unwrap().indices(), &[0, 1, 3, 4]);
        assert_eq!(support_qtb_dual(&f13, 3, 8).unwrap().indices(), &[1, 3, 4, 7, 10]);
        assert_eq!(support_qtb_dual(&gf(7), 3, 4).unwrap().indices(), &[1, 4]);
    }

    #[test]
    fn support_qtb_127_by_enumeration() {
        let f = gf(127);
        let s = support_qtb(&f, 3, 80).unwrap();
        let tb = (0..80).filter(|i| i % 3 != 2).count();
        let extra = (80..126).filter(|i| i % 3 == 1).count();
        assert_eq!(s.len(), tb + extra);
        assert_eq!(s.len(), 80 - 80 / 3 + extra);
    }

    #[test]
    fn support_errors() {
        let f13 = gf(13);
        assert!(matches!(support_tb(&f13, 5, 8), Err(Error::BadLocality { .. })));
        assert!(matches!(support_tb(&f13, 2, 8), Err(Error::BadLocality { .. })));
        assert!(matches!(support_tb(&f13, 3, 0), Err(Error::BadDegree { .. })));
        assert!(matches!(support_tb(&f13, 3, 13), Err(Error::BadDegree { .. })));
        assert!(matches!(support_qtb(&f13, 3, 6), Err(Error::DegreeTooSmall { .. })));
    }

    #[test]
    fn dual_support_sizes_on_grid() {
        for q in [7u64, 13, 16, 19, 25, 31, 37, 43, 49, 61, 64] {
            let f = gf(q);
            for r in (3..f.order()).filter(|r| f.order() % r == 0) {
                for ell in (q as usize).div_ceil(2)..q as usize {
                    let s = support_qtb(&f, r, ell).unwrap();
                    let t = support_qtb_dual(&f, r, ell).unwrap();
                    assert_eq!(s.len() + t.len(), f.order());
                    assert!(t.is_subset(&s));
                }
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let f13 = gf(13);
        let one = DensePoly::new(&f13, vec![1]).evaluate().unwrap();
        assert_eq!(one.values(), &[1; 12]);
        let f7 = gf(7);
        let x = DensePoly::new(&f7, vec![0, 1]).evaluate().unwrap();
        let mut powers = Vec::new();
        let mut p = 1u32;
        for _ in 0..6 {
            powers.push(p);
            p = p * 3 % 7;
        }
        assert_eq!(x.values(), &powers[..]);
        assert_eq!(x.values(), &[1, 3, 2, 6, 4, 5]);
        assert_eq!(x.fold(1).unwrap().blocks().len(), 6);
        assert!(matches!(x.fold(4), Err(Error::FoldMismatch { .. })));
        let big = DensePoly::monomial(&f7, 6, 1);
        assert!(matches!(big.evaluate(), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn evaluation_is_injective_exhaustively() {
        // every nonzero polynomial of degree < q-1 evaluates to a nonzero word (q <= 7)
        for q in [3u64, 4, 5, 7] {
            let f = gf(q);
            let n = f.order();
            let total = (q as usize).pow(n as u32);
            let mut seen = std::collections::HashSet::new();
            for code in 0..total {
                let mut c = code;
                let coeffs: Vec<Felt> = (0..n)
                    .map(|_| {
                        let d = (c % q as usize) as Felt;
                        c /= q as usize;
                        d
                    })
                    .collect();
                let w = DensePoly::new(&f, coeffs).evaluate().unwrap();
                assert!(seen.insert(w.into_values()));
            }
        }
    }

    #[test]
    fn evaluation_map_has_full_rank() {
        for q in [3u64, 4, 5, 7, 8, 9, 11, 13] {
            let f = gf(q);
            let all = SupportSet::new(&f, (0..f.order()).collect()).unwrap();
            assert_eq!(all.generator_matrix().rank(&f), f.order());
        }
    }

    #[test]
    fn generator_rows_match_evaluate() {
        let f = gf(13);
        let s = support_qtb(&f, 3, 8).unwrap();
        let g = s.generator_matrix();
        for (row, &j) in s.indices().iter().enumerate() {
            let w = DensePoly::monomial(&f, j, 1).evaluate().unwrap();
            assert_eq!(g.row(row), w.values());
        }
    }

    #[test]
    fn mod_reduce_examples() {
        let f = gf(13);
        let c = 8;
        let g = DensePoly::monomial(&f, 4, 1).mod_reduce(3, c).unwrap();
        assert_eq!(g.coeffs(), &[0, c]);
        let h = DensePoly::new(&f, vec![1, 0, 1]);
        assert_eq!(h.mod_reduce(3, c).unwrap(), h);
        assert_eq!(h.mod_reduce(3, 0).unwrap_err(), Error::ZeroShift);
    }

    #[test]
    fn piecewise_slopes_constant_per_coset() {
        let f = gf(13);
        let r = 3;
        for j in [1usize, 4, 7, 10] {
            let w = DensePoly::monomial(&f, j, 1).evaluate().unwrap();
            for x in 1..13 {
                let coset = f.coset(r, x).unwrap();
                let slopes: Vec<Felt> = coset.iter().map(|&y| f.div(w.values()[f.log(y).unwrap()], y)).collect();
                assert!(slopes.iter().all(|&b| b == slopes[0]));
            }
        }
    }

    proptest! {
        #[test]
        fn mod_reduce_agrees_pointwise(coeffs in proptest::collection::vec(0u32..13, 0..12), c in 1u32..13) {
            let f = gf(13);
            let p = DensePoly::new(&f, coeffs);
            let g = p.mod_reduce(3, c).unwrap();
            prop_assert!(g.degree().map_or(true, |d| d < 3));
            for x in 1..13u32 {
                if f.pow(x, 3) == c {
                    prop_assert_eq!(p.eval(x), g.eval(x));
                }
            }
        }

        #[test]
        fn fold_round_trip(values in proptest::collection::vec(0u32..13, 12), s in prop::sample::select(vec![1usize, 2, 3, 4, 6, 12])) {
            let f = gf(13);
            let w = EvalWord::new(&f, values).unwrap();
            prop_assert_eq!(w.fold(s).unwrap().unfold(), w);
        }
    }
}
