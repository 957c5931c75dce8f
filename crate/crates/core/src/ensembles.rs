//! Random qLRCs and AEL distance amplification over sampled bipartite expanders.

use std::collections::HashSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::entropy_q;
use crate::classical::{find_low_weight_excluding, LinearCode, DEFAULT_CAP};
use crate::css::{css_decode, css_distance_brute, css_new, syndrome, ClassicalDecoder, CssCode, PauliError, TableDecoder};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::linalg::Matrix;
use crate::qtbdec::QuantumOutcome;

/// A sample from the random qLRC ensemble.
#[derive(Clone, Debug)]
pub struct RandomQlrc {
    pub css: CssCode,
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub q: u32,
    pub seed: u64,
    pub hx: Matrix,
    pub hz: Matrix,
}

impl RandomQlrc {
    pub fn k(&self) -> usize {
        self.css.k()
    }
    /// Recovery set {ar, ..., ar + r - 1} of position i.
    pub fn recovery_set(&self, i: usize) -> Vec<usize> {
        let a = i / self.r;
        (a * self.r..(a + 1) * self.r).collect()
    }
}

/// Z-check pattern on one block, orthogonal to the all-ones X pattern and nonzero everywhere.
///
/// The plain pattern (-(r-1), 1, ..., 1) has a zero first entry when p divides r - 1; there
/// (1 - c, c, 1, ..., 1) with c ∉ {0, 1} is used instead.
pub fn z_block_pattern(f: &FieldCtx, r: usize) -> Result<Vec<Felt>> {
    let lead = f.neg(f.from_int(r as i64 - 1));
    let mut v = vec![1; r];
    if lead != 0 {
        v[0] = lead;
        return Ok(v);
    }
    if f.q() <= 2 {
        return Err(Error::InvalidParameter(format!("no nowhere-zero local Z check over GF(2) with r = {r}")));
    }
    let c = 2;
    v[0] = f.sub(1, c);
    v[1] = c;
    Ok(v)
}

fn check_random_params(n: usize, r: usize, ell: usize) -> Result<()> {
    if r < 3 || n % r != 0 {
        return Err(Error::InvalidParameter(format!("need r ≥ 3 dividing n; got n={n}, r={r}")));
    }
    if ell < 1 || 2 * ell + 2 * (n / r) > n {
        return Err(Error::InvalidParameter(format!("ℓ = {ell} outside [1, n/2 - n/r]")));
    }
    Ok(())
}

fn sample_outside<R: Rng + ?Sized>(f: &FieldCtx, space: &Matrix, span: &Matrix, rng: &mut R) -> Result<Vec<Felt>> {
    if space.rows() <= span.rank(f) {
        return Err(Error::SamplingExhausted);
    }
    let rr = span.rref(f);
    loop {
        let mut v = vec![0; space.cols()];
        for row in space.row_iter() {
            let c = rng.gen_range(0..f.q());
            if c != 0 {
                f.axpy(&mut v, c, row);
            }
        }
        if !rr.contains(f, &v) {
            return Ok(v);
        }
    }
}

/// Samples a random qLRC: block checks, then ℓ X rows, then ℓ Z rows, each uniform outside the current span.
pub fn random_qlrc_in<R: Rng + ?Sized>(ctx: &Arc<FieldCtx>, n: usize, r: usize, ell: usize, rng: &mut R) -> Result<(CssCode, Matrix, Matrix)> {
    check_random_params(n, r, ell)?;
    let f: &FieldCtx = ctx;
    let zpat = z_block_pattern(f, r)?;
    let mut hx = Matrix::zeros(0, n);
    let mut hz = Matrix::zeros(0, n);
    for j in 0..n / r {
        let mut x = vec![0; n];
        let mut z = vec![0; n];
        for t in 0..r {
            x[j * r + t] = 1;
            z[j * r + t] = zpat[t];
        }
        hx.push_row(&x);
        hz.push_row(&z);
    }
    for _ in 0..ell {
        let v = sample_outside(f, &hz.nullspace(f), &hx, rng)?;
        hx.push_row(&v);
    }
    for _ in 0..ell {
        let v = sample_outside(f, &hx.nullspace(f), &hz, rng)?;
        hz.push_row(&v);
    }
    let cx = LinearCode::from_parity_checks(ctx, &hx);
    let cz = LinearCode::from_parity_checks(ctx, &hz);
    let sets = (0..n / r).map(|a| (a * r..(a + 1) * r).collect()).collect();
    let css = css_new(cx, cz)?.with_recovery_sets(sets);
    Ok((css, hx, hz))
}

pub fn random_qlrc(n: usize, r: usize, ell: usize, q: u64, seed: u64) -> Result<RandomQlrc> {
    let ctx = FieldCtx::from_order(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (css, hx, hz) = random_qlrc_in(&ctx, n, r, ell, &mut rng)?;
    Ok(RandomQlrc { css, n, r, ell, q: q as u32, seed, hx, hz })
}

/// Stream `t` of the ChaCha generator keyed by `seed`.
pub fn trial_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// Wilson score interval at z standard deviations.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let den = 1.0 + z * z / n;
    let mid = (p + z * z / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvEstimate {
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// 1 - 2 q^{-εn} with ε = ℓ/n - H_q(δ).
    pub bound: f64,
    pub distances: Vec<usize>,
}

/// 1 - 2 q^{-εn} for ε = ℓ/n - H_q(δ).
pub fn gv_bound(n: usize, ell: usize, q: u64, delta: f64) -> Result<f64> {
    let eps = ell as f64 / n as f64 - entropy_q(delta, q)?;
    Ok(1.0 - 2.0 * (q as f64).powf(-eps * n as f64))
}

/// Empirical Pr[d ≥ δn] over `trials` samples, each with its own seed stream.
pub fn gv_estimate(n: usize, r: usize, ell: usize, q: u64, delta: f64, trials: usize, seed: u64) -> Result<GvEstimate> {
    check_random_params(n, r, ell)?;
    let required = (q as u128).checked_pow((n - (n / r + ell)) as u32).unwrap_or(u128::MAX);
    if required > DEFAULT_CAP {
        return Err(Error::CapExceeded { required, cap: DEFAULT_CAP });
    }
    let ctx = FieldCtx::from_order(q)?;
    let bound = gv_bound(n, ell, q, delta)?;
    let target = (delta * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let distances = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let (css, _, _) = random_qlrc_in(&ctx, n, r, ell, &mut rng)?;
            css_distance_brute(&css, DEFAULT_CAP)
        })
        .collect::<Result<Vec<usize>>>()?;
    let successes = distances.iter().filter(|&&d| d >= target).count();
    let (wilson_low, wilson_high) = wilson_interval(successes, trials, 1.96);
    let frequency = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
    Ok(GvEstimate { trials, successes, frequency, wilson_low, wilson_high, bound, distances })
}

/// Δ-regular bipartite graph; `left[u][j]` is the right endpoint of the j-th edge at left vertex u.
///
/// Right-side edge order is derived: edges at a right vertex are ordered by (u, j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderGraph {
    pub n: usize,
    pub delta: usize,
    pub left: Vec<Vec<usize>>,
    pub lambda: f64,
}

impl ExpanderGraph {
    /// Builds from left adjacency lists and measures λ.
    pub fn from_neighbors(left: Vec<Vec<usize>>) -> Result<Self> {
        let n = left.len();
        let delta = left.first().map_or(0, |v| v.len());
        let mut indeg = vec![0; n];
        for adj in &left {
            if adj.len() != delta {
                return Err(Error::InvalidParameter("left side is not regular".into()));
            }
            for &v in adj {
                if v >= n {
                    return Err(Error::InvalidParameter(format!("right vertex {v} out of range")));
                }
                indeg[v] += 1;
            }
        }
        if indeg.iter().any(|&d| d != delta) {
            return Err(Error::InvalidParameter("right side is not regular".into()));
        }
        let mut g = ExpanderGraph { n, delta, left, lambda: 0.0 };
        g.lambda = measure_lambda(&g);
        Ok(g)
    }

    /// K_{n,n}.
    pub fn complete(n: usize) -> Self {
        Self::from_neighbors((0..n).map(|_| (0..n).collect()).collect()).expect("complete graph is regular")
    }

    /// Every edge as (u, j, v, j'): j-th edge at left u is the j'-th edge at right v.
    pub fn edges(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut slot = vec![0; self.n];
        let mut out = Vec::with_capacity(self.n * self.delta);
        for (u, adj) in self.left.iter().enumerate() {
            for (j, &v) in adj.iter().enumerate() {
                out.push((u, j, v, slot[v]));
                slot[v] += 1;
            }
        }
        out
    }

    /// π_G on flattened indices u Δ + j -> v Δ + j'.
    pub fn permutation(&self) -> Vec<usize> {
        let mut p = vec![0; self.n * self.delta];
        for (u, j, v, jj) in self.edges() {
            p[u * self.delta + j] = v * self.delta + jj;
        }
        p
    }
}

/// Second singular value of the biadjacency matrix over Δ.
pub fn measure_lambda(g: &ExpanderGraph) -> f64 {
    if g.n == 0 || g.delta == 0 {
        return 0.0;
    }
    let mut m = DMatrix::<f64>::zeros(g.n, g.n);
    for (u, adj) in g.left.iter().enumerate() {
        for &v in adj {
            m[(u, v)] += 1.0;
        }
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let s2 = if sv.len() > 1 { sv[1] } else { 0.0 };
    (s2 / g.delta as f64).clamp(0.0, 1.0)
}

/// Perfect matching avoiding `used` edges by augmenting paths, visiting vertices in random order.
fn kuhn_matching<R: Rng + ?Sized>(n: usize, used: &[HashSet<usize>], rng: &mut R) -> Option<Vec<usize>> {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], match_r: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_r[v].is_none_or(|w| augment(w, adj, seen, match_r)) {
                match_r[v] = Some(u);
                return true;
            }
        }
        false
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            let mut a: Vec<usize> = (0..n).filter(|v| !used[u].contains(v)).collect();
            a.shuffle(rng);
            a
        })
        .collect();
    let mut match_r = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for u in order {
        let mut seen = vec![false; n];
        if !augment(u, &adj, &mut seen, &mut match_r) {
            return None;
        }
    }
    let mut m = vec![0; n];
    for (v, u) in match_r.iter().enumerate() {
        m[u.unwrap()] = v;
    }
    Some(m)
}

/// Random permutation attempts per matching before falling back to augmenting paths.
pub const MATCHING_RETRIES: usize = 64;
pub const GRAPH_RESTARTS: usize = 16;

/// Union of Δ perfect matchings without repeated edges.
pub fn expander_sample(n: usize, delta: usize, seed: u64) -> Result<ExpanderGraph> {
    if delta < 3 || delta > n {
        return Err(Error::InvalidParameter(format!("need 3 ≤ Δ ≤ n; got Δ={delta}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GRAPH_RESTARTS {
        let mut used: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        let mut left: Vec<Vec<usize>> = vec![Vec::with_capacity(delta); n];
        let mut ok = true;
        for _ in 0..delta {
            let mut perm: Vec<usize> = (0..n).collect();
            let mut found = None;
            for _ in 0..MATCHING_RETRIES {
                perm.shuffle(&mut rng);
                if (0..n).all(|u| !used[u].contains(&perm[u])) {
                    found = Some(perm.clone());
                    break;
                }
            }
            let Some(m) = found.or_else(|| kuhn_matching(n, &used, &mut rng)) else {
                ok = false;
                break;
            };
            for u in 0..n {
                used[u].insert(m[u]);
                left[u].push(m[u]);
            }
        }
        if ok {
            return ExpanderGraph::from_neighbors(left);
        }
    }
    Err(Error::SamplingFailedAfterRetries(GRAPH_RESTARTS))
}

/// α_in - λ √(α_in / α_out).
pub fn ael_radius(alpha_in: f64, alpha_out: f64, lambda: f64) -> f64 {
    alpha_in - lambda * (alpha_in / alpha_out).sqrt()
}

/// Outer CSS code concatenated with a k_in = 1 inner code, folded into Δ-blocks and permuted along G.
#[derive(Clone, Debug)]
pub struct AelCode {
    pub outer: CssCode,
    pub inner: CssCode,
    pub graph: ExpanderGraph,
    pub delta: usize,
    /// Concatenated position -> final position.
    pub perm: Vec<usize>,
    /// Inner logical representatives with xbar · zbar = 1.
    pub xbar: Vec<Felt>,
    pub zbar: Vec<Felt>,
    pub css: CssCode,
    pub locality: Option<usize>,
}

impl AelCode {
    pub fn n(&self) -> usize {
        self.css.n()
    }
    pub fn k(&self) -> usize {
        self.css.k()
    }
    /// Number of folded components.
    pub fn components(&self) -> usize {
        self.n() / self.delta
    }
    pub fn rate(&self) -> (usize, usize) {
        (self.k(), self.n())
    }
}

/// x in `c` outside `d`, and z in `c2` outside `d2` with x · z = 1.
fn logical_pair(inner: &CssCode) -> Result<(Vec<Felt>, Vec<Felt>)> {
    let f = inner.ctx();
    let rx = inner.cz_dual().rref();
    let xbar = inner
        .cx()
        .basis()
        .row_iter()
        .find(|r| !rx.contains(f, r))
        .ok_or_else(|| Error::InvalidParameter("inner code has no logical qudit".into()))?
        .to_vec();
    let rz = inner.cx_dual().rref();
    for z in inner.cz().basis().row_iter() {
        if rz.contains(f, z) {
            continue;
        }
        let d = f.dot(&xbar, z);
        if d != 0 {
            let inv = f.inv(d);
            return Ok((xbar, z.iter().map(|&v| f.mul(v, inv)).collect()));
        }
    }
    Err(Error::InvalidParameter("no Z logical pairs with the X logical".into()))
}

fn concat_rows(f: &FieldCtx, outer: &LinearCode, inner_gauge: &LinearCode, logical: &[Felt], perm: &[usize]) -> Vec<Vec<Felt>> {
    let (n_out, n_in) = (outer.n(), logical.len());
    let n = n_out * n_in;
    let place = |v: Vec<Felt>| {
        let mut w = vec![0; n];
        for (i, x) in v.into_iter().enumerate() {
            w[perm[i]] = x;
        }
        w
    };
    let mut rows = Vec::new();
    for c in outer.basis().row_iter() {
        let mut v = vec![0; n];
        for (b, &cb) in c.iter().enumerate() {
            for (t, &l) in logical.iter().enumerate() {
                v[b * n_in + t] = f.mul(cb, l);
            }
        }
        rows.push(place(v));
    }
    for b in 0..n_out {
        for g in inner_gauge.basis().row_iter() {
            let mut v = vec![0; n];
            v[b * n_in..(b + 1) * n_in].copy_from_slice(g);
            rows.push(place(v));
        }
    }
    rows
}

/// Concatenate, fold into Δ-blocks, and permute along G.
pub fn ael_build(outer: &CssCode, inner: &CssCode, g: &ExpanderGraph, delta: usize) -> Result<AelCode> {
    let f = inner.ctx().clone();
    if **outer.ctx() != *f {
        return Err(Error::AlphabetMismatch(format!("outer alphabet {} vs inner alphabet {}^k_in", outer.ctx().q(), f.q())));
    }
    if inner.k() != 1 {
        return Err(Error::AlphabetMismatch(format!("q_out = q_in needs k_in = 1, got {}", inner.k())));
    }
    let (n_out, n_in) = (outer.n(), inner.n());
    if delta == 0 || n_in % delta != 0 {
        return Err(Error::FoldingMismatch(format!("Δ = {delta} does not divide n_in = {n_in}")));
    }
    let comps = n_out * n_in / delta;
    if g.n != comps || g.delta != delta {
        return Err(Error::FoldingMismatch(format!("graph is {}-regular on {} vertices, need {delta}-regular on {comps}", g.delta, g.n)));
    }
    let perm = g.permutation();
    let (xbar, zbar) = logical_pair(inner)?;
    let xrows = concat_rows(&f, outer.cx(), inner.cz_dual(), &xbar, &perm);
    let zrows = concat_rows(&f, outer.cz(), inner.cx_dual(), &zbar, &perm);
    let n = n_out * n_in;
    let cx = LinearCode::from_rows(&f, &xrows, n);
    let cz = LinearCode::from_rows(&f, &zrows, n);
    let mut css = css_new(cx, cz)?.with_fold(delta)?;
    let mut locality = None;
    if let Some(sets) = inner.recovery_sets() {
        let mapped: Vec<Vec<usize>> = (0..n_out)
            .flat_map(|b| sets.iter().map(move |s| s.iter().map(|&i| b * n_in + i).collect::<Vec<_>>()))
            .map(|s| s.into_iter().map(|i| perm[i]).collect())
            .collect();
        if locality_structure_holds(sets, n_in, delta, &mapped) {
            locality = Some(delta * sets[0].len());
        }
        css = css.with_recovery_sets(mapped);
    }
    Ok(AelCode { outer: outer.clone(), inner: inner.clone(), graph: g.clone(), delta, perm, xbar, zbar, css, locality })
}

/// Inner sets partition [n_in] with a common size r | Δ, each inside one Δ-block,
/// and every mapped set meets distinct final components.
pub fn locality_structure_holds(sets: &[Vec<usize>], n_in: usize, delta: usize, mapped: &[Vec<usize>]) -> bool {
    let Some(r) = sets.first().map(|s| s.len()) else { return false };
    let mut seen = vec![false; n_in];
    for s in sets {
        if s.len() != r || s.iter().any(|&i| i / delta != s[0] / delta) {
            return false;
        }
        for &i in s {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    if r == 0 || delta % r != 0 || seen.iter().any(|&x| !x) {
        return false;
    }
    mapped.iter().all(|s| {
        let comps: HashSet<usize> = s.iter().map(|&i| i / delta).collect();
        comps.len() == s.len()
    })
}

/// Which half of the CSS pair a decoder serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    X,
    Z,
}

/// Unpermute, decode each inner block, read its logical symbol, decode the outer word.
pub struct AelDecoder<'a> {
    code: &'a AelCode,
    side: Side,
    inner: TableDecoder,
    outer: &'a dyn ClassicalDecoder,
}

impl<'a> AelDecoder<'a> {
    pub fn new(code: &'a AelCode, side: Side, inner_radius: usize, outer: &'a dyn ClassicalDecoder) -> Result<Self> {
        let c = match side {
            Side::X => code.inner.cx(),
            Side::Z => code.inner.cz(),
        };
        let inner = TableDecoder::new(c, inner_radius, DEFAULT_CAP)?;
        Ok(AelDecoder { code, side, inner, outer })
    }
}

/// Decoded word plus the outer symbols read off the inner blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AelWordDecode {
    pub word: Vec<Felt>,
    pub inner_symbols: Vec<Felt>,
    pub outer_word: Vec<Felt>,
    pub inner_failures: usize,
}

pub fn ael_decode(dec: &AelDecoder<'_>, word: &[Felt]) -> Result<AelWordDecode> {
    let code = dec.code;
    let f = code.css.ctx();
    let n_in = code.inner.n();
    let n_out = code.outer.n();
    if word.len() != n_in * n_out {
        return Err(Error::DimensionMismatch(format!("word of length {} vs n = {}", word.len(), n_in * n_out)));
    }
    let (read, write) = match dec.side {
        Side::X => (&code.zbar, &code.xbar),
        Side::Z => (&code.xbar, &code.zbar),
    };
    let unperm: Vec<Felt> = code.perm.iter().map(|&p| word[p]).collect();
    let mut inner_symbols = Vec::with_capacity(n_out);
    let mut inner_failures = 0;
    for blk in unperm.chunks(n_in) {
        match dec.inner.decode(blk) {
            Ok(c) => inner_symbols.push(f.dot(&c, read)),
            Err(_) => {
                inner_failures += 1;
                inner_symbols.push(0);
            }
        }
    }
    let outer_word = dec.outer.decode(&inner_symbols)?;
    let mut out = vec![0; word.len()];
    for (b, &s) in outer_word.iter().enumerate() {
        for (t, &l) in write.iter().enumerate() {
            out[code.perm[b * n_in + t]] = f.mul(s, l);
        }
    }
    Ok(AelWordDecode { word: out, inner_symbols, outer_word, inner_failures })
}

impl ClassicalDecoder for AelDecoder<'_> {
    fn decode(&self, word: &[Felt]) -> Result<Vec<Felt>> {
        Ok(ael_decode(self, word)?.word)
    }
}

/// Syndrome decoding of a Pauli error on an AEL code.
pub fn ael_quantum_decode(code: &AelCode, err: &PauliError, dec_x: &AelDecoder<'_>, dec_z: &AelDecoder<'_>) -> Result<QuantumOutcome> {
    let f = code.css.ctx();
    let (sx, sz) = syndrome(&code.css, err);
    let correction = css_decode(&code.css, &sx, &sz, dec_x, dec_z)?;
    let residual = err.minus(f, &correction);
    let logical_identity = code.css.is_logical_identity(&residual);
    Ok(QuantumOutcome { correction, residual, logical_identity })
}

/// Resamples random qLRCs until one has no logical of weight below `min_distance`,
/// checked by exhaustive support search.
pub fn sample_inner_code(ctx: &Arc<FieldCtx>, n: usize, r: usize, ell: usize, min_distance: usize, seed: u64, attempts: usize) -> Result<(CssCode, usize)> {
    for t in 0..attempts {
        let mut rng = trial_rng(seed, t as u64);
        let (css, _, _) = random_qlrc_in(ctx, n, r, ell, &mut rng)?;
        let w = min_distance.saturating_sub(1);
        let low_x = find_low_weight_excluding(css.cx(), css.cz_dual(), w)?;
        let low_z = find_low_weight_excluding(css.cz(), css.cx_dual(), w)?;
        if low_x.is_none() && low_z.is_none() {
            return Ok((css, t));
        }
    }
    Err(Error::SamplingFailedAfterRetries(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::rs_code;
    use crate::listdec::RsUniqueDecoder;
    use proptest::prelude::*;

    #[test]
    fn block_patterns_are_orthogonal() {
        for q in [4u64, 5, 7, 9, 16, 17] {
            let f = FieldCtx::from_order(q).unwrap();
            for r in 3..8 {
                let z = z_block_pattern(&f, r).unwrap();
                assert!(z.iter().all(|&x| x != 0));
                let ones = vec![1; r];
                assert_eq!(f.dot(&ones, &z), 0, "q={q} r={r}");
            }
        }
        let f2 = FieldCtx::from_order(2).unwrap();
        assert!(z_block_pattern(&f2, 3).is_err());
    }

    #[test]
    fn random_qlrc_9_3_1_q4() {
        for seed in 0..20 {
            let c = random_qlrc(9, 3, 1, 4, seed).unwrap();
            assert_eq!(c.k(), 1);
            assert_eq!(c.hx.rows(), 4);
            let f = c.css.ctx();
            for a in c.hx.row_iter() {
                for b in c.hz.row_iter() {
                    assert_eq!(f.dot(a, b), 0);
                }
            }
            for j in 0..3 {
                let row = c.hx.row(j);
                assert!((0..9).all(|i| (row[i] != 0) == (i / 3 == j)));
            }
            assert_eq!(c.recovery_set(4), vec![3, 4, 5]);
            let rec = crate::css::local_recovery_sets(&c.css, 3).unwrap();
            assert!(rec.iter().all(|x| x.set.iter().all(|&i| i / 3 == x.position / 3)));
        }
        assert!(random_qlrc(9, 3, 2, 4, 0).is_err());
        assert!(random_qlrc(9, 2, 1, 4, 0).is_err());
    }

    #[test]
    fn random_qlrc_is_deterministic() {
        let a = random_qlrc(12, 3, 1, 5, 42).unwrap();
        let b = random_qlrc(12, 3, 1, 5, 42).unwrap();
        assert_eq!(a.hx, b.hx);
        assert_eq!(a.hz, b.hz);
    }

    #[test]
    fn gv_estimates() {
        let g = gv_estimate(9, 3, 1, 4, 0.0, 10, 1).unwrap();
        assert_eq!(g.frequency, 1.0);
        let g = gv_estimate(9, 3, 1, 4, 2.0 / 9.0, 20, 1).unwrap();
        assert_eq!(g.distances.len(), 20);
        let again = gv_estimate(9, 3, 1, 4, 2.0 / 9.0, 20, 1).unwrap();
        assert_eq!(g, again);
        assert!(gv_bound(12, 2, 5, 0.1).unwrap() >= gv_bound(12, 1, 5, 0.1).unwrap());
    }

    #[test]
    fn wilson_brackets_frequency() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn lambda_extremes() {
        let k = ExpanderGraph::complete(6);
        assert!(k.lambda < 1e-9);
        let m = ExpanderGraph::from_neighbors((0..6).map(|u| vec![(u + 1) % 6]).collect()).unwrap();
        assert!((m.lambda - 1.0).abs() < 1e-9);
        // K_{n,n} minus a perfect matching has λ = 1/(n-1)
        let g = expander_sample(16, 15, 3).unwrap();
        assert!((g.lambda - 1.0 / 15.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_graphs_are_simple_and_regular() {
        for seed in 0..4 {
            let g = expander_sample(64, 16, seed).unwrap();
            for adj in &g.left {
                let s: HashSet<_> = adj.iter().collect();
                assert_eq!(s.len(), 16);
            }
            assert!(g.lambda <= 2.0 / 4.0 + 0.15, "λ = {}", g.lambda);
            let p = g.permutation();
            let s: HashSet<_> = p.iter().collect();
            assert_eq!(s.len(), 64 * 16);
        }
        assert!(expander_sample(8, 2, 0).is_err());
    }

    #[test]
    fn ael_radius_values() {
        assert!((ael_radius(0.25, 0.04, 0.05) - 0.125).abs() < 1e-12);
        assert_eq!(ael_radius(0.3, 0.1, 0.0), 0.3);
    }

    fn small_ael() -> AelCode {
        let f = FieldCtx::from_order(5).unwrap();
        let rs = rs_code(&f, 3).unwrap();
        let outer = css_new(rs.clone(), rs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (inner, _, _) = random_qlrc_in(&f, 9, 3, 1, &mut rng).unwrap();
        let g = ExpanderGraph::from_neighbors((0..4).map(|u| vec![u; 9]).collect()).unwrap();
        ael_build(&outer, &inner, &g, 9).unwrap()
    }

    #[test]
    fn identity_graph_is_plain_concatenation() {
        let code = small_ael();
        assert_eq!(code.perm, (0..36).collect::<Vec<_>>());
        assert_eq!(code.k(), code.outer.k() * code.inner.k());
        assert_eq!(code.components(), 4);
        // every inner set stays inside one component, so no locality claim
        assert_eq!(code.locality, None);
    }

    fn gf7_parts(seed: u64) -> (Arc<FieldCtx>, CssCode, CssCode) {
        let f = FieldCtx::from_order(7).unwrap();
        let rs = rs_code(&f, 4).unwrap();
        let outer = css_new(rs.clone(), rs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (inner, _, _) = random_qlrc_in(&f, 9, 3, 1, &mut rng).unwrap();
        (f, outer, inner)
    }

    #[test]
    fn rate_and_locality_on_a_permuted_code() {
        let (_, outer, inner) = gf7_parts(2);
        let g = expander_sample(18, 3, 1).unwrap();
        let code = ael_build(&outer, &inner, &g, 3).unwrap();
        assert_eq!(code.k() * outer.n() * inner.n(), outer.k() * inner.k() * code.n());
        assert_eq!(code.locality, Some(9));
        assert!(matches!(ael_build(&outer, &inner, &g, 9), Err(Error::FoldingMismatch(_))));
        let rec = crate::css::local_recovery_sets(&code.css, 3).unwrap();
        for x in rec {
            let comps: HashSet<usize> = x.set.iter().map(|&i| i / 3).collect();
            assert_eq!(comps.len(), x.set.len());
        }
    }

    #[test]
    fn ael_decodes_codewords_and_clean_syndromes() {
        let (f, outer, inner) = gf7_parts(2);
        let d_in = css_distance_brute(&inner, DEFAULT_CAP).unwrap();
        let g = expander_sample(18, 3, 1).unwrap();
        let code = ael_build(&outer, &inner, &g, 3).unwrap();
        let rsd = RsUniqueDecoder::new(&f, 4);
        let t_in = (d_in - 1) / 2;
        let dx = AelDecoder::new(&code, Side::X, t_in, &rsd).unwrap();
        let dz = AelDecoder::new(&code, Side::Z, t_in, &rsd).unwrap();
        let out = ael_quantum_decode(&code, &PauliError::identity(54), &dx, &dz).unwrap();
        assert!(out.logical_identity);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let c = code.css.cx().random_codeword(&mut rng);
            let d = ael_decode(&dx, &c).unwrap();
            assert_eq!(d.inner_failures, 0);
            assert!(code.css.cz_dual().contains(&f.vsub(&d.word, &c)));
            let c = code.css.cz().random_codeword(&mut rng);
            let d = ael_decode(&dz, &c).unwrap();
            assert!(code.css.cx_dual().contains(&f.vsub(&d.word, &c)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn sampled_codes_have_lemma_dimension(seed in 0u64..1000, which in 0usize..3) {
            let (n, r, ell, q) = [(9, 3, 1, 4u64), (12, 3, 1, 5), (12, 4, 2, 7)][which];
            let c = random_qlrc(n, r, ell, q, seed).unwrap();
            prop_assert_eq!(c.k(), n - 2 * (n / r + ell));
        }
    }
}
