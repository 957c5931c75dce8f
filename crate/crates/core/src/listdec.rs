//! List decoders for Reed-Solomon and folded Reed-Solomon codes, a unique RS decoder, and an
//! exhaustive oracle.
//!
//! Codewords are evaluations at omega^0, ..., omega^(q-2); folded words group consecutive
//! positions into blocks of size s.

use std::sync::Arc;

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::classical::LinearCode;
use crate::css::ClassicalDecoder;
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Felt};
use crate::linalg::Matrix;
use crate::polycode::{block_weight, DensePoly, FoldedWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusMethod {
    JohnsonRs,
    FoldedLinearAlgebraic,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeRadius {
    pub e: usize,
    pub method: RadiusMethod,
}

type Poly = Vec<Felt>;

fn trim(p: &mut Poly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn pdeg(p: &Poly) -> Option<usize> {
    p.len().checked_sub(1)
}

fn pmul(f: &FieldCtx, a: &[Felt], b: &[Felt]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x != 0 {
            f.axpy(&mut out[i..i + b.len()], x, b);
        }
    }
    trim(&mut out);
    out
}

/// p (X^n - 1).
fn pmul_xn_minus_one(f: &FieldCtx, p: &[Felt], n: usize) -> Poly {
    if p.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; p.len() + n];
    out[n..].copy_from_slice(p);
    for (i, &c) in p.iter().enumerate() {
        out[i] = f.sub(out[i], c);
    }
    trim(&mut out);
    out
}

fn pdivrem(f: &FieldCtx, a: &[Felt], b: &[Felt]) -> (Poly, Poly) {
    let mut r: Poly = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv = f.inv(b[db]);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0; r.len() - db];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = f.mul(*r.last().unwrap(), inv);
        q[shift] = c;
        let neg = f.neg(c);
        f.axpy(&mut r[shift..], neg, b);
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

/// Coefficients of the unique polynomial of degree < n through (omega^i, y_i).
fn interpolate_all(f: &FieldCtx, y: &[Felt]) -> Poly {
    let n = y.len();
    let ninv = f.inv(f.from_int(n as i64));
    let mut out: Poly = (0..n)
        .map(|j| {
            let mut acc = 0;
            for (i, &yi) in y.iter().enumerate() {
                if yi != 0 {
                    acc = f.add(acc, f.mul(yi, f.exp((n - (i * j) % n) % n)));
                }
            }
            f.mul(acc, ninv)
        })
        .collect();
    trim(&mut out);
    out
}

/// binom[j][c] = C(j, c) as a field element.
fn binomials(f: &FieldCtx, upto: usize) -> Vec<Vec<Felt>> {
    let mut t = vec![vec![1]];
    for j in 1..=upto {
        let prev = &t[j - 1];
        let mut row = vec![1; j + 1];
        for c in 1..j {
            row[c] = f.add(prev[c - 1], prev[c]);
        }
        t.push(row);
    }
    t
}

/// Largest e with (n - e)^2 ≥ n ℓ.
pub fn johnson_radius(n: usize, ell: usize) -> usize {
    let x = (n * ell) as u128;
    let mut s = x.sqrt();
    if s * s < x {
        s += 1;
    }
    n.saturating_sub(s as usize)
}

/// Interpolation multiplicity and Y-degree bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GsParams {
    pub multiplicity: usize,
    pub list_size: usize,
}

/// Smallest multiplicity (then Y-degree) for which t = n - e agreements force a root.
///
/// The reduced lattice has a row of weighted degree at most det / (L + 1), where
/// det = n m (m + 1) / 2 + (ℓ - 1) L (L + 1) / 2.
pub fn gs_parameters(n: usize, ell: usize, e: usize) -> Option<GsParams> {
    if e >= n {
        return None;
    }
    let t = (n - e) as u128;
    let (n, kd) = (n as u128, ell.saturating_sub(1) as u128);
    for m in 1u128..=512 {
        let lmax = m + 2 * n;
        for l in m..=lmax {
            let det = n * m * (m + 1) / 2 + kd * l * (l + 1) / 2;
            if t * m > det / (l + 1) {
                return Some(GsParams { multiplicity: m as usize, list_size: l as usize });
            }
            if kd > 0 && kd * l / 2 > t * m {
                break;
            }
        }
    }
    None
}

fn wdeg(row: &[Poly], shift: &[usize]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (c, p) in row.iter().enumerate() {
        if let Some(d) = pdeg(p) {
            let w = d + shift[c];
            if best.is_none_or(|(_, bw)| w >= bw) {
                best = Some((c, w));
            }
        }
    }
    best
}

/// Mulders-Storjohann reduction to weak Popov form under the column shift.
fn weak_popov(f: &FieldCtx, rows: &mut [Vec<Poly>], shift: &[usize]) {
    let w = rows.len();
    let mut owner: Vec<Option<usize>> = vec![None; shift.len()];
    for start in 0..w {
        let mut a = start;
        while let Some((c, _)) = wdeg(&rows[a], shift) {
            let Some(b) = owner[c] else {
                owner[c] = Some(a);
                break;
            };
            let (x, y) = if pdeg(&rows[a][c]) >= pdeg(&rows[b][c]) {
                (a, b)
            } else {
                owner[c] = Some(a);
                (b, a)
            };
            let (rx, ry) = if x < y {
                let (lo, hi) = rows.split_at_mut(y);
                (&mut lo[x], &hi[0])
            } else {
                let (lo, hi) = rows.split_at_mut(x);
                (&mut hi[0], &lo[y])
            };
            let delta = rx[c].len() - ry[c].len();
            let coef = f.neg(f.div(*rx[c].last().unwrap(), *ry[c].last().unwrap()));
            for (px, py) in rx.iter_mut().zip(ry.iter()) {
                if py.is_empty() {
                    continue;
                }
                if px.len() < py.len() + delta {
                    px.resize(py.len() + delta, 0);
                }
                f.axpy(&mut px[delta..delta + py.len()], coef, py);
                trim(px);
            }
            a = x;
        }
    }
}

/// Q(X, XY + γ).
fn rr_substitute(f: &FieldCtx, q: &[Poly], gamma: Felt) -> Vec<Poly> {
    let mut q: Vec<Poly> = q.to_vec();
    let d = q.len();
    // Taylor shift in Y
    for i in 0..d {
        for j in (i..d - 1).rev() {
            let (lo, hi) = q.split_at_mut(j + 1);
            let src = &hi[0];
            let dst = &mut lo[j];
            if src.is_empty() || gamma == 0 {
                continue;
            }
            if dst.len() < src.len() {
                dst.resize(src.len(), 0);
            }
            f.axpy(&mut dst[..src.len()], gamma, src);
            trim(dst);
        }
    }
    for (i, p) in q.iter_mut().enumerate() {
        if !p.is_empty() && i > 0 {
            let mut shifted = vec![0; i];
            shifted.extend_from_slice(p);
            *p = shifted;
        }
    }
    q
}

fn rr_search(f: &FieldCtx, q: Vec<Poly>, ell: usize, prefix: &mut Vec<Felt>, out: &mut Vec<Vec<Felt>>) {
    let Some(low) = q.iter().filter_map(|p| p.iter().position(|&c| c != 0)).min() else {
        // Q vanished identically: every continuation is a root
        let mut v = prefix.clone();
        v.resize(ell, 0);
        out.push(v);
        return;
    };
    let q: Vec<Poly> = q.into_iter().map(|p| if p.len() > low { p[low..].to_vec() } else { Vec::new() }).collect();
    let mut uni: Poly = q.iter().map(|p| p.first().copied().unwrap_or(0)).collect();
    trim(&mut uni);
    for gamma in 0..f.q() {
        if crate::polycode::poly_eval(f, &uni, gamma) != 0 {
            continue;
        }
        prefix.push(gamma);
        if prefix.len() == ell {
            out.push(prefix.clone());
        } else {
            rr_search(f, rr_substitute(f, &q, gamma), ell, prefix, out);
        }
        prefix.pop();
    }
}

fn finish(ctx: &Arc<FieldCtx>, mut cands: Vec<Vec<Felt>>, keep: impl Fn(&DensePoly) -> bool) -> Vec<DensePoly> {
    cands.sort();
    cands.dedup();
    cands.into_iter().map(|c| DensePoly::new(ctx, c)).filter(|p| keep(p)).collect()
}

fn distance_to(p: &DensePoly, received: &[Felt], s: usize) -> usize {
    let f = p.ctx();
    let ev: Vec<Felt> = (0..received.len()).map(|i| f.sub(p.eval(f.exp(i)), received[i])).collect();
    block_weight(&ev, s)
}

/// Every polynomial of degree < ℓ within Hamming distance e of `received`.
pub fn list_decode_rs(ctx: &Arc<FieldCtx>, ell: usize, received: &[Felt], e: usize) -> Result<Vec<DensePoly>> {
    let n = ctx.order();
    if received.len() != n {
        return Err(Error::DimensionMismatch(format!("received length {} vs n = {n}", received.len())));
    }
    if ell == 0 || ell >= ctx.q() as usize {
        return Err(Error::BadDegree { q: ctx.q(), ell });
    }
    let max = johnson_radius(n, ell);
    if e > max {
        return Err(Error::RadiusTooLarge { e, max });
    }
    let params = gs_parameters(n, ell, e).ok_or(Error::RadiusTooLarge { e, max })?;
    let (m, l) = (params.multiplicity, params.list_size);
    let f: &FieldCtx = ctx;
    let binom = binomials(f, l.max(m));
    let neg_r: Poly = interpolate_all(f, received).iter().map(|&c| f.neg(c)).collect();
    let mut r_pows: Vec<Poly> = vec![vec![1]];
    for j in 1..=m {
        r_pows.push(pmul(f, &r_pows[j - 1], &neg_r));
    }
    let mut rows: Vec<Vec<Poly>> = Vec::with_capacity(l + 1);
    for j in 0..=l {
        let mut row = vec![Vec::new(); l + 1];
        let (base, extra) = if j <= m { (j, 0) } else { (m, j - m) };
        for c in 0..=base {
            let mut entry: Poly = r_pows[base - c].iter().map(|&v| f.mul(v, binom[base][c])).collect();
            trim(&mut entry);
            if j <= m {
                for _ in 0..m - j {
                    entry = pmul_xn_minus_one(f, &entry, n);
                }
            }
            row[c + extra] = entry;
        }
        rows.push(row);
    }
    let shift: Vec<usize> = (0..=l).map(|c| c * (ell - 1)).collect();
    weak_popov(f, &mut rows, &shift);
    let q = rows
        .into_iter()
        .filter_map(|r| wdeg(&r, &shift).map(|(_, w)| (w, r)))
        .min_by_key(|(w, _)| *w)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::DecodingFailed("interpolation lattice collapsed".into()))?;
    let mut cands = Vec::new();
    rr_search(f, q, ell, &mut Vec::new(), &mut cands);
    Ok(finish(ctx, cands, |p| distance_to(p, received, 1) <= e))
}

/// Guruswami-Wang linear-algebraic list decoder for folded RS with interpolation parameter u.
///
/// Interpolates A_0 + A_1 Y_1 + ... + A_u Y_u with deg A_0 < D + ℓ, deg A_i ≤ D through the
/// (s - u + 1) windows of every block; any f agreeing on more than (D + ℓ - 1)/(s - u + 1)
/// blocks satisfies A_0(X) + sum_i A_i(X) f(omega^(i-1) X) = 0, an affine system in f of
/// dimension at most u - 1.
#[derive(Clone, Debug)]
pub struct FrsListDecoder {
    ctx: Arc<FieldCtx>,
    ell: usize,
    s: usize,
    u: usize,
    d: usize,
    radius: Option<usize>,
}

/// Enumeration budget for the final affine solution space.
pub const FRS_LIST_CAP: u128 = 1 << 20;

impl FrsListDecoder {
    pub fn new(ctx: &Arc<FieldCtx>, ell: usize, s: usize, u: usize) -> Result<Self> {
        let n = ctx.order();
        if s == 0 || n % s != 0 {
            return Err(Error::FoldMismatch { s, n });
        }
        if ell == 0 || ell >= ctx.q() as usize {
            return Err(Error::BadDegree { q: ctx.q(), ell });
        }
        if u == 0 || u > s {
            return Err(Error::InvalidParameter(format!("interpolation parameter u={u} must lie in 1..={s}")));
        }
        let blocks = n / s;
        let windows = s - u + 1;
        let constraints = blocks * windows;
        // smallest D with (D + ℓ) + u (D + 1) > constraints
        let need = constraints + 1;
        let d = if need > ell + u { (need - ell - u).div_ceil(u + 1) } else { 0 };
        let t_min = (d + ell - 1) / windows + 1;
        let radius = blocks.checked_sub(t_min);
        Ok(FrsListDecoder { ctx: ctx.clone(), ell, s, u, d, radius })
    }

    /// The u in 1..=s with the largest radius whose worst-case list q^(u-1) stays under the cap.
    pub fn best(ctx: &Arc<FieldCtx>, ell: usize, s: usize) -> Result<Self> {
        let mut best: Option<FrsListDecoder> = None;
        let q = ctx.q() as u128;
        for u in 1..=s {
            if q.checked_pow(u as u32 - 1).is_none_or(|x| x > FRS_LIST_CAP) {
                break;
            }
            let dec = Self::new(ctx, ell, s, u)?;
            if best.as_ref().is_none_or(|b| dec.radius > b.radius) {
                best = Some(dec);
            }
        }
        best.ok_or_else(|| Error::InvalidParameter("no admissible interpolation parameter".into()))
    }

    pub fn u(&self) -> usize {
        self.u
    }
    pub fn degree_bound(&self) -> usize {
        self.d
    }
    /// Guaranteed block radius, `None` if even e = 0 is not covered.
    pub fn radius(&self) -> Option<usize> {
        self.radius
    }

    pub fn decode(&self, received: &FoldedWord, e: usize) -> Result<Vec<DensePoly>> {
        let f: &FieldCtx = &self.ctx;
        let (s, u, d, ell) = (self.s, self.u, self.d, self.ell);
        if received.s() != s {
            return Err(Error::FoldingMismatch(format!("word folded by {} vs decoder s = {s}", received.s())));
        }
        let max = self.radius.unwrap_or(0);
        if self.radius.is_none() || e > max {
            return Err(Error::RadiusTooLarge { e, max });
        }
        let y = received.unfold().into_values();
        let blocks = y.len() / s;
        let cols0 = d + ell;
        let ncols = cols0 + u * (d + 1);
        let mut sys = Matrix::zeros(0, ncols);
        let mut row = vec![0; ncols];
        for j in 0..blocks {
            for tau in 0..=s - u {
                let pos = j * s + tau;
                let x = f.exp(pos);
                row.iter_mut().for_each(|v| *v = 0);
                let mut xp = 1;
                for c in 0..cols0 {
                    row[c] = xp;
                    if c <= d {
                        for i in 1..=u {
                            row[cols0 + (i - 1) * (d + 1) + c] = f.mul(xp, y[pos + i - 1]);
                        }
                    }
                    xp = f.mul(xp, x);
                }
                sys.push_row(&row);
            }
        }
        let interp = sys.nullspace(f);
        // Constraints on f's coefficients from every interpolation solution, reduced into an
        // echelon basis as they arrive; once the rank reaches ℓ the rest are only checked.
        let omega_pows: Vec<Vec<Felt>> = (0..u).map(|i| (0..ell).map(|c| f.exp((i * c) % f.order())).collect()).collect();
        let mut basis: Vec<(usize, Vec<Felt>)> = Vec::new();
        let mut unique: Option<Vec<Felt>> = None;
        for sol in interp.row_iter() {
            for deg in 0..cols0 {
                let mut eq = vec![0; ell + 1];
                for c in 0..ell {
                    if deg < c || deg - c > d {
                        continue;
                    }
                    let mut acc = 0;
                    for i in 1..=u {
                        let a = sol[cols0 + (i - 1) * (d + 1) + deg - c];
                        if a != 0 {
                            acc = f.add(acc, f.mul(a, omega_pows[i - 1][c]));
                        }
                    }
                    eq[c] = acc;
                }
                eq[ell] = f.neg(sol[deg]);
                if let Some(x) = &unique {
                    if f.dot(&eq[..ell], x) != eq[ell] {
                        return Ok(Vec::new());
                    }
                    continue;
                }
                for (p, row) in &basis {
                    let c = eq[*p];
                    if c != 0 {
                        f.axpy(&mut eq, f.neg(c), row);
                    }
                }
                let Some(p) = eq.iter().position(|&x| x != 0) else { continue };
                if p == ell {
                    return Ok(Vec::new());
                }
                let inv = f.inv(eq[p]);
                eq.iter_mut().for_each(|x| *x = f.mul(*x, inv));
                basis.push((p, eq));
                if basis.len() == ell {
                    let m = Matrix::from_rows(&basis.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>(), ell + 1);
                    let rr = m.rref(f);
                    let mut x = vec![0; ell];
                    for (j, &p) in rr.pivots.iter().enumerate() {
                        x[p] = rr.matrix.get(j, ell);
                    }
                    unique = Some(x);
                }
            }
        }
        let rr = Matrix::from_rows(&basis.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>(), ell + 1).rref(f);
        let mut particular = vec![0; ell];
        for (j, &p) in rr.pivots.iter().enumerate() {
            particular[p] = rr.matrix.get(j, ell);
        }
        let mut kernel = Matrix::zeros(0, ell);
        let mut is_pivot = vec![false; ell + 1];
        rr.pivots.iter().for_each(|&p| is_pivot[p] = true);
        for c in (0..ell).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0; ell];
            v[c] = 1;
            for (j, &p) in rr.pivots.iter().enumerate() {
                v[p] = f.neg(rr.matrix.get(j, c));
            }
            kernel.push_row(&v);
        }
        let q = f.q() as u128;
        let count = q.checked_pow(kernel.rows() as u32).unwrap_or(u128::MAX);
        if count > FRS_LIST_CAP {
            return Err(Error::CapExceeded { required: count, cap: FRS_LIST_CAP });
        }
        let mut cands = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let mut x = idx;
            let mut v = particular.clone();
            for kr in kernel.row_iter() {
                let c = (x % q) as Felt;
                x /= q;
                if c != 0 {
                    f.axpy(&mut v, c, kr);
                }
            }
            cands.push(v);
        }
        Ok(finish(&self.ctx, cands, |p| distance_to(p, &y, s) <= e))
    }
}

/// Radius of the folded decoder at its best admissible interpolation parameter.
pub fn achieved_radius(ctx: &Arc<FieldCtx>, ell: usize, s: usize) -> Result<DecodeRadius> {
    let dec = FrsListDecoder::best(ctx, ell, s)?;
    Ok(DecodeRadius { e: dec.radius.unwrap_or(0), method: RadiusMethod::FoldedLinearAlgebraic })
}

/// Every polynomial of degree < ℓ within folded block distance e of `received`.
pub fn list_decode_frs(ctx: &Arc<FieldCtx>, ell: usize, s: usize, received: &FoldedWord, e: usize) -> Result<Vec<DensePoly>> {
    FrsListDecoder::best(ctx, ell, s)?.decode(received, e)
}

/// Berlekamp-Welch: the unique polynomial within ⌊(n - ℓ)/2⌋ of `received`.
pub fn rs_unique_decode(ctx: &Arc<FieldCtx>, ell: usize, received: &[Felt]) -> Result<DensePoly> {
    let f: &FieldCtx = ctx;
    let n = received.len();
    if n != ctx.order() {
        return Err(Error::DimensionMismatch(format!("received length {n} vs n = {}", ctx.order())));
    }
    let e = (n - ell) / 2;
    // unknowns: E_0..E_{e-1}, Q_0..Q_{e+ℓ-1}
    let cols = e + e + ell;
    let mut a = Matrix::zeros(0, cols);
    let mut b = Vec::with_capacity(n);
    for (i, &yi) in received.iter().enumerate() {
        let x = f.exp(i);
        let mut row = vec![0; cols];
        let mut xp = 1;
        for c in 0..e + ell {
            if c < e {
                row[c] = f.neg(f.mul(yi, xp));
            }
            row[e + c] = xp;
            xp = f.mul(xp, x);
        }
        a.push_row(&row);
        b.push(f.mul(yi, f.pow(x, e as u64)));
    }
    let sol = a.solve(f, &b).ok_or_else(|| Error::DecodingFailed("no error locator".into()))?;
    let mut loc: Poly = sol[..e].to_vec();
    loc.push(1);
    let mut num: Poly = sol[e..].to_vec();
    trim(&mut num);
    let (quot, rem) = pdivrem(f, &num, &loc);
    if !rem.is_empty() || quot.len() > ell {
        return Err(Error::DecodingFailed("too many errors".into()));
    }
    let p = DensePoly::new(ctx, quot);
    if distance_to(&p, received, 1) > e {
        return Err(Error::DecodingFailed("too many errors".into()));
    }
    Ok(p)
}

/// Unique decoder for the full-length RS code ev(F_q[X]^{[ℓ]}).
#[derive(Clone, Debug)]
pub struct RsUniqueDecoder {
    ctx: Arc<FieldCtx>,
    ell: usize,
}

impl RsUniqueDecoder {
    pub fn new(ctx: &Arc<FieldCtx>, ell: usize) -> Self {
        RsUniqueDecoder { ctx: ctx.clone(), ell }
    }
    pub fn radius(&self) -> usize {
        (self.ctx.order() - self.ell) / 2
    }
}

impl ClassicalDecoder for RsUniqueDecoder {
    fn decode(&self, word: &[Felt]) -> Result<Vec<Felt>> {
        let p = rs_unique_decode(&self.ctx, self.ell, word).map_err(|e| Error::DecoderFailure(e.to_string()))?;
        Ok(p.evaluate()?.into_values())
    }
}

/// Every codeword within block distance e of `received`, by full enumeration.
pub fn brute_list_decode(code: &LinearCode, received: &[Felt], e: usize, s: usize, cap: u128) -> Result<Vec<Vec<Felt>>> {
    let f = code.ctx();
    let q = f.q() as u128;
    let required = q.checked_pow(code.k() as u32).unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    if s == 0 || received.len() != code.n() || code.n() % s != 0 {
        return Err(Error::DimensionMismatch("received word does not match the code".into()));
    }
    let mut out = Vec::new();
    for idx in 0..required {
        let mut x = idx;
        let msg: Vec<Felt> = (0..code.k())
            .map(|_| {
                let c = (x % q) as Felt;
                x /= q;
                c
            })
            .collect();
        let w = code.encode(&msg);
        if block_weight(&f.vsub(&w, received), s) <= e {
            out.push(w);
        }
    }
    out.sort();
    Ok(out)
}
