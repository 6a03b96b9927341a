//! Dense kernel matrix, block nuggets and the Cholesky factor reused by every
//! Gauss-Newton step.

use std::io::{Read, Write};
use std::ops::Range;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{self as llt, LltError};
use faer::linalg::triangular_solve;
use faer::reborrow::ReborrowMut;
use faer::{Mat, MatMut, MatRef};
use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::functionals::FunctionalVector;
use crate::kernels::{DerivativeOp, KernelSpec, OpTerms};
use crate::parallel::{self, Parallelism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuggetKind {
    /// `eta * R` with trace-ratio block weights.
    Adaptive,
    /// `eta * I`.
    Standard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockInfo {
    pub op: DerivativeOp,
    pub range: Range<usize>,
    pub trace: f64,
}

/// Kernel matrix `Theta(phi, phi)`, symmetric, full storage.
pub fn assemble_theta(kernel: &KernelSpec, fv: &FunctionalVector, par: Parallelism) -> Result<(Mat<f64>, Vec<BlockInfo>)> {
    if fv.is_empty() {
        return Err(Error::InvalidArgument("empty functional vector".into()));
    }
    check_dim(kernel.dim(), fv.dim())?;
    let n = fv.len();
    let mut theta = Mat::<f64>::zeros(n, n);
    fill_kernel_block(kernel, fv, fv, theta.as_mut(), true, par)?;
    // mirror the lower triangle
    for j in 0..n {
        for i in j + 1..n {
            theta[(j, i)] = theta[(i, j)];
        }
    }
    let blocks = block_info(fv, theta.as_ref());
    Ok((theta, blocks))
}

fn block_info(fv: &FunctionalVector, theta: MatRef<'_, f64>) -> Vec<BlockInfo> {
    fv.blocks()
        .iter()
        .map(|b| BlockInfo { op: b.op, range: b.range(), trace: b.range().map(|i| theta[(i, i)]).sum() })
        .collect()
}

/// `out[i, j] = L_i^x R_j^y K` for functionals of `rows` (first argument) and
/// `cols` (second argument). With `lower_only`, entries above the diagonal are
/// left untouched.
pub fn fill_kernel_block(
    kernel: &KernelSpec,
    rows: &FunctionalVector,
    cols: &FunctionalVector,
    out: MatMut<'_, f64>,
    lower_only: bool,
    par: Parallelism,
) -> Result<()> {
    check_dim(rows.len(), out.nrows())?;
    check_dim(cols.len(), out.ncols())?;
    let row_terms = entry_terms(rows, kernel.dim())?;
    let col_terms = entry_terms(cols, kernel.dim())?;
    parallel::for_each_column(par, out, |j, col| {
        let (cb, cp) = col_terms.1[j];
        let y = cols.point(cp);
        let start = if lower_only { j } else { 0 };
        for (i, v) in col.iter_mut().enumerate().skip(start) {
            let (rb, rp) = row_terms.1[i];
            *v = kernel.bilinear_terms(&row_terms.0[rb], rows.point(rp), &col_terms.0[cb], y);
        }
    });
    Ok(())
}

// per-block operator expansions, and (block, point) for every entry
fn entry_terms(fv: &FunctionalVector, dim: usize) -> Result<(Vec<OpTerms>, Vec<(usize, usize)>)> {
    let terms = fv.blocks().iter().map(|b| OpTerms::new(b.op, dim)).collect::<Result<Vec<_>>>()?;
    let mut map = Vec::with_capacity(fv.len());
    for (bi, b) in fv.blocks().iter().enumerate() {
        map.extend(b.points.iter().map(|&p| (bi, p)));
    }
    Ok((terms, map))
}

/// Diagonal of `R`. Leading identity blocks are pooled into the reference
/// block; every later block is weighted by `trace(block) / trace(reference)`.
pub fn adaptive_weights(blocks: &[BlockInfo]) -> Result<Vec<f64>> {
    let Some(first) = blocks.first() else {
        return Ok(Vec::new());
    };
    if first.op != DerivativeOp::Identity {
        return Err(Error::DegenerateBlock("first block must be pointwise evaluation".into()));
    }
    let lead = blocks.iter().take_while(|b| b.op == DerivativeOp::Identity).count();
    let ref_trace: f64 = blocks[..lead].iter().map(|b| b.trace).sum();
    if !(ref_trace > 0.0) {
        return Err(Error::DegenerateBlock(format!("reference block has trace {ref_trace}")));
    }
    let n = blocks.last().unwrap().range.end;
    let mut w = vec![1.0; n];
    for b in &blocks[lead..] {
        let s = b.trace / ref_trace;
        w[b.range.clone()].fill(s);
    }
    Ok(w)
}

/// `Theta + eta R`.
pub fn adaptive_nugget(theta: &Mat<f64>, blocks: &[BlockInfo], eta: f64) -> Result<Mat<f64>> {
    check_eta(eta)?;
    let mut out = theta.clone();
    if eta == 0.0 {
        return Ok(out);
    }
    let w = adaptive_weights(blocks)?;
    check_dim(theta.nrows(), w.len())?;
    for (i, wi) in w.iter().enumerate() {
        out[(i, i)] += eta * wi;
    }
    Ok(out)
}

/// `Theta + eta I`.
pub fn standard_nugget(theta: &Mat<f64>, eta: f64) -> Mat<f64> {
    let mut out = theta.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += eta;
    }
    out
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("nugget eta must be finite and >= 0, got {eta}")))
    }
}

/// Lower-triangular `L` with `L L^T = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    l: Mat<f64>,
}

/// Factor a symmetric matrix (only the lower triangle is read).
pub fn factorize(a: &Mat<f64>, par: Parallelism) -> Result<CholeskyFactor> {
    factorize_owned(a.clone(), par)
}

pub(crate) fn factorize_owned(mut a: Mat<f64>, par: Parallelism) -> Result<CholeskyFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let n = a.nrows();
    let fpar = par.faer();
    let mut mem = MemBuffer::new(llt::cholesky_in_place_scratch::<f64>(n, fpar, Default::default()));
    let stack = MemStack::new(&mut mem);
    match llt::cholesky_in_place(a.as_mut(), Default::default(), fpar, stack, Default::default()) {
        Ok(_) => {}
        Err(LltError::NonPositivePivot { index }) => return Err(Error::NotPositiveDefinite { pivot: index }),
    }
    for j in 1..n {
        for i in 0..j {
            a[(i, j)] = 0.0;
        }
    }
    if (0..n).any(|i| !a[(i, i)].is_finite()) {
        return Err(Error::NotPositiveDefinite { pivot: (0..n).find(|&i| !a[(i, i)].is_finite()).unwrap() });
    }
    Ok(CholeskyFactor { l: a })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> MatRef<'_, f64> {
        self.l.as_ref()
    }

    /// `V <- L^{-1} V`.
    pub fn half_solve_in_place(&self, v: MatMut<'_, f64>, par: Parallelism) {
        triangular_solve::solve_lower_triangular_in_place(self.l.as_ref(), v, par.faer());
    }

    /// `V <- (L L^T)^{-1} V`.
    pub fn solve_in_place(&self, mut v: MatMut<'_, f64>, par: Parallelism) {
        triangular_solve::solve_lower_triangular_in_place(self.l.as_ref(), v.rb_mut(), par.faer());
        triangular_solve::solve_upper_triangular_in_place(self.l.transpose(), v, par.faer());
    }

    pub fn half_solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), v.len())?;
        let mut out = v.to_vec();
        self.half_solve_in_place(col_mut(&mut out), Parallelism::Serial);
        Ok(out)
    }

    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), v.len())?;
        let mut out = v.to_vec();
        self.solve_in_place(col_mut(&mut out), Parallelism::Serial);
        Ok(out)
    }

    pub fn solve_mat(&self, v: &Mat<f64>, par: Parallelism) -> Result<Mat<f64>> {
        check_dim(self.dim(), v.nrows())?;
        let mut out = v.clone();
        self.solve_in_place(out.as_mut(), par);
        Ok(out)
    }

    /// `z^T (L L^T)^{-1} z` as `|L^{-1} z|^2`.
    pub fn quad_form(&self, z: &[f64]) -> Result<f64> {
        Ok(self.half_solve(z)?.iter().map(|v| v * v).sum())
    }

    /// Explicit `(L L^T)^{-1}`.
    pub fn inverse(&self, par: Parallelism) -> Mat<f64> {
        let mut inv = Mat::<f64>::identity(self.dim(), self.dim());
        self.solve_in_place(inv.as_mut(), par);
        inv
    }

    /// `L L^T`.
    pub fn reconstruct(&self, par: Parallelism) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(self.dim(), self.dim());
        faer::linalg::matmul::matmul(out.as_mut(), faer::Accum::Replace, self.l.as_ref(), self.l.transpose(), 1.0, par.faer());
        out
    }
}

pub(crate) fn col_mut(v: &mut [f64]) -> MatMut<'_, f64> {
    let n = v.len();
    MatMut::from_column_major_slice_mut(v, n, 1)
}

pub(crate) fn col_ref(v: &[f64]) -> MatRef<'_, f64> {
    MatRef::from_column_major_slice(v, v.len(), 1)
}

/// Kernel matrix with nugget and factor, immutable after construction.
#[derive(Clone, Debug)]
pub struct GramSystem {
    kernel: KernelSpec,
    functionals: FunctionalVector,
    theta: Mat<f64>,
    blocks: Vec<BlockInfo>,
    eta: f64,
    nugget: NuggetKind,
    // eta * R (or eta * I) diagonal
    reg: Vec<f64>,
    factor: CholeskyFactor,
    hash: String,
}

impl GramSystem {
    pub fn new(kernel: &KernelSpec, fv: &FunctionalVector, nugget: NuggetKind, eta: f64, par: Parallelism) -> Result<Self> {
        check_eta(eta)?;
        let (theta, blocks) = assemble_theta(kernel, fv, par)?;
        Self::with_theta(kernel, fv, theta, blocks, nugget, eta, par)
    }

    /// Regularise and factor an already assembled `Theta` for `(kernel, fv)`.
    pub fn with_theta(
        kernel: &KernelSpec,
        fv: &FunctionalVector,
        theta: Mat<f64>,
        blocks: Vec<BlockInfo>,
        nugget: NuggetKind,
        eta: f64,
        par: Parallelism,
    ) -> Result<Self> {
        check_eta(eta)?;
        let n = theta.nrows();
        check_dim(fv.len(), n)?;
        let reg: Vec<f64> = match nugget {
            NuggetKind::Adaptive => adaptive_weights(&blocks)?.into_iter().map(|w| eta * w).collect(),
            NuggetKind::Standard => vec![eta; n],
        };
        check_dim(n, reg.len())?;
        let mut a = theta.clone();
        for (i, r) in reg.iter().enumerate() {
            a[(i, i)] += r;
        }
        let factor = factorize_owned(a, par)?;
        let hash = content_hash(kernel, fv);
        Ok(Self { kernel: kernel.clone(), functionals: fv.clone(), theta, blocks, eta, nugget, reg, factor, hash })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn functionals(&self) -> &FunctionalVector {
        &self.functionals
    }

    pub fn dim(&self) -> usize {
        self.theta.nrows()
    }

    pub fn theta(&self) -> MatRef<'_, f64> {
        self.theta.as_ref()
    }

    pub fn blocks(&self) -> &[BlockInfo] {
        &self.blocks
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nugget(&self) -> NuggetKind {
        self.nugget
    }

    /// Diagonal of the nugget term added to `Theta`.
    pub fn regularization(&self) -> &[f64] {
        &self.reg
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn content_hash(&self) -> &str {
        &self.hash
    }

    /// `(Theta + eta R)_{ij}`.
    pub fn regularized(&self, i: usize, j: usize) -> f64 {
        let v = self.theta[(i, j)];
        if i == j {
            v + self.reg[i]
        } else {
            v
        }
    }

    /// `trace(Theta^{qq}) / trace(Theta^{11})` per block.
    pub fn trace_ratios(&self) -> Vec<f64> {
        let t1 = self.blocks.first().map_or(1.0, |b| b.trace);
        self.blocks.iter().map(|b| b.trace / t1).collect()
    }

    const MAGIC: &'static [u8; 8] = b"GPGRAM01";

    /// Raw little-endian dump of `(Theta, eta, factor)` and block metadata.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim();
        w.write_all(Self::MAGIC)?;
        let hash = self.hash.as_bytes();
        w.write_all(&(hash.len() as u64).to_le_bytes())?;
        w.write_all(hash)?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&self.eta.to_le_bytes())?;
        w.write_all(&[match self.nugget {
            NuggetKind::Adaptive => 0u8,
            NuggetKind::Standard => 1u8,
        }])?;
        w.write_all(&(self.blocks.len() as u64).to_le_bytes())?;
        for b in &self.blocks {
            let op = serde_json::to_vec(&b.op)?;
            w.write_all(&(op.len() as u64).to_le_bytes())?;
            w.write_all(&op)?;
            w.write_all(&(b.range.start as u64).to_le_bytes())?;
            w.write_all(&(b.range.end as u64).to_le_bytes())?;
            w.write_all(&b.trace.to_le_bytes())?;
        }
        write_f64s(&mut w, &self.reg)?;
        write_mat(&mut w, self.theta.as_ref())?;
        write_mat(&mut w, self.factor.l())?;
        Ok(())
    }

    /// Load a dump made for the same `(kernel, fv)`; the content hash must match.
    pub fn load<R: Read>(mut r: R, kernel: &KernelSpec, fv: &FunctionalVector) -> Result<Self> {
        let expected_hash = content_hash(kernel, fv);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::Parse("not a Gram dump".into()));
        }
        let hlen = read_u64(&mut r)? as usize;
        let mut hash = vec![0u8; hlen];
        r.read_exact(&mut hash)?;
        let hash = String::from_utf8(hash).map_err(|e| Error::Parse(e.to_string()))?;
        if hash != expected_hash {
            return Err(Error::Parse(format!("Gram dump hash {hash} does not match {expected_hash}")));
        }
        let n = read_u64(&mut r)? as usize;
        let eta = read_f64(&mut r)?;
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind)?;
        let nugget = match kind[0] {
            0 => NuggetKind::Adaptive,
            1 => NuggetKind::Standard,
            k => return Err(Error::Parse(format!("bad nugget tag {k}"))),
        };
        let nb = read_u64(&mut r)? as usize;
        let mut blocks = Vec::with_capacity(nb);
        for _ in 0..nb {
            let len = read_u64(&mut r)? as usize;
            let mut op = vec![0u8; len];
            r.read_exact(&mut op)?;
            let op = serde_json::from_slice(&op)?;
            let start = read_u64(&mut r)? as usize;
            let end = read_u64(&mut r)? as usize;
            let trace = read_f64(&mut r)?;
            blocks.push(BlockInfo { op, range: start..end, trace });
        }
        let reg = read_f64s(&mut r, n)?;
        let theta = read_mat(&mut r, n)?;
        let l = read_mat(&mut r, n)?;
        Ok(Self {
            kernel: kernel.clone(),
            functionals: fv.clone(),
            theta,
            blocks,
            eta,
            nugget,
            reg,
            factor: CholeskyFactor { l },
            hash,
        })
    }
}

/// SHA-256 over the kernel parameters and the functional vector.
pub fn content_hash(kernel: &KernelSpec, fv: &FunctionalVector) -> String {
    let mut h = Sha256::new();
    h.update(format!("{:?}", kernel.family()).as_bytes());
    for s in kernel.lengthscales() {
        h.update(s.to_le_bytes());
    }
    h.update((fv.dim() as u64).to_le_bytes());
    for b in fv.blocks() {
        h.update(format!("{}", b.op).as_bytes());
        h.update((b.points.len() as u64).to_le_bytes());
        for &p in &b.points {
            for v in fv.point(p) {
                h.update(v.to_le_bytes());
            }
        }
    }
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_f64s<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 8);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn write_mat<W: Write>(w: &mut W, m: MatRef<'_, f64>) -> Result<()> {
    for j in 0..m.ncols() {
        let col: Vec<f64> = (0..m.nrows()).map(|i| m[(i, j)]).collect();
        write_f64s(w, &col)?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn read_mat<R: Read>(r: &mut R, n: usize) -> Result<Mat<f64>> {
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let col = read_f64s(r, n)?;
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{sample_collocation, BoxDomain, CollocationSet};

    fn mat(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn single_delta() {
        let pts = CollocationSet::from_parts(
            BoxDomain::unit_square(),
            vec![0.5, 0.5],
            vec![],
        )
        .unwrap();
        let fv = FunctionalVector::build(&[DerivativeOp::Identity], 1, &pts).unwrap();
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        let (t, _) = assemble_theta(&k, &fv, Parallelism::Serial).unwrap();
        assert_eq!((t.nrows(), t[(0, 0)]), (1, 1.0));
    }

    #[test]
    fn duplicate_deltas_singular_until_nugget() {
        let pts = CollocationSet::from_parts(BoxDomain::unit_square(), vec![0.5, 0.5], vec![]).unwrap();
        let fv = FunctionalVector::build(&[DerivativeOp::Identity], 1, &pts)
            .unwrap()
            .with_leading_block(DerivativeOp::Identity, vec![0])
            .unwrap();
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        let (t, blocks) = assemble_theta(&k, &fv, Parallelism::Serial).unwrap();
        assert_eq!(t, mat(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert!(matches!(factorize(&t, Parallelism::Serial), Err(Error::NotPositiveDefinite { .. })));
        let r = adaptive_nugget(&t, &blocks, 1e-10).unwrap();
        assert!(factorize(&r, Parallelism::Serial).is_ok());
    }

    #[test]
    fn nuggets() {
        let one = mat(&[&[1.0]]);
        assert_eq!(standard_nugget(&one, 1e-2)[(0, 0)], 1.01);
        assert_eq!(standard_nugget(&one, 0.0), one);
        let blocks = vec![BlockInfo { op: DerivativeOp::Identity, range: 0..1, trace: 1.0 }];
        assert_eq!(adaptive_nugget(&one, &blocks, 0.0).unwrap(), one);
        assert_eq!(adaptive_nugget(&one, &blocks, 0.5).unwrap()[(0, 0)], 1.5);
        let zero = vec![BlockInfo { op: DerivativeOp::Identity, range: 0..1, trace: 0.0 }];
        assert!(matches!(adaptive_nugget(&one, &zero, 1.0), Err(Error::DegenerateBlock(_))));
        assert!(adaptive_nugget(&one, &blocks, -1.0).is_err());
    }

    #[test]
    fn small_factor() {
        let f = factorize(&mat(&[&[4.0, 2.0], &[2.0, 3.0]]), Parallelism::Serial).unwrap();
        let l = f.l();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((l[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        let id = factorize(&Mat::identity(3, 3), Parallelism::Serial).unwrap();
        assert_eq!(id.l(), Mat::<f64>::identity(3, 3).as_ref());
        let v = vec![1.0, -2.0, 3.0];
        assert_eq!(id.solve(&v).unwrap(), v);
        assert!(id.solve(&[1.0]).is_err());
    }

    #[test]
    fn elliptic_trace_ratio() {
        let s = sample_collocation(&BoxDomain::unit_square(), 1024, 900, 0).unwrap();
        let fv = FunctionalVector::build(&[DerivativeOp::Identity, DerivativeOp::Laplacian], 1, &s).unwrap();
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        let g = GramSystem::new(&k, &fv, NuggetKind::Adaptive, 1e-9, Parallelism::Rayon).unwrap();
        let ratio = g.trace_ratios()[1];
        assert!((ratio - 900.0 * 5000.0 / 1024.0).abs() < 1e-6 * ratio);
        let z: Vec<f64> = (0..fv.len()).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let full: f64 = z.iter().zip(g.factor().solve(&z).unwrap()).map(|(a, b)| a * b).sum();
        let half = g.factor().quad_form(&z).unwrap();
        assert!((full - half).abs() <= 1e-12 * half.abs().max(1.0) * 1e3, "{full} {half}");
    }

    #[test]
    fn dump_roundtrip() {
        let s = sample_collocation(&BoxDomain::unit_square(), 30, 20, 1).unwrap();
        let fv = FunctionalVector::build(&[DerivativeOp::Identity, DerivativeOp::Laplacian], 1, &s).unwrap();
        let k = KernelSpec::isotropic(0.3, 2).unwrap();
        let g = GramSystem::new(&k, &fv, NuggetKind::Adaptive, 1e-6, Parallelism::Serial).unwrap();
        let mut buf = Vec::new();
        g.dump(&mut buf).unwrap();
        let back = GramSystem::load(buf.as_slice(), &k, &fv).unwrap();
        assert_eq!(back.theta(), g.theta());
        assert_eq!(back.factor().l(), g.factor().l());
        assert_eq!(back.blocks(), g.blocks());
        let other = KernelSpec::isotropic(0.31, 2).unwrap();
        assert!(GramSystem::load(buf.as_slice(), &other, &fv).is_err());
    }
}
