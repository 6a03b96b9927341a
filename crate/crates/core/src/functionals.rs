//! Collocation point sets and the ordered functional vector.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::DerivativeOp;

/// One face of an axis-aligned box: the hyperplane `x[axis] = lo` or `= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

/// Axis-aligned box together with the faces that carry boundary data.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
    faces: Vec<Face>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, faces: Vec<Face>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidArgument("box bounds must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument("box must have lo < hi on every axis".into()));
        }
        if faces.iter().any(|f| f.axis >= lo.len()) {
            return Err(Error::InvalidArgument("face axis out of range".into()));
        }
        Ok(Self { lo, hi, faces })
    }

    /// Box with every face constrained.
    pub fn closed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        let faces = (0..d)
            .flat_map(|axis| [Face { axis, upper: false }, Face { axis, upper: true }])
            .collect();
        Self::new(lo, hi, faces)
    }

    pub fn unit_square() -> Self {
        Self::closed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    /// `(s, t)` in `[-1, 1] x [0, 1]`, data on `t = 0` and `s = -1, 1`.
    pub fn burgers() -> Self {
        Self::new(
            vec![-1.0, 0.0],
            vec![1.0, 1.0],
            vec![
                Face { axis: 1, upper: false },
                Face { axis: 0, upper: false },
                Face { axis: 0, upper: true },
            ],
        )
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_measure(&self, face: Face) -> f64 {
        (0..self.dim())
            .filter(|&k| k != face.axis)
            .map(|k| self.hi[k] - self.lo[k])
            .product()
    }

    fn face_value(&self, face: Face) -> f64 {
        if face.upper {
            self.hi[face.axis]
        } else {
            self.lo[face.axis]
        }
    }

    /// True if `x` lies on one of the constraint faces.
    pub fn on_constraint_face(&self, x: &[f64]) -> bool {
        self.faces.iter().any(|&f| x[f.axis] == self.face_value(f))
    }

    /// Split `n` boundary points across faces proportional to their measure
    /// (largest remainder rounding, ties go to the earlier face).
    pub fn allocate_boundary(&self, n: usize) -> Vec<usize> {
        let meas: Vec<f64> = self.faces.iter().map(|&f| self.face_measure(f)).collect();
        let total: f64 = meas.iter().sum();
        let quota: Vec<f64> = meas.iter().map(|m| n as f64 * m / total).collect();
        let mut counts: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
        let mut left = n - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (quota[a] - quota[a].floor(), quota[b] - quota[b].floor());
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

/// Collocation points stored flat with stride `dim`; interior points first.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    domain: BoxDomain,
    points: Vec<f64>,
    m_interior: usize,
    seed: Option<u64>,
}

impl CollocationSet {
    pub fn from_parts(domain: BoxDomain, interior: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        let d = domain.dim();
        if interior.len() % d != 0 || boundary.len() % d != 0 {
            return Err(Error::DimensionMismatch { expected: d, got: interior.len() % d });
        }
        let m_interior = interior.len() / d;
        if m_interior == 0 {
            return Err(Error::InvalidArgument("collocation set has no interior points".into()));
        }
        let mut points = interior;
        points.extend(boundary);
        Ok(Self { domain, points, m_interior, seed: None })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn m(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn m_interior(&self) -> usize {
        self.m_interior
    }

    pub fn m_boundary(&self) -> usize {
        self.m() - self.m_interior
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i >= self.m_interior
    }

    /// CSV with columns `x0,...,x{d-1},is_boundary`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let d = self.dim();
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
        header.push("is_boundary".into());
        wr.write_record(&header)?;
        for i in 0..self.m() {
            let mut rec: Vec<String> = self.point(i).iter().map(|v| format!("{v:e}")).collect();
            rec.push(u8::from(self.is_boundary(i)).to_string());
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(domain: BoxDomain, r: R) -> Result<Self> {
        let d = domain.dim();
        let mut rd = csv::Reader::from_reader(r);
        let (mut interior, mut boundary) = (Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::DimensionMismatch { expected: d + 1, got: rec.len() });
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            let x: Vec<f64> = (0..d).map(|k| parse(&rec[k])).collect::<Result<_>>()?;
            match rec[d].trim() {
                "0" => interior.extend(x),
                "1" => boundary.extend(x),
                other => return Err(Error::Parse(format!("bad is_boundary flag {other:?}"))),
            }
        }
        Self::from_parts(domain, interior, boundary)
    }
}

/// `M_interior` uniform interior points and `M - M_interior` uniform points on
/// the constraint faces; ChaCha8 seeded with `seed`.
pub fn sample_collocation(domain: &BoxDomain, m: usize, m_interior: usize, seed: u64) -> Result<CollocationSet> {
    if m_interior == 0 || m_interior >= m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= M_interior < M, got M={m}, M_interior={m_interior}"
        )));
    }
    if domain.faces().is_empty() {
        return Err(Error::InvalidArgument("domain has no constraint faces".into()));
    }
    let d = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut points = Vec::with_capacity(m * d);
    let mut x = vec![0.0; d];

    // open interval draw: rejects the (measure zero) endpoint
    let open = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| loop {
        let v = lo + (hi - lo) * rng.random::<f64>();
        if v > lo && v < hi {
            break v;
        }
    };

    let mut count = 0;
    while count < m_interior {
        for k in 0..d {
            x[k] = open(&mut rng, domain.lo[k], domain.hi[k]);
        }
        if seen.insert(key(&x)) {
            points.extend_from_slice(&x);
            count += 1;
        }
    }
    let alloc = domain.allocate_boundary(m - m_interior);
    for (&face, &n_face) in domain.faces().iter().zip(&alloc) {
        let mut count = 0;
        while count < n_face {
            for k in 0..d {
                x[k] = if k == face.axis {
                    domain.face_value(face)
                } else {
                    open(&mut rng, domain.lo[k], domain.hi[k])
                };
            }
            if seen.insert(key(&x)) {
                points.extend_from_slice(&x);
                count += 1;
            }
        }
    }
    Ok(CollocationSet { domain: domain.clone(), points, m_interior, seed: Some(seed) })
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Tensor grid with `M = n^d` nodes at `lo + (hi - lo) i / (n - 1)`.
/// Nodes on constraint faces are boundary points.
pub fn grid_collocation(domain: &BoxDomain, m: usize) -> Result<CollocationSet> {
    let d = domain.dim();
    let n = (m as f64).powf(1.0 / d as f64).round() as usize;
    if n < 2 || n.pow(d as u32) != m {
        return Err(Error::InvalidArgument(format!("M={m} is not a perfect {d}-th power >= 2^{d}")));
    }
    let (mut interior, mut boundary) = (Vec::new(), Vec::new());
    let mut x = vec![0.0; d];
    for flat in 0..m {
        let mut rem = flat;
        for k in 0..d {
            let i = rem % n;
            rem /= n;
            x[k] = if i == n - 1 {
                domain.hi[k]
            } else {
                domain.lo[k] + (domain.hi[k] - domain.lo[k]) * i as f64 / (n - 1) as f64
            };
        }
        if domain.on_constraint_face(&x) {
            boundary.extend_from_slice(&x);
        } else {
            interior.extend_from_slice(&x);
        }
    }
    CollocationSet::from_parts(domain.clone(), interior, boundary)
}

/// A run of functionals `delta_{x_m} o op` over a list of point indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub op: DerivativeOp,
    pub points: Vec<usize>,
    pub offset: usize,
}

impl Block {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Ordered functionals: block by block, within a block by point index.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalVector {
    dim: usize,
    coords: Vec<f64>,
    blocks: Vec<Block>,
    m: usize,
    m_interior: usize,
    q_b: usize,
    n_ops: usize,
}

impl FunctionalVector {
    /// Operators `ops[..q_b]` over all points, the rest over interior points only.
    pub fn build(ops: &[DerivativeOp], q_b: usize, pts: &CollocationSet) -> Result<Self> {
        if ops.is_empty() || q_b > ops.len() {
            return Err(Error::InvalidArgument(format!("need 0 <= Q_b <= Q and Q >= 1, got Q={}, Q_b={q_b}", ops.len())));
        }
        for op in ops {
            op.validate(pts.dim())?;
        }
        let mut fv = Self {
            dim: pts.dim(),
            coords: pts.coords().to_vec(),
            blocks: Vec::with_capacity(ops.len()),
            m: pts.m(),
            m_interior: pts.m_interior(),
            q_b,
            n_ops: ops.len(),
        };
        for (q, &op) in ops.iter().enumerate() {
            let count = if q < q_b { pts.m() } else { pts.m_interior() };
            fv.push_block(op, (0..count).collect());
        }
        Ok(fv)
    }

    /// Prepend a block (e.g. observation functionals); later offsets shift.
    pub fn with_leading_block(mut self, op: DerivativeOp, points: Vec<usize>) -> Result<Self> {
        op.validate(self.dim)?;
        if let Some(&bad) = points.iter().find(|&&p| p >= self.m) {
            return Err(Error::InvalidArgument(format!("point index {bad} out of range (M={})", self.m)));
        }
        let shift = points.len();
        for b in &mut self.blocks {
            b.offset += shift;
        }
        self.blocks.insert(0, Block { op, points, offset: 0 });
        Ok(self)
    }

    fn push_block(&mut self, op: DerivativeOp, points: Vec<usize>) {
        let offset = self.len();
        self.blocks.push(Block { op, points, offset });
    }

    /// Total number of functionals `N`.
    pub fn len(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.offset + b.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn m_interior(&self) -> usize {
        self.m_interior
    }

    pub fn q(&self) -> usize {
        self.n_ops
    }

    pub fn q_b(&self) -> usize {
        self.q_b
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.coords[idx * self.dim..(idx + 1) * self.dim]
    }

    /// `(block, position within block)` of entry `n`.
    pub fn locate(&self, n: usize) -> Option<(usize, usize)> {
        let b = self.blocks.partition_point(|b| b.offset + b.len() <= n);
        (b < self.blocks.len()).then(|| (b, n - self.blocks[b].offset))
    }

    /// Inverse of [`locate`](Self::locate).
    pub fn index_of(&self, block: usize, local: usize) -> usize {
        self.blocks[block].offset + local
    }

    /// `(op, point index)` of entry `n`.
    pub fn entry(&self, n: usize) -> (DerivativeOp, usize) {
        let (b, i) = self.locate(n).expect("functional index out of range");
        (self.blocks[b].op, self.blocks[b].points[i])
    }

    /// Global index of `op` at point `idx` in the first block with that operator
    /// covering the point.
    pub fn find(&self, op: DerivativeOp, idx: usize) -> Option<usize> {
        self.blocks.iter().find_map(|b| {
            if b.op != op {
                return None;
            }
            // standard blocks are 0..count, so the position is the index itself
            if b.points.get(idx) == Some(&idx) {
                Some(b.offset + idx)
            } else {
                b.points.iter().position(|&p| p == idx).map(|i| b.offset + i)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_by_measure() {
        assert_eq!(BoxDomain::burgers().allocate_boundary(400), vec![200, 100, 100]);
        assert_eq!(BoxDomain::unit_square().allocate_boundary(124), vec![31; 4]);
        assert_eq!(BoxDomain::unit_square().allocate_boundary(6), vec![2, 2, 1, 1]);
        assert_eq!(BoxDomain::burgers().allocate_boundary(3).iter().sum::<usize>(), 3);
    }

    #[test]
    fn random_sets() {
        let dom = BoxDomain::unit_square();
        let a = sample_collocation(&dom, 1024, 900, 7).unwrap();
        let b = sample_collocation(&dom, 1024, 900, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.m_interior(), a.m_boundary()), (900, 124));
        for i in 0..900 {
            let x = a.point(i);
            assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
        }
        for i in 900..1024 {
            assert!(dom.on_constraint_face(a.point(i)));
        }
        let c = sample_collocation(&dom, 1024, 900, 8).unwrap();
        assert_ne!(a, c);
        assert!(sample_collocation(&dom, 10, 10, 0).is_err());
        assert!(sample_collocation(&dom, 10, 0, 0).is_err());
    }

    #[test]
    fn burgers_faces() {
        let dom = BoxDomain::burgers();
        let s = sample_collocation(&dom, 2400, 2000, 1).unwrap();
        let (mut t0, mut left, mut right) = (0, 0, 0);
        for i in 2000..2400 {
            let x = s.point(i);
            if x[1] == 0.0 {
                t0 += 1;
            } else if x[0] == -1.0 {
                left += 1;
            } else if x[0] == 1.0 {
                right += 1;
            }
        }
        assert_eq!((t0, left, right), (200, 100, 100));
    }

    #[test]
    fn grids() {
        let dom = BoxDomain::unit_square();
        let g = grid_collocation(&dom, 64).unwrap();
        assert_eq!((g.m_interior(), g.m_boundary()), (36, 28));
        let g = grid_collocation(&dom, 4096).unwrap();
        assert_eq!(g.m(), 4096);
        assert_eq!(g.m_interior(), 62 * 62);
        assert!(grid_collocation(&dom, 4).is_err());
        assert!(grid_collocation(&dom, 50).is_err());
    }

    #[test]
    fn functional_counts() {
        use DerivativeOp::*;
        let dom = BoxDomain::unit_square();
        let s = sample_collocation(&dom, 1024, 900, 0).unwrap();
        let fv = FunctionalVector::build(&[Identity, Laplacian], 1, &s).unwrap();
        assert_eq!(fv.len(), 1924);
        let s = sample_collocation(&BoxDomain::burgers(), 2400, 2000, 0).unwrap();
        let fv = FunctionalVector::build(&[Identity, Partial(1), Partial(0), SecondPartial(0)], 1, &s).unwrap();
        assert_eq!(fv.len(), 8400);
        let fv = FunctionalVector::build(&[Identity, Laplacian], 2, &s).unwrap();
        assert_eq!(fv.len(), 2 * 2400);
        for n in 0..fv.len() {
            let (b, i) = fv.locate(n).unwrap();
            assert_eq!(fv.index_of(b, i), n);
        }
        assert!(fv.locate(fv.len()).is_none());
    }

    #[test]
    fn leading_block() {
        use DerivativeOp::*;
        let s = sample_collocation(&BoxDomain::unit_square(), 20, 16, 3).unwrap();
        let fv = FunctionalVector::build(&[Identity, Laplacian], 1, &s).unwrap();
        let fv = fv.with_leading_block(Identity, vec![2, 5, 9]).unwrap();
        assert_eq!(fv.len(), 3 + 20 + 16);
        assert_eq!(fv.entry(1), (Identity, 5));
        assert_eq!(fv.entry(3), (Identity, 0));
        assert_eq!(fv.find(Laplacian, 4), Some(3 + 20 + 4));
        assert!(fv.clone().with_leading_block(Identity, vec![20]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dom = BoxDomain::unit_square();
        let s = sample_collocation(&dom, 30, 20, 4).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let r = CollocationSet::read_csv(dom, buf.as_slice()).unwrap();
        assert_eq!(r.coords(), s.coords());
        assert_eq!(r.m_interior(), 20);
    }
}
