//! Dense complex operators on small multipartite Hilbert spaces.
//!
//! An [`Operator`] is a square matrix together with the list of subsystem
//! dimensions it acts on. Flat indices are lexicographic over the subsystem
//! multi-index with the first subsystem most significant, so
//! `kron(a, b)[(i, k), (j, l)] = a[i, j] * b[k, l]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Hermiticity tolerance applied to inputs of [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm (relative) at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;
/// Slack for negative eigenvalues of density operators.
pub const PSD_SLACK: f64 = 1e-8;

/// Dense complex square matrix tagged with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    side: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(format!(
                "subsystem dimensions must be positive, got {dims:?}"
            )));
        }
        let side: usize = dims.iter().product();
        if data.len() != side * side {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for side {side}",
                data.len()
            )));
        }
        Ok(Self { dims, side, data })
    }

    /// Builds an operator from a real matrix given row by row.
    pub fn from_real_rows(dims: Vec<usize>, rows: &[&[f64]]) -> Result<Self> {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(dims, data)
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let side: usize = dims.iter().product();
        Self {
            dims,
            side,
            data: vec![ZERO; side * side],
        }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let mut op = Self::zeros(dims);
        for i in 0..op.side {
            op.data[i * op.side + i] = ONE;
        }
        op
    }

    pub fn from_diagonal(dims: Vec<usize>, diag: &[f64]) -> Result<Self> {
        let mut op = Self::zeros(dims);
        if diag.len() != op.side {
            return Err(Error::DimensionMismatch(format!(
                "diagonal of length {} for side {}",
                diag.len(),
                op.side
            )));
        }
        for (i, &x) in diag.iter().enumerate() {
            op.data[i * op.side + i] = C64::new(x, 0.0);
        }
        Ok(op)
    }

    /// The rank-one operator `|ket⟩⟨ket|`.
    pub fn projector(dims: Vec<usize>, ket: &[C64]) -> Result<Self> {
        let mut op = Self::zeros(dims);
        if ket.len() != op.side {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} for side {}",
                ket.len(),
                op.side
            )));
        }
        for i in 0..op.side {
            for j in 0..op.side {
                op.data[i * op.side + j] = ket[i] * ket[j].conj();
            }
        }
        Ok(op)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Matrix side, the product of the subsystem dimensions.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.side + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.side + col] = value;
    }

    /// Re-tags the operator with a different factorization of the same side.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.side {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} do not factor side {}",
                self.side
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.side).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.side;
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        Ok(out)
    }

    /// `self += factor * other`, in place.
    pub fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * factor;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.side != other.side {
            return Err(Error::DimensionMismatch(format!(
                "matmul of sides {} and {}",
                self.side, other.side
            )));
        }
        let n = self.side;
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.side != other.side {
            return Err(Error::DimensionMismatch(format!(
                "trace product of sides {} and {}",
                self.side, other.side
            )));
        }
        let n = self.side;
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.data[i * n + j] * other.data[j * n + i];
            }
        }
        Ok(acc)
    }

    /// `⟨ket|self|ket⟩`.
    pub fn expectation(&self, ket: &[C64]) -> Result<C64> {
        if ket.len() != self.side {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} for side {}",
                ket.len(),
                self.side
            )));
        }
        let n = self.side;
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += self.data[i * n + j] * ket[j];
            }
            acc += ket[i].conj() * row;
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.side;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.side != other.side {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::DimensionMismatch(format!(
                "sides {} and {}",
                self.side, other.side
            )));
        }
        Ok(())
    }

    /// Strides of each subsystem in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    /// Reorders subsystems: subsystem `k` of the result is subsystem
    /// `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::InvalidParameter(format!(
                "permutation of length {} for {n} subsystems",
                order.len()
            )));
        }
        for &o in order {
            if o >= n {
                return Err(Error::IndexOutOfRange { index: o, count: n });
            }
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidParameter(format!(
                    "repeated subsystem {o} in permutation"
                )));
            }
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let old_strides = self.strides();
        let map = index_map(&new_dims, order, &old_strides);
        let side = self.side;
        let mut data = vec![ZERO; side * side];
        for (i, &oi) in map.iter().enumerate() {
            for (j, &oj) in map.iter().enumerate() {
                data[i * side + j] = self.data[oi * side + oj];
            }
        }
        Self::new(new_dims, data)
    }

    /// Applies `op` on the listed subsystems from the left: `(op ⊗ 𝟙) · self`,
    /// with `op`'s own subsystems matched to `on` in order.
    pub fn apply_left(&self, op: &Operator, on: &[usize]) -> Result<Self> {
        let (on_offsets, rest_offsets) = self.split_offsets(op, on)?;
        let side = self.side;
        let ds = on_offsets.len();
        let mut out = Self::zeros(self.dims.clone());
        for &r in &rest_offsets {
            for s in 0..ds {
                let row = on_offsets[s] + r;
                for s2 in 0..ds {
                    let k = op.data[s * ds + s2];
                    if k == ZERO {
                        continue;
                    }
                    let src = on_offsets[s2] + r;
                    for col in 0..side {
                        out.data[row * side + col] += k * self.data[src * side + col];
                    }
                }
            }
        }
        Ok(out)
    }

    fn split_offsets(&self, op: &Operator, on: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for &o in on {
            if o >= n {
                return Err(Error::IndexOutOfRange { index: o, count: n });
            }
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidParameter(format!("repeated subsystem {o}")));
            }
        }
        let on_dims: Vec<usize> = on.iter().map(|&o| self.dims[o]).collect();
        if on_dims.iter().product::<usize>() != op.side {
            return Err(Error::DimensionMismatch(format!(
                "operator of side {} on subsystems {on:?} with dims {on_dims:?}",
                op.side
            )));
        }
        let rest: Vec<usize> = (0..n).filter(|k| !seen[*k]).collect();
        let strides = self.strides();
        Ok((
            offsets(&self.dims, on, &strides),
            offsets(&self.dims, &rest, &strides),
        ))
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat-index contributions of every multi-index over the listed subsystems,
/// enumerated lexicographically in the order of `subsystems`.
pub(crate) fn offsets(dims: &[usize], subsystems: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for v in 0..dims[k] {
                next.push(base + v * strides[k]);
            }
        }
        out = next;
    }
    out
}

fn index_map(new_dims: &[usize], order: &[usize], old_strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (k, &o) in order.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * new_dims[k]);
        for &base in &out {
            for v in 0..new_dims[k] {
                next.push(base + v * old_strides[o]);
            }
        }
        out = next;
    }
    out
}

/// Kronecker product; dims concatenate.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.side, b.side);
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let x = a.data[i * na + j];
            if x == ZERO {
                continue;
            }
            for k in 0..nb {
                let row = (i * nb + k) * n + j * nb;
                for l in 0..nb {
                    data[row + l] = x * b.data[k * nb + l];
                }
            }
        }
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator {
        dims,
        side: n,
        data,
    }
}

/// Kronecker product of a non-empty list of operators.
pub fn kron_all<'a, I>(ops: I) -> Option<Operator>
where
    I: IntoIterator<Item = &'a Operator>,
{
    let mut iter = ops.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, op| kron(&acc, op)))
}

/// Kronecker product of kets.
pub fn kron_ket(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems
/// retain their original relative order.
pub fn partial_trace(s: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = s.dims.len();
    let mut mask = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, count: n });
        }
        mask[k] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|k| mask[*k]).collect();
    let traced: Vec<usize> = (0..n).filter(|k| !mask[*k]).collect();
    if kept.is_empty() {
        let t = s.trace();
        return Operator::new(vec![1], vec![t]);
    }
    let strides = s.strides();
    let ko = offsets(&s.dims, &kept, &strides);
    let to = offsets(&s.dims, &traced, &strides);
    let dk = ko.len();
    let side = s.side;
    let mut data = vec![ZERO; dk * dk];
    for (i, &oi) in ko.iter().enumerate() {
        for (j, &oj) in ko.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &to {
                acc += s.data[(oi + t) * side + oj + t];
            }
            data[i * dk + j] = acc;
        }
    }
    Operator::new(kept.iter().map(|&k| s.dims[k]).collect(), data)
}

/// Eigendecomposition of a Hermitian operator, eigenvalues in descending
/// order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Operator,
}

impl Spectrum {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        let n = self.eigenvectors.side;
        (0..n).map(|r| self.eigenvectors.get(r, i)).collect()
    }

    /// `U · diag(λ) · U†`.
    pub fn reconstruct(&self) -> Operator {
        self.map_eigenvalues(|x| x)
    }

    /// `U · diag(f(λ)) · U†`.
    pub fn map_eigenvalues<F: Fn(f64) -> f64>(&self, f: F) -> Operator {
        let u = &self.eigenvectors;
        let n = u.side;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = Operator::zeros(u.dims.clone());
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += u.data[i * n + k] * fl[k] * u.data[j * n + k].conj();
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian operators.
pub fn hermitian_eig(a: &Operator) -> Result<Spectrum> {
    let n = a.side;
    let scale = a.frobenius_norm();
    let herr = a.hermiticity_error();
    if herr > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(herr));
    }
    let mut m = a.clone();
    for i in 0..n {
        for j in i..n {
            let avg = (m.data[i * n + j] + m.data[j * n + i].conj()) * 0.5;
            m.data[i * n + j] = avg;
            m.data[j * n + i] = avg.conj();
        }
    }
    let mut v = Operator::identity(vec![n]);
    let target = JACOBI_TOL * scale.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.data[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m.data[p * n + q];
                let babs = b.norm();
                if babs <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = b / babs;
                let app = m.data[p * n + p].re;
                let aqq = m.data[q * n + q].re;
                let theta = 0.5 * (2.0 * babs).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = m.data[k * n + p];
                    let akq = m.data[k * n + q];
                    m.data[k * n + p] = akp * u_pp + akq * u_qp;
                    m.data[k * n + q] = akp * u_pq + akq * u_qq;
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = vkp * u_pp + vkq * u_qp;
                    v.data[k * n + q] = vkp * u_pq + vkq * u_qq;
                }
                for k in 0..n {
                    let apk = m.data[p * n + k];
                    let aqk = m.data[q * n + k];
                    m.data[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    m.data[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                m.data[p * n + q] = ZERO;
                m.data[q * n + p] = ZERO;
                m.data[p * n + p] = C64::new(m.data[p * n + p].re, 0.0);
                m.data[q * n + q] = C64::new(m.data[q * n + q].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.data[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Operator::zeros(a.dims.clone());
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.data[r * n + new_col] = v.data[r * n + old_col];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Shannon entropy in bits of a probability vector; `0·log 0 = 0`.
pub fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 1e-15)
        .map(|p| -p * p.log2())
        .sum()
}

/// A positive unit-trace operator with one label per subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    operator: Operator,
    labels: Vec<String>,
}

impl DensityState {
    /// Wraps an operator after checking Hermiticity and unit trace.
    /// Positivity is checked by [`DensityState::check_psd`] and by the
    /// entropy routines.
    pub fn new(operator: Operator) -> Result<Self> {
        let herr = operator.hermiticity_error();
        if herr > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        let tr = operator.trace();
        if (tr.re - 1.0).abs() > PSD_SLACK || tr.im.abs() > PSD_SLACK {
            return Err(Error::InvalidParameter(format!(
                "density operator trace {tr} differs from 1"
            )));
        }
        let labels = (0..operator.dims.len()).map(|k| k.to_string()).collect();
        Ok(Self { operator, labels })
    }

    pub fn from_ket(dims: Vec<usize>, ket: &[C64]) -> Result<Self> {
        Self::new(Operator::projector(dims, ket)?)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let side: usize = dims.iter().product();
        let op = Operator::identity(dims).scale(1.0 / side as f64);
        Self::new(op).expect("maximally mixed state is valid")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.operator.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.operator.dims.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn into_operator(self) -> Operator {
        self.operator
    }

    pub fn dims(&self) -> &[usize] {
        &self.operator.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        hermitian_eig(&self.operator)
    }

    /// Smallest eigenvalue, erroring when it is below `-PSD_SLACK`.
    pub fn check_psd(&self) -> Result<f64> {
        let spec = self.spectrum()?;
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_SLACK {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(min)
    }

    /// Reduced state on the listed subsystems (original order kept).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        let op = partial_trace(&self.operator, keep)?;
        let mut sorted: Vec<usize> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let labels = sorted.iter().map(|&k| self.labels[k].clone()).collect();
        Ok(Self {
            operator: op,
            labels,
        })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self {
            operator: kron(&self.operator, &other.operator),
            labels,
        }
    }

    /// Internal constructor for operators already known to be valid states
    /// up to renormalization noise.
    pub(crate) fn from_trusted(operator: Operator, labels: Vec<String>) -> Self {
        Self { operator, labels }
    }
}

/// Von Neumann entropy in bits.
pub fn entropy(s: &DensityState) -> Result<f64> {
    let spec = s.spectrum()?;
    entropy_of_eigenvalues(&spec.eigenvalues)
}

pub(crate) fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    if let Some(&min) = eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -PSD_SLACK {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(shannon_bits(eigenvalues.iter().map(|&x| x.max(0.0))))
}

/// `⟨ket|s|ket⟩` for a normalized ket.
pub fn fidelity_pure(s: &DensityState, ket: &[C64]) -> Result<f64> {
    if ket.len() != s.operator.side {
        return Err(Error::DimensionMismatch(format!(
            "ket of length {} for state of side {}",
            ket.len(),
            s.operator.side
        )));
    }
    let norm: f64 = ket.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "ket norm² {norm} is not 1"
        )));
    }
    Ok(s.operator.expectation(ket)?.re.clamp(0.0, 1.0))
}

/// Matrix serialization as a flat row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<[f64; 2]>);

impl MatrixJson {
    pub fn from_operator(op: &Operator) -> Self {
        Self(op.data.iter().map(|z| [z.re, z.im]).collect())
    }

    /// Rebuilds an operator on a single subsystem of the inferred side.
    pub fn to_operator(&self) -> Result<Operator> {
        let len = self.0.len();
        let side = (len as f64).sqrt().round() as usize;
        if side * side != len || side == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{len} entries do not form a square matrix"
            )));
        }
        Operator::new(
            vec![side],
            self.0.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        )
    }
}

/// Random matrices for tests, seesaw initialization and examples.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    /// Haar-random unitary via Gram–Schmidt on Gaussian columns.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        while cols.len() < dim {
            let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
            for c in &cols {
                let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= overlap * y;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        let mut u = Operator::zeros(vec![dim]);
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                u.set(i, j, x);
            }
        }
        u
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> Operator {
        let side: usize = dims.iter().product();
        let mut op = Operator::zeros(dims);
        for i in 0..side {
            op.set(i, i, C64::new(rng.sample(StandardNormal), 0.0));
            for j in i + 1..side {
                let z = gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2;
                op.set(i, j, z);
                op.set(j, i, z.conj());
            }
        }
        op
    }

    /// Ginibre-distributed mixed state.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> DensityState {
        let side: usize = dims.iter().product();
        let mut g = Operator::zeros(dims);
        for i in 0..side {
            for j in 0..side {
                g.set(i, j, gaussian(rng));
            }
        }
        let p = g.matmul(&g.adjoint()).expect("same side");
        let tr = p.trace().re;
        let mut p = p.scale(1.0 / tr);
        for i in 0..side {
            for j in i..side {
                let avg = (p.get(i, j) + p.get(j, i).conj()) * 0.5;
                p.set(i, j, avg);
                p.set(j, i, avg.conj());
            }
        }
        DensityState::new(p).expect("Ginibre state is valid")
    }
}
