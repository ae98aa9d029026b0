//! Finite atomic measure spaces, bilinear forms on `R^dim`, and families of
//! vector-valued functions.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::{Mode, Rational, Scalar};

pub type Vector<S> = Vec<S>;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureSpace<S> {
    points: Vec<String>,
    weights: Vec<S>,
}

impl<S: Scalar> DiscreteMeasureSpace<S> {
    pub fn new(points: Vec<String>, weights: Vec<S>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("measure space needs at least one point"));
        }
        if points.len() != weights.len() {
            return Err(invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(invalid(format!("negative weight at atom {i}")));
        }
        Ok(DiscreteMeasureSpace { points, weights })
    }

    /// `count` equally weighted atoms named `0, 1, …`.
    pub fn uniform(count: usize) -> Result<Self> {
        let w = S::from_rational(&Rational::new(BigInt::one(), BigInt::from(count.max(1))));
        Self::new((0..count).map(|i| i.to_string()).collect(), vec![w; count])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn mass(&self) -> S {
        let mut m = S::zero();
        for w in &self.weights {
            m += w;
        }
        m
    }

    /// Weights sum to one (exactly, or within 1e-12 in float mode).
    pub fn is_probability(&self) -> bool {
        let mut d = self.mass();
        d -= &S::one();
        d.is_negligible(1e-12)
    }

    /// `Σ_x μ_x g(x)` in atom order.
    pub fn integrate(&self, values: &[S]) -> S {
        let mut acc = S::zero();
        for (w, v) in self.weights.iter().zip(values) {
            let mut t = w.clone();
            t *= v;
            acc += &t;
        }
        acc
    }

    /// Reorders atoms: new atom `i` is old atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        DiscreteMeasureSpace {
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
            weights: perm.iter().map(|&i| self.weights[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm<S> {
    dim: usize,
    /// Row-major, `matrix[i][j] = B(e_i, e_j)`.
    matrix: Vec<Vec<S>>,
}

impl<S: Scalar> BilinearForm<S> {
    pub fn new(matrix: Vec<Vec<S>>) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 {
            return Err(invalid("bilinear form needs dim >= 1"));
        }
        if matrix.iter().any(|row| row.len() != dim) {
            return Err(invalid("form matrix is not square"));
        }
        Ok(BilinearForm { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        BilinearForm { dim, matrix }
    }

    /// Gram form `AᵀA`, always positive semi-definite.
    pub fn gram(a: &[Vec<S>]) -> Result<Self> {
        let dim = a.first().map_or(0, Vec::len);
        if a.iter().any(|r| r.len() != dim) {
            return Err(invalid("ragged Gram factor"));
        }
        let mut matrix = vec![vec![S::zero(); dim]; dim];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for r in a {
                    let mut t = r[i].clone();
                    t *= &r[j];
                    *cell += &t;
                }
            }
        }
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }

    /// `½(B(v,w) + B(w,v))`.
    pub fn symmetrize(&self) -> Self {
        let matrix = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let mut s = self.matrix[i][j].clone();
                        s += &self.matrix[j][i];
                        s.half()
                    })
                    .collect()
            })
            .collect();
        BilinearForm { dim: self.dim, matrix }
    }

    fn check_len(&self, v: &[S]) -> Result<()> {
        if v.len() != self.dim {
            return Err(invalid(format!("vector of length {} for form of dim {}", v.len(), self.dim)));
        }
        Ok(())
    }

    /// `vᵀ M w`.
    pub fn eval(&self, v: &[S], w: &[S]) -> Result<S> {
        self.check_len(v)?;
        self.check_len(w)?;
        Ok(self.eval_unchecked(v, w))
    }

    pub(crate) fn eval_unchecked(&self, v: &[S], w: &[S]) -> S {
        let mut acc = S::zero();
        for (vi, row) in v.iter().zip(&self.matrix) {
            if vi.is_zero() {
                continue;
            }
            let mut inner = S::zero();
            for (m, wj) in row.iter().zip(w) {
                let mut t = m.clone();
                t *= wj;
                inner += &t;
            }
            inner *= vi;
            acc += &inner;
        }
        acc
    }

    /// `B(v,v)`; errors if negative.
    pub fn quadratic(&self, v: &[S]) -> Result<S> {
        let q = self.eval(v, v)?;
        if q.is_negative() {
            return Err(Error::PositivityViolation(format!("B(v,v) = {q:?} < 0")));
        }
        Ok(q)
    }

    /// `B(v) = B(v,v)^{1/2}` as a float.
    pub fn norm(&self, v: &[S]) -> Result<f64> {
        Ok(self.quadratic(v)?.to_f64().sqrt())
    }

    /// `Π_j B(v_{2j-1}, v_{2j})` over `2r` slots.
    pub fn lambda_eval(&self, r: usize, vs: &[&[S]]) -> Result<S> {
        if r == 0 || vs.len() != 2 * r {
            return Err(invalid(format!("Λ of order r={r} takes {} vectors, got {}", 2 * r, vs.len())));
        }
        let mut acc = S::one();
        for pair in vs.chunks(2) {
            acc *= &self.eval(pair[0], pair[1])?;
        }
        Ok(acc)
    }

    /// Change of basis `v = Q u`: returns the form `(u, w) ↦ B(Qu, Qw)`.
    pub fn pulled_back(&self, q: &[Vec<S>]) -> Self {
        let d = self.dim;
        let mut out = vec![vec![S::zero(); d]; d];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for a in 0..d {
                    for b in 0..d {
                        let mut t = q[a][i].clone();
                        t *= &self.matrix[a][b];
                        t *= &q[b][j];
                        *cell += &t;
                    }
                }
            }
        }
        BilinearForm { dim: d, matrix: out }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BilinearForm<T> {
        BilinearForm {
            dim: self.dim,
            matrix: self.matrix.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

impl BilinearForm<Rational> {
    /// Realification of the Hermitian form `H = re + i·im` on `C^d`:
    /// `B(x+iy, u+iz) = Re Σ conj(x+iy)_j H_jk (u+iz)_k`, a real form on `R^{2d}`.
    pub fn realify_hermitian(re: &[Vec<Rational>], im: &[Vec<Rational>]) -> Result<Self> {
        let d = re.len();
        if im.len() != d || re.iter().chain(im).any(|r| r.len() != d) {
            return Err(invalid("Hermitian parts must both be d×d"));
        }
        let mut m = vec![vec![Rational::zero(); 2 * d]; 2 * d];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = re[i][j].clone();
                m[d + i][d + j] = re[i][j].clone();
                m[i][d + j] = -im[i][j].clone();
                m[d + i][j] = im[i][j].clone();
            }
        }
        Self::new(m)
    }
}

/// Outcome of a positivity check on the symmetrized form.
#[derive(Debug, Clone, PartialEq)]
pub enum PositivityCertificate {
    /// Every coefficient of the characteristic polynomial of `-M` alternates
    /// correctly (all principal-minor sums are `>= 0`), checked exactly.
    ExactMinors,
    /// Random integer probes all gave `B(v,v) >= 0` and the smallest float
    /// eigenvalue is `>= -tol·max(1, |λ_max|)`.
    ProbedEigen { min_eigenvalue: f64 },
}

pub const EXACT_POSITIVITY_MAX_DIM: usize = 4;
pub const EIGEN_TOLERANCE: f64 = 1e-9;
const PROBES: usize = 64;

/// A symmetrized form that passed [`BilinearForm::certify_positive`].
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveForm<S> {
    form: BilinearForm<S>,
    certificate: PositivityCertificate,
}

impl<S: Scalar> PositiveForm<S> {
    pub fn form(&self) -> &BilinearForm<S> {
        &self.form
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }
}

impl<S: Scalar> BilinearForm<S> {
    /// Symmetrizes, then certifies `B(v,v) >= 0` for all `v`.
    pub fn certify_positive(&self) -> Result<PositiveForm<S>> {
        let sym = self.symmetrize();
        let certificate = if S::MODE == Mode::Exact && sym.dim <= EXACT_POSITIVITY_MAX_DIM {
            let exact: Vec<Vec<Rational>> = sym
                .matrix
                .iter()
                .map(|r| r.iter().map(|v| v.as_rational().expect("exact mode")).collect())
                .collect();
            for k in 1..=sym.dim {
                let e_k = principal_minor_sum(&exact, k);
                if e_k < Rational::zero() {
                    return Err(Error::PositivityViolation(format!(
                        "sum of {k}×{k} principal minors is {e_k}"
                    )));
                }
            }
            PositivityCertificate::ExactMinors
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..PROBES {
                let v: Vec<S> = (0..sym.dim).map(|_| S::from_i64(rng.gen_range(-5..=5))).collect();
                let q = sym.eval_unchecked(&v, &v);
                if q.to_f64() < -EIGEN_TOLERANCE * (1.0 + q.to_f64().abs()) {
                    return Err(Error::PositivityViolation(format!("probe gave B(v,v) = {q:?}")));
                }
            }
            let m = DMatrix::from_fn(sym.dim, sym.dim, |i, j| sym.matrix[i][j].to_f64());
            let eig = m.symmetric_eigen().eigenvalues;
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let max_abs = eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
            if min < -EIGEN_TOLERANCE * max_abs.max(1.0) {
                return Err(Error::PositivityViolation(format!("eigenvalue {min} < 0")));
            }
            PositivityCertificate::ProbedEigen { min_eigenvalue: min }
        };
        Ok(PositiveForm { form: sym, certificate })
    }
}

/// Sum of all `k×k` principal minors (the `k`-th elementary symmetric
/// function of the eigenvalues).
fn principal_minor_sum(m: &[Vec<Rational>], k: usize) -> Rational {
    let d = m.len();
    let mut total = Rational::zero();
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Rational>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        total += determinant(sub);
    }
    total
}

/// Gaussian elimination over the rationals.
pub fn determinant(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let t = &factor * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily<S> {
    space: DiscreteMeasureSpace<S>,
    dim: usize,
    /// `values[l][x]` is `f_l(x) ∈ R^dim`.
    values: Vec<Vec<Vector<S>>>,
}

impl<S: Scalar> FunctionFamily<S> {
    pub fn new(space: DiscreteMeasureSpace<S>, dim: usize, values: Vec<Vec<Vector<S>>>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("family needs L >= 1"));
        }
        if dim == 0 {
            return Err(invalid("value dimension must be >= 1"));
        }
        for (l, f) in values.iter().enumerate() {
            if f.len() != space.len() {
                return Err(invalid(format!("f_{} has {} values for {} atoms", l + 1, f.len(), space.len())));
            }
            if f.iter().any(|v| v.len() != dim) {
                return Err(invalid(format!("f_{} has a value of wrong dimension", l + 1)));
            }
        }
        Ok(FunctionFamily { space, dim, values })
    }

    /// Scalar-valued family (`dim = 1`) from `values[l][x]`.
    pub fn scalar(space: DiscreteMeasureSpace<S>, values: Vec<Vec<S>>) -> Result<Self> {
        let wrapped = values
            .into_iter()
            .map(|f| f.into_iter().map(|v| vec![v]).collect())
            .collect();
        Self::new(space, 1, wrapped)
    }

    pub fn space(&self) -> &DiscreteMeasureSpace<S> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Family size `L`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> usize {
        self.space.len()
    }

    pub fn values(&self) -> &[Vec<Vector<S>>] {
        &self.values
    }

    pub fn value(&self, l: usize, x: usize) -> &[S] {
        &self.values[l][x]
    }

    /// Vectors `f_1(x), …, f_L(x)`.
    pub fn at_atom(&self, x: usize) -> Vec<&[S]> {
        self.values.iter().map(|f| f[x].as_slice()).collect()
    }

    /// `S(x) = Σ_l f_l(x)`.
    pub fn sum_at(&self, x: usize) -> Vector<S> {
        let mut s = vec![S::zero(); self.dim];
        for f in &self.values {
            for (acc, v) in s.iter_mut().zip(&f[x]) {
                *acc += v;
            }
        }
        s
    }

    /// `G[a][b] = B(f_a(x), f_b(x))`.
    pub fn gram_at(&self, b: &BilinearForm<S>, x: usize) -> Vec<Vec<S>> {
        let vs = self.at_atom(x);
        vs.iter()
            .map(|va| vs.iter().map(|vb| b.eval_unchecked(va, vb)).collect())
            .collect()
    }

    pub fn check_form(&self, b: &BilinearForm<S>) -> Result<()> {
        if b.dim() != self.dim {
            return Err(invalid(format!("form dim {} but family dim {}", b.dim(), self.dim)));
        }
        Ok(())
    }

    /// Keeps members `keep` (zero-based, in the given order).
    pub fn subfamily(&self, keep: &[usize]) -> Result<Self> {
        let values = keep
            .iter()
            .map(|&l| {
                self.values
                    .get(l)
                    .cloned()
                    .ok_or_else(|| invalid(format!("member {l} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.space.clone(), self.dim, values)
    }

    pub fn permuted_atoms(&self, perm: &[usize]) -> Self {
        FunctionFamily {
            space: self.space.permuted(perm),
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|f| perm.iter().map(|&i| f[i].clone()).collect())
                .collect(),
        }
    }

    pub fn permuted_members(&self, perm: &[usize]) -> Self {
        FunctionFamily {
            space: self.space.clone(),
            dim: self.dim,
            values: perm.iter().map(|&l| self.values[l].clone()).collect(),
        }
    }

    /// Applies `v ↦ M v` to every value.
    pub fn transformed(&self, m: &[Vec<S>]) -> Self {
        let apply = |v: &Vector<S>| -> Vector<S> {
            m.iter()
                .map(|row| {
                    let mut acc = S::zero();
                    for (a, b) in row.iter().zip(v) {
                        let mut t = a.clone();
                        t *= b;
                        acc += &t;
                    }
                    acc
                })
                .collect()
        };
        FunctionFamily {
            space: self.space.clone(),
            dim: m.len(),
            values: self.values.iter().map(|f| f.iter().map(apply).collect()).collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FunctionFamily<T> {
        FunctionFamily {
            space: DiscreteMeasureSpace {
                points: self.space.points.clone(),
                weights: self.space.weights.iter().map(&f).collect(),
            },
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|g| g.iter().map(|v| v.iter().map(&f).collect()).collect())
                .collect(),
        }
    }
}
