use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix with finite entries.
///
/// Thin wrapper over [`nalgebra::DMatrix`]; the wrapped matrix is reachable
/// read-only through [`CMatrix::inner`]. Real inputs are stored with zero
/// imaginary parts.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix(m))
    }

    /// Wraps a matrix produced by an internal computation.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        CMatrix(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        CMatrix::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = DMatrix::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), ncols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        CMatrix::new(m).expect("finite entries")
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        CMatrix::wrap(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&v| C64::new(v, 0.0)).collect();
        CMatrix::from_diagonal(&d)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::Dimension(format!("{what} must be square, got {}x{}", self.rows(), self.cols())))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> CMatrix {
        CMatrix(self.0.map(|z| z * s))
    }

    /// `self + s·I`.
    pub fn shift(&self, s: C64) -> CMatrix {
        let mut m = self.0.clone();
        for i in 0..m.nrows().min(m.ncols()) {
            m[(i, i)] += s;
        }
        CMatrix(m)
    }

    pub fn powi(&self, p: usize) -> CMatrix {
        let n = self.rows();
        let mut acc = DMatrix::identity(n, n);
        for _ in 0..p {
            acc = &acc * &self.0;
        }
        CMatrix(acc)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl From<CMatrix> for DMatrix<C64> {
    fn from(m: CMatrix) -> Self {
        m.0
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if z.im == 0.0 {
                    write!(f, "{:>12.6e} ", z.re)?;
                } else {
                    write!(f, "{:>12.6e}{:+.6e}i ", z.re, z.im)?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let file = MatrixFile {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries().into_iter().map(|z| Entry::Pair([z.re, z.im])).collect(),
        };
        file.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = MatrixFile::deserialize(deserializer)?;
        if file.rows == 0 || file.cols == 0 {
            return Err(D::Error::custom("rows and cols must be positive"));
        }
        let entries: Vec<C64> = file
            .entries
            .into_iter()
            .map(|e| match e {
                Entry::Real(v) => C64::new(v, 0.0),
                Entry::Pair([re, im]) => C64::new(re, im),
            })
            .collect();
        CMatrix::from_row_slice(file.rows, file.cols, &entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_accepts_bare_numbers_and_pairs() {
        let m = CMatrix::from_json(r#"{"rows":2,"cols":2,"entries":[0,0.5,[-0.5,0],[1,2]]}"#).unwrap();
        assert_eq!(m.get(0, 1), C64::new(0.5, 0.0));
        assert_eq!(m.get(1, 1), C64::new(1.0, 2.0));
        let s = m.to_json();
        assert!(s.contains("[0.5,0.0]"));
        assert_eq!(CMatrix::from_json(&s).unwrap(), m);
    }

    #[test]
    fn json_rejects_wrong_entry_count() {
        let err = CMatrix::from_json(r#"{"rows":2,"cols":2,"entries":[1,2,3]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = CMatrix::from_row_slice(1, 1, &[C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite));
    }
}
