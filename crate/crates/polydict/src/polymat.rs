//! Polynomial matrices: a `p x q` matrix whose entries are order-`L`
//! polynomials in the delay variable, stored lag-major so that each lag
//! slice is a contiguous scalar matrix.
//!
//! The same object can be read two ways: lag slice `l` is the scalar
//! coefficient matrix at delay `l`, and element `(i, j)` is the length-`L`
//! coefficient vector of one polynomial entry. [`PolyMatrix::stack`]
//! concatenates the lag slices vertically into an ordinary
//! `(p*L) x q` matrix, which converts the polynomial model into a
//! conventional one and back ([`StackedMatrix::unstack`]).

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real polynomial matrix. Immutable after construction; all
/// operations return new instances, so values are safe to share across
/// threads.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    lags: usize,
    /// Lag-major: `coeffs[(lag * rows + row) * cols + col]`.
    coeffs: Vec<f64>,
}

impl PolyMatrix {
    /// All-zero matrix with the given shape.
    pub fn zeros(rows: usize, cols: usize, lags: usize) -> Result<Self> {
        check_dims(rows, cols, lags)?;
        Ok(Self {
            rows,
            cols,
            lags,
            coeffs: vec![0.0; lags * rows * cols],
        })
    }

    /// Builds a matrix by evaluating `f(lag, row, col)` for every coefficient.
    pub fn from_fn<F>(rows: usize, cols: usize, lags: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        check_dims(rows, cols, lags)?;
        let mut coeffs = Vec::with_capacity(lags * rows * cols);
        for l in 0..lags {
            for i in 0..rows {
                for j in 0..cols {
                    coeffs.push(f(l, i, j));
                }
            }
        }
        Self::from_coeffs(rows, cols, lags, coeffs)
    }

    /// Wraps a lag-major coefficient vector. Length must be exactly
    /// `lags * rows * cols` and every entry finite.
    pub fn from_coeffs(rows: usize, cols: usize, lags: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, lags)?;
        if coeffs.len() != lags * rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients for {}x{} with {} lags, got {}",
                lags * rows * cols,
                rows,
                cols,
                lags,
                coeffs.len()
            )));
        }
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!(
                "coefficient at flat index {pos} is {}",
                coeffs[pos]
            )));
        }
        Ok(Self {
            rows,
            cols,
            lags,
            coeffs,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    /// Coefficient of `z^-lag` in entry `(row, col)`.
    #[inline]
    pub fn get(&self, lag: usize, row: usize, col: usize) -> f64 {
        assert!(lag < self.lags && row < self.rows && col < self.cols);
        self.coeffs[(lag * self.rows + row) * self.cols + col]
    }

    /// Raw lag-major coefficient storage.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The scalar coefficient matrix at one lag, row-major, contiguous.
    pub fn lag_slice(&self, lag: usize) -> &[f64] {
        assert!(lag < self.lags);
        let n = self.rows * self.cols;
        &self.coeffs[lag * n..(lag + 1) * n]
    }

    /// The length-`lags` coefficient vector of polynomial entry `(row, col)`.
    pub fn element(&self, row: usize, col: usize) -> Vec<f64> {
        assert!(row < self.rows && col < self.cols);
        (0..self.lags).map(|l| self.get(l, row, col)).collect()
    }

    /// Frobenius norm: square root of the sum of squares of every
    /// coefficient over all entries and lags.
    pub fn fnorm(&self) -> f64 {
        self.fnorm_sq().sqrt()
    }

    /// Sum of squared coefficients (the F-norm squared, computed without
    /// the round trip through a square root).
    pub fn fnorm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Concatenates the lag slices vertically: block `l` of the result is
    /// the lag-`l` coefficient matrix, lag 0 on top.
    pub fn stack(&self) -> StackedMatrix {
        let p = self.rows;
        let data = DMatrix::from_fn(p * self.lags, self.cols, |r, c| self.get(r / p, r % p, c));
        StackedMatrix {
            data,
            rows_per_lag: p,
            lags: self.lags,
        }
    }

    /// Multiplies by a scalar (non-polynomial) matrix on the right:
    /// lag slice `l` of the result is `A(l) * x`. The coefficient matrix
    /// of the product at each lag involves the same `x`, so this matches
    /// the stacked-model product exactly.
    pub fn mul_scalar_right(&self, x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} polynomial matrix by {}x{} scalar matrix",
                self.rows,
                self.cols,
                x.nrows(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar factor".into()));
        }
        let r = x.ncols();
        let mut out = vec![0.0; self.lags * self.rows * r];
        for l in 0..self.lags {
            let slice = self.lag_slice(l);
            let block = &mut out[l * self.rows * r..(l + 1) * self.rows * r];
            for i in 0..self.rows {
                for k in 0..self.cols {
                    let a = slice[i * self.cols + k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..r {
                        block[i * r + j] += a * x[(k, j)];
                    }
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: r,
            lags: self.lags,
            coeffs: out,
        })
    }

    /// Coefficient-wise sum. Shapes must match exactly.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coefficient-wise difference. Shapes must match exactly.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            lags: self.lags,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols || self.lags != other.lags {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}({} lags) vs {}x{}({} lags)",
                self.rows, self.cols, self.lags, other.rows, other.cols, other.lags
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            lags: self.lags,
            coeffs,
        })
    }

    /// Copies column `j` out as a `p x 1` polynomial matrix.
    pub fn column(&self, j: usize) -> Result<Self> {
        if j >= self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "column {} of a {}-column matrix",
                j, self.cols
            )));
        }
        self.columns(&[j])
    }

    /// Copies the listed columns, in the given order.
    pub fn columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::ShapeMismatch("empty column selection".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange(format!(
                "column {} of a {}-column matrix",
                bad, self.cols
            )));
        }
        let mut coeffs = Vec::with_capacity(self.lags * self.rows * indices.len());
        for l in 0..self.lags {
            for i in 0..self.rows {
                for &j in indices {
                    coeffs.push(self.get(l, i, j));
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: indices.len(),
            lags: self.lags,
            coeffs,
        })
    }

    /// Horizontal concatenation; all parts must share rows and lags.
    pub fn hconcat(parts: &[Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ShapeMismatch("hconcat of zero matrices".into()))?;
        let (rows, lags) = (first.rows, first.lags);
        if let Some(bad) = parts.iter().find(|m| m.rows != rows || m.lags != lags) {
            return Err(Error::ShapeMismatch(format!(
                "hconcat parts disagree: {}x?({}) vs {}x?({})",
                rows, lags, bad.rows, bad.lags
            )));
        }
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut coeffs = Vec::with_capacity(lags * rows * cols);
        for l in 0..lags {
            for i in 0..rows {
                for m in parts {
                    let slice = m.lag_slice(l);
                    coeffs.extend_from_slice(&slice[i * m.cols..(i + 1) * m.cols]);
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            lags,
            coeffs,
        })
    }

    /// Writes the matrix in the PLYM1 text format: a header line
    /// `PLYM1 <rows> <cols> <lags>`, then one block of `rows` lines per
    /// lag (values separated by single spaces), blocks separated by a
    /// blank line. Values are printed in the shortest form that parses
    /// back to the identical 64-bit float.
    pub fn write_plym<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "PLYM1 {} {} {}", self.rows, self.cols, self.lags)?;
        for l in 0..self.lags {
            if l > 0 {
                writeln!(w)?;
            }
            for i in 0..self.rows {
                let mut line = String::new();
                for j in 0..self.cols {
                    if j > 0 {
                        line.push(' ');
                    }
                    line.push_str(&format!("{:?}", self.get(l, i, j)));
                }
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    /// Parses the PLYM1 text format. Blank lines between value rows are
    /// treated as block separators and otherwise ignored.
    pub fn read_plym<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty PLYM1 input".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "PLYM1" {
            return Err(Error::Parse(format!("bad PLYM1 header: {header:?}")));
        }
        let parse_dim = |s: &str, name: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad {name} in PLYM1 header: {s:?}")))
        };
        let rows = parse_dim(fields[1], "rows")?;
        let cols = parse_dim(fields[2], "cols")?;
        let lags = parse_dim(fields[3], "lags")?;
        check_dims(rows, cols, lags)?;

        let mut coeffs = Vec::with_capacity(lags * rows * cols);
        let mut value_lines = 0usize;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0usize;
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad float {tok:?}")))?;
                coeffs.push(v);
                count += 1;
            }
            if count != cols {
                return Err(Error::Parse(format!(
                    "expected {cols} values per line, got {count}"
                )));
            }
            value_lines += 1;
        }
        if value_lines != lags * rows {
            return Err(Error::Parse(format!(
                "expected {} value lines, got {value_lines}",
                lags * rows
            )));
        }
        Self::from_coeffs(rows, cols, lags, coeffs)
    }

    /// Writes the matrix to a PLYM1 file.
    pub fn save_plym(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_plym(&mut f)?;
        Ok(())
    }

    /// Reads a matrix from a PLYM1 file.
    pub fn load_plym(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_plym(f)
    }
}

/// A polynomial matrix flattened to a conventional `(p*L) x q` matrix by
/// vertical concatenation of its lag slices.
#[derive(Clone, Debug, PartialEq)]
pub struct StackedMatrix {
    data: DMatrix<f64>,
    rows_per_lag: usize,
    lags: usize,
}

impl StackedMatrix {
    /// Wraps an existing stacked matrix. The row count must be an exact
    /// multiple of `rows_per_lag`.
    pub fn new(data: DMatrix<f64>, rows_per_lag: usize) -> Result<Self> {
        if rows_per_lag == 0 || !data.nrows().is_multiple_of(rows_per_lag) {
            return Err(Error::ShapeMismatch(format!(
                "{} stacked rows not divisible by {} rows per lag",
                data.nrows(),
                rows_per_lag
            )));
        }
        let lags = data.nrows() / rows_per_lag;
        Ok(Self {
            data,
            rows_per_lag,
            lags,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn rows_per_lag(&self) -> usize {
        self.rows_per_lag
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Inverts [`PolyMatrix::stack`] exactly: block `l` becomes lag slice `l`.
    pub fn unstack(&self) -> PolyMatrix {
        let p = self.rows_per_lag;
        PolyMatrix::from_fn(p, self.data.ncols(), self.lags, |l, i, j| {
            self.data[(l * p + i, j)]
        })
        .expect("stacked matrix entries are finite")
    }
}

fn check_dims(rows: usize, cols: usize, lags: usize) -> Result<()> {
    if rows == 0 || cols == 0 || lags == 0 {
        return Err(Error::ShapeMismatch(format!(
            "dimensions must be positive, got {rows}x{cols} with {lags} lags"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pm(rows: usize, cols: usize, lags: usize, coeffs: &[f64]) -> PolyMatrix {
        PolyMatrix::from_coeffs(rows, cols, lags, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn fnorm_three_four_five() {
        // 1x1, two lags, coefficients [3, 4]
        let m = pm(1, 1, 2, &[3.0, 4.0]);
        assert_eq!(m.fnorm(), 5.0);
    }

    #[test]
    fn fnorm_zero_matrix() {
        let m = PolyMatrix::zeros(3, 4, 5).unwrap();
        assert_eq!(m.fnorm(), 0.0);
    }

    #[test]
    fn fnorm_direct_sum_of_squares() {
        // 2x1, L=2: element (0,0)=[1,0], element (1,0)=[0,2]
        let m = PolyMatrix::from_fn(2, 1, 2, |l, i, _| match (l, i) {
            (0, 0) => 1.0,
            (1, 1) => 2.0,
            _ => 0.0,
        })
        .unwrap();
        assert_eq!(m.fnorm(), 5.0_f64.sqrt());
    }

    #[test]
    fn stack_single_element() {
        let m = pm(1, 1, 3, &[1.0, 2.0, 3.0]);
        let s = m.stack();
        assert_eq!(s.data().nrows(), 3);
        assert_eq!(s.data().ncols(), 1);
        assert_eq!(s.data()[(0, 0)], 1.0);
        assert_eq!(s.data()[(1, 0)], 2.0);
        assert_eq!(s.data()[(2, 0)], 3.0);
    }

    #[test]
    fn stack_single_lag_is_identity_layout() {
        let m = pm(2, 3, 1, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = m.stack();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(s.data()[(i, j)], m.get(0, i, j));
            }
        }
    }

    #[test]
    fn stack_blocks_match_lag_slices() {
        let m = PolyMatrix::from_fn(2, 2, 2, |l, i, j| (100 * l + 10 * i + j) as f64).unwrap();
        let s = m.stack();
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(s.data()[(l * 2 + i, j)], m.get(l, i, j));
                }
            }
        }
        assert_eq!(s.unstack(), m);
    }

    #[test]
    fn unstack_column_vector() {
        let data = DMatrix::from_column_slice(3, 1, &[5.0, 6.0, 7.0]);
        let s = StackedMatrix::new(data, 1).unwrap();
        let m = s.unstack();
        assert_eq!((m.rows(), m.cols(), m.lags()), (1, 1, 3));
        assert_eq!(m.element(0, 0), vec![5.0, 6.0, 7.0]);
    }

    #[test]
    fn unstack_rejects_indivisible_rows() {
        let data = DMatrix::zeros(7, 2);
        assert!(matches!(
            StackedMatrix::new(data, 2),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn mul_by_identity_and_zero() {
        let m = PolyMatrix::from_fn(2, 3, 2, |l, i, j| (l + i + j) as f64 + 0.5).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(m.mul_scalar_right(&id).unwrap(), m);
        let z = DMatrix::<f64>::zeros(3, 2);
        let out = m.mul_scalar_right(&z).unwrap();
        assert_eq!(out.fnorm(), 0.0);
        assert_eq!((out.rows(), out.cols(), out.lags()), (2, 2, 2));
    }

    #[test]
    fn mul_dimension_mismatch() {
        let m = PolyMatrix::zeros(2, 3, 1).unwrap();
        let x = DMatrix::<f64>::zeros(4, 2);
        assert!(matches!(
            m.mul_scalar_right(&x),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn sub_self_is_zero_and_sub_zero_is_identity() {
        let a = PolyMatrix::from_fn(2, 2, 3, |l, i, j| (l * 7 + i * 3 + j) as f64).unwrap();
        let z = PolyMatrix::zeros(2, 2, 3).unwrap();
        assert_eq!(a.sub(&a).unwrap().fnorm(), 0.0);
        assert_eq!(a.sub(&z).unwrap(), a);
    }

    #[test]
    fn column_of_single_column_matrix() {
        let m = pm(2, 1, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.column(0).unwrap(), m);
        assert!(matches!(m.column(1), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn column_stacks_consistently() {
        let m = PolyMatrix::from_fn(3, 4, 2, |l, i, j| (l * 100 + i * 10 + j) as f64).unwrap();
        let j = 2;
        let col = m.column(j).unwrap();
        let sc = col.stack();
        let sm = m.stack();
        for r in 0..sm.data().nrows() {
            assert_eq!(sc.data()[(r, 0)], sm.data()[(r, j)]);
        }
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(PolyMatrix::zeros(0, 1, 1).is_err());
        assert!(PolyMatrix::from_coeffs(1, 1, 1, vec![1.0, 2.0]).is_err());
        assert!(PolyMatrix::from_coeffs(1, 1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn plym_header_errors() {
        let r = std::io::Cursor::new("NOPE 1 1 1\n0\n");
        assert!(matches!(PolyMatrix::read_plym(r), Err(Error::Parse(_))));
        let r = std::io::Cursor::new("PLYM1 2 2 1\n1 2\n3\n");
        assert!(PolyMatrix::read_plym(r).is_err());
    }

    fn arb_polymat() -> impl Strategy<Value = PolyMatrix> {
        (1usize..5, 1usize..6, 1usize..5).prop_flat_map(|(p, q, l)| {
            proptest::collection::vec(-100.0f64..100.0, p * q * l)
                .prop_map(move |v| PolyMatrix::from_coeffs(p, q, l, v).unwrap())
        })
    }

    // Finite f64 of any magnitude, including subnormals and signed zero,
    // for the serialization round trip.
    fn arb_wild_finite() -> impl Strategy<Value = f64> {
        use proptest::num::f64::{NEGATIVE, NORMAL, POSITIVE, SUBNORMAL, ZERO};
        POSITIVE | NEGATIVE | NORMAL | SUBNORMAL | ZERO
    }

    proptest! {
        #[test]
        fn stack_unstack_round_trip(m in arb_polymat()) {
            let back = m.stack().unstack();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn fnorm_matches_stacked_frobenius(m in arb_polymat()) {
            let stacked_sq: f64 = m.stack().data().iter().map(|v| v * v).sum();
            let diff = (m.fnorm_sq() - stacked_sq).abs();
            prop_assert!(diff <= 1e-12 * stacked_sq.max(1.0));
        }

        #[test]
        fn fnorm_absolutely_homogeneous(m in arb_polymat(), c in -50.0f64..50.0) {
            let lhs = m.scale(c).fnorm();
            let rhs = c.abs() * m.fnorm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn fnorm_triangle_inequality(
            (a, b) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(p, q, l)| {
                let n = p * q * l;
                (
                    proptest::collection::vec(-10.0f64..10.0, n)
                        .prop_map(move |v| PolyMatrix::from_coeffs(p, q, l, v).unwrap()),
                    proptest::collection::vec(-10.0f64..10.0, n)
                        .prop_map(move |v| PolyMatrix::from_coeffs(p, q, l, v).unwrap()),
                )
            })
        ) {
            let lhs = a.add(&b).unwrap().fnorm();
            let rhs = a.fnorm() + b.fnorm();
            prop_assert!(lhs <= rhs + 1e-9);
        }

        #[test]
        fn stack_commutes_with_scalar_product(
            m in arb_polymat(),
            seed in proptest::num::u64::ANY,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = 1 + (seed % 4) as usize;
            let x = DMatrix::from_fn(m.cols(), r, |_, _| rng.random_range(-5.0..5.0));
            let via_poly = m.mul_scalar_right(&x).unwrap().stack();
            let via_stack = m.stack().data() * &x;
            let num = (via_poly.data() - &via_stack).norm();
            let den = via_stack.norm().max(1.0);
            prop_assert!(num <= 1e-12 * den);
        }

        #[test]
        fn plym_round_trip_bit_exact(
            (p, q, l) in (1usize..4, 1usize..4, 1usize..4),
            raw in proptest::collection::vec(proptest::num::f64::ANY, 64),
        ) {
            let mut vals = raw.into_iter().filter(|v| v.is_finite());
            let m = PolyMatrix::from_fn(p, q, l, |_, _, _| vals.next().unwrap_or(0.25)).unwrap();
            let mut buf = Vec::new();
            m.write_plym(&mut buf).unwrap();
            let back = PolyMatrix::read_plym(std::io::Cursor::new(buf)).unwrap();
            prop_assert!(m.coeffs().iter().zip(back.coeffs())
                .all(|(a, b)| a.to_bits() == b.to_bits()));
        }

        #[test]
        fn plym_value_round_trip(v in arb_wild_finite()) {
            let m = PolyMatrix::from_coeffs(1, 1, 1, vec![v]).unwrap();
            let mut buf = Vec::new();
            m.write_plym(&mut buf).unwrap();
            let back = PolyMatrix::read_plym(std::io::Cursor::new(buf)).unwrap();
            prop_assert_eq!(back.coeffs()[0].to_bits(), v.to_bits());
        }
    }
}
