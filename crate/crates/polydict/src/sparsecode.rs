//! Greedy sparse coding over a polynomial dictionary.
//!
//! Two coders share one interface. [`omp_stacked`] is classic orthogonal
//! matching pursuit run on the stacked forms of the signal and the
//! dictionary: atoms are ranked by absolute inner product with the
//! residual (unit-normalized for the ranking only). [`pomp`] works on the
//! polynomial quantities directly and ranks atoms by the squared F-norm
//! distance to the polynomial residual. That distance is used exactly as
//! written, without normalization, so POMP selection is sensitive to atom
//! scale; training with normalized atoms is the usual pairing.
//!
//! Both refit coefficients over the current support with a full
//! least-squares solve each iteration and stop once the squared residual
//! norm drops to `epsilon` or the sparsity budget is exhausted.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lstsq;
use crate::polymat::PolyMatrix;

/// Stacked atom norms below this are rejected: greedy selection against a
/// zero atom is undefined.
const ZERO_ATOM_NORM: f64 = 1e-14;

/// Which greedy coder to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coder {
    /// Classic OMP on the stacked model.
    OmpStacked,
    /// Polynomial OMP with F-norm-distance selection.
    Pomp,
}

impl Coder {
    pub fn name(&self) -> &'static str {
        match self {
            Coder::OmpStacked => "omp",
            Coder::Pomp => "pomp",
        }
    }
}

impl std::str::FromStr for Coder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omp" | "omp_stacked" => Ok(Coder::OmpStacked),
            "pomp" => Ok(Coder::Pomp),
            other => Err(Error::Parse(format!("unknown coder {other:?}"))),
        }
    }
}

/// Sparsity budget and residual stopping threshold.
///
/// `epsilon` is compared against the *squared* residual F-norm, matching
/// the stopping rule of the greedy iteration.
#[derive(Clone, Copy, Debug)]
pub struct CodeConfig {
    pub k_max: usize,
    pub epsilon: f64,
}

impl CodeConfig {
    /// Conventional stopping threshold.
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn new(k_max: usize, epsilon: f64) -> Self {
        Self { k_max, epsilon }
    }

    fn validate(&self, atom_count: usize) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidConfig("k_max must be at least 1".into()));
        }
        if self.k_max > atom_count {
            return Err(Error::InvalidConfig(format!(
                "k_max {} exceeds dictionary atom count {}",
                self.k_max, atom_count
            )));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Atom indices in selection order; no duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.contains(&k)
    }

    fn push(&mut self, k: usize) {
        debug_assert!(!self.contains(k));
        self.indices.push(k);
    }
}

/// One coded column: a dense length-`K` coefficient vector with nonzeros
/// only on the support, plus the residual F-norm after each iteration
/// (entry 0 is the initial residual, the signal itself).
#[derive(Clone, Debug)]
pub struct SparseCode {
    pub coeffs: DVector<f64>,
    pub support: SupportSet,
    pub residual_norms: Vec<f64>,
}

/// Column-wise sparse codes for a multi-column signal matrix.
#[derive(Clone, Debug)]
pub struct SparseCodeMatrix {
    data: DMatrix<f64>,
    supports: Vec<SupportSet>,
}

impl SparseCodeMatrix {
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn supports(&self) -> &[SupportSet] {
        &self.supports
    }

    pub fn atom_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn signal_count(&self) -> usize {
        self.data.ncols()
    }

    pub(crate) fn from_parts(data: DMatrix<f64>, supports: Vec<SupportSet>) -> Self {
        Self { data, supports }
    }

    /// Writes the codes as CSV triplets `column,atom,coefficient`, one row
    /// per support entry in selection order.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "column,atom,coefficient")?;
        for (j, support) in self.supports.iter().enumerate() {
            for &k in support.indices() {
                writeln!(w, "{},{},{:?}", j, k, self.data[(k, j)])?;
            }
        }
        Ok(())
    }
}

fn check_coder_inputs(y: &PolyMatrix, dict: &PolyMatrix) -> Result<()> {
    if y.cols() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "coder expects a single-column signal, got {} columns",
            y.cols()
        )));
    }
    if y.rows() != dict.rows() || y.lags() != dict.lags() {
        return Err(Error::ShapeMismatch(format!(
            "signal {}x1({} lags) incompatible with dictionary {}x{}({} lags)",
            y.rows(),
            y.lags(),
            dict.rows(),
            dict.cols(),
            dict.lags()
        )));
    }
    Ok(())
}

/// Dictionary stacked once, with validated atom norms, shared across
/// column codings.
struct PreparedDict {
    sd: DMatrix<f64>,
    norms: Vec<f64>,
}

impl PreparedDict {
    fn new(dict: &PolyMatrix) -> Result<Self> {
        let sd = dict.stack().into_data();
        let mut norms = Vec::with_capacity(sd.ncols());
        for (k, col) in sd.column_iter().enumerate() {
            let n = col.norm();
            if n < ZERO_ATOM_NORM {
                return Err(Error::ZeroAtom(k));
            }
            norms.push(n);
        }
        Ok(Self { sd, norms })
    }
}

fn scatter(atom_count: usize, support: &SupportSet, xs: &DVector<f64>) -> DVector<f64> {
    let mut coeffs = DVector::zeros(atom_count);
    for (i, &k) in support.indices().iter().enumerate() {
        coeffs[k] = xs[i];
    }
    coeffs
}

fn omp_core(sy: DVector<f64>, pd: &PreparedDict, cfg: &CodeConfig) -> Result<SparseCode> {
    let atom_count = pd.sd.ncols();
    let mut residual = sy.clone();
    let mut support = SupportSet::default();
    let mut xs = DVector::zeros(0);
    let mut residual_norms = vec![residual.norm()];

    while support.len() < cfg.k_max && residual.norm_squared() > cfg.epsilon {
        let mut best = usize::MAX;
        let mut best_corr = 0.0;
        for k in 0..atom_count {
            if support.contains(k) {
                continue;
            }
            let corr = (pd.sd.column(k).dot(&residual) / pd.norms[k]).abs();
            if corr > best_corr {
                best_corr = corr;
                best = k;
            }
        }
        if best == usize::MAX || best_corr == 0.0 {
            break; // residual orthogonal to every remaining atom
        }
        support.push(best);
        let sub = pd.sd.select_columns(support.indices());
        xs = lstsq::solve_stacked(&sy, &sub)?.solution;
        residual = &sy - &sub * &xs;
        residual_norms.push(residual.norm());
    }

    Ok(SparseCode {
        coeffs: scatter(atom_count, &support, &xs),
        support,
        residual_norms,
    })
}

fn pomp_core(sy: DVector<f64>, pd: &PreparedDict, cfg: &CodeConfig) -> Result<SparseCode> {
    let atom_count = pd.sd.ncols();
    let dim = sy.len();
    let mut residual = sy.clone();
    let mut support = SupportSet::default();
    let mut xs = DVector::zeros(0);
    let mut residual_norms = vec![residual.norm()];

    for _ in 0..cfg.k_max {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for k in 0..atom_count {
            let mut dist = 0.0;
            for r in 0..dim {
                let d = pd.sd[(r, k)] - residual[r];
                dist += d * d;
            }
            if dist < best_dist {
                best_dist = dist;
                best = k;
            }
        }
        if support.contains(best) {
            break;
        }
        support.push(best);
        let sub = pd.sd.select_columns(support.indices());
        xs = lstsq::solve_stacked(&sy, &sub)?.solution;
        residual = &sy - &sub * &xs;
        residual_norms.push(residual.norm());
        if residual.norm_squared() <= cfg.epsilon {
            break;
        }
    }

    Ok(SparseCode {
        coeffs: scatter(atom_count, &support, &xs),
        support,
        residual_norms,
    })
}

/// Classic OMP against the stacked dictionary.
///
/// Selection normalizes atoms inside the inner product only; the refit
/// uses raw atoms. Ties resolve to the lowest atom index. An all-zero (or
/// already-represented) signal stops before selecting anything.
pub fn omp_stacked(y: &PolyMatrix, dict: &PolyMatrix, cfg: &CodeConfig) -> Result<SparseCode> {
    check_coder_inputs(y, dict)?;
    cfg.validate(dict.cols())?;
    let pd = PreparedDict::new(dict)?;
    let sy = DVector::from_column_slice(y.stack().data().as_slice());
    omp_core(sy, &pd, cfg)
}

/// Polynomial OMP.
///
/// Each iteration picks the atom with the smallest squared F-norm
/// distance to the polynomial residual, over all atoms; if the argmin is
/// an atom already in the support no progress is possible (the refit
/// already minimized over that support) and coding terminates. The
/// coefficient refit and residual update match the stacked least-squares
/// solve, since the linear combination must hold at every lag.
pub fn pomp(y: &PolyMatrix, dict: &PolyMatrix, cfg: &CodeConfig) -> Result<SparseCode> {
    check_coder_inputs(y, dict)?;
    cfg.validate(dict.cols())?;
    let pd = PreparedDict::new(dict)?;
    let sy = DVector::from_column_slice(y.stack().data().as_slice());
    pomp_core(sy, &pd, cfg)
}

/// Runs one coder over a single-column signal.
pub fn code_column(
    y: &PolyMatrix,
    dict: &PolyMatrix,
    cfg: &CodeConfig,
    coder: Coder,
) -> Result<SparseCode> {
    match coder {
        Coder::OmpStacked => omp_stacked(y, dict, cfg),
        Coder::Pomp => pomp(y, dict, cfg),
    }
}

/// Codes every column of `y` independently. The dictionary is stacked
/// once and shared; columns are processed in parallel, each landing in
/// its own output column, so the result is identical to sequential
/// execution. Errors carry the column index.
pub fn code_matrix(
    y: &PolyMatrix,
    dict: &PolyMatrix,
    cfg: &CodeConfig,
    coder: Coder,
) -> Result<SparseCodeMatrix> {
    if y.rows() != dict.rows() || y.lags() != dict.lags() {
        return Err(Error::ShapeMismatch(format!(
            "signals {}x{}({} lags) incompatible with dictionary {}x{}({} lags)",
            y.rows(),
            y.cols(),
            y.lags(),
            dict.rows(),
            dict.cols(),
            dict.lags()
        )));
    }
    cfg.validate(dict.cols())?;
    let pd = PreparedDict::new(dict)?;
    let sy_all = y.stack().into_data();
    let columns: Vec<SparseCode> = (0..y.cols())
        .into_par_iter()
        .map(|j| {
            let sy = DVector::from_column_slice(sy_all.column(j).as_slice());
            let run = match coder {
                Coder::OmpStacked => omp_core(sy, &pd, cfg),
                Coder::Pomp => pomp_core(sy, &pd, cfg),
            };
            run.map_err(|e| e.at_column(j))
        })
        .collect::<Result<_>>()?;

    let k = dict.cols();
    let mut data = DMatrix::zeros(k, y.cols());
    let mut supports = Vec::with_capacity(y.cols());
    for (j, code) in columns.into_iter().enumerate() {
        data.set_column(j, &code.coeffs);
        supports.push(code.support);
    }
    Ok(SparseCodeMatrix::from_parts(data, supports))
}
