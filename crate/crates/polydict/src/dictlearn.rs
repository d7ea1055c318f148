//! Dictionary learning loops.
//!
//! [`pmod_train`] alternates sparse coding with the polynomial
//! least-squares dictionary update: for a fixed coefficient matrix the
//! objective separates over lags and every lag shares the coefficients,
//! so the whole polynomial dictionary is refit in one solve. The
//! dictionary is initialized from the first `K` training columns.
//!
//! [`ksvd_stacked_train`] is the prior-method baseline: the training
//! matrix is stacked into a conventional matrix and standard K-SVD runs
//! on it (per-atom rank-1 updates of the restricted residual, unused
//! atoms replaced by the worst-represented column), with the result
//! unstacked into a polynomial dictionary.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lstsq;
use crate::polymat::{PolyMatrix, StackedMatrix};
use crate::sparsecode::{code_matrix, CodeConfig, Coder, SparseCodeMatrix};

/// Atom F-norms below this are treated as zero during normalization and
/// replacement.
const ZERO_NORM: f64 = 1e-14;

/// Hyperparameters for one training run.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    /// Dictionary size `K`. Must not exceed the training column count,
    /// since the dictionary is initialized from training columns.
    pub atom_count: usize,
    /// Number of alternating iterations. Must be at least 1.
    pub iterations: usize,
    /// Sparsity budget and stopping threshold for the coding stage.
    pub code_cfg: CodeConfig,
    /// Rescale every updated atom to unit F-norm. Coefficient rows are
    /// rescaled inversely, so the reconstruction is unchanged.
    pub normalize_atoms: bool,
    /// Coder used in the sparse-coding stage.
    pub coder: Coder,
    /// Recorded with the run. The training loops themselves are
    /// deterministic; the seed exists so a config fully identifies a run.
    pub seed: u64,
}

impl TrainConfig {
    /// Config with the conventional normalization default for the given
    /// coder: POMP's distance selection is scale-sensitive, so it pairs
    /// with unit-norm atoms; stacked OMP does not need them.
    pub fn new(atom_count: usize, iterations: usize, code_cfg: CodeConfig, coder: Coder) -> Self {
        Self {
            atom_count,
            iterations,
            code_cfg,
            normalize_atoms: matches!(coder, Coder::Pomp),
            coder,
            seed: 0,
        }
    }

    fn validate(&self, training_cols: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.atom_count == 0 {
            return Err(Error::InvalidConfig("atom_count must be at least 1".into()));
        }
        if self.atom_count > training_cols {
            return Err(Error::InvalidConfig(format!(
                "atom_count {} exceeds training column count {}",
                self.atom_count, training_cols
            )));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Relative squared F-norm training reconstruction error after the
    /// dictionary update, using the codes from this iteration.
    pub error: f64,
    /// The dictionary update hit the ridge fallback.
    pub rank_deficient: bool,
    /// Atoms left untouched by normalization (PMOD) or replaced because
    /// they received no support (K-SVD).
    pub zero_norm_atoms: usize,
    /// Wall time of the iteration.
    pub millis: f64,
}

/// Training trace: one entry per iteration.
#[derive(Clone, Debug, Default)]
pub struct TrainTrace {
    entries: Vec<TraceEntry>,
}

impl TrainTrace {
    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.entries.last().map(|e| e.error)
    }

    /// CSV with one row per iteration.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iteration,error,rank_deficient,zero_norm_atoms,millis")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{:?},{},{},{:.3}",
                e.iteration, e.error, e.rank_deficient, e.zero_norm_atoms, e.millis
            )?;
        }
        Ok(())
    }
}

/// A learned dictionary with its final codes and the training trace.
#[derive(Clone, Debug)]
pub struct TrainResult {
    pub dictionary: PolyMatrix,
    pub codes: SparseCodeMatrix,
    pub trace: TrainTrace,
}

fn training_error(y: &PolyMatrix, dict: &PolyMatrix, x: &DMatrix<f64>) -> Result<f64> {
    let recon = dict.mul_scalar_right(x)?;
    Ok(y.sub(&recon)?.fnorm_sq() / y.fnorm_sq())
}

/// Polynomial MOD.
///
/// Starts from the first `K` training columns, then alternates sparse
/// coding of all columns with the polynomial least-squares dictionary
/// update. Solver rank-deficiency (e.g. atoms that received no support)
/// is reported through the trace, never as an abort.
pub fn pmod_train(y: &PolyMatrix, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate(y.cols())?;
    cfg.code_cfg.validate_against(cfg.atom_count)?;
    let init: Vec<usize> = (0..cfg.atom_count).collect();
    let mut dict = y.columns(&init)?;
    let mut trace = TrainTrace::default();
    let mut codes: Option<SparseCodeMatrix> = None;

    for iteration in 1..=cfg.iterations {
        let t0 = Instant::now();
        let mut coded = code_matrix(y, &dict, &cfg.code_cfg, cfg.coder)?;
        let update = lstsq::solve_right(y, coded.data())?;
        dict = update.solution;

        let mut zero_norm_atoms = 0;
        if cfg.normalize_atoms {
            let (d, x, zeros) = normalize_with_compensation(&dict, coded.data())?;
            dict = d;
            coded = SparseCodeMatrix::from_parts(x, coded.supports().to_vec());
            zero_norm_atoms = zeros;
        }

        let error = training_error(y, &dict, coded.data())?;
        trace.entries.push(TraceEntry {
            iteration,
            error,
            rank_deficient: update.rank_deficient,
            zero_norm_atoms,
            millis: t0.elapsed().as_secs_f64() * 1e3,
        });
        codes = Some(coded);
    }

    Ok(TrainResult {
        dictionary: dict,
        codes: codes.expect("at least one iteration"),
        trace,
    })
}

/// Rescales every atom to unit F-norm and the matching coefficient row by
/// the original norm, leaving the product unchanged. Returns the number
/// of zero-norm atoms left untouched.
fn normalize_with_compensation(
    dict: &PolyMatrix,
    x: &DMatrix<f64>,
) -> Result<(PolyMatrix, DMatrix<f64>, usize)> {
    let k = dict.cols();
    let mut inv_norms = vec![1.0; k];
    let mut zero_count = 0;
    let mut x_out = x.clone();
    for a in 0..k {
        let norm = dict.column(a)?.fnorm();
        if norm < ZERO_NORM {
            zero_count += 1;
            continue;
        }
        inv_norms[a] = 1.0 / norm;
        for j in 0..x.ncols() {
            x_out[(a, j)] *= norm;
        }
    }
    let d_out = PolyMatrix::from_fn(dict.rows(), k, dict.lags(), |l, i, a| {
        dict.get(l, i, a) * inv_norms[a]
    })?;
    Ok((d_out, x_out, zero_count))
}

/// Stacked K-SVD baseline.
///
/// Initial atoms are the first `K` stacked training columns rescaled to
/// unit norm (K-SVD keeps atoms unit-norm throughout, so
/// `normalize_atoms` is implied here). Each iteration codes all columns,
/// then sweeps the atoms: the restricted residual of each supported atom
/// is replaced by its best rank-1 approximation, and unsupported atoms
/// are replaced by the currently worst-represented training column.
pub fn ksvd_stacked_train(y: &PolyMatrix, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate(y.cols())?;
    cfg.code_cfg.validate_against(cfg.atom_count)?;
    let sy = y.stack().into_data();
    let n_rows = sy.nrows();
    let n_cols = sy.ncols();
    let k = cfg.atom_count;

    let mut sd = DMatrix::zeros(n_rows, k);
    for a in 0..k {
        let col = sy.column(a);
        let norm = col.norm();
        let scale = if norm < ZERO_NORM { 1.0 } else { 1.0 / norm };
        sd.set_column(a, &(col * scale));
    }

    let sy_fnorm_sq: f64 = sy.iter().map(|v| v * v).sum();
    let mut trace = TrainTrace::default();
    let mut supports = Vec::new();
    let mut x = DMatrix::zeros(k, n_cols);

    for iteration in 1..=cfg.iterations {
        let t0 = Instant::now();
        let dict_poly = StackedMatrix::new(sd.clone(), y.rows())?.unstack();
        let coded = code_matrix(y, &dict_poly, &cfg.code_cfg, cfg.coder)?;
        x = coded.data().clone();
        supports = coded.supports().to_vec();

        let mut replaced = 0;
        for a in 0..k {
            let omega: Vec<usize> = (0..n_cols).filter(|&j| x[(a, j)] != 0.0).collect();
            if omega.is_empty() {
                replace_dead_atom(&sy, &mut sd, &x, a);
                replaced += 1;
                continue;
            }
            // Restricted residual with atom a's contribution added back.
            let mut e = sy.select_columns(&omega) - &sd * x.select_columns(&omega);
            let d_a = sd.column(a).clone_owned();
            let x_row = nalgebra::RowDVector::from_fn(omega.len(), |_, c| x[(a, omega[c])]);
            e += &d_a * &x_row;

            if let Some((u, sigma, v)) = dominant_pair(&e) {
                sd.set_column(a, &u);
                for (c, &j) in omega.iter().enumerate() {
                    x[(a, j)] = sigma * v[c];
                }
            } else {
                // Restricted residual is numerically zero: the atom
                // contributes nothing, so zero its codes.
                for &j in &omega {
                    x[(a, j)] = 0.0;
                }
            }
        }

        let resid = &sy - &sd * &x;
        let error = resid.iter().map(|v| v * v).sum::<f64>() / sy_fnorm_sq;
        trace.entries.push(TraceEntry {
            iteration,
            error,
            rank_deficient: false,
            zero_norm_atoms: replaced,
            millis: t0.elapsed().as_secs_f64() * 1e3,
        });
    }

    let dictionary = StackedMatrix::new(sd, y.rows())?.unstack();
    Ok(TrainResult {
        dictionary,
        codes: SparseCodeMatrix::from_parts(x, supports),
        trace,
    })
}

fn replace_dead_atom(sy: &DMatrix<f64>, sd: &mut DMatrix<f64>, x: &DMatrix<f64>, atom: usize) {
    let resid = sy - sd as &DMatrix<f64> * x;
    let mut worst = 0;
    let mut worst_norm = -1.0;
    for j in 0..sy.ncols() {
        let n = resid.column(j).norm();
        if n > worst_norm {
            worst_norm = n;
            worst = j;
        }
    }
    let col = sy.column(worst);
    let norm = col.norm();
    if norm >= ZERO_NORM {
        sd.set_column(atom, &(col / norm));
    }
}

/// Dominant singular triple of `e` via a symmetric eigendecomposition of
/// the smaller Gram matrix. The returned left vector is unit-norm with a
/// deterministic sign (largest-magnitude entry positive). Returns `None`
/// when `e` is numerically zero.
fn dominant_pair(e: &DMatrix<f64>) -> Option<(DVector<f64>, f64, DVector<f64>)> {
    let (m, n) = e.shape();
    let (mut u, sigma, mut v);
    if n <= m {
        let gram = e.transpose() * e;
        let eig = gram.symmetric_eigen();
        let (idx, lambda) = argmax(&eig.eigenvalues)?;
        sigma = lambda.max(0.0).sqrt();
        if sigma < ZERO_NORM {
            return None;
        }
        v = eig.eigenvectors.column(idx).clone_owned();
        u = e * &v / sigma;
    } else {
        let gram = e * e.transpose();
        let eig = gram.symmetric_eigen();
        let (idx, lambda) = argmax(&eig.eigenvalues)?;
        sigma = lambda.max(0.0).sqrt();
        if sigma < ZERO_NORM {
            return None;
        }
        u = eig.eigenvectors.column(idx).clone_owned();
        v = e.transpose() * &u / sigma;
    }
    // The eigenvector has unit norm up to roundoff; pin it exactly so the
    // dictionary stays unit-norm over many iterations.
    let un = u.norm();
    if un < ZERO_NORM {
        return None;
    }
    u /= un;
    let flat = u.iter().cloned().enumerate();
    let (peak, _) = flat
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty vector");
    if u[peak] < 0.0 {
        u = -u;
        v = -v;
    }
    Some((u, sigma, v))
}

fn argmax(values: &DVector<f64>) -> Option<(usize, f64)> {
    let mut best = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, bv)) if v > bv => best = Some((i, v)),
            _ => {}
        }
    }
    best
}

impl CodeConfig {
    fn validate_against(&self, atom_count: usize) -> Result<()> {
        if self.k_max > atom_count {
            return Err(Error::InvalidConfig(format!(
                "sparsity {} exceeds atom count {}",
                self.k_max, atom_count
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_polymat(rng: &mut ChaCha8Rng, p: usize, q: usize, l: usize) -> PolyMatrix {
        PolyMatrix::from_fn(p, q, l, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn rejects_zero_iterations() {
        let y = PolyMatrix::zeros(2, 4, 2).unwrap();
        let mut cfg = TrainConfig::new(2, 1, CodeConfig::new(1, 0.0), Coder::OmpStacked);
        cfg.iterations = 0;
        assert!(matches!(
            ksvd_stacked_train(&y, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(pmod_train(&y, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn rejects_more_atoms_than_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let y = random_polymat(&mut rng, 2, 3, 2);
        let cfg = TrainConfig::new(4, 1, CodeConfig::new(1, 0.0), Coder::OmpStacked);
        assert!(matches!(pmod_train(&y, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn normalize_default_follows_coder() {
        let a = TrainConfig::new(4, 1, CodeConfig::new(1, 0.0), Coder::OmpStacked);
        assert!(!a.normalize_atoms);
        let b = TrainConfig::new(4, 1, CodeConfig::new(1, 0.0), Coder::Pomp);
        assert!(b.normalize_atoms);
    }

    #[test]
    fn pmod_interpolating_instance_stays_exact() {
        // N = K with independent stacked columns: coding against the
        // initialization selects each column's own atom exactly, so both
        // the coding error and the post-update error are zero and the
        // update is the identity on the dictionary.
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let y = random_polymat(&mut rng, 4, 6, 2);
        let cfg = TrainConfig::new(6, 1, CodeConfig::new(6, 1e-6), Coder::OmpStacked);
        let out = pmod_train(&y, &cfg).unwrap();
        assert!(out.trace.entries()[0].error <= 1e-20);
        let drift = out.dictionary.sub(&y).unwrap().fnorm();
        assert!(drift <= 1e-10 * y.fnorm(), "drift = {drift}");
        // Codes form the identity.
        for j in 0..6 {
            assert_eq!(out.codes.supports()[j].indices(), &[j]);
            assert!((out.codes.data()[(j, j)] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn pmod_update_strictly_improves_undercomplete_coding() {
        // N > K with a sparsity budget too small for exact coding: the
        // first update must strictly reduce the training error relative
        // to coding against the raw initialization.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let y = random_polymat(&mut rng, 4, 12, 2);
        let code_cfg = CodeConfig::new(2, 0.0);
        let cfg = TrainConfig::new(6, 1, code_cfg, Coder::OmpStacked);

        let init: Vec<usize> = (0..6).collect();
        let d0 = y.columns(&init).unwrap();
        let codes0 = code_matrix(&y, &d0, &code_cfg, Coder::OmpStacked).unwrap();
        let before = training_error(&y, &d0, codes0.data()).unwrap();

        let out = pmod_train(&y, &cfg).unwrap();
        let after = out.trace.entries()[0].error;
        assert!(before > 1e-6, "instance must not be exactly codable");
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn pmod_fixed_point_on_repeated_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let atoms = random_polymat(&mut rng, 3, 4, 2);
        let idx: Vec<usize> = (0..12).map(|j| j % 4).collect();
        let y = atoms.columns(&idx).unwrap();
        let cfg = TrainConfig::new(4, 2, CodeConfig::new(1, 1e-12), Coder::OmpStacked);
        let out = pmod_train(&y, &cfg).unwrap();
        for e in out.trace.entries() {
            assert!(
                e.error <= 1e-10,
                "iteration {} error {}",
                e.iteration,
                e.error
            );
        }
    }

    #[test]
    fn pmod_matches_per_lag_mod_reference() {
        // Re-run the loop manually; at each iteration check the production
        // update against an independent per-lag normal-equations solve.
        let mut rng = ChaCha8Rng::seed_from_u64(440);
        let (p, n, lags, k, kmax, iters) = (4, 40, 3, 8, 2, 10);
        let y = random_polymat(&mut rng, p, n, lags);
        let code_cfg = CodeConfig::new(kmax, CodeConfig::DEFAULT_EPSILON);
        let init: Vec<usize> = (0..k).collect();
        let mut dict = y.columns(&init).unwrap();

        for _ in 0..iters {
            let codes = code_matrix(&y, &dict, &code_cfg, Coder::OmpStacked).unwrap();
            let x = codes.data();
            let update = lstsq::solve_right(&y, x).unwrap();

            // Independent route, mirroring the ridge policy on the flag.
            let mut gram = vec![vec![0.0; k]; k];
            for a in 0..k {
                for b in 0..k {
                    gram[a][b] = (0..n).map(|s| x[(a, s)] * x[(b, s)]).sum();
                }
            }
            if update.rank_deficient {
                let trace: f64 = (0..k).map(|a| gram[a][a]).sum();
                let lambda = 1e-10 * trace / k as f64;
                for (a, row) in gram.iter_mut().enumerate() {
                    row[a] += lambda;
                }
            }
            for l in 0..lags {
                for i in 0..p {
                    let rhs: Vec<f64> = (0..k)
                        .map(|a| (0..n).map(|s| x[(a, s)] * y.get(l, i, s)).sum())
                        .collect();
                    let d_ref = crate::testutil::gauss_solve(&gram, &rhs);
                    for (a, &expected) in d_ref.iter().enumerate() {
                        let got = update.solution.get(l, i, a);
                        assert!(
                            (got - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                            "lag {l} row {i} atom {a}: {got} vs {expected}"
                        );
                    }
                }
            }
            dict = update.solution;
        }

        // The manual loop above is exactly pmod_train with
        // normalize_atoms = false; final dictionaries must agree.
        let mut cfg = TrainConfig::new(k, iters, code_cfg, Coder::OmpStacked);
        cfg.normalize_atoms = false;
        let out = pmod_train(&y, &cfg).unwrap();
        assert_eq!(out.dictionary, dict);
    }

    #[test]
    fn pmod_update_never_worsens_objective_for_fixed_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let y = random_polymat(&mut rng, 3, 10, 2);
            let init: Vec<usize> = (0..4).collect();
            let dict = y.columns(&init).unwrap();
            let cfg = CodeConfig::new(2, 0.0);
            let codes = code_matrix(&y, &dict, &cfg, Coder::OmpStacked).unwrap();
            let before = training_error(&y, &dict, codes.data()).unwrap();
            let update = lstsq::solve_right(&y, codes.data()).unwrap();
            let after = training_error(&y, &update.solution, codes.data()).unwrap();
            assert!(after <= before + 1e-12, "{after} > {before}");
        }
    }

    #[test]
    fn pmod_normalization_unit_atoms_and_unchanged_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let y = random_polymat(&mut rng, 3, 12, 2);
        let mut cfg = TrainConfig::new(5, 3, CodeConfig::new(2, 0.0), Coder::OmpStacked);
        cfg.normalize_atoms = true;
        let out = pmod_train(&y, &cfg).unwrap();
        for a in 0..5 {
            let norm = out.dictionary.column(a).unwrap().fnorm();
            assert!((norm - 1.0).abs() <= 1e-12, "atom {a} norm {norm}");
        }

        let mut plain = cfg.clone();
        plain.normalize_atoms = false;
        let base = pmod_train(&y, &plain).unwrap();
        let recon_norm = out.dictionary.mul_scalar_right(out.codes.data()).unwrap();
        let recon_plain = base.dictionary.mul_scalar_right(base.codes.data()).unwrap();
        let rel = recon_norm.sub(&recon_plain).unwrap().fnorm() / recon_plain.fnorm();
        assert!(rel <= 1e-10, "rel = {rel}");
    }

    #[test]
    fn pmod_stacked_equivalence_of_update() {
        // The update computed on polynomial quantities equals the MOD
        // update computed entirely in stacked space.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let y = random_polymat(&mut rng, 3, 9, 2);
        let x = DMatrix::from_fn(4, 9, |_, _| rng.random_range(-1.0..1.0));
        let update = lstsq::solve_right(&y, &x).unwrap();
        let sd = update.solution.stack();

        let sy = y.stack().into_data();
        let design = x.transpose();
        for r in 0..sy.nrows() {
            let rhs = DVector::from_fn(9, |s, _| sy[(r, s)]);
            let row = lstsq::solve_stacked(&rhs, &design).unwrap();
            for a in 0..4 {
                let got = sd.data()[(r, a)];
                assert!((got - row.solution[a]).abs() <= 1e-10 * row.solution[a].abs().max(1.0));
            }
        }
    }

    #[test]
    fn pmod_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let y = random_polymat(&mut rng, 3, 10, 2);
        let cfg = TrainConfig::new(4, 3, CodeConfig::new(2, 1e-9), Coder::OmpStacked);
        let a = pmod_train(&y, &cfg).unwrap();
        let b = pmod_train(&y, &cfg).unwrap();
        assert_eq!(a.dictionary, b.dictionary);
        assert_eq!(a.codes.data(), b.codes.data());
    }

    #[test]
    fn ksvd_exact_orthonormal_instance_converges() {
        // Training data = K orthonormal stacked atoms with 1-sparse codes.
        let k = 4;
        let (p, lags) = (2, 2); // stacked dim 4
        let mut sd0 = DMatrix::zeros(p * lags, k);
        for a in 0..k {
            sd0[(a, a)] = 1.0;
        }
        let mut cols = Vec::new();
        let gains = [1.0, -2.0, 0.5, 3.0, 1.5, -1.0, 2.5, 0.75];
        for (j, &g) in gains.iter().enumerate() {
            let atom = j % k;
            let col = DMatrix::from_fn(p * lags, 1, |r, _| sd0[(r, atom)] * g);
            cols.push(StackedMatrix::new(col, p).unwrap().unstack());
        }
        let y = PolyMatrix::hconcat(&cols).unwrap();
        let cfg = TrainConfig::new(k, 2, CodeConfig::new(1, 1e-18), Coder::OmpStacked);
        let out = ksvd_stacked_train(&y, &cfg).unwrap();
        let final_err = out.trace.final_error().unwrap();
        assert!(final_err <= 1e-8, "final error {final_err}");
    }

    #[test]
    fn ksvd_single_atom_matches_power_iteration() {
        // With one atom the update is the dominant left singular vector
        // of the stacked data. Independent oracle: power iteration.
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let (p, lags, n) = (3, 4, 20);
        let dim = p * lags;
        // Strong rank-1 component plus small noise for a clear gap.
        let u0 = DVector::from_fn(dim, |i, _| ((i + 1) as f64 * 0.37).sin());
        let w = DVector::from_fn(n, |j, _| 1.0 + 0.1 * (j as f64 * 0.53).cos());
        let mut sy = &u0 * w.transpose();
        for v in sy.iter_mut() {
            *v += 0.05 * rng.random_range(-1.0..1.0);
        }
        let y = StackedMatrix::new(sy.clone(), p).unwrap().unstack();

        let cfg = TrainConfig::new(1, 3, CodeConfig::new(1, 1e-18), Coder::OmpStacked);
        let out = ksvd_stacked_train(&y, &cfg).unwrap();
        let atom = DVector::from_column_slice(out.dictionary.stack().data().as_slice());

        let mut u = DVector::from_element(dim, 1.0);
        let gram = &sy * sy.transpose();
        for _ in 0..500 {
            u = &gram * &u;
            u /= u.norm();
        }
        let align = atom.dot(&u).abs();
        assert!((align - 1.0).abs() <= 1e-6, "alignment {align}");
        assert!((atom.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ksvd_replaces_dead_atoms() {
        // Force a dead atom: k_max = 1 with two dominant directions means
        // some atom may go unused; craft data where atom 2 never wins.
        let (p, lags) = (2, 2);
        let dim = p * lags;
        let mut sy = DMatrix::zeros(dim, 6);
        for j in 0..6 {
            sy[(j % 2, j)] = 1.0 + j as f64 * 0.1;
        }
        let y = StackedMatrix::new(sy, p).unwrap().unstack();
        let cfg = TrainConfig::new(3, 2, CodeConfig::new(1, 1e-18), Coder::OmpStacked);
        let out = ksvd_stacked_train(&y, &cfg).unwrap();
        // Atoms stay unit norm even through replacement.
        for a in 0..3 {
            let norm = out.dictionary.column(a).unwrap().fnorm();
            assert!((norm - 1.0).abs() <= 1e-9, "atom {a} norm {norm}");
        }
        let replaced: usize = out.trace.entries().iter().map(|e| e.zero_norm_atoms).sum();
        assert!(replaced > 0, "expected at least one replacement");
    }

    #[test]
    fn trace_csv_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let y = random_polymat(&mut rng, 2, 6, 2);
        let cfg = TrainConfig::new(3, 2, CodeConfig::new(1, 0.0), Coder::OmpStacked);
        let out = pmod_train(&y, &cfg).unwrap();
        assert_eq!(out.trace.len(), 2);
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,error,rank_deficient"));
        assert_eq!(text.lines().count(), 3);
    }
}
