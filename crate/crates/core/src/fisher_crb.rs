//! Fisher information matrices and Cramér-Rao bounds for mixed
//! high-precision / one-bit acquisition.
//!
//! Parameter vector layout, fixed crate-wide: `[theta (K), Re vec(S) (KN),
//! Im vec(S) (KN)]` with `vec(S)` column-major over snapshots. Observation
//! vectorization is snapshot-major (`index = t*M + i`), matching column-major
//! vectorization of M x N snapshot matrices; the same ordering threads
//! through thresholds, masks, and the one-bit weight vector.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::array_model::{
    check_angles, steering_derivative_matrix, steering_matrix, ArrayConfig, SourceScene,
};
use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::scalar::{from_f64, from_usize, Scalar};
use crate::special;

/// Condition-number cap above which a Fisher matrix is reported as
/// unidentifiable rather than silently inverted.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Entry budget for materializing the parameter-derivative matrix
/// (`MN * (K + 2KN)` complex entries).
pub const DEFAULT_DIMENSION_BUDGET: usize = 1 << 23;

/// Which formula produced a Fisher or bound matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbFormula {
    /// Arbitrary known threshold, one-bit weights from the B-function.
    GeneralThreshold,
    /// Exact bound under the information-maximizing threshold `H = A S`.
    OptimalExact,
    /// Single-target, single-snapshot closed form.
    SingleTarget,
    /// Large-array diagonal approximation.
    Asymptotic,
}

impl std::fmt::Display for CrbFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CrbFormula::GeneralThreshold => "general",
            CrbFormula::OptimalExact => "exact",
            CrbFormula::SingleTarget => "single-target",
            CrbFormula::Asymptotic => "asymptotic",
        };
        f.write_str(name)
    }
}

/// A Fisher information matrix over the full parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FimResult<T: Scalar> {
    /// Real symmetric `(K + 2KN) x (K + 2KN)` information matrix.
    pub matrix: DMatrix<T>,
    pub num_sources: usize,
    pub num_snapshots: usize,
    pub formula: CrbFormula,
}

/// The DOA block of a Cramér-Rao bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbResult<T: Scalar> {
    /// Real symmetric K x K bound on the direction estimates, radians^2.
    pub matrix: DMatrix<T>,
    pub formula: CrbFormula,
}

impl<T: Scalar> CrbResult<T> {
    /// Per-target variance bounds (the diagonal), radians^2.
    pub fn variances(&self) -> Vec<T> {
        (0..self.matrix.nrows()).map(|k| self.matrix[(k, k)]).collect()
    }
}

/// One-bit information weight
/// `B(x) = exp(-x^2) / (Phi(x) Phi(-x))`,
/// evaluated through the scaled complementary error function so that
/// arguments deep in the Gaussian tail neither overflow nor produce NaN.
pub fn b_function<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "b_function argument",
        });
    }
    // Phi(x) Phi(-x) = exp(-x^2) erfcx(u) erfcx(-u) / 4 with u = x / sqrt(2)
    let u = x.abs() * from_f64(std::f64::consts::FRAC_1_SQRT_2);
    let four: T = from_f64(4.0);
    let two: T = from_f64(2.0);
    if u <= special::product_cutoff::<T>() {
        let pos = special::erfcx_nonneg(u);
        let neg = two * (u * u).exp() - pos;
        Ok(four / (pos * neg))
    } else {
        // erfc(u) is negligible against 2 exp(u^2); underflows smoothly to 0
        Ok(two * (-(u * u)).exp() / special::erfcx_nonneg(u))
    }
}

/// Per-component one-bit weights
/// `lambda_k = B(Re zeta_k / (sigma/sqrt(2))) + j B(Im zeta_k / (sigma/sqrt(2)))`
/// for `zeta = vec(A S - H)` in snapshot-major order.
pub fn lambda_vector<T: Scalar>(
    zeta: &DVector<Complex<T>>,
    sigma: T,
) -> Result<DVector<Complex<T>>> {
    if !sigma.is_finite() || sigma <= T::zero() {
        return Err(Error::NonPositive {
            what: "noise standard deviation",
            value: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    let component_std = sigma * from_f64(std::f64::consts::FRAC_1_SQRT_2);
    let mut out = DVector::zeros(zeta.len());
    for (k, z) in zeta.iter().enumerate() {
        out[k] = Complex::new(
            b_function(z.re / component_std)?,
            b_function(z.im / component_std)?,
        );
    }
    Ok(out)
}

/// Parameter-derivative matrices of the noiseless observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBlocks<T: Scalar> {
    /// `U = [Delta, G, jG]^H`, `(K + 2KN) x MN`, rows indexed by parameters.
    pub u: DMatrix<Complex<T>>,
    /// Khatri-Rao block `Delta = S^T (col-wise kron) dA`, `MN x K`.
    pub delta: DMatrix<Complex<T>>,
    /// Source block `G = I_N kron A`, `MN x KN`.
    pub g: DMatrix<Complex<T>>,
}

pub fn build_u<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
) -> Result<DerivativeBlocks<T>> {
    build_u_with_budget(scene, cfg, DEFAULT_DIMENSION_BUDGET)
}

pub fn build_u_with_budget<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    budget: usize,
) -> Result<DerivativeBlocks<T>> {
    let m = cfg.num_elements();
    let k = scene.num_sources();
    let n = scene.num_snapshots();
    if k >= m {
        return Err(Error::TooManySources {
            num_sources: k,
            num_elements: m,
        });
    }
    let mn = m * n;
    let params = k + 2 * k * n;
    let required = (mn as u128) * (params as u128);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: budget as u128,
        });
    }

    let a = steering_matrix(cfg, scene.angles())?;
    let da = steering_derivative_matrix(cfg, scene.angles())?;
    let s = scene.source_matrix();

    let mut delta = DMatrix::zeros(mn, k);
    let mut g = DMatrix::zeros(mn, k * n);
    for t in 0..n {
        for kk in 0..k {
            let sc = s[(kk, t)];
            for i in 0..m {
                delta[(t * m + i, kk)] = sc * da[(i, kk)];
                g[(t * m + i, t * k + kk)] = a[(i, kk)];
            }
        }
    }

    let j = Complex::new(T::zero(), T::one());
    let mut u = DMatrix::zeros(params, mn);
    for col in 0..mn {
        for kk in 0..k {
            u[(kk, col)] = delta[(col, kk)].conj();
        }
        for q in 0..k * n {
            let v = g[(col, q)];
            u[(k + q, col)] = v.conj();
            u[(k + k * n + q, col)] = (j * v).conj();
        }
    }

    Ok(DerivativeBlocks { u, delta, g })
}

fn real_part<T: Scalar>(m: &DMatrix<Complex<T>>) -> DMatrix<T> {
    m.map(|z| z.re)
}

fn check_sigma2<T: Scalar>(sigma2: T) -> Result<()> {
    if !sigma2.is_finite() || sigma2 <= T::zero() {
        return Err(Error::NonPositive {
            what: "noise variance",
            value: sigma2.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn require_delta<T: Scalar>(arr: &Arrangement<T>, context: &str) -> Result<Vec<bool>> {
    arr.delta().ok_or_else(|| Error::TwoLevelRequired {
        context: context.into(),
    })
}

fn check_arrangement_len<T: Scalar>(arr: &Arrangement<T>, m: usize) -> Result<()> {
    if arr.len() != m {
        return Err(Error::DimensionMismatch {
            context: format!(
                "arrangement has {} entries but the array has {m} elements",
                arr.len()
            ),
        });
    }
    Ok(())
}

/// Fisher information for mixed data under an arbitrary known threshold:
/// the high-precision term `(2/sigma^2) Re(U0 U0^H)` plus the one-bit term
/// `(1/(pi sigma^2)) (U1_R Lambda_R U1_R^T + U1_I Lambda_I U1_I^T)`.
pub fn fim_general<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
    h: &DMatrix<Complex<T>>,
) -> Result<FimResult<T>> {
    let m = cfg.num_elements();
    let n = scene.num_snapshots();
    let k = scene.num_sources();
    check_arrangement_len(arr, m)?;
    let delta = require_delta(arr, "the general-threshold Fisher matrix mixes exactly two ADC grades")?;
    if h.nrows() != m || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "threshold is {}x{}, expected {m}x{n}",
                h.nrows(),
                h.ncols()
            ),
        });
    }
    let sigma2 = scene.noise_variance();
    check_sigma2(sigma2)?;

    let blocks = build_u(scene, cfg)?;
    let mn = m * n;

    // high-precision term over the delta-masked columns
    let mut u0 = blocks.u.clone();
    for col in 0..mn {
        if !delta[col % m] {
            for r in 0..u0.nrows() {
                u0[(r, col)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    let f0 = real_part(&(&u0 * u0.adjoint()));

    // one-bit term: column weights are the B-function values on the
    // complement mask
    let a = steering_matrix(cfg, scene.angles())?;
    let clean = &a * scene.source_matrix();
    let mut zeta = DVector::zeros(mn);
    for t in 0..n {
        for i in 0..m {
            zeta[t * m + i] = clean[(i, t)] - h[(i, t)];
        }
    }
    let lambda = lambda_vector(&zeta, sigma2.sqrt())?;

    let ur = blocks.u.map(|z| z.re);
    let ui = blocks.u.map(|z| z.im);
    let mut ur_w = ur.clone();
    let mut ui_w = ui.clone();
    for col in 0..mn {
        let (wr, wi) = if delta[col % m] {
            (T::zero(), T::zero())
        } else {
            (lambda[col].re, lambda[col].im)
        };
        for r in 0..ur_w.nrows() {
            ur_w[(r, col)] *= wr;
            ui_w[(r, col)] *= wi;
        }
    }
    let f1 = &ur_w * ur.transpose() + &ui_w * ui.transpose();

    let two = from_f64::<T>(2.0);
    let matrix = f0 * (two / sigma2) + f1 * (T::pi() * sigma2).recip();
    Ok(FimResult {
        matrix,
        num_sources: k,
        num_snapshots: n,
        formula: CrbFormula::GeneralThreshold,
    })
}

/// Fisher information under the optimal threshold `H = A S`:
/// `(2/sigma^2) Re(Ubar Ubar^H)` with `Ubar = U (I_N kron Sigma0)^{1/2}`,
/// `Sigma0 = (1 - 2/pi) diag(delta) + (2/pi) I` for two-level arrangements
/// and `diag(g)` in general.
pub fn fim_optimal<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
) -> Result<FimResult<T>> {
    let m = cfg.num_elements();
    check_arrangement_len(arr, m)?;
    let sigma2 = scene.noise_variance();
    check_sigma2(sigma2)?;

    let blocks = build_u(scene, cfg)?;
    let mn = m * scene.num_snapshots();
    let roots: Vec<T> = arr.weights().iter().map(|&g| g.sqrt()).collect();
    let mut ubar = blocks.u;
    for col in 0..mn {
        let w = roots[col % m];
        for r in 0..ubar.nrows() {
            ubar[(r, col)] = ubar[(r, col)].scale(w);
        }
    }
    let two = from_f64::<T>(2.0);
    let matrix = real_part(&(&ubar * ubar.adjoint())) * (two / sigma2);
    Ok(FimResult {
        matrix,
        num_sources: scene.num_sources(),
        num_snapshots: scene.num_snapshots(),
        formula: CrbFormula::OptimalExact,
    })
}

/// Invert a real symmetric positive definite matrix through its
/// eigendecomposition, failing loudly when the spectrum is not safely
/// positive.
fn sym_inverse_with_cap<T: Scalar>(m: &DMatrix<T>, cap: T) -> Result<DMatrix<T>> {
    let sym = (m + m.transpose()) * from_f64::<T>(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut smallest = T::max_value().expect("bounded");
    let mut largest = T::zero();
    for &v in eig.eigenvalues.iter() {
        smallest = smallest.min(v);
        largest = largest.max(v.abs());
    }
    if smallest <= T::zero() || largest > cap * smallest {
        return Err(Error::Unidentifiable {
            smallest_eigenvalue: smallest.to_f64().unwrap_or(f64::NAN),
            condition_cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scaled = DMatrix::from_fn(eig.eigenvectors.nrows(), eig.eigenvectors.ncols(), |r, c| {
        eig.eigenvectors[(r, c)] / eig.eigenvalues[c]
    });
    Ok(scaled * eig.eigenvectors.transpose())
}

/// Complex Hermitian positive definite inverse with the same spectrum guard.
fn herm_inverse_with_cap<T: Scalar>(
    m: &DMatrix<Complex<T>>,
    cap: T,
) -> Result<DMatrix<Complex<T>>> {
    let sym = (m + m.adjoint()).scale(from_f64(0.5));
    let eig = SymmetricEigen::new(sym);
    let mut smallest = T::max_value().expect("bounded");
    let mut largest = T::zero();
    for &v in eig.eigenvalues.iter() {
        smallest = smallest.min(v);
        largest = largest.max(v.abs());
    }
    if smallest <= T::zero() || largest > cap * smallest {
        return Err(Error::Unidentifiable {
            smallest_eigenvalue: smallest.to_f64().unwrap_or(f64::NAN),
            condition_cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scaled = DMatrix::from_fn(eig.eigenvectors.nrows(), eig.eigenvectors.ncols(), |r, c| {
        eig.eigenvectors[(r, c)].unscale(eig.eigenvalues[c])
    });
    Ok(scaled * eig.eigenvectors.adjoint())
}

pub fn crb_from_fim<T: Scalar>(fim: &FimResult<T>) -> Result<CrbResult<T>> {
    crb_from_fim_with_cap(fim, from_f64(DEFAULT_CONDITION_CAP))
}

/// Extract the DOA block of the bound by block-wise inversion: the guard
/// eigendecomposes the full Fisher matrix, then the K x K direction block of
/// the inverse is obtained as the inverse Schur complement
/// `(F_tt - F_ts F_ss^{-1} F_st)^{-1}`.
pub fn crb_from_fim_with_cap<T: Scalar>(fim: &FimResult<T>, cap: T) -> Result<CrbResult<T>> {
    let k = fim.num_sources;
    let dim = k + 2 * k * fim.num_snapshots;
    if fim.matrix.nrows() != dim || fim.matrix.ncols() != dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "Fisher matrix is {}x{}, expected {dim}x{dim}",
                fim.matrix.nrows(),
                fim.matrix.ncols()
            ),
        });
    }
    let sym = (&fim.matrix + fim.matrix.transpose()) * from_f64::<T>(0.5);

    // identifiability guard on the full spectrum
    let eig = SymmetricEigen::new(sym.clone());
    let mut smallest = T::max_value().expect("bounded");
    let mut largest = T::zero();
    for &v in eig.eigenvalues.iter() {
        smallest = smallest.min(v);
        largest = largest.max(v.abs());
    }
    if smallest <= T::zero() || largest > cap * smallest {
        return Err(Error::Unidentifiable {
            smallest_eigenvalue: smallest.to_f64().unwrap_or(f64::NAN),
            condition_cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }

    let rest = dim - k;
    let f_tt = sym.view((0, 0), (k, k)).into_owned();
    let f_ts = sym.view((0, k), (k, rest)).into_owned();
    let f_ss = sym.view((k, k), (rest, rest)).into_owned();
    let chol = nalgebra::Cholesky::new(f_ss).ok_or(Error::Unidentifiable {
        smallest_eigenvalue: smallest.to_f64().unwrap_or(f64::NAN),
        condition_cap: cap.to_f64().unwrap_or(f64::NAN),
    })?;
    let solved = chol.solve(&f_ts.transpose());
    let schur = &f_tt - &f_ts * solved;
    let crb = sym_inverse_with_cap(&schur, cap)?;
    Ok(CrbResult {
        matrix: (&crb + crb.transpose()) * from_f64::<T>(0.5),
        formula: fim.formula,
    })
}

/// Optimal-threshold bound straight from the projected-dispersion form:
/// `CRB = (sigma^2 / 2N) Re((dA^H Omega dA) o P^T)^{-1}` with
/// `Omega = Sigma0 - Sigma0 A (A^H Sigma0 A)^{-1} A^H Sigma0`, evaluated for
/// a caller-supplied source power matrix `P`.
pub fn crb_optimal_hadamard_with_power<T: Scalar>(
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
    angles: &[T],
    power: &DMatrix<Complex<T>>,
    sigma2: T,
    num_snapshots: usize,
) -> Result<CrbResult<T>> {
    let m = cfg.num_elements();
    let k = angles.len();
    check_angles(angles)?;
    check_arrangement_len(arr, m)?;
    check_sigma2(sigma2)?;
    if k >= m {
        return Err(Error::TooManySources {
            num_sources: k,
            num_elements: m,
        });
    }
    if power.nrows() != k || power.ncols() != k {
        return Err(Error::DimensionMismatch {
            context: format!(
                "power matrix is {}x{}, expected {k}x{k}",
                power.nrows(),
                power.ncols()
            ),
        });
    }
    if num_snapshots == 0 {
        return Err(Error::Invalid {
            what: "snapshot count",
            context: "at least one snapshot is required".into(),
        });
    }
    let cap = from_f64(DEFAULT_CONDITION_CAP);

    let a = steering_matrix(cfg, angles)?;
    let da = steering_derivative_matrix(cfg, angles)?;
    let g = arr.weights();

    // Sigma0 A via row scaling
    let mut sa = a.clone();
    for i in 0..m {
        for kk in 0..k {
            sa[(i, kk)] = sa[(i, kk)].scale(g[i]);
        }
    }
    let gram = a.adjoint() * &sa;
    let gram_inv = herm_inverse_with_cap(&gram, cap)?;
    let mut omega = &sa * gram_inv * sa.adjoint();
    omega = -omega;
    for i in 0..m {
        omega[(i, i)] += Complex::new(g[i], T::zero());
    }

    let core = da.adjoint() * omega * &da;
    let x = DMatrix::from_fn(k, k, |r, c| (core[(r, c)] * power[(c, r)]).re);
    let inv = sym_inverse_with_cap(&x, cap)?;
    let half = from_f64::<T>(0.5);
    let scale = sigma2 * half / from_usize(num_snapshots);
    Ok(CrbResult {
        matrix: inv * scale,
        formula: CrbFormula::OptimalExact,
    })
}

/// Optimal-threshold bound using the scene's empirical source power matrix.
pub fn crb_optimal_hadamard<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
) -> Result<CrbResult<T>> {
    crb_optimal_hadamard_with_power(
        cfg,
        arr,
        scene.angles(),
        &scene.empirical_power_matrix(),
        scene.noise_variance(),
        scene.num_snapshots(),
    )
}

pub fn crb_general_threshold<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
    h: &DMatrix<Complex<T>>,
) -> Result<CrbResult<T>> {
    crb_general_threshold_with_cap(scene, cfg, arr, h, from_f64(DEFAULT_CONDITION_CAP))
}

/// General-threshold bound without materializing the full Fisher matrix.
///
/// The source parameters of different snapshots are uncoupled, so the Fisher
/// matrix is block diagonal in them and the DOA block of its inverse reduces
/// to `(sum_t F_tt - sum_t F_ts,t F_ss,t^{-1} F_st,t)^{-1}` with per-snapshot
/// 2K x 2K solves. Matches [`crb_from_fim`] on [`fim_general`] output while
/// staying linear in the snapshot count; the spectrum guard is applied to
/// each per-snapshot block and to the final Schur complement.
pub fn crb_general_threshold_with_cap<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    arr: &Arrangement<T>,
    h: &DMatrix<Complex<T>>,
    cap: T,
) -> Result<CrbResult<T>> {
    let m = cfg.num_elements();
    let n = scene.num_snapshots();
    let k = scene.num_sources();
    check_arrangement_len(arr, m)?;
    let delta = require_delta(arr, "the general-threshold bound mixes exactly two ADC grades")?;
    if h.nrows() != m || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "threshold is {}x{}, expected {m}x{n}",
                h.nrows(),
                h.ncols()
            ),
        });
    }
    if k >= m {
        return Err(Error::TooManySources {
            num_sources: k,
            num_elements: m,
        });
    }
    let sigma2 = scene.noise_variance();
    check_sigma2(sigma2)?;
    let sigma = sigma2.sqrt();
    let component_std = sigma * from_f64(std::f64::consts::FRAC_1_SQRT_2);

    let a = steering_matrix(cfg, scene.angles())?;
    let da = steering_derivative_matrix(cfg, scene.angles())?;
    let s = scene.source_matrix();
    let clean = &a * s;

    let hp_weight = from_f64::<T>(2.0) / sigma2;
    let ob_scale = (T::pi() * sigma2).recip();

    let p = 3 * k; // per-snapshot parameters: theta, Re s(t), Im s(t)
    let mut f_tt = DMatrix::<T>::zeros(k, k);
    let mut schur = DMatrix::<T>::zeros(k, k);
    let mut ft = DMatrix::<T>::zeros(p, p);
    let mut row = vec![T::zero(); p];

    for t in 0..n {
        ft.fill(T::zero());
        for i in 0..m {
            let zeta = clean[(i, t)] - h[(i, t)];
            let (w_re, w_im) = if delta[i] {
                (hp_weight, hp_weight)
            } else {
                (
                    ob_scale * b_function(zeta.re / component_std)?,
                    ob_scale * b_function(zeta.im / component_std)?,
                )
            };
            // real-part row of element i: [Re(dA diag s), Re(A), Re(jA)]
            for kk in 0..k {
                let d = da[(i, kk)] * s[(kk, t)];
                row[kk] = d.re;
                row[k + kk] = a[(i, kk)].re;
                row[2 * k + kk] = -a[(i, kk)].im;
            }
            rank_one_update(&mut ft, &row, w_re);
            // imaginary-part row
            for kk in 0..k {
                let d = da[(i, kk)] * s[(kk, t)];
                row[kk] = d.im;
                row[k + kk] = a[(i, kk)].im;
                row[2 * k + kk] = a[(i, kk)].re;
            }
            rank_one_update(&mut ft, &row, w_im);
        }
        // mirror the accumulated upper triangle
        for r in 0..p {
            for c in 0..r {
                ft[(r, c)] = ft[(c, r)];
            }
        }

        let btt = ft.view((0, 0), (k, k));
        let bts = ft.view((0, k), (k, 2 * k)).into_owned();
        let bss = ft.view((k, k), (2 * k, 2 * k)).into_owned();
        let bss_inv = sym_inverse_with_cap(&bss, cap)?;
        f_tt += btt;
        schur += &bts * bss_inv * bts.transpose();
    }

    let crb = sym_inverse_with_cap(&(f_tt - schur), cap)?;
    Ok(CrbResult {
        matrix: (&crb + crb.transpose()) * from_f64::<T>(0.5),
        formula: CrbFormula::GeneralThreshold,
    })
}

/// Accumulate `w * r r^T` into the upper triangle of `ft`.
fn rank_one_update<T: Scalar>(ft: &mut DMatrix<T>, r: &[T], w: T) {
    for p in 0..r.len() {
        let wp = w * r[p];
        for q in p..r.len() {
            ft[(p, q)] += wp * r[q];
        }
    }
}

/// Closed-form single-target, single-snapshot bound
/// `sigma^2 (M0 + (2/pi) M1) / (2 p S pi^2 cos^2 theta)`.
pub fn crb_single_target<T: Scalar>(
    arr: &Arrangement<T>,
    p: T,
    sigma2: T,
    theta: T,
) -> Result<T> {
    let delta = require_delta(arr, "the closed-form bound is stated for two-level arrangements")?;
    if !p.is_finite() || p <= T::zero() {
        return Err(Error::NonPositive {
            what: "source power",
            value: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    check_sigma2(sigma2)?;
    if !theta.is_finite() || theta.abs() >= T::frac_pi_2() {
        return Err(Error::AngleOutOfRange {
            angle_rad: theta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let score = arr.dispersion();
    if score <= T::zero() {
        return Err(Error::Invalid {
            what: "arrangement",
            context: "dispersion score is zero; the direction is unobservable".into(),
        });
    }
    let m0 = delta.iter().filter(|&&d| d).count();
    let m1 = delta.len() - m0;
    let weight_total = from_usize::<T>(m0) + T::frac_2_pi() * from_usize::<T>(m1);
    let two = from_f64::<T>(2.0);
    let cos = theta.cos();
    Ok(sigma2 * weight_total / (two * p * score * T::pi() * T::pi() * cos * cos))
}

/// Large-array diagonal bound: entry `k` is the single-target closed form at
/// `SNR_k`, divided by the snapshot count.
pub fn crb_asymptotic<T: Scalar>(
    arr: &Arrangement<T>,
    angles: &[T],
    snrs: &[T],
    num_snapshots: usize,
) -> Result<CrbResult<T>> {
    check_angles(angles)?;
    if angles.len() != snrs.len() {
        return Err(Error::DimensionMismatch {
            context: format!("{} angles but {} SNR values", angles.len(), snrs.len()),
        });
    }
    if num_snapshots == 0 {
        return Err(Error::Invalid {
            what: "snapshot count",
            context: "at least one snapshot is required".into(),
        });
    }
    let k = angles.len();
    let mut matrix = DMatrix::zeros(k, k);
    for kk in 0..k {
        let snr = snrs[kk];
        if !snr.is_finite() || snr <= T::zero() {
            return Err(Error::NonPositive {
                what: "SNR",
                value: snr.to_f64().unwrap_or(f64::NAN),
            });
        }
        let single = crb_single_target(arr, T::one(), snr.recip(), angles[kk])?;
        matrix[(kk, kk)] = single / from_usize(num_snapshots);
    }
    Ok(CrbResult {
        matrix,
        formula: CrbFormula::Asymptotic,
    })
}
