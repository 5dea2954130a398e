//! Uniform-linear-array signal model: steering vectors and derivatives,
//! deterministic source synthesis, noisy observation, and the complex
//! one-bit / mixed quantizers.
//!
//! Conventions used throughout the crate:
//! * angles are radians, strictly inside (-pi/2, pi/2);
//! * element positions are half-wavelength spaced, element 1 is the phase
//!   reference;
//! * snapshot matrices are M x N with one column per snapshot, so column-major
//!   vectorization enumerates entries snapshot-major (`index = t*M + i`).

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{from_f64, Scalar};

/// Geometry of a half-wavelength-spaced uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayConfig {
    num_elements: usize,
}

impl ArrayConfig {
    pub fn new(num_elements: usize) -> Result<Self> {
        if num_elements < 2 {
            return Err(Error::TooFewElements(num_elements));
        }
        Ok(Self { num_elements })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }
}

fn check_angle<T: Scalar>(theta: T) -> Result<()> {
    if !theta.is_finite() || theta.abs() >= T::frac_pi_2() {
        return Err(Error::AngleOutOfRange {
            angle_rad: theta.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

pub(crate) fn check_angles<T: Scalar>(angles: &[T]) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::Invalid {
            what: "angles",
            context: "at least one source direction is required".into(),
        });
    }
    for &theta in angles {
        check_angle(theta)?;
    }
    for (i, &a) in angles.iter().enumerate() {
        if angles[i + 1..].contains(&a) {
            return Err(Error::DuplicateAngles {
                angle_rad: a.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Steering vector `a(theta)` with `a_i = exp(j pi (i-1) sin(theta))`.
pub fn steering_vector<T: Scalar>(cfg: &ArrayConfig, theta: T) -> Result<DVector<Complex<T>>> {
    check_angle(theta)?;
    let omega = T::pi() * theta.sin();
    Ok(DVector::from_fn(cfg.num_elements(), |i, _| {
        let phase = omega * from_f64(i as f64);
        Complex::new(phase.cos(), phase.sin())
    }))
}

/// Derivative `da(theta)/dtheta` with entries `j pi (i-1) cos(theta) a_i`.
pub fn steering_derivative<T: Scalar>(cfg: &ArrayConfig, theta: T) -> Result<DVector<Complex<T>>> {
    check_angle(theta)?;
    let omega = T::pi() * theta.sin();
    let slope = T::pi() * theta.cos();
    Ok(DVector::from_fn(cfg.num_elements(), |i, _| {
        let pos: T = from_f64(i as f64);
        let phase = omega * pos;
        let scale = slope * pos;
        // j * scale * e^{j phase}
        Complex::new(-scale * phase.sin(), scale * phase.cos())
    }))
}

/// Steering matrix `A = [a(theta_1), ..., a(theta_K)]`, M x K.
pub fn steering_matrix<T: Scalar>(cfg: &ArrayConfig, angles: &[T]) -> Result<DMatrix<Complex<T>>> {
    check_angles(angles)?;
    let m = cfg.num_elements();
    let mut a = DMatrix::zeros(m, angles.len());
    for (k, &theta) in angles.iter().enumerate() {
        a.set_column(k, &steering_vector(cfg, theta)?);
    }
    Ok(a)
}

/// Column-wise derivative matrix `dA` of the steering matrix.
pub fn steering_derivative_matrix<T: Scalar>(
    cfg: &ArrayConfig,
    angles: &[T],
) -> Result<DMatrix<Complex<T>>> {
    check_angles(angles)?;
    let m = cfg.num_elements();
    let mut da = DMatrix::zeros(m, angles.len());
    for (k, &theta) in angles.iter().enumerate() {
        da.set_column(k, &steering_derivative(cfg, theta)?);
    }
    Ok(da)
}

/// A deterministic source scene: directions, the K x N source matrix, and the
/// complex noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScene<T: Scalar> {
    angles: Vec<T>,
    source_matrix: DMatrix<Complex<T>>,
    noise_variance: T,
}

impl<T: Scalar> SourceScene<T> {
    pub fn new(
        angles: Vec<T>,
        source_matrix: DMatrix<Complex<T>>,
        noise_variance: T,
    ) -> Result<Self> {
        check_angles(&angles)?;
        if source_matrix.nrows() != angles.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "source matrix has {} rows but there are {} angles",
                    source_matrix.nrows(),
                    angles.len()
                ),
            });
        }
        if source_matrix.ncols() == 0 {
            return Err(Error::Invalid {
                what: "source matrix",
                context: "at least one snapshot is required".into(),
            });
        }
        if !noise_variance.is_finite() || noise_variance <= T::zero() {
            return Err(Error::NonPositive {
                what: "noise variance",
                value: noise_variance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            angles,
            source_matrix,
            noise_variance,
        })
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn source_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.source_matrix
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn num_sources(&self) -> usize {
        self.angles.len()
    }

    pub fn num_snapshots(&self) -> usize {
        self.source_matrix.ncols()
    }

    /// Empirical power of source `k`: mean of `|s_k(t)|^2` over snapshots.
    pub fn source_power(&self, k: usize) -> T {
        let n = self.num_snapshots();
        let mut acc = T::zero();
        for t in 0..n {
            acc += self.source_matrix[(k, t)].norm_sqr();
        }
        acc / crate::scalar::from_usize(n)
    }

    /// Empirical SNR of source `k`: `p_k / sigma^2`.
    pub fn source_snr(&self, k: usize) -> T {
        self.source_power(k) / self.noise_variance
    }

    /// Empirical source covariance `P_hat = (1/N) sum_t s(t) s(t)^H`, K x K.
    pub fn empirical_power_matrix(&self) -> DMatrix<Complex<T>> {
        let n = self.num_snapshots();
        let s = &self.source_matrix;
        let scale = Complex::new(crate::scalar::from_usize::<T>(n).recip(), T::zero());
        (s * s.adjoint()).map(|v| v * scale)
    }
}

/// How the known complex threshold matrix H is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdScheme<T: Scalar> {
    /// `H = A S`, the noiseless signal itself; maximizes one-bit information.
    Optimal,
    /// Real and imaginary parts drawn independently and uniformly from the
    /// evenly spaced grid `{-h_max, ..., h_max}` with `levels` points.
    DiscreteRandom { h_max: T, levels: usize, seed: u64 },
    /// A caller-supplied M x N threshold matrix.
    Explicit(DMatrix<Complex<T>>),
}

impl<T: Scalar> ThresholdScheme<T> {
    /// Produce the concrete M x N threshold matrix for the given scene.
    pub fn materialize(
        &self,
        scene: &SourceScene<T>,
        cfg: &ArrayConfig,
    ) -> Result<DMatrix<Complex<T>>> {
        let m = cfg.num_elements();
        let n = scene.num_snapshots();
        match self {
            ThresholdScheme::Optimal => {
                let a = steering_matrix(cfg, scene.angles())?;
                Ok(a * scene.source_matrix())
            }
            ThresholdScheme::DiscreteRandom {
                h_max,
                levels,
                seed,
            } => {
                if !h_max.is_finite() || *h_max <= T::zero() {
                    return Err(Error::NonPositive {
                        what: "threshold amplitude h_max",
                        value: h_max.to_f64().unwrap_or(f64::NAN),
                    });
                }
                if *levels < 2 {
                    return Err(Error::Invalid {
                        what: "threshold levels",
                        context: format!("need at least 2 grid levels, got {levels}"),
                    });
                }
                let step = from_f64::<T>(2.0) * *h_max / from_f64((*levels - 1) as f64);
                let grid: Vec<T> = (0..*levels)
                    .map(|q| -*h_max + step * from_f64(q as f64))
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut h = DMatrix::zeros(m, n);
                // column-major draw order pins the seeded stream
                for t in 0..n {
                    for i in 0..m {
                        let re = grid[rng.random_range(0..*levels)];
                        let im = grid[rng.random_range(0..*levels)];
                        h[(i, t)] = Complex::new(re, im);
                    }
                }
                Ok(h)
            }
            ThresholdScheme::Explicit(h) => {
                if h.nrows() != m || h.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        context: format!(
                            "explicit threshold is {}x{}, expected {m}x{n}",
                            h.nrows(),
                            h.ncols()
                        ),
                    });
                }
                Ok(h.clone())
            }
        }
    }
}

/// The three views of one acquisition: unquantized, one-bit, and mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots<T: Scalar> {
    pub unquantized: DMatrix<Complex<T>>,
    pub quantized: DMatrix<Complex<T>>,
    pub mixed: DMatrix<Complex<T>>,
}

impl<T: Scalar> Snapshots<T> {
    /// Observe the scene, quantize against the scheme's threshold, and apply
    /// the per-element ADC indicator.
    pub fn acquire(
        scene: &SourceScene<T>,
        cfg: &ArrayConfig,
        delta: &[bool],
        scheme: &ThresholdScheme<T>,
        noise_seed: u64,
    ) -> Result<Self> {
        let x = observe(scene, cfg, noise_seed)?;
        let h = scheme.materialize(scene, cfg)?;
        let z = quantize(&x, &h)?;
        let y = mix(&x, &z, delta)?;
        Ok(Self {
            unquantized: x,
            quantized: z,
            mixed: y,
        })
    }
}

/// Build a constant-modulus random-phase scene: `s_k(t) = sqrt(p_k) e^{j phi}`
/// with phases i.i.d. uniform on [0, 2 pi) from the seeded generator.
pub fn synthesize_scene<T: Scalar>(
    cfg: &ArrayConfig,
    angles: &[T],
    powers: &[T],
    num_snapshots: usize,
    noise_variance: T,
    seed: u64,
) -> Result<SourceScene<T>> {
    if angles.len() != powers.len() {
        return Err(Error::DimensionMismatch {
            context: format!("{} angles but {} powers", angles.len(), powers.len()),
        });
    }
    if angles.len() >= cfg.num_elements() {
        return Err(Error::TooManySources {
            num_sources: angles.len(),
            num_elements: cfg.num_elements(),
        });
    }
    if num_snapshots == 0 {
        return Err(Error::Invalid {
            what: "snapshot count",
            context: "at least one snapshot is required".into(),
        });
    }
    for &p in powers {
        if !p.is_finite() || p <= T::zero() {
            return Err(Error::NonPositive {
                what: "source power",
                value: p.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let k = angles.len();
    let amplitudes: Vec<T> = powers.iter().map(|&p| p.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut s = DMatrix::zeros(k, num_snapshots);
    // column-major draw order pins the seeded stream
    for t in 0..num_snapshots {
        for kk in 0..k {
            let phi: T = from_f64(rng.random::<f64>() * two_pi);
            s[(kk, t)] = Complex::new(amplitudes[kk] * phi.cos(), amplitudes[kk] * phi.sin());
        }
    }
    SourceScene::new(angles.to_vec(), s, noise_variance)
}

/// Noisy observation `X = A S + E` with circularly symmetric complex Gaussian
/// noise of total variance `sigma^2` per entry (`sigma^2 / 2` per component).
pub fn observe<T: Scalar>(
    scene: &SourceScene<T>,
    cfg: &ArrayConfig,
    seed: u64,
) -> Result<DMatrix<Complex<T>>> {
    let a = steering_matrix(cfg, scene.angles())?;
    let mut x = a * scene.source_matrix();
    let component_std = (scene.noise_variance() / from_f64(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = x.shape();
    for t in 0..n {
        for i in 0..m {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x[(i, t)] += Complex::new(
                component_std * from_f64(re),
                component_std * from_f64(im),
            );
        }
    }
    Ok(x)
}

#[inline]
fn sign_plus<T: Scalar>(v: T) -> T {
    // sign(0) := +1 so the quantizer is a total function
    if v < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Complex one-bit quantizer `Z = sign(Re(X - H)) + j sign(Im(X - H))`.
pub fn quantize<T: Scalar>(
    x: &DMatrix<Complex<T>>,
    h: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>> {
    if x.shape() != h.shape() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "signal is {}x{} but threshold is {}x{}",
                x.nrows(),
                x.ncols(),
                h.nrows(),
                h.ncols()
            ),
        });
    }
    Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let d = x[(i, j)] - h[(i, j)];
        Complex::new(sign_plus(d.re), sign_plus(d.im))
    }))
}

/// Mixed output: row `i` comes from `x` when `delta[i]` is set, from `z`
/// otherwise.
pub fn mix<T: Scalar>(
    x: &DMatrix<Complex<T>>,
    z: &DMatrix<Complex<T>>,
    delta: &[bool],
) -> Result<DMatrix<Complex<T>>> {
    if x.shape() != z.shape() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "unquantized is {}x{} but quantized is {}x{}",
                x.nrows(),
                x.ncols(),
                z.nrows(),
                z.ncols()
            ),
        });
    }
    if delta.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "indicator has length {} but there are {} array elements",
                delta.len(),
                x.nrows()
            ),
        });
    }
    Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        if delta[i] {
            x[(i, j)]
        } else {
            z[(i, j)]
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(m: usize) -> ArrayConfig {
        ArrayConfig::new(m).unwrap()
    }

    #[test]
    fn steering_at_broadside_is_all_ones() {
        let a = steering_vector(&cfg(4), 0.0_f64).unwrap();
        for i in 0..4 {
            assert_eq!(a[i], Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_at_thirty_degrees_is_unit_imaginary() {
        // sin(pi/6) = 1/2, so element 2 is e^{j pi/2} = j
        let a = steering_vector(&cfg(2), std::f64::consts::FRAC_PI_6).unwrap();
        assert_eq!(a[0], Complex::new(1.0, 0.0));
        assert_relative_eq!(a[1].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(a[1].im, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn steering_matches_scalar_evaluation() {
        let theta = 0.3_f64;
        let a = steering_vector(&cfg(3), theta).unwrap();
        for i in 0..3 {
            let phase = std::f64::consts::PI * (i as f64) * theta.sin();
            assert_relative_eq!(a[i].re, phase.cos(), max_relative = 1e-15);
            assert_relative_eq!(a[i].im, phase.sin(), max_relative = 1e-15);
        }
    }

    #[test]
    fn steering_entries_have_unit_modulus() {
        for &theta in &[-1.2_f64, -0.4, 0.0, 0.7, 1.5] {
            let a = steering_vector(&cfg(6), theta).unwrap();
            for i in 0..6 {
                assert_relative_eq!(a[i].norm(), 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn derivative_at_broadside() {
        let d = steering_derivative(&cfg(2), 0.0_f64).unwrap();
        assert_eq!(d[0], Complex::new(0.0, 0.0));
        assert_relative_eq!(d[1].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d[1].im, std::f64::consts::PI, max_relative = 1e-15);
    }

    #[test]
    fn endfire_angles_are_rejected() {
        let c = cfg(3);
        assert!(steering_vector(&c, std::f64::consts::FRAC_PI_2).is_err());
        assert!(steering_vector(&c, -std::f64::consts::FRAC_PI_2).is_err());
        assert!(steering_derivative(&c, 2.0).is_err());
    }

    #[test]
    fn derivative_matches_central_finite_difference() {
        let c = cfg(5);
        let h = 1e-6_f64;
        for &theta in &[-1.0_f64, -0.3, 0.0, 0.4, 1.2] {
            let d = steering_derivative(&c, theta).unwrap();
            let plus = steering_vector(&c, theta + h).unwrap();
            let minus = steering_vector(&c, theta - h).unwrap();
            for i in 0..5 {
                let fd = (plus[i] - minus[i]) / Complex::new(2.0 * h, 0.0);
                let denom = d[i].norm().max(1.0);
                assert!(
                    (fd - d[i]).norm() / denom < 1e-6,
                    "theta={theta}, element {i}: fd={fd}, analytic={}",
                    d[i]
                );
            }
        }
    }

    #[test]
    fn synthesized_sources_have_constant_modulus() {
        let scene =
            synthesize_scene(&cfg(4), &[0.1_f64], &[1.0], 16, 1.0, 7).unwrap();
        for t in 0..16 {
            assert_relative_eq!(scene.source_matrix()[(0, t)].norm(), 1.0, max_relative = 1e-15);
        }
        assert_relative_eq!(scene.source_power(0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn synthesis_is_deterministic_in_the_seed() {
        let c = cfg(5);
        let a = synthesize_scene(&c, &[0.1_f64, -0.4], &[1.0, 2.0], 8, 0.5, 99).unwrap();
        let b = synthesize_scene(&c, &[0.1_f64, -0.4], &[1.0, 2.0], 8, 0.5, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_power_diagonal_is_exact_for_unit_sources() {
        let scene =
            synthesize_scene(&cfg(5), &[0.17_f64, 0.35], &[1.0, 1.0], 10, 1.0, 3).unwrap();
        let p = scene.empirical_power_matrix();
        assert_relative_eq!(p[(0, 0)].re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p[(1, 1)].re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p[(0, 0)].im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn too_many_sources_rejected() {
        let err = synthesize_scene(&cfg(2), &[0.0_f64, 0.3], &[1.0, 1.0], 4, 1.0, 0);
        assert!(matches!(err, Err(Error::TooManySources { .. })));
    }

    #[test]
    fn duplicate_angles_rejected_as_unidentifiable() {
        let err = synthesize_scene(&cfg(8), &[0.2_f64, 0.2], &[1.0, 1.0], 4, 1.0, 0);
        match err {
            Err(e @ Error::DuplicateAngles { .. }) => {
                assert!(e.to_string().contains("unidentifiable"));
            }
            other => panic!("expected DuplicateAngles, got {other:?}"),
        }
    }

    #[test]
    fn observation_is_noiseless_in_the_zero_variance_limit() {
        let c = cfg(4);
        let scene = synthesize_scene(&c, &[0.25_f64], &[1.0], 6, 1e-300, 5).unwrap();
        let a = steering_matrix(&c, scene.angles()).unwrap();
        let clean = &a * scene.source_matrix();
        let x = observe(&scene, &c, 11).unwrap();
        for t in 0..6 {
            for i in 0..4 {
                assert!((x[(i, t)] - clean[(i, t)]).norm() < 1e-140);
            }
        }
    }

    #[test]
    fn observation_noise_variance_is_calibrated() {
        let c = cfg(10);
        let sigma2 = 0.37_f64;
        let scene = synthesize_scene(&c, &[0.25_f64], &[1.0], 10_000, sigma2, 5).unwrap();
        let a = steering_matrix(&c, scene.angles()).unwrap();
        let clean = &a * scene.source_matrix();
        let x = observe(&scene, &c, 123).unwrap();
        let mut acc = 0.0;
        for t in 0..10_000 {
            for i in 0..10 {
                acc += (x[(i, t)] - clean[(i, t)]).norm_sqr();
            }
        }
        let sample_var = acc / 100_000.0;
        assert_relative_eq!(sample_var, sigma2, max_relative = 0.02);
    }

    #[test]
    fn observation_is_deterministic_in_the_seed() {
        let c = cfg(4);
        let scene = synthesize_scene(&c, &[0.25_f64], &[1.0], 6, 0.8, 5).unwrap();
        assert_eq!(observe(&scene, &c, 42).unwrap(), observe(&scene, &c, 42).unwrap());
    }

    #[test]
    fn quantizer_follows_component_signs() {
        let x = DMatrix::from_element(1, 1, Complex::new(1.0_f64, -2.0));
        let h = DMatrix::zeros(1, 1);
        let z = quantize(&x, &h).unwrap();
        assert_eq!(z[(0, 0)], Complex::new(1.0, -1.0));
    }

    #[test]
    fn quantizer_maps_zero_to_plus_one() {
        let x = DMatrix::from_element(2, 3, Complex::new(0.75_f64, -0.5));
        let z = quantize(&x, &x).unwrap();
        for v in z.iter() {
            assert_eq!(*v, Complex::new(1.0, 1.0));
        }
    }

    #[test]
    fn quantizer_codomain_and_sign_idempotence() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = DMatrix::from_fn(4, 5, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = DMatrix::from_fn(4, 5, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let z = quantize(&x, &h).unwrap();
        for v in z.iter() {
            assert_eq!(v.re.abs(), 1.0);
            assert_eq!(v.im.abs(), 1.0);
        }
        // re-quantizing any positive scaling of z against a zero threshold
        // reproduces z
        for &c in &[0.5, 1.0, 3.25] {
            let scaled = z.map(|v| v * Complex::new(c, 0.0));
            let again = quantize(&scaled, &DMatrix::zeros(4, 5)).unwrap();
            assert_eq!(again, z);
        }
    }

    #[test]
    fn mix_selects_rows_by_indicator() {
        let x = DMatrix::from_element(2, 2, Complex::new(5.0_f64, 0.0));
        let z = DMatrix::from_element(2, 2, Complex::new(-1.0_f64, 0.0));
        let y = mix(&x, &z, &[true, false]).unwrap();
        assert_eq!(y[(0, 0)], Complex::new(5.0, 0.0));
        assert_eq!(y[(1, 1)], Complex::new(-1.0, 0.0));

        assert_eq!(mix(&x, &z, &[true, true]).unwrap(), x);
        assert_eq!(mix(&x, &z, &[false, false]).unwrap(), z);
        assert!(mix(&x, &z, &[true]).is_err());
    }

    #[test]
    fn mix_complement_recovers_both_views() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(3, 4, |_, _| {
            Complex::new(rng.random::<f64>(), rng.random::<f64>())
        });
        let z = DMatrix::from_fn(3, 4, |_, _| {
            Complex::new(rng.random::<f64>(), rng.random::<f64>())
        });
        let delta = [true, false, true];
        let complement: Vec<bool> = delta.iter().map(|d| !d).collect();
        let sum = mix(&x, &z, &delta).unwrap() + mix(&x, &z, &complement).unwrap();
        assert_eq!(sum, &x + &z);
    }

    #[test]
    fn discrete_random_threshold_stays_on_grid_and_is_seeded() {
        let c = cfg(6);
        let scene = synthesize_scene(&c, &[0.1_f64], &[1.0], 9, 1.0, 4).unwrap();
        let scheme = ThresholdScheme::DiscreteRandom {
            h_max: 2.0,
            levels: 8,
            seed: 21,
        };
        let h = scheme.materialize(&scene, &c).unwrap();
        let step = 4.0 / 7.0;
        for v in h.iter() {
            for part in [v.re, v.im] {
                let q = (part + 2.0) / step;
                assert_relative_eq!(q, q.round(), epsilon = 1e-9);
                assert!((-2.0..=2.0).contains(&part));
            }
        }
        assert_eq!(h, scheme.materialize(&scene, &c).unwrap());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn steering_entries_stay_on_the_unit_circle(
                m in 2usize..12,
                theta in -1.55f64..1.55,
            ) {
                let a = steering_vector(&cfg(m), theta).unwrap();
                for i in 0..m {
                    prop_assert!((a[i].norm() - 1.0).abs() < 1e-13);
                }
            }

            #[test]
            fn quantizer_lands_on_the_four_corners_and_is_sign_idempotent(
                entries in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 6),
                scale in 0.01f64..10.0,
            ) {
                let x = DMatrix::from_fn(2, 3, |i, j| {
                    let (re, im) = entries[i * 3 + j];
                    Complex::new(re, im)
                });
                let z = quantize(&x, &DMatrix::zeros(2, 3)).unwrap();
                for v in z.iter() {
                    prop_assert_eq!(v.re.abs(), 1.0);
                    prop_assert_eq!(v.im.abs(), 1.0);
                }
                let rescaled = z.map(|v| v * Complex::new(scale, 0.0));
                prop_assert_eq!(quantize(&rescaled, &DMatrix::zeros(2, 3)).unwrap(), z);
            }

            #[test]
            fn mix_and_its_complement_partition_the_entries(
                entries in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 12),
                delta in proptest::collection::vec(any::<bool>(), 3),
            ) {
                let x = DMatrix::from_fn(3, 2, |i, j| {
                    let (re, im) = entries[i * 2 + j];
                    Complex::new(re, im)
                });
                let z = DMatrix::from_fn(3, 2, |i, j| {
                    let (re, im) = entries[6 + i * 2 + j];
                    Complex::new(re, im)
                });
                let complement: Vec<bool> = delta.iter().map(|d| !d).collect();
                let sum = mix(&x, &z, &delta).unwrap() + mix(&x, &z, &complement).unwrap();
                prop_assert_eq!(sum, &x + &z);
            }
        }
    }

    #[test]
    fn acquisition_ties_the_three_views_together() {
        let c = cfg(5);
        let scene = synthesize_scene(&c, &[0.1_f64, -0.3], &[1.0, 1.0], 7, 0.5, 2).unwrap();
        let delta = [true, false, false, true, false];
        let scheme = ThresholdScheme::DiscreteRandom {
            h_max: 2.0,
            levels: 8,
            seed: 5,
        };
        let snaps = Snapshots::acquire(&scene, &c, &delta, &scheme, 31).unwrap();
        for v in snaps.quantized.iter() {
            assert_eq!(v.re.abs(), 1.0);
            assert_eq!(v.im.abs(), 1.0);
        }
        for t in 0..7 {
            for (i, &hp) in delta.iter().enumerate() {
                let expected = if hp {
                    snaps.unquantized[(i, t)]
                } else {
                    snaps.quantized[(i, t)]
                };
                assert_eq!(snaps.mixed[(i, t)], expected);
            }
        }
    }

    #[test]
    fn optimal_threshold_is_the_noiseless_signal() {
        let c = cfg(4);
        let scene = synthesize_scene(&c, &[0.2_f64], &[1.0], 5, 1.0, 8).unwrap();
        let h = ThresholdScheme::Optimal.materialize(&scene, &c).unwrap();
        let a = steering_matrix(&c, scene.angles()).unwrap();
        assert_eq!(h, &a * scene.source_matrix());
    }
}
