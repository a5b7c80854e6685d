//! Heralded state transfer through a two-qubit coupling.
//!
//! The source qubit carries an unknown state `α|0⟩ + β|1⟩`, the target starts
//! in a known state `|g⟩`. After the coupling `V̂` the source is projected onto
//! `|π⟩`, which leaves the target in `α|φ₀⟩ + β|φ₁⟩`. A filter `Ĝ` that sends
//! `|φ₀⟩ → |0⟩/N` and `|φ₁⟩ → |1⟩/N` completes the transfer with probability
//! `1/N²`. Using both measurement outcomes (feed-forward) adds the two
//! branch probabilities.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Branch, Error, ImpossibleBranches, Result};
use crate::qmath::{
    det_columns, partial_project, svd2, Complex2Matrix, Complex2Vector, Complex4Matrix,
    Complex4Vector, NumericalPolicy, Subsystem, C64, ONE,
};

/// A normalized single-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit(Complex2Vector);

impl PureQubit {
    /// Normalizes `(a, b)`; fails on the zero vector or non-finite input.
    pub fn new(a: C64, b: C64) -> Result<Self> {
        Self::from_vector(Complex2Vector::new(a, b))
    }

    pub fn from_vector(v: Complex2Vector) -> Result<Self> {
        let n = v.norm();
        if !v.is_finite() || n == 0.0 {
            return Err(Error::Parse("cannot normalize a zero or non-finite state".into()));
        }
        Ok(Self(v.scale((1.0 / n).into())))
    }

    /// `cos θ |0⟩ + sin θ |1⟩`.
    pub fn from_angle(theta: f64) -> Self {
        Self(Complex2Vector::real(theta.cos(), theta.sin()))
    }

    pub fn zero() -> Self {
        Self(Complex2Vector::basis(0))
    }

    pub fn one() -> Self {
        Self(Complex2Vector::basis(1))
    }

    pub fn plus() -> Self {
        Self::from_angle(FRAC_PI_4)
    }

    pub fn minus() -> Self {
        Self::from_angle(FRAC_PI_4).perp()
    }

    /// The orthogonal state. For `cos κ|0⟩ + sin κ|1⟩` this is
    /// `sin κ|0⟩ − cos κ|1⟩`.
    pub fn perp(&self) -> Self {
        let [a, b] = self.0 .0;
        Self(Complex2Vector::new(b.conj(), -a.conj()))
    }

    pub fn vector(&self) -> &Complex2Vector {
        &self.0
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.0 .0
    }
}

/// Anything that acts as a two-qubit coupling `V̂` (source ⊗ target).
pub trait Coupling {
    fn operator(&self) -> Complex4Matrix;
}

impl Coupling for Complex4Matrix {
    fn operator(&self) -> Complex4Matrix {
        *self
    }
}

/// A coupling diagonal in the computational basis with entries of modulus at
/// most one, so that `V̂†V̂ ≤ I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionSpec {
    diag: [C64; 4],
}

impl InteractionSpec {
    pub fn new(diag: [C64; 4]) -> Result<Self> {
        for d in diag {
            let m = d.norm();
            if !(m <= 1.0 + 1e-12) {
                return Err(Error::out_of_range("|diagonal entry|", m, "[0, 1]"));
            }
        }
        Ok(Self { diag })
    }

    /// `diag(1, t₁, t₁, t₁₁)`.
    pub fn symmetric(t1: f64, t11: f64) -> Result<Self> {
        for (what, t) in [("t1", t1), ("t11", t11)] {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::out_of_range(what, t, "[-1, 1]"));
            }
        }
        Self::new([ONE, t1.into(), t1.into(), t11.into()])
    }

    /// Post-selected interference on a polarizing beam splitter:
    /// `|00⟩⟨00| − |11⟩⟨11|`.
    pub fn parity_check() -> Self {
        Self {
            diag: [ONE, 0.0.into(), 0.0.into(), -ONE],
        }
    }

    /// Ideal partially polarizing beam splitter with vertical amplitude
    /// transmittance `t_v`: `t₁ = t_v`, `t₁₁ = 2t_v² − 1`.
    pub fn ppbs(t_v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_v) {
            return Err(Error::out_of_range("t_V", t_v, "[0, 1]"));
        }
        Self::symmetric(t_v, 2.0 * t_v * t_v - 1.0)
    }

    /// Same as [`InteractionSpec::ppbs`] but parametrized by the intensity
    /// transmittance `T_V = t_v²`.
    pub fn ppbs_intensity(tv_squared: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tv_squared) {
            return Err(Error::out_of_range("T_V", tv_squared, "[0, 1]"));
        }
        Self::ppbs(tv_squared.sqrt())
    }

    pub fn diagonal(&self) -> [C64; 4] {
        self.diag
    }

    /// `d₀₁ = d₁₀`, the exchange-symmetric family.
    pub fn is_symmetric(&self) -> bool {
        (self.diag[1] - self.diag[2]).norm() <= 1e-12
    }

    /// `Ŵ_j` with `V̂(|j⟩ ⊗ |g⟩) = |j⟩ ⊗ Ŵ_j|g⟩`.
    pub fn target_factor(&self, j: usize) -> Complex2Matrix {
        Complex2Matrix::diag(self.diag[2 * j], self.diag[2 * j + 1])
    }
}

impl Coupling for InteractionSpec {
    fn operator(&self) -> Complex4Matrix {
        Complex4Matrix::diag(self.diag)
    }
}

/// Preparation angle `ω` of `|g⟩ = cos ω|0⟩ + sin ω|1⟩` and measurement angle
/// `κ` of `|π⟩ = cos κ|0⟩ + sin κ|1⟩`, both in radians on `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationAngles {
    pub omega: f64,
    pub kappa: f64,
}

impl PreparationAngles {
    pub fn new(omega: f64, kappa: f64) -> Result<Self> {
        let range = 0.0..=std::f64::consts::FRAC_PI_2 + 1e-12;
        if !range.contains(&omega) {
            return Err(Error::out_of_range("omega", omega, "[0, pi/2]"));
        }
        if !range.contains(&kappa) {
            return Err(Error::out_of_range("kappa", kappa, "[0, pi/2]"));
        }
        Ok(Self { omega, kappa })
    }

    pub fn target(&self) -> PureQubit {
        PureQubit::from_angle(self.omega)
    }

    pub fn measurement(&self) -> PureQubit {
        PureQubit::from_angle(self.kappa)
    }
}

/// The two unnormalized target states `|φ_j⟩ = ⟨π|V̂|j, g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalStatePair {
    pub phi0: Complex2Vector,
    pub phi1: Complex2Vector,
    /// `⟨φ₀|φ₁⟩`.
    pub gram: C64,
    /// `⟨φ₀|φ₀⟩, ⟨φ₁|φ₁⟩`.
    pub norms_sqr: [f64; 2],
}

impl ConditionalStatePair {
    pub fn new(phi0: Complex2Vector, phi1: Complex2Vector) -> Self {
        Self {
            phi0,
            phi1,
            gram: phi0.inner(&phi1),
            norms_sqr: [phi0.norm_sqr(), phi1.norm_sqr()],
        }
    }

    pub fn det(&self) -> C64 {
        det_columns(&self.phi0, &self.phi1)
    }

    /// The map `|ψ⟩ → ⟨π|V̂(|ψ⟩ ⊗ |g⟩)`, i.e. the matrix with columns `φ₀, φ₁`.
    pub fn as_operator(&self) -> Complex2Matrix {
        Complex2Matrix::from_columns(&self.phi0, &self.phi1)
    }
}

pub fn conditional_states<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    pi: &PureQubit,
) -> ConditionalStatePair {
    let v = coupling.operator();
    let [phi0, phi1] = [0, 1].map(|j| {
        let input = Complex4Vector::kron(&Complex2Vector::basis(j), g.vector());
        partial_project(pi.vector(), &(v * input), Subsystem::Source)
    });
    ConditionalStatePair::new(phi0, phi1)
}

/// A filter `Ĝ` with unit largest singular value and `Ĝ|φ_j⟩ = |j⟩/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumFilter {
    pub g: Complex2Matrix,
    /// Normalization factor; real and positive (the largest singular value
    /// of the unnormalized filter).
    pub n: f64,
    /// `1/N²`.
    pub success: f64,
}

pub fn synthesize_filter(pair: &ConditionalStatePair) -> Result<QuantumFilter> {
    synthesize_filter_with(pair, &NumericalPolicy::DEFAULT)
}

pub fn synthesize_filter_with(
    pair: &ConditionalStatePair,
    policy: &NumericalPolicy,
) -> Result<QuantumFilter> {
    let det = pair.det();
    let scale = pair.norms_sqr[0].max(pair.norms_sqr[1]);
    if !(det.norm() > policy.dependence_rel * scale) {
        return Err(Error::LinearDependence { det: det.norm() });
    }
    // |0⟩⟨φ₁⊥|/⟨φ₁⊥|φ₀⟩ + |1⟩⟨φ₀⊥|/⟨φ₀⊥|φ₁⟩; independent of the phase and
    // length chosen for the orthogonal vectors
    let perp0 = pair.phi0.perp();
    let perp1 = pair.phi1.perp();
    let row0 = Complex2Vector::basis(0).outer(&perp1).scale(ONE / perp1.inner(&pair.phi0));
    let row1 = Complex2Vector::basis(1).outer(&perp0).scale(ONE / perp0.inner(&pair.phi1));
    let unnormalized = row0 + row1;
    let n = svd2(&unnormalized).sigma[0];
    Ok(QuantumFilter {
        g: unnormalized.scale((1.0 / n).into()),
        n,
        success: 1.0 / (n * n),
    })
}

/// `K = Ĝ ⟨π|V̂(· ⊗ |g⟩)`, which equals `I/N` for a correctly synthesized filter.
pub fn branch_operator<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    pi: &PureQubit,
    filter: &QuantumFilter,
) -> Complex2Matrix {
    filter.g * conditional_states(coupling, g, pi).as_operator()
}

/// Filters for both measurement outcomes plus the feed-forward correction
/// relating them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedForwardPlan {
    pub kappa: f64,
    pub filter_plus: Option<QuantumFilter>,
    pub filter_minus: Option<QuantumFilter>,
    /// Unitary `C` with `Ĝ₋ = C Ĝ₊`, when one exists. For a diagonal coupling
    /// measured at `κ = π/4` this is `Û_π = diag(1, −1)`.
    pub correction: Option<Complex2Matrix>,
    /// `1/N₊² + 1/N₋²`, or the single surviving branch in degraded mode.
    pub total_success: f64,
    /// Set when one branch admits no filter and only the other is used.
    pub degraded: Option<ImpossibleBranches>,
}

impl FeedForwardPlan {
    pub fn filter(&self, branch: Branch) -> Option<&QuantumFilter> {
        match branch {
            Branch::Plus => self.filter_plus.as_ref(),
            Branch::Minus => self.filter_minus.as_ref(),
        }
    }
}

/// `Û_π = |0⟩⟨0| − |1⟩⟨1|`.
pub fn phase_flip() -> Complex2Matrix {
    Complex2Matrix::pauli_z()
}

pub fn feed_forward_plan<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    kappa: f64,
) -> Result<FeedForwardPlan> {
    feed_forward_plan_with(coupling, g, kappa, &NumericalPolicy::DEFAULT)
}

pub fn feed_forward_plan_with<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    kappa: f64,
    policy: &NumericalPolicy,
) -> Result<FeedForwardPlan> {
    let pi = PureQubit::from_angle(kappa);
    let plus = synthesize_filter_with(&conditional_states(coupling, g, &pi), policy).ok();
    let minus = synthesize_filter_with(&conditional_states(coupling, g, &pi.perp()), policy).ok();

    let (total_success, degraded) = match (&plus, &minus) {
        (Some(p), Some(m)) => (p.success + m.success, None),
        (Some(p), None) => (p.success, Some(ImpossibleBranches::One(Branch::Minus))),
        (None, Some(m)) => (m.success, Some(ImpossibleBranches::One(Branch::Plus))),
        (None, None) => return Err(Error::BranchImpossible(ImpossibleBranches::Both)),
    };

    let correction = match (&plus, &minus) {
        (Some(p), Some(m)) => {
            let inv = invert2(&p.g);
            let c = m.g * inv;
            c.is_unitary(policy.contract_tol).then_some(c)
        }
        _ => None,
    };

    Ok(FeedForwardPlan {
        kappa,
        filter_plus: plus,
        filter_minus: minus,
        correction,
        total_success,
        degraded,
    })
}

fn invert2(m: &Complex2Matrix) -> Complex2Matrix {
    let [[a, b], [c, d]] = m.0;
    Complex2Matrix([[d, -b], [-c, a]]).scale(ONE / m.det())
}

/// `Ĝ = Û₁ D̂ Û₂` with `D̂ = diag(1, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDecomposition {
    pub u1: Complex2Matrix,
    pub u2: Complex2Matrix,
    /// Attenuation factor `σ_min/σ_max`, in `(0, 1]` for an invertible filter.
    pub lambda: f64,
}

impl FilterDecomposition {
    pub fn attenuator(&self) -> Complex2Matrix {
        Complex2Matrix::diag(ONE, self.lambda.into())
    }

    pub fn reconstruct(&self) -> Complex2Matrix {
        self.u1 * self.attenuator() * self.u2
    }
}

pub fn decompose_filter(f: &QuantumFilter) -> FilterDecomposition {
    let svd = svd2(&f.g);
    let lambda = if svd.sigma[0] > 0.0 { svd.sigma[1] / svd.sigma[0] } else { 0.0 };
    FilterDecomposition {
        u1: svd.u,
        u2: svd.v.adjoint(),
        lambda,
    }
}

/// `⟨φ₁|φ₀⟩ = 0` and `⟨φ₀|φ₀⟩ = ⟨φ₁|φ₁⟩`, both within `tol`. When these hold
/// the filter is proportional to a unitary.
pub fn check_ortho_conditions(pair: &ConditionalStatePair, tol: f64) -> bool {
    pair.gram.norm() <= tol && (pair.norms_sqr[0] - pair.norms_sqr[1]).abs() <= tol
}

fn check_strong_coupling(tv: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(Error::out_of_range("t_V", tv, "[0, 1]"));
    }
    let tv_squared = tv * tv;
    if tv_squared >= 0.5 {
        return Err(Error::TooWeakCoupling { tv_squared });
    }
    Ok(tv_squared)
}

/// The unique real settings `tan ω = tan κ = 1/√(1 − 2t_v²)` for which the
/// ideal PPBS coupling needs no filtering.
pub fn simplified_settings(tv: f64) -> Result<PreparationAngles> {
    let tv_squared = check_strong_coupling(tv)?;
    let angle = (1.0 / (1.0 - 2.0 * tv_squared).sqrt()).atan();
    Ok(PreparationAngles {
        omega: angle,
        kappa: angle,
    })
}

/// Single-branch success of the unfiltered protocol,
/// `(1 − 2t_v²) / (4(1 − t_v²))`.
pub fn simplified_success(tv: f64) -> Result<f64> {
    let tv_squared = check_strong_coupling(tv)?;
    Ok((1.0 - 2.0 * tv_squared) / (4.0 * (1.0 - tv_squared)))
}

/// Kraus operator of the unfiltered source measurement, `⟨π|V̂(· ⊗ |g⟩)`.
pub fn measurement_operator<V: Coupling + ?Sized>(
    coupling: &V,
    g: &PureQubit,
    pi: &PureQubit,
) -> Complex2Matrix {
    conditional_states(coupling, g, pi).as_operator()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::ZERO;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    const TV2: f64 = 0.334;

    fn rad(deg: f64) -> f64 {
        deg.to_radians()
    }

    /// Branch success without any filter: the smallest squared singular value
    /// of `[φ₀ φ₁]`, from the characteristic polynomial of its Gram matrix.
    fn branch_success_oracle(pair: &ConditionalStatePair) -> f64 {
        let f = pair.norms_sqr[0] + pair.norms_sqr[1];
        let d = pair.det().norm_sqr();
        2.0 * d / (f + (f * f - 4.0 * d).max(0.0).sqrt())
    }

    #[test]
    fn symmetric_interaction_examples() {
        let qpc = InteractionSpec::symmetric(0.0, -1.0).unwrap();
        assert_eq!(qpc, InteractionSpec::parity_check());

        let tv = TV2.sqrt();
        let ppbs = InteractionSpec::symmetric(tv, 2.0 * TV2 - 1.0).unwrap();
        let d = ppbs.diagonal();
        assert!((d[1].re - 0.577927331).abs() < 1e-9);
        assert!((d[3].re + 0.332).abs() < 1e-15);
        let other = InteractionSpec::ppbs(tv).unwrap().operator();
        assert!(ppbs.operator().max_abs_diff(&other) < 1e-15);

        let id = InteractionSpec::symmetric(1.0, 1.0).unwrap();
        assert_eq!(id.operator(), Complex4Matrix::identity());

        assert!(matches!(InteractionSpec::symmetric(1.2, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(InteractionSpec::symmetric(0.0, -1.5), Err(Error::OutOfRange { .. })));
        assert!(InteractionSpec::new([C64::new(0.0, 1.0); 4]).is_ok());
        assert!(InteractionSpec::new([C64::new(0.9, 0.9), ONE, ONE, ONE]).is_err());
    }

    #[test]
    fn conditional_states_parity_check() {
        let qpc = InteractionSpec::parity_check();
        let plus = PureQubit::plus();
        let pair = conditional_states(&qpc, &plus, &plus);
        assert!(pair.phi0.max_abs_diff(&Complex2Vector::real(0.5, 0.0)) < 1e-15);
        assert!(pair.phi1.max_abs_diff(&Complex2Vector::real(0.0, -0.5)) < 1e-15);
    }

    #[test]
    fn conditional_states_identity_coupling() {
        let id = InteractionSpec::symmetric(1.0, 1.0).unwrap();
        let g = PureQubit::from_angle(0.3);
        let pair = conditional_states(&id, &g, &PureQubit::zero());
        assert!(pair.phi0.max_abs_diff(g.vector()) < 1e-15);
        assert_eq!(pair.phi1, Complex2Vector::zero());
    }

    #[test]
    fn conditional_states_match_target_factors() {
        let (t1, t11) = (0.6, -0.28);
        let v = InteractionSpec::symmetric(t1, t11).unwrap();
        for omega in [0.1, 0.7, 1.3] {
            let g = PureQubit::from_angle(omega);
            let pair = conditional_states(&v, &g, &PureQubit::plus());
            let (c, s) = (omega.cos(), omega.sin());
            let want0 = Complex2Vector::real(c * FRAC_1_SQRT_2, t1 * s * FRAC_1_SQRT_2);
            let want1 = Complex2Vector::real(t1 * c * FRAC_1_SQRT_2, t11 * s * FRAC_1_SQRT_2);
            assert!(pair.phi0.max_abs_diff(&want0) < 1e-15);
            assert!(pair.phi1.max_abs_diff(&want1) < 1e-15);
            // same thing through Ŵ_j
            let w0 = (v.target_factor(0) * *g.vector()).scale(FRAC_1_SQRT_2.into());
            assert!(pair.phi0.max_abs_diff(&w0) < 1e-15);
        }
    }

    #[test]
    fn filter_for_orthogonal_equal_norm_states_is_unitary() {
        let pair = ConditionalStatePair::new(
            Complex2Vector::real(FRAC_1_SQRT_2, 0.0),
            Complex2Vector::real(0.0, FRAC_1_SQRT_2),
        );
        let f = synthesize_filter(&pair).unwrap();
        assert!(f.g.phase_invariant_distance(&Complex2Matrix::identity()) < 1e-12);
        assert!((f.n - 2f64.sqrt()).abs() < 1e-12);
        assert!((f.success - 0.5).abs() < 1e-12);
    }

    #[test]
    fn filter_separates_nonorthogonal_states() {
        let phi0 = Complex2Vector::basis(0);
        let phi1 = Complex2Vector::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let pair = ConditionalStatePair::new(phi0, phi1);
        let f = synthesize_filter(&pair).unwrap();
        let inv_n = C64::from(1.0 / f.n);
        assert!((f.g * phi0).max_abs_diff(&Complex2Vector::basis(0).scale(inv_n)) < 1e-12);
        assert!((f.g * phi1).max_abs_diff(&Complex2Vector::basis(1).scale(inv_n)) < 1e-12);
        assert!((svd2(&f.g).sigma[0] - 1.0).abs() < 1e-12);
        assert!((f.success - branch_success_oracle(&pair)).abs() < 1e-12);
        // σ_min² of [[1, 1/√2], [0, 1/√2]] by hand
        let want = 0.5 * (2.0 - 2f64.sqrt());
        assert!((f.success - want).abs() < 1e-12);
    }

    #[test]
    fn filter_rejects_dependent_states() {
        let phi = Complex2Vector::real(0.6, 0.8);
        let pair = ConditionalStatePair::new(phi, phi);
        assert!(matches!(synthesize_filter(&pair), Err(Error::LinearDependence { .. })));
        let pair = ConditionalStatePair::new(phi, Complex2Vector::zero());
        assert!(matches!(synthesize_filter(&pair), Err(Error::LinearDependence { .. })));
    }

    #[test]
    fn dependence_threshold_is_relative() {
        // tiny but well-conditioned states are still separable
        let s = 1e-6;
        let pair = ConditionalStatePair::new(
            Complex2Vector::real(s, 0.0),
            Complex2Vector::real(0.0, s),
        );
        let f = synthesize_filter(&pair).unwrap();
        assert!((f.success - s * s).abs() < 1e-24);
    }

    #[test]
    fn branch_operator_examples() {
        let qpc = InteractionSpec::parity_check();
        let plus = PureQubit::plus();
        let f = synthesize_filter(&conditional_states(&qpc, &plus, &plus)).unwrap();
        assert!(f.g.max_abs_diff(&Complex2Matrix::diag(ONE, -ONE)) < 1e-12);
        let k = branch_operator(&qpc, &plus, &plus, &f);
        assert!(k.max_abs_diff(&Complex2Matrix::identity().scale(0.5.into())) < 1e-12);

        let v = InteractionSpec::ppbs_intensity(TV2).unwrap();
        for deg in [5.0, 33.0, 55.2, 80.0] {
            let g = PureQubit::from_angle(rad(deg));
            let f = synthesize_filter(&conditional_states(&v, &g, &plus)).unwrap();
            let k = branch_operator(&v, &g, &plus, &f).scale(f.n.into());
            assert!(k.phase_invariant_distance(&Complex2Matrix::identity()) < 1e-9);
        }

        let id = InteractionSpec::symmetric(1.0, 1.0).unwrap();
        let pair = conditional_states(&id, &PureQubit::from_angle(0.4), &PureQubit::zero());
        assert!(synthesize_filter(&pair).is_err());
    }

    #[test]
    fn feed_forward_parity_check() {
        let plan =
            feed_forward_plan(&InteractionSpec::parity_check(), &PureQubit::plus(), FRAC_PI_4).unwrap();
        assert!((plan.total_success - 0.5).abs() < 1e-12);
        assert!((plan.filter_plus.unwrap().success - 0.25).abs() < 1e-12);
        assert!((plan.filter_minus.unwrap().success - 0.25).abs() < 1e-12);
        assert!(plan.correction.unwrap().max_abs_diff(&phase_flip()) < 1e-12);
        assert!(plan.degraded.is_none());
    }

    #[test]
    fn feed_forward_at_paper_optimum() {
        let v = InteractionSpec::ppbs_intensity(TV2).unwrap();
        let g = PureQubit::from_angle(rad(55.2));
        let plan = feed_forward_plan(&v, &g, FRAC_PI_4).unwrap();
        // dense-grid value, see optimize tests
        assert!((plan.total_success - 0.173920687).abs() < 1e-6);
    }

    #[test]
    fn feed_forward_identity_coupling_is_impossible() {
        let id = InteractionSpec::symmetric(1.0, 1.0).unwrap();
        let err = feed_forward_plan(&id, &PureQubit::zero(), FRAC_PI_4).unwrap_err();
        assert!(matches!(err, Error::BranchImpossible(ImpossibleBranches::Both)));
    }

    #[test]
    fn feed_forward_degrades_to_single_branch() {
        // a full swap with |g⟩ = |π⟩ leaves nothing for the π⊥ outcome
        let kappa = 0.6;
        let g = PureQubit::from_angle(kappa);
        let plan = feed_forward_plan(&Complex4Matrix::swap(), &g, kappa).unwrap();
        assert_eq!(plan.degraded, Some(ImpossibleBranches::One(Branch::Minus)));
        assert!(plan.filter_minus.is_none());
        assert!(plan.correction.is_none());
        let plus = plan.filter_plus.unwrap();
        assert_eq!(plan.total_success, plus.success);
        assert!((plus.success - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let h = FRAC_1_SQRT_2;
        let unitary = QuantumFilter {
            g: Complex2Matrix::real([[h, h], [h, -h]]),
            n: 1.0,
            success: 1.0,
        };
        assert!((decompose_filter(&unitary).lambda - 1.0).abs() < 1e-12);

        let diag = QuantumFilter {
            g: Complex2Matrix::diag(ONE, 0.3.into()),
            n: 1.0,
            success: 1.0,
        };
        let d = decompose_filter(&diag);
        assert!((d.lambda - 0.3).abs() < 1e-15);
        assert!(d.u1.phase_invariant_distance(&Complex2Matrix::identity()) < 1e-12);
        assert!(d.u2.phase_invariant_distance(&Complex2Matrix::identity()) < 1e-12);
        assert!(d.reconstruct().max_abs_diff(&diag.g) < 1e-12);
    }

    #[test]
    fn ortho_conditions_examples() {
        let tv = 0.5; // t_V² = 0.25
        let angles = simplified_settings(tv).unwrap();
        let v = InteractionSpec::ppbs(tv).unwrap();
        let pair = conditional_states(&v, &angles.target(), &angles.measurement());
        assert!(check_ortho_conditions(&pair, 1e-12));

        let pair = conditional_states(&v, &PureQubit::from_angle(0.3), &PureQubit::from_angle(0.9));
        assert!(!check_ortho_conditions(&pair, 1e-9));

        let plus = PureQubit::plus();
        let pair = conditional_states(&InteractionSpec::parity_check(), &plus, &plus);
        assert!(check_ortho_conditions(&pair, 1e-12));
        assert!((pair.norms_sqr[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn simplified_settings_examples() {
        let a = simplified_settings(0.0).unwrap();
        assert!((a.omega - FRAC_PI_4).abs() < 1e-15 && (a.kappa - FRAC_PI_4).abs() < 1e-15);

        let a = simplified_settings(TV2.sqrt()).unwrap();
        assert!((a.omega.to_degrees() - 60.0497).abs() < 1e-4);
        assert_eq!(a.omega, a.kappa);

        assert!(matches!(
            simplified_settings(0.5f64.sqrt()),
            Err(Error::TooWeakCoupling { .. })
        ));
    }

    #[test]
    fn simplified_success_examples() {
        assert!((simplified_success(0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((simplified_success(TV2.sqrt()).unwrap() - 0.124624624624).abs() < 1e-11);
        let near = simplified_success((0.5f64 - 1e-12).sqrt()).unwrap();
        assert!((0.0..1e-11).contains(&near));
        assert!(simplified_success(0.8).is_err());
    }

    #[test]
    fn simplified_settings_need_no_filter() {
        for tv2 in [0.01, 0.1, 0.25, 0.334, 0.45] {
            let tv = f64::sqrt(tv2);
            let angles = simplified_settings(tv).unwrap();
            let v = InteractionSpec::ppbs(tv).unwrap();
            let pair = conditional_states(&v, &angles.target(), &angles.measurement());
            assert!(check_ortho_conditions(&pair, 1e-12));
            let f = synthesize_filter(&pair).unwrap();
            assert!((decompose_filter(&f).lambda - 1.0).abs() < 1e-9);
            assert!((f.success - simplified_success(tv).unwrap()).abs() < 1e-12);
            assert!((pair.norms_sqr[0] - f.success).abs() < 1e-12);
        }
    }

    #[test]
    fn perp_matches_measurement_convention() {
        let k = 0.37;
        let p = PureQubit::from_angle(k).perp();
        let want = Complex2Vector::real(k.sin(), -k.cos());
        assert!(p.vector().max_abs_diff(&want) < 1e-15);
        assert!(PureQubit::new(ZERO, ZERO).is_err());
        assert!(PreparationAngles::new(FRAC_PI_2 + 0.1, 0.0).is_err());
    }

    fn arb_setting() -> impl Strategy<Value = (InteractionSpec, PureQubit, PureQubit)> {
        let entry = (0.05..1.0f64, -3.2..3.2f64).prop_map(|(r, th)| C64::from_polar(r, th));
        let qubit = (0.0..std::f64::consts::PI, -3.2..3.2f64).prop_map(|(t, ph)| {
            PureQubit::new((t / 2.0).cos().into(), C64::from_polar((t / 2.0).sin(), ph)).unwrap()
        });
        (prop::array::uniform4(entry), qubit.clone(), qubit)
            .prop_map(|(d, g, pi)| (InteractionSpec::new(d).unwrap(), g, pi))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn filter_contract_holds((v, g, pi) in arb_setting()) {
            let pair = conditional_states(&v, &g, &pi);
            if let Ok(f) = synthesize_filter(&pair) {
                let smax = svd2(&f.g).sigma[0];
                prop_assert!((1.0 - 1e-9..=1.0 + 1e-12).contains(&smax));
                let inv_n = C64::from(1.0 / f.n);
                let tol = 1e-9 / f.n.min(1.0);
                prop_assert!((f.g * pair.phi0).max_abs_diff(&Complex2Vector::basis(0).scale(inv_n)) < tol);
                prop_assert!((f.g * pair.phi1).max_abs_diff(&Complex2Vector::basis(1).scale(inv_n)) < tol);
                let oracle = branch_success_oracle(&pair);
                prop_assert!((f.success - oracle).abs() <= 1e-9 * oracle.max(1e-3));
                let d = decompose_filter(&f);
                prop_assert!(d.reconstruct().max_abs_diff(&f.g) < 1e-9);
                prop_assert!(d.u1.is_unitary(1e-12) && d.u2.is_unitary(1e-12));
                prop_assert!(d.lambda > 0.0 && d.lambda <= 1.0 + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn transfer_is_faithful_and_input_independent(
            (v, g, pi) in arb_setting(),
            t in 0.0..std::f64::consts::PI,
            ph in -3.2..3.2f64,
        ) {
            let pair = conditional_states(&v, &g, &pi);
            prop_assume!(pair.det().norm() > 1e-4);
            let f = synthesize_filter(&pair).unwrap();
            let k = branch_operator(&v, &g, &pi, &f);
            let psi = PureQubit::new((t / 2.0).cos().into(), C64::from_polar((t / 2.0).sin(), ph)).unwrap();
            let out = k * *psi.vector();
            let p = out.norm_sqr();
            prop_assert!((p - f.success).abs() < 1e-9);
            let fid = psi.vector().inner(&out).norm_sqr() / p;
            prop_assert!(fid >= 1.0 - 1e-9);
        }

        #[test]
        fn diagonal_coupling_feed_forward_is_phase_flip(
            d in prop::array::uniform4((0.05..1.0f64, -3.2..3.2f64).prop_map(|(r, th)| C64::from_polar(r, th))),
            omega in 0.05..1.52f64,
        ) {
            let v = InteractionSpec::new(d).unwrap();
            let g = PureQubit::from_angle(omega);
            let plan = feed_forward_plan(&v, &g, FRAC_PI_4).unwrap();
            let (p, m) = (plan.filter_plus.unwrap(), plan.filter_minus.unwrap());
            prop_assert!(m.g.max_abs_diff(&(phase_flip() * p.g)) < 1e-9);
            prop_assert!((p.n - m.n).abs() < 1e-9 * p.n);
            prop_assert!(plan.correction.unwrap().max_abs_diff(&phase_flip()) < 1e-9);
        }
    }
}
