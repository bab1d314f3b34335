//! Exact Heisenberg-picture algebra over quadrature observables.
//!
//! Every observable is a linear combination of the quadratures of a fixed
//! set of *initial* modes (the basis), plus a scalar mean. Squeezing,
//! beamsplitting and feedforward displacement are linear maps on these
//! expressions, so a whole optical network reduces to coefficient tables
//! that can be evaluated exactly.

use std::collections::BTreeMap;

use thiserror::Error;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),
}

/// Identifies one initial mode of the network basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisId(u32);

impl BasisId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Registry of initial modes. Allocates unique [`BasisId`]s and keeps
/// their labels for diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Basis {
    labels: Vec<String>,
}

impl Basis {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a new initial mode. Labels must be unique within one network.
    pub fn alloc(&mut self, label: &str) -> Result<BasisId, AlgebraError> {
        if label.is_empty() || self.labels.iter().any(|l| l == label) {
            return Err(AlgebraError::DuplicateLabel(label.to_string()));
        }
        let id = BasisId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        Ok(id)
    }

    /// A fresh mode: X = 1·X⁰, Y = 1·Y⁰, zero mean.
    pub fn fresh_mode(&mut self, label: &str) -> Result<ModeExpr, AlgebraError> {
        let id = self.alloc(label)?;
        Ok(ModeExpr {
            x: QuadExpr::basis_x(id),
            y: QuadExpr::basis_y(id),
        })
    }

    pub fn label(&self, id: BasisId) -> &str {
        &self.labels[id.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = BasisId> + '_ {
        (0..self.labels.len() as u32).map(BasisId)
    }
}

/// Weights on one basis mode's X⁰ and Y⁰ quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coeff {
    pub x: f64,
    pub y: f64,
}

/// A quadrature observable: sparse linear combination of basis quadratures
/// plus a classical mean.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadExpr {
    terms: BTreeMap<BasisId, Coeff>,
    mean: f64,
}

impl QuadExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis_x(id: BasisId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Coeff { x: 1.0, y: 0.0 });
        Self { terms, mean: 0.0 }
    }

    pub fn basis_y(id: BasisId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Coeff { x: 0.0, y: 1.0 });
        Self { terms, mean: 0.0 }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.mean = mean;
    }

    pub fn coeff(&self, id: BasisId) -> Coeff {
        self.terms.get(&id).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (BasisId, Coeff)> + '_ {
        self.terms.iter().map(|(&id, &c)| (id, c))
    }

    /// self + factor·other, means included. Exact-zero coefficient pairs
    /// are pruned so an absent basis id stays equivalent to zero.
    pub fn add_scaled(&self, other: &QuadExpr, factor: f64) -> QuadExpr {
        let mut out = self.clone();
        for (&id, &c) in &other.terms {
            let e = out.terms.entry(id).or_default();
            e.x += factor * c.x;
            e.y += factor * c.y;
        }
        out.terms.retain(|_, c| c.x != 0.0 || c.y != 0.0);
        out.mean += factor * other.mean;
        out
    }

    pub fn add(&self, other: &QuadExpr) -> QuadExpr {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &QuadExpr) -> QuadExpr {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> QuadExpr {
        QuadExpr::zero().add_scaled(self, factor)
    }

    /// Numeric value for a concrete draw of basis quadrature fluctuations.
    /// `fluct[id] = (δX⁰, δY⁰)` for each basis mode.
    pub fn eval(&self, fluct: &[(f64, f64)]) -> f64 {
        let mut v = self.mean;
        for (&id, &c) in &self.terms {
            let (fx, fy) = fluct[id.index()];
            v += c.x * fx + c.y * fy;
        }
        v
    }

    pub fn max_abs_coeff_diff(&self, other: &QuadExpr) -> f64 {
        let mut max = (self.mean - other.mean).abs();
        let ids: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        for id in ids {
            let a = self.coeff(id);
            let b = other.coeff(id);
            max = max.max((a.x - b.x).abs()).max((a.y - b.y).abs());
        }
        max
    }
}

/// One optical mode: its X and Y quadrature expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpr {
    pub x: QuadExpr,
    pub y: QuadExpr,
}

impl ModeExpr {
    /// Sets the classical displacement of the mode.
    pub fn with_means(mut self, x_mean: f64, y_mean: f64) -> Self {
        self.x.set_mean(x_mean);
        self.y.set_mean(y_mean);
        self
    }
}

/// Per-basis-mode quadrature variances. Anything not listed defaults to the
/// unit vacuum (1, 1).
#[derive(Debug, Clone, Default)]
pub struct NoiseModel {
    variances: BTreeMap<BasisId, (f64, f64)>,
}

impl NoiseModel {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: BasisId, v_x: f64, v_y: f64) {
        assert!(v_x > 0.0 && v_y > 0.0, "variances must be positive");
        self.variances.insert(id, (v_x, v_y));
    }

    pub fn get(&self, id: BasisId) -> (f64, f64) {
        self.variances.get(&id).copied().unwrap_or((1.0, 1.0))
    }
}

/// Two-mode squeezing with correlation parameter `r`.
///
/// For r > 0 the outputs squeeze X₁−X₂ and Y₁+Y₂; for r < 0 the
/// conjugate combinations.
pub fn two_mode_squeeze(
    m1: &ModeExpr,
    m2: &ModeExpr,
    r: f64,
) -> Result<(ModeExpr, ModeExpr), AlgebraError> {
    if !r.is_finite() {
        return Err(AlgebraError::NonFinite("r"));
    }
    let (ep, em) = ((r.exp()) / SQRT_2, (-r).exp() / SQRT_2);
    let out1 = ModeExpr {
        x: m1.x.scale(ep).add_scaled(&m2.x, em),
        y: m1.y.scale(em).add_scaled(&m2.y, ep),
    };
    let out2 = ModeExpr {
        x: m1.x.scale(ep).add_scaled(&m2.x, -em),
        y: m1.y.scale(em).add_scaled(&m2.y, -ep),
    };
    Ok((out1, out2))
}

/// Which combination the first beamsplitter output carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsConvention {
    /// Outputs ((m1−m2)/√2, (m1+m2)/√2).
    MinusFirst,
    /// Outputs ((m1+m2)/√2, (m1−m2)/√2).
    PlusFirst,
}

/// Balanced (50/50) beamsplitter applied component-wise to X and Y.
pub fn beamsplit(m1: &ModeExpr, m2: &ModeExpr, convention: BsConvention) -> (ModeExpr, ModeExpr) {
    let inv = 1.0 / SQRT_2;
    let minus = ModeExpr {
        x: m1.x.scale(inv).add_scaled(&m2.x, -inv),
        y: m1.y.scale(inv).add_scaled(&m2.y, -inv),
    };
    let plus = ModeExpr {
        x: m1.x.scale(inv).add_scaled(&m2.x, inv),
        y: m1.y.scale(inv).add_scaled(&m2.y, inv),
    };
    match convention {
        BsConvention::MinusFirst => (minus, plus),
        BsConvention::PlusFirst => (plus, minus),
    }
}

/// Feedforward displacement: adds √2·gain times the measured (X, Y)
/// expressions to the target mode.
pub fn add_scaled(target: &ModeExpr, x_src: &QuadExpr, y_src: &QuadExpr, gain: f64) -> ModeExpr {
    let g = SQRT_2 * gain;
    ModeExpr {
        x: target.x.add_scaled(x_src, g),
        y: target.y.add_scaled(y_src, g),
    }
}

/// Second moment of the fluctuation of `e` under noise model `n`.
/// The mean does not contribute.
pub fn variance(e: &QuadExpr, n: &NoiseModel) -> f64 {
    let mut v = 0.0;
    for (id, c) in e.terms() {
        let (vx, vy) = n.get(id);
        v += c.x * c.x * vx + c.y * c.y * vy;
    }
    v
}

/// Symmetric covariance of two fluctuations; covariance(e, e) = variance(e).
pub fn covariance(e1: &QuadExpr, e2: &QuadExpr, n: &NoiseModel) -> f64 {
    let mut v = 0.0;
    for (id, c) in e1.terms() {
        let d = e2.coeff(id);
        let (vx, vy) = n.get(id);
        v += c.x * d.x * vx + c.y * d.y * vy;
    }
    v
}

/// Coefficient of the commutator [e1, e2] in units of [X⁰, Y⁰].
pub fn commutator(e1: &QuadExpr, e2: &QuadExpr) -> f64 {
    let mut v = 0.0;
    for (id, c) in e1.terms() {
        let d = e2.coeff(id);
        v += c.x * d.y - c.y * d.x;
    }
    v
}

/// [X, Y] coefficient of a mode; equals 1 for any physically valid mode.
pub fn commutation_coefficient(m: &ModeExpr) -> f64 {
    commutator(&m.x, &m.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh_pair() -> (Basis, ModeExpr, ModeExpr) {
        let mut basis = Basis::new();
        let m1 = basis.fresh_mode("m1").unwrap();
        let m2 = basis.fresh_mode("m2").unwrap();
        (basis, m1, m2)
    }

    #[test]
    fn fresh_mode_is_identity_on_its_basis() {
        let mut basis = Basis::new();
        let v = basis.fresh_mode("v").unwrap();
        let id = basis.ids().next().unwrap();
        assert_eq!(v.x.coeff(id), Coeff { x: 1.0, y: 0.0 });
        assert_eq!(v.y.coeff(id), Coeff { x: 0.0, y: 1.0 });
        assert_eq!(v.x.mean(), 0.0);
        assert_eq!(variance(&v.x, &NoiseModel::vacuum()), 1.0);
        assert_eq!(commutation_coefficient(&v), 1.0);
    }

    #[test]
    fn duplicate_label_rejected() {
        let mut basis = Basis::new();
        basis.fresh_mode("v").unwrap();
        assert_eq!(
            basis.fresh_mode("v").unwrap_err(),
            AlgebraError::DuplicateLabel("v".into())
        );
    }

    #[test]
    fn squeeze_r_zero_is_balanced_mix() {
        let (_, m1, m2) = fresh_pair();
        let (o1, _) = two_mode_squeeze(&m1, &m2, 0.0).unwrap();
        let n = NoiseModel::vacuum();
        let inv = 1.0 / SQRT_2;
        for (_, c) in o1.x.terms() {
            assert!((c.x - inv).abs() < 1e-15);
        }
        assert!((variance(&o1.x, &n) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squeeze_r_one_correlations() {
        let (_, m1, m2) = fresh_pair();
        let (o1, o2) = two_mode_squeeze(&m1, &m2, 1.0).unwrap();
        let n = NoiseModel::vacuum();
        // X1−X2 = √2·e^{−r}·X2⁰, so Var = 2e^{−2}
        let dx = o1.x.sub(&o2.x);
        assert!((variance(&dx, &n) - 2.0 * (-2.0f64).exp()).abs() < 1e-14);
        let sy = o1.y.add(&o2.y);
        assert!((variance(&sy, &n) - 2.0 * (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn squeeze_rejects_non_finite_r() {
        let (_, m1, m2) = fresh_pair();
        assert!(two_mode_squeeze(&m1, &m2, f64::NAN).is_err());
        assert!(two_mode_squeeze(&m1, &m2, f64::INFINITY).is_err());
    }

    #[test]
    fn squeeze_covariance_matches_hand_expansion() {
        // Cov(X_1, X_2) = (e^{2r} − e^{−2r})/2; r=1 gives (e² − e^{−2})/2
        let (_, m1, m2) = fresh_pair();
        let (o1, o2) = two_mode_squeeze(&m1, &m2, 1.0).unwrap();
        let n = NoiseModel::vacuum();
        let expected = (2.0f64.exp() - (-2.0f64).exp()) / 2.0;
        assert!((covariance(&o1.x, &o2.x, &n) - expected).abs() < 1e-12);
    }

    #[test]
    fn squeeze_preserves_commutation() {
        let (_, m1, m2) = fresh_pair();
        for r in [-3.0, -0.7, 0.0, 0.4, 2.5] {
            let (o1, o2) = two_mode_squeeze(&m1, &m2, r).unwrap();
            assert!((commutation_coefficient(&o1) - 1.0).abs() < 1e-12);
            assert!((commutation_coefficient(&o2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beamsplit_of_identical_inputs_cancels() {
        let (_, m1, _) = fresh_pair();
        let (d, _) = beamsplit(&m1, &m1.clone(), BsConvention::MinusFirst);
        assert_eq!(variance(&d.x, &NoiseModel::vacuum()), 0.0);
        assert_eq!(d.x.mean(), 0.0);
    }

    #[test]
    fn beamsplit_preserves_vacuum() {
        let (_, m1, m2) = fresh_pair();
        let n = NoiseModel::vacuum();
        for conv in [BsConvention::MinusFirst, BsConvention::PlusFirst] {
            let (o1, o2) = beamsplit(&m1, &m2, conv);
            assert!((variance(&o1.x, &n) - 1.0).abs() < 1e-15);
            assert!((variance(&o2.y, &n) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn add_scaled_zero_gain_is_identity() {
        let (_, m1, m2) = fresh_pair();
        let out = add_scaled(&m1, &m2.x, &m2.y, 0.0);
        assert_eq!(out, m1);
    }

    #[test]
    fn add_scaled_doubles_own_coefficient() {
        let mut basis = Basis::new();
        let v = basis.fresh_mode("v").unwrap();
        let id = basis.ids().next().unwrap();
        let xs = v.x.scale(1.0 / SQRT_2);
        let ys = v.y.scale(1.0 / SQRT_2);
        let out = add_scaled(&v, &xs, &ys, 1.0);
        assert!((out.x.coeff(id).x - 2.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_of_orthogonal_modes_is_zero() {
        let (_, m1, m2) = fresh_pair();
        assert_eq!(covariance(&m1.x, &m2.x, &NoiseModel::vacuum()), 0.0);
    }

    #[test]
    fn variance_of_zero_expression() {
        assert_eq!(variance(&QuadExpr::zero(), &NoiseModel::vacuum()), 0.0);
    }

    #[test]
    fn mean_does_not_contribute_to_variance() {
        let mut basis = Basis::new();
        let v = basis.fresh_mode("v").unwrap().with_means(7.0, -3.0);
        assert_eq!(variance(&v.x, &NoiseModel::vacuum()), 1.0);
    }
}
