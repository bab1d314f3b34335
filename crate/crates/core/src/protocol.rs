//! The teleportation-switch network: two EPR sources mixed on two
//! beamsplitters, a joint homodyne measurement at the sender, and
//! feedforward displacement at two receivers. Flipping the sign of one
//! source's squeezing parameter re-routes which receiver reproduces the
//! input state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    add_scaled, beamsplit, commutation_coefficient, commutator, two_mode_squeeze, variance,
    AlgebraError, Basis, BsConvention, ModeExpr, NoiseModel, QuadExpr, SQRT_2,
};

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("fidelity is defined for a coherent input (unit variances); got v_in = ({0}, {1})")]
    NonCoherentInput(f64, f64),
}

/// Full parameter set of the switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    /// Correlation parameter of the EPR source shared through modes a1/a2.
    pub r_a: f64,
    /// Correlation parameter of the EPR source shared through modes b1/b2.
    pub r_b: f64,
    /// Feedforward gain toward Bob1.
    pub g1: f64,
    /// Feedforward gain toward Bob2.
    pub g2: f64,
    /// Coherent amplitude of the input, real part.
    pub alpha_re: f64,
    /// Coherent amplitude of the input, imaginary part.
    pub alpha_im: f64,
    /// Input X-quadrature variance (1 for a coherent state).
    pub v_in_x: f64,
    /// Input Y-quadrature variance (1 for a coherent state).
    pub v_in_y: f64,
}

impl Default for SwitchParams {
    fn default() -> Self {
        Self {
            r_a: 0.0,
            r_b: 0.0,
            g1: 1.0,
            g2: 1.0,
            alpha_re: 0.0,
            alpha_im: 0.0,
            v_in_x: 1.0,
            v_in_y: 1.0,
        }
    }
}

impl SwitchParams {
    pub fn new(r_a: f64, r_b: f64, g1: f64, g2: f64) -> Self {
        Self { r_a, r_b, g1, g2, ..Self::default() }
    }

    pub fn with_alpha(mut self, re: f64, im: f64) -> Self {
        self.alpha_re = re;
        self.alpha_im = im;
        self
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_re * self.alpha_re + self.alpha_im * self.alpha_im
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let fields = [
            ("r_a", self.r_a),
            ("r_b", self.r_b),
            ("g1", self.g1),
            ("g2", self.g2),
            ("alpha_re", self.alpha_re),
            ("alpha_im", self.alpha_im),
            ("v_in_x", self.v_in_x),
            ("v_in_y", self.v_in_y),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ProtocolError::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.v_in_x <= 0.0 || self.v_in_y <= 0.0 {
            return Err(ProtocolError::InvalidParams(
                "input variances must be positive".into(),
            ));
        }
        Ok(())
    }

    fn gain(&self, which: Bob) -> f64 {
        match which {
            Bob::Bob1 => self.g1,
            Bob::Bob2 => self.g2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bob {
    Bob1,
    Bob2,
}

/// Which receiver, if any, gets the teleported state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Bob1,
    Bob2,
    None,
}

/// Witness pair: mode 3 against one of the receiver-side modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessPair {
    /// Modes 3 and 5 (the Bob1 channel).
    M35,
    /// Modes 3 and 6 (the Bob2 channel).
    M36,
}

/// Inseparability witness: Var(X₃−Xₚ) + Var(Y₃+Yₚ) against the
/// two-vacuum bound of 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub w_x: f64,
    pub w_y: f64,
    pub total: f64,
}

impl Witness {
    pub fn entangled(&self) -> bool {
        self.total < 4.0
    }
}

/// The fully elaborated switch network.
#[derive(Debug, Clone)]
pub struct SwitchNetwork {
    pub basis: Basis,
    pub noise: NoiseModel,
    pub input: ModeExpr,
    pub a1: ModeExpr,
    pub a2: ModeExpr,
    pub b1: ModeExpr,
    pub b2: ModeExpr,
    pub mode3: ModeExpr,
    pub mode4: ModeExpr,
    pub mode5: ModeExpr,
    pub mode6: ModeExpr,
    /// Homodyne outcome (X_in − X₃)/√2.
    pub x_c: QuadExpr,
    /// Homodyne outcome (Y_in + Y₃)/√2.
    pub y_c: QuadExpr,
    pub out5: ModeExpr,
    pub out6: ModeExpr,
}

impl SwitchNetwork {
    pub fn output(&self, which: Bob) -> &ModeExpr {
        match which {
            Bob::Bob1 => &self.out5,
            Bob::Bob2 => &self.out6,
        }
    }
}

/// Builds the switch from parameters.
///
/// The input's classical displacement is (√2·Re α, √2·Im α) so that the
/// coherent-state fidelity formula is the exact Gaussian overlap.
pub fn build_switch(p: &SwitchParams) -> Result<SwitchNetwork, ProtocolError> {
    p.validate()?;
    let mut basis = Basis::new();
    let input_fresh = basis.fresh_mode("in_0")?;
    let input = input_fresh.with_means(SQRT_2 * p.alpha_re, SQRT_2 * p.alpha_im);
    let input_id = basis.ids().next().expect("input allocated first");

    let a1_0 = basis.fresh_mode("a1_0")?;
    let a2_0 = basis.fresh_mode("a2_0")?;
    let b1_0 = basis.fresh_mode("b1_0")?;
    let b2_0 = basis.fresh_mode("b2_0")?;

    let mut noise = NoiseModel::vacuum();
    noise.set(input_id, p.v_in_x, p.v_in_y);

    let (a1, a2) = two_mode_squeeze(&a1_0, &a2_0, p.r_a)?;
    let (b1, b2) = two_mode_squeeze(&b1_0, &b2_0, p.r_b)?;

    let (mode3, mode4) = beamsplit(&a1, &b1, BsConvention::MinusFirst);
    let (mode5, mode6) = beamsplit(&a2, &b2, BsConvention::PlusFirst);

    let inv = 1.0 / SQRT_2;
    let x_c = input.x.scale(inv).add_scaled(&mode3.x, -inv);
    let y_c = input.y.scale(inv).add_scaled(&mode3.y, inv);

    let out5 = add_scaled(&mode5, &x_c, &y_c, p.g1);
    let out6 = add_scaled(&mode6, &x_c, &y_c, p.g2);

    Ok(SwitchNetwork {
        basis,
        noise,
        input,
        a1,
        a2,
        b1,
        b2,
        mode3,
        mode4,
        mode5,
        mode6,
        x_c,
        y_c,
        out5,
        out6,
    })
}

/// Output-quadrature variances derived from the built network.
pub fn output_variances(p: &SwitchParams, which: Bob) -> Result<(f64, f64), ProtocolError> {
    let net = build_switch(p)?;
    let out = net.output(which);
    Ok((variance(&out.x, &net.noise), variance(&out.y, &net.noise)))
}

/// Closed-form output variances:
/// g²·v_in + ((1+g)/2)²·(e^{−2rₐ} + e^{±2r_b}) + ((1−g)/2)²·(e^{2rₐ} + e^{∓2r_b}),
/// upper signs for Bob1, lower for Bob2.
pub fn closed_form_variances(p: &SwitchParams, which: Bob) -> (f64, f64) {
    let g = p.gain(which);
    let s = match which {
        Bob::Bob1 => 1.0,
        Bob::Bob2 => -1.0,
    };
    let cp = (1.0 + g) / 2.0;
    let cm = (1.0 - g) / 2.0;
    let noise = cp * cp * ((-2.0 * p.r_a).exp() + (s * 2.0 * p.r_b).exp())
        + cm * cm * ((2.0 * p.r_a).exp() + (-s * 2.0 * p.r_b).exp());
    (g * g * p.v_in_x + noise, g * g * p.v_in_y + noise)
}

/// Coherent-state teleportation fidelity from output variances.
pub fn fidelity_from_variances(v_x: f64, v_y: f64, gain: f64, alpha_sq: f64) -> f64 {
    let denom = ((v_x + 1.0) * (v_y + 1.0)).sqrt();
    let d = 1.0 - gain;
    (2.0 / denom) * (-2.0 * d * d * alpha_sq / denom).exp()
}

/// Teleportation fidelity at the chosen receiver for a coherent input.
pub fn fidelity(p: &SwitchParams, which: Bob) -> Result<f64, ProtocolError> {
    if p.v_in_x != 1.0 || p.v_in_y != 1.0 {
        return Err(ProtocolError::NonCoherentInput(p.v_in_x, p.v_in_y));
    }
    let (v_x, v_y) = output_variances(p, which)?;
    Ok(fidelity_from_variances(v_x, v_y, p.gain(which), p.alpha_sq()))
}

/// Inseparability witness for the chosen mode pair, evaluated on the network.
pub fn epr_witness(p: &SwitchParams, pair: WitnessPair) -> Result<Witness, ProtocolError> {
    let net = build_switch(p)?;
    Ok(witness_of(&net, pair))
}

pub fn witness_of(net: &SwitchNetwork, pair: WitnessPair) -> Witness {
    let other = match pair {
        WitnessPair::M35 => &net.mode5,
        WitnessPair::M36 => &net.mode6,
    };
    let w_x = variance(&net.mode3.x.sub(&other.x), &net.noise);
    let w_y = variance(&net.mode3.y.add(&other.y), &net.noise);
    Witness { w_x, w_y, total: w_x + w_y }
}

/// Closed-form witness totals: 2(e^{−2rₐ} + e^{2r_b}) for modes (3,5),
/// 2(e^{−2rₐ} + e^{−2r_b}) for modes (3,6).
pub fn closed_form_witness_total(p: &SwitchParams, pair: WitnessPair) -> f64 {
    let s = match pair {
        WitnessPair::M35 => 1.0,
        WitnessPair::M36 => -1.0,
    };
    2.0 * ((-2.0 * p.r_a).exp() + (s * 2.0 * p.r_b).exp())
}

/// Routing verdict: the receiver with strictly greater fidelity, provided
/// it beats the classical bound 1/2. Ties or sub-classical fidelities
/// route nowhere.
pub fn route(p: &SwitchParams) -> Result<Route, ProtocolError> {
    let f1 = fidelity(p, Bob::Bob1)?;
    let f2 = fidelity(p, Bob::Bob2)?;
    Ok(route_from_fidelities(f1, f2))
}

pub fn route_from_fidelities(f1: f64, f2: f64) -> Route {
    if f1 > f2 && f1 > 0.5 {
        Route::Bob1
    } else if f2 > f1 && f2 > 0.5 {
        Route::Bob2
    } else {
        Route::None
    }
}

/// Aggregate analytic report for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub params: SwitchParams,
    pub v1_x: f64,
    pub v1_y: f64,
    pub v2_x: f64,
    pub v2_y: f64,
    pub f1: f64,
    pub f2: f64,
    pub w35: Witness,
    pub w36: Witness,
    pub route: Route,
}

pub fn switch_report(p: &SwitchParams) -> Result<SwitchReport, ProtocolError> {
    if p.v_in_x != 1.0 || p.v_in_y != 1.0 {
        return Err(ProtocolError::NonCoherentInput(p.v_in_x, p.v_in_y));
    }
    let net = build_switch(p)?;
    let (v1_x, v1_y) = {
        let o = net.output(Bob::Bob1);
        (variance(&o.x, &net.noise), variance(&o.y, &net.noise))
    };
    let (v2_x, v2_y) = {
        let o = net.output(Bob::Bob2);
        (variance(&o.x, &net.noise), variance(&o.y, &net.noise))
    };
    let f1 = fidelity_from_variances(v1_x, v1_y, p.g1, p.alpha_sq());
    let f2 = fidelity_from_variances(v2_x, v2_y, p.g2, p.alpha_sq());
    Ok(SwitchReport {
        params: *p,
        v1_x,
        v1_y,
        v2_x,
        v2_y,
        f1,
        f2,
        w35: witness_of(&net, WitnessPair::M35),
        w36: witness_of(&net, WitnessPair::M36),
        route: route_from_fidelities(f1, f2),
    })
}

/// Cross-commutator of the two homodyne outcomes; zero means they are
/// jointly measurable.
pub fn measurement_cross_commutator(net: &SwitchNetwork) -> f64 {
    commutator(&net.x_c, &net.y_c)
}

/// Commutation audit of both outputs; each must equal 1.
pub fn output_commutation(net: &SwitchNetwork) -> (f64, f64) {
    (
        commutation_coefficient(&net.out5),
        commutation_coefficient(&net.out6),
    )
}
