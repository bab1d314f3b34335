//! Line-oriented circuit description language for linear-optics networks
//! with homodyne measurement and feedforward (`.cvc` files).
//!
//! Grammar: one statement per line, `#` starts a comment, tokens are
//! whitespace separated, keywords are case-insensitive, names match
//! `[A-Za-z_][A-Za-z0-9_]*`. Statements:
//!
//! ```text
//! INPUT       name alpha_re alpha_im
//! VACUUM      name
//! EPR         name1 name2 r
//! BS          out1 out2 in1 in2 (minus|plus)
//! HOMODYNE    result (X|Y) (+|-) mode [mixes_with]
//! FEEDFORWARD target gain x_result y_result
//! OUTPUT      name
//! ```
//!
//! Optical modes are consumed by a BS input, a HOMODYNE, or an OUTPUT and
//! cannot be used again, with one exception: a joint measurement may
//! homodyne the same (mode, mixes_with) pair twice, once in X and once in
//! Y, mirroring the two detectors on the two ports of a real mixing
//! beamsplitter. Measurement results are classical and freely reusable.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{
    add_scaled, beamsplit, two_mode_squeeze, Basis, BsConvention, ModeExpr, NoiseModel, QuadExpr,
    SQRT_2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Input {
        name: String,
        alpha_re: f64,
        alpha_im: f64,
    },
    Vacuum {
        name: String,
    },
    Epr {
        name1: String,
        name2: String,
        r: f64,
    },
    Bs {
        out1: String,
        out2: String,
        in1: String,
        in2: String,
        convention: BsConvention,
    },
    Homodyne {
        result: String,
        quadrature: Quadrature,
        sign: Sign,
        mode: String,
        mixes_with: Option<String>,
    },
    Feedforward {
        target: String,
        gain: f64,
        x_result: String,
        y_result: String,
    },
    Output {
        name: String,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitAst {
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownName,
    Reuse,
    Arity,
    NumberFormat,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Syntax => "syntax",
            ErrorKind::UnknownName => "unknown-name",
            ErrorKind::Reuse => "reuse",
            ErrorKind::Arity => "arity",
            ErrorKind::NumberFormat => "number-format",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind} error: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ErrorKind,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into(), kind }
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &code[s..i], column: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &code[s..], column: s + 1 });
    }
    out
}

fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// What a defined name currently refers to during validation.
#[derive(Debug, Clone, PartialEq)]
enum NameState {
    ModeAlive,
    ModeConsumed,
    /// Jointly measured with a partner mode; tracks which quadratures the
    /// pair has already used.
    ModeMeasured {
        partner: Option<String>,
        used_x: bool,
        used_y: bool,
    },
    Result,
}

struct Parser {
    names: BTreeMap<String, NameState>,
    statements: Vec<Stmt>,
    n_outputs: usize,
}

impl Parser {
    fn new() -> Self {
        Self { names: BTreeMap::new(), statements: Vec::new(), n_outputs: 0 }
    }

    fn define(&mut self, tok: &Token, line: usize, state: NameState) -> Result<String, ParseError> {
        if !is_valid_name(tok.text) {
            return Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Syntax,
                format!("invalid name `{}`", tok.text),
            ));
        }
        if self.names.contains_key(tok.text) {
            return Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Reuse,
                format!("name `{}` is already defined", tok.text),
            ));
        }
        self.names.insert(tok.text.to_string(), state);
        Ok(tok.text.to_string())
    }

    fn lookup(&self, tok: &Token, line: usize) -> Result<&NameState, ParseError> {
        self.names.get(tok.text).ok_or_else(|| {
            ParseError::new(
                line,
                tok.column,
                ErrorKind::UnknownName,
                format!("`{}` is not defined", tok.text),
            )
        })
    }

    /// Checks the mode is alive and marks it consumed.
    fn consume_mode(&mut self, tok: &Token, line: usize) -> Result<String, ParseError> {
        match self.lookup(tok, line)? {
            NameState::ModeAlive => {
                self.names.insert(tok.text.to_string(), NameState::ModeConsumed);
                Ok(tok.text.to_string())
            }
            NameState::Result => Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Reuse,
                format!("`{}` is a measurement result, not a mode", tok.text),
            )),
            _ => Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Reuse,
                format!("mode `{}` was already consumed", tok.text),
            )),
        }
    }

    fn expect_result(&self, tok: &Token, line: usize) -> Result<String, ParseError> {
        match self.lookup(tok, line)? {
            NameState::Result => Ok(tok.text.to_string()),
            _ => Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::UnknownName,
                format!("`{}` is not a measurement result", tok.text),
            )),
        }
    }

    /// The joint-measurement rule: a (mode, mixes_with) pair may be
    /// homodyned once in X and once in Y; any other re-touch is a reuse.
    fn measure_pair(
        &mut self,
        mode: &Token,
        mix: &Token,
        quadrature: Quadrature,
        line: usize,
    ) -> Result<(), ParseError> {
        let reuse = |tok: &Token, msg: String| ParseError::new(line, tok.column, ErrorKind::Reuse, msg);
        if mode.text == mix.text {
            return Err(reuse(mix, format!("mode `{}` cannot mix with itself", mix.text)));
        }
        let s_mode = self.lookup(mode, line)?.clone();
        let s_mix = self.lookup(mix, line)?.clone();
        match (&s_mode, &s_mix) {
            (NameState::ModeAlive, NameState::ModeAlive) => {
                let (ux, uy) = (quadrature == Quadrature::X, quadrature == Quadrature::Y);
                self.names.insert(
                    mode.text.to_string(),
                    NameState::ModeMeasured {
                        partner: Some(mix.text.to_string()),
                        used_x: ux,
                        used_y: uy,
                    },
                );
                self.names.insert(
                    mix.text.to_string(),
                    NameState::ModeMeasured {
                        partner: Some(mode.text.to_string()),
                        used_x: ux,
                        used_y: uy,
                    },
                );
                Ok(())
            }
            (
                NameState::ModeMeasured { partner: Some(p), used_x, used_y },
                NameState::ModeMeasured { .. },
            ) if p == mix.text => {
                let clash = match quadrature {
                    Quadrature::X => *used_x,
                    Quadrature::Y => *used_y,
                };
                if clash {
                    return Err(reuse(
                        mode,
                        format!("pair ({}, {}) already measured that quadrature", mode.text, mix.text),
                    ));
                }
                for name in [mode.text, mix.text] {
                    if let Some(NameState::ModeMeasured { used_x, used_y, .. }) =
                        self.names.get_mut(name)
                    {
                        match quadrature {
                            Quadrature::X => *used_x = true,
                            Quadrature::Y => *used_y = true,
                        }
                    }
                }
                Ok(())
            }
            (NameState::Result, _) => Err(reuse(mode, format!("`{}` is not a mode", mode.text))),
            (_, NameState::Result) => Err(reuse(mix, format!("`{}` is not a mode", mix.text))),
            _ => Err(reuse(mode, format!("mode `{}` or `{}` was already consumed", mode.text, mix.text))),
        }
    }

    fn alive_mode(&self, tok: &Token, line: usize) -> Result<String, ParseError> {
        match self.lookup(tok, line)? {
            NameState::ModeAlive => Ok(tok.text.to_string()),
            NameState::Result => Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Reuse,
                format!("`{}` is a measurement result, not a mode", tok.text),
            )),
            _ => Err(ParseError::new(
                line,
                tok.column,
                ErrorKind::Reuse,
                format!("mode `{}` was already consumed", tok.text),
            )),
        }
    }
}

fn parse_number(tok: &Token, line: usize) -> Result<f64, ParseError> {
    let bad = || {
        ParseError::new(
            line,
            tok.column,
            ErrorKind::NumberFormat,
            format!("`{}` is not a number", tok.text),
        )
    };
    // decimal or scientific notation only; no inf/nan spellings
    if !tok.text.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E')) {
        return Err(bad());
    }
    let v: f64 = tok.text.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

fn expect_arity(toks: &[Token], n: usize, line: usize, stmt: &str) -> Result<(), ParseError> {
    if toks.len() != n + 1 {
        let col = toks.get(n.min(toks.len() - 1)).map(|t| t.column).unwrap_or(1);
        return Err(ParseError::new(
            line,
            col,
            ErrorKind::Arity,
            format!("{stmt} takes {n} arguments, got {}", toks.len() - 1),
        ));
    }
    Ok(())
}

/// Parses and validates circuit source. The first error is reported with
/// its line and column; there is no error recovery.
pub fn parse(source: &str) -> Result<CircuitAst, ParseError> {
    let mut p = Parser::new();
    let mut last_line = 0;
    for (idx, raw_line) in source.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokenize(raw_line);
        if toks.is_empty() {
            continue;
        }
        let keyword = toks[0].text.to_ascii_uppercase();
        let stmt = match keyword.as_str() {
            "INPUT" => {
                expect_arity(&toks, 3, line, "INPUT")?;
                let alpha_re = parse_number(&toks[2], line)?;
                let alpha_im = parse_number(&toks[3], line)?;
                let name = p.define(&toks[1], line, NameState::ModeAlive)?;
                Stmt::Input { name, alpha_re, alpha_im }
            }
            "VACUUM" => {
                expect_arity(&toks, 1, line, "VACUUM")?;
                let name = p.define(&toks[1], line, NameState::ModeAlive)?;
                Stmt::Vacuum { name }
            }
            "EPR" => {
                expect_arity(&toks, 3, line, "EPR")?;
                let r = parse_number(&toks[3], line)?;
                let name1 = p.define(&toks[1], line, NameState::ModeAlive)?;
                let name2 = p.define(&toks[2], line, NameState::ModeAlive)?;
                Stmt::Epr { name1, name2, r }
            }
            "BS" => {
                expect_arity(&toks, 5, line, "BS")?;
                let convention = match toks[5].text.to_ascii_lowercase().as_str() {
                    "minus" => BsConvention::MinusFirst,
                    "plus" => BsConvention::PlusFirst,
                    other => {
                        return Err(ParseError::new(
                            line,
                            toks[5].column,
                            ErrorKind::Syntax,
                            format!("expected `minus` or `plus`, got `{other}`"),
                        ))
                    }
                };
                let in1 = p.consume_mode(&toks[3], line)?;
                let in2 = p.consume_mode(&toks[4], line)?;
                let out1 = p.define(&toks[1], line, NameState::ModeAlive)?;
                let out2 = p.define(&toks[2], line, NameState::ModeAlive)?;
                Stmt::Bs { out1, out2, in1, in2, convention }
            }
            "HOMODYNE" => {
                if toks.len() != 5 && toks.len() != 6 {
                    return Err(ParseError::new(
                        line,
                        toks.last().unwrap().column,
                        ErrorKind::Arity,
                        format!("HOMODYNE takes 4 or 5 arguments, got {}", toks.len() - 1),
                    ));
                }
                let quadrature = match toks[2].text.to_ascii_uppercase().as_str() {
                    "X" => Quadrature::X,
                    "Y" => Quadrature::Y,
                    other => {
                        return Err(ParseError::new(
                            line,
                            toks[2].column,
                            ErrorKind::Syntax,
                            format!("expected `X` or `Y`, got `{other}`"),
                        ))
                    }
                };
                let sign = match toks[3].text {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    other => {
                        return Err(ParseError::new(
                            line,
                            toks[3].column,
                            ErrorKind::Syntax,
                            format!("expected `+` or `-`, got `{other}`"),
                        ))
                    }
                };
                let mixes_with = if toks.len() == 6 {
                    p.measure_pair(&toks[4], &toks[5], quadrature, line)?;
                    Some(toks[5].text.to_string())
                } else {
                    p.consume_mode(&toks[4], line)?;
                    None
                };
                let mode = toks[4].text.to_string();
                let result = p.define(&toks[1], line, NameState::Result)?;
                Stmt::Homodyne { result, quadrature, sign, mode, mixes_with }
            }
            "FEEDFORWARD" => {
                expect_arity(&toks, 4, line, "FEEDFORWARD")?;
                let target = p.alive_mode(&toks[1], line)?;
                let gain = parse_number(&toks[2], line)?;
                let x_result = p.expect_result(&toks[3], line)?;
                let y_result = p.expect_result(&toks[4], line)?;
                Stmt::Feedforward { target, gain, x_result, y_result }
            }
            "OUTPUT" => {
                expect_arity(&toks, 1, line, "OUTPUT")?;
                let name = p.consume_mode(&toks[1], line)?;
                p.n_outputs += 1;
                Stmt::Output { name }
            }
            other => {
                return Err(ParseError::new(
                    line,
                    toks[0].column,
                    ErrorKind::Syntax,
                    format!("unknown statement `{other}`"),
                ))
            }
        };
        p.statements.push(stmt);
    }
    if p.n_outputs == 0 {
        return Err(ParseError::new(
            last_line.max(1),
            1,
            ErrorKind::Syntax,
            "circuit has no OUTPUT statement".to_string(),
        ));
    }
    Ok(CircuitAst { statements: p.statements })
}

/// Canonical text form; `parse(print(ast))` is structurally identical for
/// any valid AST. Numbers print in Rust's shortest round-trip form.
pub fn print(ast: &CircuitAst) -> String {
    let mut out = String::new();
    for stmt in &ast.statements {
        let line = match stmt {
            Stmt::Input { name, alpha_re, alpha_im } => {
                format!("INPUT {name} {alpha_re} {alpha_im}")
            }
            Stmt::Vacuum { name } => format!("VACUUM {name}"),
            Stmt::Epr { name1, name2, r } => format!("EPR {name1} {name2} {r}"),
            Stmt::Bs { out1, out2, in1, in2, convention } => {
                let conv = match convention {
                    BsConvention::MinusFirst => "minus",
                    BsConvention::PlusFirst => "plus",
                };
                format!("BS {out1} {out2} {in1} {in2} {conv}")
            }
            Stmt::Homodyne { result, quadrature, sign, mode, mixes_with } => {
                let q = match quadrature {
                    Quadrature::X => "X",
                    Quadrature::Y => "Y",
                };
                let s = match sign {
                    Sign::Plus => "+",
                    Sign::Minus => "-",
                };
                match mixes_with {
                    Some(m) => format!("HOMODYNE {result} {q} {s} {mode} {m}"),
                    None => format!("HOMODYNE {result} {q} {s} {mode}"),
                }
            }
            Stmt::Feedforward { target, gain, x_result, y_result } => {
                format!("FEEDFORWARD {target} {gain} {x_result} {y_result}")
            }
            Stmt::Output { name } => format!("OUTPUT {name}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Result of executing a circuit against the quadrature algebra.
#[derive(Debug, Clone)]
pub struct Elaborated {
    pub basis: Basis,
    pub noise: NoiseModel,
    /// OUTPUT name → final mode expression.
    pub outputs: BTreeMap<String, ModeExpr>,
    /// HOMODYNE result name → measured observable.
    pub results: BTreeMap<String, QuadExpr>,
    /// INPUT name → coherent amplitude (re, im).
    pub inputs: BTreeMap<String, (f64, f64)>,
}

/// Executes the statements in order. The AST is assumed valid (as
/// produced by [`parse`]); internal name errors panic.
pub fn elaborate(ast: &CircuitAst) -> Elaborated {
    let mut basis = Basis::new();
    let noise = NoiseModel::vacuum();
    let mut modes: BTreeMap<String, ModeExpr> = BTreeMap::new();
    let mut results: BTreeMap<String, QuadExpr> = BTreeMap::new();
    let mut outputs = BTreeMap::new();
    let mut inputs = BTreeMap::new();

    for stmt in &ast.statements {
        match stmt {
            Stmt::Input { name, alpha_re, alpha_im } => {
                let m = basis
                    .fresh_mode(name)
                    .expect("validated AST")
                    .with_means(SQRT_2 * alpha_re, SQRT_2 * alpha_im);
                inputs.insert(name.clone(), (*alpha_re, *alpha_im));
                modes.insert(name.clone(), m);
            }
            Stmt::Vacuum { name } => {
                let m = basis.fresh_mode(name).expect("validated AST");
                modes.insert(name.clone(), m);
            }
            Stmt::Epr { name1, name2, r } => {
                let f1 = basis.fresh_mode(&format!("{name1}_0")).expect("validated AST");
                let f2 = basis.fresh_mode(&format!("{name2}_0")).expect("validated AST");
                let (m1, m2) = two_mode_squeeze(&f1, &f2, *r).expect("finite r");
                modes.insert(name1.clone(), m1);
                modes.insert(name2.clone(), m2);
            }
            Stmt::Bs { out1, out2, in1, in2, convention } => {
                let (o1, o2) = beamsplit(&modes[in1], &modes[in2], *convention);
                modes.insert(out1.clone(), o1);
                modes.insert(out2.clone(), o2);
            }
            Stmt::Homodyne { result, quadrature, sign, mode, mixes_with } => {
                let pick = |m: &ModeExpr| match quadrature {
                    Quadrature::X => m.x.clone(),
                    Quadrature::Y => m.y.clone(),
                };
                let q_mode = pick(&modes[mode]);
                let expr = match mixes_with {
                    Some(mix) => {
                        // (Q_mix ± Q_mode)/√2, the joint-measurement port
                        let q_mix = pick(&modes[mix]);
                        q_mix.scale(1.0 / SQRT_2).add_scaled(&q_mode, sign.factor() / SQRT_2)
                    }
                    None => q_mode.scale(sign.factor()),
                };
                results.insert(result.clone(), expr);
            }
            Stmt::Feedforward { target, gain, x_result, y_result } => {
                let displaced =
                    add_scaled(&modes[target], &results[x_result], &results[y_result], *gain);
                modes.insert(target.clone(), displaced);
            }
            Stmt::Output { name } => {
                outputs.insert(name.clone(), modes[name].clone());
            }
        }
    }
    Elaborated { basis, noise, outputs, results, inputs }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("no value supplied for placeholder `${{{0}}}`")]
pub struct MissingPlaceholder(pub String);

/// Replaces `${name}` placeholders with values before parsing. The DSL
/// itself has no variables; sweeps substitute text.
pub fn substitute_placeholders(
    source: &str,
    values: &BTreeMap<String, String>,
) -> Result<String, MissingPlaceholder> {
    let mut out = String::with_capacity(source.len());
    let mut rest = source;
    while let Some(pos) = rest.find("${") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| MissingPlaceholder(after.chars().take(16).collect()))?;
        let name = &after[..end];
        let value = values
            .get(name)
            .ok_or_else(|| MissingPlaceholder(name.to_string()))?;
        out.push_str(value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub mod gen {
    //! Random valid-circuit generator for round-trip testing.

    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use super::*;

    /// Builds a structurally valid random circuit, deterministic in `seed`.
    pub fn random_circuit(seed: u64) -> CircuitAst {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut stmts = Vec::new();
        let mut alive: Vec<String> = Vec::new();
        let mut results: Vec<String> = Vec::new();
        let mut counter = 0usize;
        let fresh = |counter: &mut usize| {
            let n = format!("n{counter}");
            *counter += 1;
            n
        };

        let n_sources = rng.gen_range(1..4usize);
        for _ in 0..n_sources {
            match rng.gen_range(0..3) {
                0 => {
                    let name = fresh(&mut counter);
                    stmts.push(Stmt::Vacuum { name: name.clone() });
                    alive.push(name);
                }
                1 => {
                    let name = fresh(&mut counter);
                    stmts.push(Stmt::Input {
                        name: name.clone(),
                        alpha_re: rng.gen_range(-2.0..2.0),
                        alpha_im: rng.gen_range(-2.0..2.0),
                    });
                    alive.push(name);
                }
                _ => {
                    let (a, b) = (fresh(&mut counter), fresh(&mut counter));
                    stmts.push(Stmt::Epr {
                        name1: a.clone(),
                        name2: b.clone(),
                        r: rng.gen_range(-2.0..2.0),
                    });
                    alive.push(a);
                    alive.push(b);
                }
            }
        }

        let n_ops = rng.gen_range(0..5usize);
        for _ in 0..n_ops {
            match rng.gen_range(0..3) {
                0 if alive.len() >= 2 => {
                    let i1 = alive.swap_remove(rng.gen_range(0..alive.len()));
                    let i2 = alive.swap_remove(rng.gen_range(0..alive.len()));
                    let (o1, o2) = (fresh(&mut counter), fresh(&mut counter));
                    let convention = if rng.gen() {
                        BsConvention::MinusFirst
                    } else {
                        BsConvention::PlusFirst
                    };
                    stmts.push(Stmt::Bs {
                        out1: o1.clone(),
                        out2: o2.clone(),
                        in1: i1,
                        in2: i2,
                        convention,
                    });
                    alive.push(o1);
                    alive.push(o2);
                }
                1 if !alive.is_empty() => {
                    let mode = alive.swap_remove(rng.gen_range(0..alive.len()));
                    let result = fresh(&mut counter);
                    stmts.push(Stmt::Homodyne {
                        result: result.clone(),
                        quadrature: if rng.gen() { Quadrature::X } else { Quadrature::Y },
                        sign: if rng.gen() { Sign::Plus } else { Sign::Minus },
                        mode,
                        mixes_with: None,
                    });
                    results.push(result);
                }
                2 if !alive.is_empty() && results.len() >= 2 => {
                    let target = alive[rng.gen_range(0..alive.len())].clone();
                    let x_result = results[rng.gen_range(0..results.len())].clone();
                    let y_result = results[rng.gen_range(0..results.len())].clone();
                    stmts.push(Stmt::Feedforward {
                        target,
                        gain: rng.gen_range(-1.5..1.5),
                        x_result,
                        y_result,
                    });
                }
                _ => {}
            }
        }

        if alive.is_empty() {
            let name = fresh(&mut counter);
            stmts.push(Stmt::Vacuum { name: name.clone() });
            alive.push(name);
        }
        let n_out = rng.gen_range(1..=alive.len());
        for _ in 0..n_out {
            let name = alive.swap_remove(rng.gen_range(0..alive.len()));
            stmts.push(Stmt::Output { name });
        }
        CircuitAst { statements: stmts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::variance;

    #[test]
    fn parses_single_vacuum_circuit() {
        let ast = parse("VACUUM v\nOUTPUT v\n").unwrap();
        assert_eq!(ast.statements.len(), 2);
        assert_eq!(ast.statements[0], Stmt::Vacuum { name: "v".into() });
    }

    #[test]
    fn parses_epr_and_bs() {
        let ast = parse("EPR a1 a2 1.0\nBS x y a1 a2 minus\nOUTPUT x\n").unwrap();
        assert_eq!(ast.statements.len(), 3);
        assert!(matches!(&ast.statements[1], Stmt::Bs { convention: BsConvention::MinusFirst, .. }));
    }

    #[test]
    fn rejects_mode_reuse_in_bs() {
        let err = parse("EPR a1 a2 1.0\nBS x y a1 a1 minus\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reuse);
        assert_eq!(err.line, 2);
    }

    #[test]
    fn rejects_consuming_mode_twice() {
        let src = "EPR a1 a2 1.0\nBS x y a1 a2 minus\nBS u w a1 x plus\n";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reuse);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn rejects_unknown_name() {
        let err = parse("VACUUM v\nBS a b v w minus\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnknownName);
        assert_eq!(err.line, 2);
        assert!(err.column > 1);
    }

    #[test]
    fn rejects_bad_number() {
        let err = parse("EPR a b oops\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::NumberFormat);
    }

    #[test]
    fn rejects_bad_arity() {
        let err = parse("VACUUM\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Arity);
    }

    #[test]
    fn requires_an_output() {
        let err = parse("VACUUM v\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Syntax);
        assert!(err.message.contains("OUTPUT"));
    }

    #[test]
    fn keywords_are_case_insensitive_and_comments_ignored() {
        let ast = parse("# a comment\nvacuum v # trailing\noutput v\n").unwrap();
        assert_eq!(ast.statements.len(), 2);
    }

    #[test]
    fn joint_measurement_pair_allows_x_then_y() {
        let src = "\
VACUUM a
VACUUM b
VACUUM t
HOMODYNE xc X - a b
HOMODYNE yc Y + a b
FEEDFORWARD t 1.0 xc yc
OUTPUT t
";
        let ast = parse(src).unwrap();
        assert_eq!(ast.statements.len(), 7);
    }

    #[test]
    fn joint_measurement_pair_rejects_same_quadrature_twice() {
        let src = "VACUUM a\nVACUUM b\nHOMODYNE xc X - a b\nHOMODYNE xd X + a b\nOUTPUT a\n";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reuse);
        assert_eq!(err.line, 4);
    }

    #[test]
    fn measured_mode_cannot_be_output() {
        let src = "VACUUM a\nVACUUM b\nHOMODYNE xc X - a b\nOUTPUT a\n";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reuse);
    }

    #[test]
    fn print_parse_round_trip_on_fixed_circuit() {
        let src = "EPR a1 a2 0.5\nBS x y a1 a2 plus\nHOMODYNE r X + x\nOUTPUT y\n";
        let ast = parse(src).unwrap();
        let printed = print(&ast);
        assert_eq!(parse(&printed).unwrap(), ast);
    }

    #[test]
    fn print_parse_round_trip_on_generated_circuits() {
        for seed in 0..200 {
            let ast = gen::random_circuit(seed);
            let printed = print(&ast);
            let reparsed = parse(&printed)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{printed}"));
            assert_eq!(reparsed, ast, "seed {seed}");
        }
    }

    #[test]
    fn elaborate_zero_gain_feedforward_is_identity() {
        let src = "\
VACUUM a
VACUUM b
VACUUM t
HOMODYNE xc X - a b
HOMODYNE yc Y + a b
FEEDFORWARD t 0.0 xc yc
OUTPUT t
";
        let el = elaborate(&parse(src).unwrap());
        let out = &el.outputs["t"];
        assert!((variance(&out.x, &el.noise) - 1.0).abs() < 1e-15);
        let id_t = el.basis.ids().nth(2).unwrap();
        assert_eq!(out.x.coeff(id_t).x, 1.0);
    }

    #[test]
    fn elaborate_epr_then_bs_matches_hand_expansion() {
        // EPR(r=0) makes both modes balanced mixes; BS minus of them
        // isolates one initial mode: variance 1.
        let src = "EPR a1 a2 0.0\nBS u w a1 a2 minus\nOUTPUT u\nOUTPUT w\n";
        let el = elaborate(&parse(src).unwrap());
        let u = &el.outputs["u"];
        // hand expansion: X_u = [(X1+X2) − (X1−X2)]/2 = X2⁰
        assert!((variance(&u.x, &el.noise) - 1.0).abs() < 1e-12);
        let id2 = el.basis.ids().nth(1).unwrap();
        assert!((u.x.coeff(id2).x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substitute_placeholders_works_and_reports_missing() {
        let mut vals = BTreeMap::new();
        vals.insert("ra".to_string(), "1.5".to_string());
        assert_eq!(
            substitute_placeholders("EPR a b ${ra}\n", &vals).unwrap(),
            "EPR a b 1.5\n"
        );
        let err = substitute_placeholders("EPR a b ${rb}\n", &vals).unwrap_err();
        assert_eq!(err.0, "rb");
    }
}
