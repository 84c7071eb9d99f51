//! Keystroke-level timing of one word under multi-tap and predictive entry.
//!
//! ```text
//! T_stem   = X (n·Tp + Tper + (1 - Pck)·Twait) + (X - 1)·Pck·Tck
//! T_ipreti = X (Tp + Tper) + (X - 1)·Pck·Tck + X (Pe1 + Pe2)(Tck + Tp)
//! ```
//!
//! Times are milliseconds; `X` is the word length in letters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlmParams {
    /// Average multi-tap presses per letter.
    pub n: f64,
    /// Key press time.
    pub t_p: f64,
    /// Time to perceive the entered letter.
    pub t_per: f64,
    /// Probability that the next letter is on a different key.
    pub p_ck: f64,
    /// Multi-tap timeout when the next letter shares the key.
    pub t_wait: f64,
    /// Time to move to another key.
    pub t_ck: f64,
    /// Probability the first offered letter is wrong.
    pub p_error1: f64,
    /// Probability the second offered letter is wrong too.
    pub p_error2: f64,
}

impl Default for KlmParams {
    /// Greek handset figures: 2.0229 presses per letter measured over 386870
    /// letters, Nokia timeout, Fitts'-law key movement.
    fn default() -> Self {
        KlmParams {
            n: 2.0229,
            t_p: 165.0,
            t_per: 500.0,
            p_ck: 0.89,
            t_wait: 1500.0,
            t_ck: 215.0,
            p_error1: 0.045,
            p_error2: 0.002,
        }
    }
}

/// Figures published with the default parameter set. Evaluating the formulas
/// directly does not reproduce the two times.
pub mod published {
    pub const WORD_LENGTH: f64 = 6.0;
    pub const T_STEM_MS: f64 = 5695.8;
    pub const T_IPRETI_MS: f64 = 3590.5;
    pub const TIME_IMPROVEMENT: f64 = 0.3472;
    pub const KEYSTROKES_STEM: f64 = 12.13;
    pub const KEYSTROKES_IPRETI: f64 = 6.39;
    pub const KEYSTROKE_IMPROVEMENT: f64 = 0.4735;
}

impl KlmParams {
    pub fn validate(&self) -> Result<()> {
        let probabilities = [("p_ck", self.p_ck), ("p_error1", self.p_error1), ("p_error2", self.p_error2)];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} = {p} is not a probability")));
            }
        }
        let times = [("t_p", self.t_p), ("t_per", self.t_per), ("t_wait", self.t_wait), ("t_ck", self.t_ck)];
        for (name, t) in times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::validation(format!("{name} = {t} must be a non-negative time")));
            }
        }
        if !(self.n.is_finite() && self.n >= 1.0) {
            return Err(Error::validation(format!("n = {} must be at least 1", self.n)));
        }
        Ok(())
    }
}

fn check_length(x: f64) -> Result<()> {
    if x.is_finite() && x >= 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("word length {x} must be at least 1")))
    }
}

pub fn t_stem(params: &KlmParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_length(x)?;
    let p = params;
    Ok(x * (p.n * p.t_p + p.t_per + (1.0 - p.p_ck) * p.t_wait) + (x - 1.0) * p.p_ck * p.t_ck)
}

pub fn t_ipreti(params: &KlmParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_length(x)?;
    let p = params;
    Ok(x * (p.t_p + p.t_per)
        + (x - 1.0) * p.p_ck * p.t_ck
        + x * (p.p_error1 + p.p_error2) * (p.t_ck + p.t_p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub x: f64,
    pub t_stem: f64,
    pub t_ipreti: f64,
    /// `(t_stem - t_ipreti) / t_stem`
    pub time_pct: f64,
    /// `X·n`
    pub keystrokes_stem: f64,
    /// `X·(1 + p_error1 + 2·p_error2)`
    pub keystrokes_ipreti: f64,
    pub keystroke_pct: f64,
}

pub fn improvement(params: &KlmParams, x: f64) -> Result<Improvement> {
    let ts = t_stem(params, x)?;
    let ti = t_ipreti(params, x)?;
    let ks = x * params.n;
    let ki = x * (1.0 + params.p_error1 + 2.0 * params.p_error2);
    Ok(Improvement {
        x,
        t_stem: ts,
        t_ipreti: ti,
        time_pct: (ts - ti) / ts,
        keystrokes_stem: ks,
        keystrokes_ipreti: ki,
        keystroke_pct: (ks - ki) / ks,
    })
}
