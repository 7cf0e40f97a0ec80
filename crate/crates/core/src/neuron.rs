//! Izhikevich point neuron: quadratic membrane equation with a linear
//! recovery variable, spike detection at a fixed peak and after-spike reset.

use serde::{Deserialize, Serialize};

use crate::error::SnnError;

/// Spike peak in mV.
pub const PEAK: f64 = 30.0;

/// Resting potential used to initialise every neuron, in mV.
pub const V_REST: f64 = -65.0;

/// Number of membrane sub-steps per 1 ms tick.
pub const DEFAULT_SUBSTEPS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Excitatory,
    Inhibitory,
}

impl Population {
    pub fn label(self) -> &'static str {
        match self {
            Population::Excitatory => "exc",
            Population::Inhibitory => "inh",
        }
    }
}

/// Izhikevich coefficients: recovery rate `a` (1/ms), recovery sensitivity
/// `b`, reset potential `c` (mV) and reset increment `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl NeuronParams {
    /// Regular spiking cortical pyramidal cell.
    pub const REGULAR_SPIKING: NeuronParams = NeuronParams {
        a: 0.02,
        b: 0.2,
        c: -65.0,
        d: 8.0,
    };

    /// Fast spiking interneuron.
    pub const FAST_SPIKING: NeuronParams = NeuronParams {
        a: 0.1,
        b: 0.2,
        c: -65.0,
        d: 2.0,
    };

    pub fn is_valid(&self) -> bool {
        self.a > 0.0 && self.c < PEAK && self.d >= 0.0 && self.b.is_finite()
    }
}

/// Membrane potential `v` (mV) and recovery variable `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub v: f64,
    pub w: f64,
}

impl NeuronState {
    /// `v` at rest with the recovery variable on its nullcline.
    pub fn resting(params: &NeuronParams) -> Self {
        Self {
            v: V_REST,
            w: params.b * V_REST,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.w.is_finite()
    }
}

/// Non-finite state produced by an integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub v: f64,
    pub w: f64,
}

/// Right-hand side of the membrane equation.
#[inline]
pub fn dv_dt(v: f64, w: f64, input: f64) -> f64 {
    0.04 * v * v + 5.0 * v + 140.0 - w + input
}

/// Right-hand side of the recovery equation.
#[inline]
pub fn dw_dt(v: f64, w: f64, params: &NeuronParams) -> f64 {
    params.a * (params.b * v - w)
}

/// Advances one 1 ms tick: two forward-Euler half-steps of 0.5 ms for `v`,
/// then one 1 ms step for `w` using the updated `v`.
#[inline]
pub fn integrate_tick(
    state: NeuronState,
    params: &NeuronParams,
    input: f64,
) -> Result<NeuronState, Divergence> {
    integrate_tick_substeps(state, params, input, DEFAULT_SUBSTEPS)
}

/// [`integrate_tick`] with `substeps` membrane sub-steps of `1/substeps` ms.
///
/// Once `v` reaches [`PEAK`] the remaining sub-steps are skipped and `v` is
/// held at the peak; the spike is registered by [`detect_and_reset`] at the
/// start of the next tick.
#[inline]
pub fn integrate_tick_substeps(
    state: NeuronState,
    params: &NeuronParams,
    input: f64,
    substeps: u32,
) -> Result<NeuronState, Divergence> {
    let h = 1.0 / f64::from(substeps.max(1));
    let mut v = state.v;
    for _ in 0..substeps.max(1) {
        if v >= PEAK {
            break;
        }
        v += h * dv_dt(v, state.w, input);
    }
    if !v.is_finite() {
        return Err(Divergence { v, w: state.w });
    }
    let v = v.min(PEAK);
    let w = state.w + dw_dt(v, state.w, params);
    if !w.is_finite() {
        return Err(Divergence { v, w });
    }
    Ok(NeuronState { v, w })
}

/// Applies the after-spike reset if `v` has reached the peak.
#[inline]
pub fn detect_and_reset(state: NeuronState, params: &NeuronParams) -> (NeuronState, bool) {
    if state.v >= PEAK {
        (
            NeuronState {
                v: params.c,
                w: state.w + params.d,
            },
            true,
        )
    } else {
        (state, false)
    }
}

/// Heterogeneous coefficients for one neuron from a uniform draw `r`.
///
/// Excitatory cells interpolate from regular spiking (`r = 0`) toward
/// chattering (`r = 1`) through `r²`; inhibitory cells interpolate linearly
/// from fast spiking toward low-threshold spiking.
pub fn sample_heterogeneous_params(population: Population, r: f64) -> Result<NeuronParams, SnnError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(SnnError::Domain(format!("heterogeneity draw {r} outside [0, 1]")));
    }
    Ok(match population {
        Population::Excitatory => {
            let r2 = r * r;
            NeuronParams {
                a: 0.02,
                b: 0.2,
                c: -65.0 + 15.0 * r2,
                d: 8.0 - 6.0 * r2,
            }
        }
        Population::Inhibitory => NeuronParams {
            a: 0.02 + 0.08 * r,
            b: 0.25 - 0.05 * r,
            c: -65.0,
            d: 2.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RS: NeuronParams = NeuronParams::REGULAR_SPIKING;

    #[test]
    fn membrane_derivative_at_rest() {
        assert_eq!(dv_dt(-65.0, -13.0, 0.0), -3.0);
        let next = integrate_tick(NeuronState { v: -65.0, w: -13.0 }, &RS, 0.0).unwrap();
        assert!(next.v < -65.0);
    }

    #[test]
    fn recovery_at_equilibrium_is_stationary() {
        assert_eq!(dw_dt(-65.0, -13.0, &RS), 0.0);
    }

    #[test]
    fn reset_at_peak() {
        let p = NeuronParams { c: -65.0, d: 8.0, ..RS };
        let (s, fired) = detect_and_reset(NeuronState { v: 30.0, w: 0.0 }, &p);
        assert!(fired);
        assert_eq!(s, NeuronState { v: -65.0, w: 8.0 });
    }

    #[test]
    fn no_reset_below_peak() {
        let s0 = NeuronState { v: 29.999, w: 5.0 };
        let (s, fired) = detect_and_reset(s0, &RS);
        assert!(!fired);
        assert_eq!(s, s0);
    }

    #[test]
    fn overshoot_is_reset() {
        let p = NeuronParams { c: -65.0, d: 2.0, ..RS };
        let (s, fired) = detect_and_reset(NeuronState { v: 45.0, w: -2.0 }, &p);
        assert!(fired);
        assert_eq!(s, NeuronState { v: -65.0, w: 0.0 });
    }

    #[test]
    fn reset_is_idempotent() {
        let s0 = NeuronState { v: 31.0, w: 1.0 };
        let (once, _) = detect_and_reset(s0, &RS);
        let (twice, fired_again) = detect_and_reset(once, &RS);
        assert_eq!(once, twice);
        assert!(!fired_again);
    }

    #[test]
    fn heterogeneous_endpoints() {
        let e0 = sample_heterogeneous_params(Population::Excitatory, 0.0).unwrap();
        assert_eq!(e0, NeuronParams { a: 0.02, b: 0.2, c: -65.0, d: 8.0 });
        let e1 = sample_heterogeneous_params(Population::Excitatory, 1.0).unwrap();
        assert_eq!(e1, NeuronParams { a: 0.02, b: 0.2, c: -50.0, d: 2.0 });
        let i1 = sample_heterogeneous_params(Population::Inhibitory, 1.0).unwrap();
        assert!((i1.a - 0.10).abs() < 1e-15);
        assert!((i1.b - 0.20).abs() < 1e-15);
        assert_eq!((i1.c, i1.d), (-65.0, 2.0));
    }

    #[test]
    fn heterogeneity_draw_outside_unit_interval_is_rejected() {
        assert!(sample_heterogeneous_params(Population::Excitatory, -0.1).is_err());
        assert!(sample_heterogeneous_params(Population::Inhibitory, 1.5).is_err());
        assert!(sample_heterogeneous_params(Population::Inhibitory, f64::NAN).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        for r in [0.0, 0.3, 0.77, 1.0] {
            for pop in [Population::Excitatory, Population::Inhibitory] {
                assert_eq!(
                    sample_heterogeneous_params(pop, r).unwrap(),
                    sample_heterogeneous_params(pop, r).unwrap()
                );
            }
        }
    }

    #[test]
    fn non_finite_input_is_reported() {
        let err = integrate_tick(NeuronState { v: -65.0, w: -13.0 }, &RS, f64::NAN).unwrap_err();
        assert!(err.v.is_nan());
        assert!(integrate_tick(NeuronState { v: -65.0, w: -13.0 }, &RS, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn potential_never_exceeds_peak_after_a_tick() {
        let mut s = NeuronState::resting(&RS);
        for _ in 0..1000 {
            let (reset, _) = detect_and_reset(s, &RS);
            s = integrate_tick(reset, &RS, 40.0).unwrap();
            assert!(s.v <= PEAK);
        }
    }
}
