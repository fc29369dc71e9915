//! The leaf-curvature equation `k' = k²(k²+1)/(k²−1)` along the normal
//! geodesics, its closed-form implicit solution, and an adaptive
//! Dormand–Prince integrator with dense output.

use serde::Serialize;

use crate::error::{Error, Result};

/// `|k² − 1|` at or below which the right-hand side is undefined.
pub const POLE_TOL: f64 = 1e-10;
/// Integration stops before `|k² − 1|` drops below this.
pub const BRANCH_MARGIN: f64 = 1e-3;
/// Beyond this magnitude the solution is treated as having blown up.
pub const BLOW_UP: f64 = 1e12;

pub fn ode_rhs(k: f64) -> Result<f64> {
    let k2 = k * k;
    if (k2 - 1.0).abs() <= POLE_TOL {
        return Err(Error::Pole(k));
    }
    Ok(k2 * (k2 + 1.0) / (k2 - 1.0))
}

/// `u = 2 atan k + 1/k + u0`.
pub fn implicit_solution(k: f64, u0: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::ZeroCurvature);
    }
    Ok(2.0 * k.atan() + 1.0 / k + u0)
}

/// `du/dk = (k² − 1)/(k²(k² + 1))`.
pub fn implicit_derivative(k: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::ZeroCurvature);
    }
    let k2 = k * k;
    Ok((k2 - 1.0) / (k2 * (k2 + 1.0)))
}

/// Index of the open interval of `(−∞,−1) ∪ (−1,0) ∪ (0,1) ∪ (1,∞)` holding `k`.
pub fn branch_of(k: f64) -> Option<usize> {
    if !k.is_finite() || k == 0.0 || k.abs() == 1.0 {
        return None;
    }
    Some(match k {
        k if k < -1.0 => 0,
        k if k < 0.0 => 1,
        k if k < 1.0 => 2,
        _ => 3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    pub u: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Integrate over `u ∈ [0, span]` (or `[span, 0]` for negative spans).
    USpan(f64),
    /// Integrate until `k` reaches the target, in whichever direction of `u` gets there.
    TargetK(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, initial_step: 1e-3, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<OdeState>,
    /// Constant of the implicit solution fixed by the initial state; `None` for `k0 = 0`.
    pub u0: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> OdeState {
        *self.states.last().expect("trajectory always holds the initial state")
    }

    /// `implicit_solution(k, u0) − u` per state (0 on the fixed point `k ≡ 0`).
    pub fn implicit_residuals(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| match self.u0 {
                Some(u0) => implicit_solution(s.k, u0).map(|v| v - s.u).unwrap_or(f64::NAN),
                None => 0.0,
            })
            .collect()
    }

    /// CSV with header `u,k,implicit_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,k,implicit_residual\n");
        for (s, r) in self.states.iter().zip(self.implicit_residuals()) {
            out.push_str(&format!("{},{},{:e}\n", s.u, s.k, r));
        }
        out
    }
}

// Dormand–Prince 5(4) tableau (autonomous, so the nodes are not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct Step {
    y1: f64,
    err: f64,
    /// Dense-output coefficients.
    cont: [f64; 5],
}

fn dp_step(f: &impl Fn(f64) -> Result<f64>, y0: f64, h: f64) -> Result<Step> {
    let mut k = [0.0; 7];
    k[0] = f(y0)?;
    for s in 1..7 {
        let y = y0 + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
        k[s] = f(y)?;
    }
    let y1 = y0 + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
    let err = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
    let r2 = y1 - y0;
    let r3 = h * k[0] - r2;
    let r4 = r2 - h * k[6] - r3;
    let r5 = h * (0..7).map(|j| D[j] * k[j]).sum::<f64>();
    Ok(Step { y1, err, cont: [y0, r2, r3, r4, r5] })
}

fn dense(c: &[f64; 5], theta: f64) -> f64 {
    let t1 = 1.0 - theta;
    c[0] + theta * (c[1] + t1 * (c[2] + theta * (c[3] + t1 * c[4])))
}

fn check_branch(u: f64, k: f64) -> Result<()> {
    if (k * k - 1.0).abs() < BRANCH_MARGIN || !k.is_finite() || k.abs() > BLOW_UP {
        return Err(Error::BranchExit { u, k });
    }
    Ok(())
}

/// Integrates the leaf-curvature equation from `(u, k) = (0, k0)`.
pub fn integrate_k(k0: f64, stop: Stop, opts: &OdeOptions) -> Result<Trajectory> {
    ode_rhs(k0)?;
    if !k0.is_finite() {
        return Err(Error::Branch(format!("initial curvature {k0} is not finite")));
    }
    check_branch(0.0, k0)?;
    let start = OdeState { u: 0.0, k: k0 };
    let u0 = (k0 != 0.0).then(|| -(2.0 * k0.atan() + 1.0 / k0));

    if k0 == 0.0 {
        return match stop {
            Stop::USpan(span) => Ok(Trajectory { states: vec![start, OdeState { u: span, k: 0.0 }], u0 }),
            Stop::TargetK(t) if t == 0.0 => Ok(Trajectory { states: vec![start], u0 }),
            Stop::TargetK(t) => Err(Error::Branch(format!("k = 0 is a fixed point; target {t} is unreachable"))),
        };
    }

    // direction of u and the target, if any
    let (dir, u_end, target) = match stop {
        Stop::USpan(span) => {
            if !span.is_finite() {
                return Err(Error::Integration(format!("span {span} is not finite")));
            }
            (span.signum(), span, None)
        }
        Stop::TargetK(t) => {
            if branch_of(t) != branch_of(k0) {
                return Err(Error::Branch(format!("target {t} is not on the branch of k0 = {k0}")));
            }
            check_branch(f64::NAN, t)?;
            if t == k0 {
                return Ok(Trajectory { states: vec![start], u0 });
            }
            let dir = ((t - k0) * ode_rhs(k0)?).signum();
            (dir, dir * f64::INFINITY, Some(t))
        }
    };
    let f = |k: f64| ode_rhs(k);

    let mut states = vec![start];
    if u_end == 0.0 {
        return Ok(Trajectory { states, u0 });
    }
    let (mut u, mut k) = (0.0, k0);
    let mut h = dir * opts.initial_step;
    for _ in 0..opts.max_steps {
        if target.is_none() && (u + h - u_end) * dir > 0.0 {
            h = u_end - u;
        }
        let step = dp_step(&f, k, h);
        let step = match step {
            Ok(s) => s,
            // a stage landed on the pole: shrink and retry
            Err(Error::Pole(_)) => {
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let sc = opts.atol + opts.rtol * k.abs().max(step.y1.abs());
        let err = (step.err / sc).abs();
        if !err.is_finite() || err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
            if h.abs() < 1e-300 {
                return Err(Error::Integration("step size underflow".into()));
            }
            continue;
        }
        let u_new = u + h;
        if let Some(t) = target {
            if (step.y1 - t) * (k - t) <= 0.0 {
                let ut = locate(&f, &step.cont, u, k, h, t)?;
                states.push(OdeState { u: ut, k: t });
                return Ok(Trajectory { states, u0 });
            }
        }
        check_branch(u_new, step.y1)?;
        u = u_new;
        k = step.y1;
        states.push(OdeState { u, k });
        if target.is_none() && (u - u_end) * dir >= 0.0 {
            return Ok(Trajectory { states, u0 });
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    Err(Error::Integration(format!("no convergence within {} steps", opts.max_steps)))
}

/// Finds `u*` in the accepted step `[u, u + h]` with `k(u*) = target`:
/// a dense-output root followed by Newton corrections on re-integrated values.
fn locate(f: &impl Fn(f64) -> Result<f64>, cont: &[f64; 5], u: f64, k: f64, h: f64, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (dense(cont, mid) - target) * (k - target) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut ut = u + 0.5 * (lo + hi) * h;
    for _ in 0..3 {
        let k_at = dp_step(f, k, ut - u)?.y1;
        let dk = k_at - target;
        ut -= dk / f(k_at)?;
        if dk.abs() <= 1e-15 * target.abs().max(1.0) {
            break;
        }
    }
    Ok(ut)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn closed_delta(k0: f64, k1: f64) -> f64 {
        2.0 * k1.atan() + 1.0 / k1 - 2.0 * k0.atan() - 1.0 / k0
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(ode_rhs(0.0).unwrap(), 0.0);
        assert!((ode_rhs(2.0).unwrap() - 20.0 / 3.0).abs() < 1e-15);
        assert!(matches!(ode_rhs(1.0), Err(Error::Pole(_))));
        assert!(matches!(ode_rhs(-1.0), Err(Error::Pole(_))));
        assert_eq!(Error::Pole(1.0).to_string(), "pole at k^2=1 (k = 1)");
    }

    #[test]
    fn implicit_examples() {
        let u0 = -(2.0 * 2f64.atan() + 0.5);
        assert!(implicit_solution(2.0, u0).unwrap().abs() < 1e-15);
        let d = implicit_solution(3.0, u0).unwrap();
        assert!((d - 0.117128).abs() < 1e-6, "{d}");
        assert!((implicit_derivative(2.0).unwrap() - 0.15).abs() < 1e-15);
        assert!(matches!(implicit_solution(0.0, 0.0), Err(Error::ZeroCurvature)));
    }

    #[test]
    fn target_from_two_to_three() {
        let tr = integrate_k(2.0, Stop::TargetK(3.0), &OdeOptions::default()).unwrap();
        let last = tr.last();
        assert_eq!(last.k, 3.0);
        assert!((last.u - closed_delta(2.0, 3.0)).abs() < 1e-8, "{}", last.u - closed_delta(2.0, 3.0));
        assert!(tr.implicit_residuals().iter().all(|r| r.abs() < 1e-8));
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let tr = integrate_k(0.0, Stop::USpan(1.0), &OdeOptions::default()).unwrap();
        assert!(tr.states.iter().all(|s| s.k == 0.0));
        assert_eq!(tr.last().u, 1.0);
        assert!(tr.implicit_residuals().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn lower_branch_decreases() {
        let tr = integrate_k(0.5, Stop::USpan(3.0), &OdeOptions::default()).unwrap();
        assert!(tr.states.windows(2).all(|w| w[1].k < w[0].k && w[1].k > 0.0));
        assert!((tr.last().u - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pole_and_branch_exits() {
        assert!(matches!(integrate_k(1.0, Stop::USpan(1.0), &OdeOptions::default()), Err(Error::Pole(_))));
        // k ∈ (−1, 0) decreases toward −1
        assert!(matches!(integrate_k(-0.5, Stop::USpan(10.0), &OdeOptions::default()), Err(Error::BranchExit { .. })));
        // k > 1 blows up before u = π − u(k0)
        assert!(matches!(integrate_k(2.0, Stop::USpan(1.0), &OdeOptions::default()), Err(Error::BranchExit { .. })));
        assert!(matches!(integrate_k(2.0, Stop::TargetK(0.5), &OdeOptions::default()), Err(Error::Branch(_))));
    }

    #[test]
    fn backward_targets() {
        // k' > 0 on (1, ∞): reaching a smaller k means integrating backwards in u
        let tr = integrate_k(3.0, Stop::TargetK(2.0), &OdeOptions::default()).unwrap();
        assert!((tr.last().u + closed_delta(2.0, 3.0)).abs() < 1e-8);
    }

    #[test]
    fn implicit_consistency_per_branch() {
        let opts = OdeOptions::default();
        let inits = [-5.0, -3.0, -2.0, -1.5, -1.2, -0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0, 3.0, 5.0];
        for k0 in inits {
            // stay well inside the branch for the given direction
            let span = if k0 > 1.0 {
                0.5 * (std::f64::consts::PI - implicit_solution(k0, 0.0).unwrap())
            } else if k0 > 0.0 {
                5.0
            } else {
                0.5 * (implicit_solution(-1.0, 0.0).unwrap() - implicit_solution(k0, 0.0).unwrap()).abs()
            };
            let span = if k0 < 0.0 { span.min(0.3 * k0.abs()) } else { span };
            let tr = integrate_k(k0, Stop::USpan(span), &opts).unwrap();
            for r in tr.implicit_residuals() {
                assert!(r.abs() < 1e-8, "k0={k0} r={r}");
            }
        }
    }

    proptest! {
        #[test]
        fn targets_match_closed_form(k0 in 1.1f64..4.0, dk in 0.05f64..2.0) {
            let k1 = k0 + dk;
            let tr = integrate_k(k0, Stop::TargetK(k1), &OdeOptions::default()).unwrap();
            prop_assert!((tr.last().u - closed_delta(k0, k1)).abs() < 1e-8);
        }
    }
}
