//! Cloud kinematics: where the exhaled puff is at each instant.
//!
//! The puff leaves the mouth with momentum `I0` at angle `theta0` from the
//! horizontal and steadily gains vertical momentum `F0·t` from buoyancy. Its
//! travelled arc length s(t) along the curved path satisfies a quartic
//! balance
//!
//! ```text
//! (eta · alpha_e³ · rho_a / 4) · s⁴ + Z · s = ∫₀ᵗ |I(τ)| dτ
//! ```
//!
//! whose right-hand side — the time integral of the momentum magnitude — has
//! a closed form. The left side is strictly increasing in s, so the root is
//! unique and a bracketed solve is exact business. Direction follows the
//! momentum vector, the cloud radius grows linearly with distance through
//! the entrainment coefficient, and positions accumulate step by step.

use crate::error::SimError;
use crate::model::{Environment, Transmitter};

/// Kinematic state of the cloud at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// Time (s).
    pub t: f64,
    /// Curvilinear displacement along the path (m).
    pub s: f64,
    /// Direction angle from the horizontal (rad).
    pub theta: f64,
    /// Cloud radius, alpha_e · s (m).
    pub r: f64,
    /// Cloud centre x (m).
    pub x: f64,
    /// Cloud centre y (m).
    pub y: f64,
    /// Cloud centre z (m).
    pub z: f64,
    /// Cloud speed along the path (m/s).
    pub v_c: f64,
}

/// The cloud state at release: at the mouth, undisplaced, moving at the
/// discharge velocity.
pub fn initial_point(tx: &Transmitter) -> TrajectoryPoint {
    TrajectoryPoint {
        t: 0.0,
        s: 0.0,
        theta: tx.theta0,
        r: 0.0,
        x: tx.position[0],
        y: tx.position[1],
        z: tx.position[2],
        v_c: tx.v_c0,
    }
}

/// Horizontal and vertical momentum of the puff at time t (kg·m/s).
/// The horizontal part is conserved; the vertical part grows linearly
/// under the buoyancy force.
pub fn momentum_components(t: f64, tx: &Transmitter) -> (f64, f64) {
    debug_assert!(t >= 0.0);
    let ix = tx.i0 * tx.theta0.cos();
    let iy = tx.f0 * t + tx.i0 * tx.theta0.sin();
    (ix, iy)
}

/// Right-hand side of the displacement equation: the definite integral
/// ∫₀ᵗ |I(τ)| dτ of the momentum magnitude, in closed form.
///
/// With a = F0², b = 2·F0·I0·sin(theta0), c = I0² the antiderivative of
/// sqrt(a·τ² + b·τ + c) is
///
/// ```text
/// G(τ) = (F0·τ + I0·sinθ0)/(2·F0) · |I(τ)|
///      + I0²·cos²θ0/(2·F0) · ln(|I(τ)| + F0·τ + I0·sinθ0)
/// ```
///
/// and the returned value is G(t) − G(0), arranged so the constant factors
/// inside the logarithm cancel. When the buoyancy force vanishes the
/// integrand is the constant I0 and the integral degenerates to I0·t.
pub fn displacement_rhs(t: f64, tx: &Transmitter) -> f64 {
    debug_assert!(t >= 0.0);
    if tx.f0 == 0.0 {
        return tx.i0 * t;
    }
    let sin0 = tx.theta0.sin();
    let cos0 = tx.theta0.cos();
    let (ix, iy) = momentum_components(t, tx);
    let mag = ix.hypot(iy); // |I(t)| = sqrt(F0²t² + 2 F0 I0 sinθ0 t + I0²)

    let term_root = ((tx.f0 * t + tx.i0 * sin0) * mag - tx.i0 * sin0 * tx.i0) / (2.0 * tx.f0);
    let term_log = tx.i0 * tx.i0 * cos0 * cos0 / (2.0 * tx.f0)
        * ((mag + tx.f0 * t + tx.i0 * sin0) / (tx.i0 * (1.0 + sin0))).ln();
    term_root + term_log
}

/// Quartic left-hand side of the displacement equation at displacement s.
fn displacement_lhs(s: f64, quartic_coeff: f64, z: f64) -> f64 {
    quartic_coeff * s * s * s * s + z * s
}

/// Solves the displacement equation for the unique s ≥ 0 at time t, given
/// the buoyant mass deficit Z (kg) of the droplet load.
///
/// The left side is strictly increasing from 0, so the root is bracketed by
/// growing the upper end geometrically and then pinched by a regula-falsi /
/// bisection hybrid (Illinois variant). Residual tolerance is far below the
/// centimetre scale the model resolves.
pub fn solve_s(t: f64, z: f64, tx: &Transmitter, env: &Environment) -> Result<f64, SimError> {
    debug_assert!(t >= 0.0);
    debug_assert!(z >= 0.0);
    let rhs = displacement_rhs(t, tx);
    if rhs <= 0.0 {
        return Ok(0.0);
    }
    let c4 = tx.eta * (tx.alpha_e * tx.alpha_e * tx.alpha_e) * env.rho_a / 4.0;

    if z == 0.0 {
        // Pure quartic: direct fourth root.
        return Ok((rhs / c4).powf(0.25));
    }

    // Grow the upper bracket end geometrically until the sign changes.
    let mut lo = 0.0_f64;
    let mut f_lo = -rhs;
    let mut hi = 1.0_f64;
    let mut f_hi = displacement_lhs(hi, c4, z) - rhs;
    let mut growth = 0;
    while f_hi < 0.0 {
        hi *= 2.0;
        f_hi = displacement_lhs(hi, c4, z) - rhs;
        growth += 1;
        if growth > 200 {
            return Err(SimError::NumericalFailure {
                t,
                z,
                bracket_lo: lo,
                bracket_hi: hi,
            });
        }
    }

    // Illinois regula falsi: the usual false-position update, with the
    // retained endpoint's function value halved whenever the same side
    // updates twice in a row, which prevents one-sided stalling.
    let mut root = hi;
    let mut side = 0i8;
    for _ in 0..200 {
        let denom = f_hi - f_lo;
        let mut x = if denom != 0.0 {
            (lo * f_hi - hi * f_lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        if !x.is_finite() || x <= lo || x >= hi {
            x = 0.5 * (lo + hi);
        }
        let fx = displacement_lhs(x, c4, z) - rhs;
        root = x;
        if fx.abs() <= 1e-12 * rhs {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        // Absolute tolerance on the root itself.
        if hi - lo <= 1e-12 {
            break;
        }
    }

    let residual = (displacement_lhs(root, c4, z) - rhs).abs();
    if residual < 1e-9 * rhs {
        Ok(root)
    } else {
        Err(SimError::NumericalFailure {
            t,
            z,
            bracket_lo: lo,
            bracket_hi: hi,
        })
    }
}

/// Direction of motion at time t: the angle of the momentum vector,
/// atan(F0·t/(I0·cosθ0) + tanθ0). Starts at theta0 and climbs towards
/// vertical as buoyancy accumulates.
pub fn theta_at(t: f64, tx: &Transmitter) -> f64 {
    debug_assert!(t >= 0.0);
    let (ix, iy) = momentum_components(t, tx);
    iy.atan2(ix)
}

/// Advances the cloud centre along the new direction by the displacement
/// increment. The z coordinate never changes: no force acts across the
/// vertical plane of motion. `alpha_e` converts displacement to cloud
/// radius.
pub fn advance_position(
    prev: &TrajectoryPoint,
    s_new: f64,
    theta_new: f64,
    dt: f64,
    alpha_e: f64,
) -> Result<TrajectoryPoint, SimError> {
    if s_new < prev.s {
        return Err(SimError::InvalidStep {
            prev: prev.s,
            next: s_new,
        });
    }
    let ds = s_new - prev.s;
    Ok(TrajectoryPoint {
        t: prev.t + dt,
        s: s_new,
        theta: theta_new,
        r: alpha_e * s_new,
        x: prev.x + ds * theta_new.cos(),
        y: prev.y + ds * theta_new.sin(),
        z: prev.z,
        v_c: ds / dt,
    })
}
