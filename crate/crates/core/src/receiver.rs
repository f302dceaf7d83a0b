//! Reception: how much of the passing cloud the exposed face intercepts.
//!
//! The receiver is a disc of area `A_R` standing in the plane x = x_R. Each
//! step, the spherical cloud cuts that plane in a circle (if it reaches it
//! at all); the disc and the circle overlap in a lens whose area gates the
//! droplet inflow. Per-class inflows are accumulated over the exposure
//! history, scaled by the current-step geometric factor, rounded to whole
//! droplets, summed, and compared against the detection threshold γ.
//! Received droplets are removed from the cloud so they cannot be delivered
//! twice.

use crate::model::ReceiverGeometry;

/// Reception outcome at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptionRecord {
    /// Time (s).
    pub t: f64,
    /// Rounded received count per droplet class at this step.
    pub per_class_received: Vec<u64>,
    /// Cumulative quantized received count: sum of the per-class values.
    pub n_r: u64,
    /// Infection state: 1 while `n_r` strictly exceeds the threshold.
    pub state: u8,
}

/// How the receiver disc relates to the cloud's cross-section circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapBranch {
    /// No cross-section, or the circles are disjoint: nothing is received.
    None,
    /// The circles overlap in a lens (or the cross-section sits inside the
    /// disc): the lens area gates the inflow.
    Partial,
    /// The cross-section circle contains the whole disc: the full disc
    /// area gates the inflow.
    Encompassed,
}

/// Radius of the circle in which the cloud sphere cuts the receiver plane
/// x = x_R, or `None` when the sphere does not reach the plane. A tangent
/// sphere yields radius 0.
pub fn cross_section_radius(r_cloud: f64, x_cloud: f64, x_r: f64) -> Option<f64> {
    let offset = (x_r - x_cloud).abs();
    if offset > r_cloud {
        return None;
    }
    Some((r_cloud * r_cloud - offset * offset).max(0.0).sqrt())
}

/// In-plane distance between the receiver disc centre and the cloud centre.
pub fn center_distance(receiver: &ReceiverGeometry, y_cloud: f64, z_cloud: f64) -> f64 {
    (receiver.position[1] - y_cloud).hypot(receiver.position[2] - z_cloud)
}

/// Classifies the disc/cross-section configuration, given that a
/// cross-section of radius `r_cs` exists. Boundary ties go to the closed
/// branch that keeps the area continuous.
pub fn overlap_branch(r_r: f64, r_cs: f64, d_rc: f64) -> OverlapBranch {
    if d_rc >= r_cs + r_r {
        OverlapBranch::None
    } else if d_rc <= r_cs - r_r {
        OverlapBranch::Encompassed
    } else {
        OverlapBranch::Partial
    }
}

/// Area of the intersection of two circles with radii `r_r`, `r_cs` whose
/// centres sit `d_rc` apart. Total on all non-negative inputs: disjoint
/// circles give 0, a contained circle gives its full area, and anything in
/// between gets the two-circle lens formula.
pub fn intersection_area(r_r: f64, r_cs: f64, d_rc: f64) -> f64 {
    debug_assert!(r_r >= 0.0 && r_cs >= 0.0 && d_rc >= 0.0);
    let small = r_r.min(r_cs);
    let large = r_r.max(r_cs);
    if d_rc >= r_r + r_cs {
        return 0.0;
    }
    if d_rc <= large - small {
        return std::f64::consts::PI * small * small;
    }
    // Lens: circular-segment areas on both sides of the chord, with the
    // triangle part written as Heron's formula. Clamp the acos arguments
    // against rounding drift just outside [-1, 1].
    let d2 = d_rc * d_rc;
    let arg_r = ((d2 + r_r * r_r - r_cs * r_cs) / (2.0 * d_rc * r_r)).clamp(-1.0, 1.0);
    let arg_cs = ((d2 + r_cs * r_cs - r_r * r_r) / (2.0 * d_rc * r_cs)).clamp(-1.0, 1.0);
    let triangle = (-d_rc + r_r + r_cs)
        * (d_rc + r_r - r_cs)
        * (d_rc - r_r + r_cs)
        * (d_rc + r_r + r_cs);
    r_r * r_r * arg_r.acos() + r_cs * r_cs * arg_cs.acos() - 0.5 * triangle.max(0.0).sqrt()
}

/// Mean droplet inflow through `area` during one step: the fraction of the
/// cloud volume swept through the opening, v_c·area·Δt/(η·r³), times the
/// class count.
pub fn reconstruct_class(
    v_c: f64,
    area: f64,
    count: f64,
    r_cloud: f64,
    eta: f64,
    dt: f64,
) -> f64 {
    debug_assert!(r_cloud > 0.0);
    v_c * area * count * dt / (eta * r_cloud * r_cloud * r_cloud)
}

/// Rounds one class's accumulated exposure to whole droplets: the entire
/// count history is summed, scaled by the current-step geometric factor
/// (v_c·area·Δt/(η·r³)), and rounded half-up.
pub fn accumulate_quantize(factor: f64, count_history: &[f64]) -> u64 {
    debug_assert!(factor >= 0.0);
    debug_assert!(count_history.iter().all(|&c| c >= 0.0));
    let cumulative: f64 = count_history.iter().sum();
    (factor * cumulative + 0.5).floor() as u64
}

/// Binary infection decision: infected (1) iff the received count strictly
/// exceeds the threshold.
pub fn detect(n_r: u64, gamma: u64) -> u8 {
    u8::from(n_r > gamma)
}

/// Removes received droplets from a class count, clamped at zero (rounding
/// can ask for slightly more than remains).
pub fn deplete(count: f64, received: u64) -> f64 {
    (count - received as f64).max(0.0)
}
