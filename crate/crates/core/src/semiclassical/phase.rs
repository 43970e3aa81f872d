//! Stable-state counts over two-parameter planes.

use rayon::prelude::*;

use super::cubic::symmetric_branch;
use super::roots::{find_all_steady_states, SearchGrid, Symmetry};
use super::stability::Stability;
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// A parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    J,
    F,
    DeltaOmega,
    U,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::J => "J",
            SweepAxis::F => "F",
            SweepAxis::DeltaOmega => "dw",
            SweepAxis::U => "U",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j" => Some(SweepAxis::J),
            "f" => Some(SweepAxis::F),
            "dw" | "delta_omega" | "detuning" => Some(SweepAxis::DeltaOmega),
            "u" => Some(SweepAxis::U),
            _ => None,
        }
    }

    /// `params` with this axis set to `value` (F is set real).
    pub fn apply(&self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        match self {
            SweepAxis::J => params.with_j(value),
            SweepAxis::F => params.with_f(value),
            SweepAxis::DeltaOmega => params.with_delta_omega(value),
            SweepAxis::U => params.with_u(value),
        }
    }
}

/// Counts at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCounts {
    pub n_stable: usize,
    pub n_breaking: usize,
    pub n_total: usize,
}

impl StateCounts {
    /// Region label: number of stable states.
    pub fn label(&self) -> usize {
        self.n_stable
    }
}

/// One cell of a phase diagram. `counts` is `None` when the solver failed there.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub value1: f64,
    pub value2: f64,
    pub counts: Option<StateCounts>,
}

/// Counts at a single parameter point.
///
/// At `J = 0` the cavities are independent; the counts are then the single-cavity ones
/// taken from the symmetric cubic, so product states are not reported as symmetry breaking.
pub fn count_states(params: &SystemParams, grid: &SearchGrid) -> Result<StateCounts> {
    if params.j() == 0.0 {
        let branch = symmetric_branch(params);
        if branch.is_empty() {
            return Err(Error::NoSteadyState);
        }
        return Ok(StateCounts {
            n_stable: branch.iter().filter(|b| b.stability == Stability::Stable).count(),
            n_breaking: 0,
            n_total: branch.len(),
        });
    }
    let roots = find_all_steady_states(params, grid)?;
    let stable = roots.iter().filter(|r| r.is_stable());
    Ok(StateCounts {
        n_stable: stable.clone().count(),
        n_breaking: stable.filter(|r| r.symmetry == Symmetry::SymmetryBreaking).count(),
        n_total: roots.len(),
    })
}

/// Sweeps the plane `axis1 × axis2` (row-major, `axis1` outer) and counts states everywhere.
///
/// Grid points where the solver fails are kept with `counts = None`.
pub fn phase_diagram(
    base: &SystemParams,
    axis1: (SweepAxis, &[f64]),
    axis2: (SweepAxis, &[f64]),
    grid: &SearchGrid,
) -> Result<Vec<PhaseCell>> {
    if axis1.1.len() < 2 || axis2.1.len() < 2 {
        return Err(Error::InvalidParameter("phase diagram needs at least 2 points per axis".into()));
    }
    if axis1.0 == axis2.0 {
        return Err(Error::InvalidParameter("phase diagram axes must differ".into()));
    }
    let points: Vec<(f64, f64)> = axis1
        .1
        .iter()
        .flat_map(|&a| axis2.1.iter().map(move |&b| (a, b)))
        .collect();
    Ok(points
        .into_par_iter()
        .map(|(a, b)| {
            let counts = axis1
                .0
                .apply(base, a)
                .and_then(|p| axis2.0.apply(&p, b))
                .and_then(|p| count_states(&p, grid))
                .ok();
            PhaseCell { value1: a, value2: b, counts }
        })
        .collect())
}
