//! Second-order flux-limited advection shared by both kinetic models.
//!
//! The limiter choice is made once per line from a driver array (G) and
//! replayed on every follower (H, or transverse samples of a full 3D
//! distribution), which keeps the update linear in the followers.

use crate::grid::{Grid1D, VelocityGrid1D};
use crate::state::KineticState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Zero ghost values on both ends.
    ZeroInflow,
}

/// Slope reconstruction inside a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limiter {
    /// Minmod of the one-sided differences.
    Minmod,
    /// Central difference, scaled down only as far as needed to keep both
    /// face values nonnegative. Exact for linear data wherever it is not
    /// active, so discrete moment exchange matches the continuous one.
    Positive,
}

/// The slope chosen for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Zero,
    /// `w · (q_k − q_{k−1})`.
    Left(f64),
    /// `w · (q_{k+1} − q_k)`.
    Right(f64),
    /// `w · (q_{k+1} − q_{k−1})/2`.
    Central(f64),
}

#[inline]
fn pick(l: f64, r: f64) -> Slope {
    if l * r <= 0.0 {
        Slope::Zero
    } else if l.abs() <= r.abs() {
        Slope::Left(1.0)
    } else {
        Slope::Right(1.0)
    }
}

#[inline]
fn at(q: &[f64], k: isize, bc: Boundary) -> f64 {
    let n = q.len() as isize;
    match bc {
        Boundary::Periodic => q[k.rem_euclid(n) as usize],
        Boundary::ZeroInflow => {
            if k < 0 || k >= n {
                0.0
            } else {
                q[k as usize]
            }
        }
    }
}

#[inline]
fn slope(q: &[f64], k: isize, s: Slope, bc: Boundary) -> f64 {
    match s {
        Slope::Zero => 0.0,
        Slope::Left(w) => w * (at(q, k, bc) - at(q, k - 1, bc)),
        Slope::Right(w) => w * (at(q, k + 1, bc) - at(q, k, bc)),
        Slope::Central(w) => 0.5 * w * (at(q, k + 1, bc) - at(q, k - 1, bc)),
    }
}

/// Minmod choices for every cell of a line.
pub fn limiter_choices(driver: &[f64], bc: Boundary, out: &mut Vec<Slope>) {
    limiter_choices_with(driver, bc, Limiter::Minmod, out);
}

pub fn limiter_choices_with(driver: &[f64], bc: Boundary, limiter: Limiter, out: &mut Vec<Slope>) {
    out.clear();
    let n = driver.len() as isize;
    match limiter {
        Limiter::Minmod => out.extend((0..n).map(|k| {
            let (l, c, r) = (
                at(driver, k - 1, bc),
                at(driver, k, bc),
                at(driver, k + 1, bc),
            );
            pick(c - l, r - c)
        })),
        Limiter::Positive => {
            out.resize(driver.len(), Slope::Central(1.0));
            tighten_positive(driver, bc, out);
        }
    }
}

/// One step of `q_t + a q_x = 0` with Courant number `c = a dt/dx`, `|c| ≤ 1`.
///
/// `flux` is scratch of length `n + 1`. Returns the amount that left through
/// the boundary, in units of `q · dx` (zero for periodic lines).
pub fn advect_line(
    q: &mut [f64],
    choices: &[Slope],
    c: f64,
    bc: Boundary,
    flux: &mut Vec<f64>,
) -> f64 {
    let n = q.len();
    if c == 0.0 || n == 0 {
        return 0.0;
    }
    let half = 0.5 * (1.0 - c.abs());
    let ghost = |k: isize| -> Slope {
        if k < 0 || k >= n as isize {
            match bc {
                Boundary::Periodic => choices[k.rem_euclid(n as isize) as usize],
                Boundary::ZeroInflow => Slope::Zero,
            }
        } else {
            choices[k as usize]
        }
    };
    flux.clear();
    // Face f sits between cells f-1 and f.
    for f in 0..=n as isize {
        let up = if c > 0.0 { f - 1 } else { f };
        let s = slope(q, up, ghost(up), bc);
        let val = if c > 0.0 {
            at(q, up, bc) + half * s
        } else {
            at(q, up, bc) - half * s
        };
        flux.push(c * val);
    }
    for k in 0..n {
        q[k] -= flux[k + 1] - flux[k];
    }
    match bc {
        Boundary::Periodic => 0.0,
        Boundary::ZeroInflow => {
            if c > 0.0 {
                flux[n]
            } else {
                -flux[0]
            }
        }
    }
}

/// Scales slope weights down so that `field` also keeps nonnegative face values.
pub fn tighten_positive(field: &[f64], bc: Boundary, choices: &mut [Slope]) {
    for k in 0..field.len() {
        let choice = choices[k];
        let half = 0.5 * slope(field, k as isize, choice, bc).abs();
        let c = field[k];
        if half <= c {
            continue;
        }
        let w = if c > 0.0 { c / half } else { 0.0 };
        choices[k] = match choice {
            _ if w == 0.0 => Slope::Zero,
            Slope::Zero => Slope::Zero,
            Slope::Left(v) => Slope::Left(v * w),
            Slope::Right(v) => Slope::Right(v * w),
            Slope::Central(v) => Slope::Central(v * w),
        };
    }
}

/// As [`advect_coupled_with`] under minmod.
pub fn advect_coupled(
    driver: &mut [f64],
    followers: &mut [&mut [f64]],
    c: f64,
    bc: Boundary,
    choices: &mut Vec<Slope>,
    flux: &mut Vec<f64>,
) -> f64 {
    advect_coupled_with(driver, followers, c, bc, Limiter::Minmod, choices, flux)
}

/// Advects driver and followers with shared slope choices under `limiter`.
///
/// Choices come from the driver, then weights are lowered wherever a
/// follower would otherwise get a negative face value.
pub fn advect_coupled_with(
    driver: &mut [f64],
    followers: &mut [&mut [f64]],
    c: f64,
    bc: Boundary,
    limiter: Limiter,
    choices: &mut Vec<Slope>,
    flux: &mut Vec<f64>,
) -> f64 {
    limiter_choices_with(driver, bc, limiter, choices);
    for f in followers.iter() {
        tighten_positive(f, bc, choices);
    }
    for f in followers.iter_mut() {
        advect_line(f, choices, c, bc, flux);
    }
    advect_line(driver, choices, c, bc, flux)
}

/// Spatial transport at speed `speed_scale · ξ₁` for every node, species and both reduced arrays.
pub fn transport_with_speed(
    state: &mut KineticState,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    speed_scale: f64,
    dt: f64,
) {
    let nv = state.nnodes;
    let nc = state.ncells;
    let mut gcol = vec![0.0; nc];
    let mut hcol = vec![0.0; nc];
    let mut choices = Vec::with_capacity(nc);
    let mut flux = Vec::with_capacity(nc + 1);
    for i in 0..state.species() {
        for k in 0..nv {
            let c = speed_scale * vgrid.nodes[k] * dt / grid.dx;
            for cell in 0..nc {
                gcol[cell] = state.g[i][cell * nv + k];
                hcol[cell] = state.h[i][cell * nv + k];
            }
            advect_coupled(
                &mut gcol,
                &mut [&mut hcol],
                c,
                Boundary::Periodic,
                &mut choices,
                &mut flux,
            );
            for cell in 0..nc {
                state.g[i][cell * nv + k] = gcol[cell];
                state.h[i][cell * nv + k] = hcol[cell];
            }
        }
    }
}

/// Gross–Krook transport: speed `ξ₁/ε`. Cached moments are not refreshed.
pub fn transport_substep(
    state: &mut KineticState,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    eps: f64,
    dt: f64,
) {
    transport_with_speed(state, grid, vgrid, 1.0 / eps, dt);
}
