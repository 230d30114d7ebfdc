//! Grid diagnostics for skewness orders between two laws.
//!
//! These are numerical checks, not proofs: `holds` only certifies the
//! evaluation grid at the stated tolerances.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{Result, SkewError};
use crate::expectile::expectile;
use crate::format::sig;

/// Default grid length for the crossing and expectile checks.
pub const DEFAULT_GRID: usize = 2001;
/// Default u-grid for the convex transform order; the check visits every
/// ordered triple, so its cost grows with the cube of the grid length.
pub const DEFAULT_CONVEX_GRID: usize = 201;
/// Endpoints of probability grids are kept this far from 0 and 1.
pub const GRID_MARGIN: f64 = 1e-6;
/// Differences of standardised cdfs within this band count as zero.
pub const DEAD_BAND: f64 = 1e-9;
/// Slack allowed in the three-point and expectile inequalities.
pub const ORDER_TOL: f64 = 1e-9;
/// At most this many witnesses are kept; `violations` holds the full count.
const MAX_WITNESSES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Holds => "holds",
            Relation::Fails => "fails",
            Relation::Inconclusive => "inconclusive",
        })
    }
}

/// A grid location backing a verdict: a violating `(u, v, w)` triple, a
/// crossing or touching point `z`, or a violating `alpha`. `gap` is the size
/// of the violation or the cdf difference there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub at: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    /// Empty exactly when the relation holds.
    pub witness: Vec<Witness>,
    /// Number of offending grid locations, of which at most 64 are listed.
    pub violations: usize,
    pub grid: Vec<f64>,
}

impl OrderVerdict {
    fn holds(grid: Vec<f64>) -> Self {
        OrderVerdict {
            relation: Relation::Holds,
            witness: Vec::new(),
            violations: 0,
            grid,
        }
    }

    fn with_witnesses(relation: Relation, mut witness: Vec<Witness>, grid: Vec<f64>) -> Self {
        debug_assert!(!witness.is_empty());
        let violations = witness.len();
        witness.truncate(MAX_WITNESSES);
        OrderVerdict {
            relation,
            witness,
            violations,
            grid,
        }
    }

    /// Relation followed by up to three witnesses.
    pub fn render(&self) -> String {
        let mut out = self.relation.to_string();
        if !self.witness.is_empty() {
            let shown: Vec<String> = self
                .witness
                .iter()
                .take(3)
                .map(|w| {
                    let at: Vec<String> = w.at.iter().map(|&x| sig(x, 6)).collect();
                    format!("({}) gap {}", at.join(", "), sig(w.gap, 3))
                })
                .collect();
            out.push_str(&format!(" [{} witness(es): {}]", self.violations, shown.join("; ")));
        }
        out
    }
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < 10 {
        return Err(SkewError::domain(format!("grid size {grid_size} is below 10")));
    }
    Ok(())
}

fn check_continuous(d: &DistributionSpec) -> Result<()> {
    if d.is_continuous() {
        Ok(())
    } else {
        Err(SkewError::Unsupported(format!(
            "order diagnostics need a continuous law, got {d}"
        )))
    }
}

/// Uniform grid on `[margin, 1 - margin]`.
pub fn probability_grid(grid_size: usize) -> Vec<f64> {
    let step = (1.0 - 2.0 * GRID_MARGIN) / (grid_size - 1) as f64;
    (0..grid_size).map(|i| GRID_MARGIN + step * i as f64).collect()
}

/// `F <=_2 G` through the three-point inequality
/// `(q(w) - 2 q(v) + q(u)) / (q(w) - q(u))` for `F` at most the same ratio for
/// `G`, checked on every ordered triple of the u-grid.
pub fn convex_transform_order(f: &DistributionSpec, g: &DistributionSpec, grid_size: usize) -> Result<OrderVerdict> {
    check_grid(grid_size)?;
    check_continuous(f)?;
    check_continuous(g)?;
    let grid = probability_grid(grid_size);
    let qf = grid.iter().map(|&u| f.quantile(u)).collect::<Result<Vec<_>>>()?;
    let qg = grid.iter().map(|&u| g.quantile(u)).collect::<Result<Vec<_>>>()?;
    let m = grid.len();
    let ratio = |q: &[f64], i: usize, j: usize, k: usize| ((q[k] - q[j]) - (q[j] - q[i])) / (q[k] - q[i]);
    let witness: Vec<Witness> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (qf, qg, grid) = (&qf, &qg, &grid);
            (i + 1..m).flat_map(move |j| {
                (j + 1..m).filter_map(move |k| {
                    let gap = ratio(qf, i, j, k) - ratio(qg, i, j, k);
                    // a NaN ratio means flat quantiles, which a continuous
                    // law cannot produce on the interior grid
                    (gap > ORDER_TOL || gap.is_nan()).then(|| Witness {
                        at: vec![grid[i], grid[j], grid[k]],
                        gap,
                    })
                })
            })
        })
        .collect();
    Ok(if witness.is_empty() {
        OrderVerdict::holds(grid)
    } else {
        OrderVerdict::with_witnesses(Relation::Fails, witness, grid)
    })
}

/// `F <=_mu^delta G`: the cdfs standardised by mean and mean absolute
/// deviation cross exactly once on each side of zero and
/// `F(mu_F) <= G(mu_G)`, or they coincide.
///
/// The z-grid is the union of the standardised quantiles of both laws at the
/// probability grid, plus zero. A touch without a sign change, or a
/// difference at zero inside the dead band, gives `inconclusive`.
pub fn mean_mad_order(f: &DistributionSpec, g: &DistributionSpec, grid_size: usize) -> Result<OrderVerdict> {
    check_grid(grid_size)?;
    check_continuous(f)?;
    check_continuous(g)?;
    let (mf, df) = (f.mean(), f.mad());
    let (mg, dg) = (g.mean(), g.mad());
    let probs = probability_grid(grid_size);
    let mut grid = Vec::with_capacity(2 * grid_size + 1);
    for &u in &probs {
        grid.push((f.quantile(u)? - mf) / df);
        grid.push((g.quantile(u)? - mg) / dg);
    }
    grid.push(0.0);
    grid.retain(|z| z.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let diff: Vec<f64> = grid
        .par_iter()
        .map(|&z| g.cdf(mg + dg * z) - f.cdf(mf + df * z))
        .collect();

    if diff.iter().all(|d| d.abs() <= DEAD_BAND) {
        return Ok(OrderVerdict::holds(grid));
    }
    let zero = grid.iter().position(|&z| z == 0.0).expect("zero is on the grid");
    let at_zero = diff[zero];
    if at_zero.abs() <= DEAD_BAND {
        let w = Witness { at: vec![0.0], gap: at_zero };
        return Ok(OrderVerdict::with_witnesses(Relation::Inconclusive, vec![w], grid));
    }

    // walk outward from zero on each side
    let left: Vec<usize> = (0..=zero).rev().collect();
    let right: Vec<usize> = (zero..grid.len()).collect();
    let mut crossings = Vec::new();
    let mut touches = Vec::new();
    let mut per_side = [0usize; 2];
    for (side, idx) in [left, right].iter().enumerate() {
        let scan = scan_side(&grid, &diff, idx);
        per_side[side] = scan.crossings.len();
        crossings.extend(scan.crossings);
        touches.extend(scan.touches);
    }
    if !touches.is_empty() {
        return Ok(OrderVerdict::with_witnesses(Relation::Inconclusive, touches, grid));
    }
    if per_side == [1, 1] && at_zero > 0.0 {
        return Ok(OrderVerdict::holds(grid));
    }
    let mut witness = crossings;
    if at_zero < 0.0 {
        witness.insert(0, Witness { at: vec![0.0], gap: at_zero });
    }
    if witness.is_empty() {
        // no crossing on some side while the sign at zero is right: report
        // the largest difference as the offending point
        let (i, d) = diff
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty grid");
        witness.push(Witness { at: vec![grid[i]], gap: *d });
    }
    Ok(OrderVerdict::with_witnesses(Relation::Fails, witness, grid))
}

struct SideScan {
    crossings: Vec<Witness>,
    touches: Vec<Witness>,
}

/// Sign changes of `diff` along `idx`, which starts at zero (nonzero there)
/// and runs into a tail. Dead-band runs between equal signs are touches; a
/// dead-band run reaching the end of the tail is ignored.
fn scan_side(grid: &[f64], diff: &[f64], idx: &[usize]) -> SideScan {
    let mut out = SideScan {
        crossings: Vec::new(),
        touches: Vec::new(),
    };
    let mut last = idx[0];
    let mut in_band = false;
    for &i in &idx[1..] {
        let d = diff[i];
        if d.abs() <= DEAD_BAND {
            in_band = true;
            continue;
        }
        let prev = diff[last];
        if (d > 0.0) != (prev > 0.0) {
            out.crossings.push(Witness {
                at: vec![0.5 * (grid[last] + grid[i])],
                gap: d - prev,
            });
        } else if in_band {
            out.touches.push(Witness {
                at: vec![0.5 * (grid[last] + grid[i])],
                gap: 0.0,
            });
        }
        in_band = false;
        last = i;
    }
    out
}

/// `F <=_e G`: `e_F(alpha) <= e_G(alpha)` on a uniform alpha-grid, with
/// slack `1e-9 (1 + |e_G|)`.
pub fn expectile_order(f: &DistributionSpec, g: &DistributionSpec, grid_size: usize) -> Result<OrderVerdict> {
    check_grid(grid_size)?;
    let grid = probability_grid(grid_size);
    let pairs = grid
        .par_iter()
        .map(|&a| Ok((a, expectile(f, a)?, expectile(g, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let witness: Vec<Witness> = pairs
        .into_iter()
        .filter(|&(_, ef, eg)| ef > eg + ORDER_TOL * (1.0 + eg.abs()))
        .map(|(a, ef, eg)| Witness { at: vec![a], gap: ef - eg })
        .collect();
    Ok(if witness.is_empty() {
        OrderVerdict::holds(grid)
    } else {
        OrderVerdict::with_witnesses(Relation::Fails, witness, grid)
    })
}
