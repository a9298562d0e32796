//! Phase diagrams of the Gaussian toy model, computed twice: from winding
//! numbers of the loop and from charge-signed zero-mode counts of the open
//! chain. Also the batch report over the built-in parameter rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::majorana::{analyze, zero_mode_summary, DEFAULT_ZERO_THRESHOLD};
use crate::model::{preset, CouplingSet, DEFAULT_GRID_SIZE, PRESET_NAMES};
use crate::winding::winding_of_coupling;

/// Toy-model couplings for channels `n = 1..=range` at `g = 0`:
/// `jx[n] = exp(-4 (x - (3 - n)/2)^2)`,
/// `jy[n] = 2 (y - 1) exp(-4 (y - (2 - n)/2)^2)`.
pub fn toy_couplings(x: f64, y: f64, range: usize) -> Result<CouplingSet> {
    if range == 0 {
        return Err(Error::InvalidArgument("R must be at least 1".into()));
    }
    let (jx, jy) = (1..=range)
        .map(|n| {
            let n = n as f64;
            let cx = 0.5 * (3.0 - n);
            let cy = 0.5 * (2.0 - n);
            (
                (-4.0 * (x - cx).powi(2)).exp(),
                2.0 * (y - 1.0) * (-4.0 * (y - cy).powi(2)).exp(),
            )
        })
        .unzip();
    CouplingSet::new(jx, jy, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "R")]
    pub range: usize,
    pub n_sites: usize,
    pub grid_size: usize,
    pub threshold: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            x_range: (-0.5, 2.5),
            y_range: (-0.5, 2.5),
            nx: 101,
            ny: 101,
            range: 5,
            n_sites: 200,
            grid_size: DEFAULT_GRID_SIZE,
            threshold: DEFAULT_ZERO_THRESHOLD,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.nx < 2 || self.ny < 2 {
            return bad("nx and ny must be at least 2");
        }
        let ok_range = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok_range(self.x_range) || !ok_range(self.y_range) {
            return bad("ranges must be finite with min < max");
        }
        if self.range == 0 {
            return bad("R must be at least 1");
        }
        if self.n_sites <= self.range {
            return bad("n_sites must exceed R");
        }
        if self.grid_size < 4 * self.range {
            return bad("grid_size must be at least 4*R");
        }
        if !(self.threshold > 0.0) {
            return bad("threshold must be positive");
        }
        Ok(())
    }

    pub fn x_at(&self, i: usize) -> f64 {
        let (a, b) = self.x_range;
        a + (b - a) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y_at(&self, j: usize) -> f64 {
        let (a, b) = self.y_range;
        a + (b - a) * j as f64 / (self.ny - 1) as f64
    }
}

/// Why a cell carries no winding number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellFlag {
    /// Loop passes within the gap tolerance of the origin.
    Critical,
    /// Angle accumulation and quadrature disagree; the loop is too close to
    /// the origin for the sampling.
    Inconsistent,
    /// Any other numerical failure.
    Error,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Critical => "critical",
            CellFlag::Inconsistent => "inconsistent",
            CellFlag::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    /// `None` when flagged.
    pub n_wind: Option<i64>,
    pub n_zero: usize,
    pub charge: f64,
    pub c_inferred: i64,
    pub flag: Option<CellFlag>,
}

/// `sign(charge) * round(n_zero / 2)`.
pub fn inferred_chern(n_zero: usize, charge: f64) -> i64 {
    let magnitude = (n_zero as f64 / 2.0).round() as i64;
    if charge > 0.0 {
        magnitude
    } else if charge < 0.0 {
        -magnitude
    } else {
        0
    }
}

/// Evaluate one cell. Failures become flags.
pub fn evaluate_cell(spec: &SweepSpec, x: f64, y: f64) -> PhaseCell {
    let mut cell = PhaseCell {
        x,
        y,
        n_wind: None,
        n_zero: 0,
        charge: 0.0,
        c_inferred: 0,
        flag: None,
    };
    let c = match toy_couplings(x, y, spec.range) {
        Ok(c) => c,
        Err(_) => {
            cell.flag = Some(CellFlag::Error);
            return cell;
        }
    };
    match winding_of_coupling(&c, spec.grid_size) {
        Ok(w) => cell.n_wind = Some(w.n),
        Err(Error::LoopThroughOrigin { .. }) => cell.flag = Some(CellFlag::Critical),
        Err(Error::InconsistentWinding { .. }) => cell.flag = Some(CellFlag::Inconsistent),
        Err(_) => cell.flag = Some(CellFlag::Error),
    }
    match zero_mode_summary(&c, spec.n_sites, spec.threshold) {
        Ok((n_zero, charge)) => {
            cell.n_zero = n_zero;
            cell.charge = charge;
            cell.c_inferred = inferred_chern(n_zero, charge);
        }
        Err(_) => cell.flag = Some(CellFlag::Error),
    }
    cell
}

/// Result of a sweep, cells stored row by row with `x` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub spec: SweepSpec,
    pub cells: Vec<PhaseCell>,
}

pub fn sweep(spec: &SweepSpec) -> Result<PhaseGrid> {
    spec.validate()?;
    // each cell lands in its own slot; order does not depend on scheduling
    let cells = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % spec.nx, idx / spec.nx);
            evaluate_cell(spec, spec.x_at(i), spec.y_at(j))
        })
        .collect();
    Ok(PhaseGrid {
        spec: spec.clone(),
        cells,
    })
}

/// Agreement between the winding map and the charge-signed zero-mode map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    /// Non-flagged cells.
    pub considered: usize,
    pub agreeing: usize,
    /// Indices of non-flagged cells with `c_inferred != n_wind`.
    pub disagreeing: Vec<usize>,
}

impl Agreement {
    pub fn fraction(&self) -> f64 {
        if self.considered == 0 {
            1.0
        } else {
            self.agreeing as f64 / self.considered as f64
        }
    }
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[j * self.spec.nx + i]
    }

    pub fn agreement(&self) -> Agreement {
        let mut a = Agreement {
            considered: 0,
            agreeing: 0,
            disagreeing: Vec::new(),
        };
        for (idx, cell) in self.cells.iter().enumerate() {
            let (Some(n), None) = (cell.n_wind, cell.flag) else { continue };
            a.considered += 1;
            if cell.c_inferred == n {
                a.agreeing += 1;
            } else {
                a.disagreeing.push(idx);
            }
        }
        a
    }

    fn neighbors(&self, idx: usize, diagonal: bool) -> impl Iterator<Item = usize> + '_ {
        let (nx, ny) = (self.spec.nx as isize, self.spec.ny as isize);
        let (i, j) = ((idx as isize) % nx, (idx as isize) / nx);
        (-1..=1)
            .flat_map(move |dj| (-1..=1).map(move |di| (di, dj)))
            .filter(move |&(di, dj)| (di, dj) != (0, 0) && (diagonal || di == 0 || dj == 0))
            .map(move |(di, dj)| (i + di, j + dj))
            .filter(move |&(a, b)| a >= 0 && b >= 0 && a < nx && b < ny)
            .map(move |(a, b)| (b * nx + a) as usize)
    }

    /// Cell whose winding differs from a horizontal or vertical neighbor.
    pub fn is_sign_change(&self, idx: usize) -> bool {
        let here = self.cells[idx].n_wind;
        self.neighbors(idx, false).any(|m| self.cells[m].n_wind != here)
    }

    /// Whether the cell itself or one of its eight neighbors is flagged or
    /// sits on a winding change.
    pub fn near_boundary(&self, idx: usize) -> bool {
        std::iter::once(idx)
            .chain(self.neighbors(idx, true))
            .any(|m| self.cells[m].flag.is_some() || self.is_sign_change(m))
    }

    /// CSV with header `x,y,n_wind,n_zero,charge,c_inferred,flag`; flagged
    /// cells carry `critical` (or another flag name) in the `n_wind` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,n_wind,n_zero,charge,c_inferred,flag\n");
        for c in &self.cells {
            let flag = c.flag.map_or("", CellFlag::as_str);
            let n_wind = c.n_wind.map_or_else(|| flag.to_string(), |n| n.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(c.x),
                fmt_f64(c.y),
                n_wind,
                c.n_zero,
                fmt_f64(c.charge),
                c.c_inferred,
                flag
            ));
        }
        out
    }

    /// JSON sidecar describing the sweep.
    pub fn sidecar_json(&self) -> serde_json::Value {
        let a = self.agreement();
        crate::io::round_json(serde_json::json!({
            "spec": self.spec,
            "cells": self.cells.len(),
            "flagged": self.cells.iter().filter(|c| c.flag.is_some()).count(),
            "agreement": {
                "considered": a.considered,
                "agreeing": a.agreeing,
                "fraction": a.fraction(),
            },
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub row: String,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub winding: i64,
    pub n_zm: usize,
    pub charge: f64,
}

/// Winding number, zero-mode count and charge for rows (a)-(i) at each chain length.
pub fn table1_report(n_sites_list: &[usize]) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::with_capacity(PRESET_NAMES.len() * n_sites_list.len());
    for name in PRESET_NAMES {
        let c = preset(name).expect("built-in preset");
        let winding = winding_of_coupling(&c, DEFAULT_GRID_SIZE)?.n;
        for &n in n_sites_list {
            let (_, zms) = analyze(&c, n, DEFAULT_ZERO_THRESHOLD, None)?;
            rows.push(Table1Row {
                row: name.to_string(),
                n_sites: n,
                winding,
                n_zm: zms.n_zero,
                charge: zms.charge.unwrap_or(0.0),
            });
        }
    }
    Ok(rows)
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("row,N,winding,n_zm,charge\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.row,
            r.n_sites,
            r.winding,
            r.n_zm,
            fmt_f64(r.charge)
        ));
    }
    out
}
