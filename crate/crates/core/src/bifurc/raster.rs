use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::cubic::{green, CubicMap};
use crate::error::{Error, Result};
use crate::numerics::{convert, ComplexExt, Real};
use crate::siegel::{capture_test, linearizer, CaptureVerdict};
use crate::C64;

/// Iteration and accuracy knobs of a raster. Undecided cells are only ever
/// resolved by raising these.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Orbit length before a critical point counts as bounded.
    pub escape: usize,
    /// Orbit length searched for a landing inside the Siegel disk.
    pub capture: usize,
    /// Membership uses the disk `|w| < safety · r_hat`.
    pub safety: f64,
    pub series_order: usize,
    /// Absolute accuracy of Green and Lyapunov values.
    pub tol: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { escape: 1000, capture: 200, safety: 0.9, series_order: 256, tol: 1e-6 }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<()> {
        if self.escape == 0 || self.capture == 0 {
            return Err(Error::Precondition("budgets must be positive".into()));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::Precondition(format!("safety must lie in (0, 1), got {}", self.safety)));
        }
        if self.series_order < crate::siegel::MIN_RADIUS_ORDER {
            return Err(Error::Precondition(format!(
                "series order must be at least {}, got {}",
                crate::siegel::MIN_RADIUS_ORDER,
                self.series_order
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Precondition(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellClass {
    Escape,
    /// The free critical point lands in the Siegel disk after `k` steps.
    Capture {
        k: usize,
    },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterCell {
    pub a: C64,
    pub class: CellClass,
    /// `L = log 3 + G(c₊) + G(c₋)`; `None` when a Green value is undecided.
    pub lyapunov: Option<f64>,
    /// Capture-component label (4-connectivity), numbered in row-major order
    /// of first appearance.
    pub component: Option<usize>,
    pub aux: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub spec: GridSpec,
    pub budgets: Budgets,
    pub cells: Vec<RasterCell>,
    pub components: usize,
}

impl Raster {
    pub fn cell(&self, row: usize, col: usize) -> &RasterCell {
        &self.cells[row * self.spec.resolution + col]
    }

    pub fn count(&self, pred: impl Fn(&CellClass) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(&c.class)).count()
    }

    /// Capture cells whose `L` is missing or further than `2·tol` from `log 3`.
    pub fn lyapunov_violations(&self) -> Vec<usize> {
        let ln3 = 3f64.ln();
        let tol = self.budgets.tol;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.class, CellClass::Capture { .. }))
            .filter(|(_, c)| c.lyapunov.is_none_or(|l| (l - ln3).abs() > 2.0 * tol))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Classifies every grid cell: escape when some critical point has positive
/// Green value, capture(k) when a bounded critical point lands in the Siegel
/// disk after `k` steps, undecided otherwise. Capture cells are then labelled
/// into 4-connected components.
///
/// Only one critical point can be captured (the other accumulates on the disk
/// boundary), so testing both finds the free one without knowing it in advance.
pub fn classify_raster<T: Real>(lambda: &Complex<T>, spec: &GridSpec, budgets: &Budgets) -> Result<Raster> {
    spec.validate()?;
    budgets.validate()?;
    let points: Vec<C64> = spec.points().collect();
    let mut cells: Vec<RasterCell> = points.par_iter().map(|&a| classify_cell(lambda, a, budgets)).collect();
    let components = label_components(spec, &mut cells);
    Ok(Raster { spec: *spec, budgets: *budgets, cells, components })
}

/// [`classify_raster`] with the Lyapunov field checked: every capture cell
/// must carry `L = log 3` to `2·tol`.
pub fn lyapunov_raster<T: Real>(lambda: &Complex<T>, spec: &GridSpec, budgets: &Budgets) -> Result<Raster> {
    let raster = classify_raster(lambda, spec, budgets)?;
    let bad = raster.lyapunov_violations();
    if let Some(&i) = bad.first() {
        return Err(Error::Structural(format!(
            "{} capture cells have L away from log 3, first at a = {}",
            bad.len(),
            raster.cells[i].a
        )));
    }
    Ok(raster)
}

pub fn classify_cell<T: Real>(lambda: &Complex<T>, a: C64, budgets: &Budgets) -> RasterCell {
    let f = CubicMap::new(lambda.clone(), convert::<f64, T>(&a));
    let (cp, cm) = f.critical_points();
    let mut aux = BTreeMap::new();
    let greens: Vec<Option<f64>> = [&cp, &cm]
        .iter()
        .map(|c| match green(&f, c, budgets.tol, budgets.escape) {
            Ok(g) => Some(g.value),
            Err(_) => None,
        })
        .collect();
    let lyapunov = match (greens[0], greens[1]) {
        (Some(g1), Some(g2)) => Some(3f64.ln() + g1 + g2),
        _ => None,
    };
    let done = |class, aux| RasterCell { a, class, lyapunov, component: None, aux };
    let escaping = greens.iter().flatten().cloned().fold(0.0_f64, f64::max);
    if escaping > 0.0 {
        aux.insert("green_max".into(), escaping);
        return done(CellClass::Escape, aux);
    }
    if greens.iter().any(Option::is_none) {
        aux.insert("green_undecided".into(), 1.0);
        return done(CellClass::Undecided, aux);
    }
    let series = match linearizer(&f, budgets.series_order) {
        Ok(s) if s.r_hat.is_some() => s,
        _ => {
            aux.insert("linearizer_failed".into(), 1.0);
            return done(CellClass::Undecided, aux);
        }
    };
    if let Some(r) = series.r_hat {
        aux.insert("r_hat".into(), r);
    }
    let mut best: Option<(usize, f64)> = None;
    for c in [&cp, &cm] {
        if let Ok(CaptureVerdict::Landed { k, w }) = capture_test(&f, &series, c, budgets.capture, budgets.safety) {
            if best.is_none_or(|(bk, _)| k < bk) {
                best = Some((k, w.cabs().to_f64()));
            }
        }
    }
    match best {
        Some((k, w)) => {
            aux.insert("w_abs".into(), w);
            done(CellClass::Capture { k }, aux)
        }
        None => done(CellClass::Undecided, aux),
    }
}

fn label_components(spec: &GridSpec, cells: &mut [RasterCell]) -> usize {
    let n = spec.resolution;
    let is_capture = |c: &RasterCell| matches!(c.class, CellClass::Capture { .. });
    let mut next = 0;
    for start in 0..cells.len() {
        if !is_capture(&cells[start]) || cells[start].component.is_some() {
            continue;
        }
        cells[start].component = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / n, i % n);
            let mut neighbours = Vec::with_capacity(4);
            if r > 0 {
                neighbours.push(i - n);
            }
            if r + 1 < n {
                neighbours.push(i + n);
            }
            if c > 0 {
                neighbours.push(i - 1);
            }
            if c + 1 < n {
                neighbours.push(i + 1);
            }
            for j in neighbours {
                if is_capture(&cells[j]) && cells[j].component.is_none() {
                    cells[j].component = Some(next);
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    next
}

/// Centre of the capture component containing `a0`: the parameter where the
/// captured critical point is mapped exactly to the fixed point after `k`
/// steps, i.e. `w(a) = φ_a(f_a^{∘k}(c_a)) = 0`. Found by Newton's method with
/// a central-difference derivative (`w` is holomorphic in `a`).
pub fn capture_centre<T: Real>(lambda: &Complex<T>, a0: C64, budgets: &Budgets) -> Result<(C64, usize)> {
    let cell = classify_cell(lambda, a0, budgets);
    let CellClass::Capture { k } = cell.class else {
        return Err(Error::Precondition(format!("a = {a0} is not classified as capture")));
    };
    let w_at = |a: C64| -> Result<C64> {
        let f = CubicMap::new(lambda.clone(), convert::<f64, T>(&a));
        let series = linearizer(&f, budgets.series_order)?;
        let (cp, cm) = f.critical_points();
        let mut found = None;
        for c in [&cp, &cm] {
            let mut z = c.clone();
            for _ in 0..k {
                z = f.eval(&z);
            }
            if let Ok(w) = series.phi_eval(&z) {
                let w = convert::<T, f64>(&w);
                if found.is_none_or(|v: C64| w.norm() < v.norm()) {
                    found = Some(w);
                }
            }
        }
        found.ok_or_else(|| Error::OutsideDomain(format!("no critical orbit in the coordinate patch at a = {a}")))
    };
    let mut a = a0;
    for _ in 0..50 {
        let w = w_at(a)?;
        if w.norm() < 1e-13 {
            return Ok((a, k));
        }
        let h = 1e-6 * (1.0 + a.norm());
        let dw = (w_at(a + h)? - w_at(a - h)?) / (2.0 * h);
        if dw.norm() == 0.0 {
            return Err(Error::Degenerate(format!("w'(a) vanished at a = {a}")));
        }
        a -= w / dw;
    }
    Err(Error::Undecided { budget: 50 })
}
