//! Piecewise Chebyshev tables for atom shapes on `|w| < SERIES_RATIO · l`.
//!
//! A shape is the convolution of a locally integrable function with a derivative of the
//! kernel, so it is smooth in `w` even where the defining integrals change form. Each
//! panel is accepted only after the interpolant matches direct evaluation at the
//! midpoints between its nodes, to `REL_TOL` where possible and otherwise to the
//! quadrature noise level.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Chebyshev points per panel minus one.
const DEGREE: usize = 16;
/// Acceptance tolerance relative to the largest sampled value of each component.
const REL_TOL: f64 = 1e-12;
/// Direct evaluation is only accurate to about the quadrature target. Between the two
/// tolerances a panel is accepted once halving stops reducing its mismatch.
const NOISE_TOL: f64 = 1e-10;
const ABS_FLOOR: f64 = 1e-14;
/// Panels narrower than this fraction of `l` are accepted regardless.
const MIN_WIDTH: f64 = 1e-5;

#[derive(Debug, Clone)]
struct Panel {
    b: f64,
    xs: Vec<f64>,
    /// Values at `cos(jπ/DEGREE)` mapped to `[a, b]`, `j = 0..=DEGREE`.
    values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub(super) struct ShapeTable {
    panels: Vec<Panel>,
    /// Largest midpoint mismatch seen in accepted panels.
    pub(super) max_error: f64,
}

fn nodes(a: f64, b: f64) -> Vec<f64> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (0..=DEGREE)
        .map(|j| c + h * (j as f64 * PI / DEGREE as f64).cos())
        .collect()
}

fn midpoints(a: f64, b: f64) -> Vec<f64> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (0..DEGREE)
        .map(|j| c + h * ((j as f64 + 0.5) * PI / DEGREE as f64).cos())
        .collect()
}

impl Panel {
    /// Barycentric interpolation on Chebyshev points of the second kind.
    fn eval(&self, w: f64) -> [f64; 2] {
        let xs = &self.xs;
        let mut num = [0.0; 2];
        let mut den = 0.0;
        for (j, (&x, v)) in xs.iter().zip(&self.values).enumerate() {
            let d = w - x;
            if d == 0.0 {
                return *v;
            }
            let mut c = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == DEGREE {
                c *= 0.5;
            }
            let t = c / d;
            num[0] += t * v[0];
            num[1] += t * v[1];
            den += t;
        }
        [num[0] / den, num[1] / den]
    }
}

impl ShapeTable {
    /// Tabulate `f` on `[-reach, reach]` with breakpoints `marks` (ascending, inside).
    pub(super) fn build<F>(f: F, reach: f64, l: f64, marks: &[f64]) -> Result<ShapeTable>
    where
        F: Fn(f64) -> Result<[f64; 2]>,
    {
        let mut edges = vec![-reach];
        edges.extend(marks.iter().copied().filter(|m| m.abs() < reach));
        edges.push(reach);

        // (a, b, values, mismatch of the parent panel relative to `tol`)
        let mut pending: Vec<(f64, f64, Vec<[f64; 2]>, f64)> = Vec::new();
        let mut scale = [0.0f64; 2];
        for e in edges.windows(2) {
            let vals = nodes(e[0], e[1])
                .into_iter()
                .map(&f)
                .collect::<Result<Vec<_>>>()?;
            for v in &vals {
                scale[0] = scale[0].max(v[0].abs());
                scale[1] = scale[1].max(v[1].abs());
            }
            pending.push((e[0], e[1], vals, f64::INFINITY));
        }
        let tol = [
            REL_TOL * scale[0] + ABS_FLOOR,
            REL_TOL * scale[1] + ABS_FLOOR,
        ];

        let mut panels = Vec::new();
        let mut max_error: f64 = 0.0;
        // Depth-first, left to right, so the accepted panels come out sorted.
        pending.reverse();
        while let Some((a, b, values, parent)) = pending.pop() {
            let panel = Panel {
                b,
                xs: nodes(a, b),
                values,
            };
            let mut err = [0.0f64; 2];
            for m in midpoints(a, b) {
                let exact = f(m)?;
                let got = panel.eval(m);
                err[0] = err[0].max((exact[0] - got[0]).abs());
                err[1] = err[1].max((exact[1] - got[1]).abs());
            }
            let rel = (err[0] / tol[0]).max(err[1] / tol[1]);
            let stalled = rel * REL_TOL <= NOISE_TOL && rel > 0.25 * parent;
            if rel <= 1.0 || stalled || b - a < MIN_WIDTH * l {
                max_error = max_error.max(rel * REL_TOL);
                panels.push(panel);
                continue;
            }
            let c = 0.5 * (a + b);
            let right = nodes(c, b)
                .into_iter()
                .map(&f)
                .collect::<Result<Vec<_>>>()?;
            let left = nodes(a, c)
                .into_iter()
                .map(&f)
                .collect::<Result<Vec<_>>>()?;
            pending.push((c, b, right, rel));
            pending.push((a, c, left, rel));
        }
        if panels.is_empty() {
            return Err(Error::Domain("empty shape table".into()));
        }
        Ok(ShapeTable { panels, max_error })
    }

    pub(super) fn eval(&self, w: f64) -> [f64; 2] {
        let i = self
            .panels
            .partition_point(|p| p.b < w)
            .min(self.panels.len() - 1);
        self.panels[i].eval(w)
    }

    #[cfg(test)]
    pub(super) fn panel_count(&self) -> usize {
        self.panels.len()
    }
}
