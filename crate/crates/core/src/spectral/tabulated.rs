//! User-supplied spectral functions on an `(omega, dx)` grid.
//!
//! CSV layout, header required and exact:
//!
//! ```text
//! omega,dx,c_real,c_imag
//! -1.0,0,0.5,0.0
//! ...
//! ```
//!
//! Rows must cover a full rectangular grid (any order). Separations are
//! non-negative; lookups use `|dx|`. Values between grid points are bilinearly
//! interpolated; lookups outside the grid are errors.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const TABLE_HEADER: [&str; 4] = ["omega", "dx", "c_real", "c_imag"];

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTable {
    omegas: Vec<f64>,
    dxs: Vec<f64>,
    /// `values[i_omega * dxs.len() + i_dx]`
    values: Vec<C64>,
}

impl SpectralTable {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        if header.iter().ne(TABLE_HEADER.iter().copied()) {
            return Err(Error::Table(format!(
                "header must be `{}`, got `{}`",
                TABLE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
            let line = line + 2;
            if rec.len() != 4 {
                return Err(Error::Table(format!("line {line}: expected 4 fields, got {}", rec.len())));
            }
            let mut vals = [0.0; 4];
            for (slot, (field, name)) in vals.iter_mut().zip(rec.iter().zip(TABLE_HEADER)) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Table(format!("line {line}: `{name}` is not a number: `{field}`")))?;
                if !v.is_finite() {
                    return Err(Error::Table(format!("line {line}: `{name}` is not finite")));
                }
                *slot = v;
            }
            rows.push(vals);
        }
        Self::from_rows(&rows)
    }

    /// Builds a table from `[omega, dx, c_real, c_imag]` rows.
    pub fn from_rows(rows: &[[f64; 4]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Table("no data rows".into()));
        }
        let mut omegas: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let mut dxs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        for v in omegas.iter().chain(dxs.iter()) {
            if !v.is_finite() {
                return Err(Error::Table("grid coordinates must be finite".into()));
            }
        }
        omegas.sort_by(f64::total_cmp);
        omegas.dedup();
        dxs.sort_by(f64::total_cmp);
        dxs.dedup();
        if dxs[0] < 0.0 {
            return Err(Error::Table("dx must be >= 0 (lookups use |dx|)".into()));
        }
        let (no, nd) = (omegas.len(), dxs.len());
        if rows.len() != no * nd {
            return Err(Error::Table(format!(
                "expected a full {no} x {nd} grid ({} rows), got {} rows",
                no * nd,
                rows.len()
            )));
        }
        let mut values = vec![C64::new(f64::NAN, f64::NAN); no * nd];
        for r in rows {
            if !r[2].is_finite() || !r[3].is_finite() {
                return Err(Error::Table("values must be finite".into()));
            }
            let i = omegas.binary_search_by(|v| v.total_cmp(&r[0])).unwrap();
            let j = dxs.binary_search_by(|v| v.total_cmp(&r[1])).unwrap();
            let slot = &mut values[i * nd + j];
            if !slot.re.is_nan() {
                return Err(Error::Table(format!("duplicate grid point ({}, {})", r[0], r[1])));
            }
            if r[1] == 0.0 && r[2] < 0.0 {
                return Err(Error::Table(format!("self-correlation c_real({}, 0) is negative", r[0])));
            }
            *slot = C64::new(r[2], r[3]);
        }
        Ok(Self { omegas, dxs, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn separations(&self) -> &[f64] {
        &self.dxs
    }

    /// Interpolated `c_real + i c_imag` at `(omega, |dx|)`.
    pub fn eval(&self, omega: f64, dx: f64) -> Result<C64> {
        let d = dx.abs();
        let (i0, i1, ti) = bracket(&self.omegas, omega)
            .ok_or_else(|| Error::Table(format!("omega = {omega} outside table range")))?;
        let (j0, j1, tj) =
            bracket(&self.dxs, d).ok_or_else(|| Error::Table(format!("dx = {d} outside table range")))?;
        let nd = self.dxs.len();
        let v = |i: usize, j: usize| self.values[i * nd + j];
        let lo = v(i0, j0) * (1.0 - tj) + v(i0, j1) * tj;
        let hi = v(i1, j0) * (1.0 - tj) + v(i1, j1) * tj;
        Ok(lo * (1.0 - ti) + hi * ti)
    }
}

fn bracket(axis: &[f64], x: f64) -> Option<(usize, usize, f64)> {
    let n = axis.len();
    if !x.is_finite() || x < axis[0] || x > axis[n - 1] {
        return None;
    }
    if n == 1 {
        return Some((0, 0, 0.0));
    }
    let hi = axis.partition_point(|&v| v < x).clamp(1, n - 1);
    let lo = hi - 1;
    let t = (x - axis[lo]) / (axis[hi] - axis[lo]);
    Some((lo, hi, t))
}
