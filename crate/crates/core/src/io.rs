//! File formats: density matrices and tomograms as JSON, figure tables as CSV.
//!
//! All floats are written rounded to 9 significant digits, so export → import → export
//! reproduces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chronocyclic::TTTomogram;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, ModeSpace};
use crate::indicators::IndicatorSeries;
use crate::tomography::{QuadGrid, SpinTomogram, Tomogram};
use crate::C64;

/// Largest asymmetry ‖ρ − ρ†‖_max repaired on ingest; larger is rejected.
pub const HERMITIZE_LIMIT: f64 = 1e-6;
/// Trace and positivity tolerance for ingested matrices.
pub const INGEST_TOL: f64 = 1e-6;

pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Shortest text that reads back to `sig9(x)`.
pub fn fmt9(x: f64) -> String {
    let r = sig9(x);
    let a = r.abs();
    if r == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let rows = |f: fn(&C64) -> f64| (0..n).map(|i| (0..n).map(|j| sig9(f(&rho.mat[(i, j)]))).collect()).collect();
        Self { dims: rho.space.dims().to_vec(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    fn matrix(&self) -> Result<DMatrix<C64>> {
        let n: usize = self.dims.iter().product();
        let ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !ok(&self.re) || !ok(&self.im) {
            return Err(Error::Dimension(format!("density file rows do not form a {n}×{n} matrix for dims {:?}", self.dims)));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&DensityFile::from_density(rho))?)
}

/// Parses and validates a density matrix. Small asymmetries are repaired with (ρ + ρ†)/2.
pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    let file: DensityFile = serde_json::from_str(text)?;
    let space = ModeSpace::new(file.dims.clone())?;
    let mut mat = file.matrix()?;
    let asym = (&mat - mat.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if asym > HERMITIZE_LIMIT {
        return Err(Error::InvalidDensity(format!("asymmetry {asym:.3e} exceeds {HERMITIZE_LIMIT:.0e}; refusing to Hermitize")));
    }
    if asym > 0.0 {
        mat = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
    }
    DensityMatrix::new(space, mat, INGEST_TOL)
}

pub fn ingest_density(path: &Path) -> Result<DensityMatrix> {
    density_from_json(&fs::read_to_string(path)?)
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_text(path, &density_to_json(rho)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TomogramFile {
    grids: Vec<QuadGrid>,
    values: Vec<f64>,
}

pub fn tomogram_to_json(t: &Tomogram) -> Result<String> {
    let file = TomogramFile { grids: t.grids.clone(), values: t.values.iter().map(|&v| sig9(v)).collect() };
    Ok(serde_json::to_string(&file)?)
}

pub fn tomogram_from_json(text: &str) -> Result<Tomogram> {
    let file: TomogramFile = serde_json::from_str(text)?;
    let expected: usize = match file.grids.len() {
        1 => file.grids[0].n_theta() * file.grids[0].n_x,
        2 => file.grids.iter().map(|g| g.n_theta() * g.n_x).product(),
        m => return Err(Error::Dimension(format!("tomogram file with {m} modes"))),
    };
    if file.values.len() != expected {
        return Err(Error::Dimension(format!("tomogram file has {} values, grids need {expected}", file.values.len())));
    }
    Ok(Tomogram { grids: file.grids, values: file.values })
}

/// theta,x,w (one mode) or theta_a,theta_b,x_a,x_b,w (two modes).
pub fn tomogram_csv(t: &Tomogram) -> Result<String> {
    let mut out = String::new();
    match t.grids.as_slice() {
        [g] => {
            out.push_str("theta,x,w\n");
            let xs = g.xs();
            for (it, th) in g.thetas.iter().enumerate() {
                for (ix, x) in xs.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{}", fmt9(*th), fmt9(*x), fmt9(t.values[it * g.n_x + ix]));
                }
            }
        }
        [ga, gb] => {
            out.push_str("theta_a,theta_b,x_a,x_b,w\n");
            let (xa, xb) = (ga.xs(), gb.xs());
            let mut k = 0;
            for ta in &ga.thetas {
                for tb in &gb.thetas {
                    for a in &xa {
                        for b in &xb {
                            let _ = writeln!(out, "{},{},{},{},{}", fmt9(*ta), fmt9(*tb), fmt9(*a), fmt9(*b), fmt9(t.values[k]));
                            k += 1;
                        }
                    }
                }
            }
        }
        _ => return Err(Error::Dimension("only one- and two-mode tomograms have a CSV layout".into())),
    }
    Ok(out)
}

/// Axis column followed by the series columns in their fixed order.
pub fn series_csv(s: &IndicatorSeries) -> String {
    let mut out = s.axis_label.clone();
    for (c, _) in &s.columns {
        out.push(',');
        out.push_str(c.name());
    }
    out.push('\n');
    for (r, a) in s.axis.iter().enumerate() {
        out.push_str(&fmt9(*a));
        for (_, v) in &s.columns {
            out.push(',');
            out.push_str(&fmt9(v[r]));
        }
        out.push('\n');
    }
    out
}

pub fn spin_tomogram_csv(st: &SpinTomogram) -> String {
    let mut out = String::from("axes");
    for k in 0..(1usize << st.n_qubits) {
        let _ = write!(out, ",p{k:0width$b}", width = st.n_qubits);
    }
    out.push('\n');
    for (axes, row) in st.axes.iter().zip(&st.probs) {
        let label: Vec<String> = axes.iter().map(|a| a.label()).collect();
        out.push_str(&label.join(""));
        for p in row {
            out.push(',');
            out.push_str(&fmt9(*p));
        }
        out.push('\n');
    }
    out
}

/// u = t_I − t_S against w, the full content of a time-time slice.
pub fn tt_profile_csv(w: &TTTomogram) -> String {
    let mut out = String::from("u_s,w\n");
    for (u, v) in w.u_values().iter().zip(&w.profile) {
        let _ = writeln!(out, "{},{}", fmt9(*u), fmt9(*v));
    }
    out
}

/// Generic numeric table.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt9(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Serializes after rounding every float to 9 significant digits.
pub fn to_json_rounded<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(serde_json::to_string_pretty(&v)?)
}

fn round_value(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(num) = n.as_f64().and_then(|x| serde_json::Number::from_f64(sig9(x))) {
                *n = num;
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_value),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}
