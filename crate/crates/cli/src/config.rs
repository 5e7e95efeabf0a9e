//! Run configuration: grids, tolerances, quadrature settings, and the
//! config hash stamped into every summary.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Complexified,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

impl GridSpec {
    /// Parses "x0:x1:nx,y0:y1:ny".
    pub fn parse(text: &str) -> Result<GridSpec, String> {
        let (xs, ys) = text
            .split_once(',')
            .ok_or_else(|| format!("grid `{text}` is not of the form x0:x1:nx,y0:y1:ny"))?;
        let axis = |part: &str| -> Result<(f64, f64, usize), String> {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return Err(format!("grid axis `{part}` is not of the form a:b:n"));
            }
            let a = fields[0]
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad grid bound `{}`: {e}", fields[0]))?;
            let b = fields[1]
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad grid bound `{}`: {e}", fields[1]))?;
            let n = fields[2]
                .trim()
                .parse::<usize>()
                .map_err(|e| format!("bad grid count `{}`: {e}", fields[2]))?;
            if n == 0 {
                return Err("grid counts must be positive".into());
            }
            Ok((a, b, n))
        };
        let (x0, x1, nx) = axis(xs)?;
        let (y0, y1, ny) = axis(ys)?;
        Ok(GridSpec {
            x0,
            x1,
            nx,
            y0,
            y1,
            ny,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        axis_points(self.x0, self.x1, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        axis_points(self.y0, self.y1, self.ny)
    }
}

fn axis_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Tolerances per verification check; defaults match the documented set.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub ode: f64,
    pub pde: f64,
    pub cp: f64,
    pub joyce: f64,
    pub asd: f64,
    pub gauge: f64,
    pub twistor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode: 1e-10,
            pde: 1e-8,
            cp: 1e-7,
            joyce: 1e-7,
            asd: 1e-6,
            gauge: 1e-6,
            twistor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub target: String,
    pub grid: GridSpec,
    pub nodes: usize,
    pub rho: f64,
    pub safety: f64,
    pub terms: Option<usize>,
    pub mode: Mode,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
