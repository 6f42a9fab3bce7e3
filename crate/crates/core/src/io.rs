//! Plain-text field, measure and record formats.
//!
//! Field files start with `#grid n=<n> L=<L>` or `#lattice M=<M>`, followed
//! by one `index coordinate re im` line per sample. Measure files start with
//! `#measure mass=<m>` followed by `node weight` lines. Values are written
//! with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::dispersion::QuadMeasure;
use crate::error::{Error, Result};
use crate::field::{Field, Grid, Lattice, LatticeField, WaveField};
use crate::solver::SolveReport;
use crate::verify::CheckResult;

/// A field read from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Grid(WaveField),
    Lattice(LatticeField),
}

impl AnyField {
    pub fn norm(&self) -> f64 {
        match self {
            AnyField::Grid(f) => f.norm(),
            AnyField::Lattice(f) => f.norm(),
        }
    }
}

fn header_value<T: std::str::FromStr>(header: &str, key: &str, line: usize) -> Result<T> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("missing `{key}=` in header"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line,
            message: format!("bad value for `{key}`"),
        })
}

fn write_samples<F: Field>(out: &mut String, f: &F) {
    for (j, (x, z)) in f.coordinates().iter().zip(f.samples()).enumerate() {
        let _ = writeln!(out, "{j} {x:.17e} {:.17e} {:.17e}", z.re, z.im);
    }
}

pub fn format_wave_field(f: &WaveField) -> String {
    let g = f.grid();
    let mut out = format!("#grid n={} L={:.17e}\n", g.len(), g.length());
    write_samples(&mut out, f);
    out
}

pub fn format_lattice_field(f: &LatticeField) -> String {
    let mut out = format!("#lattice M={}\n", f.lattice().half_width());
    write_samples(&mut out, f);
    out
}

pub fn format_field(f: &AnyField) -> String {
    match f {
        AnyField::Grid(f) => format_wave_field(f),
        AnyField::Lattice(f) => format_lattice_field(f),
    }
}

pub fn parse_field(text: &str) -> Result<AnyField> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty field file".into(),
    })?;
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("not a number: `{s}`"),
            })
        };
        samples.push(Complex64::new(num(cols[2])?, num(cols[3])?));
    }
    if header.starts_with("#grid") {
        let grid = Grid::new(header_value(header, "n", 1)?, header_value(header, "L", 1)?)?;
        Ok(AnyField::Grid(WaveField::new(grid, samples)?))
    } else if header.starts_with("#lattice") {
        let lattice = Lattice::new(header_value(header, "M", 1)?)?;
        Ok(AnyField::Lattice(LatticeField::new(lattice, samples)?))
    } else {
        Err(Error::Parse {
            line: 1,
            message: "expected `#grid` or `#lattice` header".into(),
        })
    }
}

pub fn read_field(path: &Path) -> Result<AnyField> {
    parse_field(&fs::read_to_string(path)?)
}

pub fn write_field(path: &Path, f: &AnyField) -> Result<()> {
    fs::write(path, format_field(f))?;
    Ok(())
}

pub fn format_measure(m: &QuadMeasure) -> String {
    let mut out = format!("#measure mass={:.17e}\n", m.mass());
    for (r, w) in m.iter() {
        let _ = writeln!(out, "{r:.17e} {w:.17e}");
    }
    out
}

pub fn parse_measure(text: &str) -> Result<QuadMeasure> {
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: i + 1,
                message: "expected `node weight`".into(),
            })?;
        if cols.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        nodes.push(cols[0]);
        weights.push(cols[1]);
    }
    QuadMeasure::new(nodes, weights)
}

pub fn read_measure(path: &Path) -> Result<QuadMeasure> {
    parse_measure(&fs::read_to_string(path)?)
}

/// One `key=value` line.
pub fn format_report(r: &SolveReport) -> String {
    let mut out = format!(
        "method={} lambda={:e} d_av={:e} omega={:.15e} p={:.15e} residual={:e} iterations={} converged={} threshold_suspected={}",
        r.method, r.lambda, r.d_av, r.omega, r.p_value, r.residual, r.iterations, r.converged, r.threshold_suspected
    );
    if let Some(h) = r.energy {
        let _ = write!(out, " energy={h:.15e}");
    }
    for l in &r.tails.levels {
        let _ = write!(out, " tail[{}]={:.6},{:.6},{:.6e}", l.eps, l.a, l.b, l.g_value);
    }
    out
}

/// `name pass measured target tolerance runtime`, with `measured` a
/// comma-separated list.
pub fn format_check(c: &CheckResult) -> String {
    let measured: Vec<String> = c.measured.iter().map(|v| format!("{v:.6e}")).collect();
    format!(
        "{} {} {} {} {:e} {:.3}",
        c.name,
        if c.pass { "pass" } else { "FAIL" },
        measured.join(","),
        c.target.replace(' ', ""),
        c.tolerance,
        c.runtime
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ChirpedGaussian;

    #[test]
    fn wave_field_round_trip_is_exact() {
        let grid = Grid::new(64, 12.0).unwrap();
        let f = ChirpedGaussian::normalized(Complex64::new(1.0, 0.3))
            .unwrap()
            .sample(grid);
        let back = parse_field(&format_wave_field(&f)).unwrap();
        assert_eq!(back, AnyField::Grid(f));
    }

    #[test]
    fn lattice_round_trip_is_exact() {
        let lattice = Lattice::new(5).unwrap();
        let f = LatticeField::from_fn(lattice, |x| {
            Complex64::new(1.0 / (1.0 + x as f64 * x as f64), 0.1 * x as f64)
        });
        assert_eq!(parse_field(&format_lattice_field(&f)).unwrap(), AnyField::Lattice(f));
    }

    #[test]
    fn measure_round_trip() {
        let m = QuadMeasure::gauss_legendre_on(0.0, 1.0, 4);
        let text = format_measure(&m);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(parse_measure(&text).unwrap(), m);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let err = parse_field("#lattice M=1\n0 -1 0 0\n1 0 x 0\n2 1 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_field("#grid n=8\n").is_err());
        assert!(parse_measure("0.5\n").is_err());
    }
}
