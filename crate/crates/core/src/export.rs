//! CSV writers for the plotting helper.
//!
//! Every float is written as `{:.16e}` (17 significant digits), so a value read back with
//! any correctly rounding parser is bit-identical to the one written.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::geometry::PolygonalChain;
use crate::learner::{ErrorSample, MonotoneLinearSpline};
use crate::point::norm;
use crate::tracer::StepRecord;

pub const CHAIN_FILE: &str = "chain.csv";
pub const SPLINE_FILE: &str = "spline.csv";
pub const STEPS_FILE: &str = "steps.csv";
pub const ERROR_GRID_FILE: &str = "error_grid.csv";
pub const REPORT_FILE: &str = "report.json";

/// Full-precision float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn coord_header(dim: usize) -> Vec<&'static str> {
    ["x", "y", "z", "w"].into_iter().take(dim.min(4)).collect()
}

fn coord_names(dim: usize) -> String {
    if dim <= 4 {
        coord_header(dim).join(",")
    } else {
        (0..dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
    }
}

fn join(vals: impl IntoIterator<Item = f64>) -> String {
    vals.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

/// Vertex list, one row per vertex.
pub fn write_chain_csv<W: Write>(mut w: W, chain: &PolygonalChain) -> io::Result<()> {
    let dim = chain.vertices().first().map_or(0, |v| v.len());
    writeln!(w, "{}", coord_names(dim))?;
    for v in chain.vertices() {
        writeln!(w, "{}", join(v.iter().copied()))?;
    }
    Ok(())
}

/// `(knot, value)` pairs.
pub fn write_spline_csv<W: Write>(mut w: W, spline: &MonotoneLinearSpline) -> io::Result<()> {
    writeln!(w, "knot,value")?;
    for (t, v) in spline.knots().zip(spline.values()) {
        writeln!(w, "{},{}", fmt_f64(t), fmt_f64(*v))?;
    }
    Ok(())
}

/// Per-step audit trail: `k, h, s, ‖P_k‖, endpoint_flag`.
pub fn write_steps_csv<W: Write>(mut w: W, steps: &[StepRecord]) -> io::Result<()> {
    writeln!(w, "k,h,s,norm_p,endpoint_flag")?;
    for r in steps {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.k,
            fmt_f64(r.h),
            fmt_f64(r.s),
            fmt_f64(norm(&r.vertex)),
            u8::from(r.endpoint_flag)
        )?;
    }
    Ok(())
}

/// Evaluation points with `|f̃ − f|`.
pub fn write_error_grid_csv<W: Write>(mut w: W, samples: &[ErrorSample]) -> io::Result<()> {
    let dim = samples.first().map_or(2, |s| s.dim);
    writeln!(w, "{},error", coord_names(dim))?;
    for s in samples {
        writeln!(w, "{},{}", join(s.point[..s.dim].iter().copied()), fmt_f64(s.error))?;
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

/// Writes the four CSV artifacts of a run into `dir` (created if missing).
pub fn write_csv_artifacts(
    dir: &Path,
    chain: &PolygonalChain,
    spline: &MonotoneLinearSpline,
    steps: &[StepRecord],
    error_grid: &[ErrorSample],
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = create(dir, CHAIN_FILE)?;
    write_chain_csv(&mut f, chain)?;
    f.flush()?;
    let mut f = create(dir, SPLINE_FILE)?;
    write_spline_csv(&mut f, spline)?;
    f.flush()?;
    let mut f = create(dir, STEPS_FILE)?;
    write_steps_csv(&mut f, steps)?;
    f.flush()?;
    let mut f = create(dir, ERROR_GRID_FILE)?;
    write_error_grid_csv(&mut f, error_grid)?;
    f.flush()
}

/// Pretty-printed JSON report.
pub fn write_report_json(dir: &Path, report: &serde_json::Value) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = create(dir, REPORT_FILE)?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracer::StepKind;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn chain_and_spline_layout() {
        let chain = PolygonalChain::new(vec![vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap();
        let s = text(|b| write_chain_csv(b, &chain));
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "x,y");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "1.0000000000000000e0,5.0000000000000000e-1");

        let spline = MonotoneLinearSpline::from_samples(0.5, vec![0.0, 0.25, 1.0]).unwrap();
        let s = text(|b| write_spline_csv(b, &spline));
        assert_eq!(s.lines().count(), 4);
        assert!(s.starts_with("knot,value\n"));
        let last: Vec<f64> = s.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, 1.0]);
    }

    #[test]
    fn steps_and_grid_layout() {
        let rec = StepRecord {
            k: -2,
            kind: StepKind::Backward,
            h: 0.1,
            s: 0.09,
            step_length: 0.1,
            lower_bound: 0.01,
            vertex: vec![0.3, 0.4],
            direction: vec![1.0, 0.0],
            endpoint_flag: true,
            terminal: true,
        };
        let s = text(|b| write_steps_csv(b, &[rec]));
        let row: Vec<_> = s.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "-2");
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.5);
        assert_eq!(row[4], "1");

        let grid = [ErrorSample { point: [0.1, 0.2, 0.3], dim: 3, error: 1e-9 }];
        let s = text(|b| write_error_grid_csv(b, &grid));
        assert_eq!(s.lines().next().unwrap(), "x,y,z,error");
        assert_eq!(s.lines().nth(1).unwrap().split(',').count(), 4);
    }
}
