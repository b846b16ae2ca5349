//! Bit-exact CSV schemas for the pipeline artifacts.
//!
//! Every file has a fixed header row and column order, `,` delimiters, `.`
//! decimals, and floats serialized as shortest round-trip decimals, so
//! write → read → write reproduces a file byte for byte.

use crate::analysis::{DarkPeriod, SurvivalCurve};
use crate::grid::{EnergyGrid, SampledWaveFunction};
use crate::jump::{FluorescenceTrace, JumpRecord};
use num_complex::Complex64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unexpected header {got:?}, want {want:?}")]
    Header { got: String, want: String },
    #[error("file has no data rows")]
    Empty,
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    name: &str,
) -> Result<T, CsvError> {
    let raw = field.ok_or_else(|| CsvError::Parse {
        line,
        reason: format!("missing column {name}"),
    })?;
    raw.parse().map_err(|_| CsvError::Parse {
        line,
        reason: format!("bad {name} value {raw:?}"),
    })
}

fn check_header(text: &str, want: &str) -> Result<(), CsvError> {
    let got = text.lines().next().unwrap_or("");
    if got != want {
        return Err(CsvError::Header {
            got: got.to_string(),
            want: want.to_string(),
        });
    }
    Ok(())
}

pub const TRACE_HEADER: &str = "bin_index,t_start_s,counts";

pub fn write_trace(trace: &FluorescenceTrace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (k, &c) in trace.counts.iter().enumerate() {
        let t = trace.t_start_s + k as f64 * trace.bin_width_s;
        writeln!(out, "{k},{t},{c}").expect("string write");
    }
    out
}

pub fn read_trace(text: &str) -> Result<FluorescenceTrace, CsvError> {
    check_header(text, TRACE_HEADER)?;
    let mut counts = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        let _: u64 = parse_field(f.next(), i + 1, "bin_index")?;
        times.push(parse_field(f.next(), i + 1, "t_start_s")?);
        counts.push(parse_field(f.next(), i + 1, "counts")?);
    }
    if counts.is_empty() {
        return Err(CsvError::Empty);
    }
    let t_start_s = times[0];
    let bin_width_s = if times.len() > 1 {
        times[1] - times[0]
    } else {
        1.0
    };
    Ok(FluorescenceTrace {
        bin_width_s,
        counts,
        t_start_s,
    })
}

pub const JUMPS_HEADER: &str = "index,shelve_time_s,unshelve_time_s,censored";

pub fn write_jumps(records: &[JumpRecord]) -> String {
    let mut out = String::new();
    out.push_str(JUMPS_HEADER);
    out.push('\n');
    for (k, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{k},{},{},{}",
            r.shelve_time_s,
            r.unshelve_time_s,
            u8::from(r.censored)
        )
        .expect("string write");
    }
    out
}

pub fn read_jumps(text: &str) -> Result<Vec<JumpRecord>, CsvError> {
    check_header(text, JUMPS_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        let _: u64 = parse_field(f.next(), i + 1, "index")?;
        let shelve_time_s = parse_field(f.next(), i + 1, "shelve_time_s")?;
        let unshelve_time_s = parse_field(f.next(), i + 1, "unshelve_time_s")?;
        let censored: u8 = parse_field(f.next(), i + 1, "censored")?;
        out.push(JumpRecord {
            shelve_time_s,
            unshelve_time_s,
            censored: censored != 0,
        });
    }
    Ok(out)
}

pub const DARK_HEADER: &str = "index,t0_s,t1_s,dwell_s";

pub fn write_dark(periods: &[DarkPeriod]) -> String {
    let mut out = String::new();
    out.push_str(DARK_HEADER);
    out.push('\n');
    for (k, p) in periods.iter().enumerate() {
        writeln!(out, "{k},{},{},{}", p.t0_s, p.t1_s, p.dwell_s()).expect("string write");
    }
    out
}

pub fn read_dark(text: &str) -> Result<Vec<DarkPeriod>, CsvError> {
    check_header(text, DARK_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        let _: u64 = parse_field(f.next(), i + 1, "index")?;
        let t0_s = parse_field(f.next(), i + 1, "t0_s")?;
        let t1_s = parse_field(f.next(), i + 1, "t1_s")?;
        let _: f64 = parse_field(f.next(), i + 1, "dwell_s")?;
        out.push(DarkPeriod { t0_s, t1_s });
    }
    Ok(out)
}

pub const SURVIVAL_HEADER: &str = "t_s,n_of_t,ratio,born,binomial_sigma";

/// The born and binomial-sigma columns are evaluated against `tau_s`:
/// `born = e^{-t/τ}` and `σ = sqrt(born·(1-born)/M)`.
pub fn write_survival(curve: &SurvivalCurve, tau_s: f64) -> String {
    let mut out = String::new();
    out.push_str(SURVIVAL_HEADER);
    out.push('\n');
    for ((&t, &n), &r) in curve.t_s.iter().zip(&curve.n_of_t).zip(&curve.ratio) {
        let born = (-t / tau_s).exp();
        let sigma = (born * (1.0 - born) / curve.m as f64).sqrt();
        writeln!(out, "{t},{n},{r},{born},{sigma}").expect("string write");
    }
    out
}

pub fn read_survival(text: &str) -> Result<SurvivalCurve, CsvError> {
    check_header(text, SURVIVAL_HEADER)?;
    let mut t_s: Vec<f64> = Vec::new();
    let mut n_of_t: Vec<u64> = Vec::new();
    let mut ratio: Vec<f64> = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        t_s.push(parse_field(f.next(), i + 1, "t_s")?);
        n_of_t.push(parse_field(f.next(), i + 1, "n_of_t")?);
        ratio.push(parse_field(f.next(), i + 1, "ratio")?);
        let _: f64 = parse_field(f.next(), i + 1, "born")?;
        let _: f64 = parse_field(f.next(), i + 1, "binomial_sigma")?;
    }
    if t_s.is_empty() {
        return Err(CsvError::Empty);
    }
    // Recover M from the first ratio when it differs from N(0).
    let m = if ratio[0] > 0.0 {
        (n_of_t[0] as f64 / ratio[0]).round() as usize
    } else {
        n_of_t[0] as usize
    };
    Ok(SurvivalCurve {
        t_s,
        n_of_t,
        ratio,
        m,
    })
}

pub const PAIRING_HEADER: &str = "t,abs_ratio,phase,expected_abs";

pub struct PairingRow {
    pub t: f64,
    pub abs_ratio: f64,
    pub phase: f64,
    pub expected_abs: f64,
}

pub fn write_pairing(rows: &[PairingRow]) -> String {
    let mut out = String::new();
    out.push_str(PAIRING_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.t, r.abs_ratio, r.phase, r.expected_abs)
            .expect("string write");
    }
    out
}

pub fn read_pairing(text: &str) -> Result<Vec<PairingRow>, CsvError> {
    check_header(text, PAIRING_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        out.push(PairingRow {
            t: parse_field(f.next(), i + 1, "t")?,
            abs_ratio: parse_field(f.next(), i + 1, "abs_ratio")?,
            phase: parse_field(f.next(), i + 1, "phase")?,
            expected_abs: parse_field(f.next(), i + 1, "expected_abs")?,
        });
    }
    Ok(out)
}

pub const WAVEFUNCTION_HEADER: &str = "energy,re,im";

pub fn write_wavefunction(f: &SampledWaveFunction) -> String {
    let mut out = String::new();
    out.push_str(WAVEFUNCTION_HEADER);
    out.push('\n');
    for (&e, v) in f.grid().points().iter().zip(f.values()) {
        writeln!(out, "{e},{},{}", v.re, v.im).expect("string write");
    }
    out
}

pub fn read_wavefunction(text: &str) -> Result<SampledWaveFunction, CsvError> {
    check_header(text, WAVEFUNCTION_HEADER)?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let mut f = row.split(',');
        points.push(parse_field(f.next(), i + 1, "energy")?);
        let re: f64 = parse_field(f.next(), i + 1, "re")?;
        let im: f64 = parse_field(f.next(), i + 1, "im")?;
        values.push(Complex64::new(re, im));
    }
    let grid = EnergyGrid::new(points).map_err(|e| CsvError::Parse {
        line: 2,
        reason: format!("bad energy grid: {e}"),
    })?;
    SampledWaveFunction::new(grid, values).map_err(|e| CsvError::Parse {
        line: 2,
        reason: format!("bad wave function: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{survival_curve, DwellEnsemble};

    #[test]
    fn trace_roundtrip_is_byte_identical() {
        let trace = FluorescenceTrace {
            bin_width_s: 0.1,
            counts: vec![101, 99, 0, 3, 97],
            t_start_s: 0.0,
        };
        let text = write_trace(&trace);
        let back = read_trace(&text).unwrap();
        assert_eq!(write_trace(&back), text);
        assert!((back.bin_width_s - 0.1).abs() < 1e-15);
    }

    #[test]
    fn jumps_roundtrip_is_byte_identical() {
        let records = vec![
            JumpRecord {
                shelve_time_s: 12.345678901234567,
                unshelve_time_s: 40.0 / 3.0 + 12.0,
                censored: false,
            },
            JumpRecord {
                shelve_time_s: 100.1,
                unshelve_time_s: 130.00000000000003,
                censored: true,
            },
        ];
        let text = write_jumps(&records);
        let back = read_jumps(&text).unwrap();
        assert_eq!(back, records);
        assert_eq!(write_jumps(&back), text);
    }

    #[test]
    fn dark_roundtrip_is_byte_identical() {
        let periods = vec![
            DarkPeriod {
                t0_s: 2.0,
                t1_s: 5.0,
            },
            DarkPeriod {
                t0_s: 9.300000000000001,
                t1_s: 11.7,
            },
        ];
        let text = write_dark(&periods);
        let back = read_dark(&text).unwrap();
        assert_eq!(back, periods);
        assert_eq!(write_dark(&back), text);
    }

    #[test]
    fn survival_roundtrip_is_byte_identical() {
        let ens = DwellEnsemble::new(vec![5.0, 15.0, 25.0, 60.0]).unwrap();
        let curve = survival_curve(&ens, 10.0, 60.0).unwrap();
        let text = write_survival(&curve, 30.0);
        let back = read_survival(&text).unwrap();
        assert_eq!(back, curve);
        assert_eq!(write_survival(&back, 30.0), text);
    }

    #[test]
    fn pairing_roundtrip_is_byte_identical() {
        let rows = vec![
            PairingRow {
                t: 0.0,
                abs_ratio: 1.0,
                phase: 0.0,
                expected_abs: 1.0,
            },
            PairingRow {
                t: 0.5263157894736842,
                abs_ratio: 0.768562,
                phase: -1.23,
                expected_abs: 0.7685674,
            },
        ];
        let text = write_pairing(&rows);
        let back = read_pairing(&text).unwrap();
        assert_eq!(write_pairing(&back), text);
    }

    #[test]
    fn wavefunction_roundtrip_is_byte_identical() {
        let grid = EnergyGrid::uniform(-1.0, 1.0, 16).unwrap();
        let f = SampledWaveFunction::from_fn(grid, |e| Complex64::new(e.cos(), e.sin() / 3.0))
            .unwrap();
        let text = write_wavefunction(&f);
        let back = read_wavefunction(&text).unwrap();
        assert_eq!(write_wavefunction(&back), text);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            read_trace("wrong,header\n1,2,3\n"),
            Err(CsvError::Header { .. })
        ));
    }

    #[test]
    fn bad_value_reports_line() {
        let text = format!("{TRACE_HEADER}\n0,0.0,10\n1,0.1,oops\n");
        match read_trace(&text).unwrap_err() {
            CsvError::Parse { line, reason } => {
                assert_eq!(line, 3);
                assert!(reason.contains("counts"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
