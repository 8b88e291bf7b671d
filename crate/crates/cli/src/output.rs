//! CSV rows and the JSON summary. Floats carry 12 significant digits and
//! exact rationals print as `p/q`, so identical runs give identical bytes.

use std::io::Write;
use std::path::Path;

use nkl_core::{ExperimentResult, StatKind, Statistic, Status};
use serde_json::{json, Map, Value as Json};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// `%.12g`: fixed notation for moderate exponents, scientific otherwise,
/// trailing zeros dropped.
pub fn fmt_float(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn kind_label(s: &Statistic) -> String {
    match &s.kind {
        StatKind::Mean(_) => "mean".into(),
        StatKind::Quantile { q, .. } => format!("quantile {}", fmt_float(*q)),
        StatKind::Exact(_) => "exact".into(),
        StatKind::Computed(_) => "computed".into(),
    }
}

fn value_text(s: &Statistic) -> String {
    match &s.kind {
        StatKind::Exact(r) => format!("{}/{}", r.numer(), r.denom()),
        _ => fmt_float(s.value()),
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "experiment",
    "statistic",
    "point",
    "kind",
    "value",
    "std_error",
    "count",
];

/// One row per (parameter point, statistic).
pub fn write_csv<W: Write>(w: W, r: &ExperimentResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for s in &r.statistics {
        out.write_record([
            r.experiment.clone(),
            s.name.clone(),
            s.point_label(),
            kind_label(s),
            value_text(s),
            fmt_float(s.std_error()),
            s.count().to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Whether every counted check passed. Vacuous checks are not counted.
pub fn no_failures(r: &ExperimentResult) -> bool {
    r.checks.iter().all(|c| c.status != Status::Fail)
}

pub fn summary(r: &ExperimentResult, cfg: &RunConfig, anchor: &str, seed: u64) -> Json {
    let params: Map<String, Json> = r
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Json::String(v.clone())))
        .collect();
    let stats: Vec<Json> = r
        .statistics
        .iter()
        .map(|s| {
            let point: Map<String, Json> = s
                .point
                .iter()
                .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                .collect();
            json!({
                "key": s.key(),
                "name": s.name,
                "point": point,
                "kind": kind_label(s),
                "value": value_text(s),
                "std_error": fmt_float(s.std_error()),
                "count": s.count(),
            })
        })
        .collect();
    let checks: Vec<Json> = r
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "rule": c.rule.to_string(),
                "statistics": c.stats,
                "status": c.status.to_string(),
            })
        })
        .collect();
    json!({
        "experiment": r.experiment,
        "anchor": anchor,
        "seed": seed,
        "config": cfg.to_toml(),
        "params": params,
        "all_checks_pass": no_failures(r),
        "counted_checks": r.checks.iter().filter(|c| c.status != Status::Vacuous).count(),
        "checks": checks,
        "statistics": stats,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nkl_core::stats::Accumulator;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.25), "0.25");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(2.0 / 3.0 * 1000.0), "666.666666667");
        assert_eq!(fmt_float(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_float(1.5e-7), "1.5e-07");
        assert_eq!(fmt_float(-0.0001), "-0.0001");
        assert_eq!(fmt_float(42.0), "42");
        assert_eq!(fmt_float(0.0), "0");
    }

    #[test]
    fn csv_rows_and_rationals() {
        let mut r = ExperimentResult::new("demo", &[]);
        r.push(Statistic::mean(
            "m",
            &[("n", "4".into())],
            Accumulator::from_values([1.0, 2.0]),
        ));
        r.push(Statistic::exact(
            "h",
            &[],
            num_rational::BigRational::new(11.into(), 6.into()),
        ));
        let mut buf = Vec::new();
        write_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,statistic,point,kind,value,std_error,count");
        assert_eq!(lines[1], "demo,m,n=4,mean,1.5,0.5,2");
        assert_eq!(lines[2], "demo,h,,exact,11/6,0,1");
    }
}
