use std::io;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of every results CSV.
pub const CSV_HEADER: [&str; 10] = [
    "distribution",
    "tconorm",
    "tau",
    "lr",
    "loss",
    "seed",
    "metric",
    "steps",
    "wall_ms",
    "fingerprint",
];

/// One optimization run, as written to CSV.
///
/// `tau` is the temperature in normalized image units, or a schedule such
/// as `log(0.1->1e-7)`. `metric` is `NaN` for a run that diverged.
/// `wall_ms` is 0 unless wall-clock recording was requested, which keeps
/// repeated runs byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub distribution: String,
    pub tconorm: String,
    pub tau: String,
    pub lr: f64,
    pub loss: String,
    pub seed: u64,
    pub metric: f64,
    pub steps: u64,
    pub wall_ms: u64,
    pub fingerprint: String,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        !self.metric.is_finite()
    }

    /// `distribution|tconorm`, the key of a grid-search cell.
    pub fn cell(&self) -> (String, String) {
        (self.distribution.clone(), self.tconorm.clone())
    }
}

/// Constant settings shared by every run, joined into one comma-free field.
pub fn fingerprint(extra: &[(&str, String)]) -> String {
    let mut parts = vec![
        "eps=1e-8".to_string(),
        "betas=0.5/0.95".to_string(),
        "pixel=center".to_string(),
        "units=ndc".to_string(),
        format!("cull={:e}", crate::raster::CULL_CUTOFF),
        "norm=unit-sphere".to_string(),
    ];
    parts.extend(extra.iter().map(|(k, v)| format!("{k}={v}")));
    parts.join("|").replace(',', ";")
}

pub fn write_records<W: io::Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn records_to_string(records: &[RunRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
