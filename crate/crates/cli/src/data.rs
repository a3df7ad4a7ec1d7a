//! Dataset CSV: header `c1,c2,delta1,delta2`, deltas 0 or 1, `#` comments.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use bicens::sim::fmt17;
use bicens::Observation;

pub const HEADER: [&str; 4] = ["c1", "c2", "delta1", "delta2"];

pub fn read_dataset<R: Read>(input: R) -> Result<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().context("reading header")?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        bail!("header must be {}, found {}", HEADER.join(","), header.iter().collect::<Vec<_>>().join(","));
    }
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        let row = data.len() + 1;
        let parse = || -> Result<Observation> {
            if record.len() != 4 {
                bail!("expected 4 fields, found {}", record.len());
            }
            let time = |k: usize| -> Result<f64> {
                let v: f64 = record[k].parse().with_context(|| format!("{} = '{}' is not a number", HEADER[k], &record[k]))?;
                if !v.is_finite() {
                    bail!("{} must be finite", HEADER[k]);
                }
                Ok(v)
            };
            let flag = |k: usize| -> Result<bool> {
                match &record[k] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => bail!("{} = '{other}' must be 0 or 1", HEADER[k]),
                }
            };
            Ok(Observation::new(time(0)?, time(1)?, flag(2)?, flag(3)?))
        };
        data.push(parse().with_context(|| format!("data row {row} (line {line})"))?);
    }
    if data.is_empty() {
        bail!("dataset has no observations");
    }
    Ok(data)
}

pub fn write_dataset<W: Write>(out: W, data: &[Observation]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for o in data {
        writer.write_record([
            fmt17(o.c1),
            fmt17(o.c2),
            u8::from(o.d1).to_string(),
            u8::from(o.d2).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
