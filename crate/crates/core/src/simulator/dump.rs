use std::io::Write;

use super::pattern::PointPattern;
use crate::error::Result;

/// Writes one row per cache: `x,y,files` with file indices joined by `;`.
pub fn write_realization_csv<W: Write>(pattern: &PointPattern, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["x", "y", "files"])?;
    for (p, files) in pattern.positions.iter().zip(&pattern.cache_contents) {
        let list = files
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(";");
        out.write_record([p[0].to_string(), p[1].to_string(), list])?;
    }
    out.flush()?;
    Ok(())
}
