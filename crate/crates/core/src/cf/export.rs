use std::io::Write;

use crate::cf::trace::ConvergentTrace;
use crate::error::Result;

pub const TRACE_COLUMNS: [&str; 3] = ["n", "tau_real", "cayley_angle"];

/// Writes `n, tau_real, cayley_angle` rows; ∞ is written as `inf`.
pub fn write_trace_csv<W: Write>(trace: &ConvergentTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for (n, v) in trace.indices.iter().zip(&trace.values) {
        w.write_record([n.to_string(), v.to_decimal(), v.cayley_angle(trace.prec).to_decimal()])?;
    }
    w.flush()?;
    Ok(())
}
