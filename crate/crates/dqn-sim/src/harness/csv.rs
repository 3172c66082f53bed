//! CSV trace output.
//!
//! Layout: `#`-prefixed metadata comments, a header row, then one row per
//! recorded iteration. Audit columns are left empty on iterations without an
//! audit. Floats are printed with Rust's shortest round-trip formatting, so
//! two runs with identical state produce byte-identical files.

use crate::framework::Trace;
use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

pub const HEADER: &str = "iteration,epochs,relative_error,min_eig,max_eig,bound_m1,bound_m2";

/// Writes the trace. With `deterministic` set, the timestamp comment is
/// suppressed so output depends only on the run itself.
pub fn write_trace<W: Write>(w: &mut W, trace: &Trace, deterministic: bool) -> io::Result<()> {
    writeln!(w, "# sigma={}", trace.sigma)?;
    if !deterministic {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(w, "# generated-unix={now}")?;
    }
    writeln!(w, "{HEADER}")?;
    for r in &trace.records {
        match &r.audit {
            Some(a) => writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.iteration, r.epochs, r.relative_error, a.min_eig, a.max_eig, a.bound_m1, a.bound_m2
            )?,
            None => writeln!(w, "{},{},{},,,,", r.iteration, r.epochs, r.relative_error)?,
        }
    }
    Ok(())
}

pub fn trace_to_string(trace: &Trace, deterministic: bool) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace, deterministic).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("trace output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{AuditRow, RunOutcome, Trace, TraceRecord, PairStats};

    fn tiny_trace() -> Trace {
        Trace {
            records: vec![
                TraceRecord {
                    iteration: 0,
                    epochs: 1.0,
                    relative_error: 1.0,
                    audit: None,
                },
                TraceRecord {
                    iteration: 1,
                    epochs: 1.04,
                    relative_error: 0.5,
                    audit: Some(AuditRow {
                        min_eig: 0.1,
                        max_eig: 2.0,
                        bound_m1: 0.01,
                        bound_m2: 10.0,
                    }),
                },
            ],
            sigma: 0.75,
            outcome: RunOutcome::Completed,
            violations: vec![],
            pair_stats: PairStats::default(),
            tracking_max_rel: 0.0,
            final_x: vec![],
        }
    }

    #[test]
    fn layout_and_empty_audit_cells() {
        let text = trace_to_string(&tiny_trace(), true);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# sigma=0.75");
        assert_eq!(lines[1], HEADER);
        assert_eq!(lines[2], "0,1,1,,,,");
        assert_eq!(lines[3], "1,1.04,0.5,0.1,2,0.01,10");
    }

    #[test]
    fn deterministic_flag_controls_timestamp() {
        let det = trace_to_string(&tiny_trace(), true);
        assert!(!det.contains("generated-unix"));
        let stamped = trace_to_string(&tiny_trace(), false);
        assert!(stamped.contains("generated-unix"));
    }
}
