//! CSV renderings of solver output. Floats carry 17 significant digits so a
//! file read back reproduces the exact `f64`.

use crate::model::{FiniteModel, StationaryPolicy, ValueTable};
use crate::solver::TraceRecord;
use std::fmt::Write;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Quotes a field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("iter,succ_diff_weighted,apriori_bound,residual\n");
    for r in trace {
        writeln!(
            out,
            "{},{},{},{}",
            r.iter,
            fmt_f64(r.succ_diff),
            fmt_f64(r.apriori_bound),
            fmt_f64(r.residual)
        )
        .unwrap();
    }
    out
}

/// `state_index,state_label,value,action_index,action_label`.
pub fn value_csv(model: &FiniteModel, value: &ValueTable, policy: Option<&StationaryPolicy>) -> String {
    let mut out = String::from("state_index,state_label,value,action_index,action_label\n");
    for x in 0..model.n_states() {
        let (ai, al) = match policy {
            Some(p) => {
                let a = p.action(x);
                (a.to_string(), csv_field(&model.actions()[a]))
            }
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{x},{},{},{ai},{al}",
            csv_field(&model.states()[x].label),
            fmt_f64(value[x])
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e300, 5e-324, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn value_rows() {
        let m = crate::model::tests::self_loop(1.0);
        let csv = value_csv(&m, &ValueTable::new(vec![2.0]), Some(&StationaryPolicy::lowest_index(&m)));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[1].contains("2.0000000000000000e0,0,"));
    }
}
