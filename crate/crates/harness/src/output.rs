use adaprox_core::TraceRecord;

pub const TRACE_HEADER: [&str; 12] =
    ["k", "epochs", "wall_s", "F", "F_avg", "subopt", "gradmap", "avg_sq_gradmap", "S", "step", "batch", "test_acc"];

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.epochs),
            fmt_f64(r.wall_s),
            fmt_f64(r.f),
            opt(r.f_avg),
            opt(r.subopt),
            fmt_f64(r.gradmap),
            fmt_f64(r.avg_sq_gradmap),
            opt(r.s),
            fmt_f64(r.step),
            r.batch.to_string(),
            opt(r.test_acc),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-10, 3.3e20, 0.1 + 0.2, 12345.678, -7e-5] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1e-10), "1e-10");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn empty_optionals() {
        let row = TraceRecord {
            k: 0,
            epochs: 0.0,
            wall_s: 0.0,
            f: 0.5,
            f_avg: None,
            subopt: None,
            gradmap: 0.1,
            avg_sq_gradmap: 0.01,
            s: None,
            step: 0.2,
            batch: 0,
            test_acc: None,
        };
        let text = trace_csv(&[row]);
        assert_eq!(text, "k,epochs,wall_s,F,F_avg,subopt,gradmap,avg_sq_gradmap,S,step,batch,test_acc\n0,0,0,0.5,,,0.1,0.01,,0.2,0,\n");
    }
}
