//! JSON output with every float at 17 significant digits, plus conversions
//! of the library's report types.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use permorb_core::audit::{
    AuditReport, OseReport, PuEstimate, PuMethod, SqrtnCeiling, SubsetBound,
};
use permorb_core::constructions::{Certificate, CounterexamplePair};
use permorb_core::separation::{SeparationStatus, SeparationVerdict, Witness};
use permorb_core::{Matrix, Permutation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `d.dddddddddddddddde[+-]x`; non-finite values have no JSON form.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty printing with fixed-width float output.
struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            w.write_all(format_f64(v).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_string(value: &impl Serialize) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, SeventeenDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("JSON values always serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Integers beyond 2^53 are written as decimal strings.
pub fn big(v: u128) -> Value {
    if v < (1u128 << 53) {
        json!(v as u64)
    } else {
        json!(v.to_string())
    }
}

pub fn matrix(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| json!(m.row(i))).collect())
}

/// 0-based image list.
pub fn perm(p: &Permutation) -> Value {
    json!(p.as_slice())
}

pub fn ceiling(c: &SqrtnCeiling) -> Value {
    json!({ "aligned": c.aligned, "universal": c.universal })
}

pub fn subset_bound(b: &SubsetBound) -> Value {
    json!({
        "value": b.value,
        "r": b.r,
        "subsets_examined": big(b.subsets_examined),
        "certified": b.certified,
    })
}

pub fn pu_method(m: &PuMethod) -> Value {
    match m {
        PuMethod::Exact2dSweep => json!({ "kind": "exact-2d-sweep" }),
        PuMethod::SphereSampling { directions, seed } => {
            json!({ "kind": "sphere-sampling", "directions": directions, "seed": seed.0 })
        }
    }
}

pub fn pu(p: &PuEstimate) -> Value {
    json!({
        "m": p.m,
        "delta": p.delta,
        "method": pu_method(&p.method),
        "direction_count": p.direction_count,
        "certified": p.method == PuMethod::Exact2dSweep,
    })
}

pub fn ose(r: &OseReport) -> Value {
    json!({
        "violations": r.violations,
        "max_ratio_error": r.max_ratio_error,
        "pairs_evaluated": r.evaluated,
        "pairs_skipped": r.skipped,
    })
}

fn skipped(report: &AuditReport, key: &str) -> Option<Value> {
    report
        .skipped
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, why)| json!({ "skipped": why }))
}

/// The audit report body; callers add parameters and optional blocks.
pub fn audit_report(r: &AuditReport) -> Value {
    let e = &r.empirical;
    json!({
        "sigma1": r.sigma1,
        "empirical": {
            "c1": e.c1,
            "c2": e.c2,
            "distortion": e.distortion(),
            "c1_pair_index": e.c1_index,
            "pairs_used": e.used,
            "pairs_skipped": e.skipped,
        },
        "ceiling_sqrt_n": r.ceiling.as_ref().map(ceiling),
        "subset_bound": r.subset_bound.as_ref().map(subset_bound)
            .or_else(|| skipped(r, "subset_bound")),
        "subset_hypothesis_holds": r.subset_hypothesis,
        "projective_uniformity": r.pu.as_ref().map(pu),
        "blueprint_bound": r.blueprint_bound.map(|b| json!(b))
            .or_else(|| skipped(r, "blueprint_bound")),
        "seed": r.seed.0,
        "pair_count": r.trials,
    })
}

pub fn status(s: SeparationStatus) -> &'static str {
    match s {
        SeparationStatus::Separating => "separating",
        SeparationStatus::WitnessFound => "witness-found",
        SeparationStatus::Inconclusive => "inconclusive",
    }
}

pub fn witness(w: &Witness) -> Value {
    let (x, y) = w.clouds();
    json!({
        "tuple_index": big(w.tuple_index),
        "p": w.p.iter().map(perm).collect::<Vec<_>>(),
        "q": w.q.iter().map(perm).collect::<Vec<_>>(),
        "x_coordinates": matrix(&w.x),
        "cloud_x": matrix(x.matrix()),
        "cloud_y": matrix(y.matrix()),
    })
}

pub fn verdict(v: &SeparationVerdict) -> Value {
    json!({
        "status": status(v.status),
        "tuples_examined": big(v.tuples_examined),
        "total_tuples": big(v.total_tuples),
        "budget": big(v.budget),
        "witness": v.witness.as_ref().map(witness),
    })
}

pub fn certificate(c: &Certificate) -> Value {
    match c {
        Certificate::SubsetSums {
            blocks,
            null_vectors,
            alphas,
            seed,
            attempts,
        } => json!({
            "kind": "subset-sums",
            "blocks": blocks,
            "null_vectors": null_vectors,
            "alphas": alphas,
            "seed": seed.0,
            "attempts": attempts,
        }),
        Certificate::AdversarialCircle { n, d, aligned } => json!({
            "kind": "adversarial-circle",
            "n": n,
            "d": d,
            "aligned": aligned,
        }),
    }
}

pub fn pair(p: &CounterexamplePair) -> Value {
    json!({
        "distance": p.distance,
        "scale": p.scale(),
        "certificate": certificate(&p.certificate),
    })
}
