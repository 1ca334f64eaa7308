//! JSON reports. Field names are stable within a report format version.

use cellcover_core::homsolver::{Bounds, HomVerdict, Homomorphism, Trace, Verdict};
use cellcover_core::rankone::RationalGroup;
use cellcover_core::verifier::{
    CellularReport, Conclusion, KernelCheck, NotCellularWitness, ObstructionCase, ObstructionReport, Overall,
    SweepTally,
};
use serde_json::{json, Value};

use crate::format::{heights_to_file, matrix_to_strings, rational_to_string};

pub const REPORT_FORMAT: &str = "cellcover-report/1";

pub fn bounds_json(b: &Bounds) -> Value {
    json!({
        "coeff_bound": b.coeff_bound,
        "prime_bound": b.prime_bound,
        "exponent_bound": b.exponent_bound,
        "level": b.level,
        "budget": b.budget,
    })
}

fn trace_json(t: &Trace) -> Value {
    Value::from(t.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>())
}

fn map_json(h: &Homomorphism) -> Value {
    json!(matrix_to_strings(h))
}

fn scalars_json(r: &RationalGroup) -> Value {
    json!(heights_to_file(r.heights()))
}

pub fn hom_verdict_json(v: &HomVerdict) -> Value {
    match v {
        HomVerdict::ZeroProven(t) => json!({ "verdict": "zero-proven", "trace": trace_json(t) }),
        HomVerdict::Generators(g) => json!({
            "verdict": "generators",
            "maps": g.maps.iter().map(map_json).collect::<Vec<_>>(),
            "scalars": scalars_json(&g.scalars),
            "complete": g.complete,
            "support": g.support,
            "capped": g.capped,
            "bounds": bounds_json(&g.bounds),
        }),
        HomVerdict::InconclusiveAtBound { bounds, reason } => {
            json!({ "verdict": "inconclusive", "reason": reason, "bounds": bounds_json(bounds) })
        }
    }
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Proven(t) => json!({ "verdict": "proven", "trace": trace_json(t) }),
        Verdict::Refuted(s) => json!({ "verdict": "refuted", "reason": s }),
        Verdict::Inconclusive(s) => json!({ "verdict": "inconclusive", "reason": s }),
    }
}

fn kernel_json(k: &KernelCheck) -> Value {
    json!({
        "holds": k.holds,
        "witness": k.witness.as_ref().map(|w| w.iter().map(rational_to_string).collect::<Vec<_>>()),
        "primes_checked": k.primes_checked,
        "unknown_primes": k.unknown_primes,
    })
}

pub fn overall_json(o: &Overall) -> Value {
    match o {
        Overall::Cellular(b) => json!({ "verdict": "cellular", "bounds": bounds_json(b) }),
        Overall::NotCellular(w) => {
            let witness = match w {
                NotCellularWitness::Split(s) => json!({ "kind": "split", "section": map_json(s) }),
                NotCellularWitness::KernelMap(m) => json!({ "kind": "map-into-kernel", "map": map_json(m) }),
                NotCellularWitness::KernelMismatch(x) => json!({
                    "kind": "kernel-mismatch",
                    "element": x.iter().map(rational_to_string).collect::<Vec<_>>(),
                }),
            };
            json!({ "verdict": "not-cellular", "witness": witness })
        }
        Overall::Inconclusive { bounds, reason } => {
            json!({ "verdict": "inconclusive", "reason": reason, "bounds": bounds_json(bounds) })
        }
    }
}

pub fn cellular_json(r: &CellularReport, config: Value) -> Value {
    json!({
        "format": REPORT_FORMAT,
        "report": "verify",
        "config": config,
        "overall": overall_json(&r.overall),
        "hom_gk": hom_verdict_json(&r.hom_gk),
        "hom_kh": hom_verdict_json(&r.hom_kh),
        "fully_invariant": verdict_json(&r.fully_invariant),
        "hom_gh": verdict_json(&r.hom_gh),
        "kernel_identity": kernel_json(&r.kernel_identity),
    })
}

fn case_json(c: &ObstructionCase) -> Value {
    match c {
        ObstructionCase::VanishingCoordinate { i, p, q } => {
            json!({ "kind": "vanishing-coordinate", "i": i + 1, "p": p, "q": q })
        }
        ObstructionCase::NonconstantCoordinate { i, p, q } => {
            json!({ "kind": "nonconstant-coordinate", "i": i + 1, "p": p, "q": q })
        }
        ObstructionCase::Constant(z) => json!({ "kind": "constant", "z": z }),
        ObstructionCase::Undetermined => json!({ "kind": "undetermined" }),
    }
}

pub fn conclusion_label(c: &Conclusion) -> &'static str {
    match c {
        Conclusion::NotCellularSplit => "split",
        Conclusion::NotCellularKernelMap => "map-into-kernel",
        Conclusion::NotCellularCongruence => "congruence-contradiction",
        Conclusion::Inconclusive(_) => "inconclusive",
    }
}

pub fn obstruction_json(r: &ObstructionReport, config: Value) -> Value {
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "r": w.r,
            "s": w.s,
            "i": w.i + 1,
            "p": w.p,
            "q": w.q,
            "z_p": w.z_p,
            "z_q": w.z_q,
            "lift_constraints": w.shape.constraints.iter().map(|(e, m)| json!({ "expression": e, "modulus": m })).collect::<Vec<_>>(),
            "trail": w.trail.iter().map(|c| json!({
                "step": c.label,
                "expression": format!("{}*h + {}", c.alpha, c.beta),
                "modulus": c.modulus,
                "claim": if c.holds { "in qZ" } else { "not in qZ" },
            })).collect::<Vec<_>>(),
        })
    });
    let replay = r.trail_replay.as_ref().map(|t| {
        json!({ "arithmetic": t.arithmetic, "derivation": t.derivation, "failing_step": t.failing_step })
    });
    let note = match &r.conclusion {
        Conclusion::Inconclusive(s) => Some(s.clone()),
        _ => None,
    };
    json!({
        "format": REPORT_FORMAT,
        "report": "obstruct",
        "config": config,
        "normalized": r.normalized,
        "case": case_json(&r.case),
        "witness": witness,
        "trail_replay": replay,
        "section": r.section.as_ref().map(|s| json!({ "image_of_1": { "a": 1, "z": s.z } })),
        "map_into_kernel": r.kernel_map.as_ref().map(|k| json!({ "a": k.x, "e": k.y })),
        "conclusion": conclusion_label(&r.conclusion),
        "note": note,
    })
}

pub fn sweep_json(t: &SweepTally, config: Value) -> Value {
    json!({
        "format": REPORT_FORMAT,
        "report": "sweep",
        "config": config,
        "candidates": t.candidates,
        "split": t.split,
        "map_into_kernel": t.kernel_map,
        "congruence_contradiction": t.congruence,
        "inconclusive": t.inconclusive,
        "cellular": t.cellular,
        "replay_failures": t.replay_failures,
        "lift_witnesses": t.lift_witnesses,
        "trails_arithmetic": t.trails_arithmetic,
        "trails_derived": t.trails_derived,
    })
}
