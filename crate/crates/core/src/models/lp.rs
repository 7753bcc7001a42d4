//! CPLEX-style LP text.

use std::fmt::Write;

use super::ir::{Cmp, ModelIR, Sense, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

fn write_expr(out: &mut String, model: &ModelIR, terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        // LP syntax needs at least one term
        if let Some(v) = model.variables().first() {
            let _ = write!(out, " 0 {}", v.name);
        }
        return;
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        let name = &model.variable(v).name;
        let mag = c.abs();
        if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {mag} {name}");
        }
    }
}

pub fn write_lp(model: &ModelIR) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str(match model.objective().sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_expr(&mut out, model, &model.objective().terms);
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, model, &c.terms);
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let name = &v.name;
        if v.lower == v.upper {
            let _ = writeln!(out, " {name} = {}", v.lower);
        } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let lo = if v.lower == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.lower.to_string()
            };
            let up = if v.upper == f64::INFINITY {
                "+inf".to_string()
            } else {
                v.upper.to_string()
            };
            let _ = writeln!(out, " {lo} <= {name} <= {up}");
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
