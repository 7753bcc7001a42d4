//! MPS reading and writing.
//!
//! Free form keeps model names. Fixed form uses generated eight-character
//! names (`R0000001`, `C0000001`) in the documented column positions.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::ir::{Cmp, ModelIR, Sense, VarId, VarKind};
use crate::error::ModelError;

const OBJ_ROW: &str = "obj";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsFormat {
    Free,
    Fixed,
}

struct Names {
    rows: Vec<String>,
    cols: Vec<String>,
    obj: String,
}

impl Names {
    fn for_model(model: &ModelIR, format: MpsFormat) -> Names {
        match format {
            MpsFormat::Free => Names {
                rows: model.constraints().iter().map(|c| c.name.clone()).collect(),
                cols: model.variables().iter().map(|v| v.name.clone()).collect(),
                obj: OBJ_ROW.to_string(),
            },
            MpsFormat::Fixed => Names {
                rows: (0..model.constraints().len()).map(|i| format!("R{:07}", i + 1)).collect(),
                cols: (0..model.variables().len()).map(|i| format!("C{:07}", i + 1)).collect(),
                obj: "OBJ".to_string(),
            },
        }
    }
}

/// Shortest decimal that fits a fixed-form numeric field (12 characters).
fn fixed_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    for prec in (0..=10).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:e}")
}

fn push_entry(out: &mut String, format: MpsFormat, f1: &str, f2: &str, f3: &str, f4: f64) {
    match format {
        MpsFormat::Free => {
            let _ = writeln!(out, " {f1:<2} {f2} {f3} {f4}");
        }
        MpsFormat::Fixed => {
            let _ = writeln!(out, " {f1:<2} {f2:<8}  {f3:<8}  {:>12}", fixed_number(f4));
        }
    }
}

/// Serializes `model` to MPS text. Output is byte-deterministic.
pub fn write_mps(model: &ModelIR, format: MpsFormat) -> String {
    let names = Names::for_model(model, format);
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", match format {
        MpsFormat::Free => model.name.clone(),
        MpsFormat::Fixed => model.name.chars().take(8).collect(),
    });
    let _ = writeln!(out, "OBJSENSE");
    let _ = writeln!(out, "    {}", match model.objective().sense {
        Sense::Maximize => "MAX",
        Sense::Minimize => "MIN",
    });
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  {}", names.obj);
    for (i, c) in model.constraints().iter().enumerate() {
        let t = match c.cmp {
            Cmp::Le => "L",
            Cmp::Ge => "G",
            Cmp::Eq => "E",
        };
        let _ = writeln!(out, " {t}  {}", names.rows[i]);
    }

    // column-major view of the matrix
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables().len()];
    for (row, c) in model.constraints().iter().enumerate() {
        for &(v, coef) in &c.terms {
            cols[v.0].push((row, coef));
        }
    }
    let mut obj = vec![0.0; model.variables().len()];
    for &(v, c) in &model.objective().terms {
        obj[v.0] += c;
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    let mut marker = 0;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let kind = if is_int { "'INTORG'" } else { "'INTEND'" };
            match format {
                MpsFormat::Free => {
                    let _ = writeln!(out, "    MARKER{marker} 'MARKER' {kind}");
                }
                MpsFormat::Fixed => {
                    let _ = writeln!(out, "    {:<8}  {:<8}                 {kind}", format!("M{marker:07}"), "'MARKER'");
                }
            }
            marker += 1;
            in_int = is_int;
        }
        let col = &names.cols[j];
        if obj[j] != 0.0 || cols[j].is_empty() {
            push_entry(&mut out, format, "", col, &names.obj, obj[j]);
        }
        for &(row, coef) in &cols[j] {
            push_entry(&mut out, format, "", col, &names.rows[row], coef);
        }
    }
    if in_int {
        match format {
            MpsFormat::Free => {
                let _ = writeln!(out, "    MARKER{marker} 'MARKER' 'INTEND'");
            }
            MpsFormat::Fixed => {
                let _ = writeln!(out, "    {:<8}  {:<8}                 'INTEND'", format!("M{marker:07}"), "'MARKER'");
            }
        }
    }

    let _ = writeln!(out, "RHS");
    for (i, c) in model.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            push_entry(&mut out, format, "", "RHS", &names.rows[i], c.rhs);
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for (j, v) in model.variables().iter().enumerate() {
        let col = &names.cols[j];
        let bound = |out: &mut String, kind: &str, value: Option<f64>| match (format, value) {
            (MpsFormat::Free, Some(x)) => {
                let _ = writeln!(out, " {kind} BND {col} {x}");
            }
            (MpsFormat::Free, None) => {
                let _ = writeln!(out, " {kind} BND {col}");
            }
            (MpsFormat::Fixed, Some(x)) => {
                let _ = writeln!(out, " {kind} BND       {col:<8}  {:>12}", fixed_number(x));
            }
            (MpsFormat::Fixed, None) => {
                let _ = writeln!(out, " {kind} BND       {col:<8}");
            }
        };
        if v.lower == v.upper {
            bound(&mut out, "FX", Some(v.lower));
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            bound(&mut out, "FR", None);
            continue;
        }
        if v.lower == f64::NEG_INFINITY {
            bound(&mut out, "MI", None);
        } else if v.lower != 0.0 || v.kind == VarKind::Binary {
            bound(&mut out, "LO", Some(v.lower));
        }
        if v.upper != f64::INFINITY {
            bound(&mut out, "UP", Some(v.upper));
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

#[derive(PartialEq)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Parses MPS text (free form, or fixed form whose names contain no spaces).
pub fn parse_mps(text: &str) -> Result<ModelIR, ModelError> {
    let err = |line: usize, message: &str| ModelError::Mps {
        line,
        message: message.to_string(),
    };
    let mut name = String::new();
    let mut sense = Sense::Minimize;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, Cmp)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_order: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_int: Vec<bool> = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut obj: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rhs: HashMap<usize, f64> = HashMap::new();
    let mut bounds: Vec<(f64, Option<f64>)> = Vec::new();
    let mut in_int = false;
    let mut section = Section::None;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = fields.get(1) {
                        sense = parse_sense(s).ok_or_else(|| err(line_no, "bad OBJSENSE"))?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "RANGES" => return Err(err(line_no, "RANGES are not supported")),
                "ENDATA" => break,
                other => return Err(err(line_no, &format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => {
                sense = parse_sense(fields[0]).ok_or_else(|| err(line_no, "bad OBJSENSE"))?;
            }
            Section::Rows => {
                let [kind, row] = fields[..] else {
                    return Err(err(line_no, "expected row type and name"));
                };
                let cmp = match kind {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(row.to_string());
                        }
                        continue;
                    }
                    "L" => Cmp::Le,
                    "G" => Cmp::Ge,
                    "E" => Cmp::Eq,
                    _ => return Err(err(line_no, "unknown row type")),
                };
                row_index.insert(row.to_string(), rows.len());
                rows.push((row.to_string(), cmp));
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    in_int = match fields[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        _ => return Err(err(line_no, "unknown marker")),
                    };
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line_no, "expected column, row, value pairs"));
                }
                let col = fields[0];
                let j = *col_index.entry(col.to_string()).or_insert_with(|| {
                    col_order.push(col.to_string());
                    col_int.push(in_int);
                    entries.push(Vec::new());
                    bounds.push((0.0, None));
                    col_order.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| err(line_no, "bad number"))?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        *obj.entry(j).or_insert(0.0) += value;
                    } else {
                        let row = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line_no, &format!("unknown row {}", pair[0])))?;
                        entries[j].push((row, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line_no, "expected set, row, value"));
                }
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| err(line_no, "bad number"))?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue;
                    }
                    let row = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line_no, &format!("unknown row {}", pair[0])))?;
                    rhs.insert(row, value);
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(line_no, "expected bound type, set, column"));
                }
                let j = *col_index
                    .get(fields[2])
                    .ok_or_else(|| err(line_no, &format!("unknown column {}", fields[2])))?;
                let value = fields
                    .get(3)
                    .map(|v| v.parse::<f64>())
                    .transpose()
                    .map_err(|_| err(line_no, "bad number"))?;
                let need = || value.ok_or_else(|| err(line_no, "bound value missing"));
                let b = &mut bounds[j];
                match fields[0] {
                    "UP" => b.1 = Some(need()?),
                    "LO" => b.0 = need()?,
                    "FX" => {
                        b.0 = need()?;
                        b.1 = Some(need()?);
                    }
                    "FR" => {
                        b.0 = f64::NEG_INFINITY;
                        b.1 = Some(f64::INFINITY);
                    }
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = Some(f64::INFINITY),
                    "BV" => {
                        b.0 = 0.0;
                        b.1 = Some(1.0);
                        col_int[j] = true;
                    }
                    _ => return Err(err(line_no, "unsupported bound type")),
                }
            }
            Section::None | Section::Name => return Err(err(line_no, "data outside a section")),
        }
    }

    let mut model = ModelIR::new(name, sense);
    let mut ids = Vec::with_capacity(col_order.len());
    for (j, col) in col_order.iter().enumerate() {
        let (lo, up) = bounds[j];
        let up = up.unwrap_or(f64::INFINITY);
        let kind = if col_int[j] {
            if lo != 0.0 || up != 1.0 {
                return Err(err(0, &format!("integer column {col} is not binary")));
            }
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        ids.push(model.add_var(col.clone(), kind, lo, up));
    }
    let mut row_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); rows.len()];
    for (j, list) in entries.iter().enumerate() {
        for &(row, value) in list {
            row_terms[row].push((ids[j], value));
        }
    }
    for (i, ((row, cmp), terms)) in rows.into_iter().zip(row_terms).enumerate() {
        model.add_constraint(row, terms, cmp, rhs.get(&i).copied().unwrap_or(0.0));
    }
    model.set_objective(sense, obj.into_iter().map(|(j, c)| (ids[j], c)).collect());
    Ok(model)
}

fn parse_sense(s: &str) -> Option<Sense> {
    match s {
        "MAX" | "MAXIMIZE" => Some(Sense::Maximize),
        "MIN" | "MINIMIZE" => Some(Sense::Minimize),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ModelIR {
        let mut m = ModelIR::new("small", Sense::Maximize);
        let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY);
        let y = m.add_var("y", VarKind::Binary, 0.0, 1.0);
        let z = m.add_var("z", VarKind::Continuous, -2.0, 4.5);
        let w = m.add_var("w", VarKind::Continuous, 3.0, 3.0);
        m.add_constraint("c1", vec![(x, 1.0), (y, -2.5)], Cmp::Le, 4.0);
        m.add_constraint("c2", vec![(x, 1.0), (z, 1.0), (w, 0.1)], Cmp::Ge, -1.0);
        m.add_constraint("c3", vec![(y, 1.0)], Cmp::Eq, 1.0);
        m.set_objective(Sense::Maximize, vec![(x, 1.0), (z, 0.05555555555555555)]);
        m
    }

    #[test]
    fn free_form_round_trip_is_exact() {
        let m = small();
        let text = write_mps(&m, MpsFormat::Free);
        let back = parse_mps(&text).unwrap();
        assert_eq!(back.variables(), m.variables());
        assert_eq!(back.constraints(), m.constraints());
        assert_eq!(back.objective(), m.objective());
        assert_eq!(write_mps(&back, MpsFormat::Free), text);
    }

    #[test]
    fn fixed_form_uses_short_names_in_columns() {
        let text = write_mps(&small(), MpsFormat::Fixed);
        for line in text.lines() {
            if line.starts_with(' ') && !line.contains("MARKER") {
                let fields: Vec<&str> = line.split_whitespace().collect();
                assert!(fields.iter().all(|f| f.len() <= 12), "{line}");
            }
        }
        let back = parse_mps(&text).unwrap();
        assert_eq!(back.variables().len(), 4);
        assert_eq!(back.variables()[1].kind, VarKind::Binary);
        assert_eq!(back.variables()[2].lower, -2.0);
        assert_eq!(back.variables()[3].upper, 3.0);
    }

    #[test]
    fn long_numbers_fit_fixed_fields() {
        assert!(fixed_number(0.05555555555555555).len() <= 12);
        assert!(fixed_number(-16635197.123456).len() <= 12);
        assert_eq!(fixed_number(3.0), "3");
    }

    #[test]
    fn rejects_unknown_rows() {
        let text = "NAME x\nROWS\n N obj\nCOLUMNS\n x nope 1\nENDATA\n";
        assert!(matches!(parse_mps(text), Err(ModelError::Mps { line: 5, .. })));
    }
}
