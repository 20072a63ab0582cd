//! Fixed-form MPS emission and parsing.
//!
//! Names longer than eight characters do not fit the fixed columns, so they
//! are replaced by `C%07d` / `R%07d` codes (variable or row index). The
//! original names and row tags go to a sidecar map next to the MPS file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{MipModel, Sense, Var, VarKind};

const FIELD: usize = 8;

/// Short names used inside the MPS file, by variable and by row index.
#[derive(Clone, Debug, PartialEq)]
pub struct NameMap {
    pub cols: Vec<String>,
    pub rows: Vec<String>,
}

fn needs_code(name: &str) -> bool {
    name.len() > FIELD || name.is_empty() || name.contains(char::is_whitespace) || looks_like_code(name)
}

fn looks_like_code(name: &str) -> bool {
    name.len() == FIELD && (name.starts_with('C') || name.starts_with('R')) && name[1..].bytes().all(|b| b.is_ascii_digit())
}

impl NameMap {
    pub fn for_model(model: &MipModel) -> Self {
        let cols = model
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| if needs_code(&v.name) { format!("C{i:07}") } else { v.name.clone() })
            .collect();
        let rows = model
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| if needs_code(&r.name) || r.name == "OBJ" { format!("R{i:07}") } else { r.name.clone() })
            .collect();
        NameMap { cols, rows }
    }
}

fn num(x: f64) -> String {
    // Shortest representation that parses back to the same f64.
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn sense_code(s: Sense) -> &'static str {
    match s {
        Sense::Le => "L",
        Sense::Eq => "E",
        Sense::Ge => "G",
    }
}

/// Integer columns inside `[0, 1]` are written and read back as binaries.
fn is_binary(v: &Var) -> bool {
    match v.kind {
        VarKind::Binary => true,
        VarKind::Integer => v.lb >= 0.0 && v.ub <= 1.0,
        VarKind::Continuous => false,
    }
}

/// Renders `model` as fixed-form MPS text plus its sidecar map text.
pub fn render(model: &MipModel) -> (String, String) {
    let names = NameMap::for_model(model);
    let mut out = String::new();
    let title = if model.name.is_empty() { "model" } else { model.name.as_str() };
    let _ = writeln!(out, "NAME          {title}");
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (r, short) in model.rows().iter().zip(&names.rows) {
        let _ = writeln!(out, " {}  {short}", sense_code(r.sense));
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (ri, r) in model.rows().iter().enumerate() {
        for &(v, c) in &r.coefs {
            by_col[v].push((ri, c));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (vi, v) in model.vars().iter().enumerate() {
        let is_int = v.kind != VarKind::Continuous;
        if is_int != in_int {
            let kind = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {kind}");
            marker += 1;
            in_int = is_int;
        }
        let col = &names.cols[vi];
        let obj = model.objective()[vi];
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if obj != 0.0 || by_col[vi].is_empty() {
            entries.push(("OBJ", obj));
        }
        for &(ri, c) in &by_col[vi] {
            entries.push((names.rows[ri].as_str(), c));
        }
        for (row, c) in entries {
            let _ = writeln!(out, "    {col:<8}  {row:<8}  {}", num(c));
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for (r, short) in model.rows().iter().zip(&names.rows) {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS       {short:<8}  {}", num(r.rhs));
        }
    }
    out.push_str("RANGES\n");
    out.push_str("BOUNDS\n");
    for (v, col) in model.vars().iter().zip(&names.cols) {
        let mut line = |code: &str, val: Option<f64>| match val {
            Some(x) => {
                let _ = writeln!(out, " {code} BND       {col:<8}  {}", num(x));
            }
            None => {
                let _ = writeln!(out, " {code} BND       {col}");
            }
        };
        if is_binary(v) {
            // readers such as HiGHS drop bounds that follow BV
            if v.lb == 0.0 && v.ub == 1.0 {
                line("BV", None);
            } else if v.lb == v.ub {
                line("FX", Some(v.lb));
            } else {
                line("LO", Some(v.lb));
                line("UP", Some(v.ub));
            }
            continue;
        }
        if v.lb == v.ub {
            line("FX", Some(v.lb));
            continue;
        }
        if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            line("FR", None);
            continue;
        }
        if v.lb == f64::NEG_INFINITY {
            line("MI", None);
        } else if v.lb != 0.0 || (v.kind == VarKind::Integer && v.ub == f64::INFINITY) {
            line("LO", Some(v.lb));
        }
        if v.ub != f64::INFINITY {
            line("UP", Some(v.ub));
        } else if v.kind == VarKind::Integer {
            line("PL", None);
        }
    }
    out.push_str("ENDATA\n");

    let mut map = String::new();
    for (v, short) in model.vars().iter().zip(&names.cols) {
        let _ = writeln!(map, "col {short} {}", v.name);
    }
    for (r, short) in model.rows().iter().zip(&names.rows) {
        let _ = writeln!(map, "row {short} {} {}", r.name, r.tag);
    }
    (out, map)
}

/// Sidecar path for an MPS file: `model.mps` → `model.mps.map`.
pub fn map_path(mps: &Path) -> PathBuf {
    let mut s = mps.as_os_str().to_owned();
    s.push(".map");
    PathBuf::from(s)
}

/// Writes `path` and its sidecar map; returns the name map used.
pub fn emit_model(model: &MipModel, path: impl AsRef<Path>) -> Result<NameMap> {
    let path = path.as_ref();
    let (mps, map) = render(model);
    std::fs::write(path, mps).map_err(|e| Error::io(path, e))?;
    let side = map_path(path);
    std::fs::write(&side, map).map_err(|e| Error::io(&side, e))?;
    Ok(NameMap::for_model(model))
}

struct Sidecar {
    cols: HashMap<String, String>,
    rows: HashMap<String, (String, String)>,
}

fn parse_sidecar(text: &str) -> Result<Sidecar> {
    let mut cols = HashMap::new();
    let mut rows = HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            [] => {}
            ["col", short, full] => {
                cols.insert(short.to_string(), full.to_string());
            }
            ["row", short, full, tag] => {
                rows.insert(short.to_string(), (full.to_string(), tag.to_string()));
            }
            ["row", short, full] => {
                rows.insert(short.to_string(), (full.to_string(), String::new()));
            }
            _ => return Err(Error::parse(ln + 1, format!("bad name map entry `{line}`"))),
        }
    }
    Ok(Sidecar { cols, rows })
}

/// Parses MPS text, restoring long names and tags from `sidecar` if given.
pub fn parse(text: &str, sidecar: Option<&str>) -> Result<MipModel> {
    let side = sidecar.map(parse_sidecar).transpose()?;
    let col_name = |s: &str| {
        side.as_ref()
            .and_then(|m| m.cols.get(s).cloned())
            .unwrap_or_else(|| s.to_string())
    };
    let row_name = |s: &str| {
        side.as_ref()
            .and_then(|m| m.rows.get(s).cloned())
            .unwrap_or_else(|| (s.to_string(), String::new()))
    };

    #[derive(PartialEq)]
    enum Sec {
        None,
        Rows,
        Columns,
        Rhs,
        Ranges,
        Bounds,
    }
    let mut sec = Sec::None;
    let mut name = String::new();
    let mut obj_row: Option<String> = None;
    let mut row_ids: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_coefs: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    struct Col {
        name: String,
        int: bool,
        obj: f64,
        lb: f64,
        ub: f64,
        binary: bool,
        ub_set: bool,
    }
    let mut cols: Vec<Col> = Vec::new();
    let mut col_ids: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;

    let value = |ln: usize, s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::parse(ln, format!("bad number `{s}`")))
    };

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') {
            let mut f = raw.split_whitespace();
            let head = f.next().unwrap_or_default();
            sec = match head {
                "NAME" => {
                    name = f.collect::<Vec<_>>().join(" ");
                    Sec::None
                }
                "ROWS" => Sec::Rows,
                "COLUMNS" => Sec::Columns,
                "RHS" => Sec::Rhs,
                "RANGES" => Sec::Ranges,
                "BOUNDS" => Sec::Bounds,
                "ENDATA" => break,
                other => return Err(Error::parse(ln, format!("unknown section `{other}`"))),
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match sec {
            Sec::None => return Err(Error::parse(ln, "data before any section")),
            Sec::Rows => {
                let [kind, r] = f.as_slice() else {
                    return Err(Error::parse(ln, "expected `<type> <row>`"));
                };
                let sense = match *kind {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(r.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    other => return Err(Error::parse(ln, format!("unknown row type `{other}`"))),
                };
                row_ids.insert(r.to_string(), rows.len());
                rows.push((r.to_string(), sense));
                row_coefs.push(Vec::new());
                rhs.push(0.0);
            }
            Sec::Columns => {
                if f.len() >= 3 && f[1] == "'MARKER'" {
                    match f[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => return Err(Error::parse(ln, format!("unknown marker {other}"))),
                    }
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(Error::parse(ln, "expected `<col> <row> <value> [<row> <value>]`"));
                }
                let c = match col_ids.get(f[0]) {
                    Some(&c) => c,
                    None => {
                        col_ids.insert(f[0].to_string(), cols.len());
                        cols.push(Col {
                            name: f[0].to_string(),
                            int: in_int,
                            obj: 0.0,
                            lb: 0.0,
                            ub: f64::INFINITY,
                            binary: false,
                            ub_set: false,
                        });
                        cols.len() - 1
                    }
                };
                for pair in f[1..].chunks(2) {
                    let v = value(ln, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        cols[c].obj = v;
                    } else {
                        let r = *row_ids
                            .get(pair[0])
                            .ok_or_else(|| Error::parse(ln, format!("unknown row `{}`", pair[0])))?;
                        row_coefs[r].push((c, v));
                    }
                }
            }
            Sec::Rhs => {
                if f.len() != 3 && f.len() != 5 {
                    return Err(Error::parse(ln, "expected `<set> <row> <value> [<row> <value>]`"));
                }
                for pair in f[1..].chunks(2) {
                    let v = value(ln, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue;
                    }
                    let r = *row_ids
                        .get(pair[0])
                        .ok_or_else(|| Error::parse(ln, format!("unknown row `{}`", pair[0])))?;
                    rhs[r] = v;
                }
            }
            Sec::Ranges => return Err(Error::parse(ln, "ranged rows are not supported")),
            Sec::Bounds => {
                if f.len() < 3 {
                    return Err(Error::parse(ln, "expected `<type> <set> <col> [<value>]`"));
                }
                let c = *col_ids
                    .get(f[2])
                    .ok_or_else(|| Error::parse(ln, format!("unknown column `{}`", f[2])))?;
                let v = f.get(3).map(|s| value(ln, s)).transpose()?;
                let need = |v: Option<f64>| v.ok_or_else(|| Error::parse(ln, "missing bound value"));
                let col = &mut cols[c];
                match f[0] {
                    "UP" => {
                        col.ub = need(v)?;
                        col.ub_set = true;
                    }
                    "LO" => col.lb = need(v)?,
                    "FX" => {
                        let x = need(v)?;
                        col.lb = x;
                        col.ub = x;
                        col.ub_set = true;
                    }
                    "FR" => {
                        col.lb = f64::NEG_INFINITY;
                        col.ub = f64::INFINITY;
                        col.ub_set = true;
                    }
                    "MI" => col.lb = f64::NEG_INFINITY,
                    "PL" => {
                        col.ub = f64::INFINITY;
                        col.ub_set = true;
                    }
                    "BV" => {
                        col.binary = true;
                        col.int = true;
                        col.lb = 0.0;
                        col.ub = 1.0;
                    }
                    other => return Err(Error::parse(ln, format!("unknown bound type `{other}`"))),
                }
            }
        }
    }

    let mut model = MipModel::new(name);
    for col in &cols {
        let kind = match (col.binary, col.int) {
            (true, _) => VarKind::Binary,
            (false, true) if col.lb >= 0.0 && col.ub <= 1.0 => VarKind::Binary,
            (false, true) => VarKind::Integer,
            _ => VarKind::Continuous,
        };
        let id = model.add_var(col_name(&col.name), kind, f64::NEG_INFINITY, f64::INFINITY, col.obj)?;
        model.set_bounds(id, col.lb, col.ub);
    }
    for (r, (short, sense)) in rows.iter().enumerate() {
        let (full, tag) = row_name(short);
        model.add_row(full, tag, row_coefs[r].iter().copied(), *sense, rhs[r])?;
    }
    Ok(model)
}

/// Reads an MPS file and its sidecar map when present.
pub fn read_model(path: impl AsRef<Path>) -> Result<MipModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let side = map_path(path);
    let map = if side.exists() {
        Some(std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?)
    } else {
        None
    };
    parse(&text, map.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MipModel, Sense, VarKind};

    fn small() -> MipModel {
        let mut m = MipModel::new("small");
        let a = m.add_var("a", VarKind::Binary, 0.0, 1.0, 3.0).unwrap();
        let b = m.add_var("a_long_name", VarKind::Integer, 0.0, 4.0, -1.5).unwrap();
        let c = m.add_var("c", VarKind::Continuous, -2.0, f64::INFINITY, 0.0).unwrap();
        m.add_var("unused", VarKind::Continuous, 0.0, f64::INFINITY, 0.0).unwrap();
        let d = m.add_var("d", VarKind::Binary, 0.0, 1.0, 0.0).unwrap();
        m.tighten_bounds(d, 1.0, 1.0);
        m.add_row("first", "fam", [(a, 1.0), (b, 2.0)], Sense::Le, 3.0).unwrap();
        m.add_row("a_very_long_row", "cut:x", [(b, 1.0), (c, -0.1)], Sense::Ge, -0.25).unwrap();
        m.add_row("eq", "fam", [(a, 1.0), (c, 1.0), (d, 1.0)], Sense::Eq, 0.0).unwrap();
        m
    }

    #[test]
    fn empty_model_parses() {
        let m = MipModel::new("empty");
        let (text, map) = render(&m);
        assert!(text.contains("ROWS") && text.contains("ENDATA"));
        let back = parse(&text, Some(&map)).unwrap();
        assert_eq!(back.num_vars(), 0);
        assert_eq!(back.num_rows(), 0);
    }

    #[test]
    fn round_trip_is_structural_and_idempotent() {
        let m = small();
        let (text, map) = render(&m);
        let back = parse(&text, Some(&map)).unwrap();
        assert_eq!(back.vars(), m.vars());
        assert_eq!(back.rows(), m.rows());
        assert_eq!(back.objective(), m.objective());
        let (again, map2) = render(&back);
        assert_eq!(text, again);
        assert_eq!(map, map2);
    }

    #[test]
    fn tightened_binaries_skip_bv() {
        let (text, _) = render(&small());
        assert!(text.contains(" BV BND       a\n"));
        assert!(text.contains(" FX BND       d         1\n"));
        assert!(!text.contains("BV BND       d"));
    }

    #[test]
    fn long_names_get_codes() {
        let m = small();
        let names = NameMap::for_model(&m);
        assert_eq!(names.cols[1], "C0000001");
        assert_eq!(names.rows[1], "R0000001");
        assert_eq!(names.cols[0], "a");
        let (text, _) = render(&m);
        assert!(!text.contains("a_long_name"));
    }

    #[test]
    fn bad_input_reports_line() {
        let err = parse("NAME x\nROWS\n Q  r\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
