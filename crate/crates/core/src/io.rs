//! File formats.
//!
//! JSON documents are recognized by their top-level keys:
//!
//! | kind       | keys                              |
//! |------------|-----------------------------------|
//! | explicit   | `names`, `violators`              |
//! | abstract   | `names`, `order`, `values`        |
//! | concrete   | `names`, `points`, `constraints`  |
//! | grid USO   | `blocks`, `outmap`                |
//!
//! Subsets are keyed by comma-joined member names (`""` is the empty set);
//! member order inside a key is irrelevant on input and follows constraint
//! index on output. `values` maps subset keys to tokens of `order` (listed
//! from smallest to largest) or `+inf`; an array indexed by subset mask is
//! accepted as well. `constraints` lists, per constraint, the names of the
//! points it contains.
//!
//! CSV files carry a header row. `name,a,b,c` declares halfplanes
//! `a x + b y <= c` over the positive orthant; `name,x,y,...` declares
//! points. Numbers are integers, fractions `p/q`, or decimals.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::explicit::{
    AbstractLpTable, ConcreteLpProblem, ExplicitError, ExplicitViolatorSpace, LpValue,
};
use crate::grid_uso::{GridPartition, GridUso, UsoError};
use crate::instances::{HalfplaneLp, ImplicitRegion, InstanceError, PointSet, Scalar};
use crate::set::ConstraintSet;
use crate::Rational;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Line { line: u64, msg: String },
    #[error("{0}")]
    Schema(String),
    #[error("cannot determine the file kind: {0}")]
    UnknownKind(String),
    #[error(transparent)]
    Explicit(#[from] ExplicitError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Uso(#[from] UsoError),
}

fn schema(msg: impl Into<String>) -> ParseError {
    ParseError::Schema(msg.into())
}

/// A parsed input file.
#[derive(Debug)]
pub enum Document {
    Explicit {
        names: Vec<String>,
        space: ExplicitViolatorSpace,
    },
    Abstract {
        names: Vec<String>,
        table: AbstractLpTable,
    },
    Concrete {
        names: Vec<String>,
        problem: ConcreteLpProblem,
    },
    Uso(GridUso),
    Points(PointSet<Rational>),
    Halfplanes(HalfplaneLp<Rational>),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Explicit { .. } => "explicit",
            Document::Abstract { .. } => "abstract",
            Document::Concrete { .. } => "concrete",
            Document::Uso(_) => "uso",
            Document::Points(_) => "points",
            Document::Halfplanes(_) => "halfplanes",
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            Document::Explicit { names, .. }
            | Document::Abstract { names, .. }
            | Document::Concrete { names, .. } => names,
            Document::Uso(u) => u.partition().names(),
            Document::Points(p) => p.names(),
            Document::Halfplanes(l) => l.names(),
        }
    }
}

/// Parses JSON or CSV, deciding by the first non-blank character.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    match text.trim_start().chars().next() {
        Some('{') => parse_json(text),
        Some(_) => parse_csv(text),
        None => Err(ParseError::UnknownKind("empty input".into())),
    }
}

pub fn parse_json(text: &str) -> Result<Document, ParseError> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| ParseError::UnknownKind("top level is not an object".into()))?;
    let has = |k: &str| obj.contains_key(k);
    let kinds: Vec<&str> = [
        ("explicit", has("violators")),
        ("abstract", has("order") && has("values")),
        ("concrete", has("points") && has("constraints")),
        ("uso", has("blocks") && has("outmap")),
    ]
    .into_iter()
    .filter_map(|(k, ok)| ok.then_some(k))
    .collect();
    match kinds.as_slice() {
        ["explicit"] => parse_explicit(obj),
        ["abstract"] => parse_abstract(obj),
        ["concrete"] => parse_concrete(obj),
        ["uso"] => parse_uso(obj),
        [] => Err(ParseError::UnknownKind("no recognized top-level keys".into())),
        many => Err(ParseError::UnknownKind(format!("keys match several kinds: {}", many.join(", ")))),
    }
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>, ParseError> {
    v.as_array()
        .ok_or_else(|| schema(format!("{what} must be an array of strings")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| schema(format!("{what} must be an array of strings")))
        })
        .collect()
}

fn names_of(obj: &Map<String, Value>) -> Result<Vec<String>, ParseError> {
    let names = string_list(obj.get("names").ok_or_else(|| schema("missing \"names\""))?, "\"names\"")?;
    unique_index(&names, "name")?;
    Ok(names)
}

fn unique_index(names: &[String], what: &str) -> Result<HashMap<String, usize>, ParseError> {
    let mut index = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() || n.contains(',') {
            return Err(schema(format!("{what} {n:?} must be nonempty and free of commas")));
        }
        if index.insert(n.clone(), i).is_some() {
            return Err(schema(format!("duplicate {what} {n:?}")));
        }
    }
    Ok(index)
}

fn key_members(key: &str, index: &HashMap<String, usize>) -> Result<Vec<usize>, ParseError> {
    if key.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in key.split(',') {
        let i = *index
            .get(part.trim())
            .ok_or_else(|| schema(format!("unknown name {:?} in {key:?}", part.trim())))?;
        if out.contains(&i) {
            return Err(schema(format!("repeated name in {key:?}")));
        }
        out.push(i);
    }
    Ok(out)
}

fn key_mask(key: &str, index: &HashMap<String, usize>) -> Result<u32, ParseError> {
    Ok(key_members(key, index)?.into_iter().fold(0, |m, i| m | 1 << i))
}

/// Reads an object keyed by subsets into a dense vector, requiring every
/// one of the `2^n` keys exactly once.
fn subset_table<T>(
    obj: &Map<String, Value>,
    n: usize,
    index: &HashMap<String, usize>,
    mut read: impl FnMut(&Value) -> Result<T, ParseError>,
) -> Result<Vec<T>, ParseError> {
    crate::explicit::check_n(n)?;
    let mut slots: Vec<Option<T>> = (0..1usize << n).map(|_| None).collect();
    for (k, v) in obj {
        let m = key_mask(k, index)? as usize;
        if slots[m].is_some() {
            return Err(schema(format!("subset {k:?} listed twice")));
        }
        slots[m] = Some(read(v)?);
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(m, s)| {
            s.ok_or_else(|| {
                schema(format!(
                    "missing subset key {:?}",
                    subset_key(&ConstraintSet::from_mask(n, m as u64), &index_names(index))
                ))
            })
        })
        .collect()
}

fn index_names(index: &HashMap<String, usize>) -> Vec<String> {
    let mut names = vec![String::new(); index.len()];
    for (k, &i) in index {
        names[i] = k.clone();
    }
    names
}

fn parse_explicit(obj: &Map<String, Value>) -> Result<Document, ParseError> {
    let names = names_of(obj)?;
    let index = unique_index(&names, "name")?;
    let viol = obj["violators"]
        .as_object()
        .ok_or_else(|| schema("\"violators\" must be an object"))?;
    let table = subset_table(viol, names.len(), &index, |v| {
        let members = string_list(v, "violator lists")?;
        key_mask(&members.join(","), &index)
    })?;
    let space = ExplicitViolatorSpace::new(names.len(), table)?;
    Ok(Document::Explicit { names, space })
}

fn parse_abstract(obj: &Map<String, Value>) -> Result<Document, ParseError> {
    let names = names_of(obj)?;
    let index = unique_index(&names, "name")?;
    let order = string_list(&obj["order"], "\"order\"")?;
    let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    if rank.len() != order.len() {
        return Err(schema("\"order\" repeats a token"));
    }
    let token = |v: &Value| -> Result<LpValue, ParseError> {
        let t = v.as_str().ok_or_else(|| schema("values must be strings"))?;
        if t == "+inf" {
            return Ok(LpValue::Infinity);
        }
        rank.get(t)
            .map(|&i| LpValue::Finite(i))
            .ok_or_else(|| schema(format!("value {t:?} is not listed in \"order\"")))
    };
    let n = names.len();
    let values = match &obj["values"] {
        Value::Object(m) => subset_table(m, n, &index, token)?,
        Value::Array(a) => a.iter().map(token).collect::<Result<_, _>>()?,
        _ => return Err(schema("\"values\" must be an object or array")),
    };
    let table = AbstractLpTable::new(n, order, values)?;
    Ok(Document::Abstract { names, table })
}

fn parse_concrete(obj: &Map<String, Value>) -> Result<Document, ParseError> {
    let names = names_of(obj)?;
    let points = string_list(&obj["points"], "\"points\"")?;
    let pindex = unique_index(&points, "point")?;
    let lists = obj["constraints"]
        .as_array()
        .ok_or_else(|| schema("\"constraints\" must be an array"))?;
    if lists.len() != names.len() {
        return Err(schema(format!(
            "{} constraints for {} names",
            lists.len(),
            names.len()
        )));
    }
    let constraints = lists
        .iter()
        .map(|l| {
            let members = string_list(l, "constraint lists")?;
            Ok(ConstraintSet::from_indices(points.len(), key_members(&members.join(","), &pindex)?))
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let problem = ConcreteLpProblem::new(points, constraints)?;
    Ok(Document::Concrete { names, problem })
}

fn parse_uso(obj: &Map<String, Value>) -> Result<Document, ParseError> {
    let blocks_raw = obj["blocks"]
        .as_array()
        .ok_or_else(|| schema("\"blocks\" must be an array of arrays"))?
        .iter()
        .map(|b| string_list(b, "blocks"))
        .collect::<Result<Vec<_>, _>>()?;
    let names = match obj.get("names") {
        Some(v) => string_list(v, "\"names\"")?,
        None => blocks_raw.iter().flatten().cloned().collect(),
    };
    let index = unique_index(&names, "name")?;
    let blocks = blocks_raw
        .iter()
        .map(|b| key_members(&b.join(","), &index))
        .collect::<Result<Vec<_>, _>>()?;
    let partition = GridPartition::new(names.len(), blocks, Some(names.clone()))?;
    let outmap = obj["outmap"]
        .as_object()
        .ok_or_else(|| schema("\"outmap\" must be an object"))?;
    let count = partition
        .vertex_count()
        .filter(|&c| c <= crate::grid_uso::DENSE_MAX_VERTICES)
        .ok_or_else(|| schema("grid too large for a dense outmap"))?;
    let mut slots: Vec<Option<ConstraintSet>> = vec![None; count];
    for (k, v) in outmap {
        let members = ConstraintSet::from_indices(names.len(), key_members(k, &index)?);
        let vertex = partition
            .as_vertex(&members)
            .ok_or_else(|| schema(format!("outmap key {k:?} is not a vertex")))?;
        let i = partition.vertex_index(&vertex);
        if slots[i].is_some() {
            return Err(schema(format!("vertex {k:?} listed twice")));
        }
        let out = string_list(v, "outmap lists")?;
        slots[i] = Some(ConstraintSet::from_indices(
            names.len(),
            key_members(&out.join(","), &index)?,
        ));
    }
    let outmaps = slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                let v = partition.vertex_at(i);
                schema(format!("missing outmap for vertex {:?}", vertex_key(&partition, &v)))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Document::Uso(GridUso::from_outmaps(partition, outmaps)?))
}

pub fn parse_csv(text: &str) -> Result<Document, ParseError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let is_coord = |c: &str| {
        matches!(c, "x" | "y" | "z" | "w")
            || (c.starts_with('x') && c.len() > 1 && c[1..].bytes().all(|b| b.is_ascii_digit()))
    };
    enum Kind {
        Halfplanes,
        Points,
    }
    let kind = match cols.as_slice() {
        ["name", "a", "b", "c"] => Kind::Halfplanes,
        ["name", rest @ ..] if !rest.is_empty() && rest.iter().all(|c| is_coord(c)) => Kind::Points,
        _ => {
            return Err(ParseError::UnknownKind(format!(
                "CSV header {:?} is neither name,a,b,c nor name,x,y,...",
                header.join(",")
            )))
        }
    };
    let mut names = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let name = rec.get(0).unwrap_or_default().to_string();
        let nums = rec
            .iter()
            .skip(1)
            .map(|f| Rational::parse_scalar(f).map_err(|e| ParseError::Line { line, msg: e.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        names.push(name);
        rows.push(nums);
    }
    unique_index(&names, "name")?;
    Ok(match kind {
        Kind::Halfplanes => {
            let hp = rows
                .into_iter()
                .map(|r| {
                    let [a, b, c]: [Rational; 3] = r.try_into().expect("three fields");
                    [a, b, c]
                })
                .collect();
            Document::Halfplanes(HalfplaneLp::new(hp, Some(names), ImplicitRegion::Orthant)?)
        }
        Kind::Points => Document::Points(PointSet::new(rows, Some(names))?),
    })
}

/// Member names in constraint order, comma-joined.
pub fn subset_key<S: AsRef<str>>(g: &ConstraintSet, names: &[S]) -> String {
    g.display_with(names, ",").to_string()
}

fn name_list<S: AsRef<str>>(g: &ConstraintSet, names: &[S]) -> Value {
    Value::Array(g.iter().map(|h| Value::String(names[h].as_ref().to_string())).collect())
}

/// Sorted member names of a vertex, comma-joined.
pub fn vertex_key(p: &GridPartition, v: &[usize]) -> String {
    let mut members: Vec<&str> = v.iter().map(|&h| p.names()[h].as_str()).collect();
    members.sort_unstable();
    members.join(",")
}

pub fn explicit_to_json<S: AsRef<str>>(names: &[S], space: &ExplicitViolatorSpace) -> Value {
    let n = space.n();
    let viol: BTreeMap<String, Value> = (0..1u32 << n)
        .map(|m| {
            let g = space.set(m);
            (subset_key(&g, names), name_list(&space.violators_of(&g), names))
        })
        .collect();
    json!({
        "names": names.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
        "violators": viol,
    })
}

pub fn abstract_to_json<S: AsRef<str>>(names: &[S], table: &AbstractLpTable) -> Value {
    let n = table.n();
    let values: BTreeMap<String, Value> = (0..1u32 << n)
        .map(|m| {
            let g = ConstraintSet::from_mask(n, m as u64);
            (subset_key(&g, names), Value::String(table.token(table.w(m)).to_string()))
        })
        .collect();
    json!({
        "names": names.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
        "order": table.order(),
        "values": values,
    })
}

pub fn concrete_to_json<S: AsRef<str>>(names: &[S], problem: &ConcreteLpProblem) -> Value {
    json!({
        "names": names.iter().map(|s| s.as_ref()).collect::<Vec<_>>(),
        "points": problem.points(),
        "constraints": problem
            .constraints()
            .iter()
            .map(|c| name_list(c, problem.points()))
            .collect::<Vec<_>>(),
    })
}

/// Dense export; only for grids small enough to list every vertex.
pub fn uso_to_json(u: &GridUso) -> Value {
    let p = u.partition();
    let names = p.names();
    let outmap: BTreeMap<String, Value> = u
        .outmaps()
        .iter()
        .enumerate()
        .map(|(i, s)| (vertex_key(p, &p.vertex_at(i)), name_list(s, names)))
        .collect();
    json!({
        "names": names,
        "blocks": p
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&h| names[h].clone()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "outmap": outmap,
    })
}
