//! Reading input files into solvable instances.

use std::path::Path;

use thiserror::Error;
use vspace::explicit::ExplicitError;
use vspace::grid_uso::UsoError;
use vspace::instances::InstanceError;
use vspace::io::{parse_document, Document, ParseError};
use vspace::{ExactHalfplaneLp, ExactPointSet, ExplicitViolatorSpace, GridUso};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Witness(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Solve(String),
    #[error("{0}")]
    Size(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Witness(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Size(_) => 4,
        }
    }
}

pub fn is_size_guard(e: &ParseError) -> bool {
    matches!(
        e,
        ParseError::Explicit(ExplicitError::TooLarge(_))
            | ParseError::Instance(InstanceError::TooLarge { .. } | InstanceError::DimensionTooLarge(_))
            | ParseError::Uso(UsoError::TooLarge { .. })
    )
}

pub fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        if is_size_guard(&e) {
            CliError::Size(msg)
        } else {
            CliError::Parse(msg)
        }
    })
}

/// An instance ready to be wrapped in an oracle.
pub enum Instance {
    Explicit(ExplicitViolatorSpace),
    Points(ExactPointSet),
    Halfplanes(ExactHalfplaneLp),
    Uso(GridUso),
}

pub struct Loaded {
    pub kind: &'static str,
    pub names: Vec<String>,
    pub instance: Instance,
}

/// Abstract and concrete tables become explicit violator spaces; grid
/// orientations must validate.
pub fn load(doc: Document) -> Result<Loaded, CliError> {
    let kind = doc.kind();
    let names = doc.names().to_vec();
    let instance = match doc {
        Document::Explicit { space, .. } => Instance::Explicit(space),
        Document::Abstract { table, .. } => {
            let table = table
                .validate()
                .map_err(|w| CliError::Witness(format!("abstract table is not LP-type: {}", crate::commands::witness_text(&w, &names))))?;
            Instance::Explicit(table.violator_map().map_err(explicit_error)?)
        }
        Document::Concrete { problem, .. } => {
            let table = problem.to_abstract().map_err(explicit_error)?;
            Instance::Explicit(table.violator_map().map_err(explicit_error)?)
        }
        Document::Points(p) => Instance::Points(p),
        Document::Halfplanes(l) => Instance::Halfplanes(l),
        Document::Uso(u) => Instance::Uso(validated(u)?),
    };
    Ok(Loaded {
        kind,
        names,
        instance,
    })
}

pub fn validated(u: GridUso) -> Result<GridUso, CliError> {
    let names = u.partition().names().to_vec();
    match u.validate() {
        Ok(Ok(u)) => Ok(u),
        Ok(Err(w)) => Err(CliError::Witness(format!(
            "not a unique sink orientation: {}",
            crate::commands::uso_witness_text(&w, &names)
        ))),
        Err(e) => Err(CliError::Size(e.to_string())),
    }
}

pub fn explicit_error(e: ExplicitError) -> CliError {
    match e {
        ExplicitError::TooLarge(_) => CliError::Size(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    }
}
