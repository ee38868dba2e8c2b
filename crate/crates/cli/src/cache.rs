//! On-disk cache of enumerated element lists, keyed by field and generators.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scg_core::group::StabilizerChain;
use scg_core::search::ElementTable;
use scg_core::Matrix;

use crate::document::FieldSpec;
use crate::CliError;

pub const CACHE_ENV: &str = "SCG_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct CachedElements {
    field: FieldSpec,
    dim: usize,
    generators: Vec<Vec<u32>>,
    order: u128,
    elements: Vec<Vec<u32>>,
}

fn cache_path(field: &FieldSpec, gens: &[Vec<u32>]) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let key = serde_json::to_vec(&(field, gens)).expect("serializable");
    let hash: String = Sha256::digest(&key)[..8].iter().map(|b| format!("{b:02x}")).collect();
    Some(PathBuf::from(dir).join(format!("elements-q{}-{hash}.json", field.p.pow(field.e))))
}

/// The element table of the chain's group, read from or written to the
/// cache directory when `SCG_CACHE_DIR` is set. A cache entry is used only
/// if its generators, field and order match.
pub fn element_table(chain: &StabilizerChain, cap: u128) -> Result<ElementTable, CliError> {
    let field = chain.field();
    let spec = FieldSpec::of(field);
    let gens: Vec<Vec<u32>> = chain.generators().iter().map(Matrix::to_codes).collect();
    let path = cache_path(&spec, &gens);
    if let Some(path) = &path {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(c) = serde_json::from_str::<CachedElements>(&text) {
                if c.field == spec && c.generators == gens && c.order == chain.order() {
                    let elements = c
                        .elements
                        .iter()
                        .map(|codes| Matrix::from_codes(field, c.dim, codes))
                        .collect::<Result<Vec<_>, _>>()?;
                    return Ok(ElementTable::from_elements(Arc::clone(field), elements));
                }
            }
        }
    }
    let table = ElementTable::from_chain(chain, cap)?;
    if let Some(path) = path {
        let entry = CachedElements {
            field: spec,
            dim: chain.dim(),
            generators: gens,
            order: chain.order(),
            elements: table.elements().iter().map(Matrix::to_codes).collect(),
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, serde_json::to_vec(&entry).expect("serializable"))?;
    }
    Ok(table)
}
