//! Typed file schemas. Every document carries a schema version and encodes
//! rationals as canonical `"p/q"` strings, so artifacts round-trip
//! bit-exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use liplab_core::adversary::AdversaryPrefix;
use liplab_core::cube::{CubePoint, SheetSpec};
use liplab_core::enumeration::RationalEnumeration;
use liplab_core::gaps::{GammaSequence, Gap, GapStructure};
use liplab_core::glued::{GluedPoint, GluedSpace};
use liplab_core::rational::Rat;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("cannot parse {}: {e}", path.display())))
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Parse(format!("cannot create {}: {e}", dir.display())))?;
    }
    let tmp = path.with_extension("tmp-liplab");
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Parse(format!("cannot move into {}: {e}", path.display())))?;
    Ok(())
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn check_schema(version: u32, what: &str) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Parse(format!(
            "{what}: unsupported schema version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Gap-length sequence: explicit terms with a certified tail, or a geometric
/// shorthand whose tail bound is computed in closed form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Geometric {
        eps0: Rat,
        geometric: GeometricSpec,
    },
    Explicit {
        eps0: Rat,
        terms: Vec<Rat>,
        tail_bound: Rat,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometricSpec {
    pub first: Rat,
    pub ratio: Rat,
    pub count: usize,
}

impl GammaSpec {
    pub fn build(&self, enumeration: RationalEnumeration) -> Result<GammaSequence, CliError> {
        match self {
            GammaSpec::Geometric { eps0, geometric } => GammaSequence::geometric(
                eps0.clone(),
                geometric.first.clone(),
                geometric.ratio.clone(),
                geometric.count,
                enumeration,
            )
            .map_err(|e| CliError::Guard(e.to_string())),
            GammaSpec::Explicit {
                eps0,
                terms,
                tail_bound,
            } => GammaSequence::new(eps0.clone(), terms.clone(), tail_bound.clone(), enumeration)
                .map_err(|e| CliError::Guard(e.to_string())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub spec: GammaSpec,
}

/// Serialized gap structure; the fields named by the external interface.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GapStructureDoc {
    pub schema_version: u32,
    pub eps0: Rat,
    pub gamma_terms: Vec<Rat>,
    pub tail_bound: Rat,
    pub enumeration: RationalEnumeration,
    pub depth: usize,
    /// `[left, length, source_index]` per placed gap, ordered by left.
    pub gaps: Vec<(Rat, Rat, usize)>,
    /// `[source_index, enumeration_index]` for gaps placed by the inductive
    /// rule.
    pub enum_indices: Vec<(usize, u64)>,
    pub empty_sources: Vec<usize>,
}

impl GapStructureDoc {
    pub fn from_structure(gs: &GapStructure) -> Self {
        GapStructureDoc {
            schema_version: SCHEMA_VERSION,
            eps0: gs.gamma.eps0().clone(),
            gamma_terms: gs.gamma.terms().to_vec(),
            tail_bound: gs.gamma.tail_bound().clone(),
            enumeration: gs.enumeration,
            depth: gs.depth,
            gaps: gs
                .gaps
                .iter()
                .map(|g| (g.left.clone(), g.length.clone(), g.source_index))
                .collect(),
            enum_indices: gs
                .gaps
                .iter()
                .filter_map(|g| g.enum_index.map(|n| (g.source_index, n)))
                .collect(),
            empty_sources: gs.empty_sources.clone(),
        }
    }

    pub fn into_structure(self) -> Result<GapStructure, CliError> {
        check_schema(self.schema_version, "gap structure")?;
        let gamma = GammaSequence::new(
            self.eps0,
            self.gamma_terms,
            self.tail_bound,
            self.enumeration,
        )
        .map_err(|e| CliError::Guard(e.to_string()))?;
        let enum_map: BTreeMap<usize, u64> = self.enum_indices.into_iter().collect();
        let gaps: Vec<Gap> = self
            .gaps
            .into_iter()
            .map(|(left, length, source_index)| Gap {
                source_index,
                enum_index: enum_map.get(&source_index).copied(),
                left,
                length,
            })
            .collect();
        let gs = GapStructure {
            gamma,
            enumeration: self.enumeration,
            depth: self.depth,
            gaps,
            empty_sources: self.empty_sources,
        };
        gs.validate().map_err(|e| CliError::Guard(e.to_string()))?;
        Ok(gs)
    }
}

pub fn load_gap_structure(path: &Path) -> Result<GapStructure, CliError> {
    read_json::<GapStructureDoc>(path)?.into_structure()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub schema_version: u32,
    pub members: Vec<GammaSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrefixFile {
    pub schema_version: u32,
    pub enumeration: RationalEnumeration,
    pub prefix: AdversaryPrefix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedSpaceFile {
    pub schema_version: u32,
    pub sheets: BTreeMap<String, GapStructureDoc>,
}

impl GluedSpaceFile {
    pub fn into_space(self) -> Result<GluedSpace, CliError> {
        check_schema(self.schema_version, "glued space")?;
        let mut sheets = BTreeMap::new();
        for (id, doc) in self.sheets {
            sheets.insert(id, doc.into_structure()?);
        }
        GluedSpace::new(sheets).map_err(|e| CliError::Guard(e.to_string()))
    }

    pub fn from_space(space: &GluedSpace) -> Self {
        GluedSpaceFile {
            schema_version: SCHEMA_VERSION,
            sheets: space
                .sheets
                .iter()
                .map(|(id, gs)| (id.clone(), GapStructureDoc::from_structure(gs)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseTableFile {
    pub schema_version: u32,
    pub table: Vec<CollapseEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseEntry {
    pub x: Rat,
    pub image: GluedPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubeFamilyFile {
    pub schema_version: u32,
    /// Sheets in diagonal order: index beta names sheet and coordinate.
    pub sheets: Vec<(String, SheetSpec)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub schema_version: u32,
    pub witness: liplab_core::cube::DefeatWitness,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RetractionTableFile {
    pub schema_version: u32,
    pub table: Vec<RetractionEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RetractionEntry {
    pub point: CubePoint,
    pub image: CubePoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainLevelsFile {
    pub schema_version: u32,
    pub f_chain: Vec<Vec<String>>,
    pub eps_chain: Vec<Rat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetResultDoc {
    pub schema_version: u32,
    pub ids: Vec<String>,
    pub net: liplab_core::extension::NetResult,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainDoc {
    pub schema_version: u32,
    pub ids: Vec<String>,
    pub chain: liplab_core::extension::SeparatedChain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub schema_version: u32,
    pub ids: Vec<String>,
    pub operator: liplab_core::extension::ExtensionOperator,
}

#[cfg(test)]
mod tests {
    use super::*;
    use liplab_core::rational::rat;

    fn doc() -> GapStructureDoc {
        GapStructureDoc {
            schema_version: SCHEMA_VERSION,
            eps0: rat("1/4"),
            gamma_terms: vec![rat("1/4"), rat("1/8")],
            tail_bound: rat("0"),
            enumeration: RationalEnumeration::default(),
            depth: 2,
            gaps: vec![(rat("0"), rat("1/4"), 1), (rat("1/2"), rat("1/8"), 2)],
            enum_indices: vec![(1, 1), (2, 3)],
            empty_sources: vec![],
        }
    }

    #[test]
    fn structure_docs_validate_on_load() {
        assert!(doc().into_structure().is_ok());

        let mut stale = doc();
        stale.schema_version = 99;
        assert!(stale.into_structure().is_err());

        let mut overlapping = doc();
        overlapping.gaps = vec![(rat("0"), rat("1/4"), 1), (rat("1/8"), rat("1/8"), 2)];
        assert!(overlapping.into_structure().is_err());

        let mut bad_gamma = doc();
        bad_gamma.gamma_terms = vec![rat("1/8"), rat("1/4")];
        assert!(bad_gamma.into_structure().is_err());
    }
}
