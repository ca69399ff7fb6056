//! JSON documents for families, subobjects, sections and antitone maps.
//! Contexts are referred to by their index in the family listing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::{Context, ContextFamily};
use crate::matrix::ComplexMatrix;
use crate::measure::{AntitoneFunction, CPGlobalSection};
use crate::spectrum::GlobalSection;
use crate::subobject::ClopenSubobject;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ContextDoc {
    pub id: String,
    pub ranks: Vec<usize>,
    pub blocks: Vec<ComplexMatrix>,
}

impl From<&Context> for ContextDoc {
    fn from(c: &Context) -> Self {
        Self { id: c.id().short(), ranks: c.ranks(), blocks: c.blocks().iter().map(|b| b.matrix().clone()).collect() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FamilyDoc {
    pub dimension: usize,
    pub contexts: Vec<ContextDoc>,
    /// Strict inclusions `[coarse, fine]`.
    pub order: Vec<[usize; 2]>,
}

impl From<&ContextFamily> for FamilyDoc {
    fn from(f: &ContextFamily) -> Self {
        Self {
            dimension: f.dim(),
            contexts: f.contexts().iter().map(ContextDoc::from).collect(),
            order: f.strict_pairs().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

/// `"top"`, `"bottom"`, or selected blocks per context.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SubobjectDoc {
    Named(String),
    Components(BTreeMap<usize, Vec<usize>>),
}

impl From<&ClopenSubobject> for SubobjectDoc {
    fn from(s: &ClopenSubobject) -> Self {
        if s.is_top() {
            Self::Named("top".into())
        } else if s.is_bottom() {
            Self::Named("bottom".into())
        } else {
            Self::Components(s.components().iter().enumerate().map(|(i, b)| (i, b.iter().collect())).collect())
        }
    }
}

pub type SectionDoc = BTreeMap<usize, Vec<f64>>;

pub fn section_doc(m: &CPGlobalSection) -> SectionDoc {
    m.values().iter().cloned().enumerate().collect()
}

pub type AntitoneDoc = BTreeMap<usize, f64>;

pub fn antitone_doc(f: &AntitoneFunction) -> AntitoneDoc {
    f.values().iter().copied().enumerate().collect()
}

/// Chosen block per context.
pub fn global_section_doc(s: &GlobalSection) -> BTreeMap<usize, usize> {
    s.assignment().iter().copied().enumerate().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{close_family, diag_context};
    use std::sync::Arc;

    #[test]
    fn family_doc_round_trips() {
        let f = close_family(&[
            diag_context(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap(),
            diag_context(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]]).unwrap(),
        ])
        .unwrap();
        let doc = FamilyDoc::from(&f);
        assert_eq!(doc.order.len(), 1);
        let text = serde_json::to_string(&doc).unwrap();
        let back: FamilyDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn subobject_short_forms() {
        let f = Arc::new(close_family(&[diag_context(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap()]).unwrap());
        assert_eq!(serde_json::to_string(&SubobjectDoc::from(&ClopenSubobject::top(Arc::clone(&f)))).unwrap(), "\"top\"");
        assert_eq!(serde_json::to_string(&SubobjectDoc::from(&ClopenSubobject::bottom(f))).unwrap(), "\"bottom\"");
    }
}
