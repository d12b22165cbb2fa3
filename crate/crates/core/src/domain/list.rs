use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Instance, Label};
use crate::error::{Error, Result};

/// Identity of a list function, e.g. `"hint"` or `"phase-3"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ListId(pub String);

impl ListId {
    pub fn new(s: impl Into<String>) -> Self {
        ListId(s.into())
    }
}

impl fmt::Display for ListId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Rule that produces a list for instances not held in a table.
pub trait ListRule: Send + Sync {
    fn list(&self, x: &Instance) -> Vec<Label>;
}

#[derive(Clone)]
pub enum ListKind {
    /// Every label of an alphabet of the given size.
    Universal { alphabet: usize },
    /// Stored lists; instances outside the table map to the empty list.
    Explicit(HashMap<Instance, Vec<Label>>),
    /// Stored lists for known instances, a rule for everything else.
    Composed {
        cached: HashMap<Instance, Vec<Label>>,
        rule: Arc<dyn ListRule>,
    },
}

/// A hint `μ : X → Y^k`: ordered, duplicate-free label lists of length at
/// most `declared_size`.
#[derive(Clone)]
pub struct ListFunction {
    id: ListId,
    declared_size: usize,
    kind: ListKind,
}

impl fmt::Debug for ListFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ListKind::Universal { alphabet } => format!("universal({alphabet})"),
            ListKind::Explicit(t) => format!("explicit({} entries)", t.len()),
            ListKind::Composed { cached, .. } => format!("composed({} cached)", cached.len()),
        };
        f.debug_struct("ListFunction")
            .field("id", &self.id)
            .field("declared_size", &self.declared_size)
            .field("kind", &kind)
            .finish()
    }
}

fn check_list(x: &Instance, list: &[Label], k: usize) -> Result<()> {
    if list.len() > k {
        return Err(Error::InvalidList(format!(
            "list for {x} has {} labels, declared size {k}",
            list.len()
        )));
    }
    for (i, l) in list.iter().enumerate() {
        if list[..i].contains(l) {
            return Err(Error::InvalidList(format!("duplicate label {l} for {x}")));
        }
    }
    Ok(())
}

/// Removes repeated labels keeping first occurrences.
pub(crate) fn dedup_ordered(labels: impl IntoIterator<Item = Label>) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::new();
    for l in labels {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

impl ListFunction {
    pub fn universal(alphabet: usize) -> Self {
        ListFunction {
            id: ListId::new("universal"),
            declared_size: alphabet,
            kind: ListKind::Universal { alphabet },
        }
    }

    pub fn explicit(id: ListId, declared_size: usize, table: HashMap<Instance, Vec<Label>>) -> Result<Self> {
        for (x, list) in &table {
            check_list(x, list, declared_size)?;
        }
        Ok(ListFunction {
            id,
            declared_size,
            kind: ListKind::Explicit(table),
        })
    }

    pub fn composed(
        id: ListId,
        declared_size: usize,
        cached: HashMap<Instance, Vec<Label>>,
        rule: Arc<dyn ListRule>,
    ) -> Result<Self> {
        for (x, list) in &cached {
            check_list(x, list, declared_size)?;
        }
        Ok(ListFunction {
            id,
            declared_size,
            kind: ListKind::Composed { cached, rule },
        })
    }

    pub fn id(&self) -> &ListId {
        &self.id
    }

    pub fn declared_size(&self) -> usize {
        self.declared_size
    }

    pub fn kind(&self) -> &ListKind {
        &self.kind
    }

    pub fn is_universal(&self) -> bool {
        matches!(self.kind, ListKind::Universal { .. })
    }

    /// The list for `x`. Rule output is deduplicated and cut to the declared
    /// size, so the result always honors the list invariants.
    pub fn lookup(&self, x: &Instance) -> Cow<'_, [Label]> {
        match &self.kind {
            ListKind::Universal { alphabet } => Cow::Owned((0..*alphabet).map(Label::from_index).collect()),
            ListKind::Explicit(t) => t
                .get(x)
                .map(|v| Cow::Borrowed(v.as_slice()))
                .unwrap_or(Cow::Borrowed(&[])),
            ListKind::Composed { cached, rule } => match cached.get(x) {
                Some(v) => Cow::Borrowed(v.as_slice()),
                None => {
                    let mut v = dedup_ordered(rule.list(x));
                    v.truncate(self.declared_size);
                    Cow::Owned(v)
                }
            },
        }
    }

    pub fn contains(&self, x: &Instance, y: Label) -> bool {
        match &self.kind {
            ListKind::Universal { alphabet } => y.index() < *alphabet,
            _ => self.lookup(x).contains(&y),
        }
    }

    /// Checks every stored list against the invariants.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ListKind::Universal { .. } => Ok(()),
            ListKind::Explicit(t) | ListKind::Composed { cached: t, .. } => {
                t.iter().try_for_each(|(x, l)| check_list(x, l, self.declared_size))
            }
        }
    }
}
