use std::fmt::Write as _;

use super::event::{EventKind, Nanos};
use crate::topology::NodeId;

/// One processed event. Rendered as
/// `<seconds, 9 decimals> <kind> <node id> <packet uid> [detail]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub time: Nanos,
    pub kind: EventKind,
    pub node: NodeId,
    pub uid: u64,
    pub detail: String,
}

impl std::fmt::Display for TraceLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}.{:09} {} {} {}",
            self.time / 1_000_000_000,
            self.time % 1_000_000_000,
            self.kind.label(),
            self.node,
            self.uid
        )?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

pub(crate) fn render(lines: &[TraceLine]) -> String {
    let mut out = String::new();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out
}
