//! Graph grammars on primitive elastic graphs and the greedy principal
//! tree construction built on them.

mod ops;
mod tree;

pub use ops::{apply, apply_embedded, enumerate_candidates, Grammar, GrammarOp, OpKind};
pub use tree::{geometric_complexity, grow_tree, ConstructionLog, GrammarSequence, LogEntry, TreeConfig, TreeFit};
