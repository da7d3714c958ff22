//! The Hamiltonian cycle programs shipped with the crate.

use crate::ast::{DefModule, ModularProgram};
use crate::error::Result;
use crate::parser::{parse_instance, parse_program};

pub const HC: &str = include_str!("../corpus/hc.masp");
pub const HC_ALT: &str = include_str!("../corpus/hc_alt.masp");
pub const HC_SUB: &str = include_str!("../corpus/hc_sub.masp");
pub const HC_SUB_ALT: &str = include_str!("../corpus/hc_sub_alt.masp");
pub const G1: &str = include_str!("../corpus/g1.facts");
pub const CTX_VERTEX_A: &str = include_str!("../corpus/ctx_vertex_a.masp");

/// Every corpus file by name.
pub const FILES: &[(&str, &str)] = &[
    ("hc.masp", HC),
    ("hc_alt.masp", HC_ALT),
    ("hc_sub.masp", HC_SUB),
    ("hc_sub_alt.masp", HC_SUB_ALT),
    ("g1.facts", G1),
    ("ctx_vertex_a.masp", CTX_VERTEX_A),
];

pub fn program(src: &str) -> Result<ModularProgram> {
    Ok(parse_program(src)?.0)
}

pub fn hc() -> ModularProgram {
    program(HC).expect("corpus program parses")
}

pub fn hc_alt() -> ModularProgram {
    program(HC_ALT).expect("corpus program parses")
}

pub fn g1() -> DefModule {
    parse_instance(G1).expect("corpus instance parses")
}

/// Edge facts for a graph given as pairs of constant names.
pub fn edge_facts<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    edges.into_iter().map(|(a, b)| format!("edge({a},{b}).\n")).collect()
}
