//! Static analysis over a parsed MiniSvc corpus: symbol indexing, call
//! graph construction, personal-data reachability per entry-point, and
//! generation of the composed-purpose tree, gov mapping and web service
//! model.

mod callgraph;
mod generate;
mod reach;
mod symbols;

pub use callgraph::{build_call_graph, CallGraph, NodeId, Warning};
pub use generate::{
    extraction_result_value, generate, parse_extraction_result, serialize_extraction_result,
    ExtractionResult, GenDefaults, MinMaxMean, Stats,
};
pub use reach::{reachable_data, reachable_data_all, ReachError};
pub use symbols::{index, ClassEntry, ControllerInfo, IndexError, InterfaceInfo, SymbolTable};
