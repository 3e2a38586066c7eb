//! Batch front-end for extraction, validation, coverage checking,
//! statistics and graph export.
//!
//! Exit codes: 0 means ok/valid, 1 means violations or uncovered services
//! were found, 2 means a usage, IO or parse error. Standard output carries
//! machine-readable JSON (except the stats table); human diagnostics go to
//! standard error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use purposegraph_core::extractor::{
    self, build_call_graph, index, ExtractionResult, GenDefaults,
};
use purposegraph_core::lpl::{self, LayeredPrivacyPolicy, StrengthRegistry};
use purposegraph_core::minisvc;
use purposegraph_core::service;
use purposegraph_core::validator;

const DEFAULTS_ENV: &str = "PURPOSEGRAPH_DEFAULTS";

#[derive(Parser)]
#[command(name = "purposegraph", version, about = "Purpose extraction and policy validation for annotated service code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a purpose tree and service model from a source directory
    Extract {
        /// Directory containing .msvc source files
        src_dir: PathBuf,
        /// Output file for the extraction result JSON
        #[arg(long)]
        out: PathBuf,
        /// Also write a DOT rendering of the purpose graph
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Defaults config (JSON); falls back to $PURPOSEGRAPH_DEFAULTS
        #[arg(long)]
        defaults: Option<PathBuf>,
    },
    /// Validate a policy against the composition constraints
    Validate {
        /// Policy JSON file (or an extraction result wrapping one)
        policy: PathBuf,
        /// Also apply retention and privacy-model rules to inheritance edges
        #[arg(long)]
        strict_inheritance: bool,
        /// Ignore unknown JSON keys when parsing
        #[arg(long)]
        lenient: bool,
    },
    /// Check that governed purposes cover the services' personal data
    Coverage {
        /// Policy JSON file (or an extraction result wrapping one)
        policy: PathBuf,
        /// Service model JSON file
        services: PathBuf,
    },
    /// Summarize an extraction result
    Stats {
        /// Extraction result JSON file
        result: PathBuf,
        /// Emit JSON instead of the table
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Extract { src_dir, out, dot, defaults } => {
            cmd_extract(&src_dir, &out, dot.as_deref(), defaults.as_deref())
        }
        Command::Validate { policy, strict_inheritance, lenient } => {
            cmd_validate(&policy, strict_inheritance, lenient)
        }
        Command::Coverage { policy, services } => cmd_coverage(&policy, &services),
        Command::Stats { result, json } => cmd_stats(&result, json),
    };
    ExitCode::from(code)
}

fn fail(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    2
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), u8> {
    fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn cmd_extract(
    src_dir: &Path,
    out: &Path,
    dot: Option<&Path>,
    defaults_path: Option<&Path>,
) -> u8 {
    let defaults = match load_defaults(defaults_path) {
        Ok(d) => d,
        Err(code) => return code,
    };

    let mut files: Vec<PathBuf> = match fs::read_dir(src_dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "msvc"))
            .collect(),
        Err(e) => return fail(format!("{}: {e}", src_dir.display())),
    };
    files.sort();

    let mut units = Vec::new();
    for path in &files {
        let text = match read(path) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let display = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        match minisvc::parse_source(&text, &display) {
            Ok(unit) => units.push(unit),
            Err(e) => return fail(format!("{display}:{e}")),
        }
    }

    let table = match index(&units) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let graph = build_call_graph(&table);
    let corpus_name = src_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    let result = extractor::generate(&table, &graph, &corpus_name, &defaults);

    if let Err(code) = write(out, &extractor::serialize_extraction_result(&result)) {
        return code;
    }
    let mut warnings_text = String::new();
    for warning in &result.warnings {
        warnings_text.push_str(&warning.to_string());
        warnings_text.push('\n');
    }
    let warnings_path = PathBuf::from(format!("{}.warnings.txt", out.display()));
    if let Err(code) = write(&warnings_path, &warnings_text) {
        return code;
    }
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(dot_path) = dot {
        if let Err(code) = write(dot_path, &render_dot(&result.policy)) {
            return code;
        }
    }
    0
}

fn load_defaults(flag: Option<&Path>) -> Result<GenDefaults, u8> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(DEFAULTS_ENV).map(PathBuf::from),
    };
    match path {
        None => Ok(GenDefaults::default()),
        Some(path) => {
            let text = read(&path)?;
            GenDefaults::from_json(&text)
                .map_err(|e| fail(format!("{}: {e}", path.display())))
        }
    }
}

/// Purpose graph in DOT: composition edges solid, inheritance dashed,
/// nodes labeled with their id and data set.
fn render_dot(policy: &LayeredPrivacyPolicy) -> String {
    let mut out = String::from("digraph purposes {\n");
    for purpose in policy.purposes.values() {
        let data: Vec<String> = purpose.data.iter().map(|d| d.qualified_name()).collect();
        out.push_str(&format!(
            "    \"{}\" [label=\"{}\\n{{{}}}\"];\n",
            purpose.id,
            purpose.id,
            data.join(", ")
        ));
    }
    for edge in &policy.composition {
        out.push_str(&format!("    \"{}\" -> \"{}\";\n", edge.parent, edge.child));
    }
    for edge in &policy.hierarchy {
        out.push_str(&format!(
            "    \"{}\" -> \"{}\" [style=dashed];\n",
            edge.parent, edge.child
        ));
    }
    out.push_str("}\n");
    out
}

/// Reads a policy file, accepting either a bare policy document or an
/// extraction result that wraps one under a "policy" key.
fn load_policy(path: &Path, lenient: bool) -> Result<LayeredPrivacyPolicy, u8> {
    let text = read(path)?;
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(inner) = value.as_object().and_then(|o| o.get("policy")) {
            return lpl::parse_policy(&inner.to_string(), lenient)
                .map_err(|e| fail(format!("{}: {e}", path.display())));
        }
    }
    lpl::parse_policy(&text, lenient).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn cmd_validate(policy_path: &Path, strict_inheritance: bool, lenient: bool) -> u8 {
    let policy = match load_policy(policy_path, lenient) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let registry = StrengthRegistry::default();
    let report = validator::validate(&policy, &registry, strict_inheritance);
    let mut text = serde_json::to_string_pretty(&report).expect("report serialize");
    text.push('\n');
    print!("{text}");
    if report.is_valid {
        0
    } else {
        1
    }
}

fn cmd_coverage(policy_path: &Path, services_path: &Path) -> u8 {
    let policy = match load_policy(policy_path, false) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let services_text = match read(services_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let model = match service::parse_service_model(&services_text) {
        Ok(m) => m,
        Err(e) => return fail(format!("{}: {e}", services_path.display())),
    };
    let report = match service::check_coverage(&policy, &model) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serialize");
    text.push('\n');
    print!("{text}");
    if report.all_covered && report.all_governed {
        0
    } else {
        1
    }
}

fn cmd_stats(result_path: &Path, json: bool) -> u8 {
    let text = match read(result_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let result = match extractor::parse_extraction_result(&text) {
        Ok(r) => r,
        Err(e) => return fail(format!("{}: {e}", result_path.display())),
    };
    let summary = Summary::of(&result);
    if json {
        let mut out =
            serde_json::to_string_pretty(&summary.json_value()).expect("summary serialize");
        out.push('\n');
        print!("{out}");
    } else {
        print!("{}", summary.table());
    }
    0
}

struct Summary {
    stats: extractor::Stats,
    n_purposes: usize,
    n_services: usize,
    breadth: usize,
}

impl Summary {
    fn of(result: &ExtractionResult) -> Self {
        let mut out_degree: BTreeMap<&str, usize> = BTreeMap::new();
        for edge in &result.policy.composition {
            *out_degree.entry(edge.parent.as_str()).or_default() += 1;
        }
        Summary {
            stats: result.stats.clone(),
            n_purposes: result.policy.purposes.len(),
            n_services: result.model.services.len(),
            breadth: out_degree.values().copied().max().unwrap_or(0),
        }
    }

    fn ratio(&self) -> Option<f64> {
        if self.n_services == 0 {
            None
        } else {
            Some(self.n_purposes as f64 / self.n_services as f64)
        }
    }

    fn table(&self) -> String {
        let s = &self.stats;
        let mut out = String::new();
        out.push_str(&format!("controllers: {}\n", s.n_controllers));
        out.push_str(&format!(
            "endpoints: total {}, range [{}, {}], mean {:.1}\n",
            s.n_endpoints,
            s.endpoints_per_controller.min,
            s.endpoints_per_controller.max,
            s.endpoints_per_controller.mean
        ));
        out.push_str(&format!(
            "controllers with personal data: {}\n",
            s.n_controllers_with_pd
        ));
        out.push_str(&format!(
            "endpoints under them: total {}, range [{}, {}], mean {:.1}\n",
            s.n_endpoints_under_them,
            s.filtered_endpoints_per_controller.min,
            s.filtered_endpoints_per_controller.max,
            s.filtered_endpoints_per_controller.mean
        ));
        out.push_str(&format!("entity types: {}\n", s.n_entity_types));
        out.push_str(&format!("purposes: {}\n", self.n_purposes));
        out.push_str(&format!("services: {}\n", self.n_services));
        out.push_str(&format!("composition breadth: {}\n", self.breadth));
        match self.ratio() {
            None => out.push_str("transparency ratio: n/a\n"),
            Some(r) => {
                out.push_str(&format!("transparency ratio: {r:.1}\n"));
                if r <= 1.0 {
                    out.push_str("flag: transparency ratio is not above 1\n");
                }
            }
        }
        out
    }

    fn json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "stats": serde_json::to_value(&self.stats).expect("stats serialize"),
            "purposes": self.n_purposes,
            "services": self.n_services,
            "breadth": self.breadth,
            "transparencyRatio": self.ratio(),
            "ratioFlag": self.ratio().is_some_and(|r| r <= 1.0),
        })
    }
}
