use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Command;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CommandSpec {
    pub command: Command,
    pub summary: &'static str,
    pub operations: &'static [&'static str],
    pub params: &'static [ParamSpec],
}

const fn req(name: &'static str, kind: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: true,
        default: None,
        doc,
    }
}

const fn opt(name: &'static str, kind: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: false,
        default: Some(default),
        doc,
    }
}

const fn maybe(name: &'static str, kind: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: false,
        default: None,
        doc,
    }
}

const LAYOUT: ParamSpec = req(
    "layout",
    "object",
    "{N, r, A_C, m?, register_blocks?} or a serialized layout tree",
);
const BASE_RULE: ParamSpec = opt("base_rule", "string", "lemma2_product", "lemma2_product | cluster_lemma");
const ETA: ParamSpec = maybe("eta", "number", "error amplitude λ0·t0");
const ETA_FRACTION: ParamSpec = maybe("eta_fraction", "number", "η as a multiple of the threshold value (used if eta is absent)");

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        command: Command::SpectralWidth,
        summary: "spectral width and minimum-norm shift of a Hermitian operator",
        operations: &["spectral_width", "min_norm_representative", "op_norm"],
        params: &[
            req("operator", "matrix", "rows of numbers or [re, im] pairs"),
            opt("scan_points", "integer", "201", "shifts scanned around the optimum"),
            opt("scan_span", "number", "1.0", "scan half-width in units of the spectral width"),
        ],
    },
    CommandSpec {
        command: Command::Fidelity,
        summary: "sampled fidelity decay against the cos(Δt) floor",
        operations: &["verify_fidelity_decay", "worst_state", "depolarizing_fidelity"],
        params: &[
            opt("include_zz", "boolean", "true", "include the σz⊗σz model"),
            opt("random_models", "integer", "5", "random couplings with zero free Hamiltonians"),
            opt("bath_dim", "integer", "4", "largest bath dimension for random models"),
            opt("samples", "integer", "1000", "random initial states per point"),
            opt("delta_t", "list<number>", "[0.2, 0.5, 1.0, π/2]", "products Δ·t to evaluate"),
            opt("tolerance", "number", "1e-9", "slack on the floor"),
            maybe("depolarizing_p", "number", "also report the depolarizing-channel fidelity"),
        ],
    },
    CommandSpec {
        command: Command::VerifyBounds,
        summary: "single-gate fault norm against t0·Δ and 2·t0·λ0 on random models",
        operations: &["random_model", "decompose_gate"],
        params: &[
            opt("trials", "integer", "100", "models per qubit count"),
            opt("qubits", "list<integer>", "[1, 2]", "system sizes (1 or 2)"),
            opt("bath_dim", "integer", "8", "largest bath dimension"),
            opt("t0_min", "number", "0.01", "smallest gate time"),
            opt("t0_max", "number", "0.2", "largest gate time"),
            opt("free_hamiltonians", "boolean", "true", "draw random H_S and H_B"),
            opt("slack", "number", "1e-9", "tolerance on each comparison"),
            opt(
                "t0_inflation",
                "number",
                "1.0",
                "fixture: evolve for t0·inflation while bounding at t0",
            ),
        ],
    },
    CommandSpec {
        command: Command::SpreadIdentity,
        summary: "interaction-picture spread identity on random circuits",
        operations: &["verify_spread_identity"],
        params: &[
            opt("trials", "integer", "100", "random circuits"),
            opt("intervals", "integer", "3", "intervals per circuit"),
            opt("system_qubits", "integer", "2", "system qubits"),
            opt("bath_dim", "integer", "2", "bath dimension"),
            opt("fault_counts", "list<integer>", "[0, 1, 2]", "faulty intervals per path"),
            opt("coupling_scale", "number", "0.3", "coupling scale relative to the free part"),
            opt("tolerance", "number", "1e-10", "largest accepted distance"),
        ],
    },
    CommandSpec {
        command: Command::SparseCheck,
        summary: "(r,1)-sparseness of a fault set at each level",
        operations: &["build_concatenation", "is_sparse"],
        params: &[
            LAYOUT,
            req("faults", "list<integer>", "faulty leaf ids"),
            maybe("level", "integer", "single level to check (default: every level)"),
            opt("include_layout", "boolean", "false", "attach the layout tree to JSON output"),
        ],
    },
    CommandSpec {
        command: Command::Propagate,
        summary: "abstract error propagation through a concatenated layout",
        operations: &["propagate_errors", "is_sparse", "lemma8_property_check"],
        params: &[
            LAYOUT,
            opt("faults", "list<integer>", "[]", "faulty leaf ids"),
            maybe("phases", "list<string|null>", "phase per child position, every level"),
            maybe("phases_by_level", "list<list<string|null>>", "phase per child position, per level"),
            opt("phase", "string", "pre-ec", "phase used when no pattern is given"),
            opt("property_trials", "integer", "0", "also run the sampled sparse-in sparse-out check"),
        ],
    },
    CommandSpec {
        command: Command::Threshold,
        summary: "threshold value, fixed point and bisected threshold",
        operations: &["threshold_value", "fixed_point", "empirical_threshold"],
        params: &[
            req("A_C", "integer | list<integer>", "locations per 1-rectangle"),
            BASE_RULE,
            opt("tol", "number", "1e-9", "bisection tolerance"),
        ],
    },
    CommandSpec {
        command: Command::Recursion,
        summary: "level-by-level recursion trace",
        operations: &["iterate_recursion", "base_bound", "cluster_base_bound"],
        params: &[
            req("A_C", "integer", "locations per 1-rectangle"),
            ETA,
            ETA_FRACTION,
            opt("r_max", "integer", "10", "levels to iterate"),
            opt("epsilon_target", "number", "1e-6", "convergence target"),
            BASE_RULE,
        ],
    },
    CommandSpec {
        command: Command::Level,
        summary: "minimal concatenation level for a target output accuracy",
        operations: &["required_level", "solve_eps_prime"],
        params: &[
            req("A_C", "integer", "locations per 1-rectangle"),
            ETA,
            ETA_FRACTION,
            req("N", "integer | list<integer>", "base circuit locations"),
            req("epsilon_target", "number", "output variation-distance target"),
            BASE_RULE,
        ],
    },
    CommandSpec {
        command: Command::Spinboson,
        summary: "spin-boson coupling bounds",
        operations: &["reorg_integral", "energy_bound", "cooling_bound"],
        params: &[
            maybe("alpha", "number", "ohmic coupling α"),
            maybe("omega_c", "number", "ohmic cutoff ω_c"),
            maybe("table", "string", "CSV file with header omega,J (relative to the config file)"),
            maybe("beta_eff", "number", "effective inverse temperature"),
            maybe("bath_energy", "number", "bath energy for the energy bound"),
            opt("methods", "list<string>", "[quadrature, closed, series]", "cooling-bound methods (tables: quadrature only)"),
        ],
    },
    CommandSpec {
        command: Command::Hyperfine,
        summary: "hyperfine coupling bound",
        operations: &["hyperfine_bound_with_kappa", "sigma_dot_spin_norm"],
        params: &[
            req("A_hf", "number", "hyperfine constant"),
            req("v0", "number", "unit-cell volume"),
            req("weights", "list<number>", "|ψ(r_k)|² per site"),
            opt("kappa", "number", "1.5", "single-site norm constant"),
        ],
    },
];

/// Keys read by the config loader itself rather than by a command.
pub const RESERVED_KEYS: &[&str] = &["command", "seed", "format", "output_path"];

pub fn spec(command: Command) -> &'static CommandSpec {
    COMMANDS
        .iter()
        .find(|c| c.command == command)
        .expect("every command has a schema entry")
}

pub fn document() -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "reserved": RESERVED_KEYS,
        "commands": COMMANDS,
    })
}

pub fn help_text() -> String {
    let mut out = String::from("Command parameters (JSON config keys):\n");
    for c in COMMANDS {
        out.push_str(&format!("\n  {}  {}\n", c.command.name(), c.summary));
        for p in c.params {
            let tag = match (p.required, p.default) {
                (true, _) => "required".to_string(),
                (false, Some(d)) => format!("default {d}"),
                (false, None) => "optional".to_string(),
            };
            out.push_str(&format!("      {:<18} {:<26} {}; {}\n", p.name, p.kind, tag, p.doc));
        }
    }
    out.push_str("\n  schema  print the config schema as JSON\n");
    out
}
