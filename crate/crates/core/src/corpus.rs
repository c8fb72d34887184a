//! The regression corpus bundled with the crate: model files with expected
//! verdicts, bπ terms for the encoding harness and curated bπ pairs.

use crate::bpi::correspondence::{check_correspondence, encoded_verdict};
use crate::bpi::encode::Encoder;
use crate::bpi::semantics::bpi_bisimilar;
use crate::equivalence::{check, Mode};
use crate::lts::ExploreOptions;
use crate::parser::bpi::program_text;
use crate::parser::pretty::file_text;
use crate::parser::{parse_abc, parse_bpi};

pub const ABC_FILES: &[(&str, &str)] = &[
    ("forwarding.abc", include_str!("../corpus/abc/forwarding.abc")),
    ("choice_split.abc", include_str!("../corpus/abc/choice_split.abc")),
    ("mixed_choice.abc", include_str!("../corpus/abc/mixed_choice.abc")),
    ("contexts.abc", include_str!("../corpus/abc/contexts.abc")),
    ("laws_system_par.abc", include_str!("../corpus/abc/laws_system_par.abc")),
    ("laws_choice.abc", include_str!("../corpus/abc/laws_choice.abc")),
    ("laws_process_par.abc", include_str!("../corpus/abc/laws_process_par.abc")),
    ("laws_awareness.abc", include_str!("../corpus/abc/laws_awareness.abc")),
    ("laws_silent.abc", include_str!("../corpus/abc/laws_silent.abc")),
];

pub const BPI_TERMS: &str = include_str!("../corpus/bpi/terms.bpi");
pub const BPI_PAIRS: &str = include_str!("../corpus/bpi/pairs.bpi");

/// A pair of systems from one corpus file with its expected verdict.
#[derive(Clone, Copy, Debug)]
pub struct BisimCase {
    pub file: &'static str,
    pub left: &'static str,
    pub right: &'static str,
    pub mode: Mode,
    pub equivalent: bool,
}

const fn weak(file: &'static str, left: &'static str, right: &'static str, equivalent: bool) -> BisimCase {
    BisimCase { file, left, right, mode: Mode::Weak, equivalent }
}

pub const BISIM_CASES: &[BisimCase] = &[
    weak("forwarding.abc", "N", "T", true),
    weak("forwarding.abc", "OpenCP2", "TCP2", false),
    weak("choice_split.abc", "L2", "R2", true),
    weak("choice_split.abc", "L3", "R3", true),
    weak("choice_split.abc", "L3", "Missing3", false),
    weak("mixed_choice.abc", "Bare1", "Bare2", true),
    weak("mixed_choice.abc", "WithOut1", "WithOut2", false),
    weak("contexts.abc", "Base_L", "Base_R", true),
    weak("contexts.abc", "Guard_L", "Guard_R", true),
    weak("contexts.abc", "Input_L", "Input_R", false),
    weak("contexts.abc", "Par_L", "Par_R", false),
    weak("contexts.abc", "Update_L", "Update_R", false),
    weak("laws_system_par.abc", "Comm_L", "Comm_R", true),
    weak("laws_system_par.abc", "Comm3_L", "Comm3_R", true),
    weak("laws_system_par.abc", "Assoc_L", "Assoc_R", true),
    weak("laws_system_par.abc", "Unit_L", "Unit_R", true),
    weak("laws_system_par.abc", "Unit2_L", "Unit2_R", true),
    weak("laws_choice.abc", "Comm_L", "Comm_R", true),
    weak("laws_choice.abc", "Assoc_L", "Assoc_R", true),
    weak("laws_choice.abc", "Zero_L", "Zero_R", true),
    weak("laws_choice.abc", "Idem_L", "Idem_R", true),
    weak("laws_choice.abc", "Dist_L", "Dist_R", true),
    weak("laws_choice.abc", "DistUpd_L", "DistUpd_R", true),
    weak("laws_process_par.abc", "Comm_L", "Comm_R", true),
    weak("laws_process_par.abc", "Assoc_L", "Assoc_R", true),
    weak("laws_process_par.abc", "Zero_L", "Zero_R", true),
    weak("laws_process_par.abc", "Zero2_L", "Zero2_R", true),
    weak("laws_awareness.abc", "False_L", "False_R", true),
    weak("laws_awareness.abc", "FalseSum_L", "FalseSum_R", true),
    weak("laws_awareness.abc", "True_L", "True_R", true),
    weak("laws_awareness.abc", "TruePar_L", "TruePar_R", true),
    weak("laws_awareness.abc", "Nest_L", "Nest_R", true),
    weak("laws_awareness.abc", "Nest2_L", "Nest2_R", true),
    weak("laws_silent.abc", "Recv", "Zero", true),
    weak("laws_silent.abc", "Upd", "Zero", true),
    weak("laws_silent.abc", "Looping", "Zero", true),
    weak("laws_silent.abc", "Guarded", "Zero", true),
];

impl BisimCase {
    pub fn name(&self) -> String {
        let rel = if self.equivalent { "~" } else { "/~" };
        format!("{}: {} {rel} {}", self.file, self.left, self.right)
    }
}

pub fn abc_source(file: &str) -> Option<&'static str> {
    ABC_FILES.iter().find(|(n, _)| *n == file).map(|(_, s)| *s)
}

fn content_lines(text: &'static str) -> impl Iterator<Item = &'static str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("//"))
}

/// `(name, source)` for every bπ corpus term.
pub fn bpi_terms() -> Vec<(&'static str, &'static str)> {
    content_lines(BPI_TERMS)
        .map(|l| {
            let (name, term) = l.split_once(':').expect("`name: term`");
            (name.trim(), term.trim())
        })
        .collect()
}

/// `(expected bisimilar, left, right)` for every curated bπ pair.
pub fn bpi_pairs() -> Vec<(bool, &'static str, &'static str)> {
    content_lines(BPI_PAIRS)
        .map(|l| {
            let parts: Vec<&str> = l.split(";;").map(str::trim).collect();
            assert_eq!(parts.len(), 3, "`expected ;; left ;; right`");
            (parts[0] == "equivalent", parts[1], parts[2])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(name: String, passed: bool, detail: impl Into<String>) -> Self {
        Outcome { name, passed, detail: detail.into() }
    }
}

pub fn run_bisim_case(case: &BisimCase, options: &ExploreOptions) -> Outcome {
    let name = case.name();
    let src = abc_source(case.file).expect("corpus file");
    let file = match parse_abc(src) {
        Ok(f) => f,
        Err(e) => return Outcome::new(name, false, format!("parse error {e}")),
    };
    let (Some(l), Some(r)) = (file.system(Some(case.left)), file.system(Some(case.right))) else {
        return Outcome::new(name, false, "unknown system");
    };
    match check(l, r, &file.defs, &file.universe, options, case.mode) {
        Ok(v) => {
            let detail = format!(
                "{} {}, {}+{} states, fingerprint {}",
                case.mode.name(),
                if v.equivalent { "equivalent" } else { "not equivalent" },
                v.left_states,
                v.right_states,
                v.fingerprint
            );
            Outcome::new(name, v.equivalent == case.equivalent, detail)
        }
        Err(e) => Outcome::new(name, false, e.to_string()),
    }
}

/// Runs the whole corpus: model round trips, expected verdicts, the
/// encoding harness on every bπ term and the curated bπ pairs.
pub fn run(options: &ExploreOptions) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (name, src) in ABC_FILES {
        let ok = parse_abc(src).and_then(|f| Ok(parse_abc(&file_text(&f))? == f));
        let (passed, detail) = match ok {
            Ok(true) => (true, "round trip".to_string()),
            Ok(false) => (false, "printed file parses differently".to_string()),
            Err(e) => (false, e.to_string()),
        };
        out.push(Outcome::new(format!("parse {name}"), passed, detail));
    }
    for case in BISIM_CASES {
        out.push(run_bisim_case(case, options));
    }
    for (name, src) in bpi_terms() {
        let name = format!("encoding {name}");
        let prog = match parse_bpi(src) {
            Ok(p) => p,
            Err(e) => {
                out.push(Outcome::new(name, false, e.to_string()));
                continue;
            }
        };
        let printed = program_text(&prog);
        if parse_bpi(&printed).map(|p| p.source) != Ok(prog.source.clone()) {
            out.push(Outcome::new(name, false, format!("round trip failed: {printed}")));
            continue;
        }
        match check_correspondence(&prog, &Encoder::identity(), options) {
            Ok(r) => {
                let detail = if r.ok() {
                    format!("{} states, {} transitions", r.bpi_states, r.bpi_transitions)
                } else {
                    r.violations.join("; ")
                };
                out.push(Outcome::new(name, r.ok(), detail));
            }
            Err(e) => out.push(Outcome::new(name, false, e.to_string())),
        }
    }
    for (expected, l, r) in bpi_pairs() {
        let name = format!("pair {l} {} {r}", if expected { "~" } else { "/~" });
        let (Ok(p), Ok(q)) = (parse_bpi(l), parse_bpi(r)) else {
            out.push(Outcome::new(name, false, "parse error"));
            continue;
        };
        let source = bpi_bisimilar(&p, &q, Mode::Weak, options.bounds.max_states);
        let target = encoded_verdict(&p, &q, Mode::Weak, options);
        match (source, target) {
            (Ok(s), Ok(t)) => {
                let detail = format!("source {s}, encoding {}", t.equivalent);
                out.push(Outcome::new(name, s == expected && t.equivalent == expected, detail));
            }
            (Err(e), _) => out.push(Outcome::new(name, false, e.to_string())),
            (_, Err(e)) => out.push(Outcome::new(name, false, e.to_string())),
        }
    }
    out
}
