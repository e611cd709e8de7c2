//! TOML model files.
//!
//! A file either names a builtin model,
//!
//! ```toml
//! model = two_atoms(ω0=1, γ=1, γ12=1, s12=0.2)
//! [initial]
//! basis = 2
//! ```
//!
//! or spells out every matrix as rows of `[re, im]` pairs (a bare number is
//! read as a real entry):
//!
//! ```toml
//! temperature = "zero"
//! dims = [2]
//! hamiltonian = [[0, 0], [0, 1]]
//!
//! [[coupling]]
//! name = "sx"
//! matrix = [[0, 1], [1, 0]]
//!
//! [[tensor]]
//! omega = 1.0
//! gamma = [[0.5]]
//! shift = [[0.0]]
//!
//! [initial]
//! basis = 1
//! ```
//!
//! The builtin call is not valid TOML; it is quoted by a regex pass before
//! parsing, which leaves line numbers intact.

use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::Deserialize;
use toml::Spanned;

use qcascade_core::lindblad::{SpectralEntry, SpectralTensor};
use qcascade_core::models::{
    model_damped_cavity, model_n_atoms_cavity, model_two_atoms, ModelSpec,
};
use qcascade_core::operator::{
    basis_state, c, ensure_hermitian, projector, Operator, StateVector, HERMITIAN_INPUT_TOL,
};
use qcascade_core::Error;

static BUILTIN_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r##"(?m)^([ \t]*model[ \t]*=[ \t]*)([^\s"'\[{#][^"#\n]*\))[ \t]*(#.*)?$"##).unwrap()
});
static BUILTIN_CALL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$").unwrap());
static ARGUMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*([^\s=]+)\s*=\s*(.+?)\s*$").unwrap());

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

type RawMatrix = Vec<Vec<Entry>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: Option<String>,
    model: Option<Spanned<String>>,
    temperature: Option<Spanned<String>>,
    beta: Option<Spanned<f64>>,
    dims: Option<Spanned<Vec<usize>>>,
    hamiltonian: Option<Spanned<RawMatrix>>,
    #[serde(default)]
    coupling: Vec<RawCoupling>,
    #[serde(default)]
    tensor: Vec<Spanned<RawEntry>>,
    initial: Option<Spanned<RawInitial>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    name: Option<String>,
    matrix: Spanned<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    omega: f64,
    gamma: Spanned<RawMatrix>,
    shift: Option<Spanned<RawMatrix>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    basis: Option<usize>,
    vector: Option<Vec<Entry>>,
    matrix: Option<Spanned<RawMatrix>>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0[..end].matches('\n').count() + 1
    }
}

fn entry_value(e: &Entry) -> nalgebra::Complex<f64> {
    match *e {
        Entry::Pair([re, im]) => c(re, im),
        Entry::Real(re) => c(re, 0.0),
    }
}

fn to_matrix(raw: &Spanned<RawMatrix>, what: &str, lines: &Lines) -> Result<Operator, ParseError> {
    let line = lines.of(raw.span());
    let rows = raw.get_ref();
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ParseError::at(line, format!("{what} must be a non-empty square matrix")));
    }
    let m = Operator::from_fn(n, n, |i, j| entry_value(&rows[i][j]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ParseError::at(line, format!("{what} has non-finite entries")));
    }
    Ok(m)
}

fn hermitian(raw: &Spanned<RawMatrix>, what: &str, lines: &Lines) -> Result<Operator, ParseError> {
    let m = to_matrix(raw, what, lines)?;
    ensure_hermitian(&m, HERMITIAN_INPUT_TOL)
        .map_err(|e| ParseError::at(lines.of(raw.span()), format!("{what}: {e}")))?;
    Ok(m)
}

/// Parses a model file.
pub fn parse_model(text: &str) -> Result<ModelSpec, ParseError> {
    let quoted = BUILTIN_LINE.replace_all(text, "${1}\"${2}\" ${3}");
    let lines = Lines(&quoted);
    let raw: RawFile = toml::from_str(&quoted).map_err(|e| ParseError {
        line: e.span().map(|s| lines.of(s)),
        message: e.message().trim().to_string(),
    })?;
    let spec = match &raw.model {
        Some(call) => from_builtin(&raw, call, &lines)?,
        None => from_matrices(&raw, &lines)?,
    };
    Ok(match &raw.name {
        Some(name) => spec.with_metadata("name", name),
        None => spec,
    })
}

fn from_builtin(raw: &RawFile, call: &Spanned<String>, lines: &Lines) -> Result<ModelSpec, ParseError> {
    let line = lines.of(call.span());
    let explicit = [
        raw.temperature.as_ref().map(|s| s.span()),
        raw.beta.as_ref().map(|s| s.span()),
        raw.dims.as_ref().map(|s| s.span()),
        raw.hamiltonian.as_ref().map(|s| s.span()),
        raw.coupling.first().map(|c| c.matrix.span()),
        raw.tensor.first().map(|t| t.span()),
    ];
    if let Some(span) = explicit.into_iter().flatten().next() {
        return Err(ParseError::at(
            lines.of(span),
            "a builtin model takes only an optional [initial] section",
        ));
    }
    let mut spec = parse_builtin(call.get_ref()).map_err(|e| ParseError::at(line, e))?;
    if let Some(init) = &raw.initial {
        let rho = initial_state(init, spec.dim(), lines)?;
        spec = spec
            .with_initial_state(rho)
            .map_err(|e| ParseError::at(lines.of(init.span()), e.to_string()))?;
    }
    Ok(spec)
}

#[derive(Debug, Clone)]
enum Arg {
    Num(f64),
    List(Vec<f64>),
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

fn canonical_key(key: &str) -> &str {
    match key {
        "ω0" => "omega0",
        "ω" => "omega",
        "γ" => "gamma",
        "γ12" => "gamma12",
        "κ" => "kappa",
        "γ_at" => "gamma_at",
        other => other,
    }
}

fn parse_value(v: &str) -> Result<Arg, String> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        return split_top_level(inner)
            .into_iter()
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
            .collect::<Result<Vec<_>, _>>()
            .map(Arg::List);
    }
    v.parse::<f64>()
        .map(Arg::Num)
        .map_err(|_| format!("'{v}' is not a number"))
}

struct Args {
    builtin: String,
    values: Vec<(String, Arg)>,
}

impl Args {
    fn take(&mut self, key: &str) -> Option<Arg> {
        let pos = self.values.iter().position(|(k, _)| k == key)?;
        Some(self.values.remove(pos).1)
    }

    fn num(&mut self, key: &str, default: Option<f64>) -> Result<f64, String> {
        match self.take(key) {
            Some(Arg::Num(x)) => Ok(x),
            Some(Arg::List(_)) => Err(format!("{}: '{key}' must be a number", self.builtin)),
            None => default.ok_or_else(|| format!("{}: missing argument '{key}'", self.builtin)),
        }
    }

    fn count(&mut self, key: &str, default: Option<usize>) -> Result<usize, String> {
        let x = self.num(key, default.map(|d| d as f64))?;
        if x < 0.0 || x.fract() != 0.0 {
            return Err(format!("{}: '{key}' must be a non-negative integer", self.builtin));
        }
        Ok(x as usize)
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, String> {
        match self.take(key) {
            Some(Arg::List(v)) => Ok(v),
            Some(Arg::Num(x)) => Ok(vec![x]),
            None => Err(format!("{}: missing argument '{key}'", self.builtin)),
        }
    }

    fn finish(self) -> Result<(), String> {
        match self.values.first() {
            Some((k, _)) => Err(format!("{}: unknown argument '{k}'", self.builtin)),
            None => Ok(()),
        }
    }
}

/// Builds a builtin model from a call such as `damped_cavity(n_max=3, kappa=0.5)`.
///
/// Builtins: `damped_cavity(n_max, omega=1, kappa)`, `damped_qubit(omega=1, kappa)`,
/// `two_atoms(omega0=1, gamma, gamma12=0, s12=0)` and
/// `n_atoms_cavity(g=[..], omega=1, kappa, gamma_at=0, n_photons=1)`. Greek
/// spellings (`ω0`, `γ`, `γ12`, `κ`, `γ_at`) are accepted.
pub fn parse_builtin(call: &str) -> Result<ModelSpec, String> {
    let caps = BUILTIN_CALL
        .captures(call)
        .ok_or_else(|| format!("'{call}' is not a builtin call of the form name(key=value, ...)"))?;
    let builtin = caps[1].to_string();
    let mut values = Vec::new();
    for part in split_top_level(&caps[2]) {
        let a = ARGUMENT
            .captures(part)
            .ok_or_else(|| format!("{builtin}: expected key=value, got '{}'", part.trim()))?;
        let key = canonical_key(&a[1]).to_string();
        if values.iter().any(|(k, _): &(String, Arg)| *k == key) {
            return Err(format!("{builtin}: argument '{key}' given twice"));
        }
        values.push((key, parse_value(&a[2])?));
    }
    let mut args = Args { builtin, values };
    let spec = match args.builtin.as_str() {
        "damped_cavity" => {
            let n_max = args.count("n_max", None)?;
            let omega = args.num("omega", Some(1.0))?;
            let kappa = args.num("kappa", None)?;
            model_damped_cavity(n_max, omega, kappa)
        }
        "damped_qubit" => {
            let omega = args.num("omega", Some(1.0))?;
            let kappa = args.num("kappa", None)?;
            model_damped_cavity(1, omega, kappa)
        }
        "two_atoms" => {
            let omega0 = args.num("omega0", Some(1.0))?;
            let gamma = args.num("gamma", None)?;
            let gamma12 = args.num("gamma12", Some(0.0))?;
            let s12 = args.num("s12", Some(0.0))?;
            model_two_atoms(omega0, gamma, gamma12, s12)
        }
        "n_atoms_cavity" => {
            let g = args.list("g")?;
            let omega = args.num("omega", Some(1.0))?;
            let kappa = args.num("kappa", None)?;
            let gamma_at = args.num("gamma_at", Some(0.0))?;
            let n_photons = args.count("n_photons", Some(1))?;
            model_n_atoms_cavity(&g, omega, kappa, gamma_at, n_photons)
        }
        other => {
            return Err(format!(
                "unknown builtin '{other}' (damped_cavity, damped_qubit, two_atoms, n_atoms_cavity)"
            ))
        }
    };
    let name = args.builtin.clone();
    args.finish()?;
    spec.map(|s| s.with_metadata("builtin", name))
        .map_err(|e| e.to_string())
}

fn initial_state(init: &Spanned<RawInitial>, dim: usize, lines: &Lines) -> Result<Operator, ParseError> {
    let line = lines.of(init.span());
    let i = init.get_ref();
    let given = [i.basis.is_some(), i.vector.is_some(), i.matrix.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(ParseError::at(
            line,
            "[initial] needs exactly one of basis, vector or matrix",
        ));
    }
    if let Some(k) = i.basis {
        if k >= dim {
            return Err(ParseError::at(line, format!("basis index {k} out of range for dimension {dim}")));
        }
        return Ok(projector(&basis_state(dim, k)));
    }
    if let Some(v) = &i.vector {
        if v.len() != dim {
            return Err(ParseError::at(line, format!("vector has {} entries, expected {dim}", v.len())));
        }
        let psi = StateVector::from_iterator(dim, v.iter().map(entry_value));
        let n = psi.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(ParseError::at(line, "initial vector is zero or non-finite"));
        }
        return Ok(projector(&(psi / c(n, 0.0))));
    }
    let m = i.matrix.as_ref().unwrap();
    let rho = hermitian(m, "initial density matrix", lines)?;
    if rho.nrows() != dim {
        return Err(ParseError::at(lines.of(m.span()), format!("initial density matrix must be {dim}x{dim}")));
    }
    Ok(rho)
}

fn from_matrices(raw: &RawFile, lines: &Lines) -> Result<ModelSpec, ParseError> {
    let h_raw = raw
        .hamiltonian
        .as_ref()
        .ok_or_else(|| ParseError::general("missing 'hamiltonian' (or a builtin 'model = ...' line)"))?;
    let h = hermitian(h_raw, "hamiltonian", lines)?;
    let dim = h.nrows();

    let dims = match &raw.dims {
        Some(d) => {
            if d.get_ref().is_empty() || d.get_ref().iter().product::<usize>() != dim {
                return Err(ParseError::at(
                    lines.of(d.span()),
                    format!("dims {:?} do not multiply to the hamiltonian dimension {dim}", d.get_ref()),
                ));
            }
            d.get_ref().clone()
        }
        None => vec![dim],
    };

    let beta = match &raw.temperature {
        None => f64::INFINITY,
        Some(t) if t.get_ref() == "zero" => {
            if let Some(b) = &raw.beta {
                return Err(ParseError::at(lines.of(b.span()), "'beta' conflicts with temperature = \"zero\""));
            }
            f64::INFINITY
        }
        Some(t) if t.get_ref() == "finite" => {
            let b = raw.beta.as_ref().ok_or_else(|| {
                ParseError::at(lines.of(t.span()), "temperature = \"finite\" needs 'beta'")
            })?;
            *b.get_ref()
        }
        Some(t) => {
            return Err(ParseError::at(
                lines.of(t.span()),
                format!("temperature must be \"zero\" or \"finite\", got \"{}\"", t.get_ref()),
            ))
        }
    };

    if raw.coupling.is_empty() {
        return Err(ParseError::general("at least one [[coupling]] is required"));
    }
    let mut couplings = Vec::with_capacity(raw.coupling.len());
    for (k, cp) in raw.coupling.iter().enumerate() {
        let name = cp.name.clone().unwrap_or_else(|| format!("A{}", k + 1));
        let a = hermitian(&cp.matrix, &format!("coupling '{name}'"), lines)?;
        if a.nrows() != dim {
            return Err(ParseError::at(
                lines.of(cp.matrix.span()),
                format!("coupling '{name}' must be {dim}x{dim}"),
            ));
        }
        couplings.push((name, a));
    }
    let channels = couplings.len();

    let mut entries = Vec::with_capacity(raw.tensor.len());
    for t in &raw.tensor {
        let e = t.get_ref();
        let line = lines.of(t.span());
        let gamma = to_matrix(&e.gamma, "gamma", lines)?;
        let shift = match &e.shift {
            Some(s) => to_matrix(s, "shift", lines)?,
            None => Operator::zeros(channels, channels),
        };
        if gamma.nrows() != channels || shift.nrows() != channels {
            return Err(ParseError::at(
                line,
                format!("tensor matrices at omega = {} must be {channels}x{channels}", e.omega),
            ));
        }
        if !e.omega.is_finite() {
            return Err(ParseError::at(line, "omega must be finite"));
        }
        entries.push(SpectralEntry {
            omega: e.omega,
            gamma,
            shift,
        });
    }
    let tensor = SpectralTensor::new(channels, beta, entries).map_err(|err| {
        let omega = match &err {
            Error::NotPositive { omega, .. } | Error::AbsorptionAtZeroTemperature { omega } => Some(*omega),
            _ => None,
        };
        let line = omega.and_then(|w| {
            raw.tensor
                .iter()
                .find(|t| t.get_ref().omega == w)
                .map(|t| lines.of(t.span()))
        });
        ParseError {
            line,
            message: err.to_string(),
        }
    })?;

    let init = raw
        .initial
        .as_ref()
        .ok_or_else(|| ParseError::general("missing [initial] section"))?;
    let rho = initial_state(init, dim, lines)?;
    let line = lines.of(init.span());
    ModelSpec::new(dims, h, couplings, tensor, rho).map_err(|e| match e {
        Error::InvalidState(_) => ParseError::at(line, e.to_string()),
        other => ParseError::general(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcascade_core::operator::max_abs_diff;

    const QUBIT: &str = r#"
name = "damped qubit"
temperature = "zero"
dims = [2]
hamiltonian = [[0, 0], [0, 1]]

[[coupling]]
name = "sx"
matrix = [[0, 1], [1, 0]]

[[tensor]]
omega = 1.0
gamma = [[0.5]]

[initial]
basis = 1
"#;

    #[test]
    fn minimal_qubit_file() {
        let spec = parse_model(QUBIT).unwrap();
        assert_eq!(spec.dims, vec![2]);
        assert_eq!(spec.couplings.len(), 1);
        assert_eq!(spec.tensor.lookup(1.0, 1e-12).unwrap().gamma[(0, 0)], c(0.5, 0.0));
        assert_eq!(spec.initial_state[(1, 1)], c(1.0, 0.0));
        assert_eq!(spec.metadata["name"], "damped qubit");
    }

    #[test]
    fn pairs_and_reals_mix() {
        let text = QUBIT.replace("[[0, 1], [1, 0]]", "[[0, [0, -1]], [[0, 1], 0]]");
        let spec = parse_model(&text).unwrap();
        assert_eq!(spec.couplings[0].1[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn absorption_at_zero_temperature_is_refused_with_a_line() {
        let text = format!("{QUBIT}\n[[tensor]]\nomega = -1.0\ngamma = [[0.1]]\n");
        let err = parse_model(&text).unwrap_err();
        assert_eq!(err.line, Some(18));
        assert!(err.message.contains("zero-temperature rule"), "{err}");
    }

    #[test]
    fn finite_temperature_accepts_absorption() {
        let text = QUBIT.replace("temperature = \"zero\"", "temperature = \"finite\"\nbeta = 2.0")
            + "\n[[tensor]]\nomega = -1.0\ngamma = [[0.0677]]\n";
        let spec = parse_model(&text).unwrap();
        assert!(!spec.tensor.is_zero_temperature());
    }

    #[test]
    fn non_hermitian_hamiltonian_cites_its_line() {
        let text = QUBIT.replace("hamiltonian = [[0, 0], [0, 1]]", "hamiltonian = [[0, 1], [0, 1]]");
        let err = parse_model(&text).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("not Hermitian"));
    }

    #[test]
    fn indefinite_rates_cite_the_entry() {
        let text = QUBIT.replace("gamma = [[0.5]]", "gamma = [[-0.5]]");
        let err = parse_model(&text).unwrap_err();
        assert_eq!(err.line, Some(11));
        assert!(err.message.contains("positive semidefinite"));
    }

    #[test]
    fn malformed_numbers_cite_their_line() {
        let text = QUBIT.replace("omega = 1.0", "omega = 1.0.0");
        let err = parse_model(&text).unwrap_err();
        assert_eq!(err.line, Some(12));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_model(&QUBIT.replace("dims = [2]", "dims = [3]")).unwrap_err().line == Some(4));
        assert!(parse_model(&QUBIT.replace("basis = 1", "basis = 2")).is_err());
        assert!(parse_model(&QUBIT.replace("temperature = \"zero\"", "temperature = \"warm\"")).is_err());
        assert!(parse_model(&QUBIT.replace("[[0.5]]", "[[0.5, 0], [0, 0.5]]")).is_err());
        assert!(parse_model(&QUBIT.replace("name = \"sx\"", "label = \"sx\"")).is_err());
        assert!(parse_model("hamiltonian = [[1]]\n").is_err());
    }

    #[test]
    fn builtin_matches_constructor() {
        let spec = parse_model("model = two_atoms(ω0=1, γ=1, γ12=1, s12=0.2)\n").unwrap();
        let direct = model_two_atoms(1.0, 1.0, 1.0, 0.2).unwrap();
        assert_eq!(spec.h_s, direct.h_s);
        assert_eq!(spec.couplings, direct.couplings);
        assert_eq!(spec.tensor, direct.tensor);
        assert_eq!(spec.initial_state, direct.initial_state);
        assert_eq!(spec.metadata["builtin"], "two_atoms");
    }

    #[test]
    fn builtin_with_initial_override_and_comment() {
        let text = "# coincident atoms\nmodel = two_atoms(gamma=1, gamma12=1) # from |eg>\n[initial]\nbasis = 2\n";
        let spec = parse_model(text).unwrap();
        assert!(max_abs_diff(&spec.initial_state, &projector(&basis_state(4, 2))) < 1e-15);
    }

    #[test]
    fn builtin_argument_errors() {
        let err = parse_model("\nmodel = two_atoms(gamma=1, gamma12=2)\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(parse_builtin("two_atoms(gamma=1, colour=2)").unwrap_err().contains("colour"));
        assert!(parse_builtin("two_atoms(gamma12=0.5)").unwrap_err().contains("gamma"));
        assert!(parse_builtin("damped_cavity(n_max=1.5, kappa=1)").is_err());
        assert!(parse_builtin("four_atoms(gamma=1)").is_err());
        assert!(parse_builtin("two_atoms(gamma=x)").is_err());
        assert!(parse_model("model = two_atoms(gamma=1)\nhamiltonian = [[1]]\n").unwrap_err().line == Some(2));
    }

    #[test]
    fn n_atoms_builtin_takes_a_list() {
        let spec = parse_builtin("n_atoms_cavity(g=[0.1, 0.07], kappa=0.2, γ_at=0.05, n_photons=2)").unwrap();
        let direct = model_n_atoms_cavity(&[0.1, 0.07], 1.0, 0.2, 0.05, 2).unwrap();
        assert_eq!(spec.h_s, direct.h_s);
        assert_eq!(spec.tensor, direct.tensor);
    }
}
